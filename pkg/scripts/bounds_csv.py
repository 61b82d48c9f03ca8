#!/usr/bin/env python3
"""Write lower/upper efficiency bounds against the number of parties as CSV.

One file with columns M, N, lower, upper, one_over_M, conjectural; ready for
any plotting tool.
"""

import argparse
import csv
import sys
import time

from bellbound.bounds import bounds_table


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m-list", default="4,16,64,256")
    parser.add_argument("--n-max", type=int, default=200)
    parser.add_argument("-o", "--output", help="CSV path (stdout when omitted)")
    args = parser.parse_args(argv)

    start = time.perf_counter()
    rows = bounds_table([int(m) for m in args.m_list.split(",")], args.n_max)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["M", "N", "lower", "upper", "one_over_M", "conjectural"])
        for r in rows:
            writer.writerow([r.M, r.N, f"{float(r.lower):.12g}", f"{r.upper:.12g}", f"{1 / r.M:.12g}", r.conjectural])
    finally:
        if args.output:
            out.close()

    # summary on stderr so the CSV stays clean
    for m in sorted({r.M for r in rows}):
        first = next(r for r in rows if r.M == m and r.N == 2)
        last = next(r for r in rows if r.M == m and r.N == args.n_max)
        print(
            f"M={m:4d}  N=2: {float(first.lower):.6f} ({float(first.lower) * m:.3f}/M)  "
            f"N={args.n_max}: lower {float(last.lower):.6f} upper {last.upper:.6f}  1/M {1 / m:.6f}",
            file=sys.stderr,
        )
    print(f"{len(rows)} rows in {time.perf_counter() - start:.3f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
