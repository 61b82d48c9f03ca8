#!/usr/bin/env python3
"""Certify the modular constructions on desk-scale scenarios.

For each scenario: the exhaustive local maximum of the functional, the Bell
value of the lossy box at the closed-form threshold, and an LP bracket on the
critical efficiency of the box.
"""

import argparse
import itertools
import time
from fractions import Fraction

from bellbound.behavior import apply_loss
from bellbound.bounds import bipartite_bound, multipartite_upper
from bellbound.inequality import build_bipartite, build_multipartite, evaluate
from bellbound.lhv_oracle import max_bell_value
from bellbound.local_polytope import critical_eta
from bellbound.strategies import modular_box_bipartite, modular_box_multipartite, strategy_count


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tol", type=Fraction, default=Fraction(1, 1000))
    parser.add_argument("--no-prepass", action="store_true", help="pure exact simplex")
    parser.add_argument("--skip-lp", action="store_true")
    args = parser.parse_args(argv)

    print(f"{'scenario':>10} {'P':>2} {'LHV max':>7} {'threshold':>10} {'value there':>12} {'LP bracket':>26} {'time':>7}")
    cases = [((ma, mb), False) for ma, mb in itertools.product([2, 3, 4], repeat=2) if ma <= mb]
    cases.append(((2, 2, 2), True))
    for inputs, multi in cases:
        start = time.perf_counter()
        if multi:
            F = build_multipartite(inputs)
            box = modular_box_multipartite(inputs, F.prime)
            up = multipartite_upper(inputs)
            threshold = f"{up.value:.6f}"
            at = Fraction(up.value).limit_denominator(10**6)
        else:
            F = build_bipartite(*inputs)
            box = modular_box_bipartite(*inputs, F.prime)
            at = bipartite_bound(*inputs)
            threshold = str(at)
        lhv = max_bell_value(F).max_value
        value = evaluate(F, apply_loss(box, at))
        bracket = "skipped"
        # LP only where the vertex count stays small
        if not args.skip_lp and strategy_count(box.scenario) <= 10**4:
            b = critical_eta(box, args.tol, prepass=not args.no_prepass)
            bracket = f"[{float(b.lower):.6f}, {float(b.upper):.6f}]"
        name = "x".join(map(str, inputs))
        print(
            f"{name:>10} {F.prime:>2} {lhv:>7} {threshold:>10} {float(value):>12.3g} {bracket:>26} "
            f"{time.perf_counter() - start:>6.1f}s"
        )


if __name__ == "__main__":
    main()
