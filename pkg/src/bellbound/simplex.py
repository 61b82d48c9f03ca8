"""Exact phase-one simplex for ``A w = b, w >= 0`` with rational data.

The solver works on the revised form: the basis inverse is kept as sparse rows
of Fractions, and pricing runs on integers by scaling the duals to a common
denominator. Entering columns follow the most negative reduced cost; after a
run of degenerate pivots the rule falls back to Bland's smallest-index choice
until the objective moves again, which rules out cycling. Leaving rows are
always chosen by the minimum ratio with ties broken by smallest variable index.

At optimum the dual vector y satisfies y.A_j <= 0 for every structural column,
and y.b equals the total artificial mass; when that is positive, y is a Farkas
certificate of infeasibility.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix

__all__ = ["PhaseOneResult", "phase_one"]

log = logging.getLogger(__name__)

# (row, coefficient) pairs
Column = Sequence[tuple[int, int]]


@dataclass
class PhaseOneResult:
    feasible: bool
    # structural column index -> positive value, for the final basic solution
    solution: dict[int, Fraction]
    # dual vector over rows at optimum (the Farkas certificate when infeasible)
    duals: list[Fraction]
    infeasibility: Fraction
    pivots: int


def _lcm_denominator(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, v.denominator)
    return d


def phase_one(
    columns: Sequence[Column],
    rhs: Sequence[Fraction],
    *,
    degenerate_switch: int = 20,
    max_pivots: int | None = None,
) -> PhaseOneResult:
    """Minimize the artificial mass in ``A w + s = b`` with ``b >= 0``.

    When ``A`` is entrywise nonnegative, any column touching a row with zero
    right-hand side must carry zero weight, so such columns and rows are
    removed before pivoting. The reduced problem's duals are extended to a
    certificate for the full problem by giving the removed rows a dual of -K,
    with K large enough to keep every removed column's reduced cost nonnegative.
    """
    b = [Fraction(v) for v in rhs]
    if any(v < 0 for v in b):
        raise ValueError("phase one needs a nonnegative right-hand side")
    if any(c < 0 for col in columns for _, c in col):
        return _phase_one(columns, b, degenerate_switch=degenerate_switch, max_pivots=max_pivots)

    zero_rows = {r for r, v in enumerate(b) if v == 0}
    keep_cols = [j for j, col in enumerate(columns) if not any(r in zero_rows for r, _ in col)]
    keep_rows = [r for r in range(len(b)) if r not in zero_rows]
    row_map = {r: i for i, r in enumerate(keep_rows)}
    col_map = {j: i for i, j in enumerate(keep_cols)}
    reduced_cols = [tuple((row_map[r], c) for r, c in columns[j]) for j in keep_cols]
    log.debug(
        "presolve: %d/%d columns, %d/%d rows", len(keep_cols), len(columns), len(keep_rows), len(b)
    )
    res = _phase_one(
        reduced_cols,
        [b[r] for r in keep_rows],
        degenerate_switch=degenerate_switch,
        max_pivots=max_pivots,
    )
    duals = [Fraction(0)] * len(b)
    for i, r in enumerate(keep_rows):
        duals[r] = res.duals[i]
    big = Fraction(0)
    for j, col in enumerate(columns):
        if j in col_map:
            continue
        big = max(big, sum((duals[r] * c for r, c in col if r not in zero_rows), Fraction(0)))
    for r in zero_rows:
        duals[r] = -big
    solution = {keep_cols[i]: v for i, v in res.solution.items()}
    return PhaseOneResult(res.feasible, solution, duals, res.infeasibility, res.pivots)


def _phase_one(
    columns: Sequence[Column],
    rhs: Sequence[Fraction],
    *,
    degenerate_switch: int = 20,
    max_pivots: int | None = None,
) -> PhaseOneResult:
    m = len(rhs)
    n = len(columns)
    b = list(rhs)
    if m == 0:
        return PhaseOneResult(True, {}, [], Fraction(0), 0)

    # basic variable ids: structural j in [0, n), artificial i is n + i
    basis = [n + i for i in range(m)]
    binv: list[dict[int, Fraction]] = [{i: Fraction(1)} for i in range(m)]
    xb = list(b)
    y: dict[int, Fraction] = {i: Fraction(1) for i in range(m)}
    in_basis = set()

    pivots = 0
    degenerate_run = 0
    limit = max_pivots if max_pivots is not None else 50 * (m + n)

    col_nnz = max((sum(abs(c) for _, c in col) for col in columns), default=1)
    matrix = csr_matrix(
        (
            np.array([c for col in columns for _, c in col], dtype=np.int64),
            (
                np.repeat(np.arange(n), [len(col) for col in columns]),
                np.array([r for col in columns for r, _ in col], dtype=np.int64),
            ),
        ),
        shape=(n, m),
    )

    def reduced_costs_scaled():
        scale = _lcm_denominator(y.values())
        yi = {r: v.numerator * (scale // v.denominator) for r, v in y.items()}
        if max(map(abs, yi.values()), default=0) * col_nnz < 2**62:
            # fast path: integer matvec over all columns
            yv = np.zeros(m, dtype=np.int64)
            for r, v in yi.items():
                yv[r] = v
            dots = matrix @ yv
            pos = np.flatnonzero(dots > 0)
            return [(int(dots[j]), int(j)) for j in pos if int(j) not in in_basis]
        out = []
        for j in range(n):
            if j in in_basis:
                continue
            dot = 0
            for r, c in columns[j]:
                w = yi.get(r)
                if w:
                    dot += w * c
            if dot > 0:
                # reduced cost is -dot/scale
                out.append((dot, j))
        return out

    while True:
        if pivots >= limit:
            raise RuntimeError(f"simplex exceeded {limit} pivots")
        bland = degenerate_run >= degenerate_switch
        cands = reduced_costs_scaled()
        if not cands:
            break
        if bland:
            entering = min(j for _, j in cands)
        else:
            best = max(d for d, _ in cands)
            entering = min(j for d, j in cands if d == best)

        col = columns[entering]
        u = []
        for i in range(m):
            row = binv[i]
            acc = 0
            for r, c in col:
                v = row.get(r)
                if v is not None:
                    acc += v * c
            u.append(acc)

        leave = None
        best_ratio = None
        for i in range(m):
            if u[i] > 0:
                ratio = xb[i] / u[i]
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leave])
                ):
                    best_ratio, leave = ratio, i
        if leave is None:
            # cannot happen in phase one: the objective is bounded below by zero
            raise RuntimeError("unbounded direction in phase one")

        degenerate_run = degenerate_run + 1 if best_ratio == 0 else 0

        piv = u[leave]
        # dual update uses the old pivot row: y += (d_j / u_r) * Binv[r], with d_j = -y.A_j
        dj = -sum(y.get(r, 0) * c for r, c in col)
        theta = dj / piv
        for r, v in binv[leave].items():
            nv = y.get(r, 0) + theta * v
            if nv:
                y[r] = nv
            else:
                y.pop(r, None)

        prow = {r: v / piv for r, v in binv[leave].items()}
        binv[leave] = prow
        xb[leave] = xb[leave] / piv
        for i in range(m):
            if i == leave or not u[i]:
                continue
            f = u[i]
            row = binv[i]
            for r, v in prow.items():
                nv = row.get(r, 0) - f * v
                if nv:
                    row[r] = nv
                else:
                    row.pop(r, None)
            xb[i] -= f * xb[leave]

        old = basis[leave]
        in_basis.discard(old)
        basis[leave] = entering
        in_basis.add(entering)
        pivots += 1

    infeas = sum((xb[i] for i in range(m) if basis[i] >= n), Fraction(0))
    solution = {basis[i]: xb[i] for i in range(m) if basis[i] < n and xb[i] != 0}
    duals = [y.get(i, Fraction(0)) for i in range(m)]
    log.debug("phase one: %d pivots, infeasibility %s", pivots, infeas)
    return PhaseOneResult(infeas == 0, solution, duals, infeas, pivots)


def solve_on_support(
    columns: Sequence[Column], support: Sequence[int], rhs: Sequence[Fraction]
) -> dict[int, Fraction] | None:
    """Exact nonnegative solution of ``A_S w = b`` on the given columns, if one is forced.

    Gaussian elimination over the rationals. Returns None when the system is
    inconsistent, has a negative component, or leaves free variables (the
    caller then falls back to the full simplex).
    """
    support = list(support)
    m, k = len(rhs), len(support)
    rows = [[Fraction(0)] * k + [Fraction(v)] for v in rhs]
    for jj, j in enumerate(support):
        for r, c in columns[j]:
            rows[r][jj] += c
    pivot_cols = []
    rank = 0
    for cidx in range(k):
        piv = next((i for i in range(rank, m) if rows[i][cidx] != 0), None)
        if piv is None:
            return None
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        inv = 1 / pr[cidx]
        for t in range(cidx, k + 1):
            pr[t] *= inv
        for i in range(m):
            if i != rank and rows[i][cidx] != 0:
                f = rows[i][cidx]
                ri = rows[i]
                for t in range(cidx, k + 1):
                    if pr[t]:
                        ri[t] -= f * pr[t]
        pivot_cols.append(cidx)
        rank += 1
    if any(rows[i][k] != 0 for i in range(rank, m)):
        return None
    sol = {support[c]: rows[i][k] for i, c in enumerate(pivot_cols)}
    if any(v < 0 for v in sol.values()):
        return None
    return {j: v for j, v in sol.items() if v != 0}
