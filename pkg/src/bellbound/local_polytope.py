"""Exact membership of a behavior in the local polytope, and critical efficiency by bisection.

The LP runs in collapsed coordinates: one normalization coordinate plus
p(a_S | x_S) for every nonempty party subset S, non-Φ outcomes a_S and inputs
x_S, with the inputs outside S pinned to 1. On no-signaling behaviors these
coordinates determine the whole table, so equality there is equality of
behaviors. Signaling inputs are rejected up front with a signaling witness,
since nothing local can reproduce them.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csc_matrix, hstack, identity

from .behavior import Behavior, Scenario, apply_loss, check_no_signaling, format_fraction
from .simplex import phase_one, solve_on_support
from .strategies import (
    BudgetExceeded,
    DeterministicStrategy,
    LocalModel,
    default_budget,
    model_behavior,
    strategy_count,
)

__all__ = [
    "Feasible",
    "Separating",
    "LocalityVerdict",
    "CriticalEta",
    "LocalPolytope",
    "is_local",
    "critical_eta",
    "witness_value",
    "DEFAULT_LP_BUDGET",
    "DEFAULT_TOLERANCE",
]

log = logging.getLogger(__name__)

DEFAULT_LP_BUDGET = 10**5
DEFAULT_TOLERANCE = Fraction(1, 10**4)
FLOAT_INTERIOR_TOL = 1e-9


@dataclass(frozen=True)
class Feasible:
    model: LocalModel

    is_local = True

    def to_json(self) -> dict:
        return self.model.to_json()


@dataclass(frozen=True, eq=False)
class Separating:
    # coefficients over the full behavior table (same shape and order)
    coeffs: np.ndarray = field(repr=False)
    gap: Fraction

    is_local = False

    def to_json(self) -> dict:
        return {"coeffs": [format_fraction(v) for v in self.coeffs.flat], "gap": format_fraction(self.gap)}


LocalityVerdict = Union[Feasible, Separating]


def witness_value(coeffs: np.ndarray, b: Behavior) -> Fraction:
    return sum((coeffs * b.table).flat, Fraction(0))


class LocalPolytope:
    """Vertex columns and coordinate map for one scenario, built once and reused."""

    def __init__(self, scenario: Scenario, *, budget: int | None = None):
        budget = default_budget(DEFAULT_LP_BUDGET) if budget is None else budget
        count = strategy_count(scenario)
        if count > budget:
            raise BudgetExceeded(f"{count} vertex columns exceed the LP budget of {budget}")
        self.scenario = scenario
        s = scenario
        n, p = s.num_parties, s.num_outputs
        # coordinate 0 is normalization; then one block per nonempty subset
        self.blocks: list[tuple[tuple[int, ...], int]] = []
        offset = 1
        for size in range(1, n + 1):
            for subset in itertools.combinations(range(n), size):
                self.blocks.append((subset, offset))
                offset += int(np.prod([s.inputs_per_party[i] * p for i in subset]))
        self.dim = offset
        self.columns = [self._column(flat) for flat in self._flats()]

    def _flats(self):
        s = self.scenario
        return itertools.product(range(s.alphabet), repeat=sum(s.inputs_per_party))

    def strategy(self, index: int) -> DeterministicStrategy:
        s = self.scenario
        total = sum(s.inputs_per_party)
        digits = []
        for _ in range(total):
            index, r = divmod(index, s.alphabet)
            digits.append(r)
        flat = digits[::-1]
        cuts = list(itertools.accumulate(s.inputs_per_party, initial=0))
        return DeterministicStrategy(s, tuple(tuple(flat[cuts[i]:cuts[i + 1]]) for i in range(s.num_parties)))

    def _coord(self, subset, offset, xs, a_s) -> int:
        # mixed radix over (x_i, a_i) pairs, first party of the subset slowest
        s = self.scenario
        p = s.num_outputs
        idx = 0
        for i, x, a in zip(subset, xs, a_s):
            idx = idx * (s.inputs_per_party[i] * p) + (x - 1) * p + a
        return offset + idx

    def _column(self, flat) -> tuple[tuple[int, int], ...]:
        s = self.scenario
        cuts = list(itertools.accumulate(s.inputs_per_party, initial=0))
        resp = [flat[cuts[i]:cuts[i + 1]] for i in range(s.num_parties)]
        rows = [(0, 1)]
        for subset, offset in self.blocks:
            for xs in itertools.product(*(range(1, s.inputs_per_party[i] + 1) for i in subset)):
                a_s = [resp[i][x - 1] for i, x in zip(subset, xs)]
                if s.phi in a_s:
                    continue
                rows.append((self._coord(subset, offset, xs, a_s), 1))
        return tuple(rows)

    def coordinates(self, b: Behavior) -> list[Fraction]:
        s = self.scenario
        n, p = s.num_parties, s.num_outputs
        vec = [Fraction(0)] * self.dim
        vec[0] = sum(b.block([1] * n).flat, Fraction(0))
        for subset, offset in self.blocks:
            hidden = tuple(j for j in range(n) if j not in subset)
            for xs in itertools.product(*(range(1, s.inputs_per_party[i] + 1) for i in subset)):
                x = [1] * n
                for i, v in zip(subset, xs):
                    x[i] = v
                block = b.block(x)
                marg = block.sum(axis=hidden) if hidden else block
                for a_s in itertools.product(range(p), repeat=len(subset)):
                    vec[self._coord(subset, offset, xs, a_s)] = marg[a_s]
        return vec

    def lift(self, y: Sequence[Fraction]) -> np.ndarray:
        """Full-table coefficients whose value on any behavior equals y . coordinates."""
        s = self.scenario
        n, p = s.num_parties, s.num_outputs
        coeffs = np.full(s.shape, Fraction(0), dtype=object)
        ones = (0,) * n
        coeffs[ones] = coeffs[ones] + y[0]
        for subset, offset in self.blocks:
            for xs in itertools.product(*(range(1, s.inputs_per_party[i] + 1) for i in subset)):
                xi = [0] * n
                for i, v in zip(subset, xs):
                    xi[i] = v - 1
                for a_s in itertools.product(range(p), repeat=len(subset)):
                    w = y[self._coord(subset, offset, xs, a_s)]
                    if not w:
                        continue
                    sel = [slice(None)] * n
                    for i, a in zip(subset, a_s):
                        sel[i] = a
                    idx = tuple(xi) + tuple(sel)
                    coeffs[idx] = coeffs[idx] + w
        return coeffs

    def vertex_max(self, y: Sequence[Fraction]) -> tuple[Fraction, int]:
        """max over deterministic vertices of y . v, with the first maximizing column."""
        best, arg = None, -1
        for j, col in enumerate(self.columns):
            v = sum((y[r] * c for r, c in col), Fraction(0))
            if best is None or v > best:
                best, arg = v, j
        return best, arg

    def _float_phase_one(self, target: Sequence[Fraction]):
        """Floating-point phase one: (artificial mass, weights, duals) or None."""
        rows, cols, vals = [], [], []
        for j, col in enumerate(self.columns):
            for r, c in col:
                rows.append(r)
                cols.append(j)
                vals.append(c)
        n = len(self.columns)
        a = csc_matrix((vals, (rows, cols)), shape=(self.dim, n), dtype=float)
        a = hstack([a, identity(self.dim, format="csc")], format="csc")
        cost = np.concatenate([np.zeros(n), np.ones(self.dim)])
        res = linprog(
            cost,
            A_eq=a,
            b_eq=np.array([float(v) for v in target]),
            bounds=(0, None),
            method="highs",
        )
        if res.status != 0:
            return None
        return res.fun, res.x[:n], res.eqlin.marginals

    def _seeded(self, b: Behavior, target: Sequence[Fraction]) -> LocalityVerdict | None:
        """Try to certify exactly from a floating-point solve; None when that fails."""
        seed = self._float_phase_one(target)
        if seed is None:
            return None
        mass, weights, duals = seed
        if mass <= FLOAT_INTERIOR_TOL:
            support = [int(j) for j in np.flatnonzero(weights > FLOAT_INTERIOR_TOL)]
            sol = solve_on_support(self.columns, support, target)
            if sol is None:
                return None
            return self._feasible(b, sol)
        y = [Fraction(float(v)).limit_denominator(10**9) for v in duals]
        return self._separating(b, y, target)

    def _feasible(self, b: Behavior, solution: dict[int, Fraction]) -> Feasible:
        pairs = [(w, self.strategy(j)) for j, w in sorted(solution.items())]
        model = LocalModel.from_deterministic(pairs)
        if model_behavior(model) != b:
            raise RuntimeError("LP decomposition does not reproduce the behavior")
        return Feasible(model)

    def _separating(self, b: Behavior, y: list[Fraction], target) -> Separating | None:
        top, _ = self.vertex_max(y)
        value = sum((yi * ti for yi, ti in zip(y, target)), Fraction(0))
        if value <= top:
            return None
        y = list(y)
        y[0] -= top
        coeffs = self.lift(y)
        gap = witness_value(coeffs, b)
        if gap != value - top:
            raise RuntimeError("lifted witness disagrees with its collapsed form")
        return Separating(coeffs, gap)

    def is_local(self, b: Behavior, *, prepass: bool = True) -> LocalityVerdict:
        if b.scenario != self.scenario:
            raise ValueError(f"behavior on {b.scenario}, polytope on {self.scenario}")
        report = check_no_signaling(b)
        if not report.passed:
            return _signaling_witness(b, report)
        target = self.coordinates(b)
        if prepass:
            verdict = self._seeded(b, target)
            if verdict is not None:
                return verdict
            log.info("float seed not certifiable; running the exact simplex")
        result = phase_one(self.columns, target)
        if result.feasible:
            return self._feasible(b, result.solution)
        verdict = self._separating(b, list(result.duals), target)
        if verdict is None:
            raise RuntimeError("Farkas certificate from the exact solve has no positive gap")
        return verdict


def _signaling_witness(b: Behavior, report) -> Separating:
    """p(a_S | x) - p(a_S | x'): zero on every no-signaling table, positive on ``b``."""
    s = b.scenario
    n = s.num_parties
    subset, a_s, x_hi, x_lo = report.witness
    coeffs = np.full(s.shape, Fraction(0), dtype=object)
    for x, sign in ((x_hi, 1), (x_lo, -1)):
        sel = [slice(None)] * n
        for i, a in zip(subset, a_s):
            sel[i] = a
        idx = tuple(v - 1 for v in x) + tuple(sel)
        coeffs[idx] = coeffs[idx] + sign
    return Separating(coeffs, report.worst_violation)


_POLYTOPES: dict[Scenario, LocalPolytope] = {}


def _polytope(s: Scenario, budget: int | None) -> LocalPolytope:
    if budget is not None:
        return LocalPolytope(s, budget=budget)
    if s not in _POLYTOPES:
        _POLYTOPES[s] = LocalPolytope(s)
    return _POLYTOPES[s]


def is_local(b: Behavior, *, budget: int | None = None, prepass: bool = True) -> LocalityVerdict:
    """Decide whether ``b`` has a local hidden-variable model.

    Returns a :class:`Feasible` with an exact deterministic decomposition, or a
    :class:`Separating` functional whose maximum over local strategies is 0 and
    whose value on ``b`` is the positive gap. ``prepass`` seeds the exact solver
    with a floating-point solution; the verdict never depends on it.
    """
    return _polytope(b.scenario, budget).is_local(b, prepass=prepass)


@dataclass(frozen=True)
class CriticalEta:
    lower: Fraction
    upper: Fraction
    lower_verdict: Feasible | None = field(default=None, repr=False)
    upper_verdict: Separating | None = field(default=None, repr=False)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def to_json(self) -> dict:
        return {
            "lower": format_fraction(self.lower),
            "upper": format_fraction(self.upper),
            "width": format_fraction(self.width),
        }


def critical_eta(
    b: Behavior,
    tol=DEFAULT_TOLERANCE,
    *,
    budget: int | None = None,
    prepass: bool = True,
) -> CriticalEta:
    """Bracket the largest efficiency at which the lossy version of ``b`` stays local.

    Locality is monotone in the efficiency, so bisection on exact dyadic
    midpoints is sound. A behavior that is local even without loss gets [1, 1].
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    poly = _polytope(b.scenario, budget)
    top = poly.is_local(apply_loss(b, 1), prepass=prepass)
    if top.is_local:
        return CriticalEta(Fraction(1), Fraction(1), top, None)
    bottom = poly.is_local(apply_loss(b, 0), prepass=prepass)
    if not bottom.is_local:
        raise RuntimeError("fully lossy behavior reported nonlocal")
    lo, hi = Fraction(0), Fraction(1)
    lo_v, hi_v = bottom, top
    while hi - lo > tol:
        mid = (lo + hi) / 2
        verdict = poly.is_local(apply_loss(b, mid), prepass=prepass)
        log.info("eta=%s local=%s", mid, verdict.is_local)
        if verdict.is_local:
            lo, lo_v = mid, verdict
        else:
            hi, hi_v = mid, verdict
    return CriticalEta(lo, hi, lo_v, hi_v)
