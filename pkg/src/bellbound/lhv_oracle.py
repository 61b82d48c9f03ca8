"""Exhaustive maximum of a Bell functional over deterministic local strategies.

For fixed responses of parties 0..N-2, the value separates over the last
party's inputs, so the last party is optimized greedily input by input. The
outer loop walks the remaining parties' response tables in lexicographic order
(Φ last) and keeps the first strict maximizer, which makes the reported argmax
the lexicographically first optimal strategy overall.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .inequality import BellFunctional, deterministic_value
from .strategies import (
    BudgetExceeded,
    DeterministicStrategy,
    default_budget,
    enumerate_deterministic,
    strategy_count,
)

__all__ = [
    "LhvMaxResult",
    "max_bell_value",
    "max_bell_value_naive",
    "local_bound_certificate",
    "merge_results",
    "inner_evaluations",
]


@dataclass(frozen=True)
class LhvMaxResult:
    max_value: int | None
    argmax: DeterministicStrategy | None
    strategies_scanned: int

    def to_json(self) -> dict:
        return {
            "max_value": None if self.max_value is None else int(self.max_value),
            "argmax": None if self.argmax is None else [list(r) for r in self.argmax.responses],
            "strategies_scanned": self.strategies_scanned,
        }


def inner_evaluations(F: BellFunctional) -> int:
    s = F.scenario
    outer = s.alphabet ** sum(s.inputs_per_party[:-1])
    return outer * s.inputs_per_party[-1] * s.alphabet


class _Kernel:
    """Precomputed arrays for the greedy last-party step."""

    def __init__(self, F: BellFunctional):
        s = F.scenario
        self.s = s
        n, p = s.num_parties, s.num_outputs
        self.p = p
        bound = F.penalty * math.prod(s.inputs_per_party) + sum(s.inputs_per_party)
        dtype = np.int64 if bound < 2**62 else object
        joint = np.asarray(F.joint, dtype=dtype)
        # axes -> (x_0, a_0, ..., x_{N-2}, a_{N-2}, x_{N-1}, a_{N-1})
        order = [ax for i in range(n) for ax in (i, n + i)]
        joint = np.transpose(joint, order)
        outer_shape = [m * p for m in s.inputs_per_party[:-1]]
        self.joint = joint.reshape(outer_shape + [s.inputs_per_party[-1], p])
        self.g = [np.asarray(g, dtype=dtype) for g in F.marginals]
        last = np.zeros((s.inputs_per_party[-1], p + 1), dtype=dtype)
        last[:, :p] = self.g[-1]
        self.last_g = last

    def best_last(self, outer: Sequence[Sequence[int]]):
        """Value and greedy last-party table for fixed outer responses."""
        p = self.p
        base = 0
        keys = []
        for i, table in enumerate(outer):
            det = [(x, a) for x, a in enumerate(table) if a != p]
            base += sum(self.g[i][x, a] for x, a in det)
            keys.append([x * p + a for x, a in det])
        scores = self.last_g.copy()
        if all(keys):
            block = self.joint[np.ix_(*keys)] if keys else self.joint
            joint_sum = block.reshape(-1, *self.joint.shape[-2:]).sum(axis=0)
            scores[:, :p] += joint_sum
        choice = np.argmax(scores, axis=1)
        value = base + scores[np.arange(scores.shape[0]), choice].sum()
        return int(value), tuple(int(c) for c in choice)


def _prefix_length(alphabet: int, first_inputs: int, shards: int) -> int:
    length = 0
    while alphabet**length < shards and length < first_inputs:
        length += 1
    return length


def _scan(F: BellFunctional, shard: int, total: int) -> LhvMaxResult:
    s = F.scenario
    kernel = _Kernel(F)
    outer_sizes = s.inputs_per_party[:-1]
    last_count = s.alphabet ** s.inputs_per_party[-1]
    if not outer_sizes:
        if shard != 0:
            return LhvMaxResult(None, None, 0)
        value, table = kernel.best_last([])
        return LhvMaxResult(value, DeterministicStrategy(s, (table,)), last_count)
    cuts = list(itertools.accumulate(outer_sizes, initial=0))
    length = _prefix_length(s.alphabet, outer_sizes[0], total)
    best_value, best_flat = None, None
    scanned = 0
    prefixes = itertools.product(range(s.alphabet), repeat=length)
    for j, prefix in enumerate(prefixes):
        if j % total != shard:
            continue
        for rest in itertools.product(range(s.alphabet), repeat=cuts[-1] - length):
            flat = prefix + rest
            outer = [flat[cuts[i]:cuts[i + 1]] for i in range(len(outer_sizes))]
            value, table = kernel.best_last(outer)
            scanned += last_count
            if best_value is None or value > best_value:
                best_value, best_flat = value, tuple(outer) + (table,)
    argmax = None if best_flat is None else DeterministicStrategy(s, best_flat)
    return LhvMaxResult(best_value, argmax, scanned)


def merge_results(results: Iterable[LhvMaxResult]) -> LhvMaxResult:
    """Combine shard results: larger value wins, ties go to the earlier strategy."""
    best = None
    scanned = 0
    for r in results:
        scanned += r.strategies_scanned
        if r.max_value is None:
            continue
        if (
            best is None
            or r.max_value > best.max_value
            or (r.max_value == best.max_value and r.argmax.flat() < best.argmax.flat())
        ):
            best = r
    if best is None:
        return LhvMaxResult(None, None, scanned)
    return LhvMaxResult(best.max_value, best.argmax, scanned)


def _scan_args(args):
    return _scan(*args)


def max_bell_value(
    F: BellFunctional,
    *,
    budget: int | None = None,
    shard: tuple[int, int] | None = None,
    workers: int = 1,
) -> LhvMaxResult:
    """Exact local maximum of ``F``.

    ``shard=(k, total)`` scans only the k-th slice of the outer loop (partitioned
    by a prefix of party 0's table); merge slices with :func:`merge_results`.
    """
    budget = default_budget() if budget is None else budget
    work = inner_evaluations(F)
    if work > budget:
        raise BudgetExceeded(f"{work} inner evaluations exceed the budget of {budget}")
    if shard is not None:
        k, total = shard
        if not 0 <= k < total:
            raise ValueError(f"shard index {k} outside 0..{total - 1}")
        return _scan(F, k, total)
    if workers <= 1:
        return _scan(F, 0, 1)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_scan_args, [(F, k, workers) for k in range(workers)]))
    return merge_results(parts)


def max_bell_value_naive(F: BellFunctional, *, budget: int = 10**4) -> LhvMaxResult:
    """Plain scan of every deterministic strategy; the reference for the greedy path."""
    best_value, best = None, None
    count = 0
    for d in enumerate_deterministic(F.scenario, budget=budget):
        count += 1
        v = deterministic_value(F, d.responses)
        if best_value is None or v > best_value:
            best_value, best = v, d
    assert count == strategy_count(F.scenario)
    return LhvMaxResult(best_value, best, count)


def local_bound_certificate(F: BellFunctional, **kwargs) -> bool:
    """True when no deterministic strategy scores above zero."""
    return max_bell_value(F, **kwargs).max_value <= 0
