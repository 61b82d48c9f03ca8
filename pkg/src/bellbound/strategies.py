"""Modular no-signaling boxes, deterministic strategies and local (LHV) models."""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .behavior import Behavior, Scenario, format_fraction
from .bounds import is_prime

__all__ = [
    "BudgetExceeded",
    "DeterministicStrategy",
    "LocalModel",
    "modular_box_bipartite",
    "modular_box_multipartite",
    "strategy_count",
    "enumerate_deterministic",
    "deterministic_behavior",
    "degrade_model",
    "model_behavior",
    "default_budget",
]

DEFAULT_ENUMERATION_BUDGET = 10**8


class BudgetExceeded(RuntimeError):
    pass


def default_budget(fallback: int = DEFAULT_ENUMERATION_BUDGET) -> int:
    env = os.environ.get("BELLBOUND_BUDGET")
    return int(env) if env else fallback


def _check_box_args(inputs: Sequence[int], prime: int, strict: bool):
    if not is_prime(prime):
        raise ValueError(f"{prime} is not prime")
    top = max(inputs)
    if prime < top or (strict and prime == top):
        rel = ">" if strict else ">="
        raise ValueError(f"modulus {prime} must be {rel} max inputs {top}")


def _modular_box(inputs: Sequence[int], prime: int) -> Behavior:
    n = len(inputs)
    s = Scenario.of(inputs, prime)
    weight = Fraction(1, prime ** (n - 1))
    ideal = np.full(s.inputs_per_party + (prime,) * n, Fraction(0), dtype=object)
    for x in s.input_tuples():
        target = math.prod(x) % prime
        xi = tuple(v - 1 for v in x)
        # the last outcome is fixed by the others
        for head in itertools.product(range(prime), repeat=n - 1):
            last = (target - sum(head)) % prime
            ideal[xi + head + (last,)] = weight
    return Behavior.from_ideal(s, ideal)


def modular_box_bipartite(m_a: int, m_b: int, prime: int) -> Behavior:
    """p(a, b | x, y) = 1/P when a + b == x*y (mod P)."""
    _check_box_args([m_a, m_b], prime, strict=False)
    return _modular_box([m_a, m_b], prime)


def modular_box_multipartite(inputs: Sequence[int], prime: int) -> Behavior:
    """p(a | x) = P**-(N-1) when sum(a) == prod(x) (mod P)."""
    inputs = list(inputs)
    if len(inputs) < 2:
        raise ValueError("need at least two parties")
    _check_box_args(inputs, prime, strict=True)
    return _modular_box(inputs, prime)


@dataclass(frozen=True)
class DeterministicStrategy:
    scenario: Scenario
    # responses[i][x-1] is party i's outcome at input x; Φ coded as P
    responses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        resp = tuple(tuple(int(a) for a in r) for r in self.responses)
        object.__setattr__(self, "responses", resp)
        s = self.scenario
        if tuple(len(r) for r in resp) != s.inputs_per_party:
            raise ValueError("response table sizes do not match the scenario")
        if any(not 0 <= a <= s.phi for r in resp for a in r):
            raise ValueError("response outside 0..P (P codes Φ)")

    def flat(self) -> tuple[int, ...]:
        """Concatenated response tables; lexicographic order on these is the enumeration order."""
        return tuple(a for r in self.responses for a in r)

    def to_json(self) -> dict:
        return {"scenario": self.scenario.to_json(), "responses": [list(r) for r in self.responses]}


def strategy_count(s: Scenario) -> int:
    return s.alphabet ** sum(s.inputs_per_party)


def enumerate_deterministic(s: Scenario, budget: int | None = None) -> Iterator[DeterministicStrategy]:
    """All deterministic strategies, lexicographic in the concatenated tables (Φ last)."""
    budget = default_budget() if budget is None else budget
    count = strategy_count(s)
    if count > budget:
        raise BudgetExceeded(
            f"{count} deterministic strategies exceed the budget of {budget}; "
            "use the LP membership test or raise BELLBOUND_BUDGET"
        )
    cuts = list(itertools.accumulate(s.inputs_per_party, initial=0))
    for flat in itertools.product(range(s.alphabet), repeat=cuts[-1]):
        yield DeterministicStrategy(s, tuple(flat[cuts[i]:cuts[i + 1]] for i in range(s.num_parties)))


def deterministic_behavior(d: DeterministicStrategy) -> Behavior:
    s = d.scenario
    table = np.full(s.shape, Fraction(0), dtype=object)
    for x in s.input_tuples():
        a = tuple(d.responses[i][x[i] - 1] for i in range(s.num_parties))
        table[tuple(v - 1 for v in x) + a] = Fraction(1)
    return Behavior(s, table)


def _response_table(rows, m: int, alphabet: int) -> np.ndarray:
    t = np.empty((m, alphabet), dtype=object)
    src = np.asarray(rows, dtype=object).reshape(m, alphabet)
    for idx, v in np.ndenumerate(src):
        t[idx] = Fraction(v)
    t.flags.writeable = False
    return t


@dataclass(frozen=True, eq=False)
class LocalModel:
    """Finite mixture of product response tables p_i(a_i | x_i, lambda)."""

    scenario: Scenario
    # (weight, per-party tables of shape (M_i, P+1))
    components: tuple[tuple[Fraction, tuple[np.ndarray, ...]], ...] = field(repr=False)

    def __post_init__(self):
        s = self.scenario
        comps = []
        for w, tables in self.components:
            w = Fraction(w)
            if w <= 0:
                raise ValueError("component weights must be positive")
            if len(tables) != s.num_parties:
                raise ValueError("one response table per party required")
            tabs = tuple(_response_table(t, m, s.alphabet) for t, m in zip(tables, s.inputs_per_party))
            for t in tabs:
                if any(v < 0 for v in t.flat) or any(sum(row, Fraction(0)) != 1 for row in t):
                    raise ValueError("response rows must be distributions")
            comps.append((w, tabs))
        if sum((w for w, _ in comps), Fraction(0)) != 1:
            raise ValueError("component weights must sum to 1")
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def from_deterministic(cls, pairs: Sequence[tuple[Fraction, DeterministicStrategy]]) -> "LocalModel":
        if not pairs:
            raise ValueError("empty model")
        s = pairs[0][1].scenario
        comps = []
        for w, d in pairs:
            tables = []
            for m, r in zip(s.inputs_per_party, d.responses):
                t = np.full((m, s.alphabet), Fraction(0), dtype=object)
                for x, a in enumerate(r):
                    t[x, a] = Fraction(1)
                tables.append(t)
            comps.append((w, tuple(tables)))
        return cls(s, tuple(comps))

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario.to_json(),
            "components": [
                {
                    "weight": format_fraction(w),
                    "tables": [[[format_fraction(v) for v in row] for row in t] for t in tables],
                }
                for w, tables in self.components
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LocalModel":
        s = Scenario.from_json(data["scenario"])
        comps = tuple(
            (Fraction(c["weight"]), tuple(np.array([[Fraction(v) for v in row] for row in t], dtype=object) for t in c["tables"]))
            for c in data["components"]
        )
        return cls(s, comps)


def model_behavior(m: LocalModel) -> Behavior:
    s = m.scenario
    n = s.num_parties
    table = np.full(s.shape, Fraction(0), dtype=object)
    for w, tables in m.components:
        # outer product over parties, axes arranged as (x_1..x_N, a_1..a_N)
        prod = np.array(w, dtype=object).reshape(())
        for i, t in enumerate(tables):
            prod = np.multiply.outer(prod, t)
        # current axes: (x_1, a_1, x_2, a_2, ...)
        order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
        table = table + np.transpose(prod, order)
    return Behavior(s, table)


def degrade_model(m: LocalModel, eta1, eta2) -> LocalModel:
    """Turn a model of the eta2-lossy behavior into one of the eta1-lossy behavior.

    Each response keeps its detections with probability eta1/eta2 and otherwise
    reports Φ; weights are untouched.
    """
    eta1, eta2 = Fraction(eta1), Fraction(eta2)
    if eta2 == 0:
        if eta1 > 0:
            raise ValueError("cannot raise efficiency from zero")
        return m
    if not 0 <= eta1 <= eta2 <= 1:
        raise ValueError(f"need 0 <= eta1 <= eta2 <= 1, got {eta1}, {eta2}")
    r = eta1 / eta2
    phi = m.scenario.phi
    comps = []
    for w, tables in m.components:
        new = []
        for t in tables:
            u = t * r
            u[:, phi] = u[:, phi] + (1 - r)
            new.append(u)
        comps.append((w, tuple(new)))
    return LocalModel(m.scenario, tuple(comps))
