"""Modular Bell functionals that stay violated under heavy detector loss.

A functional is a joint coefficient f(a, x) on every non-Φ outcome tuple plus a
per-party coefficient g_i(a_i, x_i) on single-party marginals. Joint entries
satisfying sum(a) == prod(x) (mod P) score +1 (0 on the all-ones input block);
every other joint entry carries a large negative penalty. Each party pays 1 for
a detection at any input other than 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .behavior import Behavior, BehaviorError, Scenario, check_no_signaling
from .bounds import min_prime_geq, min_prime_gt

__all__ = [
    "BellFunctional",
    "ScenarioMismatch",
    "build_bipartite",
    "build_multipartite",
    "evaluate",
    "deterministic_value",
]


class ScenarioMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BellFunctional:
    scenario: Scenario
    prime: int
    penalty: int
    # shape inputs + (P,)*N, integer entries
    joint: np.ndarray = field(repr=False)
    # per party, shape (M_i, P)
    marginals: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        s = self.scenario
        joint = np.asarray(self.joint, dtype=object).reshape(
            s.inputs_per_party + (s.num_outputs,) * s.num_parties
        )
        joint = np.vectorize(int, otypes=[object])(joint)
        joint.flags.writeable = False
        margs = []
        for m, g in zip(s.inputs_per_party, self.marginals):
            g = np.vectorize(int, otypes=[object])(np.asarray(g, dtype=object).reshape(m, s.num_outputs))
            g.flags.writeable = False
            margs.append(g)
        if len(margs) != s.num_parties:
            raise ValueError("one marginal coefficient table per party required")
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "marginals", tuple(margs))

    def positive_joint_sum(self) -> int:
        return sum(v for v in self.joint.flat if v > 0)

    def with_marginals_zeroed(self) -> "BellFunctional":
        zeros = tuple(np.zeros_like(g) for g in self.marginals)
        return BellFunctional(self.scenario, self.prime, self.penalty, self.joint, zeros)

    def __eq__(self, other):
        if not isinstance(other, BellFunctional):
            return NotImplemented
        return (
            self.scenario == other.scenario
            and self.prime == other.prime
            and self.penalty == other.penalty
            and bool(np.all(self.joint == other.joint))
            and all(bool(np.all(g == h)) for g, h in zip(self.marginals, other.marginals))
        )

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario.to_json(),
            "prime": self.prime,
            "penalty": self.penalty,
            "joint": [int(v) for v in self.joint.flat],
            "marginals": [[int(v) for v in g.flat] for g in self.marginals],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BellFunctional":
        s = Scenario.from_json(data["scenario"])
        margs = tuple(np.array(g, dtype=object) for g in data["marginals"])
        return cls(s, int(data["prime"]), int(data["penalty"]), np.array(data["joint"], dtype=object), margs)


def _modular(inputs: Sequence[int], prime: int, penalty: int) -> BellFunctional:
    n = len(inputs)
    s = Scenario.of(inputs, prime)
    joint = np.empty(s.inputs_per_party + (prime,) * n, dtype=object)
    for x in s.input_tuples():
        target = math.prod(x) % prime
        reward = 0 if all(xi == 1 for xi in x) else 1
        xi = tuple(v - 1 for v in x)
        for a in itertools.product(range(prime), repeat=n):
            joint[xi + a] = reward if sum(a) % prime == target else -penalty
    margs = []
    for m in inputs:
        g = np.zeros((m, prime), dtype=object)
        g[1:, :] = -1
        margs.append(g)
    return BellFunctional(s, prime, penalty, joint, tuple(margs))


def build_bipartite(m_a: int, m_b: int) -> BellFunctional:
    """Two-party functional with the smallest prime P >= max(M_A, M_B) and penalty P**4."""
    if m_a < 1 or m_b < 1:
        raise ValueError("input counts must be positive")
    p = min_prime_geq(max(m_a, m_b))
    return _modular([m_a, m_b], p, p**4)


def build_multipartite(inputs: Sequence[int]) -> BellFunctional:
    """N-party functional with the smallest prime P > max(M_i) and penalty P**(2N)."""
    inputs = list(inputs)
    if len(inputs) < 2:
        raise ValueError("need at least two parties")
    if any(m < 1 for m in inputs):
        raise ValueError("input counts must be positive")
    p = min_prime_gt(max(inputs))
    return _modular(inputs, p, p ** (2 * len(inputs)))


def evaluate(F: BellFunctional, b: Behavior, *, permissive: bool = False) -> Fraction:
    """Value of the functional on a behavior (Φ may be present).

    Joint terms see only fully detected outcomes. Marginal terms read
    p(a_i | x_i) with other inputs pinned to 1; signaling behaviors are refused
    unless ``permissive`` is set, since their marginals are not well defined.
    """
    if F.scenario != b.scenario:
        raise ScenarioMismatch(f"functional on {F.scenario}, behavior on {b.scenario}")
    if not permissive:
        report = check_no_signaling(b)
        if not report.passed:
            raise BehaviorError(
                f"behavior is signaling (violation {report.worst_violation}); "
                "pass permissive=True to evaluate with canonical marginals"
            )
    s = F.scenario
    n, p = s.num_parties, s.num_outputs
    detected = b.table[(slice(None),) * n + (slice(0, p),) * n]
    total = Fraction(sum((F.joint * detected).flat, Fraction(0)))
    for i, g in enumerate(F.marginals):
        hidden = tuple(n + j for j in range(n) if j != i)
        # pin other inputs to 1 (index 0)
        pin = tuple(slice(None) if j == i else 0 for j in range(n))
        marg = b.table.sum(axis=hidden)[pin] if hidden else b.table
        total += sum((g * marg[:, :p]).flat, Fraction(0))
    return total


def deterministic_value(F: BellFunctional, responses: Sequence[Sequence[int]]) -> int:
    """Value on the point-mass behavior of per-party response tables (Φ coded as P)."""
    s = F.scenario
    phi = s.num_outputs
    total = 0
    for i, (g, table) in enumerate(zip(F.marginals, responses)):
        for x, a in enumerate(table):
            if a != phi:
                total += g[x, a]
    for xi in itertools.product(*(range(m) for m in s.inputs_per_party)):
        a = tuple(responses[i][xi[i]] for i in range(s.num_parties))
        if phi not in a:
            total += F.joint[xi + a]
    return total
