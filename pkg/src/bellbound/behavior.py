"""N-party behaviors p(a|x) with a no-detection outcome, and the loss channel.

Conventions used throughout the package:

* parties are indexed from 0 (Python indices);
* inputs carry their physical labels 1..M_i (they enter modular arithmetic),
  stored at array position ``x - 1``;
* outcomes are 0..P-1, and the no-detection symbol is encoded as ``P``.

A behavior table is a numpy object array of :class:`fractions.Fraction` with
shape ``(M_1, ..., M_N, P+1, ..., P+1)``: all inputs first (party 0 slowest),
then all outcomes. Flattening it in C order gives the interchange order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BehaviorError",
    "Scenario",
    "Behavior",
    "NoSignalingReport",
    "check_no_signaling",
    "apply_loss",
    "marginal",
    "subset_marginal",
    "mix",
]


class BehaviorError(ValueError):
    """A table that is not a valid conditional distribution, or a bad request on one."""


@dataclass(frozen=True)
class Scenario:
    num_parties: int
    inputs_per_party: tuple[int, ...]
    num_outputs: int

    def __post_init__(self):
        object.__setattr__(self, "inputs_per_party", tuple(int(m) for m in self.inputs_per_party))
        if self.num_parties < 1:
            raise ValueError("need at least one party")
        if len(self.inputs_per_party) != self.num_parties:
            raise ValueError(
                f"{self.num_parties} parties but {len(self.inputs_per_party)} input counts"
            )
        if any(m < 1 for m in self.inputs_per_party):
            raise ValueError(f"input counts must be positive, got {self.inputs_per_party}")
        if self.num_outputs < 1:
            raise ValueError("need at least one output")

    @classmethod
    def of(cls, inputs: Sequence[int], outputs: int) -> "Scenario":
        return cls(len(inputs), tuple(inputs), outputs)

    @property
    def phi(self) -> int:
        """Integer code of the no-detection outcome."""
        return self.num_outputs

    @property
    def alphabet(self) -> int:
        return self.num_outputs + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.inputs_per_party + (self.alphabet,) * self.num_parties

    def input_tuples(self) -> Iterable[tuple[int, ...]]:
        """All input tuples with their 1-based labels, party 0 slowest."""
        return itertools.product(*(range(1, m + 1) for m in self.inputs_per_party))

    def to_json(self) -> dict:
        return {
            "parties": self.num_parties,
            "inputs": list(self.inputs_per_party),
            "outputs": self.num_outputs,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Scenario":
        return cls(int(data["parties"]), tuple(data["inputs"]), int(data["outputs"]))


def _as_fraction_array(table, shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    src = np.asarray(table, dtype=object)
    if src.shape != tuple(shape):
        src = src.reshape(shape)
    for idx, v in np.ndenumerate(src):
        arr[idx] = Fraction(v)
    return arr


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional distribution over outcomes (including no-detection) per input tuple.

    The table is validated on construction: entries in [0, 1] and every input
    tuple's row sums to exactly one.
    """

    scenario: Scenario
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_fraction_array(self.table, self.scenario.shape)
        arr.flags.writeable = False
        object.__setattr__(self, "table", arr)
        self._validate()

    def _validate(self):
        for x in self.scenario.input_tuples():
            block = self.block(x)
            if any(v < 0 or v > 1 for v in block.flat):
                raise BehaviorError(f"entries outside [0, 1] at inputs {x}")
            total = sum(block.flat, Fraction(0))
            if total != 1:
                raise BehaviorError(f"row for inputs {x} sums to {total}, not 1")

    def block(self, x: Sequence[int]) -> np.ndarray:
        """Outcome array p(. | x) for 1-based input labels ``x``."""
        return self.table[tuple(xi - 1 for xi in x)]

    def prob(self, x: Sequence[int], a: Sequence[int]) -> Fraction:
        return self.table[tuple(xi - 1 for xi in x) + tuple(a)]

    def has_phi_mass(self) -> bool:
        n = self.scenario.num_parties
        ideal = (slice(None),) * n + (slice(0, self.scenario.num_outputs),) * n
        return sum(self.table[ideal].flat, Fraction(0)) != int(np.prod(self.scenario.inputs_per_party))

    def flat(self) -> list[Fraction]:
        return list(self.table.flat)

    def __eq__(self, other):
        if not isinstance(other, Behavior):
            return NotImplemented
        return self.scenario == other.scenario and bool(np.all(self.table == other.table))

    def __hash__(self):
        return hash((self.scenario, tuple(self.table.flat)))

    @classmethod
    def from_ideal(cls, scenario: Scenario, ideal: np.ndarray) -> "Behavior":
        """Embed a table over non-Φ outcomes only (shape inputs + (P,)*N)."""
        n = scenario.num_parties
        full = np.full(scenario.shape, Fraction(0), dtype=object)
        full[(slice(None),) * n + (slice(0, scenario.num_outputs),) * n] = ideal
        return cls(scenario, full)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario.to_json(),
            "table": [format_fraction(v) for v in self.table.flat],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Behavior":
        scenario = Scenario.from_json(data["scenario"])
        values = [Fraction(v) for v in data["table"]]
        expected = int(np.prod(scenario.shape))
        if len(values) != expected:
            raise BehaviorError(f"table has {len(values)} entries, scenario needs {expected}")
        return cls(scenario, np.array(values, dtype=object).reshape(scenario.shape))


def format_fraction(v: Fraction) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class NoSignalingReport:
    passed: bool
    worst_violation: Fraction
    # (parties S, outcomes a_S, inputs x, inputs x') with 1-based input labels;
    # x and x' agree on S and p(a_S | x) != p(a_S | x')
    witness: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...], tuple[int, ...]] | None = None


def check_no_signaling(b: Behavior) -> NoSignalingReport:
    """Exact no-signaling check over every proper subset S of parties.

    The S-marginal (other outcomes summed, Φ included) must not depend on the
    inputs outside S. For two parties this is exactly the single-party condition;
    for more parties the larger subsets matter too.
    """
    s = b.scenario
    n = s.num_parties
    worst = Fraction(0)
    witness = None
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            hidden = tuple(n + j for j in range(n) if j not in subset)
            marg = b.table.sum(axis=hidden)
            rest = [j for j in range(n) if j not in subset]
            for xs in itertools.product(*(range(1, s.inputs_per_party[j] + 1) for j in subset)):
                group = []
                for xr in itertools.product(*(range(1, s.inputs_per_party[j] + 1) for j in rest)):
                    x = [0] * n
                    for j, v in zip(subset, xs):
                        x[j] = v
                    for j, v in zip(rest, xr):
                        x[j] = v
                    group.append(tuple(x))
                for a in itertools.product(range(s.alphabet), repeat=size):
                    vals = [(marg[tuple(xi - 1 for xi in x) + a], x) for x in group]
                    hi = max(vals, key=lambda t: t[0])
                    lo = min(vals, key=lambda t: t[0])
                    if hi[0] - lo[0] > worst:
                        worst = hi[0] - lo[0]
                        witness = (subset, a, hi[1], lo[1])
    return NoSignalingReport(worst == 0, worst, witness)


def _require_no_signaling(b: Behavior, what: str):
    report = check_no_signaling(b)
    if not report.passed:
        raise BehaviorError(
            f"{what} needs a no-signaling behavior; worst violation {report.worst_violation} "
            f"for parties {report.witness[0]}"
        )


def apply_loss(b: Behavior, eta) -> Behavior:
    """Independent detectors of efficiency ``eta`` on every party of an ideal behavior.

    For the detected subset S the outcome probability is
    eta^|S| (1-eta)^(N-|S|) times the S-marginal of ``b``; undetected parties read Φ.
    """
    eta = Fraction(eta)
    if not 0 <= eta <= 1:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    if b.has_phi_mass():
        raise BehaviorError("loss channel applies to ideal behaviors only (Φ mass present)")
    _require_no_signaling(b, "apply_loss")
    s = b.scenario
    n, p = s.num_parties, s.num_outputs
    out = np.full(s.shape, Fraction(0), dtype=object)
    real = (slice(0, p),) * n
    for xi in itertools.product(*(range(m) for m in s.inputs_per_party)):
        ideal = b.table[xi + real]
        for mask in itertools.product((True, False), repeat=n):
            detected = sum(mask)
            weight = eta**detected * (1 - eta) ** (n - detected)
            if weight == 0:
                continue
            hidden = tuple(i for i in range(n) if not mask[i])
            marg = ideal.sum(axis=hidden) if hidden else ideal
            sel = tuple(slice(0, p) if mask[i] else p for i in range(n))
            out[xi + sel] = marg * weight
    return Behavior(s, out)


def subset_marginal(b: Behavior, parties: Sequence[int], inputs: Sequence[int]) -> np.ndarray:
    """p(a_S | x_S) with non-listed parties' inputs fixed to 1; outcome axes in ``parties`` order."""
    s = b.scenario
    n = s.num_parties
    parties = list(parties)
    full_x = [1] * n
    for i, x in zip(parties, inputs):
        full_x[i] = x
    block = b.block(full_x)
    hidden = tuple(i for i in range(n) if i not in parties)
    marg = block.sum(axis=hidden) if hidden else block
    order = sorted(parties)
    if order != parties:
        marg = np.transpose(marg, [order.index(i) for i in parties])
    return marg


def marginal(b: Behavior, party: int, x: int) -> np.ndarray:
    """Distribution of ``party``'s outcome (Φ last) at input ``x``.

    Other parties' inputs are pinned to 1 so the result is defined for any table;
    on no-signaling behaviors the pinning is immaterial.
    """
    if not 0 <= party < b.scenario.num_parties:
        raise IndexError(f"no party {party}")
    marg = subset_marginal(b, [party], [x])
    return np.asarray(marg, dtype=object)


def mix(behaviors: Sequence[Behavior], weights: Sequence) -> Behavior:
    """Convex combination of behaviors on a common scenario."""
    weights = [Fraction(w) for w in weights]
    if len(weights) != len(behaviors) or not behaviors:
        raise ValueError("need one weight per behavior")
    if any(w < 0 for w in weights) or sum(weights) != 1:
        raise ValueError("weights must be nonnegative and sum to 1")
    s = behaviors[0].scenario
    if any(bh.scenario != s for bh in behaviors):
        raise ValueError("behaviors live on different scenarios")
    table = sum((w * bh.table for w, bh in zip(weights, behaviors)), np.full(s.shape, Fraction(0), dtype=object))
    return Behavior(s, table)
