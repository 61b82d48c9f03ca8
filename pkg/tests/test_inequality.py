import itertools
import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellbound.behavior import Behavior, BehaviorError, Scenario, apply_loss, mix
from bellbound.inequality import (
    BellFunctional,
    ScenarioMismatch,
    build_bipartite,
    build_multipartite,
    evaluate,
)
from bellbound.strategies import modular_box_bipartite, modular_box_multipartite

from conftest import CHSH, ns_chsh_behaviors, rationals01


def reference_value(inputs, prime, penalty, b: Behavior) -> Fraction:
    """Bell value straight from the case rules, by explicit loops over every entry."""
    n = len(inputs)
    total = Fraction(0)
    for x in itertools.product(*(range(1, m + 1) for m in inputs)):
        for a in itertools.product(range(prime), repeat=n):
            if sum(a) % prime == math.prod(x) % prime:
                coeff = 1 if any(v != 1 for v in x) else 0
            else:
                coeff = -penalty
            total += coeff * b.prob(x, a)
    for i, m in enumerate(inputs):
        for xi in range(2, m + 1):
            x = [1] * n
            x[i] = xi
            for ai in range(prime):
                p = sum(
                    b.prob(x, a)
                    for a in itertools.product(range(prime + 1), repeat=n)
                    if a[i] == ai
                )
                total -= p
    return total


def test_bipartite_two_two_coefficients():
    F = build_bipartite(2, 2)
    assert F.prime == 2
    assert F.penalty == 16
    # joint index: (x-1, y-1, a, b)
    assert F.joint[0, 1, 1, 1] == 1  # 1+1 = 0 = 1*2 mod 2
    assert F.joint[0, 0, 0, 1] == 0  # x = y = 1 block, congruence holds
    # f(0, 0, 1, 2): 0 = 2 mod 2, so rewarded, not penalized
    assert F.joint[0, 1, 0, 0] == 1
    assert F.joint[0, 1, 0, 1] == -16
    # (x, y) = (2, 2): xy = 4 = 0 mod 2
    assert F.joint[1, 1, 0, 0] == 1
    assert F.joint[1, 1, 0, 1] == -16
    assert F.joint[0, 0, 0, 0] == -16
    assert list(F.marginals[0][0]) == [0, 0]
    assert list(F.marginals[0][1]) == [-1, -1]


@pytest.mark.parametrize("inputs, prime", [((2, 3), 3), ((4, 4), 5), ((3, 3), 3), ((5, 2), 5)])
def test_bipartite_prime_rule(inputs, prime):
    assert build_bipartite(*inputs).prime == prime


def test_multipartite_prime_and_penalty():
    F = build_multipartite([2, 2, 2])
    assert F.prime == 3
    assert F.penalty == 729
    # all-ones block: sum(a) must be 1 mod 3
    assert F.joint[0, 0, 0, 1, 0, 0] == 0
    assert F.joint[0, 0, 0, 1, 1, 1] == -729
    assert all(v == 0 for g in F.marginals for v in g[0])
    assert build_multipartite([2, 2]).prime == 3  # strict rule even at N = 2


def test_penalty_dominates_positive_mass():
    for inputs in [(2, 2), (2, 3), (3, 4), (4, 4)]:
        F = build_bipartite(*inputs)
        count = F.prime * (inputs[0] * inputs[1] - 1)
        assert F.positive_joint_sum() == count
        assert F.penalty > count
    for inputs in [(2, 2, 2), (2, 3, 2), (3, 3, 3)]:
        F = build_multipartite(inputs)
        count = F.prime ** (len(inputs) - 1) * (math.prod(inputs) - 1)
        assert F.positive_joint_sum() == count
        assert F.penalty > count


@pytest.mark.parametrize(
    "F",
    [build_bipartite(2, 2), build_bipartite(3, 4), build_multipartite([2, 2, 2]), build_multipartite([3, 2, 2])],
    ids=["bi22", "bi34", "multi222", "multi322"],
)
def test_line_property(F):
    """Every line within an input block has exactly one non-penalized entry."""
    s = F.scenario
    n, p = s.num_parties, s.num_outputs
    for xi in itertools.product(*(range(m) for m in s.inputs_per_party)):
        block = F.joint[xi]
        for axis in range(n):
            for rest in itertools.product(range(p), repeat=n - 1):
                line = [block[rest[:axis] + (a,) + rest[axis:]] for a in range(p)]
                assert sum(1 for v in line if v >= 0) == 1
                red = 0 if all(v == 0 for v in xi) else 1
                assert max(line) == red


def test_bipartite_bell_value_polynomial(chsh_box):
    F = build_bipartite(2, 2)
    for eta in [Fraction(0), Fraction(1, 2), Fraction(2, 3), Fraction(7, 10), Fraction(1)]:
        lossy = apply_loss(chsh_box, eta)
        value = evaluate(F, lossy)
        assert value == 3 * eta**2 - 2 * eta
        assert value == reference_value([2, 2], 2, 16, lossy)


def test_multipartite_bell_value_polynomial():
    F = build_multipartite([2, 2, 2])
    box = modular_box_multipartite([2, 2, 2], 3)
    for eta in [Fraction(0), Fraction(1, 3), Fraction(13, 20), Fraction(1)]:
        lossy = apply_loss(box, eta)
        assert evaluate(F, lossy) == 7 * eta**3 - 3 * eta
    assert reference_value([2, 2, 2], 3, 729, apply_loss(box, Fraction(1, 3))) == 7 * Fraction(1, 27) - 1


@pytest.mark.parametrize("ma, mb", [(2, 2), (2, 3), (3, 3), (4, 3), (4, 4)])
def test_ideal_box_value(ma, mb):
    F = build_bipartite(ma, mb)
    box = modular_box_bipartite(ma, mb, F.prime)
    assert evaluate(F, box) == (ma * mb - 1) - (ma + mb - 2)
    eta = Fraction(3, 4)
    assert evaluate(F, apply_loss(box, eta)) == eta**2 * (ma * mb - 1) - eta * (ma + mb - 2)


def test_all_phi_scores_zero(chsh_box):
    assert evaluate(build_bipartite(2, 2), apply_loss(chsh_box, 0)) == 0


def test_scenario_mismatch(chsh_box):
    with pytest.raises(ScenarioMismatch):
        evaluate(build_bipartite(2, 3), chsh_box)


def test_signaling_refused_unless_permissive():
    import numpy as np

    table = np.full(CHSH.shape, Fraction(0), dtype=object)
    for x in (1, 2):
        for y in (1, 2):
            table[x - 1, y - 1, y % 2, 0] = Fraction(1)
    b = Behavior(CHSH, table)
    F = build_bipartite(2, 2)
    with pytest.raises(BehaviorError):
        evaluate(F, b)
    # permissive: canonical marginals with the other input pinned to 1
    assert evaluate(F, b, permissive=True) == reference_value([2, 2], 2, 16, b)


def test_json_round_trip():
    for F in (build_bipartite(3, 2), build_multipartite([2, 2, 2])):
        data = json.loads(json.dumps(F.to_json()))
        assert set(data) == {"scenario", "prime", "penalty", "joint", "marginals"}
        assert BellFunctional.from_json(data) == F


@settings(max_examples=30, deadline=None)
@given(ns_chsh_behaviors(), ns_chsh_behaviors(), rationals01, rationals01)
def test_evaluate_is_linear(b1, b2, lam, eta):
    F = build_bipartite(2, 2)
    l1, l2 = apply_loss(b1, eta), apply_loss(b2, eta)
    mixed = mix([l1, l2], [lam, 1 - lam])
    assert evaluate(F, mixed) == lam * evaluate(F, l1) + (1 - lam) * evaluate(F, l2)
