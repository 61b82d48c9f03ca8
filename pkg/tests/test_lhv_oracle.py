import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellbound.behavior import Scenario
from bellbound.inequality import BellFunctional, build_bipartite, build_multipartite, deterministic_value
from bellbound.lhv_oracle import (
    LhvMaxResult,
    inner_evaluations,
    local_bound_certificate,
    max_bell_value,
    max_bell_value_naive,
    merge_results,
)
from bellbound.strategies import BudgetExceeded, DeterministicStrategy


def random_functional(draw, inputs, prime):
    s = Scenario.of(list(inputs), prime)
    n = len(inputs)
    size = int(np.prod(inputs)) * prime**n
    joint = np.array(draw(st.lists(st.integers(-5, 5), min_size=size, max_size=size)), dtype=object)
    joint = joint.reshape(tuple(inputs) + (prime,) * n)
    marginals = []
    for m in inputs:
        vals = draw(st.lists(st.integers(-3, 3), min_size=m * prime, max_size=m * prime))
        marginals.append(np.array(vals, dtype=object).reshape(m, prime))
    return BellFunctional(s, prime, 1, joint, tuple(marginals))


@st.composite
def small_functionals(draw):
    shape = draw(st.sampled_from([((2, 2), 2), ((1, 2), 2), ((2, 1, 1), 2), ((3, 2), 2), ((1, 1), 3)]))
    return random_functional(draw, *shape)


@settings(max_examples=40, deadline=None)
@given(small_functionals())
def test_greedy_matches_naive(F):
    fast = max_bell_value(F)
    slow = max_bell_value_naive(F)
    assert fast.max_value == slow.max_value
    # both keep the lexicographically first maximizer
    assert fast.argmax == slow.argmax
    assert deterministic_value(F, fast.argmax.responses) == fast.max_value


@pytest.mark.parametrize("ma, mb", list(itertools.product([2, 3, 4], repeat=2)))
def test_bipartite_local_bound_is_zero(ma, mb):
    F = build_bipartite(ma, mb)
    result = max_bell_value(F)
    assert result.max_value == 0
    # all-Φ strategy scores exactly 0
    phi = F.scenario.phi
    assert deterministic_value(F, ((phi,) * ma, (phi,) * mb)) == 0


@pytest.mark.parametrize("inputs", [(2, 2, 2), (2, 3, 2), (3, 2, 2)])
def test_multipartite_local_bound_is_zero(inputs):
    assert max_bell_value(build_multipartite(inputs)).max_value == 0


def test_marginal_terms_are_needed():
    F = build_bipartite(2, 2).with_marginals_zeroed()
    result = max_bell_value(F)
    assert result.max_value == 2
    assert not local_bound_certificate(F)
    assert local_bound_certificate(build_bipartite(2, 2))


def test_naive_small_case_by_hand():
    F = build_bipartite(2, 2)
    assert max_bell_value_naive(F).max_value == 0
    assert max_bell_value_naive(F).strategies_scanned == 81


def test_shards_merge_to_full_scan():
    F = build_bipartite(3, 3)
    full = max_bell_value(F)
    for total in (2, 3, 5):
        parts = [max_bell_value(F, shard=(k, total)) for k in range(total)]
        merged = merge_results(parts)
        assert merged.max_value == full.max_value
        assert merged.argmax == full.argmax
        assert merged.strategies_scanned == full.strategies_scanned


def test_more_shards_than_prefixes():
    F = build_bipartite(2, 2)
    parts = [max_bell_value(F, shard=(k, 100)) for k in range(100)]
    assert merge_results(parts).max_value == 0
    assert any(p.max_value is None for p in parts)


def test_workers_agree():
    F = build_bipartite(3, 2)
    assert max_bell_value(F, workers=2).argmax == max_bell_value(F).argmax


def test_merge_empty():
    assert merge_results([LhvMaxResult(None, None, 0)]).max_value is None


def test_budget():
    F = build_bipartite(3, 3)
    with pytest.raises(BudgetExceeded):
        max_bell_value(F, budget=inner_evaluations(F) - 1)
    assert max_bell_value(F, budget=inner_evaluations(F)).max_value == 0
    with pytest.raises(ValueError):
        max_bell_value(F, shard=(3, 3))


def test_result_json():
    F = build_bipartite(2, 2)
    data = max_bell_value(F).to_json()
    assert data["max_value"] == 0
    d = DeterministicStrategy(F.scenario, tuple(tuple(r) for r in data["argmax"]))
    assert deterministic_value(F, d.responses) == 0
