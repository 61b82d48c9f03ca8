import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from bellbound.behavior import Behavior, Scenario, mix
from bellbound.strategies import (
    DeterministicStrategy,
    deterministic_behavior,
    modular_box_bipartite,
)

CHSH = Scenario.of([2, 2], 2)


def shifted_box(shift_a, shift_b, prime=2, inputs=(2, 2)):
    """Modular box with per-input output relabelings; still no-signaling."""
    base = modular_box_bipartite(*inputs, prime)
    table = np.full(base.scenario.shape, Fraction(0), dtype=object)
    for x in range(inputs[0]):
        for y in range(inputs[1]):
            for a in range(prime):
                for b in range(prime):
                    table[x, y, (a + shift_a[x]) % prime, (b + shift_b[y]) % prime] = base.table[x, y, a, b]
    return Behavior(base.scenario, table)


def ideal_deterministic(responses, scenario=CHSH):
    return deterministic_behavior(DeterministicStrategy(scenario, responses))


def brute_force_no_signaling(b: Behavior) -> bool:
    """Direct loops over every subset marginal; independent of the library's check."""
    s = b.scenario
    n = s.num_parties
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            seen = {}
            for x in s.input_tuples():
                key_x = tuple(x[i] for i in subset)
                marg = {}
                for a in itertools.product(range(s.alphabet), repeat=n):
                    k = tuple(a[i] for i in subset)
                    marg[k] = marg.get(k, 0) + b.prob(x, a)
                if key_x in seen and seen[key_x] != marg:
                    return False
                seen[key_x] = marg
    return True


rationals01 = st.fractions(min_value=0, max_value=1, max_denominator=50)


@st.composite
def ns_chsh_behaviors(draw, max_parts=4):
    """Random ideal no-signaling behaviors on two parties, two inputs, two outputs."""
    parts = []
    k = draw(st.integers(1, max_parts))
    for _ in range(k):
        if draw(st.booleans()):
            sa = draw(st.tuples(st.integers(0, 1), st.integers(0, 1)))
            sb = draw(st.tuples(st.integers(0, 1), st.integers(0, 1)))
            parts.append(shifted_box(sa, sb))
        else:
            ra = draw(st.tuples(st.integers(0, 1), st.integers(0, 1)))
            rb = draw(st.tuples(st.integers(0, 1), st.integers(0, 1)))
            parts.append(ideal_deterministic((ra, rb)))
    raw = [draw(st.integers(1, 10)) for _ in parts]
    weights = [Fraction(r, sum(raw)) for r in raw]
    return mix(parts, weights)


@pytest.fixture(scope="session")
def chsh_box():
    return modular_box_bipartite(2, 2, 2)
