"""Closed-form detection-efficiency bounds and the prime helpers behind the constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

__all__ = [
    "is_prime",
    "min_prime_geq",
    "min_prime_gt",
    "bipartite_bound",
    "multipartite_lower",
    "multipartite_upper",
    "UpperBound",
    "BoundRow",
    "bounds_table",
    "PROVEN_LOWER_MAX_PARTIES",
]

# lower bound is proved up to this many parties, conjectured beyond
PROVEN_LOWER_MAX_PARTIES = 500

_ROOT_DPS = 40


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def min_prime_geq(n: int) -> int:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    p = max(n, 2)
    while not is_prime(p):
        p += 1
    return p


def min_prime_gt(n: int) -> int:
    return min_prime_geq(n + 1)


def bipartite_bound(m_a: int, m_b: int) -> Fraction:
    """(M_A + M_B - 2) / (M_A M_B - 1): the tight two-party efficiency threshold."""
    if m_a < 2 or m_b < 2:
        raise ValueError("bound degenerates unless both parties have at least two inputs")
    return Fraction(m_a + m_b - 2, m_a * m_b - 1)


def multipartite_lower(n: int, m: int) -> tuple[Fraction, bool]:
    """N / (M(N-1) + 1), plus whether it rests on the N <= 500 restriction being lifted."""
    if n < 2 or m < 2:
        raise ValueError("need N >= 2 parties and M >= 2 inputs")
    return Fraction(n, m * (n - 1) + 1), n > PROVEN_LOWER_MAX_PARTIES


@dataclass(frozen=True)
class UpperBound:
    radicand: Fraction
    root_degree: int
    value: float

    def __float__(self):
        return self.value


def multipartite_upper(inputs: Sequence[int]) -> UpperBound:
    """((sum M_i - N) / (prod M_i - 1)) ** (1/(N-1)).

    The radicand is exact; the root is taken at 40 significant digits before
    rounding to float.
    """
    inputs = list(inputs)
    n = len(inputs)
    if n < 2 or any(m < 2 for m in inputs):
        raise ValueError("need N >= 2 parties, each with at least two inputs")
    radicand = Fraction(sum(inputs) - n, math.prod(inputs) - 1)
    degree = n - 1
    if degree == 1:
        return UpperBound(radicand, 1, float(radicand))
    with mpmath.workdps(_ROOT_DPS):
        root = mpmath.root(mpmath.mpf(radicand.numerator) / radicand.denominator, degree)
        value = float(root)
    return UpperBound(radicand, degree, value)


@dataclass(frozen=True)
class BoundRow:
    M: int
    N: int
    lower: Fraction
    upper: float
    upper_radicand: Fraction
    conjectural: bool


def bounds_table(m_list: Iterable[int], n_max: int) -> list[BoundRow]:
    rows = []
    for m in m_list:
        for n in range(2, n_max + 1):
            lower, conj = multipartite_lower(n, m)
            up = multipartite_upper([m] * n)
            rows.append(BoundRow(m, n, lower, up.value, up.radicand, conj))
    return rows
