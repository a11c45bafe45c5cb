"""Closed-form and exact reference values used as test baselines.

The asymptotic formulas hold for fixed m as n grows; they are reference
curves, not identities at finite n. :func:`exact_birthday_expectation` gives
the finite-n ground truth for the birthday statistic.
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction

from .deck import DeckError, as_deck
from .solver import BudgetExceeded

DEFAULT_STATE_BUDGET = 5_000_000


def harmonic(r: int) -> Fraction:
    if r < 0:
        raise ValueError("harmonic number needs r >= 0")
    return sum((Fraction(1, x) for x in range(1, r + 1)), Fraction(0))


def gamma_eval(x: float) -> float:
    if x <= 0:
        raise ValueError(f"gamma_eval is defined here only for x > 0, got {x}")
    return math.gamma(x)


def uniform_max_asymptotic(m: int, n: float) -> float:
    """Best guesser score against a uniform shuffle: H_m log n."""
    return float(harmonic(m)) * math.log(n)


def uniform_min_asymptotic(m: int, n: float) -> float:
    """Worst guesser score against a uniform shuffle: Gamma(1 + 1/m) n^(-1/m)."""
    return gamma_eval(1 + 1 / m) * n ** (-1 / m)


def greedy_max_asymptotic(n: float) -> float:
    return math.log(n)


def _mth_root_factorial(m: int) -> float:
    return math.exp(math.lgamma(m + 1) / m)


def greedy_min_asymptotic(m: int, n: float) -> float:
    """Gamma(1 + 1/m) (m!)^(1/m) n^(-1/m)."""
    return gamma_eval(1 + 1 / m) * _mth_root_factorial(m) * n ** (-1 / m)


def coupon_deficit_asymptotic(k: int, n: float) -> float:
    """(log n)^k / k!, the growth of the k-th brother's missing coupons."""
    return math.log(n) ** k / math.factorial(k)


def birthday_T_asymptotic(m: int, n: float) -> float:
    """Gamma(1 + 1/m) (m!)^(1/m) n^(1 - 1/m)."""
    return gamma_eval(1 + 1 / m) * _mth_root_factorial(m) * n ** (1 - 1 / m)


def exact_birthday_expectation(m: int, n: int, budget: int = DEFAULT_STATE_BUDGET) -> Fraction:
    """E[number of uniform draws from [n] until some value appears m times].

    Uses E[T] = sum_{s>=0} P(no value seen m times in s draws). The DP state
    is the occupancy profile (how many values were seen j times, 1 <= j < m);
    each profile carries the integer number of draw sequences reaching it, so
    P = count / n^s stays exact.
    """
    if m < 1 or n < 1:
        raise ValueError("exact_birthday_expectation needs m >= 1 and n >= 1")
    level: dict[tuple[int, ...], int] = {(0,) * (m - 1): 1}
    numer = 0  # sum of count_s * n^(S - s), denominator n^S
    s = 0
    visited = 0
    while level:
        numer = numer * n + sum(level.values())
        s += 1
        nxt: dict[tuple[int, ...], int] = defaultdict(int)
        for prof, ways in level.items():
            unseen = n - sum(prof)
            if unseen and m > 1:
                child = list(prof)
                child[0] += 1
                nxt[tuple(child)] += ways * unseen
            for j in range(1, m - 1):  # seen j times -> j + 1 times
                cj = prof[j - 1]
                if cj:
                    child = list(prof)
                    child[j - 1] -= 1
                    child[j] += 1
                    nxt[tuple(child)] += ways * cj
            # values already seen m - 1 times end the process
        visited += len(nxt)
        if visited > budget:
            raise BudgetExceeded(f"birthday DP exceeded {budget} profiles")
        level = dict(nxt)
    return Fraction(numer, n ** (s - 1))


def pennies_value(a, b) -> Fraction:
    """Expected matches against the uniform-card player: sum a_i b_i / N."""
    a, b = as_deck(a), as_deck(b)
    if a.width != b.width:
        raise DeckError(f"decks have different widths {a.width} and {b.width}")
    N = a.total()
    if N == 0 or b.total() != N:
        raise DeckError(f"decks need equal positive totals, got {a.total()} and {b.total()}")
    return Fraction(sum(x * y for x, y in zip(a, b)), N)
