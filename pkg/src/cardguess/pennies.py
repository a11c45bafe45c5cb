"""Restricted Matching Pennies.

Both players hold decks with equal totals and reveal one card each per
round; a match scores a point. Strategies take ``(own deck, opponent deck)``
and return a mixed action over their own support, so player B is called as
``B(b, a)``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import numpy as np

from .deck import DeckError, DeckState, as_deck, enumerate_decks
from .mc import Stream
from .strategies import MixedAction, check_action, point_mass

PenniesPolicy = Callable[[DeckState, DeckState], MixedAction]


def _check_pair(a: DeckState, b: DeckState) -> None:
    if a.width != b.width:
        raise DeckError(f"decks have different widths {a.width} and {b.width}")
    if a.total() != b.total():
        raise DeckError(f"decks need equal totals, got {a.total()} and {b.total()}")


def uniform_pennies_strategy(a, b=None) -> MixedAction:
    """Play a uniformly random remaining card: type i with probability a_i / sum(a)."""
    a = as_deck(a)
    total = a.total()
    if total == 0:
        raise DeckError("uniform strategy called on an empty deck")
    return {i: Fraction(c, total) for i, c in enumerate(a.counts) if c}


def _sample_uniform(a: DeckState, b: DeckState, stream: Stream) -> int:
    u = stream.below(a.total())
    for i, c in enumerate(a.counts):
        if u < c:
            return i
        u -= c
    raise AssertionError("unreachable")


uniform_pennies_strategy.sample = _sample_uniform  # type: ignore[attr-defined]


def greedy_own_counts(a, b=None) -> MixedAction:
    """Deterministic: the lowest-index type with the most copies left in the own deck."""
    a = as_deck(a)
    top = max(a.counts)
    return point_mass(a.counts.index(top))


def lowest_index_strategy(a, b=None) -> MixedAction:
    return point_mass(as_deck(a).support()[0])


def random_deterministic_strategy(seed: int) -> PenniesPolicy:
    """A Markov strategy choosing one random own-support type per state, fixed once drawn."""
    rng = np.random.default_rng(seed)
    table: dict[tuple[DeckState, DeckState], MixedAction] = {}

    def policy(a: DeckState, b: DeckState) -> MixedAction:
        key = (a, b)
        if key not in table:
            support = a.support()
            table[key] = point_mass(support[int(rng.integers(len(support)))])
        return table[key]

    return policy


def pennies_expected(a, b, A: PenniesPolicy, B: PenniesPolicy) -> Fraction:
    """Exact E[matches] with both players on Markov strategies."""
    a, b = as_deck(a), as_deck(b)
    _check_pair(a, b)
    memo: dict[tuple[DeckState, DeckState], Fraction] = {}

    def rec(x: DeckState, y: DeckState) -> Fraction:
        if x.is_empty():
            return Fraction(0)
        hit = memo.get((x, y))
        if hit is not None:
            return hit
        pa = A(x, y)
        pb = B(y, x)
        check_action(pa, x.support(), f"first player at {x}")
        check_action(pb, y.support(), f"second player at {y}")
        val = Fraction(0)
        for i, p in pa.items():
            if not p:
                continue
            for j, q in pb.items():
                if not q:
                    continue
                val += p * q * ((i == j) + rec(x.remove(i), y.remove(j)))
        memo[x, y] = val
        return val

    return rec(a, b)


def pennies_exact_vs_uniform(a, b, A: PenniesPolicy) -> Fraction:
    """E[M(a, b, A, U)]: ``A`` in the first seat against the uniform player."""
    return pennies_expected(a, b, A, uniform_pennies_strategy)


def pennies_exact_uniform_first(a, b, B: PenniesPolicy) -> Fraction:
    """E[M(a, b, U, B)]: the uniform player in the first seat."""
    return pennies_expected(a, b, uniform_pennies_strategy, B)


def _sample(policy: PenniesPolicy, own: DeckState, opp: DeckState, stream: Stream) -> int:
    fast = getattr(policy, "sample", None)
    if fast is not None:
        return fast(own, opp, stream)
    action = policy(own, opp)
    check_action(action, own.support(), f"strategy at {own}")
    return stream.sample(action)


def pennies_play(a, b, A: PenniesPolicy, B: PenniesPolicy, stream: Stream) -> int:
    """Play one game to depletion; A's card is drawn before B's each round."""
    a, b = as_deck(a), as_deck(b)
    _check_pair(a, b)
    matches = 0
    while not a.is_empty():
        i = _sample(A, a, b, stream)
        j = _sample(B, b, a, stream)
        matches += i == j
        a, b = a.remove(i), b.remove(j)
    return matches


# ---------------------------------------------------------------------------
# Exhaustive check of the uniform-neutralizer identity


def _scaled_levels(width: int, max_total: int, seed: int, seat: str):
    """Yield ``(N, decks, choice, X)`` per total N for the scaled recursion below."""
    if seat not in ("first", "second"):
        raise ValueError("seat must be 'first' or 'second'")
    if math.factorial(max(max_total - 1, 0)) * max_total**2 >= 2**62:
        raise ValueError("max_total too large for the int64 scaled recursion")
    rng = np.random.default_rng(seed)
    n = width
    levels: list[np.ndarray] = []
    index: list[dict[tuple[int, ...], int]] = []
    for N in range(max_total + 1):
        decks = [d.counts for d in enumerate_decks(n, N) if d.total() == N]
        levels.append(np.array(decks, dtype=np.int64).reshape(len(decks), n))
        index.append({d: k for k, d in enumerate(decks)})

    prev = np.zeros((1, 1), dtype=np.int64)  # X at N = 0
    for N in range(1, max_total + 1):
        D = levels[N]
        k = len(D)
        # child[d, t]: deck d minus one card of type t (0 when absent; its weight is 0)
        child = np.zeros((k, n), dtype=np.int64)
        for r, counts in enumerate(D):
            for t in range(n):
                if counts[t]:
                    c = list(counts)
                    c[t] -= 1
                    child[r, t] = index[N - 1][tuple(c)]
        own = D[:, None, :] if seat == "first" else D[None, :, :]
        own = np.broadcast_to(own, (k, k, n))
        u = rng.random((k, k))
        cum = np.cumsum(own > 0, axis=2)
        pick_rank = np.floor(u * cum[:, :, -1]).astype(np.int64) + 1
        choice = np.argmax(cum >= pick_rank[:, :, None], axis=2)

        fact = math.factorial(N - 1)
        rows = np.arange(k)[:, None]
        cols = np.arange(k)[None, :]
        X = np.zeros((k, k), dtype=np.int64)
        if seat == "first":
            # adversary holds a (rows) and plays `choice`; uniform holds b (cols)
            X += fact * D[cols, choice]
            ca = child[rows, choice]
            for j in range(n):
                X += D[cols, j] * prev[ca, child[cols, j]]
        else:
            # uniform holds a (rows); adversary holds b (cols) and plays `choice`
            X += fact * D[rows, choice]
            cb = child[cols, choice]
            for i in range(n):
                X += D[rows, i] * prev[child[rows, i], cb]
        yield N, D, choice, X
        prev = X


def neutralizer_violations(width: int, max_total: int, seed: int, seat: str = "first") -> int:
    """Count deck pairs where a random deterministic adversary breaks E[M] = sum a_i b_i / N.

    ``seat`` is where the adversary sits; the uniform player takes the other
    seat. All pairs of width-``width`` decks with equal totals up to
    ``max_total`` share one adversary, drawn per state from ``seed``. Values
    are scaled by N! so the recursion stays in exact integers:

        X(a, b) = (N-1)! * b_i + sum_j b_j X(a - e_i, b - e_j)      (adversary plays i)

    and the identity reads X(a, b) = (N-1)! * sum_k a_k b_k.
    """
    bad = 0
    for N, D, _, X in _scaled_levels(width, max_total, seed, seat):
        bad += int(np.count_nonzero(X != math.factorial(N - 1) * (D @ D.T)))
    return bad


def neutralizer_table(width: int, max_total: int, seed: int, seat: str = "first"):
    """The adversary and values behind :func:`neutralizer_violations`.

    Returns ``(choices, values)``: ``choices[(a, b)]`` is the type the
    adversary plays from its own deck at pair ``(a, b)`` (a = first seat), and
    ``values[(a, b)]`` the exact expected number of matches.
    """
    choices: dict[tuple[DeckState, DeckState], int] = {}
    values: dict[tuple[DeckState, DeckState], Fraction] = {}
    for N, D, choice, X in _scaled_levels(width, max_total, seed, seat):
        decks = [DeckState(tuple(int(x) for x in row)) for row in D]
        fact = math.factorial(N)
        for r, a in enumerate(decks):
            for c, b in enumerate(decks):
                choices[a, b] = int(choice[r, c])
                values[a, b] = Fraction(int(X[r, c]), fact)
    return choices, values
