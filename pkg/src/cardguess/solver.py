"""Exact backward induction for the Guesser-Shuffler game.

Values are :class:`fractions.Fraction` throughout. Four quantities are
computed:

* ``f(d, S)`` / ``F(d, S)``: best guesser score against a fixed shuffler
  policy when the guesser maximizes / minimizes.
* ``f(d)`` / ``F(d)``: the game values when the shuffler minimizes /
  maximizes over state-wise mixed actions.

Optimal values depend only on the canonical deck (sorted parts plus width),
so they are memoized on :class:`~cardguess.deck.CanonicalDeck`; policy
evaluations are memoized on raw decks because a policy may break symmetry.
"""

from __future__ import annotations

import itertools
import json
import random
from math import lcm
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .deck import CanonicalDeck, DeckState, as_deck, canonical_key, enumerate_partitions
from .strategies import (
    MixedAction,
    Policy,
    StrategyError,
    check_action,
    greedy_shuffler,
    point_mass,
    uniform_over,
)

MIN = "min"
MAX = "max"


class BudgetExceeded(RuntimeError):
    """The requested enumeration would visit more states than allowed."""


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _parse_frac(s: str) -> Fraction:
    return Fraction(s)


def _children(part: tuple[int, ...]) -> dict[int, tuple[int, ...]]:
    """Canonical child of ``part`` after removing one card of each distinct count."""
    out = {}
    for idx, c in enumerate(part):
        if c in out:
            continue
        # removing from the last position holding c keeps the tuple sorted
        last = idx
        while last + 1 < len(part) and part[last + 1] == c:
            last += 1
        child = part[:last] + ((c - 1,) if c > 1 else ()) + part[last + 1:]
        out[c] = child
    return out


class GameSolver:
    """Memoized optimal values ``f`` and ``F`` over canonical decks.

    One instance owns its memo tables; separate instances may run in
    separate threads.
    """

    def __init__(self, max_states: int | None = None) -> None:
        self.max_states = max_states
        self._f: dict[tuple[int, ...], Fraction] = {(): Fraction(0)}
        self._F: dict[tuple[tuple[int, ...], int], Fraction] = {}

    def _charge(self) -> None:
        if self.max_states is not None and len(self._f) + len(self._F) > self.max_states:
            raise BudgetExceeded(f"solver exceeded {self.max_states} memoized states")

    # f ---------------------------------------------------------------
    def f_canonical(self, part: tuple[int, ...]) -> Fraction:
        cached = self._f.get(part)
        if cached is not None:
            return cached
        kids = _children(part)
        values = sorted(self.f_canonical(kids[c]) for c in part)
        value = water_fill(values)[0]
        self._f[part] = value
        self._charge()
        return value

    def f(self, d: DeckState | Sequence[int]) -> Fraction:
        return self.f_canonical(canonical_key(d).partition)

    # F ---------------------------------------------------------------
    def F_canonical(self, part: tuple[int, ...], width: int) -> Fraction:
        if len(part) < width:
            return Fraction(0)
        key = (part, width)
        cached = self._F.get(key)
        if cached is not None:
            return cached
        kids = _children(part)
        values = [self.F_canonical(kids[c], width) for c in part]
        value = max(max(values), (1 + sum(values)) / width)
        self._F[key] = value
        self._charge()
        return value

    def F(self, d: DeckState | Sequence[int]) -> Fraction:
        key = canonical_key(d)
        return self.F_canonical(key.partition, key.width)

    # per-deck optimizers --------------------------------------------
    def child_values(self, d: DeckState, objective: str) -> dict[int, Fraction]:
        value = self.f if objective == MIN else self.F
        return {j: value(d.remove(j)) for j in d.support()}

    def optimal_min_value(self, d: DeckState | Sequence[int]) -> tuple[Fraction, MixedAction]:
        d = as_deck(d)
        if d.is_empty():
            return Fraction(0), {}
        v = self.child_values(d, MIN)
        order = sorted(v, key=lambda j: (v[j], j))
        value, k = water_fill([v[j] for j in order])
        return value, uniform_over(order[:k])

    def optimal_max_value(self, d: DeckState | Sequence[int]) -> tuple[Fraction, MixedAction]:
        d = as_deck(d)
        if d.is_empty():
            return Fraction(0), {}
        if len(d.support()) < d.width:
            return Fraction(0), greedy_shuffler(d)
        v = self.child_values(d, MAX)
        top = max(v.values())
        spread = (1 + sum(v.values())) / d.width
        if spread >= top:
            return spread, uniform_over(range(d.width))
        return top, point_mass(min(j for j in v if v[j] == top))


def water_fill(sorted_values: Sequence[Fraction]) -> tuple[Fraction, int]:
    """Solve min over distributions p of ``max p + sum p_j v_j``.

    ``sorted_values`` must be ascending. The optimum puts mass 1/k on the k
    smallest values; returns ``(value, k)`` with the largest minimizing k.
    """
    best = None
    best_k = 0
    acc = Fraction(1)
    for k, v in enumerate(sorted_values, start=1):
        acc += v
        cand = acc / k
        if best is None or cand <= best:
            best, best_k = cand, k
    if best is None:
        return Fraction(0), 0
    return best, best_k


_default = GameSolver()


def default_solver() -> GameSolver:
    return _default


def optimal_min_value(d) -> tuple[Fraction, MixedAction]:
    return _default.optimal_min_value(d)


def optimal_max_value(d) -> tuple[Fraction, MixedAction]:
    return _default.optimal_max_value(d)


# ---------------------------------------------------------------------------
# Values against a fixed shuffler policy


def one_shot_objective(action: MixedAction, subvalues: dict[int, Fraction], objective: str, width: int) -> Fraction:
    """``max_i p_i + sum p_j v_j`` (min side) or ``min_{i in [width]} p_i + ...`` (max side)."""
    probs = [action.get(i, Fraction(0)) for i in range(width)]
    head = max(probs) if objective == MIN else min(probs)
    return head + sum(p * subvalues[j] for j, p in action.items() if p)


def _policy_value(d: DeckState, shuffler: Policy, objective: str) -> Fraction:
    memo: dict[DeckState, Fraction] = {}

    def rec(x: DeckState) -> Fraction:
        if x.is_empty():
            return Fraction(0)
        hit = memo.get(x)
        if hit is not None:
            return hit
        action = shuffler(x)
        check_action(action, x.support(), f"shuffler at {x}")
        sub = {j: rec(x.remove(j)) for j, p in action.items() if p}
        val = one_shot_objective(action, sub, objective, x.width)
        memo[x] = val
        return val

    return rec(d)


def value_vs_shuffler_max(d, shuffler: Policy) -> Fraction:
    """f(d, S): expected score of a best-responding (maximizing) guesser."""
    return _policy_value(as_deck(d), shuffler, MIN)


def value_vs_shuffler_min(d, shuffler: Policy) -> Fraction:
    """F(d, S): expected score of a best-responding (minimizing) guesser."""
    return _policy_value(as_deck(d), shuffler, MAX)


def expected_score(
    d,
    guesser: Policy,
    shuffler: Policy,
    weight: Callable[[DeckState, int], int] | None = None,
    symmetric: bool = False,
) -> Fraction:
    """Exact E[score] when both players follow Markov policies.

    ``weight(d, i)`` scales the point for a correct guess of type ``i`` at
    deck ``d`` (default 1); e.g. ``lambda d, i: d[i] == k`` counts only
    correct guesses on cards of multiplicity k. With ``symmetric=True`` the
    recursion runs on sorted decks, which is valid only when both policies
    commute with relabeling and the weight depends on counts alone.
    """
    d = as_deck(d)
    memo: dict[DeckState, Fraction] = {}

    def rec(x: DeckState) -> Fraction:
        if x.is_empty():
            return Fraction(0)
        if symmetric:
            x = DeckState(tuple(sorted(x.counts, reverse=True)))
        hit = memo.get(x)
        if hit is not None:
            return hit
        g = guesser(x)
        s = shuffler(x)
        check_action(g, range(x.width), f"guesser at {x}")
        check_action(s, x.support(), f"shuffler at {x}")
        val = Fraction(0)
        for j, p in s.items():
            if not p:
                continue
            hit_p = g.get(j, 0)
            if hit_p:
                val += p * hit_p * (1 if weight is None else weight(x, j))
            val += p * rec(x.remove(j))
        memo[x] = val
        return val

    return rec(d)


# ---------------------------------------------------------------------------
# Brute-force oracle


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def brute_force_one_shot(
    subvalues: Sequence[Fraction], objective: str, grid_denominator: int, width: int | None = None
) -> Fraction:
    """Best one-shot objective over the grid of distributions with denominator D.

    The min side ranges over distributions on the listed types; the max side
    assumes a fully-supported deck, so ``width`` defaults to the number of
    subvalues.
    """
    subvalues = [Fraction(v) for v in subvalues]
    s = len(subvalues)
    if s == 0:
        raise ValueError("one-shot problem needs at least one type")
    width = s if width is None else width
    den = grid_denominator
    # scale every objective value by den * L so the scan stays in integers
    L = lcm(*(v.denominator for v in subvalues)) if subvalues else 1
    scaled = [v.numerator * (L // v.denominator) for v in subvalues]
    best = None
    for comp in _compositions(den, s):
        if objective == MIN:
            head = max(comp)
        else:
            head = min(comp) if width == s else 0
        val = head * L + sum(c * v for c, v in zip(comp, scaled))
        if best is None or (val < best if objective == MIN else val > best):
            best = val
    return Fraction(best, den * L)


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class Witness:
    """``|J| * v_i < 1 + sum_{j in J} v_j`` evaluated exactly."""

    J: tuple[int, ...]
    i: int
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs


@dataclass
class ValueCertificate:
    deck: DeckState
    objective: str
    value: Fraction
    optimizer: MixedAction
    greedy_attains: bool
    unique: bool
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def canonical(self) -> CanonicalDeck:
        return canonical_key(self.deck)

    @property
    def violations(self) -> list[Witness]:
        return [w for w in self.witnesses if not w.holds]

    def to_dict(self) -> dict:
        canon = self.canonical
        return {
            "deck": list(self.deck.counts),
            "partition": list(canon.partition),
            "width": canon.width,
            "objective": self.objective,
            "value": _frac(self.value),
            "optimizer": {str(i): _frac(p) for i, p in sorted(self.optimizer.items())},
            "greedy_attains": self.greedy_attains,
            "unique": self.unique,
            "witnesses": [
                {"J": list(w.J), "i": w.i, "lhs": _frac(w.lhs), "rhs": _frac(w.rhs), "holds": w.holds}
                for w in self.witnesses
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "ValueCertificate":
        return cls(
            deck=DeckState(tuple(doc["deck"])),
            objective=doc["objective"],
            value=_parse_frac(doc["value"]),
            optimizer={int(i): _parse_frac(p) for i, p in doc["optimizer"].items()},
            greedy_attains=doc["greedy_attains"],
            unique=doc["unique"],
            witnesses=[
                Witness(tuple(w["J"]), w["i"], _parse_frac(w["lhs"]), _parse_frac(w["rhs"]))
                for w in doc["witnesses"]
            ],
        )

    @classmethod
    def from_json(cls, text: str) -> "ValueCertificate":
        return cls.from_dict(json.loads(text))


# Above this support size only the extremal J per i is recorded.
FULL_WITNESS_LIMIT = 10


def _witnesses(values: dict[int, Fraction]) -> list[Witness]:
    support = sorted(values)
    out = []
    if len(support) <= FULL_WITNESS_LIMIT:
        for size in range(1, len(support) + 1):
            for J in itertools.combinations(support, size):
                rhs = 1 + sum(values[j] for j in J)
                for i in support:
                    out.append(Witness(J, i, size * values[i], rhs))
        return out
    for i in support:
        # |J| v_i - sum_J v_j is largest for J = {j : v_j < v_i}
        J = tuple(j for j in support if values[j] < values[i]) or (i,)
        out.append(Witness(J, i, len(J) * values[i], 1 + sum(values[j] for j in J)))
    return out


def verify_greedy_certificate(d, objective: str = MIN, solver: GameSolver | None = None) -> ValueCertificate:
    """Check that the greedy (uniform-over-support) action is the unique optimum at ``d``.

    Both objectives use the same strict inequality family on child values;
    for the max side it is only meaningful on fully-supported decks, and
    other decks get value 0 with ``unique=False`` (every action is optimal).
    A violated witness is reported, never raised.
    """
    solver = solver or _default
    d = as_deck(d)
    if objective not in (MIN, MAX):
        raise ValueError(f"objective must be 'min' or 'max', got {objective!r}")
    if d.is_empty():
        return ValueCertificate(d, objective, Fraction(0), {}, True, True, [])
    greedy = greedy_shuffler(d)
    if objective == MAX and len(d.support()) < d.width:
        return ValueCertificate(d, objective, Fraction(0), greedy, True, False, [])
    if objective == MIN:
        value, optimizer = solver.optimal_min_value(d)
    else:
        value, optimizer = solver.optimal_max_value(d)
    sub = solver.child_values(d, objective)
    attains = one_shot_objective(greedy, sub, objective, d.width) == value
    witnesses = _witnesses(sub)
    unique = attains and all(w.holds for w in witnesses)
    return ValueCertificate(d, objective, value, optimizer, attains, unique, witnesses)


def verify_monotonicity(d, solver: GameSolver | None = None) -> bool:
    """Removing a card of a more common type never helps the guesser (f) or hurts the shuffler (F)."""
    solver = solver or _default
    d = as_deck(d)
    support = d.support()
    f = {j: solver.f(d.remove(j)) for j in support}
    F = {j: solver.F(d.remove(j)) for j in support}
    for i in support:
        for j in support:
            if d[i] >= d[j] and not (f[i] <= f[j] and F[i] >= F[j]):
                return False
    return True


def _random_action(rng: random.Random, types: Sequence[int]) -> MixedAction:
    if rng.random() < 0.5:
        return point_mass(rng.choice(list(types)))
    weights = [rng.randint(0, 4) for _ in types]
    if not any(weights):
        weights[rng.randrange(len(weights))] = 1
    total = sum(weights)
    return {t: Fraction(w, total) for t, w in zip(types, weights) if w}


def random_in_deck_guesser(rng: random.Random) -> Policy:
    """A random Markov guesser that only guesses types present in the deck."""
    table: dict[DeckState, MixedAction] = {}

    def policy(d: DeckState) -> MixedAction:
        if d not in table:
            table[d] = _random_action(rng, d.support())
        return table[d]

    return policy


def random_absent_guesser(rng: random.Random) -> Policy:
    """A random Markov guesser that guesses an absent type whenever one exists."""
    table: dict[DeckState, MixedAction] = {}

    def policy(d: DeckState) -> MixedAction:
        if d not in table:
            absent = [i for i, c in enumerate(d.counts) if c == 0]
            table[d] = _random_action(rng, absent or list(range(d.width)))
        return table[d]

    return policy


def verify_reduction(d, trials: int = 10, seed: int = 0) -> bool:
    """Every in-deck guesser scores f(d, greedy) and every absent-first guesser F(d, greedy)."""
    d = as_deck(d)
    rng = random.Random(seed)
    target_max = value_vs_shuffler_max(d, greedy_shuffler)
    target_min = value_vs_shuffler_min(d, greedy_shuffler)
    for _ in range(trials):
        if expected_score(d, random_in_deck_guesser(rng), greedy_shuffler) != target_max:
            return False
        if expected_score(d, random_absent_guesser(rng), greedy_shuffler) != target_min:
            return False
    return True


def canonical_decks(max_n: int, max_m: int, exact_width: bool = False) -> Iterable[DeckState]:
    """Canonical decks of width n <= max_n with every count <= max_m."""
    for n in range(1, max_n + 1) if not exact_width else (max_n,):
        for part in enumerate_partitions(n, max_m):
            yield CanonicalDeck(part, n).to_deck()
