"""Named Markov strategies for both players.

Every policy maps a deck to an exact :data:`MixedAction` (type -> Fraction).
Strategies that the compiled game kernel knows carry a ``kernel_code`` so the
simulator can run them without calling back into Python.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .deck import DeckError, DeckState, as_deck

MixedAction = dict[int, Fraction]
Policy = Callable[[DeckState], MixedAction]


class StrategyError(ValueError):
    """A policy produced an invalid distribution for the deck it was given."""


def uniform_over(types) -> MixedAction:
    types = list(types)
    p = Fraction(1, len(types))
    return {i: p for i in types}


def point_mass(i: int) -> MixedAction:
    return {i: Fraction(1)}


def check_action(action: Mapping[int, Fraction], allowed, what: str = "action") -> None:
    allowed = set(allowed)
    total = Fraction(0)
    for i, p in action.items():
        if p < 0:
            raise StrategyError(f"{what}: negative probability {p} on type {i}")
        if p > 0 and i not in allowed:
            raise StrategyError(f"{what}: type {i} is not allowed here")
        total += p
    if total != 1:
        raise StrategyError(f"{what}: probabilities sum to {total}, not 1")


def _require_cards(d) -> DeckState:
    d = as_deck(d)
    if d.is_empty():
        raise DeckError("strategy called on an empty deck")
    return d


def greedy_shuffler(d: DeckState) -> MixedAction:
    """Uniform over the card types still present, whatever their counts."""
    d = _require_cards(d)
    return uniform_over(d.support())


def uniform_shuffle_shuffler(d: DeckState) -> MixedAction:
    # Drawing a uniform card is the same as drawing the top of a uniform shuffle.
    d = _require_cards(d)
    total = d.total()
    return {i: Fraction(c, total) for i, c in enumerate(d.counts) if c > 0}


def guesser_max_multiplicity(d: DeckState) -> MixedAction:
    d = _require_cards(d)
    top = max(d.counts)
    return uniform_over(i for i, c in enumerate(d.counts) if c == top)


def _min_multiplicity_types(d: DeckState) -> list[int]:
    low = min(c for c in d.counts if c > 0)
    return [i for i, c in enumerate(d.counts) if c == low]


def guesser_absent_type(d: DeckState) -> MixedAction:
    """Guess an exhausted type when one exists, else a rarest present type."""
    d = _require_cards(d)
    for i, c in enumerate(d.counts):
        if c == 0:
            return point_mass(i)
    return uniform_over(_min_multiplicity_types(d))


def _integer_root_ceil(value: int, m: int) -> int:
    """Smallest x >= 0 with x**m >= value."""
    if value <= 0:
        return 0
    x = int(round(value ** (1.0 / m)))
    while x ** m < value:
        x += 1
    while x > 0 and (x - 1) ** m >= value:
        x -= 1
    return x


def phase_thresholds(n: int, m: int) -> list[int]:
    """``thr[i]`` = least integer count >= n**((i-1)/m), for i = 1..m (index 0 unused).

    Moving from phase i to i-1 needs at least ``thr[i]`` types of multiplicity
    below i. Computed with integers so ties at perfect powers are exact.
    """
    return [0] + [_integer_root_ceil(n ** (i - 1), m) for i in range(1, m + 1)]


def current_phase(d: DeckState, m: int) -> int:
    d = as_deck(d)
    n = d.width
    thr = phase_thresholds(n, m)
    phase = m
    while phase > 0 and sum(1 for c in d.counts if c < phase) >= thr[phase]:
        phase -= 1
    return phase


def guesser_phase_minimizer(d: DeckState, m: int) -> MixedAction:
    d = _require_cards(d)
    if 0 in d.counts:
        return point_mass(d.counts.index(0))
    phase = current_phase(d, m)
    exact = [i for i, c in enumerate(d.counts) if c == phase]
    if exact:
        return uniform_over(exact)
    return uniform_over(_min_multiplicity_types(d))


def uniform_guesser(d: DeckState) -> MixedAction:
    d = _require_cards(d)
    return uniform_over(range(d.width))


def best_response_guesser(d: DeckState, shuffler: Policy) -> MixedAction:
    """Point mass on the lowest-index type the shuffler is most likely to draw."""
    action = shuffler(as_deck(d))
    best = max(action.values())
    return point_mass(min(i for i, p in action.items() if p == best))


# Kernel codes shared with the compiled and pure-Python game kernels.
SHUFFLER_GREEDY = 0
SHUFFLER_UNIFORM = 1
GUESSER_GPLUS = 0
GUESSER_ABSENT = 1
GUESSER_GMINUS = 2
GUESSER_UNIFORM = 3


@dataclass(frozen=True)
class NamedStrategy:
    name: str
    side: str  # "guesser" or "shuffler"
    policy: Policy = field(compare=False)
    kernel_code: int | None = None
    multiplicity: int | None = None  # phase minimizer only

    def __call__(self, d: DeckState) -> MixedAction:
        return self.policy(d)


SHUFFLER_NAMES = ("greedy", "uniform-shuffle")
GUESSER_NAMES = ("gplus", "gminus", "absent", "best-response", "uniform-guess")
STRATEGY_NAMES = ("greedy", "uniform-shuffle", "gplus", "gminus", "absent", "best-response", "uniform-guess")


def make_strategy(name: str, *, m: int | None = None, shuffler: NamedStrategy | None = None) -> NamedStrategy:
    """Build a strategy by its CLI name.

    ``gminus`` needs the starting multiplicity ``m``; ``best-response`` needs
    the shuffler it responds to.
    """
    if name == "greedy":
        return NamedStrategy(name, "shuffler", greedy_shuffler, SHUFFLER_GREEDY)
    if name == "uniform-shuffle":
        return NamedStrategy(name, "shuffler", uniform_shuffle_shuffler, SHUFFLER_UNIFORM)
    if name == "gplus":
        return NamedStrategy(name, "guesser", guesser_max_multiplicity, GUESSER_GPLUS)
    if name == "absent":
        return NamedStrategy(name, "guesser", guesser_absent_type, GUESSER_ABSENT)
    if name == "uniform-guess":
        return NamedStrategy(name, "guesser", uniform_guesser, GUESSER_UNIFORM)
    if name == "gminus":
        if m is None or m < 1:
            raise ValueError("gminus needs the starting multiplicity m >= 1")
        return NamedStrategy(
            name, "guesser", lambda d: guesser_phase_minimizer(d, m), GUESSER_GMINUS, multiplicity=m
        )
    if name == "best-response":
        if shuffler is None:
            raise ValueError("best-response needs a shuffler to respond to")
        return NamedStrategy(name, "guesser", lambda d: best_response_guesser(d, shuffler.policy))
    raise ValueError(f"unknown strategy {name!r}; valid names: {', '.join(STRATEGY_NAMES)}")
