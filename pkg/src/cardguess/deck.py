"""Deck states for the Guesser-Shuffler game.

A deck is an n-vector of non-negative counts: ``counts[i]`` copies of card
type ``i`` remain. Decks are immutable and hashable so they can key memo
tables directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class DeckError(ValueError):
    """Raised for malformed decks or illegal draws."""


@dataclass(frozen=True)
class DeckState:
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise DeckError(f"negative count in deck {counts}")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def of(cls, counts: Iterable[int]) -> "DeckState":
        return cls(tuple(counts))

    @classmethod
    def parse(cls, text: str) -> "DeckState":
        """Parse the ``"c1,c2,...,cn"`` text form."""
        text = text.strip()
        if not text:
            return cls(())
        try:
            return cls(tuple(int(tok) for tok in text.split(",")))
        except ValueError as exc:
            raise DeckError(f"cannot parse deck {text!r}: {exc}") from None

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __getitem__(self, i: int) -> int:
        return self.counts[i]

    def __iter__(self):
        return iter(self.counts)

    @property
    def width(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return sum(self.counts)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.counts) if c > 0)

    def is_empty(self) -> bool:
        return not any(self.counts)

    def remove(self, i: int) -> "DeckState":
        return remove_card(self, i)

    def permute(self, perm: Sequence[int]) -> "DeckState":
        """Relabel types: position ``k`` of the result holds ``counts[perm[k]]``."""
        return DeckState(tuple(self.counts[p] for p in perm))


@dataclass(frozen=True)
class CanonicalDeck:
    """Deck up to relabeling: non-increasing positive parts plus the width."""

    partition: tuple[int, ...]
    width: int

    @property
    def fully_supported(self) -> bool:
        return len(self.partition) == self.width

    def to_deck(self) -> DeckState:
        return DeckState(self.partition + (0,) * (self.width - len(self.partition)))


def as_deck(d: DeckState | Sequence[int] | str) -> DeckState:
    if isinstance(d, DeckState):
        return d
    if isinstance(d, str):
        return DeckState.parse(d)
    return DeckState(tuple(d))


def full_deck(n: int, m: int) -> DeckState:
    if n < 1 or m < 1:
        raise DeckError(f"full deck needs n >= 1 and m >= 1, got n={n}, m={m}")
    return DeckState((m,) * n)


def remove_card(d: DeckState, i: int) -> DeckState:
    if not 0 <= i < len(d.counts):
        raise DeckError(f"card type {i} out of range for width {len(d.counts)}")
    if d.counts[i] == 0:
        raise DeckError(f"no copies of type {i} left in {d}")
    counts = list(d.counts)
    counts[i] -= 1
    return DeckState(tuple(counts))


def canonical_key(d: DeckState | Sequence[int]) -> CanonicalDeck:
    d = as_deck(d)
    return CanonicalDeck(tuple(sorted((c for c in d.counts if c > 0), reverse=True)), len(d.counts))


def is_fully_supported(d: DeckState | Sequence[int]) -> bool:
    return all(c > 0 for c in as_deck(d).counts)


def enumerate_partitions(max_parts: int, max_part: int) -> Iterable[tuple[int, ...]]:
    """Yield every non-increasing tuple of parts in [1, max_part] with at most
    ``max_parts`` entries, including the empty tuple."""

    def rec(prefix: tuple[int, ...], cap: int):
        yield prefix
        if len(prefix) == max_parts:
            return
        for part in range(cap, 0, -1):
            yield from rec(prefix + (part,), part)

    yield from rec((), max_part)


def enumerate_decks(width: int, max_total: int) -> Iterable[DeckState]:
    """All decks of the given width with total at most ``max_total``."""

    def rec(prefix: tuple[int, ...], budget: int):
        if len(prefix) == width:
            yield DeckState(prefix)
            return
        for c in range(budget + 1):
            yield from rec(prefix + (c,), budget - c)

    yield from rec((), max_total)
