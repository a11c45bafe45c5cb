import pytest
from hypothesis import given, strategies as st

from cardguess.deck import (
    CanonicalDeck,
    DeckError,
    DeckState,
    canonical_key,
    enumerate_decks,
    enumerate_partitions,
    full_deck,
    is_fully_supported,
    remove_card,
)

decks = st.lists(st.integers(0, 6), min_size=0, max_size=8).map(lambda c: DeckState(tuple(c)))


@pytest.mark.parametrize("n,m,expected", [(2, 2, (2, 2)), (3, 1, (1, 1, 1)), (1, 5, (5,))])
def test_full_deck(n, m, expected):
    assert full_deck(n, m).counts == expected


@pytest.mark.parametrize("n,m", [(0, 1), (1, 0), (0, 0)])
def test_full_deck_rejects_zero(n, m):
    with pytest.raises(DeckError):
        full_deck(n, m)


def test_remove_card_examples():
    assert remove_card(DeckState((2, 1)), 0).counts == (1, 1)
    assert remove_card(DeckState((2, 1)), 1).counts == (2, 0)
    with pytest.raises(DeckError):
        remove_card(DeckState((0, 1)), 0)
    with pytest.raises(DeckError):
        remove_card(DeckState((1, 1)), 2)


def test_canonical_key_examples():
    assert canonical_key((0, 2, 1)) == CanonicalDeck((2, 1), 3)
    assert canonical_key((1, 1)) == CanonicalDeck((1, 1), 2)
    assert canonical_key((0, 0)) == CanonicalDeck((), 2)


def test_fully_supported_examples():
    assert is_fully_supported((2, 1))
    assert not is_fully_supported((2, 0))
    assert is_fully_supported(())


def test_negative_counts_rejected():
    with pytest.raises(DeckError):
        DeckState((1, -1))


def test_text_form_round_trip():
    d = DeckState.parse(" 3,0,2 ")
    assert d.counts == (3, 0, 2)
    assert DeckState.parse(str(d)) == d
    with pytest.raises(DeckError):
        DeckState.parse("1,x")


def test_support_and_total():
    d = DeckState((2, 0, 3))
    assert d.support() == (0, 2)
    assert d.total() == 5


@given(decks, st.randoms())
def test_canonical_key_permutation_invariant(d, rnd):
    perm = list(range(d.width))
    rnd.shuffle(perm)
    assert canonical_key(d.permute(perm)) == canonical_key(d)


@given(decks)
def test_canonical_key_idempotent(d):
    key = canonical_key(d)
    assert canonical_key(key.to_deck()) == key
    assert all(a >= b > 0 for a, b in zip(key.partition, key.partition[1:] + (1,)))


@given(decks, st.data())
def test_remove_card_properties(d, data):
    if d.is_empty():
        return
    i = data.draw(st.sampled_from(d.support()))
    e = remove_card(d, i)
    assert e.total() == d.total() - 1
    assert set(e.support()) <= set(d.support())
    assert all(e[k] == d[k] for k in range(d.width) if k != i)


def test_enumerators():
    parts = list(enumerate_partitions(2, 2))
    assert sorted(parts) == sorted([(), (1,), (2,), (1, 1), (2, 1), (2, 2)])
    decks = list(enumerate_decks(2, 2))
    assert len(decks) == 6  # totals 0..2 over 2 types
