"""Exact solver and Monte Carlo laboratory for the adversarial card-guessing game."""

from ._backend import BACKEND
from .deck import CanonicalDeck, DeckError, DeckState, canonical_key, full_deck, is_fully_supported, remove_card
from .solver import (
    BudgetExceeded,
    GameSolver,
    ValueCertificate,
    brute_force_one_shot,
    expected_score,
    optimal_max_value,
    optimal_min_value,
    value_vs_shuffler_max,
    value_vs_shuffler_min,
    verify_greedy_certificate,
    verify_monotonicity,
    verify_reduction,
)
from .strategies import NamedStrategy, make_strategy

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BudgetExceeded",
    "CanonicalDeck",
    "DeckError",
    "DeckState",
    "GameSolver",
    "NamedStrategy",
    "ValueCertificate",
    "brute_force_one_shot",
    "canonical_key",
    "expected_score",
    "full_deck",
    "is_fully_supported",
    "make_strategy",
    "optimal_max_value",
    "optimal_min_value",
    "remove_card",
    "value_vs_shuffler_max",
    "value_vs_shuffler_min",
    "verify_greedy_certificate",
    "verify_monotonicity",
    "verify_reduction",
]
