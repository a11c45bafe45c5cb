import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from cardguess.deck import DeckState, canonical_key, enumerate_decks, full_deck
from cardguess.oracles import exact_birthday_expectation, harmonic
from cardguess.solver import (
    MAX,
    MIN,
    BudgetExceeded,
    GameSolver,
    ValueCertificate,
    brute_force_one_shot,
    canonical_decks,
    expected_score,
    optimal_max_value,
    optimal_min_value,
    value_vs_shuffler_max,
    value_vs_shuffler_min,
    verify_greedy_certificate,
    verify_monotonicity,
    verify_reduction,
    water_fill,
)
from cardguess.strategies import (
    StrategyError,
    greedy_shuffler,
    guesser_absent_type,
    guesser_max_multiplicity,
    point_mass,
    uniform_shuffle_shuffler,
)


# --- independent oracles --------------------------------------------------


def greedy_score_by_orderings(d):
    """Sum over every distinct card ordering of P(ordering under greedy) * sum_t 1/s_t.

    Against greedy the best guess at each round hits with probability 1/s,
    s = number of types present, so f(d, greedy) is this expectation.
    """
    cards = [i for i, c in enumerate(d) for _ in range(c)]
    total = Fraction(0)
    for order in set(itertools.permutations(cards)):
        counts = list(d)
        prob = Fraction(1)
        gain = Fraction(0)
        for card in order:
            s = sum(1 for c in counts if c > 0)
            prob /= s
            gain += Fraction(1, s)
            counts[card] -= 1
        total += prob * gain
    return total


def lp_game_values(d):
    """f(d) and F(d) in floating point, each one-shot problem solved by an LP."""
    f_memo, F_memo = {}, {}

    def f(x):
        if sum(x) == 0:
            return 0.0
        if x in f_memo:
            return f_memo[x]
        sup = [j for j, c in enumerate(x) if c]
        v = [f(x[:j] + (x[j] - 1,) + x[j + 1:]) for j in sup]
        s = len(sup)
        # variables p_1..p_s, t ; minimize t + sum p v ; p_j <= t ; sum p = 1
        c = np.array(v + [1.0])
        A_ub = np.hstack([np.eye(s), -np.ones((s, 1))])
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(s), A_eq=[[1.0] * s + [0.0]], b_eq=[1.0],
                      bounds=[(0, None)] * (s + 1), method="highs")
        f_memo[x] = res.fun
        return res.fun

    def F(x):
        if sum(x) == 0 or min(x) == 0:
            return 0.0
        if x in F_memo:
            return F_memo[x]
        n = len(x)
        v = [F(x[:j] + (x[j] - 1,) + x[j + 1:]) for j in range(n)]
        # maximize t + sum p v ; t <= p_j
        c = -np.array(v + [1.0])
        A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=[[1.0] * n + [0.0]], b_eq=[1.0],
                      bounds=[(0, None)] * (n + 1), method="highs")
        F_memo[x] = -res.fun
        return -res.fun

    return f(tuple(d)), F(tuple(d))


# --- examples -------------------------------------------------------------


def test_value_vs_shuffler_max_examples():
    assert value_vs_shuffler_max((0, 0, 0), greedy_shuffler) == 0
    assert value_vs_shuffler_max((1, 1), greedy_shuffler) == Fraction(3, 2)
    assert value_vs_shuffler_max((2, 1), greedy_shuffler) == Fraction(9, 4)


def test_value_vs_shuffler_max_matches_ordering_enumeration():
    for d in [(1, 1), (2, 1), (2, 2), (3, 1, 1), (2, 2, 1)]:
        assert value_vs_shuffler_max(d, greedy_shuffler) == greedy_score_by_orderings(d)


def test_value_vs_shuffler_min_examples():
    assert value_vs_shuffler_min((1, 0), greedy_shuffler) == 0
    assert value_vs_shuffler_min((1, 0), uniform_shuffle_shuffler) == 0
    assert value_vs_shuffler_min((1, 1), greedy_shuffler) == Fraction(1, 2)
    assert value_vs_shuffler_min((2, 2), greedy_shuffler) == Fraction(5, 4)
    assert value_vs_shuffler_min((2, 1), greedy_shuffler) == Fraction(3, 4)


def test_policy_outside_support_rejected():
    bad = lambda d: point_mass(d.width - 1)  # noqa: E731
    with pytest.raises(StrategyError):
        value_vs_shuffler_max((1, 0), bad)
    with pytest.raises(StrategyError):
        value_vs_shuffler_min((1, 0), bad)


def test_optimal_min_value_examples():
    assert optimal_min_value((1,)) == (1, {0: 1})
    value, action = optimal_min_value((1, 1))
    assert value == Fraction(3, 2) and action == {0: Fraction(1, 2), 1: Fraction(1, 2)}
    value, action = optimal_min_value((2, 1))
    assert value == Fraction(9, 4) and action == {0: Fraction(1, 2), 1: Fraction(1, 2)}
    assert optimal_min_value((1, 1, 1))[0] == Fraction(11, 6) == harmonic(3)


def test_optimal_max_value_examples():
    assert optimal_max_value((2, 0))[0] == 0
    value, action = optimal_max_value((1, 1))
    assert value == Fraction(1, 2) and action == {0: Fraction(1, 2), 1: Fraction(1, 2)}
    value, action = optimal_max_value((2, 2))
    assert value == Fraction(5, 4) and action == {0: Fraction(1, 2), 1: Fraction(1, 2)}


def test_water_fill_picks_largest_k_on_ties():
    # (1 + 0)/1 = 1 and (1 + 0 + 1)/2 = 1: prefer k = 2
    assert water_fill([Fraction(0), Fraction(1)]) == (Fraction(1), 2)
    assert water_fill([]) == (0, 0)


def test_brute_force_examples():
    assert brute_force_one_shot([1, 1], MIN, 2) == Fraction(3, 2)
    assert brute_force_one_shot([Fraction(3, 2), 2], MIN, 2) == Fraction(9, 4)
    assert brute_force_one_shot([0], MAX, 1) == 1


def test_solver_matches_lp_oracle():
    for n in range(1, 4):
        for d in enumerate_decks(n, 5):
            f_lp, F_lp = lp_game_values(d.counts)
            assert float(optimal_min_value(d)[0]) == pytest.approx(f_lp, abs=1e-9)
            assert float(optimal_max_value(d)[0]) == pytest.approx(F_lp, abs=1e-9)


def test_bellman_consistency_against_grid():
    solver = GameSolver()
    for n in range(1, 4):
        for d in enumerate_decks(n, 6):
            if d.is_empty():
                continue
            v = solver.child_values(d, MIN)
            sub = [v[j] for j in sorted(v)]
            exact = solver.optimal_min_value(d)[0]
            for den in (12, 60):
                grid = brute_force_one_shot(sub, MIN, den)
                assert grid >= exact
                assert grid == exact  # optimizer 1/k with k <= 3 is a grid point


# --- certificates ---------------------------------------------------------


def test_certificate_example_21():
    cert = verify_greedy_certificate((2, 1), MIN)
    assert cert.unique and cert.greedy_attains
    assert cert.value == Fraction(9, 4)
    by_key = {(w.J, w.i): w for w in cert.witnesses}
    w = by_key[(1,), 0]  # 1 * f((1,1)) < 1 + f((2,0))
    assert (w.lhs, w.rhs) == (Fraction(3, 2), Fraction(3))
    w = by_key[(0,), 1]  # 1 * f((2,0)) < 1 + f((1,1))
    assert (w.lhs, w.rhs) == (Fraction(2), Fraction(5, 2))
    assert all(w.holds for w in cert.witnesses)


def test_certificate_examples_small():
    cert = verify_greedy_certificate((1, 1), MAX)
    assert cert.unique and cert.value == Fraction(1, 2)
    assert cert.optimizer == {0: Fraction(1, 2), 1: Fraction(1, 2)}
    cert = verify_greedy_certificate((1,), MIN)
    assert cert.unique and cert.value == 1


def test_certificate_max_not_fully_supported():
    cert = verify_greedy_certificate((2, 0), MAX)
    assert cert.value == 0 and not cert.unique and cert.witnesses == []


def test_printed_reverse_orientation_fails_where_correct_one_holds():
    # |J| F(d - e_i) > 1 + sum_J F(d - e_j) already fails at d = (1, 1): 0 > 1.
    cert = verify_greedy_certificate((1, 1), MAX)
    assert all(w.holds for w in cert.witnesses)
    assert not any(w.lhs > w.rhs for w in cert.witnesses)


def test_certificate_json_round_trip():
    cert = verify_greedy_certificate((3, 2, 1), MIN)
    doc = cert.to_dict()
    assert doc["value"] == f"{cert.value.numerator}/{cert.value.denominator}"
    assert set(doc) >= {"deck", "objective", "value", "optimizer", "unique", "witnesses"}
    again = ValueCertificate.from_json(cert.to_json())
    assert again.value == cert.value and again.optimizer == cert.optimizer
    assert [(w.J, w.i, w.lhs, w.rhs) for w in again.witnesses] == [(w.J, w.i, w.lhs, w.rhs) for w in cert.witnesses]


def test_certificate_value_equals_reevaluation():
    from cardguess.solver import default_solver, one_shot_objective

    solver = default_solver()
    for d in canonical_decks(3, 3):
        if d.is_empty():
            continue
        for objective in (MIN, MAX):
            cert = verify_greedy_certificate(d, objective)
            if not cert.witnesses:
                continue
            sub = solver.child_values(d, objective)
            assert one_shot_objective(cert.optimizer, sub, objective, d.width) == cert.value


def test_extremal_witnesses_for_wide_decks():
    cert = verify_greedy_certificate(full_deck(12, 1), MIN)
    assert cert.unique and len(cert.witnesses) == 12


# --- properties -----------------------------------------------------------


def test_monotonicity_examples():
    assert verify_monotonicity((2, 1))
    assert verify_monotonicity((1, 1))
    assert verify_monotonicity((3, 1))
    assert optimal_min_value((2, 1))[0] <= optimal_min_value((3, 0))[0] == 3


def test_monotonicity_and_strict_witnesses_up_to_total_8():
    solver = GameSolver()
    for n in range(1, 5):
        for d in enumerate_decks(n, 8):
            if d.is_empty():
                continue
            assert verify_monotonicity(d, solver)
            assert verify_greedy_certificate(d, MIN, solver).unique
            if min(d.counts) > 0:
                assert verify_greedy_certificate(d, MAX, solver).unique


def test_greedy_attains_both_values():
    for d in canonical_decks(4, 3):
        if d.is_empty():
            continue
        assert value_vs_shuffler_max(d, greedy_shuffler) == optimal_min_value(d)[0]
        if min(d.counts) > 0:
            assert value_vs_shuffler_min(d, greedy_shuffler) == optimal_max_value(d)[0]


def test_harmonic_identity():
    for n in range(1, 26):
        assert optimal_min_value(full_deck(n, 1))[0] == harmonic(n)


def test_birthday_identity():
    for n in range(1, 6):
        for m in range(1, 4):
            assert optimal_max_value(full_deck(n, m))[0] == exact_birthday_expectation(m, n) / n


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=4), st.randoms())
def test_values_depend_only_on_canonical_key(counts, rnd):
    d = DeckState(tuple(counts))
    perm = list(range(d.width))
    rnd.shuffle(perm)
    e = d.permute(perm)
    assert canonical_key(d) == canonical_key(e)
    assert optimal_min_value(d)[0] == optimal_min_value(e)[0]
    assert optimal_max_value(d)[0] == optimal_max_value(e)[0]
    assert value_vs_shuffler_max(d, greedy_shuffler) == value_vs_shuffler_max(e, greedy_shuffler)


def test_reduction_examples():
    assert verify_reduction((1, 1, 1), trials=5)
    assert verify_reduction((2, 2), trials=5)
    assert verify_reduction((1,), trials=2)
    rng = random.Random(3)
    from cardguess.solver import random_absent_guesser, random_in_deck_guesser

    for _ in range(5):
        assert expected_score((1, 1, 1), random_in_deck_guesser(rng), greedy_shuffler) == Fraction(11, 6)
        assert expected_score((2, 2), random_absent_guesser(rng), greedy_shuffler) == Fraction(5, 4)


def test_reduction_detects_out_of_deck_guessing():
    # a guesser that guesses an absent type is not in-deck and scores less than f(d, greedy)
    d = DeckState((2, 1))
    score = expected_score(d, guesser_absent_type, greedy_shuffler)
    assert score < value_vs_shuffler_max(d, greedy_shuffler)


def test_in_deck_guesser_ties_with_optimum():
    for n in range(1, 5):
        for d in enumerate_decks(n, 8):
            if d.is_empty():
                continue
            assert expected_score(d, guesser_max_multiplicity, greedy_shuffler, symmetric=True) == \
                optimal_min_value(d)[0]


def test_symmetric_flag_agrees_with_raw_recursion():
    d = DeckState((3, 1, 2))
    raw = expected_score(d, guesser_max_multiplicity, greedy_shuffler, weight=lambda x, i: x[i] == 2)
    sym = expected_score(d, guesser_max_multiplicity, greedy_shuffler, weight=lambda x, i: x[i] == 2,
                         symmetric=True)
    assert raw == sym


def test_budget():
    solver = GameSolver(max_states=5)
    with pytest.raises(BudgetExceeded):
        solver.f(full_deck(4, 3))
