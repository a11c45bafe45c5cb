"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (the lines are
printed even without ``-s``).
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from conftest import chi2_two_sample_pvalue

from cardguess.cli import main as cli_main
from cardguess.cli import verify_range
from cardguess.deck import enumerate_decks, full_deck
from cardguess.mc import birthday_batch, coupon_brothers_batch, play_records, run_experiment, statistic_column
from cardguess.oracles import exact_birthday_expectation, gamma_eval, harmonic, pennies_value
from cardguess.pennies import (
    greedy_own_counts,
    neutralizer_table,
    neutralizer_violations,
    pennies_expected,
    pennies_play,
    uniform_pennies_strategy,
)
from cardguess.mc import Stream
from cardguess.solver import MAX, MIN, GameSolver, brute_force_one_shot, expected_score, optimal_max_value, \
    optimal_min_value
from cardguess.strategies import greedy_shuffler, guesser_max_multiplicity, make_strategy, point_mass

greedy = make_strategy("greedy")
gplus = make_strategy("gplus")
absent = make_strategy("absent")


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def test_criterion_01_greedy_optimal_and_unique(report):
    t0 = time.perf_counter()
    problems = verify_range(4, 3, reduction_trials=3)
    took = time.perf_counter() - t0
    ok = not problems and took < 60
    report(1, ok, f"verify n<=4, m<=3: {len(problems)} violations in {took:.1f}s")


def test_criterion_02_water_filling_vs_brute_force(report):
    t0 = time.perf_counter()
    solver = GameSolver()
    cache = {}
    checked = mismatches = 0
    for n in range(1, 5):
        for d in enumerate_decks(n, 6):
            if d.is_empty():
                continue
            for objective in (MIN, MAX):
                value, action = solver.optimal_min_value(d) if objective == MIN else solver.optimal_max_value(d)
                sub = solver.child_values(d, objective)
                types = sorted(sub)
                values = tuple(sub[j] for j in types)
                full = objective == MIN or len(types) == d.width
                for den in (12, 60):
                    key = (tuple(sorted(values)), objective, full, den)
                    if key not in cache:
                        cache[key] = brute_force_one_shot(values, objective, den, None if full else d.width)
                    grid = cache[key]
                    on_grid = all((Fraction(action.get(j, 0)) * den).denominator == 1 for j in types)
                    if on_grid:
                        good = grid == value
                    else:
                        good = grid >= value if objective == MIN else grid <= value
                    checked += 1
                    mismatches += not good
    took = time.perf_counter() - t0
    report(2, mismatches == 0 and took < 30,
           f"{checked} deck/objective/denominator checks, {mismatches} mismatches, {took:.1f}s")


def test_criterion_03_harmonic_identity(report):
    t0 = time.perf_counter()
    exact_ok = all(optimal_min_value(full_deck(n, 1))[0] == harmonic(n) for n in range(1, 26))
    stats = run_experiment(full_deck(25, 1), gplus, greedy, 100_000, 3)
    h = float(harmonic(25))
    mc_ok = abs(stats.mean - h) <= 3 * stats.standard_error
    took = time.perf_counter() - t0
    report(3, exact_ok and mc_ok and took < 60,
           f"exact H_n n=1..25: {exact_ok}; MC mean {stats.mean:.4f} vs H_25 {h:.4f} "
           f"(3SE {3 * stats.standard_error:.4f}), {took:.1f}s")


def test_criterion_04_birthday_identity(report):
    t0 = time.perf_counter()
    bad = [(n, m) for n in range(1, 6) for m in range(1, 4)
           if optimal_max_value(full_deck(n, m))[0] != exact_birthday_expectation(m, n) / n]
    took = time.perf_counter() - t0
    report(4, not bad and took < 60, f"F(full_deck(n,m)) = E[T]/n for n<=5, m<=3; failures {bad}, {took:.1f}s")


def test_criterion_05_uniform_neutralizer(report):
    t0 = time.perf_counter()
    violations = 0
    for seed in range(100):
        for seat in ("first", "second"):
            for width in range(1, 5):
                violations += neutralizer_violations(width, 8, seed, seat)
    # the scaled recursion must agree with the exact Fraction recursion on a sample of adversaries
    cross_bad = 0
    for seed in (0, 1):
        for seat in ("first", "second"):
            choices, values = neutralizer_table(3, 6, seed, seat)
            if seat == "first":
                A = lambda own, opp, c=choices: point_mass(c[own, opp])  # noqa: E731
                players = (A, uniform_pennies_strategy)
            else:
                B = lambda own, opp, c=choices: point_mass(c[opp, own])  # noqa: E731
                players = (uniform_pennies_strategy, B)
            for (a, b), v in values.items():
                if not a.is_empty() and (pennies_expected(a, b, *players) != v or v != pennies_value(a, b)):
                    cross_bad += 1
    configs = [
        ((2, 2, 2), (2, 2, 2), uniform_pennies_strategy, 2),
        ((2, 1), (1, 2), greedy_own_counts, Fraction(4, 3)),
        ((1, 1, 1), (1, 1, 1), uniform_pennies_strategy, 1),
    ]
    mc_notes = []
    mc_ok = True
    for k, (a, b, A, target) in enumerate(configs):
        stream = Stream(500 + k)
        x = np.fromiter((pennies_play(a, b, A, uniform_pennies_strategy, stream) for _ in range(100_000)),
                        dtype=np.int64)
        se = x.std(ddof=1) / math.sqrt(len(x))
        mc_ok &= abs(x.mean() - float(target)) <= 3 * se
        mc_notes.append(f"{a}v{b}: {x.mean():.4f} vs {float(target):.4f}")
    took = time.perf_counter() - t0
    ok = violations == 0 and cross_bad == 0 and mc_ok and took < 120
    report(5, ok, f"100 adversaries x 2 seats x widths 1..4, N<=8: {violations} violations; "
                  f"Fraction-DP cross-check mismatches {cross_bad}; MC {'; '.join(mc_notes)}; {took:.1f}s")


def test_criterion_06_coupling_laws(report):
    t0 = time.perf_counter()
    n, m, trials = 50, 2, 100_000
    rows = play_records(full_deck(n, m), gplus, greedy, trials, 61)
    u = coupon_brothers_batch(n, m, trials, 62)
    t = birthday_batch(n, m, trials, 63)
    p_v = chi2_two_sample_pvalue(list(rows[:, statistic_column("V2_1", m)]), list(u[:, 0]))
    p_t = chi2_two_sample_pvalue(list(rows[:, statistic_column("T", m)]), list(t))
    took = time.perf_counter() - t0
    ok = p_v > 1e-4 and p_t > 1e-4 and took < 120
    report(6, ok, f"n=50, m=2: V_2,1 vs U_1 p={p_v:.3g}; in-game T vs birthday T p={p_t:.3g}; {took:.1f}s")


def test_criterion_07_greedy_log_trend(report):
    t0 = time.perf_counter()
    ratios = []
    for n in (100, 1_000, 10_000):
        stats = run_experiment(full_deck(n, 2), gplus, greedy, 10_000, 7)
        ratios.append(stats.mean / math.log(n))
    took = time.perf_counter() - t0
    ok = ratios[0] > ratios[1] > ratios[2] and 1 < ratios[2] < 2 and took < 600
    report(7, ok, "mean/ln n at n=1e2,1e3,1e4: " + ", ".join(f"{r:.4f}" for r in ratios) + f"; {took:.1f}s")


def test_criterion_08_absent_guesser_scaling(report):
    t0 = time.perf_counter()
    n, m, trials = 10_000, 2, 100_000
    stats = run_experiment(full_deck(n, m), absent, greedy, trials, 8)
    scaled = stats.mean * math.sqrt(n)
    target = gamma_eval(1.5) * math.sqrt(2)
    t = birthday_batch(n, m, trials, 88) / n
    t_se = t.std(ddof=1) / math.sqrt(trials)
    combined = math.sqrt(stats.standard_error**2 + t_se**2)
    exact = float(exact_birthday_expectation(m, n)) / n
    cross_ok = abs(stats.mean - t.mean()) <= 4 * combined and abs(stats.mean - exact) <= 4 * stats.standard_error
    took = time.perf_counter() - t0
    ok = abs(scaled / target - 1) < 0.10 and cross_ok and took < 600
    report(8, ok, f"sqrt(n)*mean = {scaled:.4f} vs {target:.4f} ({100 * (scaled / target - 1):+.1f}%); "
                  f"mean {stats.mean:.5f}, simulated T/n {t.mean():.5f}, exact E[T]/n {exact:.5f}; {took:.1f}s")


def test_criterion_09_top_multiplicity_harmonic(report):
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 11):
        value = expected_score(full_deck(n, 2), guesser_max_multiplicity, greedy_shuffler,
                               weight=lambda d, i: int(d[i] == 2), symmetric=True)
        if value != harmonic(n):
            bad.append(n)
    stats = run_experiment(full_deck(50, 2), gplus, greedy, 100_000, 9, statistic="C2")
    h50 = float(harmonic(50))
    mc_ok = abs(stats.mean - h50) <= 3 * stats.standard_error
    took = time.perf_counter() - t0
    report(9, not bad and mc_ok, f"exact E[C_2] = H_n for n<=10 (failures {bad}); MC n=50 mean {stats.mean:.4f} "
                                 f"vs H_50 {h50:.4f} (3SE {3 * stats.standard_error:.4f}); {took:.1f}s")


def test_criterion_10_phase_minimizer_trend(report):
    t0 = time.perf_counter()
    means = []
    for n in (100, 1_000, 10_000):
        stats = run_experiment(full_deck(n, 2), make_strategy("gminus", m=2), greedy, 10_000, 10)
        means.append(stats.mean)
    took = time.perf_counter() - t0
    ok = means[0] > means[1] > means[2] and took < 600
    report(10, ok, "G- mean at n=1e2,1e3,1e4: " + ", ".join(f"{x:.4f}" for x in means) + f"; {took:.1f}s")


def test_criterion_11_manifest_determinism(report, tmp_path, capsys):
    runs = [
        ["asymptotics", "--n-list", "50,200", "--m", "2", "--trials", "3001", "--seed", "11"],
        ["simulate", "--deck", "3,2,2,1", "--guesser", "absent", "--shuffler", "uniform-shuffle",
         "--statistic", "C1", "--trials", "2000", "--seed", "12"],
        ["simulate", "--n", "40", "--m", "3", "--guesser", "gminus", "--trials", "1500", "--seed", "13"],
        ["pennies", "--a", "2,1,1", "--b", "1,1,2", "--first", "random", "--trials", "500", "--seed", "14"],
    ]
    outcomes = []
    for k, argv in enumerate(runs):
        out = tmp_path / f"run{k}.csv"
        extra = [] if argv[0] == "pennies" else ["--exact-reduce", "--threads", "1"]
        assert cli_main(argv + extra + ["--out", str(out)]) == 0
        manifest = tmp_path / f"run{k}.csv.manifest.json"
        recorded = json.loads(manifest.read_text())["outputs"]["sha256"]
        for threads in ("1", "2", "8"):
            rerun = tmp_path / f"run{k}.t{threads}.csv"
            code = cli_main(["report", "--manifest", str(manifest), "--threads", threads, "--out", str(rerun)])
            outcomes.append(code == 0 and rerun.read_bytes() == out.read_bytes())
        assert recorded
    capsys.readouterr()
    report(11, all(outcomes), f"{sum(outcomes)}/{len(outcomes)} manifest re-runs bit-identical (threads 1, 2, 8)")
