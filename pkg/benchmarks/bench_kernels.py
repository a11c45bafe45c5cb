"""Compare the compiled game kernels with the pure-Python mirror.

    python3 benchmarks/bench_kernels.py [--trials N]

Both backends are fed the same replicas; the script checks the outputs are
identical and reports time per game and per round.
"""

import argparse
import time

import numpy as np

from cardguess import _backend
from cardguess import _kernels_py as python_kernels
from cardguess.mc import record_width
from cardguess.strategies import make_strategy, phase_thresholds

CASES = [
    ("gplus vs greedy", "gplus", "greedy", 200, 2),
    ("absent vs greedy", "absent", "greedy", 200, 2),
    ("gminus vs greedy", "gminus", "greedy", 200, 2),
    ("gplus vs uniform-shuffle", "gplus", "uniform-shuffle", 100, 3),
]


def run_games(mod, guesser, shuffler, n, m, trials):
    g, s = make_strategy(guesser, m=m), make_strategy(shuffler)
    thr = phase_thresholds(n, m) if guesser == "gminus" else [0] * (m + 1)
    out = np.zeros((trials, record_width(m)), dtype=np.int64)
    t0 = time.perf_counter()
    mod.play_batch(np.full(n, m, dtype=np.int64), g.kernel_code, s.kernel_code,
                   np.asarray(thr, dtype=np.int64), 1, 0, out)
    return time.perf_counter() - t0, out


def run_birthday(mod, n, m, trials):
    out = np.zeros(trials, dtype=np.int64)
    t0 = time.perf_counter()
    mod.birthday_batch(n, m, 1, 0, out)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--trials", type=int, default=200)
    args = ap.parse_args()
    compiled = _backend.compiled_kernels
    if compiled is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace` first")
        return 1
    print(f"{'case':<34}{'python s':>10}{'compiled s':>12}{'speedup':>9}{'ns/round':>10}  identical")
    for label, g, s, n, m in CASES:
        tp, a = run_games(python_kernels, g, s, n, m, args.trials)
        tc, b = run_games(compiled, g, s, n, m, args.trials)
        rounds = args.trials * n * m
        print(f"{label + f' n={n} m={m}':<34}{tp:>10.3f}{tc:>12.4f}{tp / tc:>9.0f}"
              f"{1e9 * tc / rounds:>10.1f}  {np.array_equal(a, b)}")
    tp, a = run_birthday(python_kernels, 365, 2, 20 * args.trials)
    tc, b = run_birthday(compiled, 365, 2, 20 * args.trials)
    print(f"{'birthday n=365 m=2':<34}{tp:>10.3f}{tc:>12.4f}{tp / tc:>9.0f}{'':>10}  {np.array_equal(a, b)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
