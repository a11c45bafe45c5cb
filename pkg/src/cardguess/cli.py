"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 budget
exceeded. Every CSV-producing command also writes a JSON manifest
(``<out>.manifest.json``) that ``report`` can re-run and compare.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

from . import __version__, oracles
from ._backend import BACKEND
from .deck import DeckError, DeckState, full_deck
from .mc import Stream, run_experiment
from .pennies import (
    greedy_own_counts,
    lowest_index_strategy,
    pennies_play,
    random_deterministic_strategy,
    uniform_pennies_strategy,
)
from .solver import (
    MAX,
    MIN,
    BudgetExceeded,
    GameSolver,
    canonical_decks,
    value_vs_shuffler_max,
    value_vs_shuffler_min,
    verify_greedy_certificate,
    verify_monotonicity,
    verify_reduction,
)
from .strategies import GUESSER_NAMES, SHUFFLER_NAMES, STRATEGY_NAMES, greedy_shuffler, make_strategy
from .mc import summarize

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_BUDGET = 0, 1, 2, 3

CSV_COLUMNS = ["n", "m", "guesser", "shuffler", "statistic", "trials", "mean", "variance", "ci95", "master_seed"]
PENNIES_STRATEGIES = ("uniform", "greedy-own", "lowest", "random")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_deck(text: str) -> DeckState:
    try:
        d = DeckState.parse(text)
    except DeckError as exc:
        raise UsageError(str(exc)) from None
    if d.width == 0:
        raise UsageError("deck must have at least one card type")
    return d


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(float(tok)) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def _strategy_pair(guesser: str, shuffler: str, m: int):
    if shuffler not in SHUFFLER_NAMES:
        raise UsageError(f"unknown shuffler {shuffler!r}; valid shufflers: {', '.join(SHUFFLER_NAMES)}")
    if guesser not in GUESSER_NAMES:
        raise UsageError(f"unknown guesser {guesser!r}; valid guessers: {', '.join(GUESSER_NAMES)}")
    s = make_strategy(shuffler)
    g = make_strategy(guesser, m=m, shuffler=s)
    return g, s


def _csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def _emit(rows: list[dict], columns: list[str], args, command: str, params: dict) -> None:
    text = _csv_text(rows, columns)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        manifest = {
            "command": command,
            "params": params,
            "master_seed": params.get("seed"),
            "version": __version__,
            "backend": BACKEND,
            "outputs": {"csv": str(out), "sha256": hashlib.sha256(text.encode()).hexdigest()},
        }
        Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    sys.stdout.write(text)


# ---------------------------------------------------------------------------
# solve / verify


def cmd_solve(args) -> int:
    d = _parse_deck(args.deck)
    solver = GameSolver(max_states=args.budget)
    cert = verify_greedy_certificate(d, args.objective, solver=solver)
    print(f"deck {d} objective {args.objective}")
    print(f"value {cert.value} ({float(cert.value):.12g})")
    print("optimizer " + ", ".join(f"{i}:{p}" for i, p in sorted(cert.optimizer.items())))
    print(f"greedy attains {cert.greedy_attains}; unique {cert.unique}; "
          f"{len(cert.witnesses)} witnesses, {len(cert.violations)} violated")
    if args.certificate:
        Path(args.certificate).write_text(cert.to_json(indent=2) + "\n")
    return EXIT_OK


def verify_range(max_n: int, max_m: int, reduction_trials: int = 3, budget: int | None = None,
                 seed: int = 0) -> list[str]:
    """Run every exact check on canonical decks within bounds; returns violation messages."""
    decks = list(canonical_decks(max_n, max_m))
    if budget is not None and len(decks) > budget:
        raise BudgetExceeded(f"{len(decks)} decks exceed the budget of {budget}")
    solver = GameSolver()
    problems = []
    for d in decks:
        if d.is_empty():
            continue
        cert = verify_greedy_certificate(d, MIN, solver=solver)
        if not cert.unique:
            problems.append(f"{d}: greedy not the unique minimizer ({len(cert.violations)} violated witnesses)")
        if value_vs_shuffler_max(d, greedy_shuffler) != cert.value:
            problems.append(f"{d}: f(d, greedy) != f(d)")
        if all(c > 0 for c in d.counts):
            cert = verify_greedy_certificate(d, MAX, solver=solver)
            if not cert.unique:
                problems.append(f"{d}: greedy not the unique maximizer ({len(cert.violations)} violated witnesses)")
            if value_vs_shuffler_min(d, greedy_shuffler) != cert.value:
                problems.append(f"{d}: F(d, greedy) != F(d)")
        if not verify_monotonicity(d, solver=solver):
            problems.append(f"{d}: monotonicity fails")
        if reduction_trials and not verify_reduction(d, reduction_trials, seed=seed):
            problems.append(f"{d}: some in-deck or absent-type guesser does not tie")
    return problems


def cmd_verify(args) -> int:
    problems = verify_range(args.max_n, args.max_m, args.reduction_trials, args.budget, args.seed)
    count = sum(1 for d in canonical_decks(args.max_n, args.max_m) if not d.is_empty())
    for p in problems:
        print("VIOLATION " + p)
    print(f"checked {count} canonical decks (n <= {args.max_n}, m <= {args.max_m}): "
          f"{'all certificates unique' if not problems else f'{len(problems)} violations'}")
    return EXIT_VERIFY if problems else EXIT_OK


# ---------------------------------------------------------------------------
# simulate / asymptotics


def _decks_from_args(args) -> list[DeckState]:
    if args.deck:
        return [_parse_deck(args.deck)]
    if args.m is None:
        raise UsageError("give --deck, or --m with --n / --n-list")
    ns = _parse_int_list(args.n_list) if args.n_list else ([args.n] if args.n else [])
    if not ns:
        raise UsageError("give --n or --n-list")
    try:
        return [full_deck(n, args.m) for n in ns]
    except DeckError as exc:
        raise UsageError(str(exc)) from None


def _oracle_for(guesser: str, shuffler: str, m: int, n: int) -> tuple[str, float]:
    in_deck = guesser in ("gplus", "best-response")
    if shuffler == "greedy":
        if in_deck:
            return "greedy_max_asymptotic", oracles.greedy_max_asymptotic(n) if n >= 2 else math.nan
        return "greedy_min_asymptotic", oracles.greedy_min_asymptotic(m, n)
    if in_deck:
        return "uniform_max_asymptotic", oracles.uniform_max_asymptotic(m, n) if n >= 2 else math.nan
    return "uniform_min_asymptotic", oracles.uniform_min_asymptotic(m, n)


def simulate_rows(decks, guesser: str, shuffler: str, trials: int, seed: int, statistic: str = "score",
                  threads: int | None = None, exact_reduce: bool = True, oracle_columns: bool = False) -> list[dict]:
    rows = []
    for d in decks:
        m = max(d.counts)
        g, s = _strategy_pair(guesser, shuffler, m)
        stats = run_experiment(d, g, s, trials, seed, statistic, threads=threads, exact_reduce=exact_reduce)
        row = {
            "n": d.width, "m": m, "guesser": guesser, "shuffler": shuffler, "statistic": statistic,
            "trials": trials, "mean": stats.mean, "variance": stats.sample_variance,
            "ci95": stats.ci95_halfwidth, "master_seed": seed,
        }
        if oracle_columns:
            name, value = _oracle_for(guesser, shuffler, m, d.width)
            ln_n = math.log(d.width)
            row.update({
                "ln_n": ln_n,
                "ratio_ln_n": stats.mean / ln_n if ln_n > 0 else math.nan,
                "oracle": name,
                "oracle_value": value,
                "ratio_oracle": stats.mean / value if value else math.nan,
            })
        rows.append(row)
    return rows


ORACLE_COLUMNS = ["ln_n", "ratio_ln_n", "oracle", "oracle_value", "ratio_oracle"]


def _sim_params(args) -> dict:
    return {
        "deck": args.deck, "n": args.n, "n_list": args.n_list, "m": args.m,
        "guesser": args.guesser, "shuffler": args.shuffler, "trials": args.trials,
        "seed": args.seed, "statistic": args.statistic, "exact_reduce": args.exact_reduce,
    }


def cmd_simulate(args) -> int:
    rows = simulate_rows(_decks_from_args(args), args.guesser, args.shuffler, args.trials, args.seed,
                         args.statistic, args.threads, args.exact_reduce, oracle_columns=True)
    _emit(rows, CSV_COLUMNS + ORACLE_COLUMNS, args, "simulate", _sim_params(args))
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    if not args.n_list and not args.n:
        raise UsageError("asymptotics needs --n-list (or --n)")
    rows = simulate_rows(_decks_from_args(args), args.guesser, args.shuffler, args.trials, args.seed,
                         args.statistic, args.threads, args.exact_reduce, oracle_columns=True)
    _emit(rows, CSV_COLUMNS + ORACLE_COLUMNS, args, "asymptotics", _sim_params(args))
    return EXIT_OK


# ---------------------------------------------------------------------------
# pennies


def _pennies_strategy(name: str, seed: int):
    if name == "uniform":
        return uniform_pennies_strategy
    if name == "greedy-own":
        return greedy_own_counts
    if name == "lowest":
        return lowest_index_strategy
    if name == "random":
        return random_deterministic_strategy(seed)
    raise UsageError(f"unknown pennies strategy {name!r}; valid: {', '.join(PENNIES_STRATEGIES)}")


def pennies_rows(a: DeckState, b: DeckState, first: str, second: str, trials: int, seed: int) -> list[dict]:
    if a.width != b.width or a.total() != b.total() or a.total() == 0:
        raise UsageError(f"decks {a} and {b} need equal widths and equal positive totals")
    A = _pennies_strategy(first, seed)
    B = _pennies_strategy(second, seed + 1)
    values = [pennies_play(a, b, A, B, Stream.for_replica(seed, r)) for r in range(trials)]
    stats = summarize(values, seed)
    return [{
        "n": a.width, "m": max(a.counts), "guesser": first, "shuffler": second, "statistic": "matches",
        "trials": trials, "mean": stats.mean, "variance": stats.sample_variance, "ci95": stats.ci95_halfwidth,
        "master_seed": seed, "a": str(a), "b": str(b), "exact_vs_uniform": float(oracles.pennies_value(a, b)),
    }]


def cmd_pennies(args) -> int:
    a, b = _parse_deck(args.a), _parse_deck(args.b)
    rows = pennies_rows(a, b, args.first, args.second, args.trials, args.seed)
    params = {"a": args.a, "b": args.b, "first": args.first, "second": args.second,
              "trials": args.trials, "seed": args.seed}
    _emit(rows, CSV_COLUMNS + ["a", "b", "exact_vs_uniform"], args, "pennies", params)
    return EXIT_OK


# ---------------------------------------------------------------------------
# report: re-run a manifest


def rerun_manifest(manifest: dict, threads: int | None = None) -> str:
    """Re-execute a manifest and return the CSV text it produces."""
    p = manifest["params"]
    cmd = manifest["command"]
    if cmd in ("simulate", "asymptotics"):
        ns = argparse.Namespace(deck=p["deck"], n=p["n"], n_list=p["n_list"], m=p["m"])
        rows = simulate_rows(_decks_from_args(ns), p["guesser"], p["shuffler"], p["trials"], p["seed"],
                             p["statistic"], threads, p["exact_reduce"], oracle_columns=True)
        return _csv_text(rows, CSV_COLUMNS + ORACLE_COLUMNS)
    if cmd == "pennies":
        rows = pennies_rows(_parse_deck(p["a"]), _parse_deck(p["b"]), p["first"], p["second"],
                            p["trials"], p["seed"])
        return _csv_text(rows, CSV_COLUMNS + ["a", "b", "exact_vs_uniform"])
    raise UsageError(f"manifest command {cmd!r} cannot be re-run")


def cmd_report(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    text = rerun_manifest(manifest, args.threads)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    digest = hashlib.sha256(text.encode()).hexdigest()
    recorded = manifest["outputs"]["sha256"]
    same = digest == recorded
    print(f"# rerun of {manifest['command']} (seed {manifest['master_seed']}): "
          f"{'identical to' if same else 'DIFFERS from'} recorded output {manifest['outputs']['csv']}")
    return EXIT_OK if same else EXIT_VERIFY


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cardguess", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="exact game value and greedy certificate for one deck")
    p.add_argument("--deck", required=True, help='counts, e.g. "2,1"')
    p.add_argument("--objective", choices=(MIN, MAX), default=MIN)
    p.add_argument("--certificate", help="write the certificate JSON here")
    p.add_argument("--budget", type=int, default=None, help="max memoized states")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="exhaustive exact checks of greedy optimality")
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--max-m", type=int, required=True)
    p.add_argument("--reduction-trials", type=int, default=3)
    p.add_argument("--budget", type=int, default=None, help="max number of canonical decks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    def sim_flags(p, default_trials):
        p.add_argument("--deck")
        p.add_argument("--n", type=int)
        p.add_argument("--n-list")
        p.add_argument("--m", type=int)
        p.add_argument("--guesser", default="gplus", help=f"one of {', '.join(GUESSER_NAMES)}")
        p.add_argument("--shuffler", default="greedy", help=f"one of {', '.join(SHUFFLER_NAMES)}")
        p.add_argument("--statistic", default="score", help="score, T, C<k>, t<k> or V<k>_<l>")
        p.add_argument("--trials", type=int, default=default_trials)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--exact-reduce", action="store_true")
        p.add_argument("--out")

    p = sub.add_parser("simulate", help="Monte Carlo play of one configuration or n sweep")
    sim_flags(p, 10_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("asymptotics", help="n sweep with asymptotic oracle columns")
    sim_flags(p, 10_000)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("pennies", help="Monte Carlo Restricted Matching Pennies")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--first", default="uniform", help=f"one of {', '.join(PENNIES_STRATEGIES)}")
    p.add_argument("--second", default="uniform", help=f"one of {', '.join(PENNIES_STRATEGIES)}")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pennies)

    p = sub.add_parser("report", help="re-run a manifest and compare with its recorded CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) is not None and getattr(args, "trials", 1) < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DeckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
