"""Seeded Monte Carlo play of the Guesser-Shuffler game and its coupled processes.

Every replica ``r`` of an experiment draws from its own stream seeded with
``derive_seed(master_seed, r)``, so results do not depend on how replicas are
spread over threads. Strategies the kernels understand run in compiled code
(or its pure-Python mirror); any other policy runs through :func:`play_generic`,
which samples the exact mixed actions.
"""

from __future__ import annotations

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from . import _kernels_py
from ._backend import kernels
from .deck import DeckError, DeckState, as_deck
from .strategies import (
    GUESSER_GMINUS,
    MixedAction,
    NamedStrategy,
    StrategyError,
    check_action,
    phase_thresholds,
)

THREADS_ENV = "CARDGUESS_THREADS"


def mix64(z: int) -> int:
    return _kernels_py.mix64(z)


def derive_seed(master: int, replica: int) -> int:
    """``mix64(master ^ (replica * 0x9E3779B97F4A7C15 mod 2**64))`` with the SplitMix64 finalizer.

    The finalizer is a bijection and ``replica -> replica * odd`` is injective
    mod 2**64, so distinct replicas of one master never share a seed.
    """
    return _kernels_py.derive_seed(master, replica)


class Stream:
    """xoshiro256** generator; the same stream the kernels use."""

    def __init__(self, seed: int = 0) -> None:
        self.state = _kernels_py.seed_state(seed)

    @classmethod
    def for_replica(cls, master: int, replica: int) -> "Stream":
        return cls(derive_seed(master, replica))

    @classmethod
    def from_state(cls, state) -> "Stream":
        s = cls.__new__(cls)
        s.state = [int(x) for x in state]
        return s

    def next64(self) -> int:
        return _kernels_py.next64(self.state)

    def below(self, k: int) -> int:
        """Uniform integer in [0, k)."""
        if k < 1:
            raise ValueError("below() needs k >= 1")
        if k <= 1 << 63:
            return _kernels_py.below(self.state, k)
        bits = k.bit_length()
        while True:
            x = 0
            for _ in range((bits + 63) // 64):
                x = (x << 64) | self.next64()
            x >>= (-bits) % 64
            if x < k:
                return x

    def random(self) -> float:
        return (self.next64() >> 11) * 2.0**-53

    def sample(self, action: MixedAction) -> int:
        """Draw a type from an exact mixed action (exactly, via a common denominator)."""
        items = [(i, Fraction(p)) for i, p in sorted(action.items()) if p]
        den = lcm(*(p.denominator for _, p in items))
        u = self.below(den)
        acc = 0
        for i, p in items:
            acc += p.numerator * (den // p.denominator)
            if u < acc:
                return i
        raise StrategyError(f"mixed action does not sum to 1: {action}")


# ---------------------------------------------------------------------------
# Game records


def record_width(m: int) -> int:
    return 2 + m + (m + 1) + (m + 1) * m


@dataclass
class GameRecord:
    """Outcome of one play.

    ``per_multiplicity_correct[k]`` counts correct guesses on cards whose
    type had k copies before the draw; ``t_indices[k]`` is the first round
    (1-based, ``total + 1`` meaning after the last draw) at which every type
    has fewer than k copies; ``v_table[k, l]`` is the number of types with at
    least l copies at round ``t_indices[k]``; ``birthday_T`` is the round of
    the first draw that exhausts a type which started at the top multiplicity.
    """

    score: int
    per_multiplicity_correct: dict[int, int]
    v_table: dict[tuple[int, int], int]
    t_indices: dict[int, int]
    birthday_T: int
    m: int = 0

    @classmethod
    def from_row(cls, row, m: int) -> "GameRecord":
        row = [int(x) for x in row]
        C = {k: row[1 + k] for k in range(1, m + 1)}
        t = {k: row[1 + m + k] for k in range(1, m + 2)}
        base = 2 + m + (m + 1)
        V = {(k, l): row[base + (k - 1) * m + (l - 1)] for k in range(1, m + 2) for l in range(1, m + 1)}
        return cls(row[0], C, V, t, row[1], m)

    def to_row(self) -> list[int]:
        m = self.m
        row = [self.score, self.birthday_T]
        row += [self.per_multiplicity_correct[k] for k in range(1, m + 1)]
        row += [self.t_indices[k] for k in range(1, m + 2)]
        row += [self.v_table[k, l] for k in range(1, m + 2) for l in range(1, m + 1)]
        return row


_STAT_RE = re.compile(r"^(?:(score)|(T)|C(\d+)|t(\d+)|V(\d+)[_,](\d+))$")


def statistic_column(statistic: str, m: int) -> int:
    """Column of a record row for ``score``, ``T``, ``C<k>``, ``t<k>`` or ``V<k>_<l>``."""
    match = _STAT_RE.match(statistic.strip())
    if not match:
        raise ValueError(f"unknown statistic {statistic!r}; use score, T, C<k>, t<k> or V<k>_<l>")
    score, T, ck, tk, vk, vl = match.groups()
    if score:
        return 0
    if T:
        return 1
    if ck:
        k = int(ck)
        if not 1 <= k <= m:
            raise ValueError(f"C_k needs 1 <= k <= {m}")
        return 1 + k
    if tk:
        k = int(tk)
        if not 1 <= k <= m + 1:
            raise ValueError(f"t_k needs 1 <= k <= {m + 1}")
        return 1 + m + k
    k, l = int(vk), int(vl)
    if not (1 <= k <= m + 1 and 1 <= l <= m):
        raise ValueError(f"V_k,l needs 1 <= k <= {m + 1}, 1 <= l <= {m}")
    return 2 + m + (m + 1) + (k - 1) * m + (l - 1)


def _kernel_ready(d0: DeckState, guesser: NamedStrategy, shuffler: NamedStrategy) -> bool:
    if guesser.kernel_code is None or shuffler.kernel_code is None:
        return False
    if guesser.side != "guesser" or shuffler.side != "shuffler":
        return False
    if guesser.kernel_code == GUESSER_GMINUS and guesser.multiplicity != max(d0.counts, default=0):
        return False
    return True


def _thresholds(d0: DeckState, guesser: NamedStrategy) -> np.ndarray:
    m = max(d0.counts, default=0)
    if guesser.kernel_code == GUESSER_GMINUS:
        thr = phase_thresholds(d0.width, m)
    else:
        thr = [0] * (m + 1)
    return np.asarray(thr, dtype=np.int64)


def play_generic(d0, guesser, shuffler, stream: Stream) -> GameRecord:
    """Play one game from arbitrary Markov policies, sampling exact mixed actions.

    Each round the guess is drawn first, then the card, from independent
    draws of ``stream``.
    """
    d0 = as_deck(d0)
    n, m, total = d0.width, max(d0.counts, default=0), d0.total()
    cnt = list(d0.counts)
    C = {k: 0 for k in range(1, m + 1)}
    t: dict[int, int] = {}
    V: dict[tuple[int, int], int] = {}
    T = total + 1
    score = 0
    kk = m + 1

    def mark(r: int) -> None:
        nonlocal kk
        top = max(cnt, default=0)
        while kk >= 1 and kk > top:
            t[kk] = r
            for l in range(1, m + 1):
                V[kk, l] = sum(1 for c in cnt if c >= l)
            kk -= 1

    for r in range(1, total + 1):
        mark(r)
        d = DeckState(tuple(cnt))
        g_action = guesser(d)
        check_action(g_action, range(n), f"guesser at {d}")
        g = stream.sample(g_action)
        s_action = shuffler(d)
        check_action(s_action, d.support(), f"shuffler at {d}")
        j = stream.sample(s_action)
        c = cnt[j]
        if g == j:
            score += 1
            C[c] += 1
        cnt[j] = c - 1
        if c == 1 and T == total + 1 and d0[j] == m:
            T = r
    mark(total + 1)
    return GameRecord(score, C, V, t, T, m)


def play_game(d0, guesser: NamedStrategy, shuffler: NamedStrategy, stream: Stream) -> GameRecord:
    """Play one game to the end of the deck, advancing ``stream``."""
    d0 = as_deck(d0)
    if d0.is_empty():
        raise DeckError("cannot play on an empty deck")
    if not _kernel_ready(d0, guesser, shuffler):
        return play_generic(d0, guesser, shuffler, stream)
    m = max(d0.counts)
    row = np.zeros(record_width(m), dtype=np.int64)
    state = np.asarray(stream.state, dtype=np.uint64)
    kernels.play_one(
        np.asarray(d0.counts, dtype=np.int64), guesser.kernel_code, shuffler.kernel_code,
        _thresholds(d0, guesser), state, row,
    )
    stream.state = [int(x) for x in state]
    return GameRecord.from_row(row, m)


# ---------------------------------------------------------------------------
# Batches and summaries


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _chunks(trials: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, trials))
    step, extra = divmod(trials, parts)
    out, lo = [], 0
    for p in range(parts):
        hi = lo + step + (1 if p < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def _run_chunks(fn, trials: int, threads: int | None):
    """Call ``fn(lo, hi)`` over contiguous replica ranges; returns ranges in completion order."""
    ranges = _chunks(trials, threads or default_threads())
    if len(ranges) == 1:
        fn(*ranges[0])
        return ranges
    done = []
    with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
        futures = {pool.submit(fn, lo, hi): (lo, hi) for lo, hi in ranges}
        for fut in as_completed(futures):
            fut.result()
            done.append(futures[fut])
    return done


def play_records(d0, guesser: NamedStrategy, shuffler: NamedStrategy, trials: int, master_seed: int,
                 threads: int | None = None) -> np.ndarray:
    """Record rows (``trials x record_width(m)``) for replicas ``0..trials-1``."""
    d0 = as_deck(d0)
    if d0.is_empty():
        raise DeckError("cannot play on an empty deck")
    m = max(d0.counts)
    out = np.zeros((trials, record_width(m)), dtype=np.int64)
    if _kernel_ready(d0, guesser, shuffler):
        counts = np.asarray(d0.counts, dtype=np.int64)
        thr = _thresholds(d0, guesser)

        def fn(lo, hi):
            kernels.play_batch(counts, guesser.kernel_code, shuffler.kernel_code, thr,
                               master_seed, lo, out[lo:hi])
    else:
        def fn(lo, hi):
            for r in range(lo, hi):
                out[r] = play_generic(d0, guesser, shuffler, Stream.for_replica(master_seed, r)).to_row()

    _run_chunks(fn, trials, threads)
    return out


@dataclass
class SummaryStats:
    trials: int
    mean: float
    sample_variance: float
    ci95_halfwidth: float
    master_seed: int

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.sample_variance / self.trials)


def summarize(values, master_seed: int) -> SummaryStats:
    """Exact integer reduction in replica order; independent of thread layout."""
    xs = [int(v) for v in np.asarray(values).ravel()]
    n = len(xs)
    if n == 0:
        raise ValueError("no samples to summarize")
    s1 = sum(xs)
    s2 = sum(x * x for x in xs)
    mean = Fraction(s1, n)
    var = Fraction(s2 * n - s1 * s1, n * (n - 1)) if n > 1 else Fraction(0)
    v = float(var)
    return SummaryStats(n, float(mean), v, 1.96 * math.sqrt(v / n), master_seed)


@dataclass
class _Welford:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def merge(self, count: int, mean: float, m2: float) -> None:
        if count == 0:
            return
        total = self.count + count
        delta = mean - self.mean
        self.mean += delta * count / total
        self.m2 += m2 + delta * delta * self.count * count / total
        self.count = total


def _streaming_summary(values: np.ndarray, ranges, master_seed: int) -> SummaryStats:
    acc = _Welford()
    for lo, hi in ranges:
        chunk = values[lo:hi].astype(np.float64)
        mean = float(chunk.mean())
        acc.merge(hi - lo, mean, float(((chunk - mean) ** 2).sum()))
    var = acc.m2 / (acc.count - 1) if acc.count > 1 else 0.0
    return SummaryStats(acc.count, acc.mean, var, 1.96 * math.sqrt(var / acc.count), master_seed)


def run_experiment(d0, guesser: NamedStrategy, shuffler: NamedStrategy, trials: int, master_seed: int,
                   statistic: str = "score", threads: int | None = None, exact_reduce: bool = True) -> SummaryStats:
    """Average one record statistic over ``trials`` independent plays.

    With ``exact_reduce`` the per-replica values are reduced in replica order
    with integer arithmetic, so the summary is bit-identical for any thread
    count; otherwise chunk summaries are merged as threads finish.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    d0 = as_deck(d0)
    col = statistic_column(statistic, max(d0.counts, default=0))
    threads = threads or default_threads()
    records = play_records(d0, guesser, shuffler, trials, master_seed, threads)
    if exact_reduce:
        return summarize(records[:, col], master_seed)
    return _streaming_summary(records[:, col], _chunks(trials, threads)[::-1], master_seed)


# ---------------------------------------------------------------------------
# Coupled processes


def simulate_coupon_brothers(n: int, m: int, stream: Stream) -> list[int]:
    """Coupons go to the eldest brother lacking them; returns U_1..U_{m-1}.

    ``U_k`` is how many types brother k lacks when brother m completes the
    set. Brother k owns a type iff at least ``m - k + 1`` copies have been
    kept, so the state is one level per type.
    """
    if n < 1 or m < 2:
        raise ValueError("coupon brothers need n >= 1 and m >= 2")
    level = [0] * n
    missing = n
    while missing > 0:
        c = stream.below(n)
        if level[c] < m:
            if level[c] == 0:
                missing -= 1
            level[c] += 1
    return [sum(1 for lv in level if lv < m - k + 1) for k in range(1, m)]


def simulate_birthday(n: int, m: int, stream: Stream) -> int:
    """Number of uniform draws from [n] until some value has appeared m times."""
    if n < 1 or m < 1:
        raise ValueError("birthday sampling needs n >= 1 and m >= 1")
    seen = [0] * n
    t = 0
    while True:
        c = stream.below(n)
        t += 1
        seen[c] += 1
        if seen[c] == m:
            return t


def coupon_brothers_batch(n: int, m: int, trials: int, master_seed: int, threads: int | None = None) -> np.ndarray:
    if n < 1 or m < 2:
        raise ValueError("coupon brothers need n >= 1 and m >= 2")
    out = np.zeros((trials, m - 1), dtype=np.int64)
    _run_chunks(lambda lo, hi: kernels.coupon_batch(n, m, master_seed, lo, out[lo:hi]), trials, threads)
    return out


def birthday_batch(n: int, m: int, trials: int, master_seed: int, threads: int | None = None) -> np.ndarray:
    if n < 1 or m < 1:
        raise ValueError("birthday sampling needs n >= 1 and m >= 1")
    out = np.zeros(trials, dtype=np.int64)
    _run_chunks(lambda lo, hi: kernels.birthday_batch(n, m, master_seed, lo, out[lo:hi]), trials, threads)
    return out
