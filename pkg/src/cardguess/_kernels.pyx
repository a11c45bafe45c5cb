# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled game kernels; must stay bit-identical to ``_kernels_py.py``."""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cdef extern from *:
    """
    static inline uint64_t cg_mul128(uint64_t a, uint64_t b, uint64_t *lo) {
        unsigned __int128 m = (unsigned __int128)a * b;
        *lo = (uint64_t)m;
        return (uint64_t)(m >> 64);
    }
    """
    uint64_t cg_mul128(uint64_t a, uint64_t b, uint64_t *lo) noexcept nogil

BACKEND = "cython"

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef struct Rng:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _derive(uint64_t master, uint64_t replica) noexcept nogil:
    return _mix64(master ^ (replica * GAMMA))


cdef inline void _seed(Rng* s, uint64_t seed) noexcept nogil:
    cdef uint64_t x = seed
    x += GAMMA
    s.s0 = _mix64(x)
    x += GAMMA
    s.s1 = _mix64(x)
    x += GAMMA
    s.s2 = _mix64(x)
    x += GAMMA
    s.s3 = _mix64(x)


cdef inline uint64_t _next(Rng* s) noexcept nogil:
    cdef uint64_t r = s.s1 * 5
    r = ((r << 7) | (r >> 57)) * 9
    cdef uint64_t t = s.s1 << 17
    s.s2 ^= s.s0
    s.s3 ^= s.s1
    s.s1 ^= s.s2
    s.s0 ^= s.s3
    s.s2 ^= t
    s.s3 = (s.s3 << 45) | (s.s3 >> 19)
    return r


cdef inline int64_t _below(Rng* s, uint64_t k) noexcept nogil:
    cdef uint64_t lo
    cdef uint64_t hi = cg_mul128(_next(s), k, &lo)
    cdef uint64_t t
    if lo < k:
        t = (0 - k) % k
        while lo < t:
            hi = cg_mul128(_next(s), k, &lo)
    return <int64_t>hi


def mix64(uint64_t z):
    return _mix64(z)


def derive_seed(uint64_t master, uint64_t replica):
    return _derive(master, replica)


def seed_state(uint64_t seed):
    cdef Rng s
    _seed(&s, seed)
    return [s.s0, s.s1, s.s2, s.s3]


def record_width(int64_t m):
    return 2 + m + (m + 1) + (m + 1) * m


cdef struct Work:
    int64_t n
    int64_t m
    int64_t total
    int64_t* d0
    int64_t* cnt
    int64_t* pos
    int64_t* order
    int64_t* start
    int64_t* fill
    int64_t* cards
    int64_t* thr


cdef void _record_t(Work* w, int64_t* row, int64_t kk, int64_t r) noexcept nogil:
    cdef int64_t m = w.m
    cdef int64_t base = 2 + m + (m + 1) + (kk - 1) * m
    cdef int64_t l
    row[2 + m - 1 + kk] = r
    for l in range(1, m + 1):
        row[base + l - 1] = w.n - w.start[l]


cdef void _play(Work* w, int guesser, int shuffler, Rng* s, int64_t* row) noexcept nogil:
    cdef int64_t n = w.n, m = w.m, total = w.total
    cdef int64_t* cnt = w.cnt
    cdef int64_t* pos = w.pos
    cdef int64_t* order = w.order
    cdef int64_t* start = w.start
    cdef int64_t* cards = w.cards
    cdef int64_t i, c, k, r, lo, hi, g, j, u, p, q, other
    cdef int64_t width = 2 + m + (m + 1) + (m + 1) * m

    for i in range(m + 1):
        w.fill[i] = 0
    for i in range(n):
        cnt[i] = w.d0[i]
        w.fill[cnt[i]] += 1
    start[0] = 0
    for c in range(1, m + 2):
        start[c] = start[c - 1] + w.fill[c - 1]
    for c in range(m + 1):
        w.fill[c] = start[c]
    for i in range(n):
        c = cnt[i]
        order[w.fill[c]] = i
        pos[i] = w.fill[c]
        w.fill[c] += 1
    k = 0
    for i in range(n):
        for c in range(w.d0[i]):
            cards[k] = i
            k += 1
    cdef int64_t min_absent = n
    for i in range(n):
        if cnt[i] == 0:
            min_absent = i
            break

    for i in range(width):
        row[i] = 0
    cdef int64_t score = 0
    cdef int64_t T = total + 1
    cdef bint T_set = False
    cdef int64_t cmax = m
    cdef int64_t kk = m + 1
    cdef int64_t phase = m
    cdef int64_t remaining = total

    for r in range(1, total + 1):
        while kk >= 1 and kk > cmax:
            _record_t(w, row, kk, r)
            kk -= 1

        if guesser == 0:
            lo = start[cmax]
            g = order[lo + _below(s, n - lo)]
        elif guesser == 1:
            if start[1] > 0:
                g = min_absent
            else:
                c = 1
                while start[c + 1] == 0:
                    c += 1
                g = order[_below(s, start[c + 1])]
        elif guesser == 2:
            while phase > 0 and start[phase] >= w.thr[phase]:
                phase -= 1
            if phase == 0 or start[1] > 0:
                g = min_absent
            else:
                lo = start[phase]
                hi = start[phase + 1]
                if hi > lo:
                    g = order[lo + _below(s, hi - lo)]
                else:
                    c = 1
                    while start[c + 1] == start[c]:
                        c += 1
                    lo = start[c]
                    g = order[lo + _below(s, start[c + 1] - lo)]
        else:
            g = _below(s, n)

        if shuffler == 0:
            lo = start[1]
            j = order[lo + _below(s, n - lo)]
        else:
            u = _below(s, remaining)
            j = cards[u]
            cards[u] = cards[remaining - 1]

        c = cnt[j]
        if g == j:
            score += 1
            row[1 + c] += 1

        p = pos[j]
        q = start[c]
        other = order[q]
        order[q] = j
        order[p] = other
        pos[j] = q
        pos[other] = p
        start[c] = q + 1
        cnt[j] = c - 1
        remaining -= 1
        if c == 1:
            if j < min_absent:
                min_absent = j
            if not T_set and w.d0[j] == m:
                T = r
                T_set = True
        while cmax > 0 and start[cmax] == n:
            cmax -= 1

    r = total + 1
    while kk >= 1 and kk > cmax:
        _record_t(w, row, kk, r)
        kk -= 1
    row[0] = score
    row[1] = T


cdef int _alloc(Work* w, const int64_t[::1] d0, const int64_t[::1] thr) except -1:
    cdef int64_t i
    w.n = d0.shape[0]
    w.m = 0
    w.total = 0
    for i in range(w.n):
        if d0[i] > w.m:
            w.m = d0[i]
        w.total += d0[i]
    if thr.shape[0] < w.m + 1:
        raise ValueError("threshold table shorter than max multiplicity + 1")
    w.d0 = <int64_t*>malloc(w.n * sizeof(int64_t) + 1)
    w.cnt = <int64_t*>malloc(w.n * sizeof(int64_t) + 1)
    w.pos = <int64_t*>malloc(w.n * sizeof(int64_t) + 1)
    w.order = <int64_t*>malloc(w.n * sizeof(int64_t) + 1)
    w.start = <int64_t*>malloc((w.m + 2) * sizeof(int64_t))
    w.fill = <int64_t*>malloc((w.m + 2) * sizeof(int64_t))
    w.cards = <int64_t*>malloc(w.total * sizeof(int64_t) + 1)
    w.thr = <int64_t*>malloc((w.m + 1) * sizeof(int64_t))
    if not (w.d0 and w.cnt and w.pos and w.order and w.start and w.fill and w.cards and w.thr):
        _release(w)
        raise MemoryError()
    for i in range(w.n):
        w.d0[i] = d0[i]
    for i in range(w.m + 1):
        w.thr[i] = thr[i]
    return 0


cdef void _release(Work* w) noexcept:
    free(w.d0)
    free(w.cnt)
    free(w.pos)
    free(w.order)
    free(w.start)
    free(w.fill)
    free(w.cards)
    free(w.thr)


def play_batch(const int64_t[::1] d0, int guesser, int shuffler, const int64_t[::1] thr,
               uint64_t master, uint64_t first, int64_t[:, ::1] out):
    cdef Work w
    cdef Rng s
    cdef Py_ssize_t r
    if out.shape[1] != record_width(max(d0) if d0.shape[0] else 0):
        raise ValueError("output row width does not match the record layout")
    _alloc(&w, d0, thr)
    try:
        with nogil:
            for r in range(out.shape[0]):
                _seed(&s, _derive(master, first + r))
                _play(&w, guesser, shuffler, &s, &out[r, 0])
    finally:
        _release(&w)


def play_one(const int64_t[::1] d0, int guesser, int shuffler, const int64_t[::1] thr,
             uint64_t[::1] state, int64_t[::1] out_row):
    cdef Work w
    cdef Rng s
    s.s0 = state[0]
    s.s1 = state[1]
    s.s2 = state[2]
    s.s3 = state[3]
    _alloc(&w, d0, thr)
    try:
        _play(&w, guesser, shuffler, &s, &out_row[0])
    finally:
        _release(&w)
    state[0] = s.s0
    state[1] = s.s1
    state[2] = s.s2
    state[3] = s.s3


def coupon_batch(int64_t n, int64_t m, uint64_t master, uint64_t first, int64_t[:, ::1] out):
    cdef int64_t* level = <int64_t*>malloc(n * sizeof(int64_t))
    cdef Rng s
    cdef Py_ssize_t r
    cdef int64_t missing, c, lv, k, need, i, acc
    if not level:
        raise MemoryError()
    try:
        with nogil:
            for r in range(out.shape[0]):
                _seed(&s, _derive(master, first + r))
                memset(level, 0, n * sizeof(int64_t))
                missing = n
                while missing > 0:
                    c = _below(&s, n)
                    lv = level[c]
                    if lv < m:
                        if lv == 0:
                            missing -= 1
                        level[c] = lv + 1
                for k in range(1, m):
                    need = m - k + 1
                    acc = 0
                    for i in range(n):
                        if level[i] < need:
                            acc += 1
                    out[r, k - 1] = acc
    finally:
        free(level)


def birthday_batch(int64_t n, int64_t m, uint64_t master, uint64_t first, int64_t[::1] out):
    cdef int64_t* seen = <int64_t*>malloc(n * sizeof(int64_t))
    cdef Rng s
    cdef Py_ssize_t r
    cdef int64_t c, t
    if not seen:
        raise MemoryError()
    try:
        with nogil:
            for r in range(out.shape[0]):
                _seed(&s, _derive(master, first + r))
                memset(seen, 0, n * sizeof(int64_t))
                t = 0
                while True:
                    c = _below(&s, n)
                    t += 1
                    seen[c] += 1
                    if seen[c] == m:
                        break
                out[r] = t
    finally:
        free(seen)


def next64(state):
    """Advance a 4-word state list in place and return the output word."""
    cdef Rng s
    s.s0, s.s1, s.s2, s.s3 = state
    cdef uint64_t x = _next(&s)
    state[0], state[1], state[2], state[3] = s.s0, s.s1, s.s2, s.s3
    return x


def below(state, uint64_t k):
    cdef Rng s
    s.s0, s.s1, s.s2, s.s3 = state
    cdef int64_t x = _below(&s, k)
    state[0], state[1], state[2], state[3] = s.s0, s.s1, s.s2, s.s3
    return x
