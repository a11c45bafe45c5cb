"""Pure-Python game kernels.

Step-for-step mirror of ``_kernels.pyx``: same generator, same data
structures, same order of random draws, so both backends produce identical
records for identical seeds. Used when the extension is not built or when
``CARDGUESS_PURE_PYTHON=1``.

Random numbers: replica seeds are ``mix64(master ^ (replica * GAMMA))``,
streams are xoshiro256** seeded by four SplitMix64 outputs, and bounded
integers use Lemire's multiply-shift with rejection.
"""

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

BACKEND = "python"


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master, replica):
    return mix64((master & MASK64) ^ ((replica * GAMMA) & MASK64))


def seed_state(seed):
    x = seed & MASK64
    state = []
    for _ in range(4):
        x = (x + GAMMA) & MASK64
        state.append(mix64(x))
    return state


def _next64(s):
    s0, s1, s2, s3 = s
    r = ((s1 * 5) & MASK64)
    r = (((r << 7) | (r >> 57)) & MASK64) * 9 & MASK64
    t = (s1 << 17) & MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
    s[0], s[1], s[2], s[3] = s0, s1, s2, s3
    return r


def _below(s, k):
    x = _next64(s)
    m = x * k
    lo = m & MASK64
    if lo < k:
        t = ((1 << 64) - k) % k
        while lo < t:
            x = _next64(s)
            m = x * k
            lo = m & MASK64
    return m >> 64


def next64(state):
    """Advance a 4-word state list in place and return the output word."""
    return _next64(state)


def below(state, k):
    """Uniform integer in [0, k) drawn from a 4-word state list (k >= 1)."""
    return _below(state, k)


def record_width(m):
    return 2 + m + (m + 1) + (m + 1) * m


def _play(d0, guesser, shuffler, thr, s, row):
    n = len(d0)
    m = max(d0) if n else 0
    total = sum(d0)
    cnt = list(d0)
    start = [0] * (m + 2)
    sizes = [0] * (m + 1)
    for c in cnt:
        sizes[c] += 1
    for c in range(1, m + 2):
        start[c] = start[c - 1] + sizes[c - 1]
    fill = start[:]
    order = [0] * n
    pos = [0] * n
    for i in range(n):
        c = cnt[i]
        order[fill[c]] = i
        pos[i] = fill[c]
        fill[c] += 1
    cards = []
    for i in range(n):
        cards.extend([i] * d0[i])
    min_absent = n
    for i in range(n):
        if cnt[i] == 0:
            min_absent = i
            break

    off_c = 2 - 1  # C_k at row[off_c + k]
    off_t = 2 + m - 1  # t_k at row[off_t + k]
    off_v = 2 + m + (m + 1)
    for x in range(len(row)):
        row[x] = 0
    score = 0
    T = total + 1
    T_set = False
    cmax = m
    kk = m + 1
    phase = m
    remaining = total
    for r in range(1, total + 1):
        while kk >= 1 and kk > cmax:
            row[off_t + kk] = r
            base = off_v + (kk - 1) * m
            for l in range(1, m + 1):
                row[base + l - 1] = n - start[l]
            kk -= 1

        if guesser == 0:  # gplus
            lo = start[cmax]
            g = order[lo + _below(s, n - lo)]
        elif guesser == 1:  # absent
            if start[1] > 0:
                g = min_absent
            else:
                c = 1
                while start[c + 1] == 0:
                    c += 1
                g = order[_below(s, start[c + 1])]
        elif guesser == 2:  # gminus
            while phase > 0 and start[phase] >= thr[phase]:
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
        else:  # uniform guess
            g = _below(s, n)

        if shuffler == 0:  # greedy
            lo = start[1]
            j = order[lo + _below(s, n - lo)]
        else:  # uniform shuffle
            u = _below(s, remaining)
            j = cards[u]
            cards[u] = cards[remaining - 1]

        c = cnt[j]
        if g == j:
            score += 1
            row[off_c + c] += 1

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
            if not T_set and d0[j] == m:
                T = r
                T_set = True
        while cmax > 0 and start[cmax] == n:
            cmax -= 1

    r = total + 1
    while kk >= 1 and kk > cmax:
        row[off_t + kk] = r
        base = off_v + (kk - 1) * m
        for l in range(1, m + 1):
            row[base + l - 1] = n - start[l]
        kk -= 1
    row[0] = score
    row[1] = T


def play_batch(d0, guesser, shuffler, thr, master, first, out):
    """Play ``len(out)`` games; row r uses replica ``first + r`` of ``master``."""
    d0 = [int(x) for x in d0]
    thr = [int(x) for x in thr]
    width = out.shape[1]
    for r in range(out.shape[0]):
        s = seed_state(derive_seed(int(master), int(first) + r))
        row = [0] * width
        _play(d0, guesser, shuffler, thr, s, row)
        out[r, :] = row


def play_one(d0, guesser, shuffler, thr, state, out_row):
    """Play one game from an explicit generator state (4-element uint64 array, updated)."""
    d0 = [int(x) for x in d0]
    thr = [int(x) for x in thr]
    s = [int(x) for x in state]
    row = [0] * out_row.shape[0]
    _play(d0, guesser, shuffler, thr, s, row)
    out_row[:] = row
    for k in range(4):
        state[k] = s[k]


def coupon_batch(n, m, master, first, out):
    """Coupon brothers: row r holds U_1..U_{m-1} for replica ``first + r``."""
    for r in range(out.shape[0]):
        s = seed_state(derive_seed(int(master), int(first) + r))
        level = [0] * n
        missing = n
        while missing > 0:
            c = _below(s, n)
            lv = level[c]
            if lv < m:
                if lv == 0:
                    missing -= 1
                level[c] = lv + 1
        for k in range(1, m):
            need = m - k + 1
            out[r, k - 1] = sum(1 for lv in level if lv < need)


def birthday_batch(n, m, master, first, out):
    """Samples until some value repeats m times; out[r] is the sample count."""
    for r in range(out.shape[0]):
        s = seed_state(derive_seed(int(master), int(first) + r))
        seen = [0] * n
        t = 0
        while True:
            c = _below(s, n)
            t += 1
            seen[c] += 1
            if seen[c] == m:
                break
        out[r] = t
