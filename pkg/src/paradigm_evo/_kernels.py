"""Compiled inner loops.

Every stochastic decision in the package goes through these functions so
that the per-operation Python API and the batched run loop consume the
generator stream identically.

Generator: xoshiro256** (Blackman & Vigna 2018), state seeded from four
successive SplitMix64 outputs. Bounded integers use rejection on the
``2**64 mod n`` tail followed by ``r % n``; uniform doubles use the top 53
bits. All arithmetic is on explicit uint64 so results do not depend on the
platform.
"""

import numpy as np
from numba import njit

_U1 = np.uint64(1)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_JUMP = np.array(
    [0x180EC6D33CFD0ABA, 0xD5A61266F0C9392C, 0xA9582618E03FC9AA, 0x39ABDC4529B1661C],
    dtype=np.uint64,
)

# enum codes shared with core.ModelConfig
FOCUS_UNIFORM, FOCUS_INVERSE = 0, 1
PIVOT_UNIFORM, PIVOT_FREQUENCY = 0, 1
EVIDENCE_ALL, EVIDENCE_UNIFORM, EVIDENCE_FREQUENCY = 0, 1, 2
TIE_RANDOM, TIE_KEEP = 0, 1
EMPTY_KEEP, EMPTY_RANDOM = 0, 1

TIE_TOLERANCE = 1e-12

_jit = njit(cache=True, nogil=True)


# ---------------------------------------------------------------------------
# generator
# ---------------------------------------------------------------------------

@_jit
def splitmix64_mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@_jit
def seed_state(seed):
    s = np.empty(4, dtype=np.uint64)
    x = np.uint64(seed)
    for i in range(4):
        x = x + _GOLDEN
        s[i] = splitmix64_mix(x)
    return s


@_jit
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@_jit
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@_jit
def jump(s):
    s0 = np.uint64(0)
    s1 = np.uint64(0)
    s2 = np.uint64(0)
    s3 = np.uint64(0)
    for i in range(4):
        word = _JUMP[i]
        for b in range(64):
            if (word >> np.uint64(b)) & _U1:
                s0 ^= s[0]
                s1 ^= s[1]
                s2 ^= s[2]
                s3 ^= s[3]
            next_u64(s)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3


@_jit
def bounded(s, n):
    """Uniform integer in [0, n); always consumes at least one draw."""
    un = np.uint64(n)
    threshold = (np.uint64(0) - un) % un
    while True:
        r = next_u64(s)
        if r >= threshold:
            return np.int64(r % un)


@_jit
def uniform(s):
    return np.float64(next_u64(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@_jit
def weighted_index(s, weights):
    """Index drawn with probability proportional to ``weights`` (one draw).

    Zero-weight entries are never returned.
    """
    total = 0.0
    last = -1
    for i in range(weights.shape[0]):
        if weights[i] > 0.0:
            total += weights[i]
            last = i
    u = uniform(s) * total
    acc = 0.0
    for i in range(weights.shape[0]):
        w = weights[i]
        if w > 0.0:
            acc += w
            if u < acc:
                return i
    return last


# ---------------------------------------------------------------------------
# lexicon construction
# ---------------------------------------------------------------------------

@_jit
def init_lexicon(s, n_lexemes, n_cells, n_exponents):
    lex = np.empty((n_lexemes, n_cells), dtype=np.uint8)
    for i in range(n_lexemes):
        for j in range(n_cells):
            lex[i, j] = bounded(s, n_exponents)
    return lex


# ---------------------------------------------------------------------------
# one cycle
# ---------------------------------------------------------------------------

@_jit
def select_focus(s, n_lexemes, n_cells, focus_weights, focus_mode):
    if focus_mode == FOCUS_INVERSE:
        lexeme = weighted_index(s, focus_weights)
    else:
        lexeme = bounded(s, n_lexemes)
    cell = bounded(s, n_cells)
    return lexeme, cell


@_jit
def select_pivots(s, focus_cell, n_cells, pivot_count, cell_weights, pivot_mode, out):
    if pivot_mode == PIVOT_FREQUENCY:
        w = cell_weights.copy()
        w[focus_cell] = 0.0
        for i in range(pivot_count):
            c = weighted_index(s, w)
            out[i] = c
            w[c] = 0.0
        return
    cand = np.empty(n_cells - 1, dtype=np.int64)
    j = 0
    for c in range(n_cells):
        if c != focus_cell:
            cand[j] = c
            j += 1
    n = n_cells - 1
    for i in range(pivot_count):
        r = i + bounded(s, n - i)
        tmp = cand[i]
        cand[i] = cand[r]
        cand[r] = tmp
        out[i] = cand[i]


@_jit
def _tally(lex, l, focus_lexeme, focus_cell, p, positive, negative):
    if lex[l, p] == lex[focus_lexeme, p]:
        positive[lex[l, focus_cell]] += 1
    else:
        negative[lex[l, focus_cell]] += 1


@_jit
def gather_evidence(s, lex, focus_lexeme, focus_cell, pivots, evidence_mode,
                    evidence_limit, lexeme_weights, positive, negative):
    n_lexemes = lex.shape[0]
    positive[:] = 0
    negative[:] = 0
    for pi in range(pivots.shape[0]):
        p = pivots[pi]
        if evidence_mode == EVIDENCE_ALL:
            for l in range(n_lexemes):
                if l != focus_lexeme:
                    _tally(lex, l, focus_lexeme, focus_cell, p, positive, negative)
        elif evidence_mode == EVIDENCE_UNIFORM:
            n = n_lexemes - 1
            m = min(evidence_limit, n)
            cand = np.empty(n, dtype=np.int64)
            j = 0
            for l in range(n_lexemes):
                if l != focus_lexeme:
                    cand[j] = l
                    j += 1
            for i in range(m):
                r = i + bounded(s, n - i)
                tmp = cand[i]
                cand[i] = cand[r]
                cand[r] = tmp
                _tally(lex, cand[i], focus_lexeme, focus_cell, p, positive, negative)
        else:
            m = min(evidence_limit, n_lexemes - 1)
            w = lexeme_weights.copy()
            w[focus_lexeme] = 0.0
            for i in range(m):
                l = weighted_index(s, w)
                w[l] = 0.0
                _tally(lex, l, focus_lexeme, focus_cell, p, positive, negative)


@_jit
def score_exponents(positive, negative, weight_positive, weight_negative, out):
    pt = 0
    nt = 0
    for e in range(positive.shape[0]):
        pt += positive[e]
        nt += negative[e]
    for e in range(positive.shape[0]):
        sp = 0.0
        sn = 0.0
        if pt > 0:
            sp = positive[e] / pt
        if nt > 0:
            sn = negative[e] / nt
        out[e] = weight_positive * sp - weight_negative * sn


@_jit
def select_replacement(s, scores, current, positive_total, negative_total,
                       tie_policy, empty_policy):
    n_exponents = scores.shape[0]
    if positive_total == 0 and negative_total == 0:
        if empty_policy == EMPTY_RANDOM:
            return bounded(s, n_exponents)
        return current
    best = scores[0]
    for e in range(1, n_exponents):
        if scores[e] > best:
            best = scores[e]
    n_tied = 0
    current_tied = False
    for e in range(n_exponents):
        if scores[e] >= best - TIE_TOLERANCE:
            n_tied += 1
            if e == current:
                current_tied = True
    if n_tied > 1 and tie_policy == TIE_KEEP and current_tied:
        return current
    pick = 0
    if n_tied > 1:
        pick = bounded(s, n_tied)
    for e in range(n_exponents):
        if scores[e] >= best - TIE_TOLERANCE:
            if pick == 0:
                return e
            pick -= 1
    return current


@_jit
def step(s, lex, n_exponents, pivot_count, weight_positive, weight_negative,
         focus_mode, pivot_mode, evidence_mode, evidence_limit, tie_policy, empty_policy,
         focus_weights, lexeme_weights, cell_weights, pivots, positive, negative, scores):
    """One cycle in place. Returns (focus lexeme, focus cell, old, new)."""
    n_lexemes, n_cells = lex.shape
    fl, fc = select_focus(s, n_lexemes, n_cells, focus_weights, focus_mode)
    select_pivots(s, fc, n_cells, pivot_count, cell_weights, pivot_mode, pivots)
    gather_evidence(s, lex, fl, fc, pivots, evidence_mode, evidence_limit,
                    lexeme_weights, positive, negative)
    score_exponents(positive, negative, weight_positive, weight_negative, scores)
    old = np.int64(lex[fl, fc])
    new = select_replacement(s, scores, old, positive.sum(), negative.sum(),
                             tie_policy, empty_policy)
    lex[fl, fc] = new
    return fl, fc, old, new


@_jit
def is_uniform(lex):
    n_lexemes, n_cells = lex.shape
    for l in range(1, n_lexemes):
        for c in range(n_cells):
            if lex[l, c] != lex[0, c]:
                return False
    return True


@_jit
def advance(s, lex, n_cycles, stop_on_absorption, n_exponents, pivot_count,
            weight_positive, weight_negative, focus_mode, pivot_mode, evidence_mode,
            evidence_limit, tie_policy, empty_policy, focus_weights, lexeme_weights,
            cell_weights):
    """Run up to ``n_cycles`` cycles; returns the number actually executed.

    With ``stop_on_absorption`` the loop halts right after the cycle that
    makes every row identical.
    """
    pivots = np.empty(pivot_count, dtype=np.int64)
    positive = np.zeros(n_exponents, dtype=np.int64)
    negative = np.zeros(n_exponents, dtype=np.int64)
    scores = np.zeros(n_exponents, dtype=np.float64)
    for t in range(n_cycles):
        fl, fc, old, new = step(
            s, lex, n_exponents, pivot_count, weight_positive, weight_negative,
            focus_mode, pivot_mode, evidence_mode, evidence_limit, tie_policy,
            empty_policy, focus_weights, lexeme_weights, cell_weights, pivots,
            positive, negative, scores)
        if stop_on_absorption and old != new and is_uniform(lex):
            return t + 1
    return n_cycles


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

@_jit
def conditional_entropy(lex, from_cell, to_cell, n_exponents):
    n_lexemes = lex.shape[0]
    joint = np.zeros((n_exponents, n_exponents), dtype=np.int64)
    marg = np.zeros(n_exponents, dtype=np.int64)
    for l in range(n_lexemes):
        a = lex[l, from_cell]
        joint[a, lex[l, to_cell]] += 1
        marg[a] += 1
    h = 0.0
    for a in range(n_exponents):
        if marg[a] == 0:
            continue
        for b in range(n_exponents):
            n_ab = joint[a, b]
            if n_ab > 0:
                h += n_ab * np.log2(marg[a] / n_ab)
    return h / n_lexemes


@_jit
def mean_conditional_entropy(lex, n_exponents):
    n_cells = lex.shape[1]
    total = 0.0
    for i in range(n_cells):
        for j in range(n_cells):
            if i != j:
                total += conditional_entropy(lex, i, j, n_exponents)
    return total / (n_cells * (n_cells - 1))


@_jit
def class_count(lex, n_exponents):
    n_lexemes, n_cells = lex.shape
    # fits an int64 row key whenever n_exponents ** n_cells < 2 ** 62
    fits = n_cells * np.log2(max(n_exponents, 2)) < 62.0
    if fits:
        keys = np.empty(n_lexemes, dtype=np.int64)
        for l in range(n_lexemes):
            k = 0
            for c in range(n_cells):
                k = k * n_exponents + lex[l, c]
            keys[l] = k
        keys.sort()
        count = 1
        for l in range(1, n_lexemes):
            if keys[l] != keys[l - 1]:
                count += 1
        return count
    count = 0
    for l in range(n_lexemes):
        seen = False
        for q in range(l):
            same = True
            for c in range(n_cells):
                if lex[l, c] != lex[q, c]:
                    same = False
                    break
            if same:
                seen = True
                break
        if not seen:
            count += 1
    return count


@_jit
def shuffle_columns(s, lex, out, columns):
    """Fisher-Yates permutation of each listed column of ``lex`` into ``out``."""
    n_lexemes = lex.shape[0]
    out[:, :] = lex
    for ci in range(columns.shape[0]):
        c = columns[ci]
        for i in range(n_lexemes - 1, 0, -1):
            j = bounded(s, i + 1)
            tmp = out[i, c]
            out[i, c] = out[j, c]
            out[j, c] = tmp


@_jit
def measure(s, lex, n_exponents, replicates, columns):
    """Live and shuffle-averaged (entropy, class count)."""
    h = mean_conditional_entropy(lex, n_exponents)
    k = class_count(lex, n_exponents)
    work = np.empty_like(lex)
    sh = 0.0
    sk = 0.0
    for r in range(replicates):
        shuffle_columns(s, lex, work, columns)
        sh += mean_conditional_entropy(work, n_exponents)
        sk += class_count(work, n_exponents)
    return h, np.float64(k), sh / replicates, sk / replicates
