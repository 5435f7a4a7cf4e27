import numpy as np
import pytest

from oracles import brute_evidence, hand_trace_attraction_step
from paradigm_evo.core import FrequencyProfile, Lexicon, ModelConfig, RandomSource, zipf_weights
from paradigm_evo.dynamics import (
    EvidenceCounts,
    FocusRef,
    gather_evidence,
    score_exponents,
    select_focus,
    select_pivots,
    select_replacement,
    step,
    step_inplace,
)

AM = ModelConfig.attraction_only
AR = ModelConfig.attraction_repulsion


def uniform_profile(L, C):
    return FrequencyProfile.zipf(L, C)


def freqs(values, n):
    return np.bincount(np.asarray(values), minlength=n) / len(values)


# -- focus -------------------------------------------------------------------

def test_focus_uniform_two_lexemes():
    lex = Lexicon(np.zeros((2, 3)), 2)
    cfg, prof, rng = AM(lexemes=2, cells=3, exponents=2), uniform_profile(2, 3), RandomSource(1)
    foci = [select_focus(lex, prof, cfg, rng) for _ in range(60_000)]
    f = freqs([x.lexeme * 3 + x.cell for x in foci], 6)
    assert np.all(np.abs(f - 1 / 6) <= 0.01)


def test_inverse_frequency_with_uniform_weights_is_uniform():
    lex = Lexicon(np.zeros((4, 2)), 2)
    cfg = AM(lexemes=4, cells=2, exponents=2).replace(focus_sampling="inverse_frequency")
    rng = RandomSource(2)
    f = freqs([select_focus(lex, uniform_profile(4, 2), cfg, rng).lexeme
               for _ in range(100_000)], 4)
    assert np.all(np.abs(f - 0.25) <= 0.01)


def test_inverse_frequency_focus():
    lex = Lexicon(np.zeros((2, 2)), 2)
    cfg = AM(lexemes=2, cells=2, exponents=2).replace(focus_sampling="inverse_frequency")
    prof = FrequencyProfile(np.array([2 / 3, 1 / 3]), np.array([0.5, 0.5]))
    rng = RandomSource(3)
    f = freqs([select_focus(lex, prof, cfg, rng).lexeme for _ in range(100_000)], 2)
    assert abs(f[1] - 2 / 3) <= 0.01


# -- pivots ------------------------------------------------------------------

def test_pivot_forced_two_cells():
    cfg = AM(lexemes=3, cells=2, exponents=2)
    rng = RandomSource(0)
    for cell in (0, 1):
        for _ in range(20):
            assert select_pivots(FocusRef(0, cell), uniform_profile(3, 2), cfg, rng) == [1 - cell]


def test_pivot_all_non_focal():
    cfg = AM(lexemes=3, cells=8, exponents=2).replace(pivot_count=7)
    rng = RandomSource(0)
    piv = select_pivots(FocusRef(1, 5), uniform_profile(3, 8), cfg, rng)
    assert sorted(piv) == [0, 1, 2, 3, 4, 6, 7]


def test_pivot_uniform_frequencies():
    cfg = AM(lexemes=3, cells=4, exponents=2)
    rng = RandomSource(4)
    draws = [select_pivots(FocusRef(0, 2), uniform_profile(3, 4), cfg, rng)[0]
             for _ in range(100_000)]
    f = freqs(draws, 4)
    assert f[2] == 0
    assert np.all(np.abs(f[[0, 1, 3]] - 1 / 3) <= 0.01)


def test_pivot_frequency_weighting():
    cfg = AM(lexemes=3, cells=4, exponents=2).replace(pivot_sampling="frequency")
    prof = FrequencyProfile.zipf(3, 4, 0.0, 1.0)
    rng = RandomSource(5)
    draws = [select_pivots(FocusRef(0, 0), prof, cfg, rng)[0] for _ in range(100_000)]
    w = prof.cell_weights.copy()
    w[0] = 0
    assert np.all(np.abs(freqs(draws, 4) - w / w.sum()) <= 0.01)


@pytest.mark.parametrize("mode", ["uniform", "frequency"])
def test_pivots_distinct_and_non_focal(mode):
    cfg = AM(lexemes=3, cells=6, exponents=2).replace(pivot_count=3, pivot_sampling=mode)
    prof = FrequencyProfile.zipf(3, 6, 0.0, 1.0)
    rng = RandomSource(6)
    for _ in range(500):
        cell = rng.integers(6)
        piv = select_pivots(FocusRef(0, cell), prof, cfg, rng)
        assert len(set(piv)) == 3 and cell not in piv


# -- evidence ----------------------------------------------------------------

def test_evidence_identical_pair():
    lex = Lexicon([[1, 0], [1, 0]], 2)
    ev = gather_evidence(lex, FocusRef(0, 0), [1], uniform_profile(2, 2), AM(lexemes=2, cells=2,
                         exponents=2), RandomSource(0))
    assert ev.positive.tolist() == [0, 1] and ev.negative.tolist() == [0, 0]


def test_evidence_figure_one():
    # 8 lexemes x 5 cells, focus at (lexeme 4, cell 3), pivot cell 1.
    # Lexemes 1, 2, 6 share the focal lexeme's pivot exponent; their focal-cell
    # exponents are a=0, b=1, b=1. The other four non-focal lexemes differ.
    data = np.full((8, 5), 2, dtype=np.uint8)
    data[:, 1] = [3, 0, 0, 3, 0, 3, 0, 3]
    data[[1, 2, 6], 3] = [0, 1, 1]
    ev = gather_evidence(Lexicon(data, 4), FocusRef(4, 3), [1], uniform_profile(8, 5),
                         AM(lexemes=8, cells=5, exponents=4), RandomSource(0))
    assert ev.positive.tolist() == [1, 2, 0, 0]
    assert ev.negative_total == 4


FIXED_5x3 = [[0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1]]


@pytest.mark.parametrize("fl", range(5))
@pytest.mark.parametrize("fc", range(3))
def test_evidence_two_pivots_brute_force(fl, fc):
    pivots = [c for c in range(3) if c != fc]
    cfg = AM(lexemes=5, cells=3, exponents=2).replace(pivot_count=2)
    ev = gather_evidence(Lexicon(FIXED_5x3, 2), FocusRef(fl, fc), pivots, uniform_profile(5, 3),
                         cfg, RandomSource(0))
    pos, neg = brute_evidence(FIXED_5x3, fl, fc, pivots, 2)
    assert ev.positive.tolist() == pos and ev.negative.tolist() == neg


def test_evidence_random_instances_brute_force():
    gen = np.random.default_rng(0)
    for _ in range(300):
        L, C, E = gen.integers(2, 12), gen.integers(2, 6), gen.integers(1, 5)
        data = gen.integers(0, E, size=(L, C))
        k = int(gen.integers(1, C))
        fl, fc = int(gen.integers(L)), int(gen.integers(C))
        pivots = [int(p) for p in gen.permutation([c for c in range(C) if c != fc])[:k]]
        cfg = AR(lexemes=int(L), cells=int(C), exponents=int(E), pivot_count=k)
        ev = gather_evidence(Lexicon(data, int(E)), FocusRef(fl, fc), pivots,
                             uniform_profile(L, C), cfg, RandomSource(0))
        pos, neg = brute_evidence(data.tolist(), fl, fc, pivots, E)
        assert ev.positive.tolist() == pos and ev.negative.tolist() == neg
        assert ev.positive_total + ev.negative_total == (L - 1) * k


@pytest.mark.parametrize("mode", ["uniform_subsample", "frequency_subsample"])
@pytest.mark.parametrize("m", [1, 4, 50])
def test_subsampled_evidence_totals(mode, m):
    L, C, E = 12, 4, 3
    cfg = AR(lexemes=L, cells=C, exponents=E, pivot_count=2, evidence_sampling=mode,
             evidence_limit=m, zipf_exponent_lexemes=1.0)
    lex = Lexicon(np.random.default_rng(1).integers(0, E, (L, C)), E)
    rng = RandomSource(9)
    full = brute_evidence(lex.data.tolist(), 3, 0, [1, 2], E)
    for _ in range(200):
        ev = gather_evidence(lex, FocusRef(3, 0), [1, 2], FrequencyProfile.for_config(cfg),
                             cfg, rng)
        assert ev.positive_total + ev.negative_total == 2 * min(m, L - 1)
        assert np.all(ev.positive <= np.array(full[0])) and np.all(ev.negative <= np.array(full[1]))
        if m >= L - 1:
            assert (ev.positive.tolist(), ev.negative.tolist()) == full


def test_frequency_subsample_prefers_frequent_lexemes():
    # lexeme 0 is the only one with exponent 1 in the focal cell; with strong
    # Zipf weighting it should show up far more often than under uniform
    L = 20
    data = np.zeros((L, 2), dtype=np.uint8)
    data[0, 0] = 1
    lex = Lexicon(data, 2)
    seen = {}
    for mode in ("uniform_subsample", "frequency_subsample"):
        cfg = AR(lexemes=L, cells=2, exponents=2, evidence_sampling=mode, evidence_limit=1,
                 zipf_exponent_lexemes=1.0)
        prof, rng = FrequencyProfile.for_config(cfg), RandomSource(10)
        hits = sum(gather_evidence(lex, FocusRef(L - 1, 0), [1], prof, cfg, rng).positive[1]
                   for _ in range(20_000))
        seen[mode] = hits / 20_000
    w = zipf_weights(L, 1.0)
    assert abs(seen["uniform_subsample"] - 1 / (L - 1)) < 0.01
    assert abs(seen["frequency_subsample"] - w[0] / (1 - w[L - 1])) < 0.01


# -- scoring -----------------------------------------------------------------

def ev(pos, neg):
    return EvidenceCounts(np.array(pos), np.array(neg))


def test_scores_pure_attraction():
    s = score_exponents(ev([3, 1], [0, 0]), AM())
    np.testing.assert_allclose(s, [0.75, 0.25])


def test_scores_mixed():
    s = score_exponents(ev([2, 2], [4, 0]), AR())
    np.testing.assert_allclose(s, [0.05, 0.35], atol=1e-15)
    assert int(np.argmax(s)) == 1


def test_scores_negative_only_tie():
    s = score_exponents(ev([0, 0], [5, 5]), AR())
    np.testing.assert_allclose(s, [-0.15, -0.15], atol=1e-15)
    assert s[0] == s[1]


# -- replacement -------------------------------------------------------------

def test_replacement_unique_max():
    e = ev([0, 0, 5, 1, 0], [0] * 5)
    assert select_replacement(score_exponents(e, AM()), 0, e, AM(), RandomSource(0)) == 2


def test_replacement_empty_keeps_current():
    e = ev([0] * 5, [0] * 5)
    assert select_replacement(np.zeros(5), 4, e, AM(), RandomSource(0)) == 4


def test_replacement_empty_random_exponent():
    e = ev([0] * 5, [0] * 5)
    cfg = AM(empty_evidence_policy="random_exponent")
    rng = RandomSource(1)
    picks = {select_replacement(np.zeros(5), 4, e, cfg, rng) for _ in range(500)}
    assert picks == set(range(5))


def test_replacement_random_tie():
    e = ev([0, 2, 0, 2], [0] * 4)
    scores = score_exponents(e, AM())
    rng = RandomSource(12)
    f = freqs([select_replacement(scores, 0, e, AM(), rng) for _ in range(100_000)], 4)
    assert f[0] == 0 and f[2] == 0
    assert abs(f[1] - 0.5) <= 0.01 and abs(f[3] - 0.5) <= 0.01


def test_replacement_keep_current_tie_policy():
    e = ev([0, 2, 0, 2], [0] * 4)
    cfg = AM(tie_policy="keep_current")
    scores = score_exponents(e, cfg)
    rng = RandomSource(0)
    assert all(select_replacement(scores, 3, e, cfg, rng) == 3 for _ in range(100))
    # current not among the tied maxima: random among them
    assert {select_replacement(scores, 0, e, cfg, rng) for _ in range(200)} == {1, 3}


# -- full step ---------------------------------------------------------------

CONFIGS = [
    AM(lexemes=6, cells=4, exponents=3),
    AR(lexemes=6, cells=4, exponents=3),
    AR(lexemes=6, cells=4, exponents=3, pivot_count=3, pivot_sampling="frequency",
       focus_sampling="inverse_frequency", zipf_exponent_lexemes=1.0, zipf_exponent_cells=1.0),
    AR(lexemes=6, cells=4, exponents=3, evidence_sampling="frequency_subsample", evidence_limit=2,
       zipf_exponent_lexemes=1.0),
    AR(lexemes=6, cells=4, exponents=3, evidence_sampling="uniform_subsample", evidence_limit=3,
       tie_policy="keep_current"),
]


@pytest.mark.parametrize("cfg", CONFIGS)
def test_uniform_lexicon_is_fixed(cfg):
    lex = Lexicon(np.tile([2, 0, 1, 1], (6, 1)), 3)
    prof, rng = FrequencyProfile.for_config(cfg), RandomSource(cfg.seed + 3)
    for _ in range(300):
        lex2 = step(lex, prof, cfg, rng)
        assert lex2 == lex


def test_step_matches_hand_trace_literal():
    rows = [[0, 1, 2], [0, 1, 1], [2, 1, 1], [0, 0, 2]]
    cfg = AM(lexemes=4, cells=3, exponents=3)
    out = step(Lexicon(rows, 3), uniform_profile(4, 3), cfg, RandomSource(2))
    # focus (lexeme 3, cell 1), pivot cell 2; only lexeme 0 shares exponent 2
    # there and carries exponent 1 in cell 1
    assert out.data.tolist() == [[0, 1, 2], [0, 1, 1], [2, 1, 1], [0, 1, 2]]


@pytest.mark.parametrize("seed", range(40))
def test_step_matches_hand_trace(seed):
    rows = [[0, 1, 2], [0, 1, 1], [2, 1, 1], [0, 0, 2]]
    cfg = AM(lexemes=4, cells=3, exponents=3)
    expected, _ = hand_trace_attraction_step(rows, 3, seed)
    out = step(Lexicon(rows, 3), uniform_profile(4, 3), cfg, RandomSource(seed))
    assert out.data.tolist() == expected


@pytest.mark.parametrize("cfg", CONFIGS)
def test_step_changes_at_most_one_entry_and_not_input(cfg):
    gen = np.random.default_rng(1)
    prof, rng = FrequencyProfile.for_config(cfg), RandomSource(77)
    lex = Lexicon(gen.integers(0, 3, (6, 4)), 3)
    for _ in range(300):
        before = lex.data.copy()
        new = step(lex, prof, cfg, rng)
        assert np.array_equal(lex.data, before)
        assert np.count_nonzero(new.data != lex.data) <= 1
        lex = new


@pytest.mark.parametrize("cfg", CONFIGS)
def test_step_and_kernel_step_agree(cfg):
    gen = np.random.default_rng(2)
    prof = FrequencyProfile.for_config(cfg)
    a_rng, b_rng = RandomSource(5), RandomSource(5)
    a = Lexicon(gen.integers(0, 3, (6, 4)), 3)
    b = a.copy()
    for _ in range(500):
        a = step(a, prof, cfg, a_rng)
        step_inplace(b, prof, cfg, b_rng)
        assert a == b
    assert np.array_equal(a_rng.state, b_rng.state)
