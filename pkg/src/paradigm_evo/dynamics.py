"""One evolutionary cycle: focus, pivots, evidence, scoring, replacement.

Each operation is a thin wrapper over the compiled kernel used by the batched
run loop, so composing them by hand draws exactly the same random numbers as
``step``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import FocusSampling, FrequencyProfile, Lexicon, ModelConfig, RandomSource, enum_code


@dataclass(frozen=True)
class FocusRef:
    lexeme: int
    cell: int


@dataclass(frozen=True, eq=False)
class EvidenceCounts:
    positive: np.ndarray
    negative: np.ndarray

    @property
    def positive_total(self) -> int:
        return int(self.positive.sum())

    @property
    def negative_total(self) -> int:
        return int(self.negative.sum())


def select_focus(lexicon: Lexicon, profile: FrequencyProfile, config: ModelConfig,
                 rng: RandomSource) -> FocusRef:
    """Pick the held-out entry: lexeme first, then a uniform cell."""
    weights = (profile.focus_weights if config.focus_sampling is FocusSampling.INVERSE_FREQUENCY
               else profile.lexeme_weights)
    lexeme, cell = K.select_focus(rng.state, lexicon.rows, lexicon.cols, weights,
                                  enum_code(config.focus_sampling))
    return FocusRef(int(lexeme), int(cell))


def select_pivots(focus: FocusRef, profile: FrequencyProfile, config: ModelConfig,
                  rng: RandomSource) -> list[int]:
    """``pivot_count`` distinct non-focal cells, in draw order."""
    out = np.empty(config.pivot_count, dtype=np.int64)
    K.select_pivots(rng.state, focus.cell, config.cells, config.pivot_count,
                    profile.cell_weights, enum_code(config.pivot_sampling), out)
    return [int(c) for c in out]


def gather_evidence(lexicon: Lexicon, focus: FocusRef, pivots, profile: FrequencyProfile,
                    config: ModelConfig, rng: RandomSource) -> EvidenceCounts:
    """Tally focal-cell exponents of other lexemes, split by pivot agreement.

    A lexeme agreeing with the focal lexeme at a pivot counts as positive
    evidence, a disagreeing one as negative. Counts from several pivots are
    summed. The focal lexeme is never its own evidence.
    """
    if len(pivots) == 0:
        raise ValueError("at least one pivot is required")
    positive = np.zeros(lexicon.exponents, dtype=np.int64)
    negative = np.zeros(lexicon.exponents, dtype=np.int64)
    K.gather_evidence(rng.state, lexicon.data, focus.lexeme, focus.cell,
                      np.asarray(pivots, dtype=np.int64), enum_code(config.evidence_sampling),
                      config.evidence_limit or 0, profile.lexeme_weights, positive, negative)
    return EvidenceCounts(positive, negative)


def score_exponents(evidence: EvidenceCounts, config: ModelConfig) -> np.ndarray:
    """``w+ * share_positive(e) - w- * share_negative(e)`` for every exponent e."""
    pos = np.asarray(evidence.positive, dtype=np.int64)
    neg = np.asarray(evidence.negative, dtype=np.int64)
    out = np.empty(pos.shape[0], dtype=np.float64)
    K.score_exponents(pos, neg, float(config.weight_positive), float(config.weight_negative), out)
    return out


def select_replacement(scores, current: int, evidence: EvidenceCounts, config: ModelConfig,
                       rng: RandomSource) -> int:
    """Best-scoring exponent, with the configured tie and empty-evidence policies.

    Scores within 1e-12 of the maximum count as tied. A random tie-break
    consumes one draw; a unique winner consumes none.
    """
    return int(K.select_replacement(
        rng.state, np.asarray(scores, dtype=np.float64), int(current),
        evidence.positive_total, evidence.negative_total,
        enum_code(config.tie_policy), enum_code(config.empty_evidence_policy)))


def step(lexicon: Lexicon, profile: FrequencyProfile, config: ModelConfig,
         rng: RandomSource) -> Lexicon:
    """Apply one cycle and return the updated lexicon (input left untouched)."""
    out = lexicon.copy()
    focus = select_focus(out, profile, config, rng)
    pivots = select_pivots(focus, profile, config, rng)
    evidence = gather_evidence(out, focus, pivots, profile, config, rng)
    scores = score_exponents(evidence, config)
    current = int(out.data[focus.lexeme, focus.cell])
    out.data[focus.lexeme, focus.cell] = select_replacement(scores, current, evidence, config, rng)
    return out


def step_inplace(lexicon: Lexicon, profile: FrequencyProfile, config: ModelConfig,
                 rng: RandomSource) -> tuple[FocusRef, int, int]:
    """Single-kernel cycle mutating ``lexicon``; returns (focus, old, new)."""
    pivots = np.empty(config.pivot_count, dtype=np.int64)
    pos = np.zeros(config.exponents, dtype=np.int64)
    neg = np.zeros(config.exponents, dtype=np.int64)
    scores = np.zeros(config.exponents, dtype=np.float64)
    fl, fc, old, new = K.step(rng.state, lexicon.data, *config.kernel_args(),
                              profile.focus_weights, profile.lexeme_weights,
                              profile.cell_weights, pivots, pos, neg, scores)
    return FocusRef(int(fl), int(fc)), int(old), int(new)

