"""Order measures over a lexicon and their column-shuffled baselines.

Probabilities are type frequencies over lexemes (each row counts once) and
entropies are in bits.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from . import _kernels as K
from .core import Lexicon, RandomSource

DEFAULT_SHUFFLE_REPLICATES = 10


@dataclass(frozen=True)
class MetricsRecord:
    cycle: int
    mean_cond_entropy: float
    class_count: int
    shuffled_mean_cond_entropy: float
    shuffled_class_count: float

    def as_tuple(self) -> tuple:
        return astuple(self)


METRIC_NAMES = ("mean_cond_entropy", "class_count", "shuffled_mean_cond_entropy",
                "shuffled_class_count")


def pairwise_conditional_entropy(lexicon: Lexicon, from_cell: int, to_cell: int) -> float:
    """H(to_cell | from_cell) in bits."""
    if from_cell == to_cell:
        raise ValueError("conditional entropy of a cell given itself is not a pairwise measure")
    for c in (from_cell, to_cell):
        if not 0 <= c < lexicon.cols:
            raise IndexError(f"cell {c} out of range")
    return float(K.conditional_entropy(lexicon.data, from_cell, to_cell, lexicon.exponents))


def mean_conditional_entropy(lexicon: Lexicon) -> float:
    """Average of H(j | i) over all C(C-1) ordered pairs of distinct cells."""
    return float(K.mean_conditional_entropy(lexicon.data, lexicon.exponents))


def entropy_matrix(lexicon: Lexicon) -> np.ndarray:
    """C x C matrix with H(col | row) off the diagonal and 0 on it."""
    C = lexicon.cols
    out = np.zeros((C, C))
    for i in range(C):
        for j in range(C):
            if i != j:
                out[i, j] = K.conditional_entropy(lexicon.data, i, j, lexicon.exponents)
    return out


def class_count(lexicon: Lexicon) -> int:
    """Number of distinct rows (inflection classes)."""
    return int(K.class_count(lexicon.data, lexicon.exponents))


def _columns(lexicon: Lexicon, columns) -> np.ndarray:
    if columns is None:
        return np.arange(lexicon.cols, dtype=np.int64)
    cols = np.asarray(columns, dtype=np.int64)
    if cols.size and (cols.min() < 0 or cols.max() >= lexicon.cols):
        raise IndexError("shuffle column out of range")
    return cols


def shuffle_columns(lexicon: Lexicon, rng: RandomSource, columns=None) -> Lexicon:
    """Independently permute each column's entries across lexemes.

    ``columns`` restricts the shuffle to a subset of cells; by default every
    column is shuffled.
    """
    out = np.empty_like(lexicon.data)
    K.shuffle_columns(rng.state, lexicon.data, out, _columns(lexicon, columns))
    return Lexicon(out, lexicon.exponents)


def measure(lexicon: Lexicon, cycle: int, shuffle_replicates: int, rng: RandomSource,
            columns=None) -> MetricsRecord:
    if shuffle_replicates < 1:
        raise ValueError("shuffle_replicates must be >= 1")
    h, k, sh, sk = K.measure(rng.state, lexicon.data, lexicon.exponents, shuffle_replicates,
                             _columns(lexicon, columns))
    return MetricsRecord(cycle, float(h), int(k), float(sh), float(sk))
