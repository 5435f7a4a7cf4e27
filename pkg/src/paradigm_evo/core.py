"""Lexicon, configuration, frequency profiles and the pinned random source."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from enum import Enum

import numpy as np

from . import _kernels as K

MAX_EXPONENTS = 255
_MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    """A configuration value violates a model invariant."""


class DimensionError(ValueError):
    """Lexicon dimensions too small for the cycle to be defined."""


class FocusSampling(str, Enum):
    UNIFORM = "uniform"
    INVERSE_FREQUENCY = "inverse_frequency"


class PivotSampling(str, Enum):
    UNIFORM = "uniform"
    FREQUENCY = "frequency"


class EvidenceSampling(str, Enum):
    ALL = "all"
    UNIFORM_SUBSAMPLE = "uniform_subsample"
    FREQUENCY_SUBSAMPLE = "frequency_subsample"


class TiePolicy(str, Enum):
    RANDOM_UNIFORM = "random_uniform"
    KEEP_CURRENT = "keep_current"


class EmptyEvidencePolicy(str, Enum):
    KEEP_CURRENT = "keep_current"
    RANDOM_EXPONENT = "random_exponent"


def enum_code(member: Enum) -> int:
    """Integer code passed to the compiled kernels (declaration order)."""
    return list(type(member)).index(member)


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------

def splitmix64(seed: int, index: int) -> int:
    """Output number ``index + 1`` of a SplitMix64 stream started at ``seed``."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Seed for run ``index`` of an ensemble started from ``base_seed``."""
    return splitmix64(base_seed & _MASK64, index)


class RandomSource:
    """xoshiro256** generator seeded through SplitMix64.

    The state is a 4-word uint64 array shared with the compiled kernels, so
    a draw made here and a draw made inside a kernel advance the same stream.
    """

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.state = K.seed_state(np.uint64(seed))

    def next_u64(self) -> int:
        return int(K.next_u64(self.state))

    def integers(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n < 1:
            raise ValueError("n must be positive")
        return int(K.bounded(self.state, n))

    def random(self) -> float:
        """Uniform double in ``[0, 1)`` with 53 random bits."""
        return float(K.uniform(self.state))

    def jump(self) -> RandomSource:
        """Return a copy of this source advanced by 2**128 draws."""
        other = self.copy()
        K.jump(other.state)
        return other

    def copy(self) -> RandomSource:
        other = RandomSource.__new__(RandomSource)
        other.seed = self.seed
        other.state = self.state.copy()
        return other


# ---------------------------------------------------------------------------
# lexicon
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Lexicon:
    """L x C grid of exponent indices; row = lexeme, column = paradigm cell."""

    data: np.ndarray
    exponents: int

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if data.ndim != 2:
            raise DimensionError("lexicon must be two-dimensional")
        if data.shape[0] < 2 or data.shape[1] < 2:
            raise DimensionError(f"need at least 2 lexemes and 2 cells, got {data.shape}")
        if not 1 <= self.exponents <= MAX_EXPONENTS:
            raise ConfigError(f"exponents must be in [1, {MAX_EXPONENTS}]")
        if data.size and int(data.max()) >= self.exponents:
            raise ValueError("lexicon entry outside [0, exponents)")
        self.data = data

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def copy(self) -> Lexicon:
        return Lexicon(self.data.copy(), self.exponents)

    def __eq__(self, other):
        if not isinstance(other, Lexicon):
            return NotImplemented
        return self.exponents == other.exponents and np.array_equal(self.data, other.data)

    def __getitem__(self, idx):
        return self.data[idx]


def init_lexicon(n_lexemes: int, n_cells: int, n_exponents: int, rng: RandomSource) -> Lexicon:
    """Random lexicon; draws row by row, exactly L*C draws."""
    if n_lexemes < 2 or n_cells < 2:
        raise DimensionError(f"need L >= 2 and C >= 2, got L={n_lexemes}, C={n_cells}")
    if not 1 <= n_exponents <= MAX_EXPONENTS:
        raise DimensionError(f"need 1 <= E <= {MAX_EXPONENTS}, got E={n_exponents}")
    return Lexicon(K.init_lexicon(rng.state, n_lexemes, n_cells, n_exponents), n_exponents)


# ---------------------------------------------------------------------------
# frequencies
# ---------------------------------------------------------------------------

def zipf_weights(n: int, s: float) -> np.ndarray:
    """Normalized Zipf weights; index 0 is rank 1 (most frequent)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if s < 0 or not math.isfinite(s):
        raise ValueError("Zipf exponent must be finite and non-negative")
    raw = np.arange(1, n + 1, dtype=np.float64) ** (-float(s))
    return raw / raw.sum()


def weighted_sample(weights, rng: RandomSource) -> int:
    """Index ``i`` with probability ``weights[i]`` (one draw, linear scan)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise ValueError("cannot sample from an empty weight vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
        raise ValueError("weights must be finite, non-negative and not all zero")
    return int(K.weighted_index(rng.state, w))


@dataclass(frozen=True, eq=False)
class FrequencyProfile:
    lexeme_weights: np.ndarray
    cell_weights: np.ndarray

    @classmethod
    def zipf(cls, n_lexemes: int, n_cells: int, s_lexemes: float = 0.0,
             s_cells: float = 0.0) -> FrequencyProfile:
        return cls(zipf_weights(n_lexemes, s_lexemes), zipf_weights(n_cells, s_cells))

    @classmethod
    def for_config(cls, config: ModelConfig) -> FrequencyProfile:
        return cls.zipf(config.lexemes, config.cells, config.zipf_exponent_lexemes,
                        config.zipf_exponent_cells)

    @property
    def focus_weights(self) -> np.ndarray:
        """Inverse lexeme frequencies, renormalized."""
        inv = 1.0 / self.lexeme_weights
        return inv / inv.sum()


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

WEIGHT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    lexemes: int = 100
    cells: int = 8
    exponents: int = 6
    pivot_count: int = 1
    evidence_limit: int | None = None
    weight_positive: float = 0.7
    weight_negative: float = 0.3
    zipf_exponent_lexemes: float = 0.0
    zipf_exponent_cells: float = 0.0
    focus_sampling: FocusSampling = FocusSampling.UNIFORM
    pivot_sampling: PivotSampling = PivotSampling.UNIFORM
    evidence_sampling: EvidenceSampling = EvidenceSampling.ALL
    tie_policy: TiePolicy = TiePolicy.RANDOM_UNIFORM
    empty_evidence_policy: EmptyEvidencePolicy = EmptyEvidencePolicy.KEEP_CURRENT
    seed: int = 0

    def __post_init__(self):
        # accept plain strings for the enum fields
        for f in fields(self):
            if isinstance(f.default, Enum):
                object.__setattr__(self, f.name, type(f.default)(getattr(self, f.name)))
        self.validate()

    def validate(self) -> None:
        if self.lexemes < 2:
            raise ConfigError("lexemes >= 2")
        if self.cells < 2:
            raise ConfigError("cells >= 2")
        if not 1 <= self.exponents <= MAX_EXPONENTS:
            raise ConfigError(f"1 <= exponents <= {MAX_EXPONENTS}")
        if not 1 <= self.pivot_count <= self.cells - 1:
            raise ConfigError("pivot_count ≤ cells−1 (and pivot_count >= 1)")
        if self.evidence_limit is not None and self.evidence_limit < 1:
            raise ConfigError("evidence_limit >= 1")
        if self.evidence_sampling is not EvidenceSampling.ALL and self.evidence_limit is None:
            raise ConfigError("evidence_limit is required when evidence_sampling != all")
        for name in ("weight_positive", "weight_negative"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} in [0, 1]")
        if abs(self.weight_positive + self.weight_negative - 1.0) > WEIGHT_TOLERANCE:
            raise ConfigError("weight_positive + weight_negative = 1")
        for name in ("zipf_exponent_lexemes", "zipf_exponent_cells"):
            v = getattr(self, name)
            if v < 0 or not math.isfinite(v):
                raise ConfigError(f"{name} >= 0")
        if not 0 <= self.seed <= _MASK64:
            raise ConfigError("seed is a 64-bit unsigned integer")

    @classmethod
    def attraction_only(cls, **kw) -> ModelConfig:
        """Ackerman & Malouf configuration: one uniform pivot, all evidence, no repulsion."""
        base = dict(pivot_count=1, weight_positive=1.0, weight_negative=0.0,
                    focus_sampling=FocusSampling.UNIFORM, pivot_sampling=PivotSampling.UNIFORM,
                    evidence_sampling=EvidenceSampling.ALL)
        base.update(kw)
        return cls(**base)

    @classmethod
    def attraction_repulsion(cls, **kw) -> ModelConfig:
        base = dict(weight_positive=0.7, weight_negative=0.3)
        base.update(kw)
        return cls(**base)

    @property
    def is_attraction_only(self) -> bool:
        return (self.pivot_count == 1 and self.weight_negative == 0.0
                and self.focus_sampling is FocusSampling.UNIFORM
                and self.pivot_sampling is PivotSampling.UNIFORM
                and self.evidence_sampling is EvidenceSampling.ALL)

    @property
    def uniform_state_absorbing(self) -> bool:
        """Whether a lexicon with identical rows can never change again.

        Positive evidence is then unanimous and negative evidence empty, so
        the current exponent wins unless positive weight is zero and ties are
        broken at random.
        """
        return self.weight_positive > 0.0 or self.tie_policy is TiePolicy.KEEP_CURRENT

    def replace(self, **changes) -> ModelConfig:
        d = asdict(self)
        d.update(changes)
        return ModelConfig(**d)

    def kernel_args(self) -> tuple:
        """Scalar parameters in the order expected by ``_kernels.step``."""
        return (
            self.exponents, self.pivot_count, float(self.weight_positive),
            float(self.weight_negative), enum_code(self.focus_sampling),
            enum_code(self.pivot_sampling), enum_code(self.evidence_sampling),
            self.evidence_limit or 0, enum_code(self.tie_policy),
            enum_code(self.empty_evidence_policy),
        )
