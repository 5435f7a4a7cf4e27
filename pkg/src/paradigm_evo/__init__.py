"""Iterated-learning simulations of inflectional paradigms.

Attraction-only and attraction-repulsion dynamics over a lexicon of
exponent indices, with entropy and inflection-class metrics.
"""

from .core import (
    ConfigError,
    FrequencyProfile,
    Lexicon,
    ModelConfig,
    RandomSource,
    derive_seed,
    init_lexicon,
    weighted_sample,
    zipf_weights,
)
from .dynamics import step
from .experiment import EnsembleSummary, RunSpec, Trajectory, run, run_ensemble
from .metrics import MetricsRecord, class_count, mean_conditional_entropy

__version__ = "0.1.0"
