"""Single trajectories, ensembles and absorption detection."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .core import FrequencyProfile, Lexicon, ModelConfig, RandomSource, derive_seed, init_lexicon
from .metrics import DEFAULT_SHUFFLE_REPLICATES, METRIC_NAMES, MetricsRecord, measure

log = logging.getLogger(__name__)

STABILITY_TOLERANCE = 0.05


@dataclass(frozen=True)
class RunSpec:
    model: ModelConfig = field(default_factory=ModelConfig)
    max_cycles: int = 200_000
    checkpoint_interval: int = 500
    shuffle_replicates: int = DEFAULT_SHUFFLE_REPLICATES
    stop_on_absorption: bool = True
    # None shuffles every cell; otherwise only the listed ones
    shuffle_cells: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be positive")
        if not 1 <= self.checkpoint_interval <= self.max_cycles:
            raise ValueError("checkpoint_interval must be in [1, max_cycles]")
        if self.shuffle_replicates < 1:
            raise ValueError("shuffle_replicates must be >= 1")
        if self.shuffle_cells is not None:
            cells = tuple(int(c) for c in self.shuffle_cells)
            if not cells or any(not 0 <= c < self.model.cells for c in cells):
                raise ValueError("shuffle_cells must name existing cells")
            object.__setattr__(self, "shuffle_cells", cells)

    def checkpoints(self) -> list[int]:
        grid = list(range(0, self.max_cycles, self.checkpoint_interval))
        grid.append(self.max_cycles)
        return grid

    def with_seed(self, seed: int) -> RunSpec:
        return RunSpec(self.model.replace(seed=seed), self.max_cycles, self.checkpoint_interval,
                       self.shuffle_replicates, self.stop_on_absorption, self.shuffle_cells)


@dataclass
class Trajectory:
    spec: RunSpec
    records: list[MetricsRecord]
    final_lexicon: Lexicon
    absorbed_at: int | None = None

    @property
    def cycles(self) -> list[int]:
        return [r.cycle for r in self.records]

    def series(self, metric: str) -> np.ndarray:
        return np.array([getattr(r, metric) for r in self.records], dtype=np.float64)

    def value_at(self, metric: str, cycle: int) -> float:
        """Metric at a checkpoint; after absorption the absorbed value holds."""
        last = None
        for r in self.records:
            if r.cycle == cycle:
                return getattr(r, metric)
            if r.cycle > cycle:
                break
            last = r
        if self.absorbed_at is not None and last is not None and last.cycle == self.absorbed_at:
            return getattr(last, metric)
        raise KeyError(f"no record for cycle {cycle}")


def detect_absorption(lexicon: Lexicon) -> bool:
    """True iff every row of the lexicon is identical."""
    return bool(K.is_uniform(lexicon.data))


def run(spec: RunSpec) -> Trajectory:
    """Evolve one lexicon from its seeded random start.

    The dynamics and the shuffle baselines draw from separate streams (the
    latter jumped 2**128 ahead), so the shuffle replicate count never alters
    the trajectory itself.
    """
    cfg = spec.model
    rng = RandomSource(cfg.seed)
    shuffle_rng = rng.jump()
    profile = FrequencyProfile.for_config(cfg)
    lex = init_lexicon(cfg.lexemes, cfg.cells, cfg.exponents, rng)
    cols = (np.arange(cfg.cells, dtype=np.int64) if spec.shuffle_cells is None
            else np.asarray(spec.shuffle_cells, dtype=np.int64))
    stop = spec.stop_on_absorption and cfg.uniform_state_absorbing
    args = cfg.kernel_args()
    focus_w, lexeme_w, cell_w = profile.focus_weights, profile.lexeme_weights, profile.cell_weights

    records = [measure(lex, 0, spec.shuffle_replicates, shuffle_rng, cols)]
    if stop and detect_absorption(lex):
        return Trajectory(spec, records, lex, absorbed_at=0)

    cycle = 0
    for target in spec.checkpoints()[1:]:
        wanted = target - cycle
        done = int(K.advance(rng.state, lex.data, wanted, stop, *args, focus_w, lexeme_w, cell_w))
        cycle += done
        records.append(measure(lex, cycle, spec.shuffle_replicates, shuffle_rng, cols))
        # uniformity can only appear through a change, so a uniform lexicon
        # after a full segment was absorbed on its last cycle
        if stop and (done < wanted or detect_absorption(lex)):
            return Trajectory(spec, records, lex, absorbed_at=cycle)
    return Trajectory(spec, records, lex)


@dataclass
class MetricSummary:
    mean: np.ndarray
    p05: np.ndarray
    p95: np.ndarray


@dataclass
class EnsembleSummary:
    runs: int
    checkpoints: list[int]
    metrics: dict[str, MetricSummary]
    final_class_count_mean: float
    converged: bool
    base_seed: int
    seeds: list[int]
    absorbed_at: list[int | None]
    spec: RunSpec | None = None

    def __getitem__(self, metric: str) -> MetricSummary:
        return self.metrics[metric]


def summarize(trajectories: list[Trajectory], base_seed: int = 0) -> EnsembleSummary:
    """Aggregate runs at every shared checkpoint (mean, 5th and 95th percentile)."""
    if not trajectories:
        raise ValueError("nothing to summarize")
    grid = trajectories[0].spec.checkpoints()
    stats = {}
    for name in METRIC_NAMES:
        table = np.array([[t.value_at(name, c) for c in grid] for t in trajectories],
                         dtype=np.float64)
        p05, p95 = np.percentile(table, [5.0, 95.0], axis=0)
        stats[name] = MetricSummary(table.mean(axis=0), p05, p95)
    means = stats["class_count"].mean
    converged = (len(means) < 2
                 or abs(means[-1] - means[-2]) < STABILITY_TOLERANCE * max(means[-2], 1e-12))
    return EnsembleSummary(
        runs=len(trajectories), checkpoints=grid, metrics=stats,
        final_class_count_mean=float(means[-1]), converged=bool(converged),
        base_seed=base_seed, seeds=[t.spec.model.seed for t in trajectories],
        absorbed_at=[t.absorbed_at for t in trajectories], spec=trajectories[0].spec,
    )


def ensemble_seeds(base_seed: int, n_runs: int) -> list[int]:
    return [derive_seed(base_seed, i) for i in range(n_runs)]


def run_many(spec: RunSpec, n_runs: int, base_seed: int, workers: int = 1,
             progress=None) -> list[Trajectory]:
    """Trajectories ordered by run index; independent of ``workers``."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    specs = [spec.with_seed(s) for s in ensemble_seeds(base_seed, n_runs)]
    if workers <= 1:
        out = []
        for i, s in enumerate(specs):
            out.append(run(s))
            if progress:
                progress(i + 1, n_runs)
        return out
    # kernels release the GIL, so threads run concurrently
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, specs))


def run_ensemble(spec: RunSpec, n_runs: int, base_seed: int, workers: int = 1,
                 progress=None) -> EnsembleSummary:
    trajectories = run_many(spec, n_runs, base_seed, workers, progress)
    summary = summarize(trajectories, base_seed)
    if not summary.converged:
        log.warning("ensemble class count still moving at the last checkpoint (%.3f -> %.3f)",
                    summary["class_count"].mean[-2], summary["class_count"].mean[-1])
    return summary
