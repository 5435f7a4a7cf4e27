"""CSV and manifest writers/readers.

Trajectory CSV columns::

    cycle,mean_cond_entropy,class_count,shuffled_mean_cond_entropy,shuffled_class_count

Ensemble CSV columns: ``cycle`` then ``<metric>_mean,<metric>_p05,<metric>_p95``
for each metric in the order above. Values use 6 significant digits
(``%.6g``), ``\\n`` line endings, no index column.

Manifest: ``key = value`` lines. ``<label>.<config key>`` holds the resolved
configuration of each ensemble, ``<label>.runs``/``<label>.base_seed`` its size
and base seed and ``<label>.run_seed.<i>`` the seed of run ``i``.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .config import config_items, parse_lines, parse_text
from .experiment import EnsembleSummary, MetricSummary, Trajectory
from .metrics import METRIC_NAMES

TRAJECTORY_COLUMNS = ("cycle",) + METRIC_NAMES
ENSEMBLE_COLUMNS = ("cycle",) + tuple(
    f"{m}_{stat}" for m in METRIC_NAMES for stat in ("mean", "p05", "p95"))


def fmt(x) -> str:
    return format(float(x), ".6g")


def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def trajectory_rows(traj: Trajectory):
    for r in traj.records:
        yield [str(r.cycle)] + [fmt(getattr(r, m)) for m in METRIC_NAMES]


def ensemble_rows(summary: EnsembleSummary):
    for i, cycle in enumerate(summary.checkpoints):
        row = [str(cycle)]
        for m in METRIC_NAMES:
            s = summary.metrics[m]
            row += [fmt(s.mean[i]), fmt(s.p05[i]), fmt(s.p95[i])]
        yield row


def export_csv(result, path) -> Path:
    """Write a Trajectory or an EnsembleSummary as CSV."""
    if isinstance(result, Trajectory):
        return _write_rows(path, TRAJECTORY_COLUMNS, trajectory_rows(result))
    if isinstance(result, EnsembleSummary):
        return _write_rows(path, ENSEMBLE_COLUMNS, ensemble_rows(result))
    raise TypeError(f"cannot export {type(result).__name__}")


class SeriesTable:
    """Checkpoints plus mean/p05/p95 per metric, as read back from a CSV."""

    def __init__(self, checkpoints, metrics: dict[str, MetricSummary], label: str = ""):
        self.checkpoints = list(checkpoints)
        self.metrics = metrics
        self.label = label

    def __getitem__(self, metric: str) -> MetricSummary:
        return self.metrics[metric]


def read_csv(path) -> SeriesTable:
    """Load either CSV schema; a trajectory becomes a zero-width band."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = tuple(rows[0]), rows[1:]
    cols = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    cycles = [int(float(c)) for c in cols["cycle"]] if body else []
    if header == TRAJECTORY_COLUMNS:
        metrics = {m: MetricSummary(cols[m], cols[m], cols[m]) for m in METRIC_NAMES}
    elif header == ENSEMBLE_COLUMNS:
        metrics = {m: MetricSummary(cols[f"{m}_mean"], cols[f"{m}_p05"], cols[f"{m}_p95"])
                   for m in METRIC_NAMES}
    else:
        raise ValueError(f"{path}: unrecognised CSV header")
    return SeriesTable(cycles, metrics, label=path.stem)


def manifest_lines(label: str, summary: EnsembleSummary) -> list[str]:
    lines = [f"{label}.{k} = {v}" for k, v in config_items(summary.spec) if k != "seed"]
    lines.append(f"{label}.runs = {summary.runs}")
    lines.append(f"{label}.base_seed = {summary.base_seed}")
    lines += [f"{label}.run_seed.{i} = {s}" for i, s in enumerate(summary.seeds)]
    return lines


def write_manifest(path, ensembles: dict[str, EnsembleSummary]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for label, summary in ensembles.items():
        lines += manifest_lines(label, summary)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_manifest(path, label: str):
    """Resolved (model, run spec, base seed, run seeds) of one labelled ensemble.

    The returned spec carries the seed of run 0; ``spec.with_seed(seeds[i])``
    reproduces run ``i``.
    """
    raw = parse_lines(Path(path).read_text(encoding="utf-8").splitlines(), str(path))
    prefix = label + "."
    mine = {k[len(prefix):]: v for k, (v, _) in raw.items() if k.startswith(prefix)}
    if not mine:
        raise KeyError(f"no ensemble labelled {label!r} in {path}")
    runs = int(mine.pop("runs"))
    base_seed = int(mine.pop("base_seed"))
    seeds = [int(mine.pop(f"run_seed.{i}")) for i in range(runs)]
    text = "".join(f"{k} = {v}\n" for k, v in mine.items()) + f"seed = {seeds[0]}\n"
    model, spec = parse_text(text, source=str(path))
    return model, spec, base_seed, seeds
