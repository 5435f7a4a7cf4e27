"""Command-line front end.

    paradigm-evo run --config FILE [--set key=value]... --out DIR
    paradigm-evo ensemble --config FILE --runs N --seed U64 --out DIR
    paradigm-evo plot --in CSV [CSV...] --out SVG
    paradigm-evo replicate-fig2 [--seed U64] --out DIR

Exit status: 0 success, 2 configuration error, 3 runtime error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import format_config, parse_config
from .core import ConfigError, ModelConfig
from .experiment import EnsembleSummary, RunSpec, run, run_ensemble
from .export import export_csv, read_csv, write_manifest
from .plot import render_plot

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4

DEFAULT_FIG2_SEED = 2020
FIG2_RUNS = 100
FIG2_LABELS = ("attraction_only", "attraction_repulsion")

log = logging.getLogger("paradigm_evo")


def _progress(label: str):
    def report(done: int, total: int) -> None:
        end = "\n" if done == total else ""
        print(f"\r[{label}] run {done}/{total}", end=end, file=sys.stderr, flush=True)
    return report


def fig2_specs(max_cycles: int = 200_000, checkpoint_interval: int = 500,
               shuffle_replicates: int = 10) -> dict[str, RunSpec]:
    """Built-in paper-scale configurations (100 lexemes, 8 cells, 6 exponents)."""
    dims = dict(lexemes=100, cells=8, exponents=6)
    models = {
        "attraction_only": ModelConfig.attraction_only(**dims),
        "attraction_repulsion": ModelConfig.attraction_repulsion(**dims),
    }
    return {k: RunSpec(m, max_cycles, checkpoint_interval, shuffle_replicates)
            for k, m in models.items()}


def replicate_fig2(out_dir, seed: int = DEFAULT_FIG2_SEED, runs: int = FIG2_RUNS,
                   workers: int = 1, max_cycles: int = 200_000, checkpoint_interval: int = 500,
                   progress: bool = False) -> dict[str, EnsembleSummary]:
    """Run both built-in ensembles and write CSVs, the comparison SVG and a manifest.

    Both ensembles share ``seed``, so run i of each starts from the same
    random lexicon.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = {}
    for label, spec in fig2_specs(max_cycles, checkpoint_interval).items():
        summaries[label] = run_ensemble(spec, runs, seed, workers,
                                        _progress(label) if progress else None)
        export_csv(summaries[label], out / f"{label}.csv")
    render_plot(list(summaries.values()), out / "fig2.svg",
                labels=["attraction only", "attraction-repulsion 0.7/0.3"])
    write_manifest(out / "manifest.txt", summaries)
    return summaries


def _cmd_run(args) -> int:
    model, spec = parse_config(args.config, args.set)
    out = Path(args.out)
    traj = run(spec)
    export_csv(traj, out / "trajectory.csv")
    (out / "config.resolved").write_text(format_config(spec), encoding="utf-8")
    last = traj.records[-1]
    print(f"cycle {last.cycle}: entropy {last.mean_cond_entropy:.4f} bits, "
          f"{last.class_count} classes"
          + (f" (absorbed at {traj.absorbed_at})" if traj.absorbed_at is not None else ""))
    return EXIT_OK


def _cmd_ensemble(args) -> int:
    model, spec = parse_config(args.config, args.set)
    out = Path(args.out)
    summary = run_ensemble(spec, args.runs, args.seed, args.workers,
                           _progress("ensemble") if not args.quiet else None)
    export_csv(summary, out / "ensemble.csv")
    write_manifest(out / "manifest.txt", {"ensemble": summary})
    flag = "" if summary.converged else " (not converged)"
    print(f"final mean class count {summary.final_class_count_mean:.3f}{flag}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    tables = [read_csv(p) for p in args.inputs]
    render_plot(tables, args.out)
    return EXIT_OK


def _cmd_fig2(args) -> int:
    summaries = replicate_fig2(args.out, args.seed, args.runs, args.workers, args.max_cycles,
                               args.checkpoint_interval, progress=not args.quiet)
    for label, s in summaries.items():
        print(f"{label}: final mean class count {s.final_class_count_mean:.3f}")
    return EXIT_OK


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="paradigm-evo", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single trajectory")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("ensemble", help="many seeded runs, aggregated")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("plot", help="SVG panels from CSV output")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("replicate-fig2", help="both built-in ensembles at paper scale")
    p.add_argument("--seed", type=_u64, default=DEFAULT_FIG2_SEED)
    p.add_argument("--out", required=True)
    p.add_argument("--runs", type=int, default=FIG2_RUNS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-cycles", type=int, default=200_000)
    p.add_argument("--checkpoint-interval", type=int, default=500)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_fig2)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
