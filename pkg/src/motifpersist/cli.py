"""Batch command-line interface.

Subcommands cover the pipeline stages end to end:

    synth      generate a synthetic panel CSV from a scenario file
    analyze    persistence curves, regime fits, motif ranking, node scores
    portfolio  motif-vs-random and vol-vs-persist experiments
    report     render figures from a run directory's artifacts

Each run writes its artifacts plus a manifest (config echo, seed, artifact
digests) into the output directory, which defaults to a timestamped folder
under $MOTIFPERSIST_OUTDIR (or the working directory).
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
from pathlib import Path

from . import __version__
from .errors import MotifPersistError
from .ingest import write_dropped_report
from .pipeline import (
    RunConfig,
    load_panel,
    run_analysis,
    run_portfolio_experiments,
    write_analysis_artifacts,
    write_manifest,
    write_portfolio_artifacts,
)
from .synth import generate, load_scenario, to_price_panel, write_prices_csv, write_returns_csv

_OUTDIR_ENV = "MOTIFPERSIST_OUTDIR"


def _default_outdir() -> Path:
    base = Path(os.environ.get(_OUTDIR_ENV, "."))
    stamp = dt.datetime.now().strftime("%Y%m%d-%H%M%S")
    return base / f"run-{stamp}"


def _add_analysis_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="input panel CSV")
    parser.add_argument(
        "--input-kind",
        choices=("prices", "returns"),
        default="prices",
        help="whether the input holds close prices or log-returns",
    )
    parser.add_argument("--window", type=int, default=126, help="correlation window (days)")
    parser.add_argument("--theta", type=float, default=46.0, help="exponential decay constant")
    parser.add_argument("--n-start", type=int, default=200, help="number of starting layers T")
    parser.add_argument("--max-shift", type=int, default=900, help="maximum shift tau")
    parser.add_argument("--top-k", type=int, default=10, help="motifs kept in the ranking")
    parser.add_argument("--min-segment", type=int, default=10, help="min points per fit segment")
    parser.add_argument(
        "--gain",
        choices=("raw", "abs", "square"),
        default="raw",
        help="edge-weight transform used by the graph filter",
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--threads", type=int, default=1, help="parallel layer workers")
    parser.add_argument("--outdir", type=Path, default=None, help="output directory")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        window=args.window,
        theta=args.theta,
        n_start=args.n_start,
        max_shift=args.max_shift,
        top_k=args.top_k,
        min_segment=args.min_segment,
        gain=args.gain,
        n_random=getattr(args, "n_random", 100_000),
        n_selections=getattr(args, "n_selections", 1000),
        selection_size=getattr(args, "selection_size", 25),
        min_eval_days=getattr(args, "min_eval_days", 60),
        seed=args.seed,
        threads=args.threads,
    )


def _prepare_outdir(args: argparse.Namespace) -> Path:
    outdir = args.outdir if args.outdir is not None else _default_outdir()
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _load(args: argparse.Namespace, outdir: Path):
    if not Path(args.input).exists():
        raise MotifPersistError(f"input file not found: {args.input}")
    panel, dropped = load_panel(args.input, args.input_kind)
    if dropped:
        write_dropped_report(dropped, outdir / "dropped_dates.csv")
    return panel


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = load_scenario(args.spec)
    panel = generate(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.emit == "returns":
        write_returns_csv(panel, out)
    else:
        write_prices_csv(to_price_panel(panel, spec), out)
    print(f"wrote {args.emit} panel: {out} "
          f"({spec.n_assets} assets x {spec.n_days} return days, seed {spec.seed})")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    outdir = _prepare_outdir(args)
    config = _config_from_args(args)
    panel = _load(args, outdir)
    result = run_analysis(panel, config)
    artifacts = write_analysis_artifacts(result, outdir, dump_layer0=args.dump_layer0)
    write_manifest(outdir, config, artifacts, extra={"stage": "analyze"})
    for kind in sorted(result.tau_plat):
        note = "" if kind in result.fits else " (fit unavailable; window fallback)"
        print(f"{kind}: tau_plat={result.tau_plat[kind]}{note}")
    print(f"artifacts written to {outdir}")
    return 0


def _cmd_portfolio(args: argparse.Namespace) -> int:
    outdir = _prepare_outdir(args)
    config = _config_from_args(args)
    panel = _load(args, outdir)
    result = run_analysis(panel, config)
    artifacts = write_analysis_artifacts(result, outdir, dump_layer0=False)
    motif_report, paired_report = run_portfolio_experiments(panel, result, config)
    artifacts.update(write_portfolio_artifacts(motif_report, paired_report, outdir))
    write_manifest(outdir, config, artifacts, extra={"stage": "portfolio"})
    print(
        f"motif portfolio volatility {motif_report.motif_volatility:.6g} "
        f"at percentile {motif_report.percentile:.1f}"
    )
    print(
        f"mean vol-weighted {paired_report.mean_vol:.6g}, "
        f"mean persistence-weighted {paired_report.mean_persist:.6g}, "
        f"persist wins {100 * paired_report.fraction_persist_wins:.1f}%"
    )
    print(f"artifacts written to {outdir}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    from .report import render_run  # import drags in matplotlib; keep it lazy

    written = render_run(Path(args.run))
    for path in written:
        print(f"figure: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motifpersist",
        description="Temporal motif persistence in filtered correlation networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic panel from a scenario file")
    p_synth.add_argument("--spec", required=True, help="scenario JSON file")
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.add_argument(
        "--emit",
        choices=("prices", "returns"),
        default="prices",
        help="emit reconstructed prices (loadable by analyze) or raw returns",
    )
    p_synth.set_defaults(func=_cmd_synth)

    p_analyze = sub.add_parser("analyze", help="persistence curves, fits, rankings")
    _add_analysis_args(p_analyze)
    p_analyze.add_argument(
        "--dump-layer0",
        action="store_true",
        help="also dump layer 0's graph JSON and correlation matrix CSV",
    )
    p_analyze.set_defaults(func=_cmd_analyze)

    p_port = sub.add_parser("portfolio", help="out-of-sample weighting experiments")
    _add_analysis_args(p_port)
    p_port.add_argument("--n-random", type=int, default=100_000,
                        help="random portfolios in the motif experiment")
    p_port.add_argument("--n-selections", type=int, default=1000,
                        help="asset selections in the paired experiment")
    p_port.add_argument("--selection-size", type=int, default=25,
                        help="assets per random selection")
    p_port.add_argument("--min-eval-days", type=int, default=60,
                        help="minimum out-of-sample days required")
    p_port.set_defaults(func=_cmd_portfolio)

    p_report = sub.add_parser("report", help="render figures from run artifacts")
    p_report.add_argument("--run", required=True, help="run directory with artifacts")
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MotifPersistError as exc:
        print(
            f"error [{args.command}/{type(exc).__name__}]: {exc}",
            file=sys.stderr,
        )
        return 2
    except OSError as exc:
        print(f"error [{args.command}/io]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
