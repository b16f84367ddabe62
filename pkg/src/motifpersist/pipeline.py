"""End-to-end orchestration: panel -> layers -> curves -> fits -> reports.

This module is the single place that wires the analysis stages together and
serializes their artifacts, so the CLI stays thin and tests can drive the
same code paths in memory. All artifact writers are deterministic: floats
are serialized with shortest round-trip repr and no timestamps enter any
report, so identical configuration and seed reproduce identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import CorrelationMatrix, write_correlation_csv
from .errors import ConfigurationError, MotifPersistError
from .ingest import ReturnPanel, load_prices, load_returns, log_returns
from .persistence import (
    LayerConfig,
    LayerSeries,
    Motif,
    NodePersistence,
    PersistenceCurve,
    build_layer_series,
    node_persistence,
    overlap_with_top_correlated,
    persistence_curve,
    rank_motifs,
)
from .portfolio import (
    EvaluationSplit,
    MotifVsRandomReport,
    VolVsPersistReport,
    run_experiment_motif_vs_random,
    run_experiment_vol_vs_persist,
)
from .regimefit import TwoRegimeFit, fit_two_regimes

__all__ = [
    "RunConfig",
    "AnalysisResult",
    "load_panel",
    "run_analysis",
    "make_split",
    "run_portfolio_experiments",
    "write_analysis_artifacts",
    "write_portfolio_artifacts",
    "write_manifest",
]

CURVE_KINDS = ("edge", "triangle", "face", "separator", "tetrahedron")


@dataclass(frozen=True)
class RunConfig:
    """Batch-run parameters; defaults follow the reference configuration."""

    window: int = 126
    theta: float = 46.0
    n_start: int = 200
    max_shift: int = 900
    top_k: int = 10
    min_segment: int = 10
    gain: str = "raw"
    n_random: int = 100_000
    n_selections: int = 1000
    selection_size: int = 25
    min_eval_days: int = 60
    seed: int = 0
    threads: int = 1

    def layer_config(self) -> LayerConfig:
        return LayerConfig(
            window=self.window,
            theta=self.theta,
            n_start=self.n_start,
            max_shift=self.max_shift,
            gain=self.gain,
        )


@dataclass(frozen=True)
class AnalysisResult:
    config: RunConfig
    series: LayerSeries = field(repr=False)
    curves: dict[str, PersistenceCurve] = field(repr=False)
    fits: dict[str, TwoRegimeFit] = field(repr=False)
    fit_errors: dict[str, str]
    tau_plat: dict[str, int]
    ranking: list[tuple[Motif, float]]
    node_scores: NodePersistence
    overlaps: list[int]


def load_panel(path, kind: str = "prices"):
    """Load an input CSV as a ReturnPanel (plus the dropped-date report)."""
    if kind == "prices":
        panel, dropped = load_prices(path)
        return log_returns(panel), dropped
    if kind == "returns":
        return load_returns(path)
    raise ConfigurationError(f"unknown input kind {kind!r}")


def _validate_panel(panel: ReturnPanel, config: RunConfig) -> None:
    if panel.n_assets >= config.window:
        raise ConfigurationError(
            f"asset count must stay below the correlation window "
            f"(need N < window, got N={panel.n_assets}, window={config.window}); "
            "widen --window or reduce the universe"
        )


def run_analysis(panel: ReturnPanel, config: RunConfig) -> AnalysisResult:
    """Layer series, persistence curves, regime fits, ranking and node scores.

    Each motif class gets its own two-regime fit; classes whose curve
    cannot support a fit (too few positive points on a degenerate panel)
    fall back to tau_plat = window, the upper end of the expected
    transition band, and the failure is recorded in the result.
    """
    _validate_panel(panel, config)
    series = build_layer_series(panel, config.layer_config(), threads=config.threads)

    curves: dict[str, PersistenceCurve] = {}
    fits: dict[str, TwoRegimeFit] = {}
    fit_errors: dict[str, str] = {}
    tau_plat: dict[str, int] = {}
    for kind in CURVE_KINDS:
        try:
            curves[kind] = persistence_curve(series, kind)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                fits[kind] = fit_two_regimes(curves[kind], config.min_segment)
            tau_plat[kind] = fits[kind].tau_plat
        except MotifPersistError as exc:
            fit_errors[kind] = str(exc)
            # expected transition band tops out at the window length, but the
            # fallback must stay a valid plateau start below max_shift
            tau_plat[kind] = min(config.window, config.max_shift // 2)

    ranking = rank_motifs(series, "triangle", tau_plat["triangle"], config.top_k)
    scores = node_persistence(series, tau_plat["tetrahedron"])
    overlaps = [
        overlap_with_top_correlated(
            series, t, config.top_k, tau_plat["triangle"], top_motifs=ranking
        )
        for t in range(series.n_start)
    ]
    return AnalysisResult(
        config=config,
        series=series,
        curves=curves,
        fits=fits,
        fit_errors=fit_errors,
        tau_plat=tau_plat,
        ranking=ranking,
        node_scores=scores,
        overlaps=overlaps,
    )


def make_split(panel: ReturnPanel, config: RunConfig) -> EvaluationSplit:
    """Estimation period = every day any layer window touches; rest evaluates."""
    estimation_end = config.window - 1 + config.n_start - 1 + config.max_shift
    split = EvaluationSplit(estimation_end, panel.n_days)
    if split.n_evaluation_days < config.min_eval_days:
        raise ConfigurationError(
            f"only {split.n_evaluation_days} evaluation days remain after the "
            f"estimation period (rows 0..{estimation_end}); "
            f"need at least {config.min_eval_days}"
        )
    return split


def run_portfolio_experiments(
    panel: ReturnPanel, analysis: AnalysisResult, config: RunConfig
) -> tuple[MotifVsRandomReport, VolVsPersistReport]:
    split = make_split(panel, config)
    motif_report = run_experiment_motif_vs_random(
        panel, analysis.ranking, split, config.n_random, config.seed
    )
    paired_report = run_experiment_vol_vs_persist(
        panel,
        analysis.node_scores,
        split,
        config.n_selections,
        config.selection_size,
        config.seed,
    )
    return motif_report, paired_report


# ---------------------------------------------------------------------------
# artifact serialization


def _write_curves_csv(curves: dict[str, PersistenceCurve], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "tau", "value"])
        for kind in sorted(curves):
            curve = curves[kind]
            for tau, value in zip(curve.taus, curve.values):
                writer.writerow([kind, int(tau), repr(float(value))])


def _fit_payload(kind: str, fit: TwoRegimeFit) -> dict:
    return {
        "kind": kind,
        "exponent_decay": fit.decay.exponent,
        "exponent_plateau": fit.plateau.exponent,
        "tau_plat": fit.tau_plat,
        "mse_decay": fit.decay.mse,
        "mse_plateau": fit.plateau.mse,
        "combined_mse": fit.combined_mse,
    }


def write_analysis_artifacts(
    result: AnalysisResult, outdir: Path, dump_layer0: bool = False
) -> dict[str, Path]:
    """Write all analyze-stage artifacts; returns name -> path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    series = result.series
    paths: dict[str, Path] = {}

    paths["curves"] = outdir / "curves.csv"
    _write_curves_csv(result.curves, paths["curves"])

    paths["fits"] = outdir / "fits.json"
    payload = {
        "fits": [
            _fit_payload(kind, result.fits[kind])
            for kind in sorted(result.fits)
        ],
        "fit_errors": dict(sorted(result.fit_errors.items())),
        "tau_plat": dict(sorted(result.tau_plat.items())),
    }
    paths["fits"].write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    paths["ranking"] = outdir / "ranking.json"
    entries = [
        {
            "vertices": [series.assets[v] for v in motif.vertices],
            "kind": motif.kind,
            "plateau_persistence": score,
        }
        for motif, score in result.ranking
    ]
    paths["ranking"].write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")

    paths["node_persistence"] = outdir / "node_persistence.csv"
    with open(paths["node_persistence"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["asset", "score"])
        for asset in series.assets:
            writer.writerow([asset, repr(result.node_scores.scores[asset])])

    paths["overlap"] = outdir / "overlap.csv"
    with open(paths["overlap"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layer", "overlap", "k"])
        for t, overlap in enumerate(result.overlaps):
            writer.writerow([t, overlap, result.config.top_k])

    if dump_layer0:
        paths["graph_layer0"] = outdir / "graph_layer0.json"
        catalog = series.catalogs[0]
        names = series.assets
        dump = {
            "edges": [[names[a] for a in e] for e in sorted(catalog.edges)],
            "tetrahedra": [[names[a] for a in t] for t in sorted(catalog.tetrahedra)],
            "separators": [[names[a] for a in s] for s in sorted(catalog.separators)],
            "faces": [[names[a] for a in f] for f in sorted(catalog.faces)],
        }
        paths["graph_layer0"].write_text(
            json.dumps(dump, indent=2) + "\n", encoding="utf-8"
        )

        paths["correlation_layer0"] = outdir / "correlation_layer0.csv"
        matrix = CorrelationMatrix(series.assets, series.start_matrices[0])
        write_correlation_csv(matrix, paths["correlation_layer0"])

    return paths


def write_portfolio_artifacts(
    motif_report: MotifVsRandomReport,
    paired_report: VolVsPersistReport,
    outdir: Path,
) -> dict[str, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    paths["motif_vs_random_distribution"] = outdir / "motif_vs_random.csv"
    with open(paths["motif_vs_random_distribution"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["portfolio_id", "volatility"])
        for i, vol in enumerate(motif_report.volatilities):
            writer.writerow([i, repr(float(vol))])

    paths["motif_vs_random_summary"] = outdir / "motif_vs_random.json"
    summary = {
        "experiment": "motif_vs_random",
        "seed": motif_report.seed,
        "n_portfolios": motif_report.n_portfolios,
        "portfolio_size": motif_report.size,
        "motif_assets": list(motif_report.motif_assets),
        "motif_volatility": motif_report.motif_volatility,
        "percentile": motif_report.percentile,
        "mean_vol": motif_report.mean_volatility,
        "median_vol": motif_report.median_volatility,
    }
    paths["motif_vs_random_summary"].write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )

    paths["vol_vs_persist_pairs"] = outdir / "vol_vs_persist.csv"
    with open(paths["vol_vs_persist_pairs"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["selection_id", "vol_weighted", "persist_weighted"])
        for i, (v, p) in enumerate(
            zip(paired_report.vol_weighted, paired_report.persist_weighted)
        ):
            writer.writerow([i, repr(float(v)), repr(float(p))])

    paths["vol_vs_persist_summary"] = outdir / "vol_vs_persist.json"
    summary = {
        "experiment": "vol_vs_persist",
        "seed": paired_report.seed,
        "n_portfolios": paired_report.n_selections,
        "selection_size": paired_report.size,
        "mean_vol": paired_report.mean_vol,
        "mean_persist": paired_report.mean_persist,
        "std_vol": paired_report.std_vol,
        "std_persist": paired_report.std_persist,
        "fraction_persist_wins": paired_report.fraction_persist_wins,
        "welch_p_value": paired_report.p_value,
    }
    paths["vol_vs_persist_summary"].write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    return paths


def write_manifest(
    outdir: Path, config: RunConfig, artifacts: dict[str, Path], extra: dict | None = None
) -> Path:
    """Config echo + artifact digests; enough to reproduce every number."""
    outdir = Path(outdir)
    digests = {}
    for name in sorted(artifacts):
        payload = Path(artifacts[name]).read_bytes()
        digests[str(Path(artifacts[name]).name)] = hashlib.sha256(payload).hexdigest()
    echo = asdict(config)
    echo.pop("threads")  # execution detail; results are thread-count independent
    manifest = {
        "package_version": __version__,
        "config": echo,
        "seed": config.seed,
        "artifacts": digests,
    }
    if extra:
        manifest.update(extra)
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path
