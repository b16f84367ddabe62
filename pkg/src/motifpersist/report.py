"""Render figures from a run directory's artifacts.

Reads the delimited outputs written by the analyze/portfolio stages and
saves matplotlib PNGs next to them: log-log persistence curves with their
two fitted regimes, the motif-vs-random volatility histogram, and the
paired weighting-scheme comparison.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .errors import ConfigurationError

__all__ = ["render_run", "render_curves", "render_motif_vs_random", "render_vol_vs_persist"]

plt.rcParams.update(
    {
        "figure.figsize": (7.0, 4.5),
        "figure.dpi": 110,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 10,
    }
)

_KIND_COLORS = {
    "edge": "tab:blue",
    "triangle": "tab:orange",
    "face": "tab:green",
    "separator": "tab:red",
    "tetrahedron": "tab:purple",
}


def _read_curves(path: Path) -> dict[str, list[tuple[int, float]]]:
    curves: dict[str, list[tuple[int, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            curves.setdefault(row["kind"], []).append(
                (int(row["tau"]), float(row["value"]))
            )
    return curves


def render_curves(run_dir: Path) -> list[Path]:
    """One log-log decay figure per motif class, fit lines overlaid."""
    run_dir = Path(run_dir)
    curves_path = run_dir / "curves.csv"
    if not curves_path.exists():
        raise ConfigurationError(f"no curves.csv under {run_dir}; run analyze first")
    curves = _read_curves(curves_path)
    fits = {}
    fits_path = run_dir / "fits.json"
    if fits_path.exists():
        payload = json.loads(fits_path.read_text(encoding="utf-8"))
        fits = {f["kind"]: f for f in payload.get("fits", [])}

    written = []
    for kind, points in sorted(curves.items()):
        taus = [t for t, v in points if t >= 1 and v > 0]
        values = [v for t, v in points if t >= 1 and v > 0]
        fig, ax = plt.subplots()
        ax.loglog(
            taus,
            values,
            ".",
            ms=3,
            color=_KIND_COLORS.get(kind, "gray"),
            label=f"{kind} persistence",
        )
        fit = fits.get(kind)
        if fit:
            k = fit["tau_plat"]
            for lo, hi, slope_key in (
                (1, k, "exponent_decay"),
                (k, max(taus), "exponent_plateau"),
            ):
                slope = fit[slope_key]
                # anchor each regime line on the nearest measured point
                anchor_tau = min(taus, key=lambda t: abs(t - lo))
                anchor_val = values[taus.index(anchor_tau)]
                xs = [lo, hi]
                ys = [
                    anchor_val * math.exp(slope * (math.log(x) - math.log(anchor_tau)))
                    for x in xs
                ]
                ax.loglog(xs, ys, "-", lw=1.2, color="black", alpha=0.7)
            ax.axvline(k, color="gray", ls="--", lw=1, label=f"tau_plat = {k}")
            ax.set_title(
                f"{kind}: decay {fit['exponent_decay']:+.3f}, "
                f"plateau {fit['exponent_plateau']:+.3f}"
            )
        else:
            ax.set_title(f"{kind} persistence decay")
        ax.set_xlabel("shift tau (trading days)")
        ax.set_ylabel("average persistence")
        ax.legend(loc="lower left")
        out = run_dir / f"curve_{kind}.png"
        fig.tight_layout()
        fig.savefig(out)
        plt.close(fig)
        written.append(out)
    return written


def render_motif_vs_random(run_dir: Path) -> Path | None:
    run_dir = Path(run_dir)
    dist_path = run_dir / "motif_vs_random.csv"
    summary_path = run_dir / "motif_vs_random.json"
    if not (dist_path.exists() and summary_path.exists()):
        return None
    with open(dist_path, newline="", encoding="utf-8") as fh:
        vols = [float(row["volatility"]) for row in csv.DictReader(fh)]
    summary = json.loads(summary_path.read_text(encoding="utf-8"))

    fig, ax = plt.subplots()
    ax.hist(vols, bins=60, color="tab:blue", alpha=0.75, label="random portfolios")
    ax.axvline(
        summary["motif_volatility"],
        color="tab:red",
        lw=2,
        label=f"motif portfolio (pct {summary['percentile']:.1f})",
    )
    ax.axvline(summary["mean_vol"], color="tab:green", lw=2, label="random mean")
    ax.set_xlabel("out-of-sample volatility (per day)")
    ax.set_ylabel("portfolios")
    ax.set_title(
        f"Motif portfolio vs {summary['n_portfolios']} random portfolios "
        f"of {summary['portfolio_size']} stocks"
    )
    ax.legend()
    out = run_dir / "motif_vs_random.png"
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def render_vol_vs_persist(run_dir: Path) -> Path | None:
    run_dir = Path(run_dir)
    pairs_path = run_dir / "vol_vs_persist.csv"
    summary_path = run_dir / "vol_vs_persist.json"
    if not (pairs_path.exists() and summary_path.exists()):
        return None
    vol, per = [], []
    with open(pairs_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            vol.append(float(row["vol_weighted"]))
            per.append(float(row["persist_weighted"]))
    summary = json.loads(summary_path.read_text(encoding="utf-8"))

    fig, ax = plt.subplots()
    ax.hist(vol, bins=50, alpha=0.6, color="tab:blue", label="VOL (1/sigma)")
    ax.hist(per, bins=50, alpha=0.6, color="tab:orange", label="PERSIST (1/score)")
    ax.axvline(summary["mean_vol"], color="tab:blue", lw=2)
    ax.axvline(summary["mean_persist"], color="tab:orange", lw=2)
    ax.set_xlabel("out-of-sample volatility (per day)")
    ax.set_ylabel("selections")
    ax.set_title(
        f"Paired weighting comparison over {summary['n_portfolios']} selections "
        f"(persist wins {100 * summary['fraction_persist_wins']:.1f}%)"
    )
    ax.legend()
    out = run_dir / "vol_vs_persist.png"
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def render_run(run_dir: Path) -> list[Path]:
    """Render every figure the run directory's artifacts support."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ConfigurationError(f"run directory {run_dir} does not exist")
    written = []
    if (run_dir / "curves.csv").exists():
        written.extend(render_curves(run_dir))
    for renderer in (render_motif_vs_random, render_vol_vs_persist):
        out = renderer(run_dir)
        if out is not None:
            written.append(out)
    if not written:
        raise ConfigurationError(
            f"no renderable artifacts under {run_dir}; run analyze/portfolio first"
        )
    return written
