"""Synthetic return panels with known ground truth.

Panels are Gaussian with block correlation structure: each day's returns
are L @ z with z i.i.d. standard normal and L the Cholesky factor of the
day's correlation matrix, scaled by the base volatility. Blocks can be
restricted to an active day range, which switches the correlation regime
at known breakpoints.

The Gaussian choice is deliberate: the Kendall tau of a bivariate Gaussian
pair with correlation rho is (2/pi)·arcsin(rho), which gives a closed-form
oracle for end-to-end correlation tests.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ScenarioError
from .ingest import PricePanel, ReturnPanel

__all__ = [
    "BlockSpec",
    "ScenarioSpec",
    "load_scenario",
    "save_scenario",
    "generate",
    "ground_truth_motifs",
    "to_price_panel",
    "write_prices_csv",
    "write_returns_csv",
]


@dataclass(frozen=True)
class BlockSpec:
    """A set of assets sharing pairwise correlation rho over an active range."""

    members: tuple[int, ...]
    rho: float
    active: tuple[int, int] | None = None  # [start, stop) in return days

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members)))


@dataclass(frozen=True)
class ScenarioSpec:
    n_assets: int
    n_days: int
    blocks: tuple[BlockSpec, ...] = ()
    base_vol: float = 0.01
    seed: int = 0
    start_date: str = "2014-01-03"
    start_price: float = 100.0
    asset_prefix: str = "A"

    def asset_names(self) -> tuple[str, ...]:
        width = max(3, len(str(self.n_assets - 1)))
        return tuple(f"{self.asset_prefix}{i:0{width}d}" for i in range(self.n_assets))

    def validate(self) -> None:
        if self.n_assets < 1 or self.n_days < 2:
            raise ScenarioError("scenario needs at least 1 asset and 2 days")
        if not 0 < self.base_vol < 1:
            raise ScenarioError(f"base_vol must be in (0, 1), got {self.base_vol}")
        for block in self.blocks:
            if len(block.members) < 2:
                raise ScenarioError(f"block {block.members} has fewer than 2 members")
            if min(block.members) < 0 or max(block.members) >= self.n_assets:
                raise ScenarioError(f"block {block.members} exceeds asset range")
            if not -1.0 < block.rho < 1.0:
                raise ScenarioError(f"block correlation {block.rho} outside (-1, 1)")
            if block.active is not None:
                lo, hi = block.active
                if not 0 <= lo < hi <= self.n_days:
                    raise ScenarioError(
                        f"block active range {block.active} outside [0, {self.n_days})"
                    )


def load_scenario(path) -> ScenarioSpec:
    """Read a scenario spec from its JSON file."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        blocks = tuple(
            BlockSpec(
                members=tuple(b["members"]),
                rho=float(b["rho"]),
                active=tuple(b["active"]) if b.get("active") else None,
            )
            for b in raw.get("blocks", ())
        )
        spec = ScenarioSpec(
            n_assets=int(raw["n_assets"]),
            n_days=int(raw["n_days"]),
            blocks=blocks,
            base_vol=float(raw.get("base_vol", 0.01)),
            seed=int(raw.get("seed", 0)),
            start_date=str(raw.get("start_date", "2014-01-03")),
            start_price=float(raw.get("start_price", 100.0)),
            asset_prefix=str(raw.get("asset_prefix", "A")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario file {path}: {exc}") from exc
    spec.validate()
    return spec


def save_scenario(spec: ScenarioSpec, path) -> None:
    payload = {
        "n_assets": spec.n_assets,
        "n_days": spec.n_days,
        "base_vol": spec.base_vol,
        "seed": spec.seed,
        "start_date": spec.start_date,
        "start_price": spec.start_price,
        "asset_prefix": spec.asset_prefix,
        "blocks": [
            {
                "members": list(b.members),
                "rho": b.rho,
                "active": list(b.active) if b.active else None,
            }
            for b in spec.blocks
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _trading_dates(start: str, count: int) -> tuple[str, ...]:
    """``count`` consecutive weekdays starting at (or after) ``start``."""
    try:
        day = dt.date.fromisoformat(start)
    except ValueError as exc:
        raise ScenarioError(f"invalid start date {start!r}") from exc
    dates = []
    while len(dates) < count:
        if day.weekday() < 5:
            dates.append(day.isoformat())
        day += dt.timedelta(days=1)
    return tuple(dates)


def _segment_breaks(spec: ScenarioSpec) -> list[int]:
    cuts = {0, spec.n_days}
    for block in spec.blocks:
        if block.active is not None:
            cuts.update(block.active)
    return sorted(cuts)


def _correlation_for(spec: ScenarioSpec, day: int) -> np.ndarray:
    corr = np.eye(spec.n_assets)
    for block in spec.blocks:  # overlapping blocks: later blocks win
        if block.active is not None and not block.active[0] <= day < block.active[1]:
            continue
        for a, b in combinations(block.members, 2):
            corr[a, b] = corr[b, a] = block.rho
    return corr


def generate(spec: ScenarioSpec) -> ReturnPanel:
    """Draw the panel; identical spec (and seed) gives identical bits."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    shocks = rng.standard_normal((spec.n_days, spec.n_assets))
    values = np.empty_like(shocks)
    breaks = _segment_breaks(spec)
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        corr = _correlation_for(spec, lo)
        try:
            chol = np.linalg.cholesky(corr)
        except np.linalg.LinAlgError:
            raise ScenarioError(
                f"correlation structure of days [{lo}, {hi}) is not positive definite"
            ) from None
        values[lo:hi] = shocks[lo:hi] @ chol.T
    values *= spec.base_vol
    dates = _trading_dates(spec.start_date, spec.n_days + 1)[1:]
    return ReturnPanel(dates, spec.asset_names(), values)


def ground_truth_motifs(spec: ScenarioSpec) -> dict[str, list[tuple[int, ...]]]:
    """Expected persistent triangles/tetrahedra: all triples and quadruples
    inside each block of size >= 3 that is active for the whole panel."""
    triangles: list[tuple[int, ...]] = []
    tetrahedra: list[tuple[int, ...]] = []
    for block in spec.blocks:
        permanent = block.active is None or block.active == (0, spec.n_days)
        if not permanent or len(block.members) < 3:
            continue
        triangles.extend(combinations(block.members, 3))
        tetrahedra.extend(combinations(block.members, 4))
    return {"triangles": sorted(triangles), "tetrahedra": sorted(tetrahedra)}


def to_price_panel(returns: ReturnPanel, spec: ScenarioSpec) -> PricePanel:
    """Reconstruct a strictly positive price path whose log-returns are the panel."""
    log_prices = np.concatenate(
        [np.zeros((1, returns.n_assets)), np.cumsum(returns.values, axis=0)]
    )
    prices = spec.start_price * np.exp(log_prices)
    dates = _trading_dates(spec.start_date, returns.n_days + 1)
    return PricePanel(dates, returns.assets, prices)


def _write_long_csv(header: str, dates, assets, values, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i, date in enumerate(dates):
            for j, asset in enumerate(assets):
                fh.write(f"{date},{asset},{float(values[i, j])!r}\n")


def write_prices_csv(panel: PricePanel, path) -> None:
    _write_long_csv("date,asset,close", panel.dates, panel.assets, panel.values, path)


def write_returns_csv(panel: ReturnPanel, path) -> None:
    _write_long_csv("date,asset,return", panel.dates, panel.assets, panel.values, path)
