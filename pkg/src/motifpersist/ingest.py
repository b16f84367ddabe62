"""Price loading, validation, alignment, and log-return panels.

Input is long-format CSV with header ``date,asset,close`` (ISO-8601 dates).
Assets are aligned on the intersection of their trading dates: any date
missing for at least one asset is dropped and reported, never interpolated,
so no comovement is fabricated between assets with different calendars.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BoundsError, InsufficientDataError, ParseError, ValidationError

__all__ = [
    "PricePanel",
    "ReturnPanel",
    "ReturnWindow",
    "DroppedDate",
    "LoadedPrices",
    "load_prices",
    "load_returns",
    "write_dropped_report",
    "log_returns",
    "slice_window",
]


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PricePanel:
    """Aligned close prices: rows are dates, columns are assets."""

    dates: tuple[str, ...]
    assets: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.shape != (len(self.dates), len(self.assets)):
            raise ValidationError(
                f"price matrix shape {self.values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if list(self.dates) != sorted(set(self.dates)):
            raise ValidationError("dates must be strictly increasing without duplicates")
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0.0):
            raise ValidationError("all prices must be finite and strictly positive")

    @property
    def n_days(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.assets)


@dataclass(frozen=True)
class ReturnPanel:
    """Daily log-returns; row t is ln(price[t+1]) - ln(price[t])."""

    dates: tuple[str, ...]
    assets: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.shape != (len(self.dates), len(self.assets)):
            raise ValidationError(
                f"return matrix shape {self.values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("returns must be finite")

    @property
    def n_days(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.assets)


@dataclass(frozen=True)
class ReturnWindow:
    """A contiguous slice of a ReturnPanel ending at ``end_index``."""

    end_index: int
    length: int
    assets: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.shape != (self.length, len(self.assets)):
            raise ValidationError("window slice shape does not match declared length")
        if self.length < len(self.assets):
            raise ValidationError(
                f"window length {self.length} shorter than asset count "
                f"{len(self.assets)}; correlation matrix would be ill-conditioned"
            )

    @property
    def n_assets(self) -> int:
        return len(self.assets)


class DroppedDate(NamedTuple):
    date: str
    reason: str


class LoadedPrices(NamedTuple):
    panel: PricePanel
    dropped: list[DroppedDate]


def _parse_iso_date(text: str, line: int) -> str:
    try:
        return dt.date.fromisoformat(text).isoformat()
    except ValueError:
        raise ParseError(f"invalid ISO-8601 date {text!r}", line) from None


def _load_long(path, value_column: str, check_value):
    """Parse a long-format CSV and align assets on their common dates."""
    observations: dict[str, dict[str, float]] = {}
    all_dates: set[str] = set()

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        expected = ["date", "asset", value_column]
        if [h.strip().lower() for h in header] != expected:
            raise ParseError(
                f"expected header '{','.join(expected)}', got {header!r}", 1
            )

        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line)
            date = _parse_iso_date(row[0].strip(), line)
            asset = row[1].strip()
            if not asset:
                raise ParseError("empty asset identifier", line)
            try:
                value = float(row[2])
            except ValueError:
                raise ParseError(
                    f"invalid {value_column} value {row[2]!r}", line
                ) from None
            check_value(value, date, asset)
            per_asset = observations.setdefault(asset, {})
            if date in per_asset:
                raise ParseError(f"duplicate observation for ({date}, {asset})", line)
            per_asset[date] = value
            all_dates.add(date)

    if not observations:
        raise InsufficientDataError("no observations in file")

    assets = tuple(sorted(observations))
    common = set.intersection(*(set(observations[a]) for a in assets))
    if len(common) < 2:
        raise InsufficientDataError(
            f"only {len(common)} dates are common to all {len(assets)} assets; "
            "need at least 2"
        )

    dropped = []
    for date in sorted(all_dates - common):
        missing = [a for a in assets if date not in observations[a]]
        dropped.append(DroppedDate(date, "missing " + ",".join(missing)))

    dates = tuple(sorted(common))
    values = np.empty((len(dates), len(assets)))
    for j, asset in enumerate(assets):
        series = observations[asset]
        values[:, j] = [series[d] for d in dates]
    return dates, assets, values, dropped


def load_prices(path) -> LoadedPrices:
    """Read a long-format ``date,asset,close`` CSV into an aligned PricePanel.

    Only dates present for every asset are kept; dropped dates are returned
    together with the asset(s) that were missing. Assets are ordered
    lexicographically so matrix indexing is deterministic across runs.
    """

    def check_price(value, date, asset):
        if not np.isfinite(value) or value <= 0.0:
            raise ValidationError(f"non-positive price {value!r} for ({date}, {asset})")

    dates, assets, values, dropped = _load_long(path, "close", check_price)
    return LoadedPrices(PricePanel(dates, assets, values), dropped)


def load_returns(path) -> tuple[ReturnPanel, list[DroppedDate]]:
    """Read a ``date,asset,return`` CSV (already log-returns) directly."""

    def check_return(value, date, asset):
        if not np.isfinite(value):
            raise ValidationError(f"non-finite return {value!r} for ({date}, {asset})")

    dates, assets, values, dropped = _load_long(path, "return", check_return)
    return ReturnPanel(dates, assets, values), dropped


def write_dropped_report(dropped: list[DroppedDate], path) -> None:
    """Write the dropped-date report as CSV ``date,reason``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "reason"])
        writer.writerows(dropped)


def log_returns(panel: PricePanel) -> ReturnPanel:
    """Daily log-returns of a price panel; row t labels the later date."""
    values = np.diff(np.log(panel.values), axis=0)
    return ReturnPanel(panel.dates[1:], panel.assets, values)


def slice_window(returns: ReturnPanel, end_index: int, length: int) -> ReturnWindow:
    """Rows ``[end_index - length + 1, end_index]`` of the panel, in order."""
    if length < 2:
        raise BoundsError(f"window length must be at least 2, got {length}")
    start = end_index - length + 1
    if start < 0 or end_index >= returns.n_days:
        raise BoundsError(
            f"window rows [{start}, {end_index}] fall outside the panel "
            f"(0..{returns.n_days - 1})"
        )
    values = returns.values[start : end_index + 1]
    return ReturnWindow(end_index, length, returns.assets, values)
