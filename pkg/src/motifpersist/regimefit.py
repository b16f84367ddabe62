"""Two-regime power-law fitting of persistence decay curves.

Persistence curves decay as a power law (a line in log-log space) and then
flatten into a second, slower power-law regime. The transition point is
found by exhaustive search: for every admissible breakpoint the curve is
split into [1, k] and [k, max_shift] (the breakpoint belongs to both
segments), each side gets an OLS line on (ln tau, ln value), and the
breakpoint minimizing the unweighted average of the two mean squared
errors wins. Ties go to the smallest breakpoint.

tau = 0 is always excluded (log undefined) and zero persistence values are
dropped with a warning; both sides of the search re-use the same
``fit_power_law`` so re-evaluating any breakpoint reproduces its stored
MSE exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ParameterError, ValidationError
from .persistence import PersistenceCurve

__all__ = [
    "PowerLawFit",
    "TwoRegimeFit",
    "fit_power_law",
    "fit_two_regimes",
    "adjusted_triangle_exponent",
]


@dataclass(frozen=True)
class PowerLawFit:
    """OLS line on (ln tau, ln value): exponent is the slope."""

    exponent: float
    log_intercept: float
    mse: float
    tau_lo: float
    tau_hi: float
    n_points: int


@dataclass(frozen=True)
class TwoRegimeFit:
    decay: PowerLawFit
    plateau: PowerLawFit
    tau_plat: int
    combined_mse: float


def _usable_points(taus, values, tau_range, on_nonpositive):
    taus = np.asarray(taus, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if taus.shape != values.shape:
        raise ParameterError("tau and value arrays must have the same length")
    keep = (taus >= 1.0) & np.isfinite(values)
    if tau_range is not None:
        lo, hi = tau_range
        keep &= (taus >= lo) & (taus <= hi)
    bad = keep & (values <= 0.0)
    if np.any(bad):
        if on_nonpositive == "drop":
            warnings.warn(
                f"dropping {int(bad.sum())} non-positive persistence value(s) "
                "from log-log fit",
                stacklevel=3,
            )
            keep &= values > 0.0
        else:
            offenders = taus[bad][:3]
            raise ValidationError(
                f"log-log fit requires positive values; offending tau(s): "
                f"{offenders.tolist()}"
            )
    return taus[keep], values[keep]


def fit_power_law(
    taus,
    values,
    tau_range: tuple[float, float] | None = None,
    on_nonpositive: str = "error",
) -> PowerLawFit:
    """OLS power-law fit over points with tau >= 1 inside ``tau_range``."""
    t, v = _usable_points(taus, values, tau_range, on_nonpositive)
    if t.shape[0] < 2:
        raise InsufficientDataError(
            f"power-law fit needs at least 2 usable points, got {t.shape[0]}"
        )
    x = np.log(t)
    y = np.log(v)
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise InsufficientDataError("all tau values coincide; slope undefined")
    slope = float(xc @ (y - y.mean())) / denom
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    return PowerLawFit(
        exponent=slope,
        log_intercept=intercept,
        mse=float(np.mean(residuals * residuals)),
        tau_lo=float(t[0]),
        tau_hi=float(t[-1]),
        n_points=int(t.shape[0]),
    )


def fit_two_regimes(
    curve: PersistenceCurve, min_segment: int = 10
) -> TwoRegimeFit:
    """Exhaustive minimum-MSE breakpoint search over a persistence curve.

    Degenerate short segments produce zero-MSE artifacts, hence the
    ``min_segment`` floor on usable points per side.
    """
    if min_segment < 2:
        raise ParameterError(f"min_segment must be at least 2, got {min_segment}")
    taus, values = _usable_points(curve.taus, curve.values, None, "drop")
    n = taus.shape[0]
    if n < 2 * min_segment:
        raise InsufficientDataError(
            f"two-regime fit needs at least {2 * min_segment} usable points "
            f"(min_segment={min_segment}); curve has {n}"
        )

    best: TwoRegimeFit | None = None
    for i in range(min_segment - 1, n - min_segment + 1):
        left = fit_power_law(taus[: i + 1], values[: i + 1])
        right = fit_power_law(taus[i:], values[i:])
        combined = (left.mse + right.mse) / 2.0
        if best is None or combined < best.combined_mse:
            best = TwoRegimeFit(
                decay=left,
                plateau=right,
                tau_plat=int(taus[i]),
                combined_mse=combined,
            )
    assert best is not None
    if abs(best.plateau.exponent) > abs(best.decay.exponent):
        warnings.warn(
            "plateau regime decays faster than the initial regime "
            f"({best.plateau.exponent:+.4f} vs {best.decay.exponent:+.4f}); "
            "the curve may not have two well-separated regimes",
            stacklevel=2,
        )
    return best


def adjusted_triangle_exponent(triangle_exponent: float) -> float:
    """Decay exponent adjusted for simultaneous persistence of 3 edges.

    Under edge independence, a 3-edge motif decays with triple the
    single-edge exponent, so dividing by 3 expresses the motif's decay on
    the per-edge scale.
    """
    return triangle_exponent / 3.0
