"""Out-of-sample portfolio construction and the two weighting experiments.

Everything here is long-only and evaluated strictly after the estimation
period: portfolio volatility is the sample standard deviation of the
weighted return series over evaluation days only, so both experiments are
predictive rather than descriptive.

Experiment 1 compares the portfolio holding all stocks of the most
persistent motifs against equal-weight random portfolios of the same size.
Experiment 2 draws random asset selections and weights each one twice: by
inverse estimation-period volatility and by inverse node persistence,
giving a paired volatility comparison. Random draws use one derived seed
per portfolio index (master seed + index), so reports reproduce exactly
regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    DegenerateAssetError,
    InsufficientDataError,
    ParameterError,
    SplitError,
    ValidationError,
)
from .ingest import ReturnPanel
from .persistence import Motif, NodePersistence

__all__ = [
    "Portfolio",
    "EvaluationSplit",
    "MotifVsRandomReport",
    "VolVsPersistReport",
    "motif_portfolio",
    "sample_random_portfolio",
    "weights_inverse_volatility",
    "weights_inverse_persistence",
    "out_of_sample_volatility",
    "run_experiment_motif_vs_random",
    "run_experiment_vol_vs_persist",
]

_EVAL_CHUNK = 2048


@dataclass(frozen=True)
class Portfolio:
    """Long-only holdings on the unit simplex."""

    holdings: dict[str, float]

    def __post_init__(self):
        if not self.holdings:
            raise ValidationError("portfolio has no holdings")
        weights = np.array(list(self.holdings.values()))
        if np.any(weights < 0.0):
            raise ValidationError("portfolio weights must be non-negative")
        if abs(float(weights.sum()) - 1.0) > 1e-12:
            raise ValidationError(
                f"portfolio weights sum to {weights.sum()!r}, expected 1"
            )

    @property
    def assets(self) -> tuple[str, ...]:
        return tuple(self.holdings)


@dataclass(frozen=True)
class EvaluationSplit:
    """Estimation rows [0, estimation_end]; evaluation rows after that."""

    estimation_end: int
    n_days: int

    def __post_init__(self):
        if not 0 <= self.estimation_end < self.n_days - 1:
            raise SplitError(
                f"estimation ends at row {self.estimation_end} of {self.n_days}; "
                "evaluation range is empty"
            )

    @property
    def evaluation_rows(self) -> slice:
        return slice(self.estimation_end + 1, self.n_days)

    @property
    def n_evaluation_days(self) -> int:
        return self.n_days - self.estimation_end - 1


def _equal_weight(assets) -> Portfolio:
    share = 1.0 / len(assets)
    return Portfolio({a: share for a in assets})


def motif_portfolio(top: list[tuple[Motif, float] | Motif], assets) -> Portfolio:
    """Equal weights over the deduplicated union of the motifs' vertices."""
    if not top:
        raise ParameterError("motif list is empty")
    members: set[int] = set()
    for entry in top:
        motif = entry[0] if isinstance(entry, tuple) else entry
        members.update(motif.vertices)
    return _equal_weight([assets[v] for v in sorted(members)])


def sample_random_portfolio(universe, size: int, seed: int) -> Portfolio:
    """Uniform equal-weight selection without replacement; fixed per seed."""
    universe = list(universe)
    if not 1 <= size <= len(universe):
        raise ParameterError(
            f"selection size {size} outside universe of {len(universe)} assets"
        )
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(universe), size=size, replace=False)
    return _equal_weight([universe[i] for i in sorted(picked)])


def _estimation_sigmas(returns: ReturnPanel, assets, estimation_end: int) -> np.ndarray:
    if estimation_end < 1:
        raise InsufficientDataError("volatility estimation needs at least 2 days")
    columns = [returns.assets.index(a) for a in assets]
    window = returns.values[: estimation_end + 1, columns]
    sigmas = np.std(window, axis=0, ddof=1)
    for name, sigma in zip(assets, sigmas):
        if sigma == 0.0:
            raise DegenerateAssetError(f"asset {name} has zero volatility")
    return sigmas


def weights_inverse_volatility(
    returns: ReturnPanel, assets, estimation_end: int
) -> Portfolio:
    """Weights proportional to 1/sigma over the estimation rows."""
    sigmas = _estimation_sigmas(returns, assets, estimation_end)
    inverse = 1.0 / sigmas
    weights = inverse / inverse.sum()
    return Portfolio(dict(zip(assets, weights.tolist())))


def weights_inverse_persistence(scores: NodePersistence | dict, assets) -> Portfolio:
    """Weights proportional to 1/persistence score.

    A zero-score asset is capped at the weight implied by the smallest
    positive score in the selection, so it behaves like the least
    persistent scored asset instead of dividing by zero. If every score is
    zero the portfolio degenerates to equal weights.
    """
    table = scores.scores if isinstance(scores, NodePersistence) else scores
    values = []
    for name in assets:
        if name not in table:
            raise ValidationError(f"no persistence score for asset {name}")
        score = table[name]
        if score < 0.0:
            raise ValidationError(f"negative persistence score for asset {name}")
        values.append(score)
    positive = [v for v in values if v > 0.0]
    if not positive:
        return _equal_weight(assets)
    floor = min(positive)
    inverse = np.array([1.0 / max(v, floor) for v in values])
    weights = inverse / inverse.sum()
    return Portfolio(dict(zip(assets, weights.tolist())))


def out_of_sample_volatility(
    portfolio: Portfolio, returns: ReturnPanel, split: EvaluationSplit
) -> float:
    """Sample std (ddof=1) of the weighted return series over evaluation days."""
    if split.n_days != returns.n_days:
        raise SplitError(
            f"split covers {split.n_days} days but panel has {returns.n_days}"
        )
    if split.n_evaluation_days < 2:
        raise SplitError("evaluation range must contain at least 2 days")
    weights = np.zeros(returns.n_assets)
    for name, weight in portfolio.holdings.items():
        try:
            weights[returns.assets.index(name)] = weight
        except ValueError:
            raise ValidationError(f"portfolio asset {name} not in panel") from None
    series = returns.values[split.evaluation_rows] @ weights
    return float(np.std(series, ddof=1))


@dataclass(frozen=True)
class MotifVsRandomReport:
    seed: int
    size: int
    n_portfolios: int
    motif_assets: tuple[str, ...]
    motif_volatility: float
    percentile: float
    mean_volatility: float
    median_volatility: float
    volatilities: np.ndarray = field(repr=False)


def _random_selection_vols(
    returns: ReturnPanel, split: EvaluationSplit, size: int, n: int, seed: int
) -> np.ndarray:
    """Evaluation-day volatilities of n equal-weight random selections.

    Selections are drawn with per-index seeds and evaluated in fixed-size
    chunks through one matrix product each, so results are independent of
    chunking and reproducible bitwise.
    """
    n_assets = returns.n_assets
    if not 1 <= size <= n_assets:
        raise ParameterError(f"selection size {size} outside universe of {n_assets}")
    eval_rows = returns.values[split.evaluation_rows]
    vols = np.empty(n)
    for lo in range(0, n, _EVAL_CHUNK):
        hi = min(lo + _EVAL_CHUNK, n)
        weights = np.zeros((hi - lo, n_assets))
        for i in range(lo, hi):
            picked = np.random.default_rng(seed + i).choice(n_assets, size, replace=False)
            weights[i - lo, picked] = 1.0 / size
        vols[lo:hi] = np.std(eval_rows @ weights.T, axis=0, ddof=1)
    return vols


def run_experiment_motif_vs_random(
    returns: ReturnPanel,
    top_motifs: list,
    split: EvaluationSplit,
    n_portfolios: int,
    seed: int,
) -> MotifVsRandomReport:
    """Motif-portfolio volatility against same-size random portfolios."""
    if n_portfolios < 1:
        raise ParameterError("need at least 1 random portfolio")
    reference = motif_portfolio(top_motifs, returns.assets)
    motif_vol = out_of_sample_volatility(reference, returns, split)
    size = len(reference.holdings)
    vols = _random_selection_vols(returns, split, size, n_portfolios, seed)
    percentile = 100.0 * float(np.count_nonzero(vols <= motif_vol)) / n_portfolios
    return MotifVsRandomReport(
        seed=seed,
        size=size,
        n_portfolios=n_portfolios,
        motif_assets=reference.assets,
        motif_volatility=motif_vol,
        percentile=percentile,
        mean_volatility=float(np.mean(vols)),
        median_volatility=float(np.median(vols)),
        volatilities=vols,
    )


@dataclass(frozen=True)
class VolVsPersistReport:
    seed: int
    size: int
    n_selections: int
    vol_weighted: np.ndarray = field(repr=False)
    persist_weighted: np.ndarray = field(repr=False)
    mean_vol: float = field(init=False)
    mean_persist: float = field(init=False)
    std_vol: float = field(init=False)
    std_persist: float = field(init=False)
    fraction_persist_wins: float = field(init=False)
    p_value: float = field(init=False)

    def __post_init__(self):
        vol, per = self.vol_weighted, self.persist_weighted
        object.__setattr__(self, "mean_vol", float(np.mean(vol)))
        object.__setattr__(self, "mean_persist", float(np.mean(per)))
        object.__setattr__(self, "std_vol", float(np.std(vol, ddof=1)))
        object.__setattr__(self, "std_persist", float(np.std(per, ddof=1)))
        object.__setattr__(
            self, "fraction_persist_wins", float(np.mean(per < vol))
        )
        object.__setattr__(
            self,
            "p_value",
            float(stats.ttest_ind(vol, per, equal_var=False).pvalue),
        )


def run_experiment_vol_vs_persist(
    returns: ReturnPanel,
    scores: NodePersistence,
    split: EvaluationSplit,
    n_selections: int,
    size: int,
    seed: int,
) -> VolVsPersistReport:
    """Paired 1/sigma vs 1/persistence weighting over random selections.

    Both schemes weight the same asset selections and are evaluated over
    the same days, so each row of the report is a true paired comparison.
    """
    if n_selections < 2:
        raise ParameterError("need at least 2 selections for a paired experiment")
    sigmas = _estimation_sigmas(returns, returns.assets, split.estimation_end)
    sigma_table = dict(zip(returns.assets, sigmas))
    vols = np.empty(n_selections)
    pers = np.empty(n_selections)
    for i in range(n_selections):
        selection = sample_random_portfolio(returns.assets, size, seed + i).assets
        inv_sigma = np.array([1.0 / sigma_table[a] for a in selection])
        vol_portfolio = Portfolio(
            dict(zip(selection, (inv_sigma / inv_sigma.sum()).tolist()))
        )
        persist_portfolio = weights_inverse_persistence(scores, selection)
        vols[i] = out_of_sample_volatility(vol_portfolio, returns, split)
        pers[i] = out_of_sample_volatility(persist_portfolio, returns, split)
    return VolVsPersistReport(
        seed=seed,
        size=size,
        n_selections=n_selections,
        vol_weighted=vols,
        persist_weighted=pers,
    )
