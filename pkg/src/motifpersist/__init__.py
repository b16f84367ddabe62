"""Temporal persistence of motif structures in TMFG-filtered correlation
networks of asset returns, with two-regime decay fitting and
persistence-weighted portfolio experiments."""

__version__ = "0.1.0"

from .correlation import (  # noqa: E402
    CorrelationMatrix,
    WeightVector,
    correlation_matrix,
    exponential_weights,
    weighted_kendall,
)
from .errors import MotifPersistError  # noqa: E402
from .filtergraph import (  # noqa: E402
    MotifCatalog,
    TmfgGraph,
    build_tmfg,
    check_planarity_chordality,
    extract_motifs,
)
from .ingest import (  # noqa: E402
    PricePanel,
    ReturnPanel,
    ReturnWindow,
    load_prices,
    load_returns,
    log_returns,
    slice_window,
)
from .persistence import (  # noqa: E402
    LayerConfig,
    LayerSeries,
    Motif,
    NodePersistence,
    PersistenceCurve,
    build_layer_series,
    edge_independence_product,
    node_persistence,
    persistence_curve,
    plateau_persistence,
    rank_motifs,
    soft_persistent,
)
from .portfolio import (  # noqa: E402
    EvaluationSplit,
    Portfolio,
    motif_portfolio,
    out_of_sample_volatility,
    run_experiment_motif_vs_random,
    run_experiment_vol_vs_persist,
    sample_random_portfolio,
    weights_inverse_persistence,
    weights_inverse_volatility,
)
from .regimefit import (  # noqa: E402
    PowerLawFit,
    TwoRegimeFit,
    adjusted_triangle_exponent,
    fit_power_law,
    fit_two_regimes,
)
from .synth import ScenarioSpec, generate, ground_truth_motifs, load_scenario  # noqa: E402
