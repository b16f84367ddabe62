"""Temporal layer series and soft-persistence statistics.

A layer is the motif catalog of the TMFG built on the correlation window
ending on one trading day; consecutive layers shift the window by one day.
A motif is "soft" persistent between layers t and t+tau when it is present
in both, regardless of what happens in between.

Given T starting layers and a maximum shift of max_shift days, the series
holds T + max_shift distinct layers indexed by absolute day. From those it
derives:

  * per-class persistence curves: the fraction of layer-t motifs still
    present at t+tau, averaged over the T starting layers;
  * per-motif plateau persistence: the same survival indicator averaged
    over starting layers and over shifts tau in [tau_plat, max_shift);
  * node persistence scores: for each asset, the sum of plateau
    persistence over every tracked tetrahedral clique containing it;
  * the three-edge independence product used as the null against which
    triangle persistence is compared.

Triangles are classed "unified" by default: a vertex triple counts as the
same motif whether it plays the face or the separator role in a layer.
Strict classing (faces and separators tracked as disjoint classes) is
selected by asking for the ``face`` or ``separator`` kind instead of
``triangle``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .correlation import correlation_matrix, exponential_weights
from .errors import (
    ConfigurationError,
    InsufficientDataError,
    ParameterError,
    SizeError,
)
from .filtergraph import MotifCatalog, build_tmfg, extract_motifs
from .ingest import ReturnPanel, slice_window

__all__ = [
    "MOTIF_KINDS",
    "Motif",
    "LayerConfig",
    "LayerSeries",
    "PersistenceCurve",
    "NodePersistence",
    "build_layer_series",
    "motif_members",
    "soft_persistent",
    "persistence_curve",
    "plateau_persistence",
    "plateau_scores",
    "node_persistence",
    "edge_persistence_fraction",
    "motif_persistence_fraction",
    "edge_independence_product",
    "rank_motifs",
    "top_correlated_triples",
    "overlap_with_top_correlated",
]

MOTIF_KINDS = ("edge", "triangle", "face", "separator", "tetrahedron")


@dataclass(frozen=True)
class Motif:
    """A canonical motif: sorted vertex tuple plus its class."""

    vertices: tuple[int, ...]
    kind: str

    def __post_init__(self):
        if self.kind not in MOTIF_KINDS:
            raise ParameterError(f"unknown motif kind {self.kind!r}")
        if tuple(sorted(self.vertices)) != self.vertices:
            object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))


@dataclass(frozen=True)
class LayerConfig:
    """Parameters of a layer series build."""

    window: int = 126
    theta: float = 46.0
    n_start: int = 200
    max_shift: int = 900
    gain: str = "raw"

    @property
    def n_layers(self) -> int:
        return self.n_start + self.max_shift

    def required_days(self) -> int:
        return self.window + self.n_layers - 1


@dataclass(frozen=True)
class LayerSeries:
    """All layers of one analysis, indexed by absolute day offset.

    Layer d is the catalog for the window ending at return-row
    ``window - 1 + d``; starting layers are d in [0, n_start) and layer
    (t, tau) of the shifted pair is simply layer t + tau, stored once.
    ``start_matrices`` keeps the unfiltered correlation matrices of the
    starting layers for the ranking-overlap audit.
    """

    config: LayerConfig
    assets: tuple[str, ...]
    catalogs: tuple[MotifCatalog, ...]
    start_matrices: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n_start(self) -> int:
        return self.config.n_start

    @property
    def max_shift(self) -> int:
        return self.config.max_shift


def build_layer_series(
    panel: ReturnPanel, config: LayerConfig, threads: int = 1
) -> LayerSeries:
    """Build one TMFG motif catalog per required absolute day."""
    if panel.n_assets < 4:
        raise SizeError(f"TMFG filtering needs at least 4 assets, got {panel.n_assets}")
    needed = config.required_days()
    if panel.n_days < needed:
        raise ConfigurationError(
            f"window={config.window}, n_start={config.n_start}, "
            f"max_shift={config.max_shift} requires {needed} return days; "
            f"panel has {panel.n_days}"
        )
    weights = exponential_weights(config.window, config.theta)

    def one_layer(day: int):
        window = slice_window(panel, config.window - 1 + day, config.window)
        corr = correlation_matrix(window, weights)
        catalog = extract_motifs(build_tmfg(corr, gain=config.gain))
        matrix = corr.values if day < config.n_start else None
        return catalog, matrix

    days = range(config.n_layers)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_layer, days))
    else:
        results = [one_layer(day) for day in days]

    catalogs = tuple(cat for cat, _ in results)
    start_matrices = tuple(m for _, m in results[: config.n_start])
    return LayerSeries(config, panel.assets, catalogs, start_matrices)


def motif_members(catalog: MotifCatalog, kind: str) -> frozenset:
    """The motif set of one layer for a kind (triangle = unified classing)."""
    if kind == "edge":
        return catalog.edges
    if kind == "triangle":
        return catalog.triangles
    if kind == "face":
        return catalog.faces
    if kind == "separator":
        return catalog.separators
    if kind == "tetrahedron":
        return catalog.tetrahedra
    raise ParameterError(f"unknown motif kind {kind!r}")


def soft_persistent(
    motif: Motif, cat_a: MotifCatalog, cat_b: MotifCatalog, classing: str = "unified"
) -> bool:
    """True iff the motif is present in both catalogs.

    Under unified classing a 3-vertex motif matches either triangle role;
    under strict classing it must hold its own kind in both layers.
    """
    if classing not in ("unified", "strict"):
        raise ParameterError(f"unknown classing {classing!r}")
    kind = motif.kind
    if classing == "unified" and kind in ("face", "separator"):
        kind = "triangle"
    return motif.vertices in motif_members(cat_a, kind) and motif.vertices in (
        motif_members(cat_b, kind)
    )


@dataclass(frozen=True)
class PersistenceCurve:
    """Average persistence per shift for one motif class."""

    kind: str
    taus: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("taus", "values"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _presence_table(series: LayerSeries, kind: str):
    """Presence matrix over layers for every motif of a kind.

    Returns (motifs, table) where table[m, d] is True when motif m is in
    layer d. The motif list is sorted, so downstream scans are
    deterministic.
    """
    n_layers = len(series.catalogs)
    motifs = sorted(set().union(*(motif_members(c, kind) for c in series.catalogs)))
    index = {m: i for i, m in enumerate(motifs)}
    table = np.zeros((len(motifs), n_layers), dtype=bool)
    for day, catalog in enumerate(series.catalogs):
        for m in motif_members(catalog, kind):
            table[index[m], day] = True
    return motifs, table


def persistence_curve(series: LayerSeries, kind: str) -> PersistenceCurve:
    """Average survival fraction of layer-t motifs at each shift tau."""
    n_start, max_shift = series.n_start, series.max_shift
    _, table = _presence_table(series, kind)
    sizes = np.array(
        [len(motif_members(series.catalogs[t], kind)) for t in range(n_start)],
        dtype=np.float64,
    )
    if np.any(sizes == 0.0):  # only possible for separators at n = 4
        raise InsufficientDataError(
            f"no {kind} motifs in some starting layer; curve undefined"
        )
    taus = np.arange(max_shift + 1)
    values = np.empty(max_shift + 1)
    starts = table[:, :n_start]
    for tau in taus:
        joint = (starts & table[:, tau : tau + n_start]).sum(axis=0)
        values[tau] = float(np.mean(joint / sizes))
    return PersistenceCurve(kind, taus, values)


def _check_plateau(series: LayerSeries, tau_plat: int) -> None:
    if not 0 <= tau_plat < series.max_shift:
        raise ParameterError(
            f"tau_plat must lie in [0, {series.max_shift}), got {tau_plat}"
        )


def plateau_scores(series: LayerSeries, kind: str, tau_plat: int) -> dict[tuple, float]:
    """Plateau persistence for every tracked motif of a kind.

    Tracked motifs are those present in at least one starting layer; each
    score is the survival indicator averaged over the T starting layers and
    the shifts tau in [tau_plat, max_shift).
    """
    _check_plateau(series, tau_plat)
    n_start, max_shift = series.n_start, series.max_shift
    motifs, table = _presence_table(series, kind)
    cum = np.concatenate(
        [np.zeros((len(motifs), 1), dtype=np.int64), np.cumsum(table, axis=1)], axis=1
    )
    counts = np.zeros(len(motifs), dtype=np.int64)
    for t in range(n_start):
        active = table[:, t]
        # presences over days [t + tau_plat, t + max_shift)
        counts[active] += (cum[active, t + max_shift] - cum[active, t + tau_plat])
    denom = float(n_start * (max_shift - tau_plat))
    tracked = table[:, :n_start].any(axis=1)
    return {m: counts[i] / denom for i, m in enumerate(motifs) if tracked[i]}


def plateau_persistence(
    series: LayerSeries,
    motif: Motif,
    tau_plat: int,
    max_shift: int | None = None,
) -> float:
    """Plateau persistence of a single motif (unified triangle classing)."""
    if max_shift is None:
        max_shift = series.max_shift
    if not 0 <= tau_plat < max_shift <= series.max_shift:
        raise ParameterError(
            f"need 0 <= tau_plat < max_shift <= {series.max_shift}, "
            f"got tau_plat={tau_plat}, max_shift={max_shift}"
        )
    kind = "triangle" if motif.kind in ("face", "separator") else motif.kind
    count = 0
    for t in range(series.n_start):
        if motif.vertices not in motif_members(series.catalogs[t], kind):
            continue
        for tau in range(tau_plat, max_shift):
            if motif.vertices in motif_members(series.catalogs[t + tau], kind):
                count += 1
    return count / (series.n_start * (max_shift - tau_plat))


@dataclass(frozen=True)
class NodePersistence:
    """Per-asset sum of plateau persistence over tracked cliques."""

    scores: dict[str, float]
    tau_plat: int


def node_persistence(series: LayerSeries, tau_plat: int) -> NodePersistence:
    """Sum plateau persistence of tracked tetrahedral cliques per vertex.

    The clique universe is the union of tetrahedra over the T starting
    layers, so assets entering the structure mid-sample still get scored;
    an asset absent from every tracked clique scores exactly 0.
    """
    clique_scores = plateau_scores(series, "tetrahedron", tau_plat)
    totals = dict.fromkeys(series.assets, 0.0)
    for clique, score in sorted(clique_scores.items()):
        for vertex in clique:
            totals[series.assets[vertex]] += score
    return NodePersistence(totals, tau_plat)


def edge_persistence_fraction(series: LayerSeries, edge: tuple[int, int], tau: int) -> float:
    """Fraction of starting layers where an edge is present at both t and t+tau."""
    key = tuple(sorted(edge))
    hits = sum(
        1
        for t in range(series.n_start)
        if key in series.catalogs[t].edges and key in series.catalogs[t + tau].edges
    )
    return hits / series.n_start


def motif_persistence_fraction(series: LayerSeries, motif: Motif, tau: int) -> float:
    """Fraction of starting layers where a motif persists at shift tau."""
    kind = "triangle" if motif.kind in ("face", "separator") else motif.kind
    hits = sum(
        1
        for t in range(series.n_start)
        if motif.vertices in motif_members(series.catalogs[t], kind)
        and motif.vertices in motif_members(series.catalogs[t + tau], kind)
    )
    return hits / series.n_start


def edge_independence_product(series: LayerSeries, motif: Motif, tau: int) -> float:
    """Product of the three component-edge persistence fractions at shift tau.

    This is the null value the triangle's own persistence is compared
    against: it is what the motif persistence would be if its edges
    appeared independently of each other.
    """
    if len(motif.vertices) != 3:
        raise ParameterError(f"independence product needs a triangle, got {motif}")
    a, b, c = motif.vertices
    product = 1.0
    for edge in ((a, b), (a, c), (b, c)):
        product *= edge_persistence_fraction(series, edge, tau)
    return product


def rank_motifs(
    series: LayerSeries, kind: str, tau_plat: int, k: int
) -> list[tuple[Motif, float]]:
    """Top-k tracked motifs by plateau persistence, ties broken by vertex tuple."""
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    scores = plateau_scores(series, kind, tau_plat)
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return [(Motif(vertices, kind), score) for vertices, score in ordered[:k]]


def top_correlated_triples(matrix: np.ndarray, k: int) -> list[tuple[int, int, int]]:
    """Top-k vertex triples by mean pairwise correlation in a full matrix."""
    n = matrix.shape[0]
    triples: list[tuple[float, tuple[int, int, int]]] = []
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            sums = matrix[i, j] + matrix[i, j + 1 :] + matrix[j, j + 1 :]
            order = np.argsort(-sums, kind="stable")  # ties stay lexicographic
            for off in order[: min(k, sums.shape[0])]:
                triples.append((-float(sums[off]), (i, j, j + 1 + int(off))))
    triples.sort()
    return [t for _, t in triples[:k]]


def overlap_with_top_correlated(
    series: LayerSeries,
    layer_index: int,
    k: int,
    tau_plat: int,
    top_motifs: list[tuple[Motif, float]] | None = None,
) -> int:
    """Size of the intersection between the top-k persistent triangles and
    the top-k most-correlated triples of one starting layer's unfiltered
    matrix."""
    if not 0 <= layer_index < series.n_start:
        raise ParameterError(
            f"layer index must be a starting layer in [0, {series.n_start})"
        )
    if top_motifs is None:
        top_motifs = rank_motifs(series, "triangle", tau_plat, k)
    persistent = {m.vertices for m, _ in top_motifs}
    correlated = set(top_correlated_triples(series.start_matrices[layer_index], k))
    return len(persistent & correlated)
