"""Triangulated Maximally Filtered Graph construction and motif taxonomy.

The builder runs the greedy T2 scheme: seed with the 4-vertex clique of
maximum total pairwise weight, then repeatedly insert the best remaining
vertex into the best triangular face, where the gain of placing v into face
{a, b, c} is W(v,a) + W(v,b) + W(v,c). Each insertion retires the chosen
face into a separator, records the tetrahedron {v, a, b, c}, and opens the
three new faces through v.

For n vertices the result always has 3n-6 edges, n-3 tetrahedra, n-4
separators and 2n-4 remaining faces (so 3n-8 triangles in total), and is
planar and chordal by construction; ``check_planarity_chordality`` verifies
the last two properties independently through networkx.

Determinism: gain ties are broken by the lowest (vertex index, face key)
and seed ties by the lowest sorted vertex tuple, so identical input
matrices always produce identical graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .correlation import CorrelationMatrix
from .errors import SizeError, ValidationError

__all__ = [
    "TmfgGraph",
    "MotifCatalog",
    "StructureReport",
    "build_tmfg",
    "extract_motifs",
    "check_planarity_chordality",
]

# Exhaustive seed search is used while C(n, 4) stays below this bound.
_EXACT_SEED_LIMIT = 10_000_000

GAIN_MODES = ("raw", "abs", "square")


@dataclass(frozen=True)
class TmfgGraph:
    """A built TMFG with its full motif bookkeeping.

    ``insertions`` preserves the greedy order as (vertex, target face)
    records; the motif fields are sorted canonically.
    """

    n: int
    edges: frozenset[tuple[int, int]]
    tetrahedra: tuple[tuple[int, int, int, int], ...]
    separators: tuple[tuple[int, int, int], ...]
    faces: tuple[tuple[int, int, int], ...]
    insertions: tuple[tuple[int, tuple[int, int, int]], ...] = ()


@dataclass(frozen=True)
class MotifCatalog:
    """Canonical motif sets of one layer, keyed by sorted vertex tuples."""

    edges: frozenset[tuple[int, int]]
    faces: frozenset[tuple[int, int, int]]
    separators: frozenset[tuple[int, int, int]]
    tetrahedra: frozenset[tuple[int, int, int, int]]
    triangles: frozenset[tuple[int, int, int]] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "triangles", self.faces | self.separators)


@dataclass(frozen=True)
class StructureReport:
    planar: bool
    chordal: bool
    edge_count: int
    edge_bound_ok: bool

    def __bool__(self) -> bool:
        return self.planar and self.chordal


def _gain_matrix(corr, gain: str) -> np.ndarray:
    if isinstance(corr, CorrelationMatrix):
        values = corr.values
    else:
        values = np.asarray(corr, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValidationError(f"expected square matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("correlation matrix contains non-finite weights")
        if np.max(np.abs(values - values.T)) > 1e-9:
            raise ValidationError("correlation matrix is not symmetric")
    if gain == "raw":
        return np.array(values, dtype=np.float64)
    if gain == "abs":
        return np.abs(values)
    if gain == "square":
        return values * values
    raise ValidationError(f"unknown gain mode {gain!r}; expected one of {GAIN_MODES}")


def _seed_exact(w: np.ndarray) -> tuple[int, int, int, int]:
    """Best 4-clique by total pairwise weight, exhaustively.

    Every tetrad {i,j,k,l} is reachable as a pair of disjoint vertex pairs
    (i,j) + (k,l); pair rows are scanned in lexicographic order with strict
    improvement, which lands exact ties on the lowest sorted vertex tuple.
    Rows whose upper bound cannot beat the incumbent are skipped, so the
    scan is exact but rarely touches more than a few percent of the rows.
    """
    n = w.shape[0]
    iu, ju = np.triu_indices(n, 1)
    n_pairs = iu.shape[0]
    pair_w = w[iu, ju]
    reach = w[iu, :] + w[ju, :]  # reach[p, m] = W(i_p, m) + W(j_p, m)
    rows = np.arange(n_pairs)
    reach[rows, iu] = -np.inf  # forbid overlap with the first pair
    reach[rows, ju] = -np.inf

    # bound per row: best partner pair weight plus two best reach values;
    # the slack keeps float rounding from ever pruning an optimal row
    top2 = np.partition(reach, n - 2, axis=1)[:, n - 2 :]
    bounds = pair_w + pair_w.max() + top2[:, 0] + top2[:, 1] + 1e-9

    def row_totals(p: int) -> np.ndarray:
        return ((reach[p, iu] + reach[p, ju]) + pair_w[p]) + pair_w

    # prime the incumbent from the most promising row, for pruning only
    prune_at = row_totals(int(np.argmax(bounds))).max()

    best = -np.inf
    best_pq = (-1, -1)
    for p in range(n_pairs):
        if bounds[p] < prune_at:
            continue
        totals = row_totals(p)
        q = int(np.argmax(totals))
        if totals[q] > best:
            best = totals[q]
            best_pq = (p, q)
            if best > prune_at:
                prune_at = best
    if not math.isfinite(best):
        raise ValidationError("seed search failed; matrix has no valid tetrahedron")
    p, q = best_pq
    return tuple(sorted((int(iu[p]), int(ju[p]), int(iu[q]), int(ju[q]))))


def _seed_greedy(w: np.ndarray) -> tuple[int, int, int, int]:
    """Expand the heaviest edge to a tetrahedron, one best vertex at a time."""
    n = w.shape[0]
    masked = np.array(w)
    np.fill_diagonal(masked, -np.inf)
    masked[np.tril_indices(n, 0)] = -np.inf
    i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
    members = [int(i), int(j)]
    for _ in range(2):
        gains = w[:, members].sum(axis=1)
        gains[members] = -np.inf
        members.append(int(np.argmax(gains)))
    return tuple(sorted(members))


def build_tmfg(corr, gain: str = "raw") -> TmfgGraph:
    """Build the TMFG of a correlation matrix with the greedy T2 scheme."""
    w = _gain_matrix(corr, gain)
    n = w.shape[0]
    if n < 4:
        raise SizeError(f"TMFG needs at least 4 vertices, got {n}")

    if math.comb(n, 4) <= _EXACT_SEED_LIMIT:
        seed = _seed_exact(w)
    else:
        seed = _seed_greedy(w)

    edges = {
        (seed[a], seed[b]) for a in range(4) for b in range(a + 1, 4)
    }
    tetrahedra = [seed]
    separators: list[tuple[int, int, int]] = []
    insertions: list[tuple[int, tuple[int, int, int]]] = []

    # 4 seed faces plus 3 per insertion, one retired per insertion
    face_list: list[tuple[int, int, int]] = []
    alive: list[bool] = []
    gains = np.full((3 * n - 8, n), -np.inf)
    remaining = np.ones(n, dtype=bool)
    remaining[list(seed)] = False

    def open_face(tri: tuple[int, int, int]) -> None:
        row = len(face_list)
        face_list.append(tri)
        alive.append(True)
        gains[row, :] = w[:, tri[0]] + w[:, tri[1]] + w[:, tri[2]]

    for a in range(4):
        open_face(tuple(seed[b] for b in range(4) if b != a))

    while remaining.any():
        candidate = np.where(remaining[None, :], gains[: len(face_list)], -np.inf)
        best = candidate.max()
        hits = np.argwhere(candidate == best)
        if hits.shape[0] == 1:
            row, vertex = int(hits[0, 0]), int(hits[0, 1])
        else:  # exact gain tie: lowest vertex index, then lowest face key
            row, vertex = min(
                ((int(r), int(v)) for r, v in hits),
                key=lambda rv: (rv[1], face_list[rv[0]]),
            )
        face = face_list[row]

        separators.append(face)
        alive[row] = False
        gains[row, :] = -np.inf
        tetrahedra.append(tuple(sorted((vertex, *face))))
        insertions.append((vertex, face))
        for u in face:
            edges.add((vertex, u) if vertex < u else (u, vertex))
        open_face(tuple(sorted((vertex, face[0], face[1]))))
        open_face(tuple(sorted((vertex, face[0], face[2]))))
        open_face(tuple(sorted((vertex, face[1], face[2]))))
        remaining[vertex] = False

    live_faces = sorted(tri for tri, keep in zip(face_list, alive) if keep)

    return TmfgGraph(
        n=n,
        edges=frozenset(edges),
        tetrahedra=tuple(sorted(tetrahedra)),
        separators=tuple(sorted(separators)),
        faces=tuple(live_faces),
        insertions=tuple(insertions),
    )


def extract_motifs(graph: TmfgGraph) -> MotifCatalog:
    """Canonical motif sets (edges, faces, separators, tetrahedra) of a graph."""
    return MotifCatalog(
        edges=frozenset(graph.edges),
        faces=frozenset(graph.faces),
        separators=frozenset(graph.separators),
        tetrahedra=frozenset(graph.tetrahedra),
    )


def check_planarity_chordality(graph: TmfgGraph) -> StructureReport:
    """Independent planarity (edge bound + embedding test) and chordality check."""
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    g.add_edges_from(graph.edges)
    bound = 3 * graph.n - 6 if graph.n >= 3 else graph.n * (graph.n - 1) // 2
    edge_bound_ok = g.number_of_edges() <= bound
    planar = edge_bound_ok and nx.check_planarity(g, counterexample=False)[0]
    chordal = nx.is_chordal(g)
    return StructureReport(
        planar=planar,
        chordal=chordal,
        edge_count=g.number_of_edges(),
        edge_bound_ok=edge_bound_ok,
    )
