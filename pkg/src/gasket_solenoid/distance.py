"""Geodesic distance on the tower and the dual (commutator-norm) distance.

The finite-resolution geodesic is the shortest path in the graph of the
finest edges; with uniform weights 2**-r it is computed exactly as a hop
count.  The dual distance sup{|f(x)-f(y)| : all edge quotients <= 1} is
certified constructively: the clipped distance field is a feasible witness
attaining the path length, and every feasible function is bounded by the
triangle inequality along the optimal path, so primal = dual.  A min-plus
Floyd-Warshall over the full multi-length constraint graph doubles as an
exact LP oracle on small windows.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import kernels
from .dyadic import DyadicScalar, TrianglePoint
from .functions import SampledFunction, lipschitz_seminorm, tabulated_function
from .operators import EdgeWindow, dirac_operator, mult_operator

_PACK_SHIFT = 1 << 21


class VertexLookupError(KeyError):
    """Queried point is not a vertex of the sampled graph."""


class CertificateError(RuntimeError):
    """Witness verification failed; indicates an implementation bug."""


class GasketGraph:
    """Vertices and edges of K_level at resolution 2**-resolution.

    Vertex coordinates are int64 multiples of 2**-resolution; `csr` holds the
    finest-edge adjacency, `constraint_edges` one (u, v, length_exp) family
    per length class for dual-feasibility checks.
    """

    def __init__(self, level: int, resolution: int):
        if resolution < 0 or resolution < -level:
            raise ValueError("resolution must be >= max(0, -level)")
        self.level = level
        self.resolution = resolution
        size = 1 << (level + resolution)
        corners = kernels.subdivide_corners(level + resolution, size)
        n_cells = corners.shape[0]
        v0, v1, v2 = kernels.cell_vertex_arrays(corners, 1)
        keys = np.concatenate(
            [v[:, 0] * _PACK_SHIFT + v[:, 1] for v in (v0, v1, v2)]
        )
        self.keys, inverse = np.unique(keys, return_inverse=True)
        self.point_a = self.keys // _PACK_SHIFT
        self.point_b = self.keys % _PACK_SHIFT
        i0 = inverse[:n_cells]
        i1 = inverse[n_cells : 2 * n_cells]
        i2 = inverse[2 * n_cells :]
        u = np.concatenate([i0, i0, i1])
        v = np.concatenate([i1, i2, i2])
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        order = np.argsort(rows, kind="stable")
        self.indices = np.ascontiguousarray(cols[order])
        counts = np.bincount(rows, minlength=self.keys.size)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

        self.constraint_edges = []
        for k in range(-resolution, level + 1):
            depth = level - k
            cc = kernels.subdivide_corners(depth, size)
            h = 1 << (k + resolution)
            w0, w1, w2 = kernels.cell_vertex_arrays(cc, h)
            ids = [
                np.searchsorted(self.keys, w[:, 0] * _PACK_SHIFT + w[:, 1])
                for w in (w0, w1, w2)
            ]
            uu = np.concatenate([ids[0], ids[0], ids[1]])
            vv = np.concatenate([ids[1], ids[2], ids[2]])
            self.constraint_edges.append((k, uu, vv))

    @property
    def n_vertices(self) -> int:
        return int(self.keys.size)

    def point_index(self, p: TrianglePoint) -> int:
        try:
            a = p.alpha.as_pair(-self.resolution)
            b = p.beta.as_pair(-self.resolution)
        except ValueError:
            raise VertexLookupError(f"{p} is finer than resolution 2**-{self.resolution}") from None
        key = a * _PACK_SHIFT + b
        i = int(np.searchsorted(self.keys, key))
        if i >= self.keys.size or self.keys[i] != key:
            raise VertexLookupError(f"{p} is not a vertex of K_{self.level} at this resolution")
        return i

    def point_of(self, index: int) -> TrianglePoint:
        return TrianglePoint(
            DyadicScalar(int(self.point_a[index]), -self.resolution),
            DyadicScalar(int(self.point_b[index]), -self.resolution),
        )

    def hops_from(self, source: int) -> np.ndarray:
        return kernels.bfs_hops(self.indptr, self.indices, source)


@lru_cache(maxsize=6)
def build_graph(level: int, resolution: int) -> GasketGraph:
    return GasketGraph(level, resolution)


@dataclass(frozen=True)
class DistanceQuery:
    x: TrianglePoint
    y: TrianglePoint
    ambient_level: int = 0
    resolution: int = 8


def graph_distance(q: DistanceQuery) -> float:
    """Shortest-path distance in the finest-edge graph; an exact multiple of
    2**-resolution, nonincreasing under refinement."""
    g = build_graph(q.ambient_level, q.resolution)
    hops = g.hops_from(g.point_index(q.y))
    h = int(hops[g.point_index(q.x)])
    return h * 2.0**-q.resolution


def refinement_table(x: TrianglePoint, y: TrianglePoint, ambient_level: int,
                     resolutions) -> list[tuple[int, float]]:
    return [
        (r, graph_distance(DistanceQuery(x, y, ambient_level, r))) for r in resolutions
    ]


@dataclass
class DistanceCertificate:
    """Optimal value with a feasibility-checked dual witness and a primal path."""

    value: float
    hops: int
    resolution: int
    level: int
    path_indices: tuple
    witness_hops: np.ndarray
    graph: GasketGraph
    max_quotient: float

    @property
    def path(self) -> tuple:
        return tuple(self.graph.point_of(i) for i in self.path_indices)

    @cached_property
    def witness(self) -> SampledFunction:
        """The clipped distance field as a level-`level` invariant function."""
        scale = 2.0**-self.resolution
        table = {
            self.graph.point_of(i): float(self.witness_hops[i]) * scale
            for i in range(self.graph.n_vertices)
        }
        return tabulated_function(table, self.level, self.resolution, self.level)


def _check_witness(g: GasketGraph, w: np.ndarray) -> float:
    """Largest |w(u)-w(v)| / length over every constraint class; feasible iff <= 1.

    Exact in integers: values are hop counts, lengths are 2**(k+resolution).
    """
    worst = 0.0
    for k, uu, vv in g.constraint_edges:
        gap = int(np.abs(w[uu] - w[vv]).max(initial=0))
        quot = gap / float(1 << (k + g.resolution))
        worst = max(worst, quot)
    return worst


def connes_distance(q: DistanceQuery) -> DistanceCertificate:
    """Distance with a duality certificate.

    The witness f*(v) = min(d(v, y), value) is checked against every edge of
    every length class in the window (coarse classes explicitly, not assumed);
    |f*(x) - f*(y)| must equal the shortest-path value, and the path realizes
    it, so the sup over feasible functions is exactly the path length.
    """
    g = build_graph(q.ambient_level, q.resolution)
    xi = g.point_index(q.x)
    yi = g.point_index(q.y)
    hops = g.hops_from(yi)
    h = int(hops[xi])
    witness = np.minimum(hops, h)
    worst = _check_witness(g, witness)
    if worst > 1.0:
        raise CertificateError(f"witness violates a coarse-edge constraint: sup quotient {worst}")
    if int(abs(witness[xi] - witness[yi])) != h:
        raise CertificateError("witness does not attain the shortest-path value")

    path = [xi]
    cur = xi
    while cur != yi:
        lo, hi = g.indptr[cur], g.indptr[cur + 1]
        nbrs = g.indices[lo:hi]
        cur = int(nbrs[np.argmin(hops[nbrs])])
        if hops[cur] != hops[path[-1]] - 1:
            raise CertificateError("path reconstruction failed")
        path.append(cur)

    return DistanceCertificate(
        h * 2.0**-q.resolution, h, q.resolution, q.ambient_level,
        tuple(path), witness, g, worst,
    )


def lp_oracle_all_pairs(level: int, resolution: int) -> np.ndarray:
    """Exact all-pairs optimum of the dual linear program, as a matrix of
    integer multiples of 2**-resolution.

    By LP duality the maximum of f(x)-f(y) under the difference constraints
    |f(u)-f(v)| <= length(u,v) equals the shortest path over the full
    multi-length constraint graph; min-plus Floyd-Warshall solves it exactly
    in int64.
    """
    g = build_graph(level, resolution)
    n = g.n_vertices
    inf = np.int64(1) << 50
    d = np.full((n, n), inf, np.int64)
    np.fill_diagonal(d, 0)
    for k, uu, vv in g.constraint_edges:
        w = np.int64(1) << (k + resolution)
        np.minimum.at(d, (uu, vv), w)
        np.minimum.at(d, (vv, uu), w)
    for k in range(n):
        np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :], out=d)
    return d


@dataclass(frozen=True)
class CommutatorPoint:
    cutoff_exp: int
    quotient_route: float
    operator_route: float


def commutator_norm(f: SampledFunction, p_sequence) -> list[CommutatorPoint]:
    """Truncated commutator norms ||[D e_{[-t,t]}(D), rho(f)]|| for t = 2**p.

    Route (i): the edge-quotient supremum over lengths in [2**-p, 2**level].
    Route (ii): the operator 2-norm of [F|D|, rho(f)] on the matching window.
    The two must agree to roundoff and be nondecreasing in p.
    """
    out = []
    n = f.level
    for p in p_sequence:
        quotient = lipschitz_seminorm(f, -p)
        window = EdgeWindow(n, -p, n)
        d = dirac_operator(window)
        rho = mult_operator(f, window)
        comm = d @ rho - rho @ d
        out.append(CommutatorPoint(p, quotient, comm.norm2()))
    return out
