"""Hot numeric kernels: subdivision, covering descent, polynomial evaluation,
reductions and BFS.

Coordinates are int64 numerators relative to a fixed power-of-two unit, so the
integer paths are exact; only function values are floating point.  Each kernel
has a jitted and a vectorized numpy implementation selected by the backend
flag (see backend.py); both produce identical integer outputs and float
outputs matching to roundoff.
"""

from __future__ import annotations

import numpy as np

from .backend import HAS_NUMBA, use_numba

if HAS_NUMBA:
    from numba import njit


# ---------------------------------------------------------------------------
# subdivision: corners of the cells of the standard upright triangle

def _subdivide_np(depth: int, size: int) -> np.ndarray:
    corners = np.zeros((1, 2), dtype=np.int64)
    h = size
    for _ in range(depth):
        h //= 2
        corners = np.concatenate(
            (corners, corners + np.array([h, 0], np.int64), corners + np.array([0, h], np.int64))
        )
    return corners


def _subdivide_loop(depth, size):  # pragma: no cover - jitted
    n = 1
    out = np.zeros((3**depth, 2), dtype=np.int64)
    h = size
    for _ in range(depth):
        h //= 2
        for i in range(n):
            out[n + i, 0] = out[i, 0] + h
            out[n + i, 1] = out[i, 1]
            out[2 * n + i, 0] = out[i, 0]
            out[2 * n + i, 1] = out[i, 1] + h
        n *= 3
    return out


def subdivide_corners(depth: int, size: int) -> np.ndarray:
    """Corners (N,2) of the 3**depth subcells of corner (0,0), side `size`."""
    if size % (1 << depth):
        raise ValueError(f"size {size} not divisible by 2**{depth}")
    if use_numba():
        return _subdivide_nb(depth, size)
    return _subdivide_np(depth, size)


def cell_vertex_arrays(corners: np.ndarray, size: int):
    """The three vertex arrays (corner, corner+(s,0), corner+(0,s))."""
    v0 = corners
    v1 = corners + np.array([size, 0], np.int64)
    v2 = corners + np.array([0, size], np.int64)
    return v0, v1, v2


# ---------------------------------------------------------------------------
# covering descent: iterate p_q: K_{q+1} -> K_q down to the target level

def _descend_np(a, b, from_level, to_level, unit):
    a = a.copy()
    b = b.copy()
    for q in range(from_level - 1, to_level - 1, -1):
        h = unit << q
        m1 = a >= h
        m2 = ~m1 & (b >= h)
        a1 = a[m1]
        b1 = b[m1]
        # R^q_{0,1}: 120deg about (h,0):   (x,y) -> (2h-x-y, x-h)
        a[m1] = 2 * h - a1 - b1
        b[m1] = a1 - h
        a2 = a[m2]
        b2 = b[m2]
        # R^q_{0,2}: 240deg about (0,h):   (x,y) -> (y-h, 2h-x-y)
        a[m2] = b2 - h
        b[m2] = 2 * h - a2 - b2
    return a, b


def _descend_loop(a, b, from_level, to_level, unit):  # pragma: no cover - jitted
    n = a.shape[0]
    oa = a.copy()
    ob = b.copy()
    for i in range(n):
        x = oa[i]
        y = ob[i]
        for q in range(from_level - 1, to_level - 1, -1):
            h = unit << q
            if x >= h:
                x, y = 2 * h - x - y, x - h
            elif y >= h:
                x, y = y - h, 2 * h - x - y
        oa[i] = x
        ob[i] = y
    return oa, ob


def descend_scaled(a, b, from_level, to_level, unit):
    """Apply the covering maps pointwise until coordinates land in K_to_level."""
    a = np.ascontiguousarray(a, np.int64)
    b = np.ascontiguousarray(b, np.int64)
    if from_level <= to_level:
        return a.copy(), b.copy()
    if use_numba():
        return _descend_nb(a, b, from_level, to_level, unit)
    return _descend_np(a, b, from_level, to_level, unit)


# ---------------------------------------------------------------------------
# polynomial evaluation in (alpha, beta)

def _poly_np(a, b, exp_a, exp_b, coeffs):
    out = np.zeros(a.shape[0], np.float64)
    for i in range(exp_a.shape[0]):
        out += coeffs[i] * (a ** exp_a[i]) * (b ** exp_b[i])
    return out


def _poly_loop(a, b, exp_a, exp_b, coeffs):  # pragma: no cover - jitted
    n = a.shape[0]
    out = np.zeros(n, np.float64)
    for i in range(n):
        x = a[i]
        y = b[i]
        acc = 0.0
        for t in range(exp_a.shape[0]):
            term = coeffs[t]
            for _ in range(exp_a[t]):
                term *= x
            for _ in range(exp_b[t]):
                term *= y
            acc += term
        out[i] = acc
    return out


def eval_poly_scaled(a, b, unit, exp_a, exp_b, coeffs):
    """Evaluate sum coeffs * alpha**i * beta**j at scaled integer coordinates."""
    af = np.asarray(a, np.int64) / float(unit)
    bf = np.asarray(b, np.int64) / float(unit)
    exp_a = np.ascontiguousarray(exp_a, np.int64)
    exp_b = np.ascontiguousarray(exp_b, np.int64)
    coeffs = np.ascontiguousarray(coeffs, np.float64)
    if use_numba():
        return _poly_nb(af, bf, exp_a, exp_b, coeffs)
    return _poly_np(af, bf, exp_a, exp_b, coeffs)


# ---------------------------------------------------------------------------
# reductions

def _sum_np(values):
    return float(np.sum(values))


def _sum_loop(values):  # pragma: no cover - jitted
    total = 0.0
    comp = 0.0
    for i in range(values.shape[0]):
        y = values[i] - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def sum_values(values) -> float:
    values = np.ascontiguousarray(values, np.float64)
    if use_numba():
        return float(_sum_nb(values))
    return _sum_np(values)


def _maxdiff_np(f0, f1, f2):
    d = np.abs(f0 - f1)
    np.maximum(d, np.abs(f0 - f2), out=d)
    np.maximum(d, np.abs(f1 - f2), out=d)
    return float(d.max(initial=0.0))


def _maxdiff_loop(f0, f1, f2):  # pragma: no cover - jitted
    best = 0.0
    for i in range(f0.shape[0]):
        d = abs(f0[i] - f1[i])
        e = abs(f0[i] - f2[i])
        if e > d:
            d = e
        e = abs(f1[i] - f2[i])
        if e > d:
            d = e
        if d > best:
            best = d
    return best


def max_pair_diff(f0, f1, f2) -> float:
    """Max over cells of the largest |value difference| across the 3 sides."""
    f0 = np.ascontiguousarray(f0, np.float64)
    f1 = np.ascontiguousarray(f1, np.float64)
    f2 = np.ascontiguousarray(f2, np.float64)
    if f0.shape[0] == 0:
        return 0.0
    if use_numba():
        return float(_maxdiff_nb(f0, f1, f2))
    return _maxdiff_np(f0, f1, f2)


# ---------------------------------------------------------------------------
# BFS over a CSR graph with unit edge weights

def _bfs_np(indptr, indices, source):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int64)
    dist[source] = 0
    frontier = np.array([source], np.int64)
    hops = 0
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        flat = np.repeat(starts, counts) + (np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts))
        nbrs = indices[flat]
        fresh = nbrs[dist[nbrs] < 0]
        if fresh.size == 0:
            break
        fresh = np.unique(fresh)
        hops += 1
        dist[fresh] = hops
        frontier = fresh
    return dist


def _bfs_loop(indptr, indices, source):  # pragma: no cover - jitted
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for t in range(indptr[u], indptr[u + 1]):
            v = indices[t]
            if dist[v] < 0:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
    return dist


def bfs_hops(indptr, indices, source: int) -> np.ndarray:
    """Hop counts from source; -1 marks unreachable vertices."""
    indptr = np.ascontiguousarray(indptr, np.int64)
    indices = np.ascontiguousarray(indices, np.int64)
    if use_numba():
        return _bfs_nb(indptr, indices, source)
    return _bfs_np(indptr, indices, source)


if HAS_NUMBA:
    _subdivide_nb = njit(cache=True)(_subdivide_loop)
    _descend_nb = njit(cache=True)(_descend_loop)
    _poly_nb = njit(cache=True)(_poly_loop)
    _sum_nb = njit(cache=True)(_sum_loop)
    _maxdiff_nb = njit(cache=True)(_maxdiff_loop)
    _bfs_nb = njit(cache=True)(_bfs_loop)


def warmup():
    """Trigger jit compilation on tiny inputs (no-op on the numpy backend)."""
    if not use_numba():
        return
    c = subdivide_corners(1, 2)
    a, b = c[:, 0].copy(), c[:, 1].copy()
    descend_scaled(a + 2, b, 1, 0, 1)
    eval_poly_scaled(a, b, 2, [1, 0], [0, 1], [1.0, 1.0])
    sum_values(np.ones(4))
    max_pair_diff(np.zeros(2), np.ones(2), np.ones(2))
    bfs_hops(np.array([0, 1, 2]), np.array([1, 0]), 0)
