"""Groupoid-invariant functions on the infinite fractafold.

A level-n invariant function is determined by its values on K_n: any point of
a higher tower level descends through the covering maps to K_n.  Built-in
descriptors are polynomials in the triangular coordinates (constants, affine,
their products and powers) plus tabulated vertex data for external functions;
polynomial values at dyadic vertices are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .constants import MEAN_NORMALIZATION
from .dyadic import TrianglePoint
from .geometry import gasket_contains, vertex_set
from .groupoid import descend_point

_PACK_SHIFT = 1 << 21


class UnsampledVertexError(KeyError):
    pass


def _pack(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size and (a.min() < 0 or b.min() < 0 or a.max() >= _PACK_SHIFT or b.max() >= _PACK_SHIFT):
        raise ValueError("coordinates out of packing range")
    return a * _PACK_SHIFT + b


@dataclass(frozen=True)
class Polynomial:
    """sum coeffs[(i,j)] * alpha**i * beta**j, coefficients exact rationals."""

    coeffs: tuple  # ((i, j, Fraction), ...) sorted

    @classmethod
    def make(cls, mapping) -> "Polynomial":
        items = tuple(
            sorted((i, j, Fraction(c)) for (i, j), c in mapping.items() if c != 0)
        )
        return cls(items)

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls.make({(0, 0): c})

    @classmethod
    def affine(cls, c0, ca, cb) -> "Polynomial":
        return cls.make({(0, 0): c0, (1, 0): ca, (0, 1): cb})

    def eval_exact(self, p: TrianglePoint) -> Fraction:
        a, b = p.as_fractions()
        return sum((c * a**i * b**j for i, j, c in self.coeffs), Fraction(0))

    def arrays(self):
        if not self.coeffs:
            return (np.zeros(1, np.int64), np.zeros(1, np.int64), np.zeros(1, np.float64))
        ea = np.array([i for i, _, _ in self.coeffs], np.int64)
        eb = np.array([j for _, j, _ in self.coeffs], np.int64)
        cs = np.array([float(c) for _, _, c in self.coeffs], np.float64)
        return ea, eb, cs

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        acc: dict = {}
        for i1, j1, c1 in self.coeffs:
            for i2, j2, c2 in other.coeffs:
                key = (i1 + i2, j1 + j2)
                acc[key] = acc.get(key, Fraction(0)) + c1 * c2
        return Polynomial.make(acc)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        acc = {(i, j): c for i, j, c in self.coeffs}
        for i, j, c in other.coeffs:
            acc[(i, j)] = acc.get((i, j), Fraction(0)) + c
        return Polynomial.make(acc)

    def sup_norm_bound(self, level: int) -> float:
        # crude bound on K_level where 0 <= alpha, beta <= 2**level
        return sum(abs(float(c)) * 2.0 ** (level * (i + j)) for i, j, c in self.coeffs)


@dataclass(frozen=True)
class Tabulated:
    """Vertex-table descriptor for functions supplied from outside."""

    table: dict  # TrianglePoint -> float
    unit_exp: int  # coordinates are multiples of 2**-unit_exp
    _packed: dict = field(default_factory=dict, compare=False, repr=False)

    def eval_exact(self, p: TrianglePoint):
        try:
            return self.table[p]
        except KeyError:
            raise UnsampledVertexError(f"{p} is not a sampled vertex") from None

    def packed(self):
        if "keys" not in self._packed:
            items = []
            for p, v in self.table.items():
                a = p.alpha.as_pair(-self.unit_exp)
                b = p.beta.as_pair(-self.unit_exp)
                items.append((a * _PACK_SHIFT + b, float(v)))
            items.sort()
            self._packed["keys"] = np.array([k for k, _ in items], np.int64)
            self._packed["values"] = np.array([v for _, v in items], np.float64)
        return self._packed["keys"], self._packed["values"]


@dataclass(frozen=True)
class SampledFunction:
    """Element of the level-`invariance_level` algebra, sampled on K_`level`.

    `evaluate` works at any vertex of any tower level by descending through
    the covering maps; `level` only records where the sample table lives
    (pullbacks raise it without changing the function).
    """

    invariance_level: int
    resolution: int
    descriptor: object
    level: int = None  # type: ignore[assignment]
    name: str = ""

    def __post_init__(self):
        if self.level is None:
            object.__setattr__(self, "level", self.invariance_level)
        if self.level < self.invariance_level:
            raise ValueError("sampling level below invariance level")

    # -- pointwise -----------------------------------------------------------

    def evaluate(self, x: TrianglePoint, ambient_level: int | None = None, exact: bool = False):
        if ambient_level is not None and not gasket_contains(x, ambient_level):
            raise UnsampledVertexError(f"{x} is not a point of K_{ambient_level}")
        p = descend_point(x, self.invariance_level)
        value = self.descriptor.eval_exact(p)
        return value if exact else float(value)

    def eval_scaled(self, a, b, point_level: int, unit_exp: int) -> np.ndarray:
        """Vectorized evaluation at scaled-integer coordinates a,b * 2**-unit_exp."""
        a, b = kernels.descend_scaled(a, b, point_level, self.invariance_level, 1 << unit_exp)
        if isinstance(self.descriptor, Polynomial):
            ea, eb, cs = self.descriptor.arrays()
            return kernels.eval_poly_scaled(a, b, 1 << unit_exp, ea, eb, cs)
        keys_sorted, vals = self.descriptor.packed()
        shift = unit_exp - self.descriptor.unit_exp
        if shift >= 0:
            if shift and (((a | b) & ((1 << shift) - 1)).any()):
                raise UnsampledVertexError("query points finer than the sample table")
            a, b = a >> shift, b >> shift
        else:
            a, b = a << -shift, b << -shift
        keys = _pack(a, b)
        pos = np.searchsorted(keys_sorted, keys)
        ok = (pos < keys_sorted.size) & (keys_sorted[np.minimum(pos, keys_sorted.size - 1)] == keys)
        if not ok.all():
            raise UnsampledVertexError("query hit unsampled vertices")
        return vals[pos]

    # -- structure -----------------------------------------------------------

    @property
    def values(self) -> dict:
        """Vertex table on vertex_set(level, resolution); built on first use."""
        cache = getattr(self, "_values_cache", None)
        if cache is None:
            vs = vertex_set(self.level, self.resolution)
            cache = {p: self.evaluate(p) for p in vs.points}
            object.__setattr__(self, "_values_cache", cache)
        return cache

    def __mul__(self, other: "SampledFunction") -> "SampledFunction":
        if self.invariance_level != other.invariance_level:
            raise ValueError("can only multiply functions of equal invariance level")
        return SampledFunction(
            self.invariance_level,
            min(self.resolution, other.resolution),
            self.descriptor * other.descriptor,
            max(self.level, other.level),
            name=f"({self.name})*({other.name})",
        )


def constant(c, invariance_level: int = 0, resolution: int = 8) -> SampledFunction:
    return SampledFunction(invariance_level, resolution, Polynomial.constant(c), name=str(c))


def coordinate_alpha(resolution: int = 8) -> SampledFunction:
    return SampledFunction(0, resolution, Polynomial.affine(0, 1, 0), name="alpha")


def coordinate_beta(resolution: int = 8) -> SampledFunction:
    return SampledFunction(0, resolution, Polynomial.affine(0, 0, 1), name="beta")


def polynomial_function(coeffs, invariance_level: int = 0, resolution: int = 8, name: str = "poly") -> SampledFunction:
    return SampledFunction(invariance_level, resolution, Polynomial.make(coeffs), name=name)


def tabulated_function(table, invariance_level: int, resolution: int, level: int | None = None) -> SampledFunction:
    return SampledFunction(
        invariance_level,
        resolution,
        Tabulated(table, unit_exp=max(resolution, 0)),
        level if level is not None else invariance_level,
        name="tabulated",
    )


def pullback(f: SampledFunction, target_level: int) -> SampledFunction:
    """The same element of the limit algebra, re-sampled on K_target_level."""
    if target_level < f.invariance_level:
        raise ValueError(
            f"target level {target_level} below invariance level {f.invariance_level}"
        )
    return SampledFunction(
        f.invariance_level,
        f.resolution,
        f.descriptor,
        target_level,
        name=f"pullback({f.name or 'f'},{target_level})",
    )


# ---------------------------------------------------------------------------
# edge machinery shared by the seminorm, the quadrature and the zeta sums

def _class_vertex_values(f: SampledFunction, ambient: int, length_exp: int):
    """Values of f at the three vertex families of the size-2**length_exp cells
    of K_ambient, in the fixed subdivision order."""
    unit_exp = max(0, -length_exp)
    size = 1 << (ambient + unit_exp)
    corners = kernels.subdivide_corners(ambient - length_exp, size)
    out = []
    for va, vb in (
        (corners[:, 0], corners[:, 1]),
        (corners[:, 0] + (1 << (length_exp + unit_exp)), corners[:, 1]),
        (corners[:, 0], corners[:, 1] + (1 << (length_exp + unit_exp))),
    ):
        out.append(f.eval_scaled(va, vb, ambient, unit_exp))
    return out


def lipschitz_seminorm(f: SampledFunction, min_len_exp: int) -> float:
    """sup |f(e+) - f(e-)| / length(e) over edges of K_level with length
    between 2**min_len_exp and 2**level.

    Equals the truncated commutator norm with the phase-times-modulus Dirac
    operator; the sup over all finer edges is approached monotonically.
    """
    home = f.level
    if min_len_exp > home:
        raise ValueError("min_len_exp exceeds the sampling level")
    best = 0.0
    for k in range(home, min_len_exp - 1, -1):
        f0, f1, f2 = _class_vertex_values(f, home, k)
        best = max(best, kernels.max_pair_diff(f0, f1, f2) / 2.0**k)
    return best


def integrate(f: SampledFunction, level: int, resolution: int, exact: bool = False):
    """Self-similar quadrature of f over K_level: sum over size-2**-resolution
    cells of (cell measure) * (mean of the three vertex values); vol(K) = 1.

    The exact mode integrates polynomial descriptors in closed form through
    the self-similar moment recursion.
    """
    if level < f.invariance_level:
        raise ValueError("integration level below invariance level")
    if resolution < -level:
        raise ValueError("resolution coarser than the integration domain")
    if exact:
        if not isinstance(f.descriptor, Polynomial):
            raise ValueError("exact integration needs a polynomial descriptor")
        n = f.invariance_level
        base = sum(
            (
                c * Fraction(3) ** n * Fraction(2) ** (n * (i + j)) * gasket_moment(i, j)
                for i, j, c in f.descriptor.coeffs
            ),
            Fraction(0),
        )
        return base * Fraction(3) ** (level - n)
    f0, f1, f2 = _class_vertex_values(f, level, -resolution)
    mean_sum = (kernels.sum_values(f0) + kernels.sum_values(f1) + kernels.sum_values(f2)) / 3.0
    return mean_sum * 3.0 ** (-resolution)


def integrate_with_bound(f: SampledFunction, level: int, resolution: int):
    """Quadrature value plus a modulus-of-continuity error bound."""
    value = integrate(f, level, resolution)
    lip = lipschitz_seminorm(f, max(-resolution, -8))
    bound = lip * 2.0 ** (-resolution) * 3.0**level
    return value, bound


@dataclass(frozen=True)
class FolnerMean:
    value: float
    levels: tuple
    sequence: tuple


def folner_mean(f: SampledFunction, max_level: int, resolution: int | None = None) -> FolnerMean:
    """Normalized means (6/log3) * int_{K_m} f / vol(K_m) for m up to max_level.

    For an invariant function the sequence is constant from the invariance
    level on: the three copies of K_m inside K_{m+1} carry identical samples.
    """
    if max_level < f.invariance_level:
        raise ValueError("max_level below invariance level")
    r = f.resolution if resolution is None else resolution
    levels = tuple(range(f.invariance_level, max_level + 1))
    seq = tuple(
        MEAN_NORMALIZATION * integrate(f, m, r) / 3.0**m for m in levels
    )
    return FolnerMean(seq[-1], levels, seq)


@lru_cache(maxsize=None)
def gasket_moment(i: int, j: int) -> Fraction:
    """Exact moment int_K alpha**i beta**j dmu for the normalized self-similar
    measure: solves mu = (1/3) sum_t mu o w_t**-1 degree by degree."""
    if i == 0 and j == 0:
        return Fraction(1)
    scale = Fraction(1, 2 ** (i + j))
    lower = Fraction(0)
    for a in range(i):
        lower += math.comb(i, a) * gasket_moment(a, j)
    for b in range(j):
        lower += math.comb(j, b) * gasket_moment(i, b)
    return (scale / 3) * lower / (1 - scale)
