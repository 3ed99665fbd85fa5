"""Combinatorial and metric model of the gasket tower K_n = w0^-n K.

Cells are addressed by (level, word): the cell w0^-level w_{word}(K).  The
canonical address is the minimal-level one, i.e. level == 0 or the word does
not start with '0' (stripping a leading 0 lowers the level by one).  Oriented
edges are (cell, ordered vertex pair).  All coordinates are exact dyadics in
the triangular basis, so lengths and incidence are decided exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import ONE, ZERO, DyadicScalar, TrianglePoint, dyadic

#: base triangle vertices v0, v1, v2 in (alpha, beta) coordinates
BASE_VERTICES = (
    TrianglePoint(ZERO, ZERO),
    TrianglePoint(ONE, ZERO),
    TrianglePoint(ZERO, ONE),
)

#: the 6 oriented edges of E_0 as ordered vertex-index pairs, in canonical order
EDGE_BASES = ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))

_CORNERS = ((0, 0), (1, 0), (0, 1))


class MalformedAddressError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class CellAddress:
    """The cell w0^-level w_{i1} ... w_{ik}(K); size of the cell is 2**(level-k)."""

    level: int
    word: str = ""

    def __post_init__(self):
        if self.level < 0:
            raise MalformedAddressError(f"negative level {self.level}")
        if any(c not in "012" for c in self.word):
            raise MalformedAddressError(f"bad word {self.word!r}")

    @property
    def size_exp(self) -> int:
        return self.level - len(self.word)

    @property
    def is_canonical(self) -> bool:
        return self.level == 0 or not self.word.startswith("0")

    def __str__(self):
        return f"{self.level}:{self.word}"

    @classmethod
    def parse(cls, text: str) -> "CellAddress":
        level, _, word = text.partition(":")
        return cls(int(level), word)


def canonicalize(cell: CellAddress) -> CellAddress:
    """Strip leading zeros: w0^-(n+1) w0 w_rest = w0^-n w_rest."""
    level, word = cell.level, cell.word
    while level > 0 and word.startswith("0"):
        level -= 1
        word = word[1:]
    return CellAddress(level, word)


def cell_vertices(cell: CellAddress) -> tuple[TrianglePoint, TrianglePoint, TrianglePoint]:
    """Exact images of (v0, v1, v2) under w0^-level w_{word}."""
    points = []
    for v in BASE_VERTICES:
        a, b = v.alpha, v.beta
        for letter in reversed(cell.word):
            ca, cb = _CORNERS[int(letter)]
            a = (a + ca).halve()
            b = (b + cb).halve()
        points.append(TrianglePoint(a.scale_pow2(cell.level), b.scale_pow2(cell.level)))
    return tuple(points)


def cell_corner(cell: CellAddress) -> TrianglePoint:
    """The right-angle corner (min alpha, min beta); cells are upright triangles."""
    return cell_vertices(cell)[0]


def cell_contains_point(cell: CellAddress, p: TrianglePoint) -> bool:
    """Convex-hull membership; on gasket points this equals cell membership."""
    corner = cell_corner(cell)
    size = DyadicScalar(1, cell.size_exp)
    ra = p.alpha - corner.alpha
    rb = p.beta - corner.beta
    return ra >= ZERO and rb >= ZERO and ra + rb <= size


def cell_nested_in(inner: CellAddress, outer: CellAddress) -> bool:
    """Exact containment test for canonical addresses."""
    if inner.size_exp > outer.size_exp:
        return False
    level = max(inner.level, outer.level)
    wi = "0" * (level - inner.level) + inner.word
    wo = "0" * (level - outer.level) + outer.word
    return wi.startswith(wo)


def cell_from_corner(corner: TrianglePoint, size_exp: int) -> CellAddress:
    """Canonical address of the cell with the given corner and size 2**size_exp."""
    size = DyadicScalar(1, size_exp)
    if corner.alpha < ZERO or corner.beta < ZERO:
        raise MalformedAddressError(f"corner {corner} outside K_inf")
    level = max(size_exp, 0)
    while corner.alpha + corner.beta + size > DyadicScalar(1, level):
        level += 1
    a, b = corner.alpha, corner.beta
    word = []
    for exp in range(level, size_exp, -1):
        half = DyadicScalar(1, exp - 1)
        if a >= half:
            word.append("1")
            a = a - half
        elif b >= half:
            word.append("2")
            b = b - half
        else:
            word.append("0")
    if a != ZERO or b != ZERO:
        raise MalformedAddressError(f"{corner} is not a corner at size 2**{size_exp}")
    return canonicalize(CellAddress(level, "".join(word)))


def gasket_contains(p: TrianglePoint, level: int) -> bool:
    """Exact membership of a dyadic point in the gasket K_level."""
    size = DyadicScalar(1, level)
    a, b = p.alpha, p.beta
    if a < ZERO or b < ZERO or a + b > size:
        return False
    min_exp = min(a.exponent if a else 0, b.exponent if b else 0)
    for exp in range(level, min_exp - 1, -1):
        s = DyadicScalar(1, exp)
        if (a == ZERO and b == ZERO) or (a == s and b == ZERO) or (a == ZERO and b == s):
            return True
        half = DyadicScalar(1, exp - 1)
        if a >= half:
            a = a - half
        elif b >= half:
            b = b - half
        elif a + b > half:
            return False  # inside the removed middle triangle
    return False


@dataclass(frozen=True, slots=True)
class EdgeAddress:
    """Oriented edge: image of the E_0 edge (p_i, p_j) inside `cell`."""

    cell: CellAddress
    base: tuple[int, int]

    def __post_init__(self):
        i, j = self.base
        if i == j or not {i, j} <= {0, 1, 2}:
            raise MalformedAddressError(f"bad base pair {self.base}")

    @property
    def length_exp(self) -> int:
        return self.cell.size_exp

    @property
    def is_canonical(self) -> bool:
        return self.cell.is_canonical

    def reverse(self) -> "EdgeAddress":
        return EdgeAddress(self.cell, (self.base[1], self.base[0]))

    def __str__(self):
        return f"{self.cell}/{self.base[0]}{self.base[1]}"


def edge_endpoints(e: EdgeAddress) -> tuple[TrianglePoint, TrianglePoint]:
    """(source, target) = (e-, e+), exact."""
    vs = cell_vertices(e.cell)
    return (vs[e.base[0]], vs[e.base[1]])


def enumerate_cells(level: int, size_exp: int) -> list[CellAddress]:
    """All canonical cells of size 2**size_exp inside K_level, word-lex ordered."""
    if size_exp > level:
        raise ValueError(f"cells of size 2**{size_exp} do not fit in K_{level}")
    cells = []
    for m in range(max(size_exp, 0), level + 1):
        k = m - size_exp
        if m == 0:
            for w in itertools.product("012", repeat=k):
                cells.append(CellAddress(0, "".join(w)))
        elif k == 0:
            cells.append(CellAddress(m, ""))
        else:
            for first in "12":
                for rest in itertools.product("012", repeat=k - 1):
                    cells.append(CellAddress(m, first + "".join(rest)))
    cells.sort(key=lambda c: c.word)
    return cells


def enumerate_edges(level: int, min_exp: int, max_exp: int) -> list[EdgeAddress]:
    """Canonical edges of K_level with 2**min_exp <= length <= 2**max_exp.

    Deterministic order: length exponent descending, then cell word, then base
    pair; downstream float reductions rely on this order being fixed.
    """
    if min_exp > max_exp:
        raise ValueError(f"min_exp {min_exp} > max_exp {max_exp}")
    if max_exp > level:
        raise ValueError(f"max_exp {max_exp} exceeds level {level}")
    edges = []
    for j in range(max_exp, min_exp - 1, -1):
        for cell in enumerate_cells(level, j):
            for base in EDGE_BASES:
                edges.append(EdgeAddress(cell, base))
    return edges


def edge_from_endpoints(p: TrianglePoint, q: TrianglePoint) -> EdgeAddress:
    """Recover the canonical address of the edge with source p and target q."""
    d2 = p.squared_distance(q)
    if d2.mantissa != 1 or d2.exponent % 2:
        raise MalformedAddressError(f"{p}->{q} is not an edge of K_inf")
    size_exp = d2.exponent // 2
    corner = TrianglePoint(
        p.alpha if p.alpha <= q.alpha else q.alpha,
        p.beta if p.beta <= q.beta else q.beta,
    )
    cell = cell_from_corner(corner, size_exp)
    vs = cell_vertices(cell)
    try:
        i = vs.index(p)
        j = vs.index(q)
    except ValueError:
        raise MalformedAddressError(f"{p}->{q} does not span a cell side") from None
    return EdgeAddress(cell, (i, j))


def edge_children(e: EdgeAddress) -> tuple[EdgeAddress, EdgeAddress]:
    """The two half-length edges covering e, sharing its midpoint.

    The side (v_i, v_j) splits into (v_i, m_ij) inside child i and (m_ij, v_j)
    inside child j, both carrying the same base pair.
    """
    i, j = e.base
    c = e.cell
    return (
        EdgeAddress(CellAddress(c.level, c.word + str(i)), (i, j)),
        EdgeAddress(CellAddress(c.level, c.word + str(j)), (i, j)),
    )


@dataclass(frozen=True)
class VertexSet:
    """Deduplicated vertices of K_level at resolution 2**-resolution, with adjacency."""

    level: int
    resolution: int
    points: tuple[TrianglePoint, ...]
    index: dict
    adjacency: tuple[tuple[int, ...], ...]


def vertex_set(level: int, resolution: int) -> VertexSet:
    """Endpoints of the finest edges of K_level, paired by finest-edge adjacency."""
    if resolution < -level:
        raise ValueError(f"resolution 2**{-resolution} coarser than K_{level}")
    points: list[TrianglePoint] = []
    index: dict[TrianglePoint, int] = {}
    neighbours: list[set[int]] = []

    def intern(p: TrianglePoint) -> int:
        i = index.get(p)
        if i is None:
            i = len(points)
            index[p] = i
            points.append(p)
            neighbours.append(set())
        return i

    for cell in enumerate_cells(level, -resolution):
        ids = [intern(v) for v in cell_vertices(cell)]
        for a, b in ((0, 1), (0, 2), (1, 2)):
            neighbours[ids[a]].add(ids[b])
            neighbours[ids[b]].add(ids[a])
    return VertexSet(
        level,
        resolution,
        tuple(points),
        index,
        tuple(tuple(sorted(s)) for s in neighbours),
    )


CSV_HEADER = (
    "level,word,i,j,len_exp,"
    "ax_mant,ax_exp,ay_mant,ay_exp,bx_mant,bx_exp,by_mant,by_exp"
)


def edge_csv_row(e: EdgeAddress) -> str:
    src, tgt = edge_endpoints(e)
    fields = [e.cell.level, e.cell.word, e.base[0], e.base[1], e.length_exp]
    for s in (src.alpha, src.beta, tgt.alpha, tgt.beta):
        fields.extend([s.mantissa, s.exponent])
    return ",".join(str(f) for f in fields)


def edges_to_csv(edges) -> str:
    return "\n".join([CSV_HEADER] + [edge_csv_row(e) for e in edges]) + "\n"


def parse_point(text: str) -> TrianglePoint:
    """Parse 'p/q,r/s' (fractions allowed) into an exact TrianglePoint."""
    try:
        a_txt, b_txt = text.split(",")
        return TrianglePoint(dyadic(Fraction(a_txt)), dyadic(Fraction(b_txt)))
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedAddressError(f"cannot parse point {text!r}: {exc}") from None
