"""The ramified self-covering and the groupoid of local isometries.

Generators R^n_{j,i}: C^n_i -> C^n_j are rotations by 240deg (j = i+1 cyclic)
or 120deg (j = i-1) about the scaled midpoints x_{i,i+1}; C^n_0 = K_n and
C^n_i = w0^-(n+1) w_i K for i = 1,2.  Rotation parts are exact integer
matrices in the triangular basis and translations are exact dyadics, so maps
compare exactly and the uniqueness of morphisms is decidable by brute force.

Words of generators are written in composition order throughout: the last
element of the list acts first, matching the product notation g_p * ... * g_1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .dyadic import ZERO, DyadicScalar, TrianglePoint, rot_apply
from .geometry import (
    CellAddress,
    EdgeAddress,
    MalformedAddressError,
    canonicalize,
    cell_contains_point,
    cell_from_corner,
    cell_nested_in,
    cell_vertices,
    edge_endpoints,
    gasket_contains,
)


class DomainError(ValueError):
    """Argument lies outside the domain of the local isometry."""


class NonComposableError(ValueError):
    """Word or pair of isometries with incompatible domains."""


class SizeMismatchError(ValueError):
    pass


#: rotation centers x_{i,i+1} at scale 0, keyed by the unordered index pair
_CENTERS = {
    frozenset((0, 1)): (1, 0),
    frozenset((1, 2)): (1, 1),
    frozenset((0, 2)): (0, 1),
}


def _tower_cell(scale: int, index: int) -> CellAddress:
    """C^n_i: K_n for i = 0, else w0^-(n+1) w_i K."""
    return CellAddress(scale, "") if index == 0 else CellAddress(scale + 1, str(index))


@dataclass(frozen=True, slots=True)
class LocalIsometry:
    """Exact affine map x -> R x + t between two same-size cells."""

    rot: int  # power of the 120deg CCW rotation, in {0, 1, 2}
    t_alpha: DyadicScalar
    t_beta: DyadicScalar
    source: CellAddress
    target: CellAddress

    @classmethod
    def identity(cls, cell: CellAddress) -> "LocalIsometry":
        cell = canonicalize(cell)
        return cls(0, ZERO, ZERO, cell, cell)

    def affine_key(self):
        return (self.rot, self.t_alpha, self.t_beta)

    def is_identity_map(self) -> bool:
        return self.rot == 0 and not self.t_alpha and not self.t_beta

    def apply_point(self, p: TrianglePoint) -> TrianglePoint:
        a, b = rot_apply(self.rot, p.alpha, p.beta)
        return TrianglePoint(a + self.t_alpha, b + self.t_beta)

    def apply_cell(self, cell: CellAddress) -> CellAddress:
        vs = [self.apply_point(v) for v in cell_vertices(cell)]
        corner = TrianglePoint(
            min((v.alpha for v in vs)),
            min((v.beta for v in vs)),
        )
        return cell_from_corner(corner, cell.size_exp)

    def apply_edge(self, e: EdgeAddress) -> EdgeAddress:
        cell = self.apply_cell(e.cell)
        vs = cell_vertices(cell)
        src, tgt = (self.apply_point(v) for v in edge_endpoints(e))
        return EdgeAddress(cell, (vs.index(src), vs.index(tgt)))

    def inverse(self) -> "LocalIsometry":
        rot = (-self.rot) % 3
        a, b = rot_apply(rot, self.t_alpha, self.t_beta)
        return LocalIsometry(rot, -a, -b, self.target, self.source)

    def __repr__(self):
        return (
            f"LocalIsometry(rot={self.rot * 120}deg, "
            f"t=({self.t_alpha.as_fraction()},{self.t_beta.as_fraction()}), "
            f"{self.source}->{self.target})"
        )


def _affine_compose(g1: LocalIsometry, g2: LocalIsometry, source, target) -> LocalIsometry:
    # affine part of g1 o g2 (g2 acts first)
    a, b = rot_apply(g1.rot, g2.t_alpha, g2.t_beta)
    return LocalIsometry(
        (g1.rot + g2.rot) % 3, a + g1.t_alpha, b + g1.t_beta, source, target
    )


@lru_cache(maxsize=None)
def generator(scale: int, to_index: int, from_index: int) -> LocalIsometry:
    """R^scale_{to,from}: C^scale_from -> C^scale_to.

    R_{i+1,i} rotates by 4pi/3 counterclockwise about the midpoint x_{i,i+1};
    R_{i,i+1} is its inverse (2pi/3).  The direction is pinned by the vertex
    images, e.g. generator(0,1,0) sends (0,0) to (1,1).
    """
    if to_index == from_index:
        raise MalformedAddressError("generator requires to_index != from_index")
    if not {to_index, from_index} <= {0, 1, 2} or scale < 0:
        raise MalformedAddressError(f"bad generator R^{scale}_{to_index}{from_index}")
    rot = 2 if (to_index - from_index) % 3 == 1 else 1
    ca, cb = _CENTERS[frozenset((to_index, from_index))]
    center_a = DyadicScalar(ca, scale) if ca else ZERO
    center_b = DyadicScalar(cb, scale) if cb else ZERO
    ra, rb = rot_apply(rot, center_a, center_b)
    return LocalIsometry(
        rot,
        center_a - ra,
        center_b - rb,
        _tower_cell(scale, from_index),
        _tower_cell(scale, to_index),
    )


def apply(gamma: LocalIsometry, x):
    """Act on a point or an oriented edge; raises DomainError outside s(gamma)."""
    if isinstance(x, TrianglePoint):
        if not cell_contains_point(gamma.source, x):
            raise DomainError(f"{x} outside source cell {gamma.source}")
        return gamma.apply_point(x)
    if isinstance(x, EdgeAddress):
        cell = canonicalize(x.cell)
        if not cell_nested_in(cell, gamma.source):
            raise DomainError(f"edge {x} outside source cell {gamma.source}")
        return gamma.apply_edge(EdgeAddress(cell, x.base))
    raise TypeError(f"cannot apply a local isometry to {type(x).__name__}")


def compose(g1: LocalIsometry, g2: LocalIsometry) -> LocalIsometry:
    """g1 o g2 (g2 acts first); domains must nest, the product domain follows."""
    mid = g2.target
    if cell_nested_in(mid, g1.source):
        target = g1.target if mid == g1.source else g1.apply_cell(mid)
        return _affine_compose(g1, g2, g2.source, target)
    if cell_nested_in(g1.source, mid):
        shrunk = g2.inverse().apply_cell(g1.source)
        return _affine_compose(g1, g2, shrunk, g1.target)
    raise NonComposableError(
        f"target {mid} of the first factor and source {g1.source} do not nest"
    )


# ---------------------------------------------------------------------------
# generator words

@dataclass(frozen=True, slots=True)
class GeneratorSymbol:
    """Symbol R^scale_{to,from}; ascending iff from == 0, descending iff to == 0."""

    scale: int
    to_index: int
    from_index: int

    def __post_init__(self):
        if self.to_index == self.from_index:
            raise MalformedAddressError("degenerate generator symbol")

    @property
    def is_ascending(self) -> bool:
        return self.from_index == 0

    @property
    def is_descending(self) -> bool:
        return self.to_index == 0

    @property
    def is_constant_level(self) -> bool:
        return 0 not in (self.to_index, self.from_index)

    def isometry(self) -> LocalIsometry:
        return generator(self.scale, self.to_index, self.from_index)

    def inverse(self) -> "GeneratorSymbol":
        return GeneratorSymbol(self.scale, self.from_index, self.to_index)

    @property
    def name(self) -> str:
        return f"R{self.scale}_{self.to_index}{self.from_index}"

    @classmethod
    def parse(cls, text: str) -> "GeneratorSymbol":
        try:
            head, tail = text.strip().split("_")
            if not head.startswith("R"):
                raise ValueError
            return cls(int(head[1:]), int(tail[0]), int(tail[1]))
        except (ValueError, IndexError):
            raise MalformedAddressError(
                f"cannot parse generator symbol {text!r}; expected e.g. R0_21"
            ) from None


def run_word(word) -> LocalIsometry:
    """Compose a word of symbols (composition order) into one LocalIsometry."""
    if not word:
        raise NonComposableError("empty word has no defined domain")
    gammas = [sym.isometry() for sym in reversed(word)]
    iso = gammas[0]
    for g in gammas[1:]:
        iso = compose(g, iso)
    return iso


def normal_form(word) -> list[GeneratorSymbol]:
    """Rewrite a composable word with target K_n into descending generators.

    Implements the reduction of the uniqueness proof: ascending followed by the
    matching descending cancels, constant-level runs collapse, and a
    constant-level element is absorbed into the descending one that follows;
    all three are instances of the same-scale contraction
    R^n_{c,b} R^n_{b,a} = R^n_{c,a}.
    """
    word = list(word)
    if word:
        iso = run_word(word)
        if iso.target.word != "":
            raise NonComposableError(
                f"word target {iso.target} is not a tower level K_n"
            )
    out = list(word)
    changed = True
    while changed:
        changed = False
        for t in range(len(out) - 1):
            left, right = out[t], out[t + 1]
            if left.scale == right.scale and left.from_index == right.to_index:
                if left.to_index == right.from_index:
                    del out[t : t + 2]
                else:
                    out[t : t + 2] = [
                        GeneratorSymbol(left.scale, left.to_index, right.from_index)
                    ]
                changed = True
                break
    if any(not sym.is_descending for sym in out):
        raise NonComposableError(f"word does not reduce to descending form: {out}")
    return out


def descending_word(cell: CellAddress) -> list[GeneratorSymbol]:
    """The unique descending word mapping `cell` onto K_size_exp(cell).

    Each step applies the only descending generator whose source contains the
    cell.  Every step lowers the containing level by at least one, so the word
    has at most level(cell) - size_exp(cell) symbols; a step may drop several
    levels at once when the image lands inside a deeper tower piece.
    """
    cur = canonicalize(cell)
    if cur.size_exp < 0:
        raise SizeMismatchError(f"{cell} has size < 1; not a groupoid object")
    applied = []
    while cur.level > cur.size_exp:
        branch = int(cur.word[0])  # canonical => first letter in {1,2}
        sym = GeneratorSymbol(cur.level - 1, 0, branch)
        applied.append(sym)
        cur = sym.isometry().apply_cell(cur)
    applied.reverse()
    return applied


@lru_cache(maxsize=None)
def morphism_between(c1: CellAddress, c2: CellAddress) -> LocalIsometry:
    """The unique groupoid element with source c1 and target c2 (equal sizes)."""
    c1 = canonicalize(c1)
    c2 = canonicalize(c2)
    if c1.size_exp != c2.size_exp:
        raise SizeMismatchError(f"{c1} and {c2} have different sizes")
    if c1 == c2:
        return LocalIsometry.identity(c1)
    w1 = descending_word(c1)
    w2 = descending_word(c2)
    iso1 = run_word(w1) if w1 else LocalIsometry.identity(c1)
    iso2 = run_word(w2) if w2 else LocalIsometry.identity(c2)
    up = iso2.inverse()
    return _affine_compose(up, iso1, c1, c2)


# ---------------------------------------------------------------------------
# covering map and point descent

def point_min_level(p: TrianglePoint) -> int:
    if p.alpha < ZERO or p.beta < ZERO:
        raise DomainError(f"{p} outside K_inf")
    m = 0
    s = p.alpha + p.beta
    while s > DyadicScalar(1, m):
        m += 1
    return m


def covering_map(x: TrianglePoint, scale: int) -> TrianglePoint:
    """p_scale: K_{scale+1} -> K_scale; identity on K_scale, rotations above.

    Well defined: at the three ramification points the two branch values agree
    (they are the rotation centers / their common images).
    """
    if not gasket_contains(x, scale + 1):
        raise DomainError(f"{x} is not a point of K_{scale + 1}")
    h = DyadicScalar(1, scale)
    if x.alpha >= h:
        return generator(scale, 0, 1).apply_point(x)
    if x.beta >= h:
        return generator(scale, 0, 2).apply_point(x)
    return x


def covering_branch_values(x: TrianglePoint, scale: int) -> list[TrianglePoint]:
    """Values of every branch of p_scale whose closed domain contains x."""
    values = []
    for index in (0, 1, 2):
        cell = _tower_cell(scale, index)
        if cell_contains_point(cell, x):
            if index == 0:
                values.append(x)
            else:
                values.append(generator(scale, 0, index).apply_point(x))
    if not values:
        raise DomainError(f"{x} is not in K_{scale + 1}")
    return values


def ramification_points(scale: int) -> tuple[TrianglePoint, ...]:
    """The three double points of p_scale: 2**scale * x_{i,i+1}."""
    return tuple(
        TrianglePoint.of(a, b).scale_pow2(scale) for a, b in ((1, 0), (1, 1), (0, 1))
    )


def descend_point(x: TrianglePoint, target_level: int) -> TrianglePoint:
    """Iterate covering maps until the point lies in K_target_level."""
    level = max(point_min_level(x), target_level)
    p = x
    while level > target_level:
        h = DyadicScalar(1, level - 1)
        if p.alpha >= h:
            p = generator(level - 1, 0, 1).apply_point(p)
        elif p.beta >= h:
            p = generator(level - 1, 0, 2).apply_point(p)
        level -= 1
    return p
