"""Exact dyadic scalars and triangular-lattice coordinates.

Every vertex of the gasket tower has coordinates of the form m * 2**e in the
basis (v1 - v0, v2 - v0).  Keeping coordinates exact makes point identification
at ramification points decidable, so no geometric predicate ever depends on
floating-point rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True, slots=True)
class DyadicScalar:
    """Value mantissa * 2**exponent, normalized so mantissa is odd or zero."""

    mantissa: int
    exponent: int = 0

    def __post_init__(self):
        m, e = self.mantissa, self.exponent
        if m == 0:
            e = 0
        else:
            while m % 2 == 0:
                m //= 2
                e += 1
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def from_fraction(cls, value) -> "DyadicScalar":
        q = Fraction(value)
        den = q.denominator
        e = den.bit_length() - 1
        if den != 1 << e:
            raise ValueError(f"{value} is not a dyadic rational")
        return cls(q.numerator, -e)

    def as_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def as_pair(self, exponent: int) -> int:
        """Integer numerator of self relative to the unit 2**exponent."""
        shift = self.exponent - exponent
        if shift < 0:
            raise ValueError(f"{self} is finer than 2**{exponent}")
        return self.mantissa << shift

    def __float__(self):
        return self.mantissa * 2.0**self.exponent

    def __bool__(self):
        return self.mantissa != 0

    def _with(self, other) -> tuple[int, int, int]:
        # common exponent representation (ma, mb, e)
        if not isinstance(other, DyadicScalar):
            other = DyadicScalar(other)
        e = min(self.exponent, other.exponent)
        return (
            self.mantissa << (self.exponent - e),
            other.mantissa << (other.exponent - e),
            e,
        )

    def __add__(self, other):
        ma, mb, e = self._with(other)
        return DyadicScalar(ma + mb, e)

    __radd__ = __add__

    def __sub__(self, other):
        ma, mb, e = self._with(other)
        return DyadicScalar(ma - mb, e)

    def __rsub__(self, other):
        ma, mb, e = self._with(other)
        return DyadicScalar(mb - ma, e)

    def __neg__(self):
        return DyadicScalar(-self.mantissa, self.exponent)

    def __mul__(self, other):
        if not isinstance(other, DyadicScalar):
            other = DyadicScalar(other)
        return DyadicScalar(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def halve(self) -> "DyadicScalar":
        return DyadicScalar(self.mantissa, self.exponent - 1)

    def double(self) -> "DyadicScalar":
        return DyadicScalar(self.mantissa, self.exponent + 1)

    def scale_pow2(self, k: int) -> "DyadicScalar":
        return DyadicScalar(self.mantissa, self.exponent + k)

    def _cmp(self, other) -> int:
        ma, mb, _ = self._with(other)
        return (ma > mb) - (ma < mb)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __repr__(self):
        return f"Dyadic({self.as_fraction()})"


ZERO = DyadicScalar(0)
ONE = DyadicScalar(1)


def dyadic(value) -> DyadicScalar:
    """Coerce an int, Fraction or DyadicScalar to a DyadicScalar."""
    if isinstance(value, DyadicScalar):
        return value
    if isinstance(value, int):
        return DyadicScalar(value)
    return DyadicScalar.from_fraction(value)


@dataclass(frozen=True, slots=True)
class TrianglePoint:
    """Point alpha*(1,0) + beta*(1/2, sqrt(3)/2) with exact dyadic coefficients."""

    alpha: DyadicScalar
    beta: DyadicScalar

    @classmethod
    def of(cls, alpha, beta) -> "TrianglePoint":
        return cls(dyadic(alpha), dyadic(beta))

    def squared_distance(self, other: "TrianglePoint") -> DyadicScalar:
        # |u|^2 = da^2 + db^2 + da*db in the triangular basis
        da = self.alpha - other.alpha
        db = self.beta - other.beta
        return da * da + db * db + da * db

    def midpoint(self, other: "TrianglePoint") -> "TrianglePoint":
        return TrianglePoint((self.alpha + other.alpha).halve(), (self.beta + other.beta).halve())

    def scale_pow2(self, k: int) -> "TrianglePoint":
        return TrianglePoint(self.alpha.scale_pow2(k), self.beta.scale_pow2(k))

    def __add__(self, other):
        return TrianglePoint(self.alpha + other.alpha, self.beta + other.beta)

    def __sub__(self, other):
        return TrianglePoint(self.alpha - other.alpha, self.beta - other.beta)

    def to_xy(self) -> tuple[float, float]:
        a, b = float(self.alpha), float(self.beta)
        return (a + 0.5 * b, b * 0.8660254037844386)

    def as_fractions(self) -> tuple[Fraction, Fraction]:
        return (self.alpha.as_fraction(), self.beta.as_fraction())

    def __repr__(self):
        return f"Pt({self.alpha.as_fraction()}, {self.beta.as_fraction()})"


def rot_apply(rot: int, a, b):
    """Apply the order-3 rotation with index rot (powers of the 120deg CCW turn).

    In the triangular basis the 120deg matrix is [[-1,-1],[1,0]] and its square
    is [[0,1],[-1,-1]]; works on any pair supporting +,- (ints or dyadics).
    """
    if rot == 0:
        return a, b
    if rot == 1:
        return -a - b, a
    if rot == 2:
        return b, -a - b
    raise ValueError(f"rotation index {rot} not in {{0,1,2}}")
