import math
from fractions import Fraction

import numpy as np
import pytest

from gasket_solenoid.dyadic import DyadicScalar, TrianglePoint, dyadic, rot_apply


def test_normalization():
    assert DyadicScalar(4) == DyadicScalar(1, 2)
    assert DyadicScalar(12, -2) == DyadicScalar(3, 0)
    z = DyadicScalar(0, 17)
    assert z.mantissa == 0 and z.exponent == 0


def test_from_fraction_rejects_non_dyadic():
    assert DyadicScalar.from_fraction(Fraction(3, 8)) == DyadicScalar(3, -3)
    with pytest.raises(ValueError):
        DyadicScalar.from_fraction(Fraction(1, 3))


def test_arithmetic_exact_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = DyadicScalar(int(rng.integers(-999, 1000)), int(rng.integers(-8, 9)))
        b = DyadicScalar(int(rng.integers(-999, 1000)), int(rng.integers(-8, 9)))
        assert (a + b) - b == a
        assert (a * b).as_fraction() == a.as_fraction() * b.as_fraction()
        assert a.halve().double() == a
        assert (-a) + a == DyadicScalar(0)


def test_ordering_matches_fractions():
    vals = [DyadicScalar(m, e) for m in (-3, -1, 0, 1, 5) for e in (-2, 0, 1)]
    for a in vals:
        for b in vals:
            assert (a < b) == (a.as_fraction() < b.as_fraction())


def test_as_pair():
    assert DyadicScalar(3, -2).as_pair(-4) == 12
    with pytest.raises(ValueError):
        DyadicScalar(1, -5).as_pair(-4)


def test_squared_distance_matches_euclidean():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = TrianglePoint.of(Fraction(int(rng.integers(-8, 9)), 4), Fraction(int(rng.integers(-8, 9)), 4))
        q = TrianglePoint.of(Fraction(int(rng.integers(-8, 9)), 4), Fraction(int(rng.integers(-8, 9)), 4))
        dx = p.to_xy()[0] - q.to_xy()[0]
        dy = p.to_xy()[1] - q.to_xy()[1]
        assert math.isclose(float(p.squared_distance(q)), dx * dx + dy * dy, abs_tol=1e-12)


def test_rotation_has_order_three():
    for a, b in [(1, 0), (0, 1), (3, -2)]:
        x, y = a, b
        for _ in range(3):
            x, y = rot_apply(1, x, y)
        assert (x, y) == (a, b)
    # the two nontrivial rotations are mutually inverse
    x, y = rot_apply(2, *rot_apply(1, 7, -4))
    assert (x, y) == (7, -4)


def test_midpoint_and_scale():
    p = TrianglePoint.of(1, 0)
    q = TrianglePoint.of(0, 1)
    m = p.midpoint(q)
    assert m == TrianglePoint.of(Fraction(1, 2), Fraction(1, 2))
    assert m.scale_pow2(1) == TrianglePoint.of(1, 1)
    assert dyadic(Fraction(5, 4)) == DyadicScalar(5, -2)
