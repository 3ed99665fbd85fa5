from fractions import Fraction

import numpy as np
import pytest

from gasket_solenoid.dyadic import TrianglePoint
from gasket_solenoid.functions import coordinate_alpha, coordinate_beta, constant
from gasket_solenoid.geometry import CellAddress, edge_endpoints
from gasket_solenoid.groupoid import morphism_between
from gasket_solenoid.operators import (
    EdgeWindow,
    GeometricOperator,
    InvarianceError,
    WindowError,
    dirac_modulus,
    dirac_operator,
    edge_reversal,
    mult_operator,
    operators_equal,
    partial_isometry,
    projection,
    random_invariant_operator,
    renormalized_trace,
    trace_recursion_check,
    verify_invariance,
)

P = TrianglePoint.of


def test_window_dimension_and_order():
    w = EdgeWindow(2, -1, 2)
    assert w.dim == sum(6 * 3 ** (2 - j) for j in (-1, 0, 1, 2))
    assert w.basis[0].length_exp == 2  # longest class first
    assert w.class_slices[2] == slice(0, 6)
    with pytest.raises(WindowError):
        EdgeWindow(1, 0, 2)


def test_projection_table():
    w = EdgeWindow(1, 0, 1)
    p01 = projection("P_n^{k,p}", w, n=1, k=0, p=0)
    assert p01.plain_trace() == 18  # 6 * 3^(1-0)
    full = projection("P^{k,p}", w, k=0, p=1)
    split = projection("P^k", w, k=0) + projection("P^k", w, k=1)
    assert operators_equal(full, split)
    zero = projection("P^k", w, k=0) @ projection("P^k", w, k=1)
    assert not zero.entries  # orthogonal classes
    with pytest.raises(ValueError):
        projection("P_n^{k,p}", w, n=1, k=1, p=0)
    with pytest.raises(ValueError):
        projection("P^k", w, k=5)


def test_cell_projection_rank():
    w = EdgeWindow(2, -1, 2)
    cell = CellAddress(1, "2")
    pc = projection("P_C", w, cell=cell)
    from gasket_solenoid.geometry import cell_nested_in

    expected = sum(1 for e in w.basis if cell_nested_in(e.cell, cell))
    assert pc.plain_trace() == expected > 0


def test_mult_operator_examples():
    w = EdgeWindow(0, 0, 0)
    one = mult_operator(constant(1), w)
    assert one.entries == {(i, i): 1.0 for i in range(6)}
    alpha = mult_operator(coordinate_alpha(), w, exact=True)
    e = w.index(next(e for e in w.basis if edge_endpoints(e) == (P(0, 0), P(1, 0))))
    assert alpha.entries[(e, e)] == 1  # value at the target vertex


def test_mult_operator_multiplicative():
    w = EdgeWindow(1, -1, 1)
    a = coordinate_alpha()
    b = coordinate_beta()
    lhs = mult_operator(a * b, w, exact=True)
    rhs = mult_operator(a, w, exact=True) @ mult_operator(b, w, exact=True)
    assert operators_equal(lhs, rhs)


def test_edge_reversal_structure():
    w = EdgeWindow(1, 0, 1)
    f = edge_reversal(w)
    assert operators_equal(f @ f, projection("P_n", w, n=1))  # F^2 = identity
    rows = [r for (r, c) in f.entries]
    assert sorted(rows) == list(range(w.dim))  # permutation: one 1 per row
    pk = projection("P^k", w, k=0)
    assert operators_equal(f @ pk, pk @ f)


def test_partial_isometry_relations():
    w = EdgeWindow(2, -1, 2)
    base = CellAddress(0, "")
    for cell in (CellAddress(1, "1"), CellAddress(2, "21")):
        gamma = morphism_between(base, cell)
        v = partial_isometry(gamma, w)
        assert operators_equal(v.adjoint() @ v, projection("P_C", w, cell=base))
        assert operators_equal(v @ v.adjoint(), projection("P_C", w, cell=cell))
        # edges keep their length class
        for (r, c) in v.entries:
            assert w.length_exps[r] == w.length_exps[c]


def test_partial_isometry_identity_is_cell_projection():
    from gasket_solenoid.groupoid import LocalIsometry

    w = EdgeWindow(1, -1, 1)
    cell = CellAddress(1, "2")
    v = partial_isometry(LocalIsometry.identity(cell), w)
    assert operators_equal(v, projection("P_C", w, cell=cell))


def test_partial_isometry_multiplicative_on_nested_composition():
    from gasket_solenoid.groupoid import compose

    w = EdgeWindow(2, 0, 2)
    g1 = morphism_between(CellAddress(1, "1"), CellAddress(2, "11"))  # unit cells
    g0 = morphism_between(CellAddress(2, "2"), CellAddress(1, ""))  # size-2 cells
    both = compose(g1, g0)  # domain shrinks to the g0-preimage of s(g1)
    lhs = partial_isometry(both, w)
    rhs = partial_isometry(g1, w) @ partial_isometry(g0, w)
    assert operators_equal(lhs, rhs)


def test_dirac_modulus_and_operator():
    w = EdgeWindow(1, -1, 1)
    dm = dirac_modulus(w)
    unit_edge = w.class_slices[0].start
    long_edge = w.class_slices[1].start
    assert dm.entries[(unit_edge, unit_edge)] == 1
    assert dm.entries[(long_edge, long_edge)] == Fraction(1, 2)
    d = dirac_operator(w)
    dd = d.to_dense()
    assert np.allclose(dd, dd.T)
    assert np.allclose(dd @ dd, dm.to_dense() @ dm.to_dense())


def test_renormalized_trace_closed_forms():
    w0 = EdgeWindow(0, 0, 0)
    assert renormalized_trace(projection("P^k", w0, k=0)) == 6
    w2 = EdgeWindow(2, -2, 2)
    assert renormalized_trace(projection("P^{-p,inf}", w2, p=2)) == 81
    # the value is window-independent
    w3 = EdgeWindow(3, -2, 3)
    assert renormalized_trace(projection("P^{-p,inf}", w3, p=2)) == 81


def test_renormalized_trace_of_alpha_times_class():
    # direct 6-term oracle: each vertex of K_0 is the target of two edges
    w = EdgeWindow(0, 0, 0)
    oracle = 2 * sum(
        coordinate_alpha().evaluate(v, exact=True)
        for v in (P(0, 0), P(1, 0), P(0, 1))
    )
    t = mult_operator(coordinate_alpha(), w, exact=True) @ projection("P^k", w, k=0)
    assert renormalized_trace(t) == oracle == 2


def test_trace_refuses_uninvariant_operators():
    w = EdgeWindow(1, 0, 1)
    v = partial_isometry(morphism_between(CellAddress(0, ""), CellAddress(1, "1")), w)
    with pytest.raises(InvarianceError):
        renormalized_trace(v)
    # a wrongly declared invariance is caught by the conjugation spot-check:
    # a single unit-edge diagonal entry is moved around by the morphisms
    i = w.class_slices[0].start
    bogus = GeometricOperator(w, {(i, i): 1.0}, 0, 0, None, False)
    with pytest.raises(InvarianceError):
        renormalized_trace(bogus)


def test_trace_rejects_support_beyond_window():
    w = EdgeWindow(1, 0, 1)
    t = GeometricOperator(w, {(0, 0): 1}, 0, 2, None, True)
    with pytest.raises(WindowError):
        renormalized_trace(t)


def test_trace_recursion_examples():
    w = EdgeWindow(3, -1, 3)
    for t in (
        projection("P^k", w, k=0),
        dirac_modulus(w),
        mult_operator(coordinate_alpha(), w),
    ):
        for m in range(0, 3):
            lhs, rhs = trace_recursion_check(t, m)
            assert lhs == rhs
    with pytest.raises(WindowError):
        trace_recursion_check(dirac_modulus(w), 3)


def test_class_traces_consistent_across_levels():
    w = EdgeWindow(3, -1, 3)
    rng = np.random.default_rng(13)
    ops = [projection("P^k", w, k=j) for j in (-1, 0)] + [
        random_invariant_operator(w, n, n - 1, rng) for n in (0, 1)
    ]
    for t in ops:
        n = t.invariance_level
        for j in range(-1, n + 1):
            for m in range(n, 4):
                assert t.class_trace(j, m) * 3**n == t.class_trace(j, n) * 3**m


def test_random_invariant_operator_passes_spot_check():
    w = EdgeWindow(2, -1, 2)
    rng = np.random.default_rng(14)
    for kwargs in ({}, {"hermitian": True}, {"complex_entries": True}):
        t = random_invariant_operator(w, 0, -1, rng, **kwargs)
        assert verify_invariance(t, tol=1e-12)


def test_trace_property_on_products():
    # |tau0(AB) - tau0(BA)| small for invariant operators on a level-(n+2) window
    rng = np.random.default_rng(15)
    w = EdgeWindow(2, -1, 2)
    for i in range(6):
        a = random_invariant_operator(w, 0, -1, rng, complex_entries=(i % 2 == 0))
        b = random_invariant_operator(w, 0, -1, rng, hermitian=(i % 3 == 0))
        lhs = renormalized_trace(a @ b)
        rhs = renormalized_trace(b @ a)
        assert abs(complex(lhs) - complex(rhs)) <= 1e-10


def test_hereditarity():
    # tau0(A T A*) <= ||A||^2 tau0(T) for positive invariant T
    rng = np.random.default_rng(16)
    w = EdgeWindow(2, -1, 2)
    for _ in range(5):
        a = random_invariant_operator(w, 0, -1, rng)
        b = random_invariant_operator(w, 0, -1, rng)
        t = b @ b.adjoint()  # positive and invariant
        lhs = renormalized_trace(a @ t @ a.adjoint())
        bound = a.norm2() ** 2 * renormalized_trace(t)
        assert float(lhs) <= float(bound) * (1 + 1e-12) + 1e-12


def test_operator_norm_routes_agree():
    w = EdgeWindow(1, -2, 1)
    t = random_invariant_operator(w, 0, -1, np.random.default_rng(17))
    dense = float(np.linalg.norm(t.to_dense(), 2))
    assert t.norm2() == pytest.approx(dense, abs=1e-10)
