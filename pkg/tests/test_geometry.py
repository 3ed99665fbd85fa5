from fractions import Fraction

import numpy as np
import pytest

from gasket_solenoid.dyadic import DyadicScalar, TrianglePoint
from gasket_solenoid.geometry import (
    CellAddress,
    EdgeAddress,
    canonicalize,
    cell_from_corner,
    cell_nested_in,
    cell_vertices,
    edge_children,
    edge_csv_row,
    edge_endpoints,
    edge_from_endpoints,
    edges_to_csv,
    enumerate_cells,
    enumerate_edges,
    gasket_contains,
    vertex_set,
    CSV_HEADER,
)

P = TrianglePoint.of


def test_canonicalize_examples():
    assert canonicalize(CellAddress(2, "01")) == CellAddress(1, "1")
    assert canonicalize(CellAddress(0, "012")) == CellAddress(0, "012")
    assert canonicalize(CellAddress(3, "001")) == CellAddress(1, "1")


def test_canonicalize_idempotent_random():
    rng = np.random.default_rng(2)
    for _ in range(100):
        level = int(rng.integers(0, 5))
        word = "".join(rng.choice(list("012"), size=int(rng.integers(0, 6))))
        c = canonicalize(CellAddress(level, word))
        assert canonicalize(c) == c
        assert c.is_canonical


def test_cell_vertices_examples():
    assert cell_vertices(CellAddress(0, "")) == (P(0, 0), P(1, 0), P(0, 1))
    assert cell_vertices(CellAddress(0, "0")) == (
        P(0, 0), P(Fraction(1, 2), 0), P(0, Fraction(1, 2))
    )
    assert cell_vertices(CellAddress(1, "1")) == (P(1, 0), P(2, 0), P(1, 1))


def test_cell_vertices_against_rotation_image():
    # the level-1 branch cell is the generator image of the base gasket
    from gasket_solenoid.groupoid import generator

    g = generator(0, 1, 0)
    image = {g.apply_point(v) for v in cell_vertices(CellAddress(0, ""))}
    assert image == set(cell_vertices(CellAddress(1, "1")))


def test_edge_endpoints_examples():
    e = EdgeAddress(CellAddress(0, ""), (0, 1))
    assert edge_endpoints(e) == (P(0, 0), P(1, 0))
    e2 = EdgeAddress(CellAddress(0, "0"), (1, 2))
    src, tgt = edge_endpoints(e2)
    assert (src, tgt) == (P(Fraction(1, 2), 0), P(0, Fraction(1, 2)))
    assert src.squared_distance(tgt) == DyadicScalar(1, -2)  # length 1/2, exactly
    r = e2.reverse()
    assert edge_endpoints(r) == (tgt, src)
    assert r.reverse() == e2


def test_edge_lengths_exact():
    for e in enumerate_edges(2, -1, 2):
        src, tgt = edge_endpoints(e)
        assert src.squared_distance(tgt) == DyadicScalar(1, 2 * e.length_exp)


def _brute_edges(level, min_exp):
    """Independent enumeration: subdivide triangles explicitly and collect the
    oriented corner pairs of every cell of every admissible size."""
    found = set()
    tris = [tuple(cell_vertices(CellAddress(level, "")))]
    for exp in range(level, min_exp - 1, -1):
        for (a, b, c) in tris:
            for u, v in ((a, b), (b, a), (a, c), (c, a), (b, c), (c, b)):
                found.add((u, v))
        tris = [
            child
            for (a, b, c) in tris
            for child in (
                (a, a.midpoint(b), a.midpoint(c)),
                (a.midpoint(b), b, b.midpoint(c)),
                (a.midpoint(c), b.midpoint(c), c),
            )
        ]
    return found


@pytest.mark.parametrize(
    "level,min_exp,max_exp,count",
    [(0, 0, 0, 6), (1, 0, 1, 24), (0, -2, 0, 78)],
)
def test_enumerate_edges_counts(level, min_exp, max_exp, count):
    edges = enumerate_edges(level, min_exp, max_exp)
    assert len(edges) == count
    assert len(set(edges)) == count  # no duplicate addresses
    # endpoint pairs agree with the brute-force subdivision oracle
    got = {edge_endpoints(e) for e in edges}
    assert got == _brute_edges(level, min_exp)


def test_enumerate_edges_split_by_length():
    edges = enumerate_edges(1, 0, 1)
    by_len = {}
    for e in edges:
        by_len.setdefault(e.length_exp, []).append(e)
    assert len(by_len[1]) == 6 and len(by_len[0]) == 18


def test_enumerate_edges_rejects_bad_range():
    with pytest.raises(ValueError):
        enumerate_edges(1, 1, 0)
    with pytest.raises(ValueError):
        enumerate_edges(1, 0, 2)


def test_enumeration_order_is_deterministic():
    a = enumerate_edges(2, -1, 2)
    b = enumerate_edges(2, -1, 2)
    assert a == b
    assert a[0].length_exp == 2  # longest class first


def test_edges_round_trip_through_endpoints():
    for e in enumerate_edges(1, -1, 1):
        src, tgt = edge_endpoints(e)
        assert edge_from_endpoints(src, tgt) == e


def test_nesting_in_next_level():
    inner = {edge_endpoints(e) for e in enumerate_edges(1, 0, 1)}
    outer = {edge_endpoints(e) for e in enumerate_edges(2, 0, 2)}
    assert inner <= outer


def test_cell_enumeration_counts():
    for n in range(0, 4):
        for j in range(-2, n + 1):
            assert len(enumerate_cells(n, j)) == 3 ** (n - j)


def test_cell_from_corner_round_trip():
    for cell in enumerate_cells(2, -1):
        corner = cell_vertices(cell)[0]
        assert cell_from_corner(corner, cell.size_exp) == cell


def test_cell_nesting():
    assert cell_nested_in(CellAddress(0, "01"), CellAddress(0, "0"))
    assert cell_nested_in(CellAddress(1, "1"), CellAddress(1, ""))
    assert not cell_nested_in(CellAddress(0, "1"), CellAddress(0, "0"))
    assert not cell_nested_in(CellAddress(1, ""), CellAddress(1, "1"))


def test_gasket_membership():
    assert gasket_contains(P(Fraction(1, 2), 0), 0)
    assert gasket_contains(P(Fraction(1, 4), Fraction(1, 4)), 0)
    # center of the removed middle triangle is not in the gasket
    assert not gasket_contains(P(Fraction(3, 8), Fraction(3, 8)), 0)
    assert not gasket_contains(P(2, 0), 0)
    assert gasket_contains(P(2, 0), 1)


@pytest.mark.parametrize("resolution,n_vertices", [(0, 3), (1, 6), (2, 15)])
def test_vertex_set_counts(resolution, n_vertices):
    vs = vertex_set(0, resolution)
    assert len(vs.points) == n_vertices
    # undirected adjacency count: 3 per finest cell
    assert sum(len(a) for a in vs.adjacency) == 2 * 3 * 3**resolution


def test_vertex_set_closed_form():
    for r in range(0, 6):
        assert len(vertex_set(0, r).points) == 3 * (3**r + 1) // 2


def test_edge_children_cover_parent():
    e = EdgeAddress(CellAddress(1, ""), (0, 2))
    c1, c2 = edge_children(e)
    s, t = edge_endpoints(e)
    s1, t1 = edge_endpoints(c1)
    s2, t2 = edge_endpoints(c2)
    assert s1 == s and t2 == t and t1 == s2 == s.midpoint(t)


def test_csv_dump():
    edges = enumerate_edges(0, 0, 0)
    text = edges_to_csv(edges)
    lines = text.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 7
    assert edge_csv_row(edges[0]).split(",")[:5] == ["0", "", "0", "1", "0"]
