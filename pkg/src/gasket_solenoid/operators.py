"""Finite edge-window operators and the renormalized trace.

Operators act on the span of a window of canonical edges of K_level with
length exponents in [min_exp, max_exp].  Entries are kept as exact Python
numbers (int / Fraction) wherever the construction is exact, so the trace
identities of the projection family are verified with zero tolerance; float
entries are used for sampled functions and randomized operators.

The renormalized trace of an invariant operator with bounded length support is
eventually constant: tau0(T) = tr(P_m T) / 3**m as soon as m dominates the
invariance level and the length support, because tr(P^q_q T) = 0 for q > m.
Projections whose diagonal continues identically through all longer edges
(P^{-p,inf}) carry the analytic value of the geometric tail instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import (
    CellAddress,
    EdgeAddress,
    canonicalize,
    cell_nested_in,
    cell_vertices,
    enumerate_cells,
    EDGE_BASES,
)
from .groupoid import LocalIsometry, morphism_between


class InvarianceError(ValueError):
    """Operator lacks (or fails to verify) the declared invariance level."""


class WindowError(ValueError):
    """Operator support or trace cutoff does not fit inside the window."""


class EdgeWindow:
    """Ordered basis of the canonical edges of K_level with lengths
    2**min_exp .. 2**max_exp (module-wide canonical order)."""

    def __init__(self, level: int, min_exp: int, max_exp: int):
        if not (min_exp <= max_exp <= level):
            raise WindowError(f"need min_exp <= max_exp <= level, got {min_exp},{max_exp},{level}")
        self.level = level
        self.min_exp = min_exp
        self.max_exp = max_exp
        self.unit_exp = max(0, -min_exp)

        basis: list[EdgeAddress] = []
        cell_levels: list[int] = []
        length_exps: list[int] = []
        tgt_a: list[int] = []
        tgt_b: list[int] = []
        src_a: list[int] = []
        src_b: list[int] = []
        self.class_slices: dict[int, slice] = {}
        for j in range(max_exp, min_exp - 1, -1):
            start = len(basis)
            for cell in enumerate_cells(level, j):
                vs = cell_vertices(cell)
                coords = [
                    (v.alpha.as_pair(-self.unit_exp), v.beta.as_pair(-self.unit_exp))
                    for v in vs
                ]
                for i, k in EDGE_BASES:
                    basis.append(EdgeAddress(cell, (i, k)))
                    cell_levels.append(cell.level)
                    length_exps.append(j)
                    src_a.append(coords[i][0])
                    src_b.append(coords[i][1])
                    tgt_a.append(coords[k][0])
                    tgt_b.append(coords[k][1])
            self.class_slices[j] = slice(start, len(basis))
        self.basis = tuple(basis)
        self.cell_levels = np.array(cell_levels, np.int64)
        self.length_exps = np.array(length_exps, np.int64)
        self.target_a = np.array(tgt_a, np.int64)
        self.target_b = np.array(tgt_b, np.int64)
        self.source_a = np.array(src_a, np.int64)
        self.source_b = np.array(src_b, np.int64)
        self._index = {e: i for i, e in enumerate(basis)}
        self._orbit_maps: dict = {}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, edge: EdgeAddress) -> int:
        try:
            return self._index[EdgeAddress(canonicalize(edge.cell), edge.base)]
        except KeyError:
            raise WindowError(f"edge {edge} outside window") from None

    def level_mask(self, m: int) -> np.ndarray:
        return self.cell_levels <= m

    def local_indices(self, invariance_level: int, min_exp: int) -> np.ndarray:
        """Indices of the edges inside the reference cell K_invariance_level
        with length >= 2**min_exp."""
        mask = (self.cell_levels <= invariance_level) & (self.length_exps >= min_exp)
        return np.nonzero(mask)[0]

    def orbit_index_maps(self, invariance_level: int, min_exp: int):
        """For each cell C of size 2**invariance_level in K_level, the image
        indices of the reference-cell edges under the morphism K_n -> C."""
        key = (invariance_level, min_exp)
        if key not in self._orbit_maps:
            local = self.local_indices(invariance_level, min_exp)
            ref = CellAddress(invariance_level, "")
            maps = []
            for cell in enumerate_cells(self.level, invariance_level):
                gamma = morphism_between(ref, cell)
                if cell == ref:
                    maps.append(local.copy())
                else:
                    maps.append(
                        np.array(
                            [self.index(gamma.apply_edge(self.basis[i])) for i in local],
                            np.int64,
                        )
                    )
            self._orbit_maps[key] = (local, maps)
        return self._orbit_maps[key]

    def __repr__(self):
        return f"EdgeWindow(level={self.level}, exps=[{self.min_exp},{self.max_exp}], dim={self.dim})"


@dataclass
class GeometricOperator:
    """Sparse operator on an edge window, with declared invariance level.

    invariance_level None means no membership in any commutant algebra is
    claimed (cutoff projections, partial isometries); such operators have no
    renormalized trace.  tail_value, when set, states that the diagonal
    continues with that constant on every length class above the window.
    """

    window: EdgeWindow
    entries: dict
    invariance_level: int | None
    support_max_exp: int
    tail_value: object = None
    invariance_checked: bool = False
    label: str = field(default="", compare=False)

    # -- algebra ---------------------------------------------------------

    def _combine_meta(self, other):
        if self.window is not other.window:
            raise WindowError("operators live on different windows")
        inv = None
        if self.invariance_level is not None and other.invariance_level is not None:
            inv = max(self.invariance_level, other.invariance_level)
        return inv

    def __matmul__(self, other: "GeometricOperator") -> "GeometricOperator":
        inv = self._combine_meta(other)
        by_row: dict = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc: dict = {}
        for (r, k), va in self.entries.items():
            for c, vb in by_row.get(k, ()):
                key = (r, c)
                prev = acc.get(key)
                acc[key] = va * vb if prev is None else prev + va * vb
        acc = {k: v for k, v in acc.items() if v != 0}
        return GeometricOperator(
            self.window,
            acc,
            inv,
            min(max(self.support_max_exp, other.support_max_exp), self.window.max_exp),
            None,
            self.invariance_checked and other.invariance_checked,
        )

    def _addsub(self, other, sign):
        inv = self._combine_meta(other)
        acc = dict(self.entries)
        for k, v in other.entries.items():
            w = acc.get(k, 0) + sign * v
            if w == 0:
                acc.pop(k, None)
            else:
                acc[k] = w
        tail = None
        st, ot = self.tail_value, other.tail_value
        if st is not None or ot is not None:
            tail = (st or 0) + sign * (ot or 0)
        return GeometricOperator(
            self.window,
            acc,
            inv,
            max(self.support_max_exp, other.support_max_exp),
            tail,
            self.invariance_checked and other.invariance_checked,
        )

    def __add__(self, other):
        return self._addsub(other, 1)

    def __sub__(self, other):
        return self._addsub(other, -1)

    def scaled(self, c) -> "GeometricOperator":
        return GeometricOperator(
            self.window,
            {k: c * v for k, v in self.entries.items()},
            self.invariance_level,
            self.support_max_exp,
            None if self.tail_value is None else c * self.tail_value,
            self.invariance_checked,
        )

    def adjoint(self) -> "GeometricOperator":
        acc = {}
        for (r, c), v in self.entries.items():
            acc[(c, r)] = v.conjugate() if isinstance(v, complex) else v
        return GeometricOperator(
            self.window,
            acc,
            self.invariance_level,
            self.support_max_exp,
            self.tail_value,
            self.invariance_checked,
        )

    # -- traces ------------------------------------------------------------

    def plain_trace(self):
        return sum((v for (r, c), v in self.entries.items() if r == c), 0)

    def trace_in_level(self, m: int):
        lv = self.window.cell_levels
        return sum(
            (v for (r, c), v in self.entries.items() if r == c and lv[r] <= m), 0
        )

    def class_trace(self, j: int, m: int):
        """tr(P^j_m T): diagonal over edges of length 2**j inside K_m."""
        lv = self.window.cell_levels
        le = self.window.length_exps
        return sum(
            (v for (r, c), v in self.entries.items() if r == c and le[r] == j and lv[r] <= m),
            0,
        )

    def diagonal_support_max(self):
        le = self.window.length_exps
        exps = [le[r] for (r, c) in self.entries if r == c]
        return max(exps) if exps else None

    # -- materialization -----------------------------------------------------

    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.entries.values())

    def to_coo(self):
        import scipy.sparse as sp

        n = self.window.dim
        if not self.entries:
            return sp.coo_matrix((n, n))
        rows = np.fromiter((r for r, _ in self.entries), np.int64, len(self.entries))
        cols = np.fromiter((c for _, c in self.entries), np.int64, len(self.entries))
        cplx = any(isinstance(v, complex) for v in self.entries.values())
        data = np.fromiter(
            (complex(v) if cplx else float(v) for v in self.entries.values()),
            np.complex128 if cplx else np.float64,
            len(self.entries),
        )
        return sp.coo_matrix((data, (rows, cols)), shape=(n, n))

    def to_dense(self) -> np.ndarray:
        return self.to_coo().toarray()

    def norm2(self) -> float:
        """Largest singular value on the window."""
        if not self.entries:
            return 0.0
        if self.window.dim <= 600:
            return float(np.linalg.norm(self.to_dense(), 2))
        from scipy.sparse.linalg import svds

        a = self.to_coo().tocsr()
        v0 = np.full(self.window.dim, self.window.dim**-0.5)
        s = svds(a, k=1, v0=v0, maxiter=5000, return_singular_vectors=False)
        return float(s[0])


def operators_equal(a: GeometricOperator, b: GeometricOperator, tol: float = 0.0) -> bool:
    keys = set(a.entries) | set(b.entries)
    for k in keys:
        va = a.entries.get(k, 0)
        vb = b.entries.get(k, 0)
        if tol == 0.0:
            if va != vb:
                return False
        elif abs(complex(va) - complex(vb)) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# constructors

def projection(kind: str, window: EdgeWindow, n: int | None = None, k: int | None = None,
               p: int | None = None, cell: CellAddress | None = None) -> GeometricOperator:
    """Diagonal 0/1 projections of the edge/projection table.

    Kinds: 'P_n' (edges inside K_n), 'P_n^{k,p}' (length range inside K_n),
    'P^k' (a length class), 'P^{k,p}' (length range), 'P^{-p,inf}' (lengths
    >= 2**-p, diagonal continuing with 1 beyond the window), 'P_C' (edges
    inside a cell).  Length-class projections are invariant at level 0;
    exhaustion and cell cutoffs carry no invariance.
    """
    w = window
    lv, le = w.cell_levels, w.length_exps

    def diag(mask, inv, support, tail=None, label=""):
        entries = {(int(i), int(i)): 1 for i in np.nonzero(mask)[0]}
        return GeometricOperator(w, entries, inv, support, tail, True, label)

    if kind == "P_n":
        if n is None:
            raise ValueError("P_n needs n")
        return diag(lv <= n, None, min(n, w.max_exp), label=f"P_{n}")
    if kind == "P_n^{k,p}":
        if None in (n, k, p) or k > p:
            raise ValueError("P_n^{k,p} needs n and k <= p")
        if p < w.min_exp or k > w.max_exp:
            raise ValueError("length range does not intersect the window")
        return diag((lv <= n) & (le >= k) & (le <= p), None, min(p, w.max_exp), label=f"P_{n}^{{{k},{p}}}")
    if kind == "P^k":
        if k is None:
            raise ValueError("P^k needs k")
        if not (w.min_exp <= k <= w.max_exp):
            raise ValueError("class outside the window")
        return diag(le == k, 0, k, label=f"P^{k}")
    if kind == "P^{k,p}":
        if None in (k, p) or k > p:
            raise ValueError("P^{k,p} needs k <= p")
        if p < w.min_exp or k > w.max_exp:
            raise ValueError("length range does not intersect the window")
        return diag((le >= k) & (le <= p), 0, min(p, w.max_exp), label=f"P^{{{k},{p}}}")
    if kind == "P^{-p,inf}":
        if p is None:
            raise ValueError("P^{-p,inf} needs p")
        if -p > w.max_exp:
            raise ValueError("length range does not intersect the window")
        return diag(le >= -p, 0, w.max_exp, tail=1, label=f"P^{{-{p},inf}}")
    if kind == "P_C":
        if cell is None:
            raise ValueError("P_C needs a cell")
        cell = canonicalize(cell)
        mask = np.array(
            [cell_nested_in(e.cell, cell) for e in w.basis], bool
        )
        return diag(mask, None, min(cell.size_exp, w.max_exp), label=f"P_{cell}")
    raise ValueError(f"unknown projection kind {kind!r}")


def mult_operator(f, window: EdgeWindow, exact: bool = False) -> GeometricOperator:
    """rho(f): diagonal action e -> f(e+) e; inherits f's invariance level."""
    w = window
    if exact:
        from .geometry import edge_endpoints

        diag = [f.evaluate(edge_endpoints(e)[1], exact=True) for e in w.basis]
        entries = {(i, i): v for i, v in enumerate(diag) if v != 0}
    else:
        vals = f.eval_scaled(w.target_a, w.target_b, w.level, w.unit_exp)
        entries = {(int(i), int(i)): float(v) for i, v in enumerate(vals) if v != 0.0}
    return GeometricOperator(
        w, entries, f.invariance_level, w.max_exp, None, True, f"rho({f.name or 'f'})"
    )


def edge_reversal(window: EdgeWindow) -> GeometricOperator:
    """F: the orientation-reversing permutation; F*F = 1, level-0 invariant."""
    entries = {}
    for i, e in enumerate(window.basis):
        entries[(window.index(e.reverse()), i)] = 1
    return GeometricOperator(window, entries, 0, window.max_exp, None, True, "F")


def partial_isometry(gamma: LocalIsometry, window: EdgeWindow) -> GeometricOperator:
    """V_gamma: e -> gamma(e) on edges inside the source cell, 0 elsewhere."""
    top = CellAddress(window.level, "")
    if not (cell_nested_in(gamma.source, top) and cell_nested_in(gamma.target, top)):
        raise WindowError(f"{gamma} acts outside the window level")
    entries = {}
    for i, e in enumerate(window.basis):
        if cell_nested_in(e.cell, gamma.source):
            entries[(window.index(gamma.apply_edge(e)), i)] = 1
    return GeometricOperator(
        window, entries, None, min(gamma.source.size_exp, window.max_exp), None, True, "V"
    )


def dirac_modulus(window: EdgeWindow) -> GeometricOperator:
    """|D|: multiplication by 1/length(e); exact dyadic diagonal."""
    entries = {}
    for j, sl in window.class_slices.items():
        v = Fraction(2) ** (-j)
        for i in range(sl.start, sl.stop):
            entries[(i, i)] = v
    return GeometricOperator(window, entries, 0, window.max_exp, None, True, "|D|")


def dirac_operator(window: EdgeWindow) -> GeometricOperator:
    """D = F |D|, assembled on demand."""
    d = edge_reversal(window) @ dirac_modulus(window)
    d.label = "D"
    return d


def random_invariant_operator(window: EdgeWindow, invariance_level: int, min_exp: int,
                              rng: np.random.Generator, hermitian: bool = False,
                              complex_entries: bool = False, denom_exp: int = 8,
                              mag_bits: int = 8) -> GeometricOperator:
    """Groupoid-averaged random operator: a random local kernel on the edges of
    K_invariance_level is replicated through the unique morphisms onto every
    same-size cell of the window, so invariance holds by construction.

    Entries are dyadic floats (random integers / 2**denom_exp), which keeps the
    trace identities exact in double precision.
    """
    local, maps = window.orbit_index_maps(invariance_level, min_exp)
    d = local.size
    lo, hi = -(1 << mag_bits), (1 << mag_bits) + 1
    kern = rng.integers(lo, hi, size=(d, d)).astype(np.float64)
    if complex_entries:
        kern = kern + 1j * rng.integers(lo, hi, size=(d, d)).astype(np.float64)
    if hermitian:
        kern = kern + kern.conj().T  # sums of dyadics stay exact
    kern /= float(1 << denom_exp)
    entries: dict = {}
    for idx_map in maps:
        for r in range(d):
            row = idx_map[r]
            for c in range(d):
                v = kern[r, c]
                if v != 0:
                    entries[(int(row), int(idx_map[c]))] = complex(v) if complex_entries else float(v)
    return GeometricOperator(
        window, entries, invariance_level, invariance_level, None, True, "random-invariant"
    )


# ---------------------------------------------------------------------------
# the renormalized trace

def verify_invariance(t: GeometricOperator, tol: float = 1e-9) -> bool:
    """Spot-check the declared invariance: commutation with the morphisms from
    each same-size cell of the window onto the reference tower cell, for every
    size from the invariance level up to the window level."""
    if t.invariance_level is None:
        raise InvarianceError("operator declares no invariance level")
    w = t.window
    exact = t.is_exact()
    for m in range(t.invariance_level, w.level + 1):
        ref = CellAddress(m, "")
        for cell in enumerate_cells(w.level, m):
            if cell == ref:
                continue
            v = partial_isometry(morphism_between(ref, cell), w)
            lhs = t @ v
            rhs = v @ t
            if not operators_equal(lhs, rhs, 0.0 if exact else tol):
                raise InvarianceError(
                    f"declared level-{t.invariance_level} invariance fails against {cell}"
                )
    return True


def renormalized_trace(t: GeometricOperator):
    """tau0(T) = tr(P_m T) / vol(K_m), evaluated at the eventually-constant
    cutoff m = max(invariance level, length support); exact for exact entries.

    Operators with a constant diagonal tail (P^{-p,inf}) add the closed-form
    geometric series sum_{j>m} 6*3**-j * tail, so tau0(P^{-p,inf}) = 3**(p+2)
    exactly on any window.
    """
    if t.invariance_level is None:
        raise InvarianceError(f"no invariance level declared for {t.label or 'operator'}")
    if not t.invariance_checked:
        verify_invariance(t)
    dsup = t.diagonal_support_max()
    if dsup is not None and dsup > t.support_max_exp:
        raise WindowError("diagonal support exceeds the declared bound")
    w = t.window
    if t.tail_value is not None:
        m = w.level
        finite = t.trace_in_level(m)
        tail = t.tail_value * Fraction(3) ** (1 - m)  # sum_{j>m} 6*3**-j
        if isinstance(finite, (int, Fraction)) and isinstance(t.tail_value, (int, Fraction)):
            return Fraction(finite, 3**m) + tail
        return float(finite) / 3.0**m + float(tail)
    m = max(t.invariance_level, t.support_max_exp)
    if m > w.level:
        raise WindowError(
            f"support/invariance cutoff K_{m} exceeds the window level {w.level}"
        )
    finite = t.trace_in_level(m)
    if isinstance(finite, (int, Fraction)):
        return Fraction(finite, 3**m)
    return finite / 3.0**m


def trace_recursion_check(t: GeometricOperator, m: int):
    """Both sides of tr(P_{m+1} T) = 3 tr(P_m T) + tr(P^{m+1}_{m+1} T)."""
    if t.invariance_level is None or m < t.invariance_level:
        raise InvarianceError("recursion needs m >= invariance level")
    if m + 1 > t.window.level:
        raise WindowError(f"window level {t.window.level} too small for K_{m + 1}")
    lhs = t.trace_in_level(m + 1)
    rhs = 3 * t.trace_in_level(m) + t.class_trace(m + 1, m + 1)
    return lhs, rhs
