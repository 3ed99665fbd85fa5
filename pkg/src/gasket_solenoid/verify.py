"""Acceptance suite: every verifiable identity of the construction, with its
pinned tolerance and time budget.

Each check returns a CheckResult; the CLI `verify` subcommand and the pytest
acceptance module both consume these.  Jit warmup runs before timing starts
(compilation is a one-time artifact of the numba backend, cached across runs).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .constants import MEAN_NORMALIZATION, METRIC_DIMENSION, RESIDUE_VALUE
from .dyadic import TrianglePoint
from .functions import (
    SampledFunction,
    coordinate_alpha,
    coordinate_beta,
    constant,
    gasket_moment,
    lipschitz_seminorm,
    folner_mean,
    polynomial_function,
    pullback,
)
from .geometry import CellAddress, cell_corner, cell_vertices, enumerate_cells, enumerate_edges
from .groupoid import (
    compose,
    covering_branch_values,
    generator,
    morphism_between,
    ramification_points,
)
from .operators import (
    EdgeWindow,
    GeometricOperator,
    dirac_modulus,
    mult_operator,
    projection,
    random_invariant_operator,
    renormalized_trace,
)
from .zeta import nc_integral, residue_estimate, window_sum_oracle, zeta
from .distance import (
    DistanceQuery,
    build_graph,
    connes_distance,
    commutator_norm,
    graph_distance,
    lp_oracle_all_pairs,
)

TOLERANCES = {
    "counting": 0.0,
    "trace_closed_forms": 0.0,
    "trace_recursion": 0.0,
    "uniqueness": 0.0,
    "covering": 0.0,
    "residue_abs": 1e-2,
    "zeta_cross": "certified tail bounds",
    "nc_routes": 5e-3,
    "nc_exact": 1e-3,
    "folner": 1e-12,
    "distance": 0.0,
    "commutator": 1e-10,
    "pullback_seminorm": 0.0,
}


@dataclass
class CheckResult:
    number: str
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self) -> str:
        flag = "ok  " if self.passed else "FAIL"
        return (
            f"[{flag}] {self.number:>3} {self.name:<34} {self.detail}"
            f"  ({self.seconds:.2f}s / limit {self.limit:.0f}s)"
        )


def _result(number, name, limit, fn) -> CheckResult:
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failure with the reason recorded
        passed, detail = False, f"exception: {exc!r}"
    dt = time.perf_counter() - t0
    return CheckResult(number, name, passed and dt < limit, detail, dt, limit)


# -- 1: counting identities --------------------------------------------------

def check_counting() -> CheckResult:
    def run():
        bad = []
        for n in range(0, 7):
            for j in range(0, n + 1):
                got = len(enumerate_edges(n, j, j))
                if got != 6 * 3 ** (n - j):
                    bad.append((n, j, got))
        return not bad, f"6*3^(n-j) for all 0<=j<=n<=6" if not bad else f"mismatches {bad}"

    return _result("1", "edge counting identities", 10, run)


# -- 2: trace closed forms ----------------------------------------------------

def check_trace_closed_forms() -> CheckResult:
    def run():
        for n in range(-4, 5):
            w = EdgeWindow(max(n, 0), min(n, 0), max(n, 0))
            got = renormalized_trace(projection("P^k", w, k=n))
            if got != Fraction(6) * Fraction(3) ** (-n):
                return False, f"tau0(P^{n}) = {got}"
        for p in range(0, 5):
            w = EdgeWindow(2, -p, 2)
            got = renormalized_trace(projection("P^{-p,inf}", w, p=p))
            if got != Fraction(3) ** (p + 2):
                return False, f"tau0(P^-{p},inf) = {got}"
        return True, "tau0(P^n)=6*3^-n (|n|<=4), tau0(P^-p,inf)=3^(p+2) (p<=4), exact"

    return _result("2", "renormalized trace closed forms", 30, run)


# -- 3: trace recursion and scale consistency ---------------------------------

def _diag_array(t: GeometricOperator) -> np.ndarray:
    dtype = np.complex128 if any(isinstance(v, complex) for v in t.entries.values()) else np.float64
    diag = np.zeros(t.window.dim, dtype)
    for (r, c), v in t.entries.items():
        if r == c:
            diag[r] = v
    return diag


def _recursion_and_scale_consistency(t: GeometricOperator, n: int, top: int):
    w = t.window
    diag = _diag_array(t)
    lv, le = w.cell_levels, w.length_exps
    for m in range(n, top):
        lhs = diag[lv <= m + 1].sum()
        rhs = 3 * diag[lv <= m].sum() + diag[(lv <= m + 1) & (le == m + 1)].sum()
        if lhs != rhs:
            return f"recursion fails at m={m}: {lhs} != {rhs}"
    for j in range(int(le.min()), n + 1):
        base = None
        for m in range(n, top + 1):
            tr = diag[(lv <= m) & (le == j)].sum()
            # compare tr/3^m across m by exact cross-multiplication
            if base is None:
                base = (tr, m)
            else:
                if tr * 3 ** base[1] != base[0] * 3**m:
                    return f"scale consistency fails at j={j}, m={m}"
    return None


def check_trace_recursion() -> CheckResult:
    def run():
        w = EdgeWindow(4, -1, 4)
        family = [
            (projection("P^k", w, k=j), 0) for j in (-1, 0, 1)
        ] + [
            (projection("P^{k,p}", w, k=-1, p=1), 0),
            (dirac_modulus(w), 0),
            (mult_operator(coordinate_alpha(), w), 0),
        ]
        for t, n in family:
            err = _recursion_and_scale_consistency(t, n, 3)
            if err:
                return False, f"{t.label}: {err}"
        rng = np.random.default_rng(20260810)
        for i in range(50):
            n = i % 2
            t = random_invariant_operator(
                w, n, n - 1, rng, hermitian=(i % 3 == 0), complex_entries=(i % 5 == 0)
            )
            err = _recursion_and_scale_consistency(t, n, 3)
            if err:
                return False, f"random op {i} (level {n}): {err}"
        return True, "recursion + scale consistency exact: projection family + 50 averaged ops"

    return _result("3", "trace recursion / scale consistency", 60, run)


# -- 4: groupoid uniqueness by brute force -------------------------------------

def _int_generator_pool(max_scale: int):
    pool = []
    for q in range(max_scale + 1):
        for to in range(3):
            for fr in range(3):
                if to == fr:
                    continue
                g = generator(q, to, fr)
                ta = g.t_alpha.mantissa << g.t_alpha.exponent if g.t_alpha else 0
                tb = g.t_beta.mantissa << g.t_beta.exponent if g.t_beta else 0
                sc = cell_corner(g.source)
                sa = sc.alpha.mantissa << sc.alpha.exponent if sc.alpha else 0
                sb = sc.beta.mantissa << sc.beta.exponent if sc.beta else 0
                pool.append((g.rot, ta, tb, sa, sb, 1 << g.source.size_exp))
    return pool


def _rot_int(rot, a, b):
    if rot == 0:
        return a, b
    if rot == 1:
        return -a - b, a
    return b, -a - b


def _apply_map_to_cell(rot, ta, tb, cell):
    ca, cb, s = cell
    best_a = best_b = None
    for va, vb in ((ca, cb), (ca + s, cb), (ca, cb + s)):
        ia, ib = _rot_int(rot, va, vb)
        ia += ta
        ib += tb
        best_a = ia if best_a is None or ia < best_a else best_a
        best_b = ib if best_b is None or ib < best_b else best_b
    return (best_a, best_b, s)


def _reachable_maps(start, pool, max_len):
    """All (cell, affine map) states reachable from `start` by composable
    generator words of length <= max_len."""
    init = (start, (0, 0, 0))
    seen = {init}
    frontier = [init]
    for _ in range(max_len):
        nxt = []
        for (cell, (rot, ta, tb)) in frontier:
            ca, cb, s = cell
            for (grot, gta, gtb, sa, sb, ssize) in pool:
                if not (ca >= sa and cb >= sb and ca + cb + s <= sa + sb + ssize):
                    continue
                ra, rb = _rot_int(grot, ta, tb)
                new_map = ((grot + rot) % 3, ra + gta, rb + gtb)
                state = (_apply_map_to_cell(grot, gta, gtb, cell), new_map)
                if state not in seen:
                    seen.add(state)
                    nxt.append(state)
        frontier = nxt
    return seen


def _cell_ints(cell: CellAddress):
    c = cell_corner(cell)
    a = c.alpha.mantissa << c.alpha.exponent if c.alpha else 0
    b = c.beta.mantissa << c.beta.exponent if c.beta else 0
    return (a, b, 1 << cell.size_exp)


def check_groupoid_uniqueness() -> CheckResult:
    def run():
        ok, detail = _cocycle_identity()
        if not ok:
            return ok, detail
        pool = _int_generator_pool(6)  # words of length <=8 between cells in K_3 stay below scale 7
        pairs = 0
        for s in range(0, 4):
            cells = enumerate_cells(3, s)
            targets = {_cell_ints(c): c for c in cells}
            for c1 in cells:
                reach = _reachable_maps(_cell_ints(c1), pool, 8)
                by_cell: dict = {}
                for cell, amap in reach:
                    if cell in targets:
                        by_cell.setdefault(cell, set()).add(amap)
                for cell_int, c2 in targets.items():
                    maps = by_cell.get(cell_int, set())
                    if len(maps) != 1:
                        return False, f"{c1}->{c2}: {len(maps)} maps"
                    iso = morphism_between(c1, c2)
                    ta = iso.t_alpha.mantissa << iso.t_alpha.exponent if iso.t_alpha else 0
                    tb = iso.t_beta.mantissa << iso.t_beta.exponent if iso.t_beta else 0
                    if next(iter(maps)) != (iso.rot, ta, tb):
                        return False, f"{c1}->{c2}: brute-force map differs from morphism"
                    pairs += 1
        return True, f"exactly one map per ordered pair ({pairs} pairs, words<=8) + cocycle"

    return _result("4", "groupoid uniqueness (brute force)", 120, run)


def _cocycle_identity():
    for n in range(0, 6):
        for i in range(3):
            g1 = generator(n, (i + 1) % 3, i)
            g2 = generator(n, (i + 2) % 3, (i + 1) % 3)
            g3 = generator(n, i, (i + 2) % 3)
            total = compose(g3, compose(g2, g1))
            if not total.is_identity_map() or total.source != total.target:
                return False, f"cocycle fails at scale {n}, i={i}"
    return True, "R_{i,i+2} R_{i+2,i+1} R_{i+1,i} = id for n<=5"


def check_cocycle() -> CheckResult:
    return _result("4q", "cocycle identity", 10, _cocycle_identity)


# -- 5: covering well-definedness ----------------------------------------------

def check_covering() -> CheckResult:
    def run():
        for n in range(0, 6):
            for x in ramification_points(n):
                vals = covering_branch_values(x, n)
                if len(vals) < 2:
                    return False, f"{x} not a double point at scale {n}"
                if any(v != vals[0] for v in vals[1:]):
                    return False, f"branch values differ at {x}, scale {n}"
        return True, "both branch values agree at all ramification points, n<=5"

    return _result("5", "covering well-definedness", 10, run)


# -- 6: metric dimension and residue --------------------------------------------

def check_zeta_residue() -> CheckResult:
    def run():
        est = residue_estimate([1e-1, 1e-2, 1e-3])
        err = abs(est.value - RESIDUE_VALUE)
        if err > TOLERANCES["residue_abs"]:
            return False, f"residue {est.value:.6f} vs 6/log2 {RESIDUE_VALUE:.6f}"
        details = [f"residue err {err:.1e}"]
        for s in (1.7, 2.0, 3.0):
            z = zeta(s, 400)
            w = window_sum_oracle(s, level=6, min_exp=-6)
            gap = abs(z.value - w.value)
            allowed = z.tail_bound + w.missing_bound
            if gap > allowed:
                return False, f"s={s}: |zeta-window| = {gap:.3e} > certified {allowed:.3e}"
            details.append(f"s={s}: gap {gap:.1e} <= {allowed:.1e}")
        return True, "; ".join(details)

    return _result("6", "zeta residue + window cross-check", 30, run)


# -- 7: noncommutative integral ---------------------------------------------------

def check_nc_integral() -> CheckResult:
    def run():
        alpha = coordinate_alpha()
        funcs = [
            ("1", constant(1), MEAN_NORMALIZATION, TOLERANCES["nc_exact"]),
            ("alpha", alpha, 2.0 / math.log(3), TOLERANCES["nc_exact"]),
            ("beta", coordinate_beta(), 2.0 / math.log(3), None),
            ("alpha^2", alpha * alpha,
             MEAN_NORMALIZATION * float(gasket_moment(2, 0)), 5e-3),
        ]
        details = []
        for name, f, target, target_tol in funcs:
            r = nc_integral(f, 0, [1e-2, 1e-3], resolution=12)
            gap = abs(r.residue_route - r.quadrature_route)
            if gap > TOLERANCES["nc_routes"]:
                return False, f"{name}: routes differ by {gap:.2e}"
            if target_tol is not None and abs(r.residue_route - target) > target_tol:
                return False, f"{name}: residue route {r.residue_route:.6f} vs {target:.6f}"
            details.append(f"{name}: gap {gap:.1e}")
        return True, "; ".join(details)

    return _result("7", "noncommutative integral (two routes)", 60, run)


# -- 8: Folner-mean stabilization --------------------------------------------------

def check_folner() -> CheckResult:
    def run():
        funcs = [
            coordinate_alpha(),
            polynomial_function(
                {(0, 0): 1, (1, 0): Fraction(1, 4), (0, 1): Fraction(1, 8)},
                invariance_level=1, name="affine@K1"),
            polynomial_function(
                {(1, 0): Fraction(1, 4), (0, 1): Fraction(1, 8), (2, 0): Fraction(1, 64)},
                invariance_level=2, name="poly@K2"),
        ]
        details = []
        for f in funcs:
            fm = folner_mean(f, 5, resolution=5)
            spread = max(fm.sequence) - min(fm.sequence)
            tol = TOLERANCES["folner"] * max(1.0, abs(fm.value))
            if spread > tol:
                return False, f"{f.name}: spread {spread:.2e} over levels {fm.levels}"
            details.append(f"{f.name}: spread {spread:.1e}")
        return True, "; ".join(details)

    return _result("8", "Folner mean stabilization", 30, run)


# -- 9: distance duality ---------------------------------------------------------

def _exhaustive_duality(level: int, resolution: int):
    g = build_graph(level, resolution)
    n = g.n_vertices
    lp = lp_oracle_all_pairs(level, resolution)
    hops_all = np.empty((n, n), np.int64)
    for src in range(n):
        hops_all[src] = g.hops_from(src)
    if not np.array_equal(hops_all, lp):
        return f"r={resolution}: LP oracle differs from shortest-path matrix"
    for yi in range(n):
        hops = hops_all[yi]
        for xi in range(n):
            witness = np.minimum(hops, hops[xi])
            for k, uu, vv in g.constraint_edges:
                gap = int(np.abs(witness[uu] - witness[vv]).max(initial=0))
                if gap > (1 << (k + resolution)):
                    return f"r={resolution}: witness infeasible for pair ({xi},{yi})"
            if abs(int(witness[xi]) - int(witness[yi])) != int(hops[xi]):
                return f"r={resolution}: witness does not attain d for ({xi},{yi})"
    return None


def check_distance_duality() -> CheckResult:
    def run():
        for r in range(0, 5):
            err = _exhaustive_duality(0, r)
            if err:
                return False, err
        g = build_graph(0, 8)
        rng = np.random.default_rng(42)
        v0 = TrianglePoint.of(0, 0)
        v1 = TrianglePoint.of(1, 0)
        for _ in range(200):
            xi, yi = rng.integers(0, g.n_vertices, 2)
            cert = connes_distance(
                DistanceQuery(g.point_of(int(xi)), g.point_of(int(yi)), 0, 8)
            )
            direct = graph_distance(
                DistanceQuery(g.point_of(int(xi)), g.point_of(int(yi)), 0, 8)
            )
            if cert.value != direct or cert.max_quotient > 1.0:
                return False, f"certificate mismatch for pair ({xi},{yi})"
        for r in range(0, 9):
            if graph_distance(DistanceQuery(v0, v1, 0, r)) != 1.0:
                return False, f"d(v0,v1) != 1 at resolution {r}"
        return True, "exhaustive r<=4 (LP oracle) + 200 certified pairs at r=8 + d(v0,v1)=1"

    return _result("9", "distance duality", 60, run)


# -- 10: commutator agreement -----------------------------------------------------

def check_commutator() -> CheckResult:
    def run():
        alpha = coordinate_alpha()
        funcs = [
            ("alpha", alpha),
            ("beta", coordinate_beta()),
            ("alpha^2", alpha * alpha),
            ("pullback(alpha,1)", pullback(alpha, 1)),
            ("affine@K1", polynomial_function(
                {(0, 0): 1, (1, 0): Fraction(1, 4), (0, 1): Fraction(1, 8)},
                invariance_level=1, name="affine@K1")),
        ]
        details = []
        for name, f in funcs:
            pts = commutator_norm(f, [0, 1, 2, 3, 4])
            worst = max(abs(p.quotient_route - p.operator_route) for p in pts)
            if worst > TOLERANCES["commutator"]:
                return False, f"{name}: routes differ by {worst:.2e}"
            qs = [p.quotient_route for p in pts]
            if any(b < a - 1e-14 for a, b in zip(qs, qs[1:])):
                return False, f"{name}: cutoff sequence not nondecreasing: {qs}"
            details.append(f"{name}: {worst:.1e}")
        for f in (alpha, coordinate_beta(), alpha * alpha):
            for m in (1, 2):
                for p in (2, 4):
                    if lipschitz_seminorm(pullback(f, m), -p) != lipschitz_seminorm(f, -p):
                        return False, f"pullback seminorm differs for {f.name}, m={m}, p={p}"
        return True, "; ".join(details) + "; pullback Lip exact"

    return _result("10", "commutator norm agreement", 60, run)


ALL_CHECKS = [
    ("1", check_counting),
    ("2", check_trace_closed_forms),
    ("3", check_trace_recursion),
    ("4", check_groupoid_uniqueness),
    ("5", check_covering),
    ("6", check_zeta_residue),
    ("7", check_nc_integral),
    ("8", check_folner),
    ("9", check_distance_duality),
    ("10", check_commutator),
]

QUICK_CHECKS = [
    ("1", check_counting),
    ("4q", check_cocycle),
    ("2", check_trace_closed_forms),
]


def run_all(quick: bool = False, numbers=None) -> list[CheckResult]:
    kernels.warmup()
    checks = QUICK_CHECKS if quick else ALL_CHECKS
    if numbers:
        wanted = {str(n) for n in numbers}
        checks = [c for c in checks if c[0] in wanted]
    return [fn() for _, fn in checks]
