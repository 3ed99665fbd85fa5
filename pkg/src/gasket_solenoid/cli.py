"""Command-line surface: batch computations with reproducibility manifests.

Every JSON result embeds a manifest (argv, parameters, version, tolerances,
deterministic-order flag, wall time); identical invocations are byte-identical
apart from the wall_time_s field.  Exit codes: 0 success, 1 verification
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__
from .backend import backend_name
from .constants import MEAN_NORMALIZATION, METRIC_DIMENSION, RESIDUE_VALUE
from .dyadic import TrianglePoint
from .functions import (
    coordinate_alpha,
    coordinate_beta,
    constant,
    integrate_with_bound,
    pullback,
)
from .geometry import CellAddress, edges_to_csv, enumerate_edges, parse_point
from .groupoid import GeneratorSymbol, descending_word, morphism_between, normal_form, run_word
from .operators import EdgeWindow, projection, renormalized_trace, trace_recursion_check, dirac_modulus
from .verify import TOLERANCES, run_all
from .zeta import nc_integral, residue_estimate, zeta
from .distance import DistanceQuery, connes_distance, graph_distance, refinement_table

_FUNCTIONS = {
    "one": lambda: constant(1),
    "alpha": coordinate_alpha,
    "beta": coordinate_beta,
    "alpha2": lambda: coordinate_alpha() * coordinate_alpha(),
    "beta2": lambda: coordinate_beta() * coordinate_beta(),
    "alphabeta": lambda: coordinate_alpha() * coordinate_beta(),
}


@dataclass
class RunManifest:
    """Reproducibility record embedded in every emitted result."""

    command_line: str
    subcommand: str
    parameters: dict
    version: str
    backend: str
    tolerances: dict
    deterministic_order: bool = True
    wall_time_s: float = 0.0
    threads: int | None = None


def _manifest(args, params: dict, t0: float) -> dict:
    return asdict(
        RunManifest(
            command_line=" ".join(sys.argv[1:]) if sys.argv[0] else "",
            subcommand=args.command,
            parameters=params,
            version=__version__,
            backend=backend_name(),
            tolerances={k: v for k, v in TOLERANCES.items() if isinstance(v, float)},
            wall_time_s=round(time.perf_counter() - t0, 6),
            threads=args.threads,
        )
    )


def _emit(payload: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _emit_json(args, params: dict, result, t0: float):
    doc = {"manifest": _manifest(args, params, t0), "result": result}
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)


def _rational(value) -> dict:
    if isinstance(value, (int, Fraction)):
        f = Fraction(value)
        return {"value_num": f.numerator, "value_den": f.denominator}
    return {"value": float(value)}


def _parse_function(args):
    try:
        f = _FUNCTIONS[args.function]()
    except KeyError:
        raise SystemExit(f"unknown function {args.function!r}; choices: {sorted(_FUNCTIONS)}")
    if getattr(args, "pullback_level", None):
        f = pullback(f, args.pullback_level)
    return f


# -- subcommand handlers -------------------------------------------------------

def _cmd_edges(args, t0):
    edges = enumerate_edges(args.level, args.min_exp, args.max_exp)
    params = {"level": args.level, "min_exp": args.min_exp, "max_exp": args.max_exp}
    if args.format == "csv":
        _emit(edges_to_csv(edges), args.out)
        return 0
    result = {"count": len(edges), "edges": [str(e) for e in edges]}
    _emit_json(args, params, result, t0)
    return 0


def _cmd_groupoid(args, t0):
    if args.groupoid_command == "normal-form":
        word = [GeneratorSymbol.parse(tok) for tok in args.word.split(",")]
        iso = run_word(word)
        result = _iso_json(iso)
        if iso.target.word == "":
            result["descending_word"] = [s.name for s in normal_form(word)]
        else:
            # target is not a tower level: report the canonical factorization
            # gamma = ascend(target)^-1 o descend(source) instead
            result["descending_word"] = None
            result["source_descent"] = [s.name for s in descending_word(iso.source)]
            result["target_descent"] = [s.name for s in descending_word(iso.target)]
        _emit_json(args, {"word": args.word}, result, t0)
        return 0
    c1 = CellAddress.parse(getattr(args, "from"))
    c2 = CellAddress.parse(args.to)
    iso = morphism_between(c1, c2)
    result = _iso_json(iso)
    result["descending_word"] = None
    _emit_json(args, {"from": str(c1), "to": str(c2)}, result, t0)
    return 0


def _iso_json(iso) -> dict:
    return {
        "rotation_deg": iso.rot * 120,
        "translation": [str(iso.t_alpha.as_fraction()), str(iso.t_beta.as_fraction())],
        "source": str(iso.source),
        "target": str(iso.target),
    }


def _cmd_trace(args, t0):
    level = args.window_level
    window = EdgeWindow(level, args.window_min, level)
    params = {k: getattr(args, k) for k in ("projection", "n", "p", "k", "m", "window_level", "window_min")}
    if args.check_recursion:
        t = dirac_modulus(window)
        lhs, rhs = trace_recursion_check(t, args.m)
        result = {"lhs": _rational(lhs), "rhs": _rational(rhs), "equal": lhs == rhs}
        _emit_json(args, params, result, t0)
        return 0 if lhs == rhs else 1
    kind = args.projection
    kwargs = {}
    if kind == "P^n":
        kind, kwargs = "P^k", {"k": args.n}
    elif kind == "P^-p,inf":
        kind, kwargs = "P^{-p,inf}", {"p": args.p}
    elif kind == "P_n":
        kwargs = {"n": args.n}
    elif kind == "P^k,p":
        kind, kwargs = "P^{k,p}", {"k": args.k, "p": args.p}
    else:
        raise SystemExit(f"unknown projection {args.projection!r}")
    value = renormalized_trace(projection(kind, window, **kwargs))
    _emit_json(args, params, _rational(value), t0)
    return 0


def _cmd_zeta(args, t0):
    if args.s_grid:
        lo, hi, steps = args.s_grid
        rows = ["s,zeta,tail_bound"]
        for i in range(int(steps) + 1):
            s = lo + (hi - lo) * i / steps
            z = zeta(s, args.cutoff)
            rows.append(f"{s!r},{z.value!r},{z.tail_bound!r}")
        _emit("\n".join(rows) + "\n", args.out)
        return 0
    z = zeta(args.s, args.cutoff)
    result = {"s": z.s, "cutoff": z.cutoff, "value": z.value, "tail_bound": z.tail_bound}
    _emit_json(args, {"s": args.s, "cutoff": args.cutoff}, result, t0)
    return 0


def _cmd_residue(args, t0):
    eps = [float(e) for e in args.eps.split(",")]
    est = residue_estimate(eps)
    result = {
        "residue": est.value,
        "expected": RESIDUE_VALUE,
        "eps": list(est.eps),
        "r_values": list(est.r_values),
        "cutoffs": list(est.cutoffs),
        "metric_dimension": METRIC_DIMENSION,
    }
    _emit_json(args, {"eps": args.eps}, result, t0)
    return 0


def _cmd_integral(args, t0):
    f = _parse_function(args)
    params = {"function": args.function, "level": args.level,
              "resolution": args.resolution, "method": args.method}
    if args.method == "quadrature":
        value, bound = integrate_with_bound(f, args.level, args.resolution)
        vol = 3.0**args.level
        result = {
            "value": MEAN_NORMALIZATION * value / vol,
            "resolution": args.resolution,
            "error_bound": MEAN_NORMALIZATION * bound / vol,
        }
    else:
        eps = [float(e) for e in args.eps.split(",")]
        r = nc_integral(f, args.level, eps, args.resolution)
        result = {
            "residue_route": r.residue_route,
            "quadrature_route": r.quadrature_route,
            "residue": r.residue,
            "resolution": args.resolution,
            "routes_gap": abs(r.residue_route - r.quadrature_route),
        }
        if args.method == "residue":
            result = {"value": r.residue_route, "resolution": args.resolution,
                      "residue": r.residue}
    _emit_json(args, params, result, t0)
    return 0


def _cmd_distance(args, t0):
    x = parse_point(getattr(args, "from"))
    y = parse_point(args.to)
    params = {"from": getattr(args, "from"), "to": args.to,
              "level": args.level, "resolution": args.resolution,
              "certificate": args.certificate}
    q = DistanceQuery(x, y, args.level, args.resolution)
    table = refinement_table(x, y, args.level, range(max(0, args.resolution - 4), args.resolution + 1))
    if args.certificate:
        cert = connes_distance(q)
        result = {
            "value": cert.value,
            "resolution_table": [[r, v] for r, v in table],
            "certificate_ok": cert.max_quotient <= 1.0,
            "max_quotient": cert.max_quotient,
            "path_hops": cert.hops,
        }
    else:
        result = {"value": graph_distance(q),
                  "resolution_table": [[r, v] for r, v in table],
                  "certificate_ok": None}
    _emit_json(args, params, result, t0)
    return 0


def _cmd_verify(args, t0):
    numbers = args.criteria.split(",") if args.criteria else None
    results = run_all(quick=args.quick, numbers=numbers)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gasket-solenoid",
        description="Finite-window computations on the Sierpinski gasket tower",
    )
    ap.add_argument("--out", help="write the result to this path instead of stdout")
    ap.add_argument("--threads", type=int, default=None,
                    help="cap worker threads (recorded in the manifest)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("edges", help="enumerate canonical edges")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--min-exp", dest="min_exp", type=int, required=True)
    p.add_argument("--max-exp", dest="max_exp", type=int, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("groupoid", help="normal forms and morphisms")
    gs = p.add_subparsers(dest="groupoid_command", required=True)
    g1 = gs.add_parser("normal-form")
    g1.add_argument("--word", required=True,
                    help="comma list in composition order, e.g. R0_02,R0_21")
    g2 = gs.add_parser("between")
    g2.add_argument("--from", required=True, help="cell address level:word")
    g2.add_argument("--to", required=True)

    p = sub.add_parser("trace", help="renormalized traces of projections")
    p.add_argument("--projection", default="P^n")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--level", dest="window_level", type=int, default=4)
    p.add_argument("--window-min", dest="window_min", type=int, default=-4)
    p.add_argument("--check-recursion", dest="check_recursion", action="store_true",
                   help="check tr(P_{m+1}T) = 3tr(P_m T) + tr(P^{m+1}_{m+1}T) for |D|")
    p.add_argument("--m", type=int, default=0, help="cutoff level for --check-recursion")

    p = sub.add_parser("zeta", help="spectral zeta values")
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--cutoff", type=int, default=80)
    p.add_argument("--s-grid", dest="s_grid", nargs=3, type=float, default=None,
                   metavar=("LO", "HI", "STEPS"), help="emit a CSV curve")

    p = sub.add_parser("residue", help="residue of (s-d) zeta(s) at s=d")
    p.add_argument("--eps", default="1e-1,1e-2,1e-3")

    p = sub.add_parser("integral", help="noncommutative integral")
    p.add_argument("--function", default="one")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--resolution", type=int, default=10)
    p.add_argument("--method", choices=("quadrature", "residue", "both"), default="quadrature")
    p.add_argument("--eps", default="1e-2,1e-3")
    p.add_argument("--pullback-level", dest="pullback_level", type=int, default=None)

    p = sub.add_parser("distance", help="geodesic / dual distance")
    p.add_argument("--from", required=True, help="point alpha,beta as fractions, e.g. 1/2,0")
    p.add_argument("--to", required=True)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--resolution", type=int, default=8)
    p.add_argument("--certificate", action="store_true")

    p = sub.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--criteria", default=None, help="comma list of criterion numbers")

    return ap


_HANDLERS = {
    "edges": _cmd_edges,
    "groupoid": _cmd_groupoid,
    "trace": _cmd_trace,
    "zeta": _cmd_zeta,
    "residue": _cmd_residue,
    "integral": _cmd_integral,
    "distance": _cmd_distance,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    t0 = time.perf_counter()
    args = build_parser().parse_args(argv)
    if args.threads:
        try:
            import numba

            numba.set_num_threads(args.threads)
        except (ImportError, ValueError):
            pass
    try:
        return _HANDLERS[args.command](args, t0)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
