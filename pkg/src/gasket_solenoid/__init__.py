"""Finite-resolution model of the Sierpinski gasket tower and its spectral
geometry: exact cell/edge combinatorics, the rotation groupoid, renormalized
traces of geometric operators, the spectral zeta residue, the noncommutative
integral and the geodesic/dual distance."""

__version__ = "0.1.0"

from .dyadic import DyadicScalar, TrianglePoint
from .geometry import (
    CellAddress,
    EdgeAddress,
    canonicalize,
    cell_vertices,
    edge_endpoints,
    enumerate_edges,
    vertex_set,
)
from .groupoid import (
    GeneratorSymbol,
    LocalIsometry,
    apply,
    compose,
    covering_map,
    generator,
    morphism_between,
    normal_form,
)
from .functions import (
    SampledFunction,
    constant,
    coordinate_alpha,
    coordinate_beta,
    folner_mean,
    integrate,
    lipschitz_seminorm,
    polynomial_function,
    pullback,
    tabulated_function,
)
from .operators import (
    EdgeWindow,
    GeometricOperator,
    dirac_modulus,
    dirac_operator,
    edge_reversal,
    mult_operator,
    partial_isometry,
    projection,
    renormalized_trace,
    trace_recursion_check,
)
from .zeta import ZetaSeries, nc_integral, residue_estimate, trace_class_gap, zeta
from .distance import (
    DistanceCertificate,
    DistanceQuery,
    commutator_norm,
    connes_distance,
    graph_distance,
)
from .constants import MEAN_NORMALIZATION, METRIC_DIMENSION, RESIDUE_VALUE

__all__ = [name for name in dir() if not name.startswith("_")]
