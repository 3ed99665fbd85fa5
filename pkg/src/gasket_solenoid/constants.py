"""Shared numeric constants of the gasket triple."""

import math

#: metric dimension d = log 3 / log 2 (= Hausdorff dimension of the gasket)
METRIC_DIMENSION = math.log(3) / math.log(2)

#: residue of the zeta function at s = d
RESIDUE_VALUE = 6.0 / math.log(2)

#: normalization of the noncommutative integral: integral(1) = 6 / log 3
MEAN_NORMALIZATION = 6.0 / math.log(3)
