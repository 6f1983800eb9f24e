"""Analysis toolkit for non-contractive affine iterated function systems.

Average contractivity of higher iterates, semiattractor and invariant-measure
estimates, and fibre geometry for planar affine IFSs.
"""

from ._accel import USE_NUMBA
from .affine import AffineMap, apply, compose, determinant, fixed_point, lipschitz, matrix_power
from .catalog import bv_triangle, final_example
from .fibres import Address, check_invariant_polygon, classify_fibre, fibre_sequence, parse_address, strongly_fibred_report
from .geometry import ConvexPolygon
from .ifs import (
    IfsSystem,
    average_contractivity,
    compose_word,
    critical_probability,
    find_contractive_word,
    iterate_system,
    min_average_contractive_k,
)
from .measures import GridMeasure, iterate_to_invariance, markov_step, support, total_variation, uniform_on_polygon
from .sets import OrbitConfig, PointSet, chaos_game, estimate_semiattractor, hausdorff_distance, hutchinson_step

__version__ = "0.1.0"
