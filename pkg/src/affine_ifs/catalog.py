"""Built-in systems with their known reference facts.

Reference constants are kept as closed-form expressions and evaluated here,
never copied as decimals.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .errors import InvalidProbability
from .geometry import ConvexPolygon, triangle
from .ifs import IfsSystem

SQRT2 = math.sqrt(2.0)
# Lip(f_i o f_1) for the triangle system
LIP_TAIL1 = math.sqrt(3.0 * math.sqrt(17.0) + 13.0) / 4.0
# Lip(f_i o f_2)
LIP_TAIL2 = 1.0 / SQRT2
CRITICAL_P1_K2 = (4.0 - 2.0 * SQRT2) / (math.sqrt(3.0 * math.sqrt(17.0) + 13.0) - 2.0 * SQRT2)

TRIANGLE_LINEARS = np.array([[[1.0, 0.5], [0.0, 0.5]], [[0.0, 0.5], [-1.0, -0.5]]])
TRIANGLE_OFFSETS = np.array([[0.0, 0.0], [0.0, 1.0]])
DEFAULT_BOUNDS = (-0.25, 1.25, -0.25, 1.25)


@dataclass(frozen=True)
class Fact:
    """A reference value and where it comes from.

    ``source`` is one of ``"reported"`` (closed form stated in the published
    analysis of the system), ``"derived"`` (follows from reported values by a
    short computation) or ``"identity"`` (holds by construction).
    """

    value: Any
    source: str
    note: str = ""


@dataclass(frozen=True, eq=False)
class NamedSystem:
    name: str
    system: IfsSystem
    hint: Optional[ConvexPolygon] = None
    bounds: Tuple[float, float, float, float] = DEFAULT_BOUNDS
    facts: Dict[str, Fact] = field(default_factory=dict)


def bv_triangle(p1: float = 0.5) -> NamedSystem:
    """Two non-contractive affine maps leaving the unit right triangle invariant."""
    if not 0.0 < p1 < 1.0:
        raise InvalidProbability(f"p1 must lie in (0, 1), got {p1!r}")
    s = IfsSystem(TRIANGLE_LINEARS, TRIANGLE_OFFSETS, [p1, 1.0 - p1])
    facts = {
        "det": Fact(0.5, "reported", "det A1 = det A2"),
        "lip_tail2": Fact(LIP_TAIL2, "reported", "Lip(f_i o f_2), i = 1, 2"),
        "lip_tail1": Fact(LIP_TAIL1, "reported", "Lip(f_i o f_1), i = 1, 2"),
        "lip_sum_bound": Fact(4.0, "reported", "sum_{i,j} Lip(f_i o f_j) < 4"),
        "avg_k2_half": Fact((LIP_TAIL1 + LIP_TAIL2) / 2.0, "derived", "average contractivity at k=2, p1=1/2"),
        "critical_p1_k2": Fact(CRITICAL_P1_K2, "reported", "largest p1 with 2nd iterate contractive on average"),
        "critical_p1_approx": Fact(0.53, "reported", "quoted to two decimals"),
        "segment_fibre_1": Fact(((0.0, 0.0), (1.0, 0.0)), "reported", "fibre of 1 1 1 ... is [0,1] x {0}"),
        "point_fibre_2": Fact((0.25, 0.5), "reported", "fibre of 2 2 2 ... is {(1/4, 1/2)}"),
        "witness_word": Fact((2, 2), "reported", "f_2 o f_2 is a contraction"),
        "invariant_measure": Fact("uniform on triangle", "reported", "for p1 = p2 = 1/2"),
    }
    return NamedSystem("bv_triangle", s, triangle(), DEFAULT_BOUNDS, facts)


def final_example() -> NamedSystem:
    """``f1(x,y) = (x/2 + 1/2, y)``, ``f2(x,y) = (x, y/2)``, equal weights."""
    s = IfsSystem(
        [[[0.5, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 0.5]]],
        [[0.5, 0.0], [0.0, 0.0]],
        [0.5, 0.5],
    )
    facts = {
        "iterate2_lips": Fact((1.0, 0.5, 0.5, 1.0), "reported", "lex order 11, 12, 21, 22"),
        "semiattractor": Fact((1.0, 0.0), "reported", "common fixed point; invariant measure is its Dirac mass"),
        "avg_k2": Fact(0.75, "derived", "(1 + 1/2 + 1/2 + 1) / 4"),
    }
    return NamedSystem("final_example", s, None, DEFAULT_BOUNDS, facts)


def single_contraction(ratio: float = 0.5, target=(0.0, 0.0)) -> NamedSystem:
    """One map shrinking the plane onto ``target``."""
    t = np.asarray(target, dtype=float)
    s = IfsSystem([np.eye(2) * ratio], [(1.0 - ratio) * t], [1.0])
    return NamedSystem("single_contraction", s, None, DEFAULT_BOUNDS, {})


BUILTINS = {
    "bv_triangle": bv_triangle,
    "final_example": final_example,
    "single_contraction": single_contraction,
}
