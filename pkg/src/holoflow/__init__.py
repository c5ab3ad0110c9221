"""holoflow: numerics for one-parameter semigroups of holomorphic self-maps of the disc.

The package integrates semigroup flows from infinitesimal generators,
computes Koenigs linearizers, estimates boundary singularity orders,
detects contact arcs on the unit circle, and evaluates geometric criteria
on planar image domains.
"""

from .disc import BoundaryPoint, DiscPoint, RadialSchedule, StolzRay, cayley, hyperbolic_distance
from .expr import Ast, ParseError, differentiate, evaluate, parse
from .generators import GeneratorSpec, HerglotzSpec, gallery, herglotz_validate, load_generator
from .flow import boundary_flow, dw_estimate, integrate_flow, semigroup_residual, variational_flow
from .koenigs import KoenigsEvaluator

__version__ = "0.1.0"

__all__ = [
    "Ast",
    "BoundaryPoint",
    "DiscPoint",
    "GeneratorSpec",
    "HerglotzSpec",
    "KoenigsEvaluator",
    "ParseError",
    "RadialSchedule",
    "StolzRay",
    "boundary_flow",
    "cayley",
    "differentiate",
    "dw_estimate",
    "evaluate",
    "gallery",
    "herglotz_validate",
    "hyperbolic_distance",
    "integrate_flow",
    "load_generator",
    "parse",
    "semigroup_residual",
    "variational_flow",
]
