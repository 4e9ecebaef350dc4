"""Self-contained numerical kernel used by every other module.

Special functions, adaptive quadrature, ODE integration, root finding,
interpolation and seeded randomness.  Everything here is pure and
deterministic; tolerances are explicit and overridable per call.
"""

from .special import normal_cdf, normal_sf, normal_pdf, bessel_k_half, tricomi_u
from .quadrature import QuadratureSpec, QuadratureError, integrate_adaptive
from .roots import RootBracket, BracketError, find_root_monotone
from .ode import Trajectory, StiffnessError, ode_integrate
from .interpolate import PiecewiseQuinticHermite, chebyshev_lobatto_nodes
from .rng import generator, block_sequences

__all__ = [
    "normal_cdf", "normal_sf", "normal_pdf", "bessel_k_half", "tricomi_u",
    "QuadratureSpec", "QuadratureError", "integrate_adaptive",
    "RootBracket", "BracketError", "find_root_monotone",
    "Trajectory", "StiffnessError", "ode_integrate",
    "PiecewiseQuinticHermite", "chebyshev_lobatto_nodes",
    "generator", "block_sequences",
]
