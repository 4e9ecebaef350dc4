"""Optimal stopping of a Brownian bridge whose pinning time is unknown.

The bridge X solves dX_t = -X_t/(theta - t) dt + dB_t and is forced to 0
at a random time theta with a known continuous prior.  The library filters
the pinning-time posterior from path observations, solves the resulting
optimal stopping problems (closed form for Gamma(1/2, beta) priors,
free-boundary ODE for Beta(1/2, beta) priors), and validates everything
against Monte Carlo simulation and a discrete urn-problem oracle.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
