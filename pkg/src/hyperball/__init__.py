"""Radial solutions of -Lap u - lam u = |u|^(p-1) u on the Poincare ball.

Subpackages:
  geometry    exact primitives of the ball model (distances, reflections,
              hyperbolic translations, the half-space map, caps)
  conformal   hyperbolic <-> Euclidean change of variables and energies
  radial      shooting solver for ground-state and sign-changing solutions
  energy      quadrature, Nehari machinery, best-constant estimation
  galerkin    piecewise-linear variational oracle
  bubbles     concentration profiles, scaling laws, quantization checks
  correspond  Hardy-Sobolev-Mazya and Grushin parameter maps and transport
  cli         batch front end (`hyperball` command)
"""

__version__ = "0.1.0"

from .params import Params, omega_sphere

__all__ = ["Params", "omega_sphere", "__version__"]
