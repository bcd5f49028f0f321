"""Problem data for -Lap_B u - lambda*u = |u|^(p-1) u on the Poincare ball."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["Params", "omega_sphere"]


def omega_sphere(N: int) -> float:
    """Surface area of the unit sphere S^(N-1) in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class Params:
    """Dimension N, nonlinearity power p and spectral shift lam.

    Admissible range: 1 < p <= (N+2)/(N-2) for N >= 3 (any p > 1 for N = 2)
    and lam < ((N-1)/2)^2, the bottom of the spectrum of the hyperbolic
    Laplacian.
    """

    N: int
    p: float
    lam: float

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 2:
            raise ValueError(f"dimension N must be an integer >= 2, got {self.N}")
        if not self.p > 1.0:
            raise ValueError(f"power p must exceed 1, got {self.p}")
        if self.N >= 3 and self.p > self.critical_p * (1.0 + 1e-12):
            raise ValueError(
                f"p={self.p} exceeds the critical power {self.critical_p} for N={self.N}"
            )
        if not self.lam < self.lambda_max:
            raise ValueError(
                f"lambda={self.lam} must lie strictly below ((N-1)/2)^2 = {self.lambda_max}"
            )

    # -- derived exponents and thresholds -------------------------------

    @property
    def critical_p(self) -> float:
        """Critical power (N+2)/(N-2); infinity when N = 2."""
        if self.N == 2:
            return math.inf
        return (self.N + 2.0) / (self.N - 2.0)

    @property
    def two_star(self) -> float:
        """Critical Sobolev exponent 2N/(N-2)."""
        if self.N == 2:
            return math.inf
        return 2.0 * self.N / (self.N - 2.0)

    @property
    def is_critical(self) -> bool:
        return self.N >= 3 and abs(self.p - self.critical_p) <= 1e-12 * self.critical_p

    @property
    def lambda_max(self) -> float:
        """Bottom of the spectrum, ((N-1)/2)^2."""
        return ((self.N - 1.0) / 2.0) ** 2

    @property
    def lambda_conformal(self) -> float:
        """Threshold N(N-2)/4 separating the sign of the conformal shift."""
        return self.N * (self.N - 2.0) / 4.0

    @property
    def lambda_tilde(self) -> float:
        """Shift appearing in the Euclidean form: lam - N(N-2)/4."""
        return self.lam - self.lambda_conformal

    @property
    def in_low_lambda_regime(self) -> bool:
        """True when lam <= N(N-2)/4 (nonpositive Euclidean shift)."""
        return self.lam <= self.lambda_conformal + 1e-14

    # -- linearised decay rates ------------------------------------------

    @property
    def decay_rate(self) -> float:
        """Fast decay exponent c = (N-1)/2 + sqrt(((N-1)/2)^2 - lam).

        An H^1 radial solution decays like exp(-c*t) in geodesic radius t;
        the generic trajectory sheds mass at the slow rate only.
        """
        h = (self.N - 1.0) / 2.0
        return h + math.sqrt(h * h - self.lam)

    @property
    def slow_rate(self) -> float:
        """Slow exponent (N-1)/2 - sqrt(((N-1)/2)^2 - lam) >= 0 for lam >= 0."""
        h = (self.N - 1.0) / 2.0
        return h - math.sqrt(h * h - self.lam)

    @property
    def omega(self) -> float:
        """Surface area of S^(N-1)."""
        return omega_sphere(self.N)

    def to_dict(self) -> dict:
        return {"N": self.N, "p": self.p, "lambda": self.lam}
