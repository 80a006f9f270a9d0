"""Global configuration and error types shared by every evaluator.

All physical constants of the problem (2 n0 e^4 / m^2, v_e^2 / lambda_e^2)
are normalized to one; the only physical parameter left is the wavenumber
cutoff k0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Argument outside the domain an operation is defined on."""


class OverflowGuardError(ValueError):
    """Unscaled value would not be representable; use the scaled variant."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class StepSizeError(ValueError):
    """Time step violates the explicit stability bound."""


@dataclass(frozen=True)
class PlasmaConfig:
    """Cutoff and numerical tolerances governing every evaluator.

    Parameters
    ----------
    k0 : float
        Wavenumber cutoff, 0 < k0 < inf.  Collisions with |k| > k0 are not
        grazing and are excluded from the shielded kernel.
    quad_rel_tol, quad_abs_tol : float
        Relative/absolute targets handed to adaptive quadratures and used
        by oracle-agreement checks.
    psi_switch_x : float
        Threshold between the Maclaurin-series and asymptotic-series
        branches of the scaled Dawson function.  Default 8.0: the series
        branch (all-positive terms, no cancellation) is full precision up
        to there, and beyond 8 the optimally truncated asymptotic series
        is accurate to ~1e-13, so the branches agree to ~1e-12 at the
        switch.
    """

    k0: float = 1.0
    quad_rel_tol: float = 1e-8
    quad_abs_tol: float = 1e-12
    psi_switch_x: float = 8.0

    def __post_init__(self):
        if not (self.k0 > 0.0 and math.isfinite(self.k0)):
            raise DomainError(f"k0 must be positive and finite, got {self.k0}")
        for name in ("quad_rel_tol", "quad_abs_tol"):
            val = getattr(self, name)
            if not (0.0 < val < 1.0):
                raise DomainError(f"{name} must lie in (0, 1), got {val}")
        if not (self.psi_switch_x > 0.0):
            raise DomainError(f"psi_switch_x must be positive, got {self.psi_switch_x}")


DEFAULT_CONFIG = PlasmaConfig()
