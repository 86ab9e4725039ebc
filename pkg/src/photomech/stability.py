"""Stability of the linearized dynamics.

The characteristic polynomial (Laplace variable ``s``, fluctuations ~ e^{st})
of the effective mechanical susceptibility is monic of degree five::

    P(s) = s^5 + p1 s^4 + p2 s^3 + p3 s^2 + p4 s + p5

The system is stable iff every root has negative real part, which is decided
here by the Routh-Hurwitz determinants.  An eigenvalue check on the companion
matrix is provided as a diagnostic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .params import DerivedParams, SystemParams, derive_couplings
from .steady_state import OperatingPoint

__all__ = [
    "CharPoly",
    "StabilityReport",
    "characteristic_coefficients",
    "is_stable",
    "eigenvalue_verdict",
    "red_detuned_threshold",
    "stability_lhs",
    "MARGINAL_BAND",
]

MARGINAL_BAND = 1e-9


@dataclass(frozen=True)
class CharPoly:
    """Coefficients p1..p5 in SI (rad/s)^k, with ``scale = omega_m`` for normalization."""

    p1: float
    p2: float
    p3: float
    p4: float
    p5: float
    scale: float = 1.0

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([1.0, self.p1, self.p2, self.p3, self.p4, self.p5])

    def normalized(self) -> np.ndarray:
        """Coefficients of P(omega_m * z) / omega_m^5 (dimensionless)."""
        return self.coefficients / self.scale ** np.arange(6)

    def roots(self) -> np.ndarray:
        """Roots in rad/s (Laplace convention)."""
        return np.roots(self.normalized()) * self.scale


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    marginal: bool
    margin: float
    determinants: tuple[float, ...]

    @property
    def code(self) -> int:
        """1 stable, 0 unstable, -1 marginal."""
        if self.marginal:
            return -1
        return 1 if self.stable else 0

    def __bool__(self) -> bool:
        return self.stable


def characteristic_coefficients(op: OperatingPoint, sys: SystemParams,
                                derived: DerivedParams | None = None) -> CharPoly:
    der = derived if derived is not None else derive_couplings(sys)
    wm = sys.mech_freq
    gm = der.gamma_m
    gc = der.gamma_c
    tau = sys.thermal_time
    D = op.delta_eff
    G = op.coupling_G
    kap = sys.photothermal_strength
    g2 = sys.decay_mirror
    dd = D * D + gc * gc

    p1 = gm + 2.0 * gc + 1.0 / tau
    p2 = D * D + wm * wm + gc * gc + 2.0 * gc * gm + (gm + 2.0 * gc) / tau
    p3 = (D * D * (1.0 + gm * tau) + wm * wm + gc * (gc + gm * (2.0 + gc * tau) + 2.0 * tau * wm * wm)) / tau
    p4 = ((gm + tau * wm * wm) * dd + wm * (2.0 * gc * wm - G * G * D * tau)) / tau
    p5 = (wm * wm * dd - G * G * D * wm * (1.0 + 2.0 * g2 * kap)) / tau
    return CharPoly(p1, p2, p3, p4, p5, scale=wm)


def _hurwitz_determinants(a: np.ndarray) -> list[float]:
    """Leading principal minors of the Hurwitz matrix for a0 s^n + ... + an."""
    n = len(a) - 1
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            k = 2 * (j + 1) - (i + 1)
            if 0 <= k <= n:
                H[i, j] = a[k]
    return [float(np.linalg.det(H[:k, :k])) for k in range(1, n + 1)]


def is_stable(cp: CharPoly) -> StabilityReport:
    """Routh-Hurwitz verdict on the normalized polynomial.

    ``margin`` is the smallest Hurwitz determinant; values within
    :data:`MARGINAL_BAND` of zero are classified as marginal (not stable).
    """
    a = cp.normalized()
    if not np.all(np.isfinite(a)):
        raise ParameterError("characteristic polynomial has non-finite coefficients")
    dets = _hurwitz_determinants(a)
    margin = min(dets)
    marginal = abs(margin) < MARGINAL_BAND
    return StabilityReport(stable=(margin > 0) and not marginal, marginal=marginal,
                           margin=margin, determinants=tuple(dets))


def eigenvalue_verdict(cp: CharPoly, band: float = MARGINAL_BAND) -> int:
    """Companion-matrix verdict (1 stable, 0 unstable, -1 marginal) on normalized roots."""
    re = np.roots(cp.normalized()).real
    worst = re.max()
    if abs(worst) < band:
        return -1
    return 1 if worst < 0 else 0


def stability_lhs(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> float:
    """``omega_m (gamma_c^2 + Delta^2) - Delta G^2 (1 + 2 gamma_2 beta chi L)`` in (rad/s)^3."""
    der = derived if derived is not None else derive_couplings(sys)
    D, G = op.delta_eff, op.coupling_G
    return (sys.mech_freq * (der.gamma_c**2 + D * D)
            - D * G * G * (1.0 + 2.0 * sys.decay_mirror * sys.photothermal_strength))


def red_detuned_threshold(sys: SystemParams, derived: DerivedParams | None, delta: float) -> float:
    """Effective coupling at which the red-detuned static stability condition saturates (rad/s)."""
    if not delta > 0:
        raise ParameterError(f"the threshold formula requires red detuning (Delta > 0), got {delta!r}")
    der = derived if derived is not None else derive_couplings(sys)
    return math.sqrt(sys.mech_freq * (der.gamma_c**2 + delta**2)
                     / (delta * (1.0 + 2.0 * sys.decay_mirror * sys.photothermal_strength)))
