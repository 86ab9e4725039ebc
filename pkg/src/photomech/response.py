"""Force-noise spectra, effective susceptibility and optical spring / damping.

Frequency convention: ``f(t) = int domega/2pi e^{-i omega t} f(omega)`` so that
d/dt -> -i omega and the photothermal kernel is ``tau / (1 - i omega tau)``.
All spectra are symmetrized and even in omega; inputs and outputs are SI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import StabilityError
from .params import CONSTANTS, DerivedParams, SystemParams, derive_couplings
from .stability import characteristic_coefficients, is_stable
from .steady_state import OperatingPoint

__all__ = [
    "SpectrumTable",
    "EffectiveMechanics",
    "thermal_spectrum",
    "radiation_pressure_spectrum",
    "photothermal_spectrum",
    "cross_spectrum",
    "force_spectrum",
    "effective_susceptibility",
    "susceptibility_poles",
    "effective_damping",
    "effective_frequency",
    "effective_mechanics",
    "position_spectrum",
    "hybrid_grid",
    "spectrum_table",
]


def _der(sys: SystemParams, derived: DerivedParams | None) -> DerivedParams:
    return derived if derived is not None else derive_couplings(sys)


def _lorentz_pair(omega, gc, D):
    return (gc * gc + (omega - D) ** 2) * (gc * gc + (omega + D) ** 2)


def thermal_spectrum(omega, sys: SystemParams, exact: bool = True, derived: DerivedParams | None = None):
    """Brownian force spectrum.

    ``exact`` uses ``(gm omega / wm) coth(hbar omega / 2 kB T)`` (with its
    finite omega -> 0 limit); otherwise the Markov value ``gm (2 nbar + 1)``.
    """
    der = _der(sys, derived)
    omega = np.asarray(omega, dtype=float)
    gm, wm, T = der.gamma_m, sys.mech_freq, sys.bath_temp
    if not exact:
        return np.full_like(omega, gm * (2.0 * der.nbar + 1.0))
    a = np.abs(omega)
    if T == 0:
        return gm * a / wm
    x = CONSTANTS.hbar * a / (2.0 * CONSTANTS.k_B * T)
    limit = 2.0 * gm * CONSTANTS.k_B * T / (CONSTANTS.hbar * wm)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = gm * a / wm / np.tanh(x)
    return np.where(a == 0, limit, val)


def radiation_pressure_spectrum(omega, op: OperatingPoint, sys: SystemParams,
                                derived: DerivedParams | None = None):
    der = _der(sys, derived)
    omega = np.asarray(omega, dtype=float)
    gc, D, G = der.gamma_c, op.delta_eff, op.coupling_G
    return gc * G * G * (gc * gc + D * D + omega**2) / _lorentz_pair(omega, gc, D)


def photothermal_spectrum(omega, op: OperatingPoint, sys: SystemParams):
    omega = np.asarray(omega, dtype=float)
    G, tau, kap = op.coupling_G, sys.thermal_time, sys.photothermal_strength
    return sys.decay_mirror * G * G * kap * kap / (1.0 + (tau * omega) ** 2)


def cross_spectrum(omega, op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None):
    """Radiation-pressure / photothermal interference term; may be negative."""
    der = _der(sys, derived)
    omega = np.asarray(omega, dtype=float)
    gc, D, G = der.gamma_c, op.delta_eff, op.coupling_G
    tau, kap = sys.thermal_time, sys.photothermal_strength
    w2 = omega**2
    num = gc * (gc * gc + D * D + w2) - tau * w2 * (gc * gc - D * D + w2)
    return 2.0 * sys.decay_mirror * G * G * kap * num / ((1.0 + tau * tau * w2) * _lorentz_pair(omega, gc, D))


def force_spectrum(omega, op: OperatingPoint, sys: SystemParams, exact_thermal: bool = False,
                   derived: DerivedParams | None = None):
    """Total force noise ``S_th + S_rp + S_pt + S_cc``."""
    der = _der(sys, derived)
    return (thermal_spectrum(omega, sys, exact_thermal, der)
            + radiation_pressure_spectrum(omega, op, sys, der)
            + photothermal_spectrum(omega, op, sys)
            + cross_spectrum(omega, op, sys, der))


def effective_susceptibility(omega, op: OperatingPoint, sys: SystemParams,
                             derived: DerivedParams | None = None):
    """Exact mechanical susceptibility from eliminating the cavity and memory variables.

    ``X(omega) = wm / [wm^2 - omega^2 - i omega gm - Sigma(omega)]`` with the
    optical self-energy ``Sigma = wm G^2 Delta (1 + 2 g2 chi beta L h(omega)/tau) / ((gc - i omega)^2 + Delta^2)``.
    Returns non-finite values exactly on a real-axis pole.
    """
    der = _der(sys, derived)
    omega = np.asarray(omega, dtype=float)
    wm, gm, gc = sys.mech_freq, der.gamma_m, der.gamma_c
    D, G = op.delta_eff, op.coupling_G
    tau, kap = sys.thermal_time, sys.photothermal_strength
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = 1.0 + 2.0 * sys.decay_mirror * kap / (1.0 - 1j * omega * tau)
        sigma = wm * G * G * D * kernel / ((gc - 1j * omega) ** 2 + D * D)
        return wm / (wm * wm - omega**2 - 1j * omega * gm - sigma)


def susceptibility_poles(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> np.ndarray:
    """Complex-omega poles of :func:`effective_susceptibility` (rad/s).

    Built by clearing denominators of the exact expression, independent of
    the tabulated characteristic coefficients.
    """
    der = _der(sys, derived)
    wm = sys.mech_freq
    gm, gc = der.gamma_m / wm, der.gamma_c / wm
    D, G = op.delta_eff / wm, op.coupling_G / wm
    tau = sys.thermal_time * wm
    pt = 2.0 * sys.decay_mirror * sys.photothermal_strength
    # polynomials in omega (normalized), lowest order first
    mech = np.array([1.0, -1j * gm, -1.0])
    cav = np.array([gc * gc + D * D, -2j * gc, -1.0])
    mem = np.array([1.0, -1j * tau])
    lhs = P.polymul(P.polymul(mech, cav), mem)
    rhs = G * G * D * P.polyadd(mem, [pt])
    return P.polyroots(P.polysub(lhs, rhs)) * wm


def effective_damping(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> tuple[float, float]:
    """Optical damping rates ``(Gamma_rp, Gamma_pt)`` evaluated at omega = omega_m."""
    der = _der(sys, derived)
    wm, gc = sys.mech_freq, der.gamma_c
    D, G = op.delta_eff, op.coupling_G
    tau, kap, g2 = sys.thermal_time, sys.photothermal_strength, sys.decay_mirror
    lor = _lorentz_pair(wm, gc, D)
    g_rp = 2.0 * gc * D * G * G * wm / lor
    g_pt = (2.0 * g2 * kap * D * G * G * wm * (2.0 * gc + tau * (D * D + gc * gc - wm * wm))
            / ((1.0 + tau * tau * wm * wm) * lor))
    return float(g_rp), float(g_pt)


def _spring_radicand(op: OperatingPoint, sys: SystemParams, der: DerivedParams) -> float:
    wm, gc = sys.mech_freq, der.gamma_c
    D, G = op.delta_eff, op.coupling_G
    tau, kap, g2 = sys.thermal_time, sys.photothermal_strength, sys.decay_mirror
    lor = _lorentz_pair(wm, gc, D)
    w2 = wm * wm  # interior omega evaluated at the mechanical resonance
    rp = D * G * G * wm * (gc * gc + D * D - w2) / lor
    pt = (2.0 * g2 * kap * D * G * G * wm * (gc * gc + D * D - w2 * (1.0 + 2.0 * gc * tau))
          / ((1.0 + tau * tau * wm * wm) * lor))
    return float(wm * wm - rp - pt)


def effective_frequency(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> float:
    """Optically shifted mechanical frequency at omega = omega_m; NaN if the radicand is negative."""
    r = _spring_radicand(op, sys, _der(sys, derived))
    return math.sqrt(r) if r >= 0 else math.nan


@dataclass(frozen=True)
class EffectiveMechanics:
    gamma_rp: float
    gamma_pt: float
    gamma_eff: float
    omega_eff: float
    radicand: float

    @property
    def static_unstable(self) -> bool:
        return self.radicand < 0


def effective_mechanics(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> EffectiveMechanics:
    der = _der(sys, derived)
    g_rp, g_pt = effective_damping(op, sys, der)
    r = _spring_radicand(op, sys, der)
    return EffectiveMechanics(g_rp, g_pt, der.gamma_m + g_rp + g_pt,
                              math.sqrt(r) if r >= 0 else math.nan, r)


def _require_stable(op: OperatingPoint, sys: SystemParams, der: DerivedParams) -> None:
    rep = is_stable(characteristic_coefficients(op, sys, der))
    if not rep.stable:
        state = "marginal" if rep.marginal else "unstable"
        raise StabilityError(f"system is {state} (Routh-Hurwitz margin {rep.margin:.3e}); spectrum undefined")


def position_spectrum(omega, op: OperatingPoint, sys: SystemParams, exact_thermal: bool = False,
                      derived: DerivedParams | None = None, check_stability: bool = True):
    """``|X_eff|^2 (S_th + S_rp + S_pt + S_cc)``."""
    der = _der(sys, derived)
    if check_stability:
        _require_stable(op, sys, der)
    chi = effective_susceptibility(omega, op, sys, der)
    return np.abs(chi) ** 2 * force_spectrum(omega, op, sys, exact_thermal, der)


def hybrid_grid(op: OperatingPoint, sys: SystemParams, n_linear: int = 601, n_log: int = 200,
                linear_max: float = 3.0, omega_cut: float | None = None,
                derived: DerivedParams | None = None) -> np.ndarray:
    """Dense linear grid on [0, linear_max*wm] plus a logarithmic tail to ``omega_cut``.

    ``omega_cut`` defaults to 1e3 * max(wm, gc, |Delta|, 1/tau).
    """
    der = _der(sys, derived)
    wm = sys.mech_freq
    lin = np.linspace(0.0, linear_max * wm, n_linear)
    if omega_cut is None:
        omega_cut = 1e3 * max(wm, der.gamma_c, abs(op.delta_eff), 1.0 / sys.thermal_time)
    if n_log <= 0 or omega_cut <= lin[-1]:
        return lin
    tail = np.geomspace(lin[-1], omega_cut, n_log + 1)[1:]
    return np.concatenate([lin, tail])


@dataclass(frozen=True)
class SpectrumTable:
    grid: np.ndarray
    s_th: np.ndarray
    s_rp: np.ndarray
    s_pt: np.ndarray
    s_cc: np.ndarray
    s_qq: np.ndarray

    def rows(self, wm: float):
        for i in range(len(self.grid)):
            yield (self.grid[i] / wm, self.s_th[i], self.s_rp[i], self.s_pt[i], self.s_cc[i], self.s_qq[i])


def spectrum_table(op: OperatingPoint, sys: SystemParams, grid=None, exact_thermal: bool = True,
                   derived: DerivedParams | None = None) -> SpectrumTable:
    """Sampled component spectra.  Spectral densities are in units of omega_m (i.e. divided by wm)."""
    der = _der(sys, derived)
    grid = hybrid_grid(op, sys, derived=der) if grid is None else np.asarray(grid, dtype=float)
    wm = sys.mech_freq
    s_th = thermal_spectrum(grid, sys, exact_thermal, der)
    s_rp = radiation_pressure_spectrum(grid, op, sys, der)
    s_pt = photothermal_spectrum(grid, op, sys)
    s_cc = cross_spectrum(grid, op, sys, der)
    s_qq = position_spectrum(grid, op, sys, exact_thermal, der)
    return SpectrumTable(grid, s_th / wm, s_rp / wm, s_pt / wm, s_cc / wm, s_qq * wm)
