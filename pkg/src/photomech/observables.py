"""Cooling and entanglement figures of merit.

Cooling: the exact steady-state phonon number from the covariance matrix,
the weak-coupling rate-equation estimate, the asymmetric-spectrum floor and
the equivalent Bose temperature.  Entanglement: logarithmic negativity of
the mechanics/cavity bipartition and the near-threshold closed form for the
smallest partially transposed symplectic eigenvalue.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .covariance import CovarianceMatrix, steady_covariance
from .errors import NumericError
from .params import CONSTANTS, DerivedParams, SystemParams, derive_couplings
from .response import effective_damping
from .steady_state import OperatingPoint

__all__ = [
    "CoolingReport",
    "EntanglementReport",
    "ScatteringRates",
    "phonon_number_exact",
    "scattering_rates",
    "phonon_number_weak_coupling",
    "n_min_asymmetric",
    "effective_temperature",
    "log_negativity",
    "eta_min_threshold_approx",
    "threshold_coupling",
    "equipartition_check",
    "cooling_report",
    "entanglement_report",
]

NEGATIVE_TOL = 1e-8


def _matrix(V) -> np.ndarray:
    return V.v if isinstance(V, CovarianceMatrix) else np.asarray(V, dtype=float)


def phonon_number_exact(V) -> float:
    """``n_eff = (<dq^2> + <dp^2> - 1) / 2`` from the symmetrized covariance."""
    v = _matrix(V)
    n = 0.5 * (v[0, 0] + v[1, 1] - 1.0)
    if n < -NEGATIVE_TOL:
        raise NumericError(f"negative phonon number {n:.3e}: covariance violates the uncertainty relation")
    return max(float(n), 0.0)


@dataclass(frozen=True)
class ScatteringRates:
    """Stokes (``plus``) and anti-Stokes (``minus``) rates in rad/s.

    Each tuple is ordered ``(radiation pressure, photothermal, cross term)``.
    """

    plus: tuple[float, float, float]
    minus: tuple[float, float, float]

    @property
    def total_plus(self) -> float:
        return math.fsum(self.plus)

    @property
    def total_minus(self) -> float:
        return math.fsum(self.minus)


def scattering_rates(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> ScatteringRates:
    """Phonon-creating (``+``) and phonon-annihilating (``-``) photon scattering rates.

    The ``-`` rates follow from the ``+`` rates by ``omega_m -> -omega_m``,
    so that the net optical damping is ``sum(minus) - sum(plus)``.
    """
    der = derived if derived is not None else derive_couplings(sys)
    wm, gc = sys.mech_freq, der.gamma_c
    D, G = op.delta_eff, op.coupling_G
    tau, kap, g2 = sys.thermal_time, sys.photothermal_strength, sys.decay_mirror
    G2 = G * G
    lag = 1.0 + (tau * wm) ** 2
    lor_p = gc * gc + (wm + D) ** 2
    lor_m = gc * gc + (wm - D) ** 2

    rp_p = G2 * gc / (2.0 * lor_p)
    rp_m = G2 * gc / (2.0 * lor_m)
    pt = g2 * kap * kap * G2 / (2.0 * lag)
    cc_p = g2 * kap * G2 * (gc - tau * wm * (D + wm)) / (lag * lor_p)
    cc_m = g2 * kap * G2 * (gc - tau * wm * (wm - D)) / (lag * lor_m)
    return ScatteringRates(plus=(rp_p, pt, cc_p), minus=(rp_m, pt, cc_m))


def phonon_number_weak_coupling(op: OperatingPoint, sys: SystemParams,
                                derived: DerivedParams | None = None) -> float:
    """Rate-equation phonon number ``(nbar gm + sum A+) / (gm + Gamma_rp + Gamma_pt)``.

    Meant for ``gamma_c >> gamma_m, G`` and ``omega_m >> nbar gamma_m``; those
    conditions are not enforced (see :func:`cooling_report` diagnostics).
    """
    der = derived if derived is not None else derive_couplings(sys)
    rates = scattering_rates(op, sys, der)
    g_rp, g_pt = effective_damping(op, sys, der)
    den = der.gamma_m + g_rp + g_pt
    if den <= 0.0:
        raise NumericError(f"net mechanical damping is not positive ({den:.3e} rad/s); oscillator is overdriven")
    return (der.nbar * der.gamma_m + rates.total_plus) / den


def n_min_asymmetric(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> float:
    """Quantum back-action floor ``[S(-wm)/S(+wm) - 1]^-1``.

    The unsymmetrized optical force spectrum is taken as ``S(-+wm) = 2 sum A-+``,
    which makes this equal to the weak-coupling phonon number with the
    mechanical bath switched off.
    """
    rates = scattering_rates(op, sys, derived)
    s_plus, s_minus = 2.0 * rates.total_plus, 2.0 * rates.total_minus
    if not s_minus > s_plus or s_plus < 0.0:
        raise NumericError("no cooling limit: optical anti-Stokes scattering does not exceed Stokes scattering")
    return 1.0 / (s_minus / s_plus - 1.0) if s_plus > 0.0 else 0.0


def effective_temperature(n_eff: float, mech_freq: float) -> float:
    """Bose temperature in K with ``n_eff = 1 / (exp(hbar wm / kB T) - 1)``."""
    if n_eff < 0:
        raise ValueError("phonon number must be non-negative")
    if n_eff == 0:
        return 0.0
    return CONSTANTS.hbar * mech_freq / (CONSTANTS.k_B * math.log1p(1.0 / n_eff))


@dataclass(frozen=True)
class EntanglementReport:
    eta_min: float
    log_neg: float
    eta_min_approx: float | None = None
    sigma: float = float("nan")
    det_v: float = float("nan")

    @property
    def entangled(self) -> bool:
        return self.eta_min < 0.5

    def to_dict(self) -> dict:
        d = asdict(self)
        d["entangled"] = self.entangled
        return d


def log_negativity(V, tol: float = 1e-10) -> EntanglementReport:
    """Logarithmic negativity of the mechanics/cavity split of a 4x4 covariance."""
    v = _matrix(V)
    det_a = np.linalg.det(v[:2, :2])
    det_b = np.linalg.det(v[2:, 2:])
    det_c = np.linalg.det(v[:2, 2:])
    det_v = np.linalg.det(v)
    sigma = det_a + det_b - 2.0 * det_c
    disc = sigma * sigma - 4.0 * det_v
    if disc < -tol * max(1.0, sigma * sigma):
        raise NumericError(f"invalid covariance: Sigma^2 - 4 det V = {disc:.3e} < 0")
    eta = math.sqrt(max(sigma - math.sqrt(max(disc, 0.0)), 0.0) / 2.0)
    en = max(0.0, -math.log(2.0 * eta)) if eta > 0 else math.inf
    return EntanglementReport(eta_min=eta, log_neg=en, sigma=float(sigma), det_v=float(det_v))


def threshold_coupling(sys: SystemParams, derived: DerivedParams | None = None,
                       delta: float | None = None) -> float:
    """Effective coupling at the static instability (bistability) threshold, rad/s."""
    der = derived if derived is not None else derive_couplings(sys)
    D = delta if delta is not None else sys.detuning_eff
    if D is None or not D > 0:
        raise ValueError("threshold coupling requires a red detuning (Delta > 0)")
    gain = 1.0 + 2.0 * sys.decay_mirror * sys.photothermal_strength
    return math.sqrt(sys.mech_freq * (der.gamma_c ** 2 + D * D) / (D * gain))


def _eta_coefficients(d: float, g: float, t: float) -> dict[str, float]:
    """Polynomial coefficients of the near-threshold eta expression (omega_m = 1 units)."""
    d2, d4 = d * d, d ** 4
    t2, t3, t4 = t * t, t ** 3, t ** 4
    g2, g3, g4, g5 = g * g, g ** 3, g ** 4, g ** 5
    b0 = 40.0 * d2 * g * (d2 + g2) * (1.0 + 2.0 * g * t + d2 * t2 + g2 * t2)
    b2 = 8.0 * d2 * (6.0 * g4 * t3 - d2 * t + g5 * t4 + g3 * t2 * (3.0 + 2.0 * d2 * t2)
                     + g2 * t * (7.0 + 6.0 * d2 * t2) + g * (5.0 + 7.0 * d2 * t2 + d4 * t4))
    b4 = 2.0 * (g3 * t2 * (3.0 + 4.0 * d2 * t2) + 8.0 * g2 * (t + 3.0 * d2 * t3)
                + g * (5.0 + 7.0 * d2 * t2 + 4.0 * d4 * t4) - 6.0 * d2 * t)
    b6 = 2.0 * t * (6.0 * g2 * t2 + g3 * t3 + g * t * (d2 * t2 - 1.0) - 2.0)
    c2 = 16.0 * d2 * (10.0 * g4 * t3 + g5 * t4 + g3 * t2 * (27.0 + 2.0 * d2 * t2)
                      + d2 * t * (3.0 + 4.0 * d2 * t2) + g2 * t * (43.0 + 14.0 * d2 * t2)
                      + g * (21.0 + 31.0 * d2 * t2 + d4 * t4))
    c4 = 16.0 * d2 * t * (2.0 * d2 * t2 + 24.0 * g2 * t2 + 5.0 * g3 * t3 + g * t * (5.0 * d2 * t2 - 3.0) - 7.0)
    a_eta = 1.0 + t * (d2 * t + g * (2.0 + g * t) + t * (1.0 + 2.0 * g * t))
    return {"b0": b0, "b2": b2, "b4": b4, "b6": b6, "c2": c2, "c4": c4, "A": a_eta,
            "B": b0 + b2 + b4 + b6, "C": 2.0 * b0 + c2 + c4}


def eta_min_threshold_approx(sys: SystemParams, delta: float | None = None, decay_mirror: float | None = None,
                             thermal_time: float | None = None) -> float:
    """Approximate smallest symplectic eigenvalue with ``G`` pinned at threshold.

    Thermal noise is neglected.  Arguments default to the values in ``sys``;
    ``delta`` is the effective detuning in rad/s.
    """
    wm = sys.mech_freq
    if delta is None:
        if sys.detuning_eff is None:
            raise ValueError("an effective detuning is required")
        delta = sys.detuning_eff
    D = delta / wm
    if not D > 0:
        raise ValueError("near-threshold approximation requires a red detuning (Delta > 0)")
    g2 = (decay_mirror if decay_mirror is not None else sys.decay_mirror) / wm
    t = (thermal_time if thermal_time is not None else sys.thermal_time) * wm
    gc = sys.decay_input / wm + g2
    k = sys.photothermal_strength * wm
    c = _eta_coefficients(D, gc, t)
    num = gc * (1.0 + 4.0 * D * D * (D * D + gc * gc + 1.0)) * c["A"] + k * g2 * c["B"]
    den = 2.0 * (8.0 * gc * D * D * (D * D + gc * gc + 5.0) * c["A"] + k * g2 * c["C"])
    return math.sqrt(num / den)


def equipartition_check(V) -> float:
    """``<dq^2> / <dp^2>``.

    Ground-state cooling needs this ratio close to 1 *and* both variances
    close to 1/2; a small ``n_eff`` alone is not enough.
    """
    v = _matrix(V)
    return float(v[0, 0] / v[1, 1])


@dataclass(frozen=True)
class CoolingReport:
    n_eff: float
    n_eff_weak: float
    n_min: float
    t_eff: float
    equipartition_ratio: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return asdict(self)


def cooling_report(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None,
                   cov: CovarianceMatrix | None = None, method: str = "lyapunov") -> CoolingReport:
    """All cooling figures at one operating point.

    Approximate quantities that are undefined at this point are NaN, with the
    reason recorded in ``diagnostics``.
    """
    der = derived if derived is not None else derive_couplings(sys)
    cov = cov if cov is not None else steady_covariance(op, sys, method, der)
    n = phonon_number_exact(cov)
    diag: dict = {
        "weak_coupling_ratio": op.coupling_G / der.gamma_c,
        "low_temperature_ratio": der.nbar * der.gamma_m / sys.mech_freq,
    }
    try:
        n_weak = phonon_number_weak_coupling(op, sys, der)
    except NumericError as exc:
        n_weak, diag["n_eff_weak"] = math.nan, str(exc)
    try:
        n_min = n_min_asymmetric(op, sys, der)
    except NumericError as exc:
        n_min, diag["n_min"] = math.nan, str(exc)
    return CoolingReport(
        n_eff=n,
        n_eff_weak=float(n_weak),
        n_min=float(n_min),
        t_eff=effective_temperature(n, sys.mech_freq),
        equipartition_ratio=equipartition_check(cov),
        diagnostics=diag,
    )


def entanglement_report(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None,
                        cov: CovarianceMatrix | None = None, method: str = "lyapunov") -> EntanglementReport:
    der = derived if derived is not None else derive_couplings(sys)
    cov = cov if cov is not None else steady_covariance(op, sys, method, der)
    rep = log_negativity(cov)
    approx = eta_min_threshold_approx(sys, op.delta_eff) if op.delta_eff > 0 else None
    return EntanglementReport(rep.eta_min, rep.log_neg, approx, rep.sigma, rep.det_v)
