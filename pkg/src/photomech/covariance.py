"""Steady-state covariance of the Gaussian fluctuations.

Two independent routes are provided:

* ``quadrature``: ``V = int domega/2pi Re[T(omega) N T(omega)^H]`` with the
  exact frequency-domain transfer matrix, integrated adaptively with
  breakpoints at the resonances and an exactly mapped high-frequency tail;
* ``lyapunov``: the algebraic equation ``A V + V A^T = -D`` of the augmented
  five-state system, projected onto ``(dq, dp, dx, dy)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from . import _kernels
from .dynamics import LinearModel, linear_model
from .errors import NumericError, StabilityError
from .params import DerivedParams, SystemParams, derive_couplings
from .quadrature import integrate
from .response import position_spectrum, susceptibility_poles
from .stability import characteristic_coefficients, is_stable
from .steady_state import OperatingPoint

__all__ = [
    "NoiseModel",
    "TransferMatrix",
    "CovarianceMatrix",
    "noise_model",
    "transfer_matrix",
    "steady_covariance",
    "covariance_from_model",
    "mechanical_variances",
    "variances_from_spectrum",
    "symplectic_eigenvalues",
]

SYMPLECTIC_TOL = 1e-8
TAIL_TOL = 1e-8  # absolute, in units of the vacuum variance
_OMEGA2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
SYMPLECTIC_FORM = np.block([[_OMEGA2, np.zeros((2, 2))], [np.zeros((2, 2)), _OMEGA2]])


@dataclass(frozen=True)
class NoiseModel:
    """Symmetrized white-noise description in SI.

    ``strengths`` holds the diagonal correlation strengths of
    ``(xi, x1_in, y1_in, x2_in, y2_in)``: the Markov Brownian force has
    ``gm (2 nbar + 1)`` [rad/s] so that an uncoupled oscillator relaxes to
    ``nbar + 1/2``; each vacuum quadrature has 1/2.  ``diffusion`` is the
    5x5 state-space diffusion matrix ``B N B^T`` of the augmented system,
    whose x-row and memory row are correlated through ``x2_in``.
    """

    strengths: np.ndarray
    diffusion: np.ndarray


def noise_model(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> NoiseModel:
    m = linear_model(op, sys, derived)
    wm = m.scale
    strengths = m.noise_strengths()
    strengths[0] *= wm
    return NoiseModel(strengths=strengths, diffusion=m.diffusion() * wm)


@dataclass(frozen=True)
class TransferMatrix:
    """Response of ``(dq, dp, dx, dy)`` to ``(xi, x1_in, y1_in, x2_in, y2_in)`` at ``omega`` (SI)."""

    omega: float
    entries: np.ndarray


def _si_system(m: LinearModel, photothermal_noise: bool = True) -> tuple[np.ndarray, np.ndarray]:
    wm = m.scale
    A = m.drift() * wm
    B = m.input_matrix(photothermal_noise)
    B[:, 1:] *= math.sqrt(wm)  # vacuum inputs carry sqrt(rate) couplings
    return A, B


def transfer_matrix(omega: float, op: OperatingPoint, sys: SystemParams,
                    derived: DerivedParams | None = None, photothermal_noise: bool = True) -> TransferMatrix:
    """Exact solution of the frequency-domain Langevin equations at real ``omega``."""
    m = linear_model(op, sys, derived)
    A, B = _si_system(m, photothermal_noise)
    M = -1j * omega * np.eye(5) - A
    if np.linalg.cond(M) > 1e14:
        raise NumericError(f"transfer matrix is singular at omega={omega!r} (on a pole)")
    X = np.linalg.solve(M, B.astype(complex))
    return TransferMatrix(omega=float(omega), entries=X[:4, :])


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a 2n x 2n covariance matrix (ascending, n values)."""
    n = v.shape[0] // 2
    omega = np.kron(np.eye(n), _OMEGA2)
    ev = np.sort(np.abs(np.linalg.eigvals(1j * omega @ v)))
    return ev[::2]


@dataclass(frozen=True)
class CovarianceMatrix:
    """4x4 symmetrized covariance of ``(dq, dp, dx, dy)``; vacuum variance is 1/2."""

    v: np.ndarray
    method: str = "lyapunov"
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def symplectic(self) -> np.ndarray:
        return symplectic_eigenvalues(self.v)

    def check_physical(self, tol: float = SYMPLECTIC_TOL) -> None:
        if not np.allclose(self.v, self.v.T, rtol=0, atol=1e-10 * np.abs(self.v).max()):
            raise NumericError("covariance matrix is not symmetric")
        nu = self.symplectic
        if nu.min() < 0.5 - tol:
            raise NumericError(f"covariance violates the uncertainty relation (symplectic eigenvalue {nu.min():.6g})")


def _require_stable(m: LinearModel, op=None, sys=None, der=None) -> None:
    if op is not None:
        rep = is_stable(characteristic_coefficients(op, sys, der))
        ok, margin = rep.stable, rep.margin
    else:
        worst = np.linalg.eigvals(m.drift()).real.max()
        ok, margin = worst < -1e-12, -worst
    if not ok:
        raise StabilityError(f"linearized system is not stable (margin {margin:.3e}); no steady state")


def _lyapunov(m: LinearModel) -> np.ndarray:
    A = m.drift()
    D = m.diffusion()
    V = solve_continuous_lyapunov(A, -D)
    V = 0.5 * (V + V.T)
    return V[:4, :4]


def _breakpoints(poles: np.ndarray, cut: float) -> np.ndarray:
    pts = [0.0, cut]
    for lam in poles:
        c = abs(lam.imag)
        w = max(abs(lam.real), 1e-14)
        pts.append(c)
        for k in range(10):
            d = w * 4.0**k
            pts.extend([c - d, c + d])
    pts = np.array(pts)
    pts = pts[(pts >= 0) & (pts <= cut)]
    return np.unique(pts)


def _quadrature(m: LinearModel, rtol: float) -> tuple[np.ndarray, dict]:
    A = np.ascontiguousarray(m.drift())
    C = np.ascontiguousarray(m.noise_factor())
    poles = np.linalg.eigvals(A)
    cut = 20.0 * max(np.abs(poles).max(), m.rates().max())
    kern = _kernels.spectral_density

    body = integrate(lambda w: kern(np.ascontiguousarray(w), A, C), _breakpoints(poles, cut), rtol=rtol)

    # tail [cut, inf) mapped by omega = cut / u, u in (0, 1]
    def tail_f(u):
        w = cut / u
        return kern(np.ascontiguousarray(w), A, C) * (cut / u**2)[:, None, None]

    tail = integrate(tail_f, [0.0, 0.25, 0.5, 1.0], rtol=rtol)
    V = (body.value + tail.value) / math.pi
    V = 0.5 * (V + V.T)
    tail_err = float(np.max(tail.error)) / math.pi
    if tail_err > TAIL_TOL:
        raise NumericError(f"quadrature tail error {tail_err:.3e} exceeds {TAIL_TOL:g} (cut={cut:.3e}, "
                           f"{tail.panels} panels)")
    # leading 1/omega^2 behaviour of the integrand gives the analytic tail estimate
    D = m.diffusion()[:4, :4]
    diag = {
        "panels": body.panels + tail.panels,
        "evaluations": body.evaluations + tail.evaluations,
        "error_estimate": float(np.max((body.error + tail.error) / math.pi)),
        "tail": float(np.max(np.abs(tail.value)) / math.pi),
        "tail_analytic": float(np.max(np.abs(D))) / (math.pi * cut),
        "cut": cut,
    }
    return V, diag


def covariance_from_model(m: LinearModel, method: str = "lyapunov", rtol: float = 1e-10,
                          check_stability: bool = True) -> CovarianceMatrix:
    if check_stability:
        _require_stable(m)
    if method == "lyapunov":
        return CovarianceMatrix(_lyapunov(m), "lyapunov")
    if method == "quadrature":
        V, diag = _quadrature(m, rtol)
        return CovarianceMatrix(V, "quadrature", diag)
    raise ValueError(f"unknown covariance method {method!r}")


def steady_covariance(op: OperatingPoint, sys: SystemParams, method: str = "lyapunov",
                      derived: DerivedParams | None = None, rtol: float = 1e-10) -> CovarianceMatrix:
    """Steady-state covariance by ``'lyapunov'`` (default) or ``'quadrature'``."""
    der = derived if derived is not None else derive_couplings(sys)
    m = linear_model(op, sys, der)
    _require_stable(m, op, sys, der)
    return covariance_from_model(m, method, rtol, check_stability=False)


def mechanical_variances(cov: CovarianceMatrix | np.ndarray) -> tuple[float, float]:
    """``(<dq^2>, <dp^2>)``."""
    v = cov.v if isinstance(cov, CovarianceMatrix) else np.asarray(cov)
    return float(v[0, 0]), float(v[1, 1])


def variances_from_spectrum(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None,
                            rtol: float = 1e-10) -> tuple[float, float]:
    """Position and momentum variances as scalar integrals of the Markov ``S_qq``.

    ``<dq^2> = int domega/2pi S_qq`` and ``<dp^2> = int domega/2pi (omega/wm)^2 S_qq``.
    """
    der = derived if derived is not None else derive_couplings(sys)
    wm = sys.mech_freq
    poles = susceptibility_poles(op, sys, der) / wm
    rates = np.array([1.0, der.gamma_c / wm, abs(op.delta_eff) / wm, 1.0 / (sys.thermal_time * wm)])
    cut = 20.0 * max(np.abs(poles).max(), rates.max())

    def f(w):
        s = position_spectrum(w * wm, op, sys, exact_thermal=False, derived=der, check_stability=False) * wm
        return np.stack([s, w * w * s], axis=-1)

    # poles in omega: Im part is the width, Re part the centre
    lam = 1j * poles  # back to Laplace-like form for the shared breakpoint rule
    body = integrate(f, _breakpoints(lam, cut), rtol=rtol)
    tail = integrate(lambda u: f(cut / u) * (cut / u**2)[:, None], [0.0, 0.25, 0.5, 1.0], rtol=rtol)
    q2, p2 = (body.value + tail.value) / math.pi
    return float(q2), float(p2)
