"""Augmented linear Langevin system for the fluctuations.

State ``(dq, dp, dx, dy, w)``, where ``w`` is the photothermal memory variable::

    dq/dt = wm dp
    dp/dt = -wm dq - gm dp + G dx + (G chi beta L / tau) w + xi
    dx/dt = -gc dx + Delta dy + sqrt(2 g1) x1_in + sqrt(2 g2) x2_in
    dy/dt = -gc dy - Delta dx + G dq + sqrt(2 g1) y1_in + sqrt(2 g2) y2_in
    dw/dt = -w / tau + 2 g2 dx - sqrt(2 g2) x2_in

Eliminating ``w`` reproduces the exponential memory kernel of the
photothermal force.  Noise inputs are ordered ``(xi, x1_in, y1_in, x2_in, y2_in)``
with symmetrized white-noise strengths ``gm (2 nbar + 1)`` (Markov Brownian
force) and ``1/2`` for each vacuum quadrature, so that ``G = 0`` gives
``<dq^2> = <dp^2> = nbar + 1/2``.

Everything here is in units where ``omega_m = 1``; covariances are invariant
under that rescaling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DerivedParams, SystemParams, derive_couplings
from .steady_state import OperatingPoint, operating_point

__all__ = ["LinearModel", "linear_model", "NOISE_LABELS", "STATE_LABELS"]

STATE_LABELS = ("q", "p", "x", "y", "w")
NOISE_LABELS = ("xi", "x1_in", "y1_in", "x2_in", "y2_in")


@dataclass(frozen=True)
class LinearModel:
    """Normalized rates of the linearized system (omega_m = 1).

    ``scale`` is omega_m in rad/s and converts back to SI.  ``kappa`` is
    ``chi beta L`` multiplied by omega_m (dimensionless).
    """

    gm: float
    g1: float
    g2: float
    delta: float
    G: float
    tau: float
    kappa: float
    nbar: float
    scale: float

    @property
    def gc(self) -> float:
        return self.g1 + self.g2

    @property
    def pt_gain(self) -> float:
        """Static photothermal enhancement ``1 + 2 gamma_2 chi beta L``."""
        return 1.0 + 2.0 * self.g2 * self.kappa

    def drift(self) -> np.ndarray:
        gc = self.gc
        return np.array(
            [
                [0.0, 1.0, 0.0, 0.0, 0.0],
                [-1.0, -self.gm, self.G, 0.0, self.G * self.kappa / self.tau],
                [0.0, 0.0, -gc, self.delta, 0.0],
                [self.G, 0.0, -self.delta, -gc, 0.0],
                [0.0, 0.0, 2.0 * self.g2, 0.0, -1.0 / self.tau],
            ]
        )

    def input_matrix(self, photothermal_noise: bool = True) -> np.ndarray:
        """Map from the five noise inputs to the five state derivatives.

        ``photothermal_noise=False`` drops the ``x2_in`` entry of the memory row
        (diagnostic: removes the mirror-port noise from the photothermal channel
        while keeping the ``2 g2 dx`` drive).
        """
        s1 = math.sqrt(2.0 * self.g1)
        s2 = math.sqrt(2.0 * self.g2)
        B = np.zeros((5, 5))
        B[1, 0] = 1.0
        B[2, 1] = s1
        B[3, 2] = s1
        B[2, 3] = s2
        B[3, 4] = s2
        if photothermal_noise:
            B[4, 3] = -s2
        return B

    def noise_strengths(self) -> np.ndarray:
        """Diagonal symmetrized strengths of the five white-noise inputs."""
        return np.array([self.gm * (2.0 * self.nbar + 1.0), 0.5, 0.5, 0.5, 0.5])

    def noise_factor(self, photothermal_noise: bool = True) -> np.ndarray:
        """``C`` with ``C C^T`` the state diffusion matrix."""
        return self.input_matrix(photothermal_noise) * np.sqrt(self.noise_strengths())[None, :]

    def diffusion(self, photothermal_noise: bool = True) -> np.ndarray:
        C = self.noise_factor(photothermal_noise)
        return C @ C.T

    def rates(self) -> np.ndarray:
        """Characteristic rates used to size grids and time steps."""
        return np.array([1.0, self.gc, abs(self.delta), 1.0 / self.tau, self.G])


def linear_model(op: OperatingPoint, sys: SystemParams, derived: DerivedParams | None = None) -> LinearModel:
    der = derived if derived is not None else derive_couplings(sys)
    wm = sys.mech_freq
    return LinearModel(
        gm=der.gamma_m / wm,
        g1=sys.decay_input / wm,
        g2=sys.decay_mirror / wm,
        delta=op.delta_eff / wm,
        G=op.coupling_G / wm,
        tau=sys.thermal_time * wm,
        kappa=sys.photothermal_strength * wm,
        nbar=der.nbar,
        scale=wm,
    )


def model_for(sys: SystemParams, branch: int = 0) -> tuple[OperatingPoint, LinearModel]:
    """Operating point and normalized model in one call."""
    der = derive_couplings(sys)
    op = operating_point(sys, der, branch)
    return op, linear_model(op, sys, der)
