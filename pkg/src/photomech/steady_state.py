"""Classical operating point of the driven cavity + mirror.

Eliminating the static displacement from the steady-state equations gives a
cubic in the effective detuning::

    (Delta - Delta_0) (gamma_c^2 + Delta^2) + G0^2 (1 + 2 gamma_2 chi beta L) E^2 / omega_m = 0

which has one or three real roots (optical bistability).  The intracavity
amplitude is taken real and positive by choice of the drive phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


from .errors import NumericError
from .params import DerivedParams, SystemParams, derive_couplings

__all__ = [
    "OperatingPoint",
    "solve_cubic_real",
    "solve_operating_points",
    "operating_point",
    "effective_coupling",
]

RESIDUAL_TOL = 1e-10
FOLD_TOL = 1e-12


@dataclass(frozen=True)
class OperatingPoint:
    """Linearization point.

    ``alpha_s`` is the real intracavity amplitude, ``q_s`` the static
    displacement in units of the zero-point length, ``delta_eff`` the effective
    detuning and ``coupling_G = sqrt(2) alpha_s G0`` (rad/s).
    """

    alpha_s: float
    q_s: float
    delta_eff: float
    coupling_G: float
    branch_index: int = 0
    detuning_raw: float = math.nan
    degenerate: bool = False


def solve_cubic_real(b: float, c: float, d: float) -> tuple[list[float], float]:
    """Real roots of ``x^3 + b x^2 + c x + d`` and the discriminant.

    Closed-form (trigonometric / Cardano) roots followed by Newton polishing.
    Roots are returned ascending; a double root at a fold appears once.
    """
    disc = 18.0 * b * c * d - 4.0 * b**3 * d + b * b * c * c - 4.0 * c**3 - 27.0 * d * d
    scale = (abs(b) + math.sqrt(abs(c)) + abs(d) ** (1.0 / 3.0)) ** 6 or 1.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    if abs(disc) <= FOLD_TOL * scale:
        # double (or triple) root: x_double = -3q/(2p), x_single = 3q/p in depressed form
        if abs(p) <= FOLD_TOL * scale ** (1 / 3):
            roots = [shift]
        else:
            roots = sorted({3.0 * q / p + shift, -1.5 * q / p + shift})
    elif disc > 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = sorted(m * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift for k in range(3))
    else:
        sq = math.sqrt(q * q / 4.0 + p**3 / 27.0)
        u = math.copysign(abs(-q / 2.0 + sq) ** (1.0 / 3.0), -q / 2.0 + sq)
        v = math.copysign(abs(-q / 2.0 - sq) ** (1.0 / 3.0), -q / 2.0 - sq)
        roots = [u + v + shift]

    polished = []
    for x in roots:
        for _ in range(50):
            f = ((x + b) * x + c) * x + d
            fp = (3.0 * x + 2.0 * b) * x + c
            if fp == 0.0:
                break
            step = f / fp
            x -= step
            if abs(step) <= 1e-16 * max(1.0, abs(x)):
                break
        polished.append(x)
    return polished, disc


def _point(sys: SystemParams, der: DerivedParams, delta: float, branch: int,
           degenerate: bool = False) -> OperatingPoint:
    alpha = der.drive / math.hypot(der.gamma_c, delta)
    q_s = alpha**2 * der.g0 * (1.0 + 2.0 * sys.decay_mirror * sys.photothermal_strength) / sys.mech_freq
    return OperatingPoint(
        alpha_s=alpha,
        q_s=q_s,
        delta_eff=delta,
        coupling_G=math.sqrt(2.0) * alpha * der.g0,
        branch_index=branch,
        detuning_raw=delta + der.g0 * q_s,
        degenerate=degenerate,
    )


def solve_operating_points(sys: SystemParams, derived: DerivedParams | None = None) -> list[OperatingPoint]:
    """All classical fixed points, sorted by effective detuning.

    If ``sys`` carries the effective detuning directly the cubic is bypassed and
    a single point is returned.
    """
    der = derived if derived is not None else derive_couplings(sys)
    if sys.detuning_is_effective:
        return [_point(sys, der, float(sys.detuning_eff), 0)]

    wm = sys.mech_freq
    x0 = sys.detuning_raw / wm
    gc = der.gamma_c / wm
    k = (der.g0**2 * (1.0 + 2.0 * sys.decay_mirror * sys.photothermal_strength)
         * der.drive**2 / wm**4)
    roots, disc = solve_cubic_real(-x0, gc * gc, k - x0 * gc * gc)
    if not roots:
        raise NumericError("steady-state cubic returned no real root")
    degenerate = len(roots) == 2 or (len(roots) == 1 and disc > 0)
    points = []
    for i, x in enumerate(roots):
        pt = _point(sys, der, x * wm, i, degenerate)
        residual = abs(pt.delta_eff - sys.detuning_raw + der.g0 * pt.q_s)
        if residual > RESIDUAL_TOL * wm * max(1.0, abs(x0)):
            raise NumericError(f"fixed-point residual {residual:.3e} rad/s exceeds tolerance on branch {i}")
        points.append(pt)
    return points


def operating_point(sys: SystemParams, derived: DerivedParams | None = None, branch: int = 0) -> OperatingPoint:
    """The operating point on ``branch`` (the only one when Delta is effective)."""
    points = solve_operating_points(sys, derived)
    try:
        return points[branch]
    except IndexError:
        raise NumericError(f"branch {branch} requested but only {len(points)} real branch(es) exist") from None


def effective_coupling(op: OperatingPoint, derived: DerivedParams) -> float:
    """``G = sqrt(2) alpha_s G0``."""
    return math.sqrt(2.0) * op.alpha_s * derived.g0
