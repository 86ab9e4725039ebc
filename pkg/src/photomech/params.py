"""Parameter records, physical constants and derived couplings.

All public values are SI.  Rates and frequencies are angular (rad/s).
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from scipy import constants as _sc

from .errors import ParameterError

__all__ = [
    "CONSTANTS",
    "Constants",
    "MaterialParams",
    "SystemParams",
    "DerivedParams",
    "SILICON_GOLD_COATED",
    "baseline_fig2",
    "derive_couplings",
    "derive_deformation_constant",
    "skin_depth",
    "thermal_diffusion_length",
    "thermal_occupation",
    "wave_speeds",
    "laser_angular_frequency",
    "load_params",
    "dump_params",
]


@dataclass(frozen=True)
class Constants:
    """CODATA values used everywhere (taken from :mod:`scipy.constants`)."""

    hbar: float = _sc.hbar
    k_B: float = _sc.k
    c: float = _sc.c
    mu_0: float = _sc.mu_0
    epsilon_0: float = _sc.epsilon_0


CONSTANTS = Constants()


def _require_positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ParameterError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class MaterialParams:
    """Thermoelastic constants of the mirror material.

    Attributes
    ----------
    young_modulus : float
        Young modulus E_Y [Pa].
    poisson_ratio : float
        Poisson ratio in [0, 0.5); zero is admitted since 1 - 2*sigma stays positive.
    thermal_expansion : float
        Linear expansion coefficient [1/K].
    density : float
        Mass density [kg/m^3].
    specific_heat : float
        Specific heat capacity [J/(kg K)].
    thermal_conductivity : float
        [W/(m K)].
    electrical_conductivity : float
        Conductivity of the absorbing surface layer [S/m]; sets the skin depth.
    refraction_index : float
        Dimensionless.
    """

    young_modulus: float
    poisson_ratio: float
    thermal_expansion: float
    density: float
    specific_heat: float
    thermal_conductivity: float
    electrical_conductivity: float
    refraction_index: float = 1.0

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.name in ("poisson_ratio", "thermal_expansion"):
                continue
            _require_positive(f.name, getattr(self, f.name))
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ParameterError(
                f"poisson_ratio must lie in [0, 0.5) (1-2*sigma vanishes at 0.5), got {self.poisson_ratio!r}"
            )
        if not (self.thermal_expansion >= 0 and math.isfinite(self.thermal_expansion)):
            raise ParameterError(f"thermal_expansion must be >= 0, got {self.thermal_expansion!r}")


# Silicon cantilever with a few-nm gold coating: the substrate sets the
# thermoelastic response, the gold film sets the optical skin depth.
SILICON_GOLD_COATED = MaterialParams(
    young_modulus=130e9,
    poisson_ratio=0.28,
    thermal_expansion=2.6e-6,
    density=2330.0,
    specific_heat=700.0,
    thermal_conductivity=148.0,
    electrical_conductivity=4.1e7,
    refraction_index=3.7,
)


def laser_angular_frequency(laser_wavelength: float) -> float:
    """omega_L = 2 pi c / lambda_L."""
    _require_positive("laser_wavelength", laser_wavelength)
    return 2.0 * math.pi * CONSTANTS.c / laser_wavelength


def skin_depth(electrical_conductivity: float, omega_laser: float) -> float:
    """Electromagnetic skin depth ``sqrt(2 / (mu_0 sigma_el omega))`` in metres."""
    _require_positive("electrical_conductivity", electrical_conductivity)
    _require_positive("omega_laser", omega_laser)
    return math.sqrt(2.0 / (CONSTANTS.mu_0 * electrical_conductivity * omega_laser))


def thermal_diffusion_length(mat: MaterialParams, omega: float) -> float:
    """Thermal diffusion length ``sqrt(2 pi K_th / (rho C omega))`` in metres.

    Note that at optical frequencies this is sub-nanometre for metals; the
    micrometre scale quoted for gold films corresponds to ``omega`` of order
    the mechanical frequency (10 MHz).
    """
    _require_positive("omega", omega)
    return math.sqrt(2.0 * math.pi * mat.thermal_conductivity / (mat.density * mat.specific_heat * omega))


def wave_speeds(mat: MaterialParams) -> tuple[float, float]:
    """Longitudinal and transverse thermoelastic wave speeds (m/s)."""
    E, s, rho = mat.young_modulus, mat.poisson_ratio, mat.density
    c_l = math.sqrt(E * (1.0 - s) / (rho * (1.0 + s) * (1.0 - 2.0 * s)))
    c_t = math.sqrt(E / (2.0 * rho * (1.0 + s)))
    return c_l, c_t


def derive_deformation_constant(mat: MaterialParams, laser_wavelength: float) -> float:
    """Deformation constant chi [s/m] from thermoelastic material constants.

    ``chi = E_Y alpha_th delta_sd / (3 K_th (1 - 2 sigma))`` with the skin depth
    evaluated at the laser frequency.
    """
    delta_sd = skin_depth(mat.electrical_conductivity, laser_angular_frequency(laser_wavelength))
    return (
        mat.young_modulus
        * mat.thermal_expansion
        * delta_sd
        / (3.0 * mat.thermal_conductivity * (1.0 - 2.0 * mat.poisson_ratio))
    )


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose occupation ``1/(exp(hbar omega / k_B T) - 1)``; 0 at T = 0."""
    if temperature < 0:
        raise ParameterError(f"temperature must be >= 0, got {temperature!r}")
    if temperature == 0:
        return 0.0
    x = CONSTANTS.hbar * omega / (CONSTANTS.k_B * temperature)
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class SystemParams:
    """Experimental parameter record.

    Exactly one of ``detuning_eff`` (the effective detuning Delta, already
    shifted by the static mirror displacement) or ``detuning_raw`` (the bare
    laser-cavity detuning Delta_0) must be given.  Figures are parameterized
    by the effective detuning, which is the default route.
    """

    mech_freq: float
    mech_quality: float
    mass: float
    bath_temp: float
    cavity_length: float
    laser_wavelength: float
    laser_power: float
    decay_input: float
    decay_mirror: float
    deformation_const: float
    absorption_eff: float
    thermal_time: float
    detuning_eff: float | None = None
    detuning_raw: float | None = None

    def __post_init__(self) -> None:
        for name in ("mech_freq", "mech_quality", "mass", "cavity_length", "laser_wavelength",
                     "decay_input", "thermal_time"):
            _require_positive(name, getattr(self, name))
        for name in ("decay_mirror", "bath_temp", "laser_power", "deformation_const"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ParameterError(f"{name} must be >= 0 and finite, got {value!r}")
        if not 0.0 <= self.absorption_eff <= 1.0:
            raise ParameterError(f"absorption_eff must lie in [0, 1], got {self.absorption_eff!r}")
        if (self.detuning_eff is None) == (self.detuning_raw is None):
            raise ParameterError("give exactly one of detuning_eff / detuning_raw")
        d = self.detuning_eff if self.detuning_eff is not None else self.detuning_raw
        if not math.isfinite(d):
            raise ParameterError(f"detuning must be finite, got {d!r}")

    # convenience --------------------------------------------------------
    @property
    def detuning_is_effective(self) -> bool:
        return self.detuning_eff is not None

    @property
    def photothermal_strength(self) -> float:
        """chi * beta * L, in seconds (the photothermal lever per absorbed photon flux)."""
        return self.deformation_const * self.absorption_eff * self.cavity_length

    def replace(self, **changes: Any) -> "SystemParams":
        """Copy with fields replaced.  Setting one detuning clears the other."""
        if "detuning_eff" in changes and changes["detuning_eff"] is not None:
            changes.setdefault("detuning_raw", None)
        if "detuning_raw" in changes and changes["detuning_raw"] is not None:
            changes.setdefault("detuning_eff", None)
        return dataclasses.replace(self, **changes)

    def with_normalized(self, **norm: float) -> "SystemParams":
        """Copy with parameters given in the normalized units used by the figures.

        Accepted keys: ``delta`` (Delta/omega_m, effective), ``gamma1`` (gamma_1/omega_m),
        ``gamma2_ratio`` (gamma_2/gamma_1), ``tau`` (tau_th*omega_m) and ``power_mW``.
        ``gamma2_ratio`` is applied after ``gamma1``.
        """
        wm = self.mech_freq
        out: dict[str, Any] = {}
        unknown = set(norm) - set(NORMALIZED_KEYS)
        if unknown:
            raise ParameterError(f"unknown normalized parameter(s): {sorted(unknown)}")
        if "delta" in norm:
            out["detuning_eff"] = norm["delta"] * wm
            out["detuning_raw"] = None
        g1 = norm["gamma1"] * wm if "gamma1" in norm else self.decay_input
        out["decay_input"] = g1
        if "gamma2_ratio" in norm:
            out["decay_mirror"] = norm["gamma2_ratio"] * g1
        elif "gamma1" in norm:
            # keep gamma_2/gamma_1 fixed when only gamma_1 moves
            out["decay_mirror"] = self.decay_mirror / self.decay_input * g1
        if "tau" in norm:
            out["thermal_time"] = norm["tau"] / wm
        if "power_mW" in norm:
            out["laser_power"] = norm["power_mW"] * 1e-3
        return dataclasses.replace(self, **out)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        return {k: v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown parameter key(s): {sorted(unknown)}")
        try:
            return cls(**{k: (None if v is None else float(v)) for k, v in data.items()})
        except TypeError as exc:
            raise ParameterError(str(exc)) from exc


NORMALIZED_KEYS = ("delta", "gamma1", "gamma2_ratio", "tau", "power_mW")


def baseline_fig2() -> SystemParams:
    """Baseline parameter set of the spectrum-composition figure (P = 1 mW)."""
    wm = 2.0 * math.pi * 10e6
    g1 = 0.5 * wm
    return SystemParams(
        mech_freq=wm,
        mech_quality=1e5,
        mass=5e-12,
        bath_temp=0.4,
        cavity_length=1e-3,
        laser_wavelength=810e-9,
        laser_power=1e-3,
        decay_input=g1,
        decay_mirror=g1,
        deformation_const=1e-5,
        absorption_eff=1.0,
        thermal_time=1.0 / wm,
        detuning_eff=wm,
    )


PRESETS = {"baseline_fig2": baseline_fig2}


@dataclass(frozen=True)
class DerivedParams:
    """Couplings derived from a :class:`SystemParams` record (all rad/s except nbar)."""

    gamma_m: float
    gamma_c: float
    g0: float
    lambda_pt: float
    drive: float
    nbar: float
    omega_c: float = field(repr=False, default=0.0)


def derive_couplings(sys: SystemParams) -> DerivedParams:
    """Single-photon couplings, drive amplitude and thermal occupation.

    The cavity frequency is identified with the laser frequency 2 pi c / lambda_L.
    """
    h = CONSTANTS.hbar
    wm = sys.mech_freq
    wc = laser_angular_frequency(sys.laser_wavelength)
    zpf = math.sqrt(h / (sys.mass * wm))
    g0 = wc / sys.cavity_length * zpf
    return DerivedParams(
        gamma_m=wm / sys.mech_quality,
        gamma_c=sys.decay_input + sys.decay_mirror,
        g0=g0,
        lambda_pt=sys.photothermal_strength * g0 / sys.thermal_time,
        drive=math.sqrt(2.0 * sys.decay_input * sys.laser_power / (h * wc)),
        nbar=thermal_occupation(wm, sys.bath_temp),
        omega_c=wc,
    )


def load_params(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None,
                preset: str = "baseline_fig2") -> SystemParams:
    """Read a flat-key JSON parameter file (SI units) layered over a preset.

    Keys missing from the file fall back to the preset.  ``overrides`` are
    applied last; keys from :data:`NORMALIZED_KEYS` are interpreted in the
    normalized figure units.
    """
    if preset not in PRESETS:
        raise ParameterError(f"unknown preset {preset!r}")
    data = PRESETS[preset]().to_dict()
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read parameter file {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ParameterError("parameter file must hold a flat JSON object")
        if "detuning_eff" in loaded or "detuning_raw" in loaded:
            data.pop("detuning_eff", None)
            data.pop("detuning_raw", None)
        data.update(loaded)
    overrides = dict(overrides or {})
    norm = {k: float(overrides.pop(k)) for k in list(overrides) if k in NORMALIZED_KEYS}
    if "detuning_eff" in overrides or "detuning_raw" in overrides:
        data.pop("detuning_eff", None)
        data.pop("detuning_raw", None)
    data.update(overrides)
    sys = SystemParams.from_dict(data)
    if norm:
        sys = sys.with_normalized(**norm)
    return sys


def dump_params(sys: SystemParams) -> str:
    return json.dumps(sys.to_dict(), indent=2, sort_keys=True)
