"""Parameter sweeps, figure recipes and table output.

A sweep walks a one- or two-dimensional grid of parameter values, evaluates
one or more observables at every point and returns a :class:`Table` whose
row order is fixed (the second axis is the outer loop).  Points where the
linearized system is unstable are kept, with empty observable fields and
``stable`` set to 0 (or -1 for marginal points).
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Sequence

import numpy as np

from ._threads import worker_count
from .covariance import steady_covariance
from .errors import NumericError, ParameterError
from .observables import (
    log_negativity,
    phonon_number_exact,
    phonon_number_weak_coupling,
)
from .params import NORMALIZED_KEYS, SystemParams, baseline_fig2, derive_couplings
from .response import position_spectrum, spectrum_table
from .stability import characteristic_coefficients, is_stable
from .steady_state import operating_point

__all__ = [
    "Axis",
    "SweepSpec",
    "Table",
    "OBSERVABLES",
    "run_sweep",
    "apply_parameters",
    "figure_recipe",
    "FIGURES",
    "worker_count",
]

OBSERVABLES = ("n_eff", "n_eff_weak", "E_N", "eta_min", "stability", "S_qq@")
ALIASES = {"Δ": "delta", "Delta": "delta", "T": "bath_temp", "P": "laser_power"}
SETTABLE = tuple(f.name for f in fields(SystemParams)) + NORMALIZED_KEYS


def _canonical(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in SETTABLE:
        raise ParameterError(f"unknown sweep parameter {name!r}; choose from {', '.join(SETTABLE)}")
    return name


def apply_parameters(base: SystemParams, values: dict[str, float]) -> SystemParams:
    """Set SI fields directly and normalized keys (see :data:`NORMALIZED_KEYS`) last."""
    si = {k: v for k, v in values.items() if k not in NORMALIZED_KEYS}
    norm = {k: v for k, v in values.items() if k in NORMALIZED_KEYS}
    out = base.replace(**si) if si else base
    return out.with_normalized(**norm) if norm else out


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    num: int
    log: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", _canonical(self.name))
        if int(self.num) < 2:
            raise ParameterError(f"axis {self.name}: need at least 2 points")
        if self.log and (self.start <= 0 or self.stop <= 0):
            raise ParameterError(f"axis {self.name}: logarithmic spacing needs positive bounds")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """Parse ``name=start:stop:num[:log]``."""
        try:
            name, rng = text.split("=", 1)
            parts = rng.split(":")
            log = len(parts) == 4 and parts[3] == "log"
            if len(parts) not in (3, 4) or (len(parts) == 4 and not log):
                raise ValueError
            lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ParameterError(f"bad axis {text!r}; expected name=start:stop:num[:log]") from exc
        return cls(name.strip(), lo, hi, num, log)

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.start, self.stop, int(self.num))
        return np.linspace(self.start, self.stop, int(self.num))


def _check_observable(name: str) -> str:
    if name.startswith("S_qq@"):
        try:
            float(name[5:])
        except ValueError as exc:
            raise ParameterError(f"bad spectrum observable {name!r}; use S_qq@<omega/omega_m>") from exc
        return name
    if name not in OBSERVABLES:
        raise ParameterError(f"unknown observable {name!r}; choose from {', '.join(OBSERVABLES)}<w>")
    return name


@dataclass(frozen=True)
class SweepSpec:
    """One or two axes and the observables to evaluate at every grid point."""

    axis1: Axis
    axis2: Axis | None = None
    observable: str | Sequence[str] = "n_eff"
    method: str = "lyapunov"

    def __post_init__(self) -> None:
        obs = (self.observable,) if isinstance(self.observable, str) else tuple(self.observable)
        object.__setattr__(self, "observable", tuple(_check_observable(o) for o in obs))
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ParameterError("the two sweep axes must differ")

    @property
    def observables(self) -> tuple[str, ...]:
        return self.observable  # type: ignore[return-value]

    def points(self):
        """Grid points in output order: axis2 outer, axis1 inner."""
        v1 = self.axis1.values()
        if self.axis2 is None:
            for a in v1:
                yield {self.axis1.name: float(a)}
            return
        for b in self.axis2.values():
            for a in v1:
                yield {self.axis2.name: float(b), self.axis1.name: float(a)}


@dataclass
class Table:
    """Column-oriented result; ``None`` marks an undefined value."""

    columns: list[str]
    rows: list[tuple]
    metadata: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([np.nan if r[i] is None else r[i] for r in self.rows], dtype=float)

    def where(self, **equals: Any) -> "Table":
        idx = [self.columns.index(k) for k in equals]
        keep = [r for r in self.rows if all(r[i] == v for i, v in zip(idx, equals.values()))]
        return Table(list(self.columns), keep, dict(self.metadata))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# schema: " + ",".join(self.columns) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        recs = [dict(zip(self.columns, r)) for r in self.rows]
        return json.dumps({"columns": self.columns, "rows": recs}, indent=1, allow_nan=False)


def _evaluate(sys: SystemParams, observables: tuple[str, ...], method: str) -> tuple[list, int]:
    der = derive_couplings(sys)
    try:
        op = operating_point(sys, der)
    except (ParameterError, NumericError):
        return [None] * len(observables), 0
    rep = is_stable(characteristic_coefficients(op, sys, der))
    if not rep.stable:
        vals = [rep.margin if o == "stability" else None for o in observables]
        return vals, rep.code
    cov = None
    out: list = []
    for o in observables:
        try:
            if o == "stability":
                out.append(rep.margin)
                continue
            if o == "n_eff_weak":
                out.append(phonon_number_weak_coupling(op, sys, der))
                continue
            if o.startswith("S_qq@"):
                w = float(o[5:]) * sys.mech_freq
                out.append(float(position_spectrum(w, op, sys, False, der, check_stability=False) * sys.mech_freq))
                continue
            if cov is None:
                cov = steady_covariance(op, sys, method, der)
            if o == "n_eff":
                out.append(phonon_number_exact(cov))
            else:
                ent = log_negativity(cov)
                out.append(ent.log_neg if o == "E_N" else ent.eta_min)
        except NumericError:
            out.append(None)
    return out, rep.code


def run_sweep(spec: SweepSpec, base: SystemParams, workers: int | None = None) -> Table:
    """Evaluate ``spec`` over its grid; rows are returned in grid order."""
    pts = list(spec.points())
    systems = []
    for p in pts:
        try:
            systems.append(apply_parameters(base, p))
        except ParameterError as exc:
            raise ParameterError(f"grid point {p}: {exc}") from exc
    n = workers if workers is not None else worker_count()
    obs = spec.observables

    def job(s):
        return _evaluate(s, obs, spec.method)

    if n <= 1 or len(systems) < 8:
        results = [job(s) for s in systems]
    else:
        with ThreadPoolExecutor(n) as pool:
            results = list(pool.map(job, systems))
    names = [spec.axis1.name] if spec.axis2 is None else [spec.axis2.name, spec.axis1.name]
    rows = []
    for p, (vals, code) in zip(pts, results):
        rows.append(tuple(p[k] for k in names) + tuple(vals) + (code,))
    return Table(names + list(obs) + ["stable"], rows, {"base": base.to_dict(), "method": spec.method})


# ---------------------------------------------------------------------------
# figure recipes

def _series(base: SystemParams, spec: SweepSpec, key: str, values: Sequence[float], workers=None) -> Table:
    out: Table | None = None
    for v in values:
        t = run_sweep(spec, apply_parameters(base, {key: v}), workers)
        rows = [(float(v),) + r for r in t.rows]
        if out is None:
            out = Table([key] + t.columns, rows, t.metadata)
        else:
            out.rows.extend(rows)
    assert out is not None
    return out


def _fig2(workers=None) -> Table:
    sys = baseline_fig2()
    op = operating_point(sys)
    tab = spectrum_table(op, sys)
    cols = ["omega_over_wm", "s_th", "s_rp", "s_pt", "s_cc", "s_qq"]
    rows = [tuple(float(x) for x in r) for r in tab.rows(sys.mech_freq)]
    return Table(cols, rows, {"base": sys.to_dict(), "units": "force spectra / omega_m; S_qq * omega_m"})


def _cooling_base(gamma1: float) -> SystemParams:
    return baseline_fig2().with_normalized(gamma1=gamma1, power_mW=15.0)


def _fig3a(workers=None) -> Table:
    spec = SweepSpec(Axis("delta", 0.5, 40.0, 160, log=True), observable=("n_eff",))
    return _series(_cooling_base(10.0), spec, "gamma2_ratio", (0.0, 0.1, 0.5, 1.0), workers)


def _fig3b(workers=None) -> Table:
    spec = SweepSpec(Axis("delta", 0.1, 2.0, 191), observable=("n_eff",))
    return _series(_cooling_base(0.1), spec, "gamma2_ratio", (0.0, 0.1, 0.5, 1.0), workers)


def _fig3c(workers=None) -> Table:
    base = _cooling_base(0.1).with_normalized(delta=1.0)
    spec = SweepSpec(Axis("tau", 0.1, 10.0, 41, log=True), Axis("gamma2_ratio", 0.0, 1.0, 41), ("n_eff",))
    return run_sweep(spec, base, workers)


def _fig4(workers=None) -> Table:
    base = baseline_fig2().with_normalized(gamma1=0.1, delta=1.0)
    spec = SweepSpec(Axis("power_mW", 0.1, 30.0, 120, log=True), observable=("n_eff", "n_eff_weak"))
    t = _series(base, spec, "gamma2_ratio", (0.0, 1.0), workers)
    t.metadata["power_mW_at_G_equal_gamma_c"] = {
        str(r): _power_for_coupling(base.with_normalized(gamma2_ratio=r)) for r in (0.0, 1.0)
    }
    return t


def _power_for_coupling(sys: SystemParams) -> float:
    """Input power (mW) at which G equals gamma_c (G^2 is linear in P at fixed effective detuning)."""
    der = derive_couplings(sys)
    G = operating_point(sys, der).coupling_G
    return 1e3 * sys.laser_power * (der.gamma_c / G) ** 2


def _entangle_base(power_mW: float) -> SystemParams:
    return baseline_fig2().with_normalized(delta=0.85, gamma1=0.1, power_mW=power_mW)


def _fig5a(workers=None) -> Table:
    spec = SweepSpec(Axis("tau", 0.1, 10.0, 41, log=True), Axis("gamma2_ratio", 0.0, 1.0, 41), ("E_N",))
    return run_sweep(spec, _entangle_base(50.0), workers)


def _fig5b(workers=None) -> Table:
    spec = SweepSpec(Axis("gamma1", 0.05, 1.5, 146), observable=("E_N",))
    return _series(_entangle_base(20.0), spec, "gamma2_ratio", (0.0, 0.2, 0.9), workers)


def _fig5c(workers=None) -> Table:
    spec = SweepSpec(Axis("bath_temp", 0.0, 1.0, 101), observable=("E_N",))
    return _series(_entangle_base(50.0), spec, "gamma2_ratio", (0.0, 0.2, 0.9), workers)


def _exploratory_metzger(workers=None) -> Table:
    # the device parameters of this comparison are not fully published; only
    # the normalized cavity settings are reproduced here
    base = baseline_fig2().with_normalized(gamma1=800.0, delta=650.0, power_mW=1.0).replace(bath_temp=300.0)
    spec = SweepSpec(Axis("delta", 100.0, 2000.0, 40, log=True), observable=("n_eff",))
    return run_sweep(spec, base, workers)


FIGURES: dict[str, Callable[..., Table]] = {
    "fig2": _fig2,
    "fig3a": _fig3a,
    "fig3b": _fig3b,
    "fig3c": _fig3c,
    "fig4": _fig4,
    "fig5a": _fig5a,
    "fig5b": _fig5b,
    "fig5c": _fig5c,
    "exploratory-metzger": _exploratory_metzger,
}


def figure_recipe(name: str, workers: int | None = None) -> Table:
    """Data behind one of the named figures (see :data:`FIGURES`)."""
    try:
        fn = FIGURES[name]
    except KeyError:
        raise ParameterError(f"unknown figure recipe {name!r}; choose from {', '.join(FIGURES)}") from None
    t = fn(workers)
    t.metadata["recipe"] = name
    return t
