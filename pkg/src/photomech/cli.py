"""``photomech`` command-line interface.

Exit status: 0 on success, 2 for configuration errors, 3 for numerical or
stability failures (including a failed ``oracle-check``).
"""
from __future__ import annotations

import argparse
import json
import math
import sys as _sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, _kernels
from .covariance import steady_covariance
from .errors import NumericError, ParameterError
from .observables import cooling_report, entanglement_report
from .oracle import SimConfig, compare, default_config, simulate_covariance
from .params import SystemParams, derive_couplings, load_params
from .response import effective_mechanics, effective_susceptibility, hybrid_grid, spectrum_table
from .stability import characteristic_coefficients, is_stable
from .steady_state import operating_point, solve_operating_points
from .sweep import ALIASES, FIGURES, Axis, SweepSpec, Table, figure_recipe, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse already uses 2; keep the message format uniform
        self.print_usage(_sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: config error: {message}\n")


def _global_options(p: argparse.ArgumentParser, top: bool) -> None:
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--config", metavar="PATH", default=d(None), help="flat JSON parameter file (SI keys)")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=d([]), dest="overrides",
                   help="override one parameter; delta, gamma1, gamma2_ratio, tau, power_mW are normalized")
    p.add_argument("--out", metavar="PATH", default=d(None), help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=d(None))
    p.add_argument("--seed", type=int, default=d(0), help="random seed (unsigned 64-bit)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="photomech", description="Linearized photothermal optomechanics toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({_kernels.BACKEND} kernels)")
    _global_options(parser, top=True)
    common = _Parser(add_help=False)
    _global_options(common, top=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("chi", parents=[common], help="effective mechanical susceptibility")
    p.add_argument("--omega", default="0:3:301", metavar="START:STOP:NUM", help="grid in units of omega_m")

    sub.add_parser("steady", parents=[common], help="classical operating points (all branches)")

    p = sub.add_parser("stability-map", parents=[common], help="Routh-Hurwitz verdict over a 1-D or 2-D grid")
    p.add_argument("--axis1", required=True, metavar="NAME=START:STOP:NUM[:log]")
    p.add_argument("--axis2", metavar="NAME=START:STOP:NUM[:log]")

    p = sub.add_parser("spectrum", parents=[common], help="force and displacement spectra")
    p.add_argument("--markov", action="store_true", help="Markov thermal noise instead of the coth kernel")

    for name, text in (("covariance", "steady-state covariance matrix"),
                       ("cool", "cooling figures of merit"),
                       ("entangle", "optomechanical entanglement")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--method", choices=("lyapunov", "quadrature"), default="lyapunov")

    p = sub.add_parser("sweep", parents=[common], help="evaluate observables over a parameter grid")
    p.add_argument("--axis1", required=True, metavar="NAME=START:STOP:NUM[:log]")
    p.add_argument("--axis2", metavar="NAME=START:STOP:NUM[:log]")
    p.add_argument("--observable", default="n_eff",
                   help="comma list of n_eff, n_eff_weak, E_N, eta_min, stability, S_qq@<omega/omega_m>")
    p.add_argument("--method", choices=("lyapunov", "quadrature"), default="lyapunov")

    p = sub.add_parser("figure", parents=[common], help="data for a named figure")
    p.add_argument("name", choices=sorted(FIGURES))

    p = sub.add_parser("oracle-check", parents=[common], help="Monte-Carlo check of the covariance")
    p.add_argument("--trajectories", type=int, default=16)
    p.add_argument("--decay-times", type=float, default=500.0,
                   help="sampling length in units of the slowest decay time")
    p.add_argument("--dt-factor", type=float, default=0.01,
                   help="time step times the fastest system rate (must stay below 0.05)")
    p.add_argument("--sigma", type=float, default=3.0, help="pass threshold on |z|")
    return parser


# ---------------------------------------------------------------------------
# helpers

def _parse_overrides(items: list[str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in items:
        if "=" not in item:
            raise ParameterError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        k, v = ALIASES.get(k.strip(), k.strip()), v.strip()
        if v.lower() in ("none", "null"):
            out[k] = None
            continue
        try:
            out[k] = float(v)
        except ValueError:
            raise ParameterError(f"--set {k}: not a number: {v!r}") from None
    return out


def _params(args) -> SystemParams:
    return load_params(args.config, _parse_overrides(args.overrides))


def _grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        n = int(n)
        if n < 1:
            raise ValueError
        return np.linspace(float(a), float(b), n)
    except ValueError:
        raise ParameterError(f"bad grid {text!r}; expected START:STOP:NUM") from None


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return None if not math.isfinite(float(x)) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _emit(args, payload: Table | dict, default_format: str) -> None:
    fmt = args.format or default_format
    if isinstance(payload, Table):
        text = payload.to_csv() if fmt == "csv" else payload.to_json() + "\n"
        meta = payload.metadata
    else:
        if fmt == "csv":
            flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
            cols = list(flat)
            text = Table(cols, [tuple(_clean(flat[c]) for c in cols)]).to_csv()
        else:
            text = json.dumps(_clean(payload), indent=1, sort_keys=True) + "\n"
        meta = {}
    if args.out:
        Path(args.out).write_text(text)
        meta = dict(_clean(meta), version=__version__, backend=_kernels.BACKEND, command=args.command,
                    seed=args.seed)
        Path(str(args.out) + ".meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    else:
        _sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_chi(args) -> Table:
    sys = _params(args)
    der = derive_couplings(sys)
    op = operating_point(sys, der)
    w = _grid(args.omega)
    chi = effective_susceptibility(w * sys.mech_freq, op, sys, der)
    rows = [(float(a), float(c.real), float(c.imag), float(abs(c))) for a, c in zip(w, chi)]
    return Table(["omega_over_wm", "re_chi", "im_chi", "abs_chi"], rows, {"base": sys.to_dict()})


def cmd_steady(args) -> Table:
    sys = _params(args)
    der = derive_couplings(sys)
    rows = []
    for op in solve_operating_points(sys, der):
        rep = is_stable(characteristic_coefficients(op, sys, der))
        mech = effective_mechanics(op, sys, der)
        wm = sys.mech_freq
        rows.append((op.branch_index, float(abs(op.alpha_s) ** 2), op.q_s, op.delta_eff / wm,
                     op.coupling_G / wm, mech.omega_eff / wm, mech.gamma_eff / wm, rep.code))
    cols = ["branch", "photons", "q_s", "delta_over_wm", "G_over_wm", "omega_eff_over_wm",
            "gamma_eff_over_wm", "stable"]
    return Table(cols, rows, {"base": sys.to_dict()})


def cmd_stability_map(args) -> Table:
    spec = SweepSpec(Axis.parse(args.axis1), Axis.parse(args.axis2) if args.axis2 else None, "stability")
    return run_sweep(spec, _params(args))


def cmd_spectrum(args) -> Table:
    sys = _params(args)
    der = derive_couplings(sys)
    op = operating_point(sys, der)
    tab = spectrum_table(op, sys, hybrid_grid(op, sys, derived=der), not args.markov, der)
    rows = [tuple(float(x) for x in r) for r in tab.rows(sys.mech_freq)]
    return Table(["omega_over_wm", "s_th", "s_rp", "s_pt", "s_cc", "s_qq"], rows, {"base": sys.to_dict()})


def cmd_covariance(args) -> Table:
    sys = _params(args)
    op = operating_point(sys)
    cov = steady_covariance(op, sys, args.method)
    cov.check_physical()
    labels = ("q", "p", "x", "y")
    rows = [(labels[i],) + tuple(float(v) for v in cov.v[i]) for i in range(4)]
    nu = cov.symplectic
    rows.append(("symplectic", float(nu[0]), float(nu[1]), None, None))
    return Table(["row", "q", "p", "x", "y"], rows, {"base": sys.to_dict(), "method": args.method,
                                                    "diagnostics": cov.diagnostics})


def cmd_cool(args) -> dict:
    sys = _params(args)
    op = operating_point(sys)
    return cooling_report(op, sys, method=args.method).to_dict()


def cmd_entangle(args) -> dict:
    sys = _params(args)
    op = operating_point(sys)
    return entanglement_report(op, sys, method=args.method).to_dict()


def cmd_sweep(args) -> Table:
    obs = tuple(o.strip() for o in args.observable.split(",") if o.strip())
    spec = SweepSpec(Axis.parse(args.axis1), Axis.parse(args.axis2) if args.axis2 else None, obs, args.method)
    return run_sweep(spec, _params(args))


def cmd_figure(args) -> Table:
    if args.overrides or args.config:
        raise ParameterError("figure recipes use fixed parameters; --config/--set are not accepted")
    return figure_recipe(args.name)


def cmd_oracle_check(args) -> dict:
    sys = _params(args)
    der = derive_couplings(sys)
    op = operating_point(sys, der)
    base = default_config(op, sys, args.trajectories, args.seed, args.decay_times, der)
    cfg = SimConfig(dt=base.dt * args.dt_factor / 0.01, duration=base.duration, n_trajectories=args.trajectories,
                    seed=args.seed, burn_in=base.burn_in)
    res = simulate_covariance(op, sys, cfg, der)
    ref = steady_covariance(op, sys, "lyapunov", der)
    ok, z = compare(res, ref, args.sigma)
    labels = ("q", "p", "x", "y")
    iu = np.triu_indices(4)
    return {
        "pass": ok,
        "max_abs_z": float(np.max(np.abs(z))),
        "z": {f"V_{labels[i]}{labels[j]}": float(v) for i, j, v in zip(iu[0], iu[1], z)},
        "samples": res.samples,
        "trajectories": args.trajectories,
        "seed": args.seed,
        "dt": cfg.dt,
    }


COMMANDS = {
    "chi": (cmd_chi, "csv"),
    "steady": (cmd_steady, "csv"),
    "stability-map": (cmd_stability_map, "csv"),
    "spectrum": (cmd_spectrum, "csv"),
    "covariance": (cmd_covariance, "csv"),
    "cool": (cmd_cool, "json"),
    "entangle": (cmd_entangle, "json"),
    "sweep": (cmd_sweep, "csv"),
    "figure": (cmd_figure, "csv"),
    "oracle-check": (cmd_oracle_check, "json"),
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fn, default_format = COMMANDS[args.command]
    try:
        if not 0 <= args.seed < 2**64:
            raise ParameterError("--seed must be an unsigned 64-bit integer")
        payload = fn(args)
        _emit(args, payload, default_format)
    except ParameterError as exc:
        print(f"photomech: config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"photomech: numeric error: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"photomech: config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    if args.command == "oracle-check" and not payload["pass"]:
        print("photomech: oracle check failed", file=_sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
