"""Time-domain Monte-Carlo check of the steady-state covariance.

The augmented linear SDE ``du = A u dt + C dW`` is stepped with its exact
discrete propagator: ``u_{k+1} = Phi u_k + L z_k`` with ``Phi = exp(A dt)``,
``L L^T = Q = int_0^dt exp(A s) D exp(A^T s) ds`` (Van Loan) and standard
normal ``z_k``.  Because the discretisation is exact for linear systems, the
only errors are statistical, which the jackknife over trajectories measures.

Each trajectory draws from its own Philox stream spawned from the seed, so
results do not depend on batching or thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, expm

from . import _kernels
from ._threads import worker_count
from .covariance import CovarianceMatrix
from .dynamics import LinearModel, linear_model
from .errors import ParameterError, StabilityError
from .params import DerivedParams, SystemParams, derive_couplings
from .stability import characteristic_coefficients, is_stable
from .steady_state import OperatingPoint

__all__ = ["SimConfig", "SimResult", "default_config", "simulate_covariance", "simulate_model",
           "discretize", "compare"]

MAX_DT_RATE = 0.05
DIVERGENCE_FACTOR = 1e6
CHUNK_STEPS = 4096


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo settings; times in seconds."""

    dt: float
    duration: float
    n_trajectories: int = 16
    seed: int = 0
    burn_in: float = 0.0

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ParameterError("dt must be positive")
        if self.duration <= self.dt:
            raise ParameterError("duration must exceed dt")
        if self.burn_in < 0:
            raise ParameterError("burn_in must be non-negative")
        if int(self.n_trajectories) < 1:
            raise ParameterError("n_trajectories must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")

    def validate_for(self, m: LinearModel) -> None:
        """Check the time-step and duration invariants against the model rates."""
        wm = m.scale
        fastest = float(m.rates().max()) * wm
        if self.dt * fastest >= MAX_DT_RATE:
            raise ParameterError(f"dt*max_rate = {self.dt * fastest:.3g} must be < {MAX_DT_RATE}")
        slowest = _slowest_decay(m) * wm
        if self.duration <= 10.0 / slowest:
            raise ParameterError(f"duration must exceed 10 slowest decay times ({10.0 / slowest:.3e} s)")


def _slowest_decay(m: LinearModel) -> float:
    return float(-np.linalg.eigvals(m.drift()).real.max())


def default_config(op: OperatingPoint, sys: SystemParams, n_trajectories: int = 16, seed: int = 0,
                   decay_times: float = 2000.0, derived: DerivedParams | None = None) -> SimConfig:
    """``dt = 0.01 / max rate``, burn-in of 10 slowest decay times, ``decay_times`` of sampling."""
    m = linear_model(op, sys, derived)
    wm = m.scale
    slow = _slowest_decay(m)
    if slow <= 0:
        raise StabilityError("instability detected: no decaying steady state")
    dt = 0.01 / (float(m.rates().max()) * wm)
    burn = 10.0 / (slow * wm)
    return SimConfig(dt=dt, duration=burn + decay_times / (slow * wm), n_trajectories=n_trajectories,
                     seed=seed, burn_in=burn)


def discretize(m: LinearModel, dt_norm: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact propagator and a square-root factor of the step covariance (Van Loan)."""
    A = m.drift()
    D = m.diffusion()
    n = A.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = -A
    M[:n, n:] = D
    M[n:, n:] = A.T
    F = expm(M * dt_norm)
    Phi = F[n:, n:].T
    Q = Phi @ F[:n, n:]
    Q = 0.5 * (Q + Q.T)
    # D is rank deficient (the momentum noise is one column), so jitter before factoring
    jitter = 1e-300 + 1e-15 * np.trace(Q) / n
    try:
        L = cholesky(Q + jitter * np.eye(n), lower=True)
    except np.linalg.LinAlgError:
        w, U = np.linalg.eigh(Q)
        L = U * np.sqrt(np.clip(w, 0.0, None))
    return np.ascontiguousarray(Phi), np.ascontiguousarray(L)


@dataclass(frozen=True)
class SimResult:
    """Ensemble estimate ``cov`` with jackknife standard errors ``stderr`` (4x4 each)."""

    cov: CovarianceMatrix
    stderr: np.ndarray
    samples: int
    config: SimConfig

    def z_scores(self, reference) -> np.ndarray:
        ref = reference.v if isinstance(reference, CovarianceMatrix) else np.asarray(reference)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.cov.v - ref) / self.stderr


def _run_trajectory_block(Phi, L, streams, n_steps, n_skip, bound):
    n = Phi.shape[0]
    nt = len(streams)
    x = np.zeros((nt, n))
    sums = np.zeros((nt, n, n))
    done = 0
    while done < n_steps:
        k = min(CHUNK_STEPS, n_steps - done)
        z = np.stack([g.standard_normal((k, n)) for g in streams])
        skip = min(max(n_skip - done, 0), k)
        x, s, peak = _kernels.propagate(Phi, L, x, z, skip)
        sums += s
        if not np.all(np.isfinite(peak)) or peak.max() > bound:
            raise StabilityError("instability detected: trajectory norm exceeded the divergence bound")
        done += k
    return sums


def simulate_model(m: LinearModel, cfg: SimConfig, check: bool = True) -> SimResult:
    """Monte-Carlo covariance of an already linearized model."""
    if check:
        cfg.validate_for(m)
    wm = m.scale
    dt = cfg.dt * wm
    n_steps = int(round(cfg.duration / cfg.dt))
    n_skip = int(round(cfg.burn_in / cfg.dt))
    if n_steps - n_skip < 2:
        raise ParameterError("no samples remain after burn-in")
    Phi, L = discretize(m, dt)
    # a stable system stays within a few stationary standard deviations
    bound = DIVERGENCE_FACTOR * math.sqrt(max(np.trace(m.diffusion()), 1.0) * 10.0 / max(_slowest_decay(m), 1e-300))

    ntraj = int(cfg.n_trajectories)
    seqs = np.random.SeedSequence(int(cfg.seed)).spawn(ntraj)
    streams = [np.random.Generator(np.random.Philox(s)) for s in seqs]
    nthreads = min(worker_count(), ntraj)
    blocks = [streams[i::nthreads] for i in range(nthreads)]
    order = [list(range(ntraj))[i::nthreads] for i in range(nthreads)]
    if nthreads == 1:
        results = [_run_trajectory_block(Phi, L, blocks[0], n_steps, n_skip, bound)]
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            results = list(pool.map(lambda b: _run_trajectory_block(Phi, L, b, n_steps, n_skip, bound), blocks))
    sums = np.zeros((ntraj, 5, 5))
    for idx, res in zip(order, results):
        sums[idx] = res
    count = n_steps - n_skip
    per_traj = sums[:, :4, :4] / count
    est = per_traj.mean(axis=0)
    est = 0.5 * (est + est.T)
    if ntraj > 1:
        loo = (per_traj.sum(axis=0)[None] - per_traj) / (ntraj - 1)
        se = np.sqrt((ntraj - 1) / ntraj * ((loo - loo.mean(axis=0)) ** 2).sum(axis=0))
    else:
        se = np.full((4, 4), np.nan)
    return SimResult(CovarianceMatrix(est, "monte-carlo", {"backend": _kernels.BACKEND}), se,
                     count * ntraj, cfg)


def simulate_covariance(op: OperatingPoint, sys: SystemParams, cfg: SimConfig | None = None,
                        derived: DerivedParams | None = None) -> SimResult:
    """Monte-Carlo estimate of the steady covariance at an operating point.

    Raises :class:`StabilityError` when the linearized system is unstable.
    """
    der = derived if derived is not None else derive_couplings(sys)
    if not is_stable(characteristic_coefficients(op, sys, der)).stable:
        raise StabilityError("instability detected: operating point fails the Routh-Hurwitz test")
    cfg = cfg if cfg is not None else default_config(op, sys, derived=der)
    return simulate_model(linear_model(op, sys, der), cfg)


def compare(result: SimResult, reference, n_sigma: float = 3.0) -> tuple[bool, np.ndarray]:
    """Pass flag and z-scores on the 10 independent entries of the 4x4 covariance."""
    z = result.z_scores(reference)
    iu = np.triu_indices(4)
    zz = z[iu]
    return bool(np.all(np.abs(zz) <= n_sigma)), zz
