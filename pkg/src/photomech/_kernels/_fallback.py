"""NumPy implementations of the hot kernels (reference + fallback)."""
from __future__ import annotations

import numpy as np


def spectral_density(omega: np.ndarray, A: np.ndarray, C: np.ndarray) -> np.ndarray:
    """``Re[X X^H][:4, :4]`` with ``X = (-i omega I - A)^{-1} C`` for each omega.

    Returns an array of shape ``(len(omega), 4, 4)``.
    """
    omega = np.ascontiguousarray(omega, dtype=float)
    n = A.shape[0]
    M = (-1j * omega)[:, None, None] * np.eye(n) - A[None, :, :]
    X = np.linalg.solve(M, np.broadcast_to(C.astype(complex), (len(omega), n, C.shape[1])))
    X4 = X[:, :4, :]
    return np.einsum("nik,njk->nij", X4, X4.conj()).real


def propagate(Phi: np.ndarray, L: np.ndarray, x0: np.ndarray, z: np.ndarray,
              skip: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Step ``x <- Phi x + L z_k`` for every trajectory and accumulate moments.

    Parameters
    ----------
    x0 : (ntraj, n) initial states
    z : (ntraj, nsteps, n) standard normal increments
    skip : number of leading steps excluded from the moment sums

    Returns
    -------
    x : (ntraj, n) final states
    sums : (ntraj, n, n) sums of x x^T over accumulated steps
    peak : (ntraj,) largest |x_i| seen
    """
    x = np.array(x0, dtype=float)
    ntraj, nsteps, n = z.shape
    sums = np.zeros((ntraj, n, n))
    peak = np.abs(x).max(axis=1)
    # noise for all steps at once; the recursion itself must stay sequential
    w = z @ L.T
    PhiT = Phi.T
    # a diverging trajectory may overflow; the caller detects that from ``peak``
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(nsteps):
            x = x @ PhiT + w[:, k, :]
            if k >= skip:
                sums += x[:, :, None] * x[:, None, :]
            peak = np.maximum(peak, np.abs(x).max(axis=1))
    return x, sums, peak
