import os

import numpy as np
import pytest

from photomech import _kernels
from photomech.dynamics import model_for
from photomech.oracle import discretize
from photomech.params import baseline_fig2

needs_compiled = pytest.mark.skipif(_kernels.compiled is None, reason="compiled extension not built")


@pytest.fixture
def model():
    return model_for(baseline_fig2().with_normalized(gamma2_ratio=1.0, tau=3.0))[1]


def test_fallback_spectral_density_matches_direct_solve(model):
    A, C = model.drift(), model.noise_factor()
    omega = np.array([0.0, 0.7, 1.0, 2.5])
    got = _kernels.fallback.spectral_density(omega, A, C)
    for w, g in zip(omega, got):
        X = np.linalg.inv(-1j * w * np.eye(5) - A) @ C
        ref = (X @ X.conj().T).real[:4, :4]
        assert np.allclose(g, ref, rtol=1e-12, atol=1e-14 * np.abs(ref).max())


def test_fallback_propagate_by_hand(model):
    Phi, L = discretize(model, 0.02)
    rng = np.random.default_rng(0)
    z = rng.standard_normal((2, 30, 5))
    x, sums, peak = _kernels.fallback.propagate(Phi, L, np.zeros((2, 5)), z, 10)
    for t in range(2):
        xi = np.zeros(5)
        acc = np.zeros((5, 5))
        top = 0.0
        for k in range(30):
            xi = Phi @ xi + L @ z[t, k]
            top = max(top, np.abs(xi).max())
            if k >= 10:
                acc += np.outer(xi, xi)
        assert np.allclose(x[t], xi, rtol=1e-13)
        assert np.allclose(sums[t], acc, rtol=1e-12)
        assert peak[t] == pytest.approx(top)


@needs_compiled
def test_backends_agree_on_spectral_density(model):
    A = np.ascontiguousarray(model.drift())
    C = np.ascontiguousarray(model.noise_factor())
    omega = np.linspace(0.0, 6.0, 301)
    a = _kernels.compiled.spectral_density(omega, A, C)
    b = _kernels.fallback.spectral_density(omega, A, C)
    assert np.allclose(a, b, rtol=1e-11, atol=1e-13 * np.abs(b).max())


@needs_compiled
def test_backends_agree_on_propagation(model):
    Phi, L = discretize(model, 0.01)
    rng = np.random.default_rng(1)
    z = rng.standard_normal((3, 500, 5))
    x0 = rng.standard_normal((3, 5))
    a = _kernels.compiled.propagate(Phi, L, x0, z, 100)
    b = _kernels.fallback.propagate(Phi, L, x0, z, 100)
    for u, v in zip(a[:2], b[:2]):
        assert np.allclose(u, v, rtol=1e-11, atol=1e-12 * np.abs(v).max())


def test_backend_name():
    assert _kernels.BACKEND in ("compiled", "python")
    forced = os.environ.get("PHOTOMECH_PURE_PYTHON") == "1"
    if _kernels.compiled is not None and not forced:
        assert _kernels.BACKEND == "compiled"
    if forced:
        assert _kernels.BACKEND == "python"
