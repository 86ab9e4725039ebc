import numpy as np
import pytest
from conftest import random_system

from photomech.covariance import (
    CovarianceMatrix,
    covariance_from_model,
    mechanical_variances,
    noise_model,
    steady_covariance,
    symplectic_eigenvalues,
    transfer_matrix,
    variances_from_spectrum,
)
from photomech.dynamics import linear_model
from photomech.errors import NumericError, StabilityError
from photomech.params import derive_couplings
from photomech.steady_state import operating_point


def _point(sys):
    der = derive_couplings(sys)
    return operating_point(sys, der), der


def _kron_lyapunov(A, D):
    """Solve A V + V A^T + D = 0 by brute-force vectorization."""
    n = A.shape[0]
    eye = np.eye(n)
    K = np.kron(eye, A) + np.kron(A, eye)
    v = np.linalg.solve(K, -D.reshape(-1))
    return v.reshape(n, n)


def test_uncoupled_thermal_state(baseline):
    s = baseline.replace(laser_power=0.0)
    op, der = _point(s)
    V = steady_covariance(op, s, derived=der).v
    n = der.nbar
    assert np.allclose(V, np.diag([n + 0.5, n + 0.5, 0.5, 0.5]), rtol=1e-10, atol=1e-12)


def test_lyapunov_against_vectorized_solve(rng):
    for _ in range(30):
        s = random_system(rng, stable_only=True)
        op, der = _point(s)
        m = linear_model(op, s, der)
        ref = _kron_lyapunov(m.drift(), m.diffusion())[:4, :4]
        V = steady_covariance(op, s, derived=der).v
        assert np.allclose(V, ref, rtol=1e-8, atol=1e-10 * np.abs(ref).max())


def test_quadrature_matches_lyapunov(rng):
    for _ in range(15):
        s = random_system(rng, stable_only=True)
        op, der = _point(s)
        a = steady_covariance(op, s, "lyapunov", der).v
        q = steady_covariance(op, s, "quadrature", der)
        scale = np.sqrt(np.outer(np.diag(a), np.diag(a)))
        assert np.all(np.abs(q.v - a) <= 1e-8 * scale)
        assert q.method == "quadrature"
        for key in ("panels", "evaluations", "error_estimate", "tail", "cut"):
            assert key in q.diagnostics


def test_scalar_spectrum_integral_matches(baseline, rng):
    for s in [baseline] + [random_system(rng, stable_only=True) for _ in range(5)]:
        op, der = _point(s)
        q2, p2 = variances_from_spectrum(op, s, der)
        v11, v22 = mechanical_variances(steady_covariance(op, s, derived=der))
        assert q2 == pytest.approx(v11, rel=1e-7)
        assert p2 == pytest.approx(v22, rel=1e-7)


def test_baseline_variances(baseline):
    op, der = _point(baseline)
    v11, v22 = mechanical_variances(steady_covariance(op, baseline, derived=der))
    assert v11 == pytest.approx(1.192, abs=2e-3)
    assert v22 == pytest.approx(1.179, abs=2e-3)


def test_uncertainty_relation_holds(rng):
    for _ in range(100):
        s = random_system(rng, stable_only=True)
        op, der = _point(s)
        cov = steady_covariance(op, s, derived=der)
        cov.check_physical()
        assert cov.symplectic.min() >= 0.5 - 1e-8
        assert np.allclose(cov.v, cov.v.T, atol=1e-12 * np.abs(cov.v).max())


def test_symplectic_eigenvalues_known_states():
    assert np.allclose(symplectic_eigenvalues(0.5 * np.eye(4)), [0.5, 0.5])
    r = 0.7
    c, sh = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    tms = np.array([[c, 0, sh, 0], [0, c, 0, -sh], [sh, 0, c, 0], [0, -sh, 0, c]])
    assert np.allclose(symplectic_eigenvalues(tms), [0.5, 0.5])
    thermal = np.diag([3.0, 3.0, 1.5, 1.5])
    assert np.allclose(symplectic_eigenvalues(thermal), [1.5, 3.0])
    # a single-mode squeezed state stays pure
    sq = np.diag([0.5 * np.exp(-1.0), 0.5 * np.exp(1.0), 0.5, 0.5])
    assert np.allclose(symplectic_eigenvalues(sq), [0.5, 0.5])


def test_check_physical_rejects_bad_matrices():
    with pytest.raises(NumericError):
        CovarianceMatrix(np.diag([0.1, 0.1, 0.5, 0.5])).check_physical()
    bad = 0.5 * np.eye(4)
    bad[0, 1] = 0.3
    with pytest.raises(NumericError):
        CovarianceMatrix(bad).check_physical()


def test_temperature_raises_mechanical_variance(baseline):
    prev = 0.0
    for T in (0.0, 0.1, 0.4, 1.0, 4.0):
        s = baseline.replace(bath_temp=T)
        op, der = _point(s)
        v11 = steady_covariance(op, s, derived=der).v[0, 0]
        assert v11 > prev
        prev = v11


def test_transfer_matrix_reality(rng):
    for _ in range(10):
        s = random_system(rng)
        op, der = _point(s)
        w = float(rng.uniform(0.1, 3)) * s.mech_freq
        a = transfer_matrix(w, op, s, der).entries
        b = transfer_matrix(-w, op, s, der).entries
        assert np.allclose(b, a.conj(), rtol=1e-12, atol=1e-14 * np.abs(a).max())


def test_photothermal_noise_switch(baseline):
    op, der = _point(baseline)
    w = 0.9 * baseline.mech_freq
    on = transfer_matrix(w, op, baseline, der).entries
    off = transfer_matrix(w, op, baseline, der, photothermal_noise=False).entries
    assert np.allclose(on[:, [0, 1, 2, 4]], off[:, [0, 1, 2, 4]], rtol=1e-13)
    assert not np.allclose(on[:, 3], off[:, 3])


def test_noise_model_shape(baseline):
    op, der = _point(baseline)
    nm = noise_model(op, baseline, der)
    assert nm.strengths[0] == pytest.approx(der.gamma_m * (2 * der.nbar + 1))
    assert np.allclose(nm.strengths[1:], 0.5)
    D = nm.diffusion
    assert np.allclose(D, D.T)
    assert np.all(np.linalg.eigvalsh(D) > -1e-9 * np.abs(D).max())
    # mirror-port amplitude noise is shared between the cavity and memory rows
    assert D[2, 4] < 0


def test_unstable_point_raises(baseline):
    s = baseline.with_normalized(delta=1.0, gamma1=0.1, gamma2_ratio=0.5, power_mW=200.0)
    op, der = _point(s)
    for method in ("lyapunov", "quadrature"):
        with pytest.raises(StabilityError):
            steady_covariance(op, s, method, der)
    with pytest.raises(StabilityError):
        covariance_from_model(linear_model(op, s, der))


def test_unknown_method(baseline):
    op, der = _point(baseline)
    with pytest.raises(ValueError):
        steady_covariance(op, baseline, "simpson", der)
