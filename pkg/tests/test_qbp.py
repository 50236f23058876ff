import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gibbslearn.qbp as qbp
from gibbslearn.gibbs import diagonalize, gibbs_state, marginals
from gibbslearn.lattice import assemble_hamiltonian, basis_stack, pauli_matrix
from gibbslearn.qbp import (
    FilterKernel,
    QuadratureConfig,
    f_tilde,
    f_time,
    grad_logZ,
    hessian_logZ,
    log_partition,
    qbp_transform,
    quasilocal_W,
    verify_fourier_pair,
)

from conftest import random_chain_model


def test_filter_kernel_validation():
    FilterKernel(beta=2.0)
    with pytest.raises(ValueError):
        FilterKernel(beta=0.0)
    with pytest.raises(ValueError):
        FilterKernel(beta=float("inf"))


def test_f_tilde_at_zero_and_parity():
    k = FilterKernel(beta=1.7)
    assert f_tilde(0.0, k) == 1.0
    for w in (0.3, 1.0, 4.0):
        assert f_tilde(w, k) == pytest.approx(f_tilde(-w, k), abs=0)
        x = 1.7 * w / 2
        assert f_tilde(w, k) == pytest.approx(np.tanh(x) / x, rel=1e-14)


@given(st.floats(-50, 50), st.floats(0.1, 5.0))
def test_f_tilde_range(omega, beta) -> None:
    val = f_tilde(omega, FilterKernel(beta=beta))
    assert 0 < val <= 1


def test_f_tilde_series_branch_is_continuous():
    # the series takes over below |beta*omega| = 1e-6; both branches must
    # agree there to machine precision
    k = FilterKernel(beta=1.0)
    below, above = 0.999999e-6, 1.000001e-6
    assert f_tilde(below, k) == pytest.approx(f_tilde(above, k), abs=1e-15)


def test_f_time_frozen_value_and_parity():
    k = FilterKernel(beta=1.0)
    assert f_time(1.0, k) == pytest.approx(0.05505595798253514, abs=1e-16)
    assert f_time(-2.3, k) == f_time(2.3, k)


def test_f_time_diverges_at_origin():
    with pytest.raises(ValueError):
        f_time(0.0, FilterKernel(beta=1.0))
    with pytest.raises(ValueError):
        f_time(np.array([0.5, 0.0]), FilterKernel(beta=1.0))


def test_f_time_positive_and_decaying():
    k = FilterKernel(beta=0.7)
    ts = np.geomspace(1e-4, 20, 50)
    vals = f_time(ts, k)
    assert np.all(vals > 0)
    assert np.all(np.diff(vals) < 0)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(step=0.1, eps=0.01)
    with pytest.raises(ValueError):
        QuadratureConfig(t_max=0.005)


def test_fourier_pair_small_grid():
    report = verify_fourier_pair(FilterKernel(beta=1.0), np.linspace(-5, 5, 11))
    assert report.max_abs_error < 1e-4
    assert report.quad_error_estimate < 1e-4
    np.testing.assert_allclose(report.numeric, report.exact, atol=1e-4)


def test_fourier_pair_raises_on_short_window():
    # t_max = 1 leaves an exponential tail far above tol, so the check must
    # refuse rather than report garbage errors
    quad = QuadratureConfig(t_max=1.0, step=1e-3, eps=1e-2, tol=1e-4)
    with pytest.raises(ValueError, match="did not converge"):
        verify_fourier_pair(FilterKernel(beta=1.0), [0.0, 1.0], quad)


def test_qbp_transform_identity_hamiltonian():
    # H = 0: all gaps vanish, filter is 1, operator passes through
    spec = diagonalize(np.zeros((4, 4)))
    rng = np.random.default_rng(12)
    O = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    O = O + O.conj().T
    np.testing.assert_allclose(qbp_transform(O, spec, 1.5), O, atol=1e-12)


def test_qbp_transform_scales_off_diagonals():
    # H = Z, O = X: X couples the two levels with gap 2
    spec = diagonalize(pauli_matrix("Z"))
    beta = 0.9
    out = qbp_transform(pauli_matrix("X"), spec, beta)
    expected = f_tilde(2.0, FilterKernel(beta=beta)) * pauli_matrix("X")
    np.testing.assert_allclose(out, expected, atol=1e-14)


def test_qbp_transform_preserves_hermiticity():
    model = random_chain_model(3, seed=8)
    spec = diagonalize(assemble_hamiltonian(model))
    rng = np.random.default_rng(0)
    O = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    O = O + O.conj().T
    out = qbp_transform(O, spec, 2.0)
    np.testing.assert_allclose(out, out.conj().T, atol=1e-12)


def test_grad_is_minus_beta_marginals():
    model = random_chain_model(3, seed=3)
    beta = 1.4
    ens = gibbs_state(assemble_hamiltonian(model), beta)
    expected = -beta * marginals(basis_stack(model.basis), ens)
    np.testing.assert_allclose(grad_logZ(model, beta), expected, atol=1e-13)


def test_grad_matches_finite_differences():
    model = random_chain_model(2, seed=6)
    beta = 0.8
    g = grad_logZ(model, beta)
    h = 1e-6
    for j in (0, 4, 11):
        mu_p, mu_m = model.mu.copy(), model.mu.copy()
        mu_p[j] += h
        mu_m[j] -= h
        fd = (
            log_partition(dataclasses.replace(model, mu=mu_p), beta)
            - log_partition(dataclasses.replace(model, mu=mu_m), beta)
        ) / (2 * h)
        assert g[j] == pytest.approx(fd, abs=1e-8)


def test_hessian_at_zero_coupling_is_isotropic():
    model = random_chain_model(2, seed=0)
    zero = dataclasses.replace(model, mu=np.zeros(model.basis.m))
    for beta in (0.5, 2.0):
        report = hessian_logZ(zero, beta)
        np.testing.assert_allclose(
            report.matrix, beta**2 * np.eye(model.basis.m), atol=1e-12
        )
        assert report.min_eigenvalue == pytest.approx(beta**2, rel=1e-10)


def test_hessian_symmetric_and_positive():
    model = random_chain_model(3, seed=13)
    report = hessian_logZ(model, 1.2)
    H = report.matrix
    np.testing.assert_allclose(H, H.T, atol=1e-13)
    assert report.asymmetry < 1e-12
    assert report.min_eigenvalue > 0
    assert np.linalg.eigvalsh(H).min() == pytest.approx(
        report.min_eigenvalue, rel=1e-9, abs=1e-12
    )


def test_hessian_report_round_trip():
    model = random_chain_model(2, seed=1)
    report = hessian_logZ(model, 1.0)
    payload = report.to_dict(include_matrix=True)
    assert payload["beta"] == 1.0
    assert len(payload["matrix"]) == model.basis.m
    assert "matrix" not in report.to_dict()
    assert "min_eig" in report.to_json()


def test_hessian_budget_guard(monkeypatch):
    model = random_chain_model(2, seed=1)
    monkeypatch.setattr(qbp, "HESSIAN_BUDGET", 10)
    with pytest.raises(ValueError, match="budget"):
        hessian_logZ(model, 1.0)


def test_quasilocal_direction_shape_check():
    model = random_chain_model(2, seed=2)
    with pytest.raises(ValueError):
        quasilocal_W(np.ones(3), model, 1.0)


def test_quasilocal_w_hermitian_and_linear():
    model = random_chain_model(3, seed=4)
    rng = np.random.default_rng(5)
    u = rng.normal(size=model.basis.m)
    v = rng.normal(size=model.basis.m)
    Wu = quasilocal_W(u, model, 1.1)
    Wv = quasilocal_W(v, model, 1.1)
    Wsum = quasilocal_W(u + 2 * v, model, 1.1)
    np.testing.assert_allclose(Wu, Wu.conj().T, atol=1e-12)
    np.testing.assert_allclose(Wsum, Wu + 2 * Wv, atol=1e-11)


def test_quasilocal_w_at_zero_coupling_is_unfiltered():
    model = random_chain_model(2, seed=7)
    zero = dataclasses.replace(model, mu=np.zeros(model.basis.m))
    v = np.random.default_rng(9).normal(size=model.basis.m)
    W = np.tensordot(v, basis_stack(model.basis), axes=1)
    np.testing.assert_allclose(quasilocal_W(v, zero, 2.5), W, atol=1e-12)


def test_log_partition_matches_ensemble():
    model = random_chain_model(3, seed=11)
    beta = 0.6
    ens = gibbs_state(assemble_hamiltonian(model), beta)
    assert log_partition(model, beta) == pytest.approx(ens.log_z, rel=1e-13)
