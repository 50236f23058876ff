import numpy as np
import pytest

from gibbslearn.gibbs import gibbs_state, marginals
from gibbslearn.lattice import assemble_hamiltonian, basis_stack
from gibbslearn.solver import (
    SolverConfig,
    alpha_along_segment,
    error_bound,
    gradient,
    hessian_at,
    objective,
    solve,
)
from gibbslearn.measure import build_plan, sample_outcomes

from conftest import chain_basis, random_chain_model


def exact_marginals(model, beta):
    ens = gibbs_state(assemble_hamiltonian(model), beta)
    return marginals(basis_stack(model.basis), ens)


def test_config_validation():
    with pytest.raises(ValueError, match="step rule"):
        SolverConfig(step_rule="adam")
    with pytest.raises(ValueError, match="constraint"):
        SolverConfig(constraint="l1")
    with pytest.raises(ValueError):
        SolverConfig(tol_grad=0.0)
    with pytest.raises(ValueError):
        SolverConfig(radius=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(shrink=1.0)
    SolverConfig(constraint="none", radius=-5.0)  # radius unused, allowed


def test_objective_and_gradient_at_origin():
    basis = chain_basis(3)
    e_hat = np.random.default_rng(1).uniform(-0.3, 0.3, basis.m)
    beta = 1.3
    # H(0) = 0 so log Z = n log 2 and all model marginals vanish
    assert objective(np.zeros(basis.m), e_hat, beta, basis) == pytest.approx(
        3 * np.log(2), rel=1e-14
    )
    np.testing.assert_allclose(
        gradient(np.zeros(basis.m), e_hat, beta, basis), beta * e_hat, atol=1e-13
    )


def test_zero_marginals_solved_instantly():
    basis = chain_basis(2)
    mu_hat, trace = solve(np.zeros(basis.m), 1.0, basis)
    np.testing.assert_array_equal(mu_hat, np.zeros(basis.m))
    assert trace.converged
    assert trace.n_iterations == 1


def test_exact_round_trip_each_beta():
    # beta=3 needs a deep gradient tolerance: the dual Hessian spectrum is
    # wide there and pg ~ 1e-7 only certifies parameter error ~ 1e-3
    model = random_chain_model(2, seed=14)
    cfg = SolverConfig(tol_grad=1e-12, polish_max_iters=200)
    for beta in (0.2, 1.0, 3.0):
        e = exact_marginals(model, beta)
        mu_hat, trace = solve(e, beta, model.basis, cfg)
        assert trace.converged
        assert np.linalg.norm(mu_hat - model.mu) < 1e-5


def test_objectives_never_increase():
    model = random_chain_model(3, seed=23)
    e = exact_marginals(model, 2.0)
    _, trace = solve(e, 2.0, model.basis)
    diffs = np.diff(trace.objectives)
    assert np.all(diffs <= 1e-12)


def test_trace_bookkeeping():
    model = random_chain_model(2, seed=14)
    e = exact_marginals(model, 1.0)
    mu_hat, trace = solve(e, 1.0, model.basis)
    assert trace.iterations == list(range(trace.n_iterations))
    assert len(trace.objectives) == len(trace.grad_norms) == len(trace.steps)
    assert trace.mu_hat is mu_hat
    assert trace.wall_time > 0
    rows = list(trace.csv_rows())
    assert len(rows) == trace.n_iterations


def test_solver_accepts_estimates_object():
    model = random_chain_model(2, seed=3)
    ens = gibbs_state(assemble_hamiltonian(model), 1.0)
    est = sample_outcomes(build_plan(model.basis, "exact", 0), ens)
    mu_hat, trace = solve(est, 1.0, model.basis)
    assert trace.converged
    assert np.linalg.norm(mu_hat - model.mu) < 1e-5


def test_wrong_marginal_shape_rejected():
    basis = chain_basis(2)
    with pytest.raises(ValueError, match="shape"):
        solve(np.zeros(basis.m + 2), 1.0, basis)


def test_fixed_step_converges_when_small():
    model = random_chain_model(2, seed=2, scale=0.5)
    e = exact_marginals(model, 0.5)
    cfg = SolverConfig(step_rule="fixed", eta=0.3, tol_grad=1e-9)
    mu_hat, trace = solve(e, 0.5, model.basis, cfg)
    assert trace.converged
    assert np.linalg.norm(mu_hat - model.mu) < 1e-6


def test_fixed_step_descent_failure_carries_trace():
    # warm-start next to the optimum with a step beyond 2/L: the iterates
    # oscillate outward inside the quadratic well, so the objective rises
    # every step until the guard trips
    model = random_chain_model(2, seed=2)
    e = exact_marginals(model, 1.0)
    L = float(
        np.linalg.eigvalsh(hessian_at(model.basis, model.mu, 1.0).matrix).max()
    )
    start = model.mu + 1e-6 * np.random.default_rng(0).normal(size=model.basis.m)
    cfg = SolverConfig(
        step_rule="fixed",
        eta=5.0 / L,
        constraint="none",
        lambda0=start,
        tol_grad=1e-13,
    )
    with pytest.raises(RuntimeError, match="descent failure") as info:
        solve(e, 1.0, model.basis, cfg)
    trace = info.value.trace
    assert trace.n_iterations > 0
    assert not trace.converged


def test_l2_constraint_is_respected():
    model = random_chain_model(2, seed=8)
    e = exact_marginals(model, 1.0)
    radius = 0.25 * float(np.linalg.norm(model.mu))
    cfg = SolverConfig(constraint="l2", radius=radius)
    mu_hat, _ = solve(e, 1.0, model.basis, cfg)
    assert np.linalg.norm(mu_hat) <= radius + 1e-12


def test_unconstrained_matches_boxed_interior_solution():
    model = random_chain_model(2, seed=8, scale=0.4)
    e = exact_marginals(model, 1.0)
    inside, _ = solve(e, 1.0, model.basis)
    free, _ = solve(e, 1.0, model.basis, SolverConfig(constraint="none"))
    np.testing.assert_allclose(inside, free, atol=1e-6)


def test_boundary_optimum_converges():
    # noisy marginals push the dual optimum onto the box boundary; the
    # polish step must solve on the free block to certify tol there
    model = random_chain_model(3, seed=31)
    ens = gibbs_state(assemble_hamiltonian(model), 1.0)
    est = sample_outcomes(build_plan(model.basis, "grouped", 30_000), ens, seed=4)
    mu_hat, trace = solve(est.e_hat, 1.0, model.basis)
    assert trace.converged
    assert np.max(np.abs(mu_hat)) <= 1.0 + 1e-15


def test_momentum_off_still_converges():
    model = random_chain_model(2, seed=5)
    e = exact_marginals(model, 1.0)
    cfg = SolverConfig(momentum=False)
    mu_hat, trace = solve(e, 1.0, model.basis, cfg)
    assert trace.converged
    assert np.linalg.norm(mu_hat - model.mu) < 1e-5


def test_polish_off_converges_at_mild_beta():
    model = random_chain_model(2, seed=5)
    e = exact_marginals(model, 0.5)
    mu_hat, trace = solve(e, 0.5, model.basis, SolverConfig(polish=False))
    assert trace.converged
    assert np.linalg.norm(mu_hat - model.mu) < 1e-5


def test_warm_start_from_truth():
    model = random_chain_model(2, seed=9)
    e = exact_marginals(model, 1.0)
    cfg = SolverConfig(lambda0=model.mu.copy())
    mu_hat, trace = solve(e, 1.0, model.basis, cfg)
    assert trace.converged
    assert trace.n_iterations <= 3


def test_error_bound_values():
    assert error_bound(0.01, 0.5, 1.0, 4) == pytest.approx(0.08, abs=1e-15)
    with pytest.raises(ValueError, match="non-strongly-convex"):
        error_bound(0.01, 0.0, 1.0, 4)
    with pytest.raises(ValueError):
        error_bound(-0.01, 0.5, 1.0, 4)


def test_alpha_along_segment_at_origin():
    basis = chain_basis(2)
    zero = np.zeros(basis.m)
    beta = 1.7
    # the Hessian at the origin is beta^2 * I, so the segment minimum is beta^2
    assert alpha_along_segment(basis, zero, zero, beta) == pytest.approx(
        beta**2, rel=1e-10
    )


def test_alpha_positive_on_random_segment():
    model = random_chain_model(2, seed=12)
    other = random_chain_model(2, seed=13)
    alpha = alpha_along_segment(model.basis, model.mu, other.mu, 1.0)
    assert 0 < alpha <= 1.0


def test_hessian_at_matches_report():
    basis = chain_basis(2)
    lam = np.random.default_rng(6).uniform(-1, 1, basis.m)
    report = hessian_at(basis, lam, 1.2)
    assert report.matrix.shape == (basis.m, basis.m)
    assert report.min_eigenvalue > 0
