import numpy as np
import pytest

from gibbslearn.gibbs import gibbs_state, marginals
from gibbslearn.lattice import (
    assemble_hamiltonian,
    basis_stack,
    pauli_matrix,
    to_dense,
)
from gibbslearn.measure import (
    MarginalEstimates,
    MeasurementPlan,
    build_plan,
    hoeffding_radius,
    pauli_commute,
    required_delta,
    sample_outcomes,
    simultaneous_eigenbasis,
)

from conftest import chain_basis, random_chain_model


def test_pauli_commute_against_dense_commutator():
    basis = chain_basis(2)
    stack = basis_stack(basis)
    for k in range(basis.m):
        for l in range(k, basis.m):
            comm = stack[k] @ stack[l] - stack[l] @ stack[k]
            dense_says = np.max(np.abs(comm)) < 1e-12
            assert pauli_commute(basis.ops[k], basis.ops[l]) == dense_says


def test_direct_plan_layout():
    basis = chain_basis(2)
    plan = build_plan(basis, "direct", 3000)
    assert len(plan.groups) == basis.m
    assert all(len(g) == 1 for g in plan.groups)
    assert plan.shots_per_group == 3000 // basis.m
    assert plan.copies_consumed <= 3000


def test_grouped_plan_actually_groups():
    basis = chain_basis(3)
    plan = build_plan(basis, "grouped", 10_000)
    assert 1 < len(plan.groups) < basis.m
    # constructor re-validates commutation and coverage; reaching here means
    # the coloring is a legal partition
    assert plan.shots_per_group > build_plan(basis, "direct", 10_000).shots_per_group


def test_exact_plan_consumes_nothing():
    plan = build_plan(chain_basis(2), "exact", 0)
    assert plan.groups == ()
    assert plan.n_total == 0


def test_build_plan_rejects_unknown_scheme_and_starvation():
    basis = chain_basis(2)
    with pytest.raises(ValueError, match="unknown scheme"):
        build_plan(basis, "fancy", 100)
    with pytest.raises(ValueError, match="one shot"):
        build_plan(basis, "direct", basis.m - 1)


def test_plan_validation_catches_bad_partitions():
    basis = chain_basis(2, kappa=1)
    singletons = tuple((k,) for k in range(basis.m))
    with pytest.raises(ValueError, match="two groups"):
        MeasurementPlan(basis, "direct", singletons + ((0,),), 10, 60)
    with pytest.raises(ValueError, match="cover"):
        MeasurementPlan(basis, "direct", singletons[:-1], 10, 60)
    # X and Z on site 0 anticommute
    bad = ((0, 2),) + tuple((k,) for k in range(basis.m) if k not in (0, 2))
    with pytest.raises(ValueError, match="do not commute"):
        MeasurementPlan(basis, "grouped", bad, 10, 60)


def test_exact_scheme_returns_dense_marginals():
    model = random_chain_model(3, seed=21)
    ens = gibbs_state(assemble_hamiltonian(model), 1.0)
    est = sample_outcomes(build_plan(model.basis, "exact", 0), ens)
    np.testing.assert_allclose(
        est.e_hat, marginals(basis_stack(model.basis), ens), atol=1e-12
    )
    assert np.all(est.delta == 0)
    assert est.n_total == 0


def test_sampling_is_seed_deterministic():
    model = random_chain_model(2, seed=3)
    ens = gibbs_state(assemble_hamiltonian(model), 0.8)
    plan = build_plan(model.basis, "grouped", 5000)
    a = sample_outcomes(plan, ens, seed=42)
    b = sample_outcomes(plan, ens, seed=42)
    c = sample_outcomes(plan, ens, seed=43)
    np.testing.assert_array_equal(a.e_hat, b.e_hat)
    assert np.any(a.e_hat != c.e_hat)


def test_estimates_concentrate_on_truth():
    model = random_chain_model(3, seed=17)
    ens = gibbs_state(assemble_hamiltonian(model), 1.0)
    truth = marginals(basis_stack(model.basis), ens)
    est = sample_outcomes(build_plan(model.basis, "grouped", 200_000), ens, seed=7)
    # Hoeffding radius on the +/-1 scale is 2*delta
    assert np.all(np.abs(est.e_hat - truth) <= 2 * est.delta)


def test_coverage_over_repeated_trials():
    # with delta_fail = 0.05 per trial, 40 independent trials should very
    # rarely produce even two joint violations (Hoeffding is conservative)
    model = random_chain_model(2, seed=29)
    ens = gibbs_state(assemble_hamiltonian(model), 1.0)
    truth = marginals(basis_stack(model.basis), ens)
    plan = build_plan(model.basis, "grouped", 2000)
    bad = 0
    for trial in range(40):
        est = sample_outcomes(plan, ens, seed=1000 + trial)
        if np.any(np.abs(est.e_hat - truth) > 2 * est.delta):
            bad += 1
    assert bad <= 2


def test_direct_and_grouped_agree_statistically():
    model = random_chain_model(2, seed=5)
    ens = gibbs_state(assemble_hamiltonian(model), 0.5)
    truth = marginals(basis_stack(model.basis), ens)
    for scheme in ("direct", "grouped"):
        est = sample_outcomes(build_plan(model.basis, scheme, 150_000), ens, seed=11)
        assert np.all(np.abs(est.e_hat - truth) <= 2 * est.delta)


def test_dimension_mismatch_rejected():
    plan = build_plan(chain_basis(2), "grouped", 1000)
    big = gibbs_state(assemble_hamiltonian(random_chain_model(3, seed=0)), 1.0)
    with pytest.raises(ValueError, match="dimension"):
        sample_outcomes(plan, big, seed=0)


def test_hoeffding_radius_values():
    np.testing.assert_array_equal(hoeffding_radius(5, 0.05, [0, 0]), [0.0, 0.0])
    r = hoeffding_radius(1, 0.05, [200])
    assert r[0] == pytest.approx(np.sqrt(np.log(2 / 0.05) / 400), rel=1e-14)
    # radius shrinks like 1/sqrt(shots)
    r4 = hoeffding_radius(1, 0.05, [800])
    assert r4[0] == pytest.approx(r[0] / 2, rel=1e-14)


def test_required_delta():
    assert required_delta(0.1, 1.0, 1.0, 25) == pytest.approx(0.01, abs=1e-15)
    with pytest.raises(ValueError, match="non-strongly-convex"):
        required_delta(0.1, 0.0, 1.0, 25)
    with pytest.raises(ValueError):
        required_delta(-0.1, 1.0, 1.0, 25)


def test_estimates_validation_and_serialization():
    with pytest.raises(ValueError, match="lie in"):
        MarginalEstimates(
            e_hat=np.array([1.5]),
            delta=np.zeros(1),
            shots=np.zeros(1, dtype=np.int64),
        )
    est = MarginalEstimates(
        e_hat=np.array([0.25, -1.0]),
        delta=np.array([0.1, 0.1]),
        shots=np.array([10, 10], dtype=np.int64),
        n_total=20,
        seed=3,
        scheme="direct",
    )
    assert est.m == 2
    assert est.manifest_dict() == {
        "seed": 3,
        "scheme": "direct",
        "N_total": 20,
        "delta_fail": 0.05,
    }
    rows = list(est.csv_rows())
    assert rows[0] == (0, 0.25, 0.1, 10)


def test_simultaneous_eigenbasis_degenerate_family():
    Z, X = pauli_matrix("Z"), pauli_matrix("X")
    mats = [np.kron(Z, np.eye(2)), np.kron(np.eye(2), Z)]
    V = simultaneous_eigenbasis(mats)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(4), atol=1e-12)
    for M in mats:
        A = V.conj().T @ M @ V
        assert np.max(np.abs(A - np.diag(np.diagonal(A)))) < 1e-10
    # non-diagonal commuting pair
    mats = [np.kron(X, X), np.kron(Z, Z)]
    V = simultaneous_eigenbasis(mats)
    for M in mats:
        A = V.conj().T @ M @ V
        assert np.max(np.abs(A - np.diag(np.diagonal(A)))) < 1e-10
