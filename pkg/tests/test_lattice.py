import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbslearn.lattice import (
    DEFAULT_DENSE_CAP,
    DENSE_CAP_ENV,
    HamiltonianModel,
    LatticeSpec,
    LocalBasisOp,
    OperatorBasis,
    assemble_hamiltonian,
    basis_stack,
    dense_cap,
    enumerate_basis,
    model_from_dict,
    model_to_dict,
    pauli_matrix,
    save_model,
    to_dense,
)
from gibbslearn.lattice import load_model

from conftest import chain_basis


def test_basis_counts_small_chains():
    # frozen operator counts for the reference geometries
    assert chain_basis(2, kappa=1).m == 6
    assert chain_basis(2, kappa=2).m == 15
    assert chain_basis(3, kappa=2).m == 27
    assert chain_basis(4, kappa=2).m == 39


def test_basis_count_square_grid():
    lattice = LatticeSpec(dimension=2, side_lengths=(2, 2))
    basis = enumerate_basis(lattice, 2)
    # 4 single-site supports (3 letters each) plus 4 nearest-neighbour
    # edges (9 letter pairs each)
    assert basis.m == 4 * 3 + 4 * 9


def test_enumeration_is_deterministic():
    a = chain_basis(4)
    b = chain_basis(4)
    assert [(op.support, op.letters) for op in a.ops] == [
        (op.support, op.letters) for op in b.ops
    ]


def test_supports_sorted_and_within_range():
    basis = chain_basis(4)
    for op in basis.ops:
        assert list(op.support) == sorted(op.support)
        assert len(op.letters) == len(op.support)
        for a in op.support:
            for b in op.support:
                assert basis.lattice.distance(a, b) <= basis.kappa - 1


def test_basis_rejects_misnumbered_ops():
    basis = chain_basis(2, kappa=1)
    shuffled = [
        LocalBasisOp(support=op.support, letters=op.letters, index=op.index + 1)
        for op in basis.ops
    ]
    with pytest.raises(ValueError):
        OperatorBasis(lattice=basis.lattice, kappa=1, ops=tuple(shuffled))


def test_local_op_validation():
    with pytest.raises(ValueError):
        LocalBasisOp(support=(1, 0), letters="XZ", index=0)
    with pytest.raises(ValueError):
        LocalBasisOp(support=(0,), letters="Q", index=0)
    with pytest.raises(ValueError):
        LocalBasisOp(support=(0, 1), letters="X", index=0)


def test_enumerate_basis_kappa_bounds():
    lattice = LatticeSpec(dimension=1, side_lengths=(3,))
    with pytest.raises(ValueError):
        enumerate_basis(lattice, 0)
    with pytest.raises(ValueError):
        enumerate_basis(lattice, 4)


@given(st.integers(2, 9), st.integers(0, 80), st.integers(0, 80))
def test_chain_distance_symmetry(n, a, b) -> None:
    lattice = LatticeSpec(dimension=1, side_lengths=(n,))
    i, j = a % n, b % n
    assert lattice.distance(i, j) == lattice.distance(j, i)
    assert lattice.distance(i, i) == 0


@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 200))
def test_grid_coords_round_trip(rows, cols, raw) -> None:
    lattice = LatticeSpec(dimension=2, side_lengths=(rows, cols))
    site = raw % (rows * cols)
    assert lattice.site_index(lattice.site_coords(site)) == site


def test_periodic_wrap_distance():
    ring = LatticeSpec(dimension=1, side_lengths=(5,), periodic=True)
    assert ring.distance(0, 4) == 1
    assert ring.distance(0, 2) == 2
    open_chain = LatticeSpec(dimension=1, side_lengths=(5,))
    assert open_chain.distance(0, 4) == 4


def test_ball_matches_distance_and_is_sorted():
    lattice = LatticeSpec(dimension=2, side_lengths=(3, 3))
    for center in range(9):
        for radius in range(4):
            ball = lattice.ball(radius, center)
            assert list(ball) == sorted(ball)
            expected = [
                s for s in range(9) if lattice.distance(center, s) <= radius
            ]
            assert list(ball) == expected


def test_to_dense_single_site():
    basis = chain_basis(2)
    op = next(o for o in basis.ops if o.support == (0,) and o.letters == "X")
    dense = to_dense(op, basis.lattice)
    np.testing.assert_allclose(dense, np.kron(pauli_matrix("X"), np.eye(2)))


def test_to_dense_two_site_product():
    basis = chain_basis(2)
    op = next(o for o in basis.ops if o.support == (0, 1) and o.letters == "ZY")
    expected = np.kron(pauli_matrix("Z"), pauli_matrix("Y"))
    np.testing.assert_allclose(to_dense(op, basis.lattice), expected)


def test_stack_rows_hermitian_traceless_unit_norm():
    basis = chain_basis(3)
    stack = basis_stack(basis)
    dim = 2**3
    assert stack.shape == (basis.m, dim, dim)
    assert not stack.flags.writeable
    for E in stack:
        np.testing.assert_allclose(E, E.conj().T)
        assert abs(np.trace(E)) < 1e-12
        # pauli strings square to the identity
        np.testing.assert_allclose(E @ E, np.eye(dim), atol=1e-12)


def test_stack_is_cached():
    basis = chain_basis(3)
    assert basis_stack(basis) is basis_stack(basis)


def test_assemble_matches_manual_sum():
    basis = chain_basis(2)
    rng = np.random.default_rng(3)
    mu = rng.uniform(-1, 1, basis.m)
    H = assemble_hamiltonian(HamiltonianModel(basis=basis, mu=mu))
    manual = sum(
        float(c) * to_dense(op, basis.lattice) for c, op in zip(mu, basis.ops)
    )
    np.testing.assert_allclose(H, manual, atol=1e-14)


def test_model_rejects_bad_mu():
    basis = chain_basis(2, kappa=1)
    with pytest.raises(ValueError):
        HamiltonianModel(basis=basis, mu=np.zeros(basis.m + 1))
    too_big = np.zeros(basis.m)
    too_big[0] = 1.5
    with pytest.raises(ValueError):
        HamiltonianModel(basis=basis, mu=too_big)


def test_model_mu_is_read_only():
    basis = chain_basis(2, kappa=1)
    model = HamiltonianModel(basis=basis, mu=np.zeros(basis.m))
    with pytest.raises(ValueError):
        model.mu[0] = 1.0


def test_model_json_round_trip(tmp_path):
    model = HamiltonianModel(
        basis=chain_basis(3),
        mu=np.random.default_rng(7).uniform(-1, 1, 27),
    )
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.basis.m == model.basis.m
    np.testing.assert_allclose(loaded.mu, model.mu)
    # canonical text: LF endings, trailing newline
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")


def test_model_from_dict_missing_field():
    payload = model_to_dict(
        HamiltonianModel(basis=chain_basis(2), mu=np.zeros(15))
    )
    payload.pop("kappa")
    with pytest.raises(ValueError, match="missing field"):
        model_from_dict(payload)


def test_model_dict_is_json_serializable():
    model = HamiltonianModel(basis=chain_basis(2), mu=np.zeros(15))
    text = json.dumps(model_to_dict(model))
    assert "lattice" in text


def test_dense_cap_env_override(monkeypatch):
    monkeypatch.delenv(DENSE_CAP_ENV, raising=False)
    assert dense_cap() == DEFAULT_DENSE_CAP
    monkeypatch.setenv(DENSE_CAP_ENV, "6")
    assert dense_cap() == 6
