"""Lattices, the canonical local Pauli basis, and dense Hamiltonian assembly.

The basis enumerated here is the coordinate system for everything else in the
package: a Hamiltonian is a real coefficient vector over it, measured marginals
are indexed by it, and the solver optimizes over it.  Enumeration order is
deterministic, so an index is a stable identifier across processes and runs.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DENSE_CAP_ENV",
    "LatticeSpec",
    "LocalBasisOp",
    "OperatorBasis",
    "HamiltonianModel",
    "enumerate_basis",
    "to_dense",
    "assemble_hamiltonian",
    "basis_stack",
    "dense_cap",
    "pauli_matrix",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]

DENSE_CAP_ENV = "GIBBSLEARN_DENSE_CAP"
DEFAULT_DENSE_CAP = 14

PAULI_LETTERS = "XYZ"

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def dense_cap() -> int:
    """Site-count cap for dense 2^n matrices, overridable via GIBBSLEARN_DENSE_CAP."""
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{DENSE_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"{DENSE_CAP_ENV} must be >= 1, got {cap}")
    return cap


def _check_dense_cap(n: int, cap: int | None) -> None:
    limit = dense_cap() if cap is None else cap
    if n > limit:
        raise ValueError(
            f"dense dimension cap exceeded: n={n} sites needs a 2^{n} matrix, "
            f"cap is n<={limit} (set {DENSE_CAP_ENV} to raise it)"
        )


@dataclass(frozen=True)
class LatticeSpec:
    """A finite D-dimensional grid of qubits with Manhattan distance.

    Sites are indexed 0..n-1 in row-major (C) order over the coordinate grid.
    Open boundaries by default; `periodic=True` wraps every axis.
    """

    dimension: int
    side_lengths: tuple[int, ...]
    periodic: bool = False
    qudit_dim: int = 2  # carried for forward compatibility, fixed to 2 here

    def __post_init__(self) -> None:
        object.__setattr__(self, "side_lengths", tuple(int(s) for s in self.side_lengths))
        if self.dimension < 1:
            raise ValueError(f"lattice dimension must be >= 1, got {self.dimension}")
        if len(self.side_lengths) != self.dimension:
            raise ValueError(
                f"expected {self.dimension} side lengths, got {len(self.side_lengths)}"
            )
        if any(s < 1 for s in self.side_lengths):
            raise ValueError(f"side lengths must be positive, got {self.side_lengths}")
        if self.qudit_dim != 2:
            raise ValueError("only qubit lattices (qudit_dim=2) are supported")

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.side_lengths))

    def site_coords(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.n_sites:
            raise ValueError(f"site index {index} out of range for n={self.n_sites}")
        coords = []
        for size in reversed(self.side_lengths):
            coords.append(index % size)
            index //= size
        return tuple(reversed(coords))

    def site_index(self, coords: Sequence[int]) -> int:
        if len(coords) != self.dimension:
            raise ValueError(f"expected {self.dimension} coordinates, got {len(coords)}")
        index = 0
        for c, size in zip(coords, self.side_lengths):
            if not 0 <= c < size:
                raise ValueError(f"coordinate {c} out of range for side {size}")
            index = index * size + c
        return index

    def distance(self, i: int, j: int) -> int:
        """Manhattan distance between two sites, wrapping axes when periodic."""
        ci, cj = self.site_coords(i), self.site_coords(j)
        total = 0
        for a, b, size in zip(ci, cj, self.side_lengths):
            d = abs(a - b)
            if self.periodic:
                d = min(d, size - d)
            total += d
        return total

    def ball(self, radius: int, center: int) -> tuple[int, ...]:
        """All sites at Manhattan distance <= radius from `center`, ascending."""
        if radius < 0:
            raise ValueError(f"radius must be >= 0, got {radius}")
        return tuple(
            j for j in range(self.n_sites) if self.distance(center, j) <= radius
        )


@dataclass(frozen=True)
class LocalBasisOp:
    """One Pauli-string basis element: a non-identity letter on each support site.

    Dense form is a tensor product of single-site Paulis (identity off-support),
    hence Hermitian, traceless, unit operator norm, and squared trace 2^n.
    """

    support: tuple[int, ...]
    letters: str
    index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(int(s) for s in self.support))
        if len(self.support) == 0:
            raise ValueError("support must be nonempty (identity is not a basis element)")
        if list(self.support) != sorted(set(self.support)):
            raise ValueError(f"support must be strictly increasing, got {self.support}")
        if len(self.letters) != len(self.support):
            raise ValueError("need exactly one letter per support site")
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"letters must be drawn from {PAULI_LETTERS}, got {bad}")

    @property
    def weight(self) -> int:
        return len(self.support)

    def letter_at(self, site: int) -> str:
        """Letter acting on `site`, 'I' off the support."""
        try:
            return self.letters[self.support.index(site)]
        except ValueError:
            return "I"


@dataclass(frozen=True)
class OperatorBasis:
    """An enumerated local operator basis over a lattice.

    `ops` is the canonical order: supports ascending as tuples, then letter
    strings in X<Y<Z product order.  m == len(ops).
    """

    lattice: LatticeSpec
    kappa: int
    ops: tuple[LocalBasisOp, ...]

    def __post_init__(self) -> None:
        for pos, op in enumerate(self.ops):
            if op.index != pos:
                raise ValueError(
                    f"op at position {pos} carries index {op.index}; "
                    "indices must match enumeration order"
                )

    @property
    def m(self) -> int:
        return len(self.ops)

    def ops_touching(self, site: int) -> tuple[int, ...]:
        return tuple(op.index for op in self.ops if site in op.support)


@dataclass(frozen=True, eq=False)
class HamiltonianModel:
    """Coefficient vector over an operator basis; H(mu) = sum_l mu_l E_l.

    Coefficients are capped at unit magnitude on construction, matching the
    normalization under which all downstream error bounds are stated.
    """

    basis: OperatorBasis
    mu: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        mu = np.array(self.mu, dtype=float)
        if mu.ndim != 1 or mu.shape[0] != self.basis.m:
            raise ValueError(
                f"mu has length {mu.shape if mu.ndim != 1 else mu.shape[0]}, "
                f"basis has m={self.basis.m}"
            )
        if mu.size and np.max(np.abs(mu)) > 1.0 + 1e-12:
            raise ValueError(
                f"max|mu| = {np.max(np.abs(mu)):.6g} exceeds 1; "
                "coefficients must lie in [-1, 1]"
            )
        mu.flags.writeable = False
        object.__setattr__(self, "mu", mu)

    @property
    def n_sites(self) -> int:
        return self.basis.lattice.n_sites


def _support_ok(lattice: LatticeSpec, support: tuple[int, ...], kappa: int) -> bool:
    # <= kappa sites, all pairwise within distance kappa-1 (kappa sites "across")
    if len(support) > kappa:
        return False
    return all(
        lattice.distance(i, j) <= kappa - 1 for i, j in itertools.combinations(support, 2)
    )


def enumerate_basis(lattice: LatticeSpec, kappa: int) -> OperatorBasis:
    """Enumerate every local Pauli string once, in canonical order.

    A support is admissible when it has at most `kappa` sites and diameter at
    most kappa-1; this reproduces the counts 6 (n=2, kappa=1), 15 (n=2,
    kappa=2), 27 (3-chain, kappa=2).
    """
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    n = lattice.n_sites
    if kappa > n:
        raise ValueError(
            f"locality exceeds system size: kappa={kappa} > n={n}"
        )

    supports: list[tuple[int, ...]] = []
    for anchor in range(n):
        # Anchor at the minimum site index; the rest of the support sits in its
        # (kappa-1)-ball, so we never scan all 2^n subsets.
        nearby = [j for j in lattice.ball(kappa - 1, anchor) if j > anchor]
        for size in range(0, kappa):
            for rest in itertools.combinations(nearby, size):
                support = (anchor, *rest)
                if _support_ok(lattice, support, kappa):
                    supports.append(support)
    supports.sort()

    ops: list[LocalBasisOp] = []
    for support in supports:
        for letters in itertools.product(PAULI_LETTERS, repeat=len(support)):
            ops.append(LocalBasisOp(support, "".join(letters), len(ops)))
    return OperatorBasis(lattice, kappa, tuple(ops))


def pauli_matrix(letters_by_site: Iterable[str]) -> np.ndarray:
    """Dense tensor product of the given single-site letters (I/X/Y/Z)."""
    out = np.array([[1.0 + 0.0j]])
    for letter in letters_by_site:
        out = np.kron(out, _PAULI[letter])
    return out


def to_dense(
    op: LocalBasisOp, lattice: LatticeSpec, cap: int | None = None
) -> np.ndarray:
    """Dense 2^n x 2^n matrix for one basis element."""
    n = lattice.n_sites
    if any(s >= n for s in op.support):
        raise ValueError(f"support {op.support} does not fit a lattice with n={n}")
    _check_dense_cap(n, cap)
    return pauli_matrix(op.letter_at(site) for site in range(n))


@lru_cache(maxsize=8)
def basis_stack(basis: OperatorBasis, cap: int | None = None) -> np.ndarray:
    """All basis elements as one (m, 2^n, 2^n) read-only array.

    Cached: the stack is rebuilt at most once per basis, and every hot loop
    (solver iterations, Hessian assembly, sampling) reads from it.
    """
    n = basis.lattice.n_sites
    _check_dense_cap(n, cap)
    stack = np.empty((basis.m, 2**n, 2**n), dtype=complex)
    for op in basis.ops:
        stack[op.index] = to_dense(op, basis.lattice, cap)
    stack.flags.writeable = False
    return stack


def assemble_hamiltonian(model: HamiltonianModel, cap: int | None = None) -> np.ndarray:
    """Dense H(mu) = sum_l mu_l E_l."""
    stack = basis_stack(model.basis, cap)
    return np.tensordot(model.mu, stack, axes=1)


# ---------------------------------------------------------------------------
# JSON round trip: {lattice: {dims, sides, periodic}, kappa, mu: [float]}
# ---------------------------------------------------------------------------

def model_to_dict(model: HamiltonianModel) -> dict:
    lat = model.basis.lattice
    return {
        "lattice": {
            "dims": lat.dimension,
            "sides": list(lat.side_lengths),
            "periodic": lat.periodic,
        },
        "kappa": model.basis.kappa,
        "mu": [float(x) for x in model.mu],
    }


def model_from_dict(payload: dict) -> HamiltonianModel:
    try:
        lat_raw = payload["lattice"]
        lattice = LatticeSpec(
            dimension=int(lat_raw["dims"]),
            side_lengths=tuple(int(s) for s in lat_raw["sides"]),
            periodic=bool(lat_raw.get("periodic", False)),
        )
        kappa = int(payload["kappa"])
        mu = payload["mu"]
    except KeyError as exc:
        raise ValueError(f"model payload missing field: {exc.args[0]}") from exc
    basis = enumerate_basis(lattice, kappa)
    return HamiltonianModel(basis, np.asarray(mu, dtype=float))


def save_model(model: HamiltonianModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> HamiltonianModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
