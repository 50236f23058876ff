"""Exact thermal states: spectral decomposition, weights, marginals, variances.

Everything downstream (gradients, Hessians, measurement simulation, the lab
checks) consumes the eigensystem computed here, so this module is the single
place where dense diagonalization happens.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .lattice import HamiltonianModel, LocalBasisOp, LatticeSpec, to_dense

__all__ = [
    "SpectralDecomposition",
    "GibbsEnsemble",
    "diagonalize",
    "gibbs",
    "gibbs_state",
    "density_matrix",
    "marginal",
    "marginals",
    "variance",
]

HERMITICITY_TOL = 1e-8
VARIANCE_CLAMP = 1e-10


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of H."""

    energies: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.energies.flags.writeable = False
        self.vectors.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.energies) @ self.vectors.conj().T


@dataclass(frozen=True, eq=False)
class GibbsEnsemble:
    """Normalized thermal weights r_j = exp(-beta*E_j - log_Z) over an eigensystem."""

    spectral: SpectralDecomposition
    beta: float
    log_z: float
    weights: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.weights.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.spectral.dim


def diagonalize(H: np.ndarray, tol: float = HERMITICITY_TOL) -> SpectralDecomposition:
    """Eigendecompose a Hermitian matrix; rejects non-Hermitian input."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    defect = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if defect > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: max|H - H^dag| = {defect:.3e} "
            f"exceeds {tol:.0e} * max|H|"
        )
    energies, vectors = np.linalg.eigh(H)
    return SpectralDecomposition(energies, vectors)


def gibbs(spectral: SpectralDecomposition, beta: float) -> GibbsEnsemble:
    """Thermal ensemble at inverse temperature beta >= 0.

    Weights come from logsumexp-shifted exponentials, so large beta*||H|| does
    not overflow.
    """
    beta = float(beta)
    if not np.isfinite(beta):
        raise ValueError(f"inverse temperature must be finite, got {beta}")
    if beta < 0:
        raise ValueError(f"negative inverse temperature: beta={beta}")
    exponents = -beta * spectral.energies
    log_z = float(logsumexp(exponents))
    weights = np.exp(exponents - log_z)
    return GibbsEnsemble(spectral, beta, log_z, weights)


def gibbs_state(H: np.ndarray, beta: float) -> GibbsEnsemble:
    """Convenience: diagonalize then build the ensemble."""
    return gibbs(diagonalize(H), beta)


def density_matrix(ensemble: GibbsEnsemble) -> np.ndarray:
    """Dense rho = sum_j r_j |j><j|."""
    V = ensemble.spectral.vectors
    return (V * ensemble.weights) @ V.conj().T


def _as_matrix(E, lattice: LatticeSpec | None) -> np.ndarray:
    if isinstance(E, LocalBasisOp):
        if lattice is None:
            raise ValueError("a LocalBasisOp needs the lattice to be densified")
        return to_dense(E, lattice)
    return np.asarray(E)


def marginal(E, ensemble: GibbsEnsemble, lattice: LatticeSpec | None = None) -> float:
    """Tr[E rho] as the weighted sum of eigenbasis diagonal elements."""
    mat = _as_matrix(E, lattice)
    V = ensemble.spectral.vectors
    if mat.shape != (ensemble.dim, ensemble.dim):
        raise ValueError(
            f"operator shape {mat.shape} does not match state dimension {ensemble.dim}"
        )
    diag = np.einsum("aj,ab,bj->j", V.conj(), mat, V)
    return float(np.real(np.dot(ensemble.weights, diag)))


def marginals(stack: np.ndarray, ensemble: GibbsEnsemble) -> np.ndarray:
    """Tr[E_l rho] for a whole (m, dim, dim) operator stack at once."""
    rho = density_matrix(ensemble)
    return np.einsum("lab,ba->l", stack, rho).real


def variance(O, ensemble: GibbsEnsemble, lattice: LatticeSpec | None = None) -> float:
    """Var_rho[O] = Tr[O^2 rho] - Tr[O rho]^2, clamped to 0 below 1e-10 noise."""
    mat = _as_matrix(O, lattice)
    V = ensemble.spectral.vectors
    A = V.conj().T @ mat @ V  # energy basis
    mean = float(np.real(np.dot(ensemble.weights, np.diagonal(A))))
    second = float(np.real(np.dot(ensemble.weights, np.einsum("jk,kj->j", A, A))))
    var = second - mean * mean
    if var < -VARIANCE_CLAMP:
        raise ValueError(f"variance {var:.3e} is negative beyond numerical noise")
    return max(var, 0.0)
