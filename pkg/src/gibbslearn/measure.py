"""Simulated measurement of local marginals from copies of a Gibbs state.

A plan partitions the basis into commuting groups; each shot consumes one copy
of the state and yields a joint outcome for every operator in one group.  At
desk scale the joint distribution is computed exactly (simultaneous
diagonalization), so the simulator is a faithful sampler of the ideal
projective measurement, not a circuit-level emulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gibbs import GibbsEnsemble, marginals
from .lattice import LocalBasisOp, OperatorBasis, basis_stack

__all__ = [
    "MeasurementPlan",
    "MarginalEstimates",
    "SCHEMES",
    "pauli_commute",
    "build_plan",
    "sample_outcomes",
    "required_delta",
]

SCHEMES = ("direct", "grouped", "exact")
DEFAULT_DELTA_FAIL = 0.05


def pauli_commute(a: LocalBasisOp, b: LocalBasisOp) -> bool:
    """Whether two Pauli strings commute as matrices.

    They anticommute on each shared site carrying different letters; the
    strings commute overall iff the number of such sites is even.
    """
    clashes = 0
    common = set(a.support) & set(b.support)
    for site in common:
        if a.letter_at(site) != b.letter_at(site):
            clashes += 1
    return clashes % 2 == 0


@dataclass(frozen=True)
class MeasurementPlan:
    """Partition of basis indices into mutually commuting groups plus shot counts."""

    basis: OperatorBasis
    scheme: str
    groups: tuple[tuple[int, ...], ...]
    shots_per_group: int
    n_total: int

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.scheme == "exact":
            # no sampling happens, so there is no partition to validate
            if self.groups or self.shots_per_group or self.n_total:
                raise ValueError("an exact plan must be empty")
            return
        seen: set[int] = set()
        for group in self.groups:
            for idx in group:
                if idx in seen:
                    raise ValueError(f"operator index {idx} appears in two groups")
                seen.add(idx)
        if seen != set(range(self.basis.m)):
            raise ValueError("groups must cover every basis index exactly once")
        ops = self.basis.ops
        for group in self.groups:
            for pos, k in enumerate(group):
                for l in group[pos + 1 :]:
                    if not pauli_commute(ops[k], ops[l]):
                        raise ValueError(
                            f"operators {k} and {l} do not commute but share a group"
                        )

    @property
    def copies_consumed(self) -> int:
        return self.shots_per_group * len(self.groups)


def _greedy_groups(basis: OperatorBasis) -> tuple[tuple[int, ...], ...]:
    """Color the conflict graph (edges = non-commuting pairs) greedily.

    Vertices are processed by descending degree, ties broken by index; each
    takes the smallest color absent from its already-colored neighbors.
    """
    m = basis.m
    ops = basis.ops
    adjacency: list[set[int]] = [set() for _ in range(m)]
    for k in range(m):
        for l in range(k + 1, m):
            if not pauli_commute(ops[k], ops[l]):
                adjacency[k].add(l)
                adjacency[l].add(k)
    order = sorted(range(m), key=lambda k: (-len(adjacency[k]), k))
    color: dict[int, int] = {}
    for k in order:
        taken = {color[nb] for nb in adjacency[k] if nb in color}
        c = 0
        while c in taken:
            c += 1
        color[k] = c
    n_colors = max(color.values()) + 1 if color else 0
    groups = [[] for _ in range(n_colors)]
    for k in range(m):
        groups[color[k]].append(k)
    return tuple(tuple(g) for g in groups)


def build_plan(basis: OperatorBasis, scheme: str, n_copies: int) -> MeasurementPlan:
    """Allocate `n_copies` measurement copies under the given scheme.

    direct: one group per operator; grouped: greedy-colored commuting groups;
    exact: no copies consumed at all.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if scheme == "exact":
        return MeasurementPlan(basis, "exact", (), 0, 0)
    if scheme == "direct":
        groups = tuple((k,) for k in range(basis.m))
    else:
        groups = _greedy_groups(basis)
    shots = n_copies // len(groups)
    if shots < 1:
        raise ValueError(
            f"{n_copies} copies cannot give each of {len(groups)} groups one shot"
        )
    return MeasurementPlan(basis, scheme, groups, shots, n_copies)


@dataclass(frozen=True, eq=False)
class MarginalEstimates:
    """Estimated marginals with per-entry confidence radii and copy accounting.

    `delta` is the Hoeffding radius at joint failure probability `delta_fail`
    on the frequency scale (outcomes mapped to {0,1}); the induced radius on
    the +/-1-scale estimate `e_hat` is 2*delta.  The exact scheme reports
    delta identically 0.
    """

    e_hat: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    shots: np.ndarray = field(repr=False)
    n_total: int = 0
    seed: int | None = None
    scheme: str = "exact"
    delta_fail: float = DEFAULT_DELTA_FAIL

    def __post_init__(self) -> None:
        for arr in (self.e_hat, self.delta, self.shots):
            arr.flags.writeable = False
        if np.any(np.abs(self.e_hat) > 1.0 + 1e-12):
            raise ValueError("estimated marginals must lie in [-1, 1]")

    @property
    def m(self) -> int:
        return self.e_hat.shape[0]

    def manifest_dict(self) -> dict:
        return {
            "seed": self.seed,
            "scheme": self.scheme,
            "N_total": int(self.n_total),
            "delta_fail": float(self.delta_fail),
        }

    def csv_rows(self):
        for l in range(self.m):
            yield (l, self.e_hat[l], self.delta[l], int(self.shots[l]))


def hoeffding_radius(m: int, delta_fail: float, shots) -> np.ndarray:
    shots = np.asarray(shots, dtype=float)
    out = np.zeros_like(shots)
    nonzero = shots > 0
    out[nonzero] = np.sqrt(np.log(2 * m / delta_fail) / (2.0 * shots[nonzero]))
    return out


def simultaneous_eigenbasis(mats: list[np.ndarray], tol: float = 1e-9) -> np.ndarray:
    """Common eigenbasis of a pairwise-commuting Hermitian family.

    Diagonalizes the first matrix, then refines each degenerate block with the
    next matrix, and so on.  Exact commutation guarantees every matrix is
    block-diagonal in the running basis, so refinement never breaks earlier
    diagonalizations.
    """
    if not mats:
        raise ValueError("need at least one matrix")
    dim = mats[0].shape[0]
    V = np.eye(dim, dtype=complex)
    blocks = [np.arange(dim)]
    for M in mats:
        new_blocks = []
        for idx in blocks:
            if idx.size == 1:
                new_blocks.append(idx)
                continue
            B = V[:, idx]
            sub = B.conj().T @ M @ B
            vals, U = np.linalg.eigh(sub)
            V[:, idx] = B @ U
            # split the block wherever consecutive eigenvalues separate
            cuts = np.flatnonzero(np.diff(vals) > tol) + 1
            new_blocks.extend(np.split(idx, cuts))
        blocks = new_blocks
    return V


def sample_outcomes(
    plan: MeasurementPlan,
    ensemble: GibbsEnsemble,
    seed: int | None = None,
    delta_fail: float = DEFAULT_DELTA_FAIL,
) -> MarginalEstimates:
    """Draw the planned shots and return empirical marginals.

    Sampling is deterministic given `seed`: each group gets its own substream
    spawned from the master seed, so group order and parallelism cannot change
    the result.
    """
    basis = plan.basis
    m = basis.m
    stack = basis_stack(basis)
    if stack.shape[1] != ensemble.dim:
        raise ValueError(
            f"plan dimension {stack.shape[1]} does not match state dimension {ensemble.dim}"
        )

    if plan.scheme == "exact":
        e_hat = np.clip(marginals(stack, ensemble), -1.0, 1.0)
        return MarginalEstimates(
            e_hat=e_hat,
            delta=np.zeros(m),
            shots=np.zeros(m, dtype=np.int64),
            n_total=0,
            seed=seed,
            scheme="exact",
            delta_fail=delta_fail,
        )

    master = np.random.SeedSequence(seed)
    substreams = master.spawn(len(plan.groups))

    V_rho = ensemble.spectral.vectors
    e_hat = np.zeros(m)
    shots = np.zeros(m, dtype=np.int64)
    for group, stream in zip(plan.groups, substreams):
        mats = [stack[k] for k in group]
        V = simultaneous_eigenbasis(mats)
        # +/-1 eigenvalue of each operator on each joint eigenvector
        values = np.empty((len(group), ensemble.dim))
        for row, M in enumerate(mats):
            A = V.conj().T @ M @ V
            diag = np.diagonal(A).real
            rounded = np.round(diag)
            off = float(np.max(np.abs(A - np.diag(np.diagonal(A)))))
            if (
                off > 1e-8
                or np.max(np.abs(diag - rounded)) > 1e-8
                or not np.all(np.isin(rounded, (-1.0, 1.0)))
            ):
                raise ValueError("joint eigenbasis failed to diagonalize a group member")
            values[row] = rounded
        # outcome distribution: p_w = <w| rho |w>
        overlap = V.conj().T @ V_rho
        probs = (np.abs(overlap) ** 2) @ ensemble.weights
        probs = np.clip(probs, 0.0, None)
        probs /= probs.sum()
        rng = np.random.default_rng(stream)
        counts = rng.multinomial(plan.shots_per_group, probs)
        means = values @ counts / plan.shots_per_group
        for row, k in enumerate(group):
            e_hat[k] = means[row]
            shots[k] = plan.shots_per_group

    return MarginalEstimates(
        e_hat=np.clip(e_hat, -1.0, 1.0),
        delta=hoeffding_radius(m, delta_fail, shots),
        shots=shots,
        n_total=plan.copies_consumed,
        seed=seed,
        scheme=plan.scheme,
        delta_fail=delta_fail,
    )


def required_delta(epsilon: float, alpha: float, beta: float, m: int) -> float:
    """Marginal accuracy sufficient for parameter error epsilon: alpha*eps/(2*beta*sqrt(m))."""
    if alpha <= 0:
        raise ValueError(
            f"non-strongly-convex regime: alpha={alpha} must be positive"
        )
    if epsilon <= 0 or beta <= 0 or m < 1:
        raise ValueError("epsilon, beta must be positive and m >= 1")
    return alpha * epsilon / (2.0 * beta * np.sqrt(m))
