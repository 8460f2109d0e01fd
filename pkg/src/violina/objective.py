"""The multi-trajectory least-squares loss, its gradient and Hessian action,
smoothness diagnostics, and the uniqueness certificates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .kernel import CausalBandKernel, apply_kernel
from .model import StateSpaceModel, Trajectory, build_data_matrices

# reduced quadratic forms up to this size are assembled densely
_DENSE_EIG_LIMIT = 600


class Dataset:
    """A corpus of trajectories with the shared truncation parameters.

    Data matrices are built once per trajectory and cached; ``m`` may not
    exceed any trajectory length (the columns it references must exist).
    """

    def __init__(self, trajectories, q: int, m: int):
        trajectories = tuple(trajectories)
        if not trajectories:
            raise ValueError("a dataset needs at least one trajectory")
        n, k = trajectories[0].n, trajectories[0].k
        for i, traj in enumerate(trajectories):
            if (traj.n, traj.k) != (n, k):
                raise ValueError(
                    f"trajectory {i} has shape ({traj.n}, {traj.k}), expected ({n}, {k})"
                )
        self.trajectories = trajectories
        self.q = int(q)
        self.m = int(m)
        self.matrices = tuple(build_data_matrices(t, self.q, self.m) for t in trajectories)

    @property
    def n(self) -> int:
        return self.trajectories[0].n

    @property
    def k(self) -> int:
        return self.trajectories[0].k

    @property
    def size(self) -> int:
        return len(self.trajectories)

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "m": self.m,
            "trajectories": [t.to_dict() for t in self.trajectories],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        trajs = [Trajectory.from_dict(t) for t in d["trajectories"]]
        return cls(trajs, int(d["q"]), int(d["m"]))


@dataclass(frozen=True, eq=False)
class TangentTuple:
    """A direction ``(dA, dB, dD)`` in the ambient parameter space; ``dD`` is
    a dense ``m x m`` matrix."""

    dA: np.ndarray
    dB: np.ndarray
    dD: np.ndarray

    def inner(self, other: "TangentTuple") -> float:
        return float(
            np.sum(self.dA * other.dA)
            + np.sum(self.dB * other.dB)
            + np.sum(self.dD * other.dD)
        )

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self)))


@dataclass(frozen=True)
class UniquenessReport:
    positive_definite: bool
    smallest_eigenvalue: float
    rank_condition: bool


def _check_shapes(theta: StateSpaceModel, data: Dataset):
    if theta.n != data.n or theta.k != data.k:
        raise ValueError(
            f"parameter shapes ({theta.n}, {theta.k}) do not match data "
            f"({data.n}, {data.k})"
        )
    km = theta.kernel.m if isinstance(theta.kernel, CausalBandKernel) else theta.kernel.shape[0]
    if km != data.m:
        raise ValueError(f"kernel dimension {km} does not match data m={data.m}")


def residuals(theta: StateSpaceModel, data: Dataset) -> list[np.ndarray]:
    """Per-trajectory residuals ``E = Y D - (A X + B U)`` in dataset order."""
    _check_shapes(theta, data)
    out = []
    for mat in data.matrices:
        out.append(apply_kernel(mat.Y, theta.kernel) - theta.A @ mat.X - theta.B @ mat.U)
    return out


def loss(theta: StateSpaceModel, data: Dataset) -> float:
    """Sum of squared Frobenius norms of the residuals, in fixed order."""
    total = 0.0
    for E in residuals(theta, data):
        total += float(np.sum(E * E))
    return total


def gradient(theta: StateSpaceModel, data: Dataset) -> TangentTuple:
    """Ambient gradient ``sum_mu (-2 E X^T, -2 E U^T, 2 Y^T E)``.

    The ``dD`` block is the full dense matrix; projection onto the kernel's
    feasible set is the solver's job, not the gradient's.
    """
    gA = np.zeros((data.n, data.n))
    gB = np.zeros((data.n, data.k))
    gD = np.zeros((data.m, data.m))
    for mat, E in zip(data.matrices, residuals(theta, data)):
        gA -= 2.0 * E @ mat.X.T
        gB -= 2.0 * E @ mat.U.T
        gD += 2.0 * mat.Y.T @ E
    return TangentTuple(gA, gB, gD)


def hessian_apply(delta: TangentTuple, data: Dataset) -> TangentTuple:
    """Hessian action on a tangent direction; independent of the base point."""
    gA = np.zeros((data.n, data.n))
    gB = np.zeros((data.n, data.k))
    gD = np.zeros((data.m, data.m))
    for mat in data.matrices:
        e = mat.Y @ delta.dD - delta.dA @ mat.X - delta.dB @ mat.U
        gA -= 2.0 * e @ mat.X.T
        gB -= 2.0 * e @ mat.U.T
        gD += 2.0 * mat.Y.T @ e
    return TangentTuple(gA, gB, gD)


def lipschitz_constant(data: Dataset) -> float:
    """Smoothness constant ``2 max(rho_X, rho_U, rho_Y)``.

    Diagnostic only: the solver's backtracking never relies on it.
    """
    rhos = []
    for pick in (lambda mat: mat.X, lambda mat: mat.U, lambda mat: mat.Y):
        total = 0.0
        for mat in data.matrices:
            Z = pick(mat)
            total += (
                np.linalg.norm(mat.X @ Z.T) ** 2
                + np.linalg.norm(mat.U @ Z.T) ** 2
                + np.linalg.norm(mat.Y @ Z.T) ** 2
            )
        rhos.append(np.sqrt(total))
    return float(2.0 * max(rhos))


def fixed_d_hessian(data: Dataset) -> np.ndarray:
    """Hessian of the fixed-kernel problem: ``sum_mu [X; U] [X; U]^T``."""
    dim = data.n + data.k
    H = np.zeros((dim, dim))
    for mat in data.matrices:
        Z = np.vstack([mat.X, mat.U])
        H += Z @ Z.T
    return H


def perturbed(theta: StateSpaceModel, delta: TangentTuple, t: float = 1.0) -> StateSpaceModel:
    """The point ``theta + t * delta`` (kernel densified by the dD block)."""
    dense = theta.kernel if isinstance(theta.kernel, np.ndarray) else theta.kernel.to_dense()
    return StateSpaceModel(
        theta.A + t * delta.dA, theta.B + t * delta.dB, dense + t * delta.dD
    )


def band_sums(Y: np.ndarray, E: np.ndarray, q: int, Q: int) -> np.ndarray:
    """In-band super-diagonal sums of ``Y^T E`` for offsets ``1 .. Q-1``,
    computed from shifted column slices without forming the full product."""
    m = Y.shape[1]
    out = np.zeros(Q - 1)
    for d in range(1, Q):
        k0 = max(0, q - d)
        out[d - 1] = np.sum(Y[:, k0 : m - d] * E[:, k0 + d : m])
    return out


def _apply_band_direction(Y: np.ndarray, coeffs: np.ndarray, q: int, Q: int) -> np.ndarray:
    """``Y @ Delta_D`` for a band direction with zero diagonal and in-band
    super-diagonal values ``coeffs[d-1]``."""
    m = Y.shape[1]
    out = np.zeros_like(Y)
    for d in range(1, Q):
        c = coeffs[d - 1]
        if c == 0.0:
            continue
        j0 = max(q, d)
        out[:, j0:] += c * Y[:, j0 - d : m - d]
    return out


def _restricted_hessian_operator(data: Dataset, q: int, Q: int):
    """Matvec of the Hessian in an orthonormal basis of the feasible
    directions: all of ``A`` and ``B`` plus the ``Q - 1`` band directions."""
    n, k, m = data.n, data.k, data.m
    counts = np.array([m - d - max(0, q - d) for d in range(1, Q)], dtype=float)
    if np.any(counts <= 0):
        raise ValueError(f"degenerate band offsets for q={q}, Q={Q}, m={m}")
    scale = 1.0 / np.sqrt(counts) if Q > 1 else np.zeros(0)
    dim = n * n + n * k + (Q - 1)

    def matvec(v):
        v = np.asarray(v, dtype=float).ravel()
        dA = v[: n * n].reshape(n, n)
        dB = v[n * n : n * n + n * k].reshape(n, k)
        dcoef = v[n * n + n * k :] * scale
        gA = np.zeros((n, n))
        gB = np.zeros((n, k))
        dsum = np.zeros(Q - 1)
        for mat in data.matrices:
            e = _apply_band_direction(mat.Y, dcoef, q, Q) - dA @ mat.X - dB @ mat.U
            gA -= 2.0 * e @ mat.X.T
            gB -= 2.0 * e @ mat.U.T
            dsum += 2.0 * band_sums(mat.Y, e, q, Q)
        return np.concatenate([gA.ravel(), gB.ravel(), dsum * scale])

    return dim, matvec


def _stacked_rank(data: Dataset) -> int:
    Z = np.hstack([np.vstack([mat.X, mat.U]) for mat in data.matrices])
    return int(np.linalg.matrix_rank(Z))


def uniqueness_certificate(data: Dataset, mode: str = "fixed_d",
                           Q: int | None = None) -> UniquenessReport:
    """Certify uniqueness of the minimizer.

    ``fixed_d`` inspects the ``(n+k)``-dimensional Hessian of the
    fixed-kernel problem.  ``full`` restricts the full Hessian to the
    feasible band directions (bandwidth ``Q``, default ``q + 1``) and
    reports its smallest eigenvalue.  Either way ``rank_condition`` states
    whether the stacked ``[X; U]`` has full row rank ``n + k``.
    """
    rank_ok = _stacked_rank(data) == data.n + data.k
    if mode == "fixed_d":
        H = fixed_d_hessian(data)
        eigs = np.linalg.eigvalsh(H)
        smallest, largest = float(eigs[0]), float(eigs[-1])
    elif mode == "full":
        if Q is None:
            Q = data.q + 1
        dim, matvec = _restricted_hessian_operator(data, data.q, Q)
        if dim <= _DENSE_EIG_LIMIT:
            H = np.empty((dim, dim))
            eye = np.eye(dim)
            for j in range(dim):
                H[:, j] = matvec(eye[:, j])
            H = 0.5 * (H + H.T)
            eigs = np.linalg.eigvalsh(H)
            smallest, largest = float(eigs[0]), float(eigs[-1])
        else:
            op = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec)
            smallest = float(
                scipy.sparse.linalg.eigsh(op, k=1, which="SA", return_eigenvectors=False)[0]
            )
            largest = float(
                scipy.sparse.linalg.eigsh(op, k=1, which="LA", return_eigenvectors=False)[0]
            )
    else:
        raise ValueError(f"unknown mode {mode!r}, expected 'fixed_d' or 'full'")
    tol = 1e-10 * max(1.0, abs(largest))
    return UniquenessReport(
        positive_definite=smallest > tol,
        smallest_eigenvalue=smallest,
        rank_condition=rank_ok,
    )
