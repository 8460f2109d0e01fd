"""Declarative convex constraint sets for (A, B, D) and their Euclidean
projections, composed into the product projection used by the solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import CausalBandKernel, project_to_band
from .model import StateSpaceModel


class ProjectionError(RuntimeError):
    """An iterative projection failed to converge; carries the residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _check_mask(mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise ValueError(f"mask must be square, got shape {mask.shape}")
    if not np.array_equal(mask, mask.T):
        raise ValueError("mask must be symmetric")
    if not np.all(np.diagonal(mask)):
        raise ValueError("mask must include the diagonal")
    return mask


def project_symmetric_masked_nonneg(M: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Exact projection onto symmetric matrices supported on ``mask`` with
    nonnegative off-diagonal entries (the diagonal is unconstrained)."""
    mask = _check_mask(mask)
    M = np.asarray(M, dtype=float)
    if M.shape != mask.shape:
        raise ValueError(f"matrix shape {M.shape} does not match mask {mask.shape}")
    S = 0.5 * (M + M.T)
    out = np.where(mask, S, 0.0)
    eye = np.eye(M.shape[0], dtype=bool)
    return np.where(eye, out, np.maximum(out, 0.0))


def project_nonneg_diagonal(M: np.ndarray) -> np.ndarray:
    """Projection onto (rectangular) diagonal matrices with nonnegative
    diagonal entries."""
    M = np.asarray(M, dtype=float)
    out = np.zeros_like(M)
    d = min(M.shape)
    idx = np.arange(d)
    out[idx, idx] = np.maximum(M[idx, idx], 0.0)
    return out


def _project_affine(W: np.ndarray, mask: np.ndarray, counts: np.ndarray) -> np.ndarray:
    # support restriction plus zero column sums: demean in-mask entries per column
    W = np.where(mask, W, 0.0)
    return W - mask * (W.sum(axis=0) / counts)


def _project_cone(W: np.ndarray, mask: np.ndarray, eye: np.ndarray) -> np.ndarray:
    W = np.where(mask, W, 0.0)
    return np.where(eye, W, np.maximum(W, 0.0))


def nearest_graph_laplacian(M: np.ndarray, mask: np.ndarray,
                            tol: float = 1e-9, max_iter: int = 10000) -> np.ndarray:
    """Dykstra projection onto ``{L: support in mask, off-diag >= 0,
    column sums = 0}``.

    Alternates the exact projections onto the affine part (support and zero
    column sums) and the cone part (support and nonnegative off-diagonal),
    with Dykstra's correction terms, until successive iterates differ by at
    most ``tol`` in Frobenius norm.
    """
    mask = _check_mask(mask)
    M = np.asarray(M, dtype=float)
    counts = mask.sum(axis=0).astype(float)
    eye = np.eye(M.shape[0], dtype=bool)
    x = M
    p = np.zeros_like(M)
    r = np.zeros_like(M)
    prev = None
    for _ in range(max_iter):
        y = _project_affine(x + p, mask, counts)
        p = x + p - y
        x = _project_cone(y + r, mask, eye)
        r = y + r - x
        if prev is not None:
            res = float(np.linalg.norm(x - prev))
            if res <= tol:
                return x
        prev = x
    res = float(np.linalg.norm(x - prev)) if prev is not None else float("nan")
    raise ProjectionError(
        f"Dykstra projection did not converge in {max_iter} iterations "
        f"(last step {res:.3e} > tol {tol:.3e})",
        residual=res,
    )


def project_shifted_laplacian(M: np.ndarray, mask: np.ndarray,
                              shift: np.ndarray | None = None,
                              tol: float = 1e-9, max_iter: int = 10000,
                              column_sums: bool = True) -> np.ndarray:
    """Projection onto ``{A : A - shift is a graph Laplacian on mask}``.

    ``shift=None`` means the identity, which makes the set contain
    discretized diffusion operators ``I + L h`` and preserve the total-state
    sum under iteration.  ``column_sums=False`` constrains row sums instead.
    """
    M = np.asarray(M, dtype=float)
    if shift is None:
        shift = np.eye(M.shape[0])
    if not column_sums:
        return project_shifted_laplacian(
            M.T, mask, shift.T, tol=tol, max_iter=max_iter, column_sums=True
        ).T
    return shift + nearest_graph_laplacian(M - shift, mask, tol=tol, max_iter=max_iter)


@dataclass(frozen=True)
class FullSpace:
    """No constraint."""

    def project(self, M):
        return np.asarray(M, dtype=float)


@dataclass(frozen=True, eq=False)
class Fixed:
    """The singleton set ``{value}``; the value may be a band kernel or a
    dense matrix (for the D factor) or a plain matrix (for A or B)."""

    value: object

    def project(self, M):
        if isinstance(self.value, np.ndarray) and isinstance(M, np.ndarray):
            if M.shape != self.value.shape:
                raise ValueError(
                    f"fixed constraint of shape {self.value.shape} bound to "
                    f"input of shape {M.shape}"
                )
        return self.value


@dataclass(frozen=True, eq=False)
class SymmetricMaskedNonneg:
    """Symmetric, supported on the neighbor mask, nonnegative off-diagonal."""

    mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mask", _check_mask(self.mask))

    def project(self, M):
        return project_symmetric_masked_nonneg(M, self.mask)


@dataclass(frozen=True, eq=False)
class ShiftedGraphLaplacian:
    """``A`` such that ``A - shift`` is a graph Laplacian on the mask.

    ``shift`` is ``"identity"``, ``"zero"``, or an explicit matrix.
    """

    mask: np.ndarray
    shift: object = "identity"
    dykstra_tol: float = 1e-9
    dykstra_max_iter: int = 10000
    column_sums: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mask", _check_mask(self.mask))
        if isinstance(self.shift, str) and self.shift not in ("identity", "zero"):
            raise ValueError(f"shift must be 'identity', 'zero' or a matrix, got {self.shift!r}")

    def _shift_matrix(self, n: int):
        if isinstance(self.shift, str):
            return np.eye(n) if self.shift == "identity" else np.zeros((n, n))
        return np.asarray(self.shift, dtype=float)

    def project(self, M):
        M = np.asarray(M, dtype=float)
        return project_shifted_laplacian(
            M, self.mask, self._shift_matrix(M.shape[0]),
            tol=self.dykstra_tol, max_iter=self.dykstra_max_iter,
            column_sums=self.column_sums,
        )


@dataclass(frozen=True)
class NonnegativeDiagonal:
    """Diagonal matrices with nonnegative entries."""

    def project(self, M):
        return project_nonneg_diagonal(M)


@dataclass(frozen=True)
class CausalBand:
    """The normalized banded causal Toeplitz set ``T_m^q(Q)``."""

    q: int
    Q: int

    def project(self, D):
        if isinstance(D, CausalBandKernel):
            if (D.q, D.Q) == (self.q, self.Q):
                return D
            D = D.to_dense()
        return project_to_band(D, self.q, self.Q)


@dataclass(frozen=True, eq=False)
class ConstraintSpec:
    """Product set ``St(A) x St(B) x St(D)`` with one projection per factor."""

    on_A: object = field(default_factory=FullSpace)
    on_B: object = field(default_factory=FullSpace)
    on_D: object = field(default_factory=lambda: CausalBand(0, 1))

    def __post_init__(self):
        if not isinstance(self.on_D, (CausalBand, Fixed)):
            raise ValueError("the D factor must be a CausalBand or Fixed constraint")


def project_params(theta: StateSpaceModel, spec: ConstraintSpec) -> StateSpaceModel:
    """Apply the factor projections independently; each factor is idempotent."""
    return StateSpaceModel(
        spec.on_A.project(theta.A),
        spec.on_B.project(theta.B),
        spec.on_D.project(theta.kernel),
    )
