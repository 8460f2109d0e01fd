"""Banded causal Toeplitz memory kernels.

A memory kernel is an upper-triangular Toeplitz matrix whose first ``q``
columns are zero and whose main diagonal is one.  Only the ``Q - 1``
super-diagonal coefficients are free, so kernels are stored compactly and
expanded to a dense matrix only where an operation genuinely needs one.
All functions here are pure; values are immutable and safe to share across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg


def _row_start(q: int, d: int) -> int:
    """First row of super-diagonal ``d`` that lies inside the band support."""
    return max(0, q - d)


@dataclass(frozen=True)
class CausalBandKernel:
    """Normalized time-invariant causal matrix with bandwidth ``Q``.

    ``m`` is the matrix dimension, ``q`` the number of leading zero columns
    (the nullity), and ``coeffs`` holds the super-diagonal values
    ``c_1 .. c_{Q-1}``; the main-diagonal value ``c_0`` is implicitly one.
    """

    m: int
    q: int
    Q: int
    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        m, q, Q = self.m, self.q, self.Q
        if q < 0 or Q < 1 or q > Q or Q > m:
            raise ValueError(
                f"kernel shape must satisfy 0 <= q <= Q <= m with Q >= 1, "
                f"got m={m}, q={q}, Q={Q}"
            )
        if q >= m:
            raise ValueError(f"q={q} leaves no unit-diagonal column in an {m}x{m} kernel")
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) != Q - 1:
            raise ValueError(f"expected {Q - 1} coefficients, got {len(coeffs)}")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("kernel coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def identity(cls, m: int, q: int = 0, Q: int | None = None) -> "CausalBandKernel":
        """Kernel with all free coefficients zero (dense form is ``1_m^q``)."""
        if Q is None:
            Q = max(q, 1)
        return cls(m, q, Q, (0.0,) * (Q - 1))

    def offset_count(self, d: int) -> int:
        """Number of in-band entries on super-diagonal ``d``."""
        return self.m - d - _row_start(self.q, d)

    def to_dense(self) -> np.ndarray:
        """Dense ``m x m`` expansion of the kernel."""
        E = np.zeros((self.m, self.m))
        for d in range(self.Q):
            c = 1.0 if d == 0 else self.coeffs[d - 1]
            k0 = _row_start(self.q, d)
            rows = np.arange(k0, self.m - d)
            E[rows, rows + d] = c
        return E

    def left_pseudoinverse(self) -> np.ndarray:
        """Left pseudoinverse: zero first ``q`` rows/columns, inverse of the
        trailing unit upper-triangular block elsewhere."""
        m, q = self.m, self.q
        block = self.to_dense()[q:, q:]
        inv = scipy.linalg.solve_triangular(block, np.eye(m - q))
        out = np.zeros((m, m))
        out[q:, q:] = inv
        return out

    def to_dict(self) -> dict:
        return {"m": self.m, "q": self.q, "Q": self.Q, "coeffs": list(self.coeffs)}

    @classmethod
    def from_dict(cls, d: dict) -> "CausalBandKernel":
        return cls(int(d["m"]), int(d["q"]), int(d["Q"]), tuple(d["coeffs"]))


def partial_identity(m: int, q: int = 0) -> np.ndarray:
    """Identity with the first ``q`` rows and columns zeroed (``1_m^q``)."""
    out = np.zeros((m, m))
    idx = np.arange(q, m)
    out[idx, idx] = 1.0
    return out


def project_to_band(M: np.ndarray, q: int, Q: int) -> CausalBandKernel:
    """Euclidean projection of a dense matrix onto the normalized band set.

    Each free super-diagonal coefficient is the mean of the corresponding
    in-band entries of ``M``; the main diagonal is forced to one and
    everything else to zero.  Averaging over the in-band rows is the exact
    least-squares solution for this affine set.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    m = M.shape[0]
    coeffs = []
    for d in range(1, Q):
        vals = np.diagonal(M, offset=d)[_row_start(q, d):]
        if vals.size and np.all(vals == vals[0]):
            # an exactly constant diagonal must average to itself bit-for-bit
            coeffs.append(float(vals[0]))
        else:
            coeffs.append(float(vals.mean()))
    return CausalBandKernel(m, q, Q, tuple(coeffs))


def apply_kernel(Y: np.ndarray, kernel) -> np.ndarray:
    """Return ``Y @ D`` for a band kernel or a dense kernel matrix.

    The banded path works on shifted column slices in ``O(n m Q)`` and never
    materializes the dense kernel.
    """
    Y = np.asarray(Y, dtype=float)
    if isinstance(kernel, np.ndarray):
        return Y @ kernel
    m = kernel.m
    if Y.ndim != 2 or Y.shape[1] != m:
        raise ValueError(f"expected {Y.shape[0]}x{m} left factor, got shape {Y.shape}")
    out = np.zeros_like(Y)
    for d in range(kernel.Q):
        c = 1.0 if d == 0 else kernel.coeffs[d - 1]
        if d > 0 and c == 0.0:
            continue
        j0 = max(kernel.q, d)
        out[:, j0:] += c * Y[:, j0 - d : m - d]
    return out


def band_diagonal_sums(D, q: int, Q: int) -> np.ndarray:
    """Sums of a kernel (band or dense) over the in-band super-diagonals
    ``d = 1 .. Q-1`` of the target set ``T_m^q(Q)``."""
    if isinstance(D, np.ndarray):
        return np.array(
            [np.diagonal(D, offset=d)[_row_start(q, d):].sum() for d in range(1, Q)]
        )
    out = np.zeros(Q - 1)
    for d in range(1, Q):
        if d <= D.Q - 1:
            lo = max(_row_start(q, d), _row_start(D.q, d))
            out[d - 1] = D.coeffs[d - 1] * max(0, D.m - d - lo)
    return out


def kernel_distance_sq(a, b) -> float:
    """Squared Frobenius distance between two kernels (band or dense)."""
    if (
        isinstance(a, CausalBandKernel)
        and isinstance(b, CausalBandKernel)
        and (a.m, a.q, a.Q) == (b.m, b.q, b.Q)
    ):
        return float(
            sum(
                (ca - cb) ** 2 * a.offset_count(d + 1)
                for d, (ca, cb) in enumerate(zip(a.coeffs, b.coeffs))
            )
        )
    da = a if isinstance(a, np.ndarray) else a.to_dense()
    db = b if isinstance(b, np.ndarray) else b.to_dense()
    return float(np.sum((da - db) ** 2))


def fractional_toeplitz(alpha: float, m: int) -> np.ndarray:
    """Upper-triangular Toeplitz factor of the fractional-difference kernel.

    Super-diagonal ``k`` carries ``(-1)^k * binom(alpha, k)``.  These factors
    form an exact semigroup, ``T_a @ T_b == T_{a+b}``, in the nilpotent shift
    algebra.
    """
    if alpha < 0:
        raise ValueError(f"fractional order must be nonnegative, got {alpha}")
    if m < 1:
        raise ValueError(f"matrix dimension must be positive, got {m}")
    w = np.zeros(m)
    w[0] = 1.0
    for k in range(1, m):
        w[k] = w[k - 1] * (k - 1 - alpha) / k
    col = np.zeros(m)
    col[0] = w[0]
    return scipy.linalg.toeplitz(col, w)


def fractional_kernel(alpha: float, m: int) -> np.ndarray:
    """Dense fractional-difference kernel of order ``alpha``.

    The Toeplitz factor with its first ``ceil(alpha)`` columns zeroed; the
    zeroed column count matches the kernel dimension of the order-``alpha``
    derivative (``alpha = 0`` gives the identity).
    """
    T = fractional_toeplitz(alpha, m)
    n_zero = int(math.ceil(alpha))
    if n_zero > 0:
        T[:, :n_zero] = 0.0
    return T
