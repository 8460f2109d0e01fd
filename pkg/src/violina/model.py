"""Non-Markovian state-space models: ARX simulation, optimization data
matrices, and the companion / pseudoinverse-offset transformations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .kernel import CausalBandKernel


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One observed pair of time series: states ``x_0 .. x_m`` (columns of an
    ``n x (m+1)`` array) and inputs ``u_0 .. u_{m-1}`` (columns of ``k x m``)."""

    states: np.ndarray
    inputs: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        inputs = np.asarray(self.inputs, dtype=float)
        if states.ndim != 2 or inputs.ndim != 2:
            raise ValueError("states and inputs must be 2-D arrays")
        if states.shape[1] != inputs.shape[1] + 1:
            raise ValueError(
                f"states must hold one more column than inputs, got "
                f"{states.shape[1]} states and {inputs.shape[1]} inputs"
            )
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def k(self) -> int:
        return self.inputs.shape[0]

    @property
    def length(self) -> int:
        """Number of transitions (the trajectory holds ``length + 1`` states)."""
        return self.inputs.shape[1]

    def to_dict(self) -> dict:
        return {"states": self.states.T.tolist(), "inputs": self.inputs.T.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Trajectory":
        return cls(np.asarray(d["states"], dtype=float).T,
                   np.asarray(d["inputs"], dtype=float).T)


@dataclass(frozen=True, eq=False)
class DataMatrices:
    """The ``X``, ``Y``, ``U`` matrices of the least-squares problem; the
    first ``q`` columns of each are exactly zero."""

    X: np.ndarray
    Y: np.ndarray
    U: np.ndarray


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Parameter triple of the dynamics ``Y D = A X + B U``.

    ``kernel`` is normally a :class:`CausalBandKernel`; a dense square matrix
    is accepted for evaluation-only use (e.g. fixed fractional kernels), but
    such models cannot be simulated through the ARX recursion.
    """

    A: np.ndarray
    B: np.ndarray
    kernel: CausalBandKernel | np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.ndim != 2 or B.shape[0] != A.shape[0]:
            raise ValueError(f"B must have {A.shape[0]} rows, got shape {B.shape}")
        kernel = self.kernel
        if isinstance(kernel, CausalBandKernel):
            pass
        else:
            kernel = np.asarray(kernel, dtype=float)
            if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
                raise ValueError(f"dense kernel must be square, got shape {kernel.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "kernel", kernel)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.B.shape[1]

    def simulate(self, initial_states: np.ndarray, inputs: np.ndarray) -> Trajectory:
        """Run the ARX recursion from ``q + 1`` initial states.

        For ``t`` from ``q + 1`` to ``m``::

            x_t = A x_{t-1} - sum_j c_j x_{t-j} + B u_{t-1}   (j = 1 .. Q-1)

        with states at negative times treated as zero.  ``initial_states``
        must be ``n x (q+1)`` and ``inputs`` ``k x m`` with ``m >= q + 1``.
        """
        if not isinstance(self.kernel, CausalBandKernel):
            raise TypeError("simulation needs a band kernel; this model holds a dense one")
        q = self.kernel.q
        coeffs = self.kernel.coeffs
        initial = np.asarray(initial_states, dtype=float)
        inputs = np.asarray(inputs, dtype=float)
        if initial.ndim == 1:
            initial = initial[:, None]
        if initial.shape != (self.n, q + 1):
            raise ValueError(
                f"expected {self.n}x{q + 1} initial states, got shape {initial.shape}"
            )
        if inputs.ndim != 2 or inputs.shape[0] != self.k:
            raise ValueError(f"expected {self.k}-row inputs, got shape {inputs.shape}")
        m = inputs.shape[1]
        if m < q + 1:
            raise ValueError(f"need at least q+1={q + 1} inputs, got {m}")
        x = np.zeros((self.n, m + 1))
        x[:, : q + 1] = initial
        for t in range(q + 1, m + 1):
            acc = self.A @ x[:, t - 1] + self.B @ inputs[:, t - 1]
            for j, c in enumerate(coeffs, start=1):
                if c != 0.0 and t - j >= 0:
                    acc -= c * x[:, t - j]
            x[:, t] = acc
        return Trajectory(x, inputs)

    def to_dict(self) -> dict:
        d = {"n": self.n, "k": self.k, "A": self.A.tolist(), "B": self.B.tolist()}
        if isinstance(self.kernel, CausalBandKernel):
            d["kernel"] = self.kernel.to_dict()
        else:
            d["kernel_dense"] = self.kernel.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpaceModel":
        if "kernel" in d:
            kernel = CausalBandKernel.from_dict(d["kernel"])
        else:
            kernel = np.asarray(d["kernel_dense"], dtype=float)
        return cls(np.asarray(d["A"], dtype=float), np.asarray(d["B"], dtype=float), kernel)


def build_data_matrices(traj: Trajectory, q: int, m: int) -> DataMatrices:
    """Assemble the zero-padded data matrices from a trajectory.

    ``X = [0_{n x q}, x_q, ..., x_{m-1}]``, ``Y = [0_{n x q}, x_{q+1}, ..., x_m]``,
    ``U = [0_{k x q}, u_q, ..., u_{m-1}]``.
    """
    if not 0 <= q < m:
        raise ValueError(f"need 0 <= q < m, got q={q}, m={m}")
    if traj.length < m:
        raise ValueError(
            f"trajectory has {traj.length + 1} states but m={m} needs {m + 1}"
        )
    X = np.zeros((traj.n, m))
    Y = np.zeros((traj.n, m))
    U = np.zeros((traj.k, m))
    X[:, q:] = traj.states[:, q:m]
    Y[:, q:] = traj.states[:, q + 1 : m + 1]
    U[:, q:] = traj.inputs[:, q:m]
    return DataMatrices(X, Y, U)


def hankel_companion(model: StateSpaceModel) -> tuple[np.ndarray, np.ndarray]:
    """Companion form of the stacked ``Q``-state recursion.

    Returns ``(script_A, script_B)`` with shapes ``nQ x nQ`` and ``nQ x kQ``.
    Identity blocks shift the stack; the bottom block-row is
    ``(0, -c_{Q-1} I, ..., -c_2 I, A - c_1 I)``, aligned so that iterating the
    stacked state reproduces the ARX recursion exactly (the deepest memory
    lag is ``Q - 1``, so the oldest stack entry carries no coefficient).
    """
    if not isinstance(model.kernel, CausalBandKernel):
        raise TypeError("companion form needs a band kernel")
    n, k, Q = model.n, model.k, model.kernel.Q
    coeffs = model.kernel.coeffs
    sA = np.zeros((n * Q, n * Q))
    for r in range(Q - 1):
        sA[r * n : (r + 1) * n, (r + 1) * n : (r + 2) * n] = np.eye(n)
    bottom = slice((Q - 1) * n, Q * n)
    for p in range(1, Q - 1):
        sA[bottom, p * n : (p + 1) * n] = -coeffs[Q - p - 1] * np.eye(n)
    last = model.A.copy()
    if Q > 1:
        last -= coeffs[0] * np.eye(n)
    sA[bottom, (Q - 1) * n : Q * n] = last
    sB = np.zeros((n * Q, k * Q))
    sB[bottom, (Q - 1) * k :] = model.B
    return sA, sB


def arx_offset(model: StateSpaceModel, initial_states: np.ndarray, m: int) -> np.ndarray:
    """Initial-value offset sequence of the pseudoinverse ARX-like form.

    Returns an ``n x m`` array ``[lambda(0), ..., lambda(m-1)]`` built from the
    first ``q`` initial states; the stacked sequence annihilates the dense
    kernel: ``lambda @ D == 0``.
    """
    if not isinstance(model.kernel, CausalBandKernel):
        raise TypeError("the ARX-like offset needs a band kernel")
    q = model.kernel.q
    initial = np.asarray(initial_states, dtype=float)
    if initial.ndim == 1:
        initial = initial[:, None]
    if initial.shape != (model.n, q + 1):
        raise ValueError(
            f"expected {model.n}x{q + 1} initial states, got shape {initial.shape}"
        )
    if m <= q:
        raise ValueError(f"need m > q, got m={m}, q={q}")
    if q == 0:
        return np.zeros((model.n, m))
    kern = CausalBandKernel(m, q, model.kernel.Q, model.kernel.coeffs)
    D = kern.to_dense()
    top, block = D[:q, q:], D[q:, q:]
    # R = top @ inv(block), solved through the unit-triangular block
    R = scipy.linalg.solve_triangular(block.T, top.T, lower=True).T
    X0 = initial[:, :q]
    return np.concatenate([-X0, X0 @ R], axis=1)


def relative_error(predicted: np.ndarray, truth: np.ndarray, first: int = 0) -> float:
    """Relative Frobenius error over state columns ``first`` onward."""
    num = np.linalg.norm(predicted[:, first:] - truth[:, first:])
    den = np.linalg.norm(truth[:, first:])
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return float(num / den)
