"""Synthetic cylinder-grid diffusion benchmark: weighted graph, ground-truth
models, train/test/energy datasets, and the energy metric.

Everything is generated from a seeded Philox counter-based generator, with a
fixed cell and edge order (row-major cells; the wrap-around right edge is
drawn before the upward edge), so a given seed reproduces the suite bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import CausalBandKernel
from .model import StateSpaceModel, Trajectory
from .objective import Dataset


@dataclass(frozen=True, eq=False)
class CylinderGrid:
    """Cylindrical grid with random edge weights.

    Cells are indexed ``i = x + Lx * y``; horizontal neighbors wrap around
    the circumference, vertical ones do not.
    """

    Lx: int
    Ly: int
    w0: float
    w1: float
    seed: int
    adjacency: np.ndarray
    laplacian: np.ndarray

    @property
    def n(self) -> int:
        return self.Lx * self.Ly

    @property
    def neighbor_mask(self) -> np.ndarray:
        """Boolean support of the constraint sets: neighbors plus diagonal."""
        return (self.adjacency > 0) | np.eye(self.n, dtype=bool)

    def to_dict(self) -> dict:
        return {"Lx": self.Lx, "Ly": self.Ly, "w0": self.w0, "w1": self.w1,
                "seed": self.seed}


def build_cylinder_graph(Lx: int, Ly: int, w0: float, w1: float, seed: int) -> CylinderGrid:
    """Draw weights in ``[w0, w1]`` once per undirected edge and assemble the
    adjacency and Laplacian (off-diagonals nonnegative, zero row and column
    sums)."""
    if Lx < 3:
        raise ValueError(f"circumference must be at least 3 cells, got {Lx}")
    if Ly < 1:
        raise ValueError(f"height must be at least 1 cell, got {Ly}")
    if not 0 < w0 <= w1:
        raise ValueError(f"need 0 < w0 <= w1, got w0={w0}, w1={w1}")
    n = Lx * Ly
    rng = np.random.Generator(np.random.Philox(seed))
    K = np.zeros((n, n))
    for y in range(Ly):
        for x in range(Lx):
            i = x + Lx * y
            j = (x + 1) % Lx + Lx * y
            K[i, j] = K[j, i] = w0 + (w1 - w0) * rng.random()
            if y + 1 < Ly:
                j = x + Lx * (y + 1)
                K[i, j] = K[j, i] = w0 + (w1 - w0) * rng.random()
    L = K - np.diag(K.sum(axis=1))
    return CylinderGrid(Lx, Ly, float(w0), float(w1), int(seed), K, L)


def ground_truth_models(grid: CylinderGrid, h: float, m: int, q: int = 2,
                        Q: int = 3, coeffs=(0.03, -0.01)):
    """Markovian and non-Markovian ground truths on the grid.

    Both share ``A = I + L h`` and ``B = I h``; the Markovian kernel is the
    plain identity, the non-Markovian one carries the given band
    coefficients.
    """
    if h <= 0:
        raise ValueError(f"time step must be positive, got {h}")
    A = np.eye(grid.n) + grid.laplacian * h
    B = np.eye(grid.n) * h
    markov = StateSpaceModel(A, B, CausalBandKernel.identity(m, 0, 1))
    nonmarkov = StateSpaceModel(A, B, CausalBandKernel(m, q, Q, tuple(coeffs)))
    return markov, nonmarkov


def make_input(orientation: str, sigma: int, nu: int, xi: int,
               Lx: int, Ly: int, m: int, h: float) -> np.ndarray:
    """Sinusoidal forcing on one grid row or column.

    Cell ``(x, y)`` at time ``t`` receives ``sigma^x * delta(xi, y) *
    sin(2 pi nu t h)`` for the parallel orientation; the perpendicular one
    swaps the roles of ``x`` and ``y``.
    """
    if sigma not in (1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")
    n = Lx * Ly
    wave = np.sin(2.0 * np.pi * nu * np.arange(m) * h)
    out = np.zeros((n, m))
    if orientation == "parallel":
        if not 0 <= xi < Ly:
            raise ValueError(f"row index xi={xi} outside [0, {Ly})")
        for x in range(Lx):
            out[x + Lx * xi] = (sigma ** x) * wave
    elif orientation == "perp":
        if not 0 <= xi < Lx:
            raise ValueError(f"column index xi={xi} outside [0, {Lx})")
        for y in range(Ly):
            out[xi + Lx * y] = (sigma ** y) * wave
    else:
        raise ValueError(f"orientation must be 'parallel' or 'perp', got {orientation!r}")
    return out


def make_datasets(model: StateSpaceModel, grid: CylinderGrid, m: int, h: float):
    """Simulate the train, test and energy sets for one ground truth.

    Train: parallel inputs over sigma = +-1, nu in {3, 6}, every row xi, all
    from zero initial values.  The first train trajectory is the designated
    DMDc fitting one (sigma=+1, nu=3, xi=0).  Test: perpendicular inputs,
    sigma=+1, xi=0, nu = 1..8.  Energy: zero input from all-ones initial
    values.
    """
    q = model.kernel.q
    n = grid.n
    zeros0 = np.zeros((n, q + 1))
    train = []
    for sigma in (1, -1):
        for nu in (3, 6):
            for xi in range(grid.Ly):
                U = make_input("parallel", sigma, nu, xi, grid.Lx, grid.Ly, m, h)
                train.append(model.simulate(zeros0, U))
    test = []
    for nu in range(1, 9):
        U = make_input("perp", 1, nu, 0, grid.Lx, grid.Ly, m, h)
        test.append(model.simulate(zeros0, U))
    energy_traj = model.simulate(np.ones((n, q + 1)), np.zeros((n, m)))
    return (
        Dataset(train, q, m),
        Dataset(test, q, m),
        Dataset([energy_traj], q, m),
    )


@dataclass(frozen=True)
class BenchmarkConfig:
    """Scale parameters of the benchmark; ``h = 1 / (m - 1)``."""

    Lx: int
    Ly: int
    m: int
    seed: int = 42
    w0: float = 0.5
    w1: float = 1.5
    q: int = 2
    Q: int = 3
    coeffs: tuple[float, ...] = (0.03, -0.01)

    @property
    def h(self) -> float:
        return 1.0 / (self.m - 1)

    @classmethod
    def desk_scale(cls, seed: int = 42) -> "BenchmarkConfig":
        return cls(Lx=10, Ly=3, m=200, seed=seed)

    @classmethod
    def paper_scale(cls, seed: int = 42) -> "BenchmarkConfig":
        return cls(Lx=20, Ly=5, m=1000, seed=seed)

    def to_dict(self) -> dict:
        return {
            "Lx": self.Lx, "Ly": self.Ly, "m": self.m, "seed": self.seed,
            "w0": self.w0, "w1": self.w1, "q": self.q, "Q": self.Q,
            "coeffs": list(self.coeffs),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkConfig":
        return cls(
            Lx=int(d["Lx"]), Ly=int(d["Ly"]), m=int(d["m"]),
            seed=int(d.get("seed", 42)),
            w0=float(d.get("w0", 0.5)), w1=float(d.get("w1", 1.5)),
            q=int(d.get("q", 2)), Q=int(d.get("Q", 3)),
            coeffs=tuple(d.get("coeffs", (0.03, -0.01))),
        )


@dataclass(frozen=True, eq=False)
class SystemBenchmark:
    """One ground truth with its simulated train/test/energy datasets."""

    model: StateSpaceModel
    train: Dataset
    test: Dataset
    energy: Dataset


@dataclass(frozen=True, eq=False)
class BenchmarkSuite:
    grid: CylinderGrid
    config: BenchmarkConfig
    markov: SystemBenchmark
    nonmarkov: SystemBenchmark

    @property
    def h(self) -> float:
        return self.config.h


def build_benchmark_suite(config: BenchmarkConfig) -> BenchmarkSuite:
    """Generate the full suite for both ground truths from one seed."""
    grid = build_cylinder_graph(config.Lx, config.Ly, config.w0, config.w1, config.seed)
    markov_model, nonmarkov_model = ground_truth_models(
        grid, config.h, config.m, config.q, config.Q, config.coeffs
    )
    systems = []
    for model in (markov_model, nonmarkov_model):
        train, test, energy = make_datasets(model, grid, config.m, config.h)
        systems.append(SystemBenchmark(model, train, test, energy))
    return BenchmarkSuite(grid, config, systems[0], systems[1])


def energy(traj: Trajectory) -> np.ndarray:
    """Total state sum ``E(t)`` at every time point."""
    return traj.states.sum(axis=0)


def energy_deviation(predicted: Trajectory, truth: Trajectory) -> np.ndarray:
    """Energy difference ``E_pred(t) - E_true(t)``; lengths must agree."""
    if predicted.states.shape[1] != truth.states.shape[1]:
        raise ValueError(
            f"trajectory lengths differ: {predicted.states.shape[1]} vs "
            f"{truth.states.shape[1]}"
        )
    return energy(predicted) - energy(truth)
