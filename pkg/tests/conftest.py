import numpy as np
import pytest

from violina import CausalBandKernel, Dataset, StateSpaceModel, Trajectory


def random_dataset(rng, n=3, k=2, m=8, q=1, N=2):
    """Dataset of arbitrary (non-simulated) trajectories."""
    trajs = [
        Trajectory(rng.normal(size=(n, m + 1)), rng.normal(size=(k, m)))
        for _ in range(N)
    ]
    return Dataset(trajs, q, m)


def random_theta(rng, n=3, k=2, m=8, q=1, Q=2):
    coeffs = tuple(rng.normal(scale=0.3, size=Q - 1))
    return StateSpaceModel(
        rng.normal(size=(n, n)), rng.normal(size=(n, k)),
        CausalBandKernel(m, q, Q, coeffs),
    )


def random_stable_model(rng, n=3, k=2, m=8, q=1, Q=2, coeff_scale=0.05):
    A = rng.normal(scale=0.3 / np.sqrt(n), size=(n, n))
    B = rng.normal(size=(n, k))
    coeffs = tuple(rng.normal(scale=coeff_scale, size=Q - 1))
    return StateSpaceModel(A, B, CausalBandKernel(m, q, Q, coeffs))


def simulated_dataset(rng, model, m, N=2, zero_initial=True):
    """Trajectories simulated from the model (zero initial values by default,
    which makes the matrix identity hold exactly on the data matrices)."""
    q = model.kernel.q
    trajs = []
    for _ in range(N):
        if zero_initial:
            init = np.zeros((model.n, q + 1))
        else:
            init = rng.normal(size=(model.n, q + 1))
        trajs.append(model.simulate(init, rng.normal(size=(model.k, m))))
    return Dataset(trajs, q, m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
