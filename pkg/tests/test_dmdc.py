import numpy as np
import pytest

from violina import (
    CausalBandKernel,
    Dataset,
    StateSpaceModel,
    Trajectory,
    dmdc_fit,
    dmdc_rank_scan,
    uniqueness_certificate,
)
from violina.dmdc import attainable_rank
from conftest import random_stable_model, simulated_dataset


def test_exact_recovery_at_full_rank(rng):
    n, k, m = 3, 2, 20
    truth = random_stable_model(rng, n=n, k=k, m=m, q=0, Q=1)
    data = simulated_dataset(rng, truth, m, N=1, zero_initial=False)
    A, B = dmdc_fit(data, n + k)
    assert np.max(np.abs(A - truth.A)) <= 1e-8 * max(1, np.max(np.abs(truth.A)))
    assert np.max(np.abs(B - truth.B)) <= 1e-8 * max(1, np.max(np.abs(truth.B)))


def test_zero_targets_give_zero_model(rng):
    states = np.zeros((2, 7))
    states[:, 0] = 0.0
    inputs = rng.normal(size=(1, 6))
    data = Dataset([Trajectory(states, inputs)], 0, 6)
    A, B = dmdc_fit(data, 1)
    assert np.max(np.abs(A)) <= 1e-14
    assert np.max(np.abs(B)) <= 1e-14


def test_full_rank_equals_pseudoinverse(rng):
    data = simulated_dataset(rng, random_stable_model(rng, n=2, k=2, m=15, q=0, Q=1),
                             15, N=2, zero_initial=False)
    A, B = dmdc_fit(data, 4)
    X = np.hstack([mat.X for mat in data.matrices])
    Y = np.hstack([mat.Y for mat in data.matrices])
    U = np.hstack([mat.U for mat in data.matrices])
    target = Y @ np.linalg.pinv(np.vstack([X, U]))
    np.testing.assert_allclose(np.hstack([A, B]), target, atol=1e-10)


def test_rank_above_numerical_rank_errors(rng):
    # duplicated state rows leave [X; U] rank deficient
    base = rng.normal(size=(1, 9))
    states = np.vstack([base, base])
    inputs = rng.normal(size=(1, 8))
    data = Dataset([Trajectory(states, inputs)], 0, 8)
    assert attainable_rank(data) == 2
    with pytest.raises(ValueError, match="attainable rank is 2"):
        dmdc_fit(data, 3)
    A, B = dmdc_fit(data, 2)  # reduced rank still returns a solution
    assert np.all(np.isfinite(A)) and np.all(np.isfinite(B))


def test_rank_scan_recovers_markovian_dimension(rng):
    n, k, m = 3, 2, 25
    truth = random_stable_model(rng, n=n, k=k, m=m, q=0, Q=1)
    trajs = [
        truth.simulate(rng.normal(size=(n, 1)), rng.normal(size=(k, m)))
        for _ in range(3)
    ]
    train = Dataset(trajs, 0, m)
    scan = dmdc_rank_scan(train, fit_index=0)
    assert scan.best_rank == n + k
    assert scan.errors[scan.best_rank - 1] <= 1e-6
    assert all(scan.errors[scan.best_rank - 1] < e
               for i, e in enumerate(scan.errors) if i != scan.best_rank - 1)


def test_rank_scan_single_feasible_rank(rng):
    # rank-one data: only one candidate
    x = rng.normal(size=(2, 1))
    states = np.hstack([x * (0.5 ** t) for t in range(7)])
    inputs = np.zeros((1, 6))
    data = Dataset([Trajectory(states, inputs)], 0, 6)
    scan = dmdc_rank_scan(data)
    assert scan.ranks == (1,)
    assert scan.best_rank == 1


def test_rank_scan_records_whole_curve(rng):
    truth = random_stable_model(rng, n=2, k=1, m=12, q=0, Q=1)
    train = simulated_dataset(rng, truth, 12, N=2, zero_initial=False)
    scan = dmdc_rank_scan(train, pooled=True)
    assert len(scan.errors) == len(scan.ranks) == attainable_rank(train)


def test_markovian_pairing_used_even_for_lagged_datasets(rng):
    # same trajectories, different dataset q: DMDc must not depend on q
    truth = random_stable_model(rng, n=2, k=1, m=12, q=0, Q=1)
    trajs = [
        truth.simulate(rng.normal(size=(2, 1)), rng.normal(size=(1, 12)))
        for _ in range(2)
    ]
    d0 = Dataset(trajs, 0, 12)
    d2 = Dataset(trajs, 2, 12)
    A0, B0 = dmdc_fit(d0, 3)
    A2, B2 = dmdc_fit(d2, 3)
    np.testing.assert_array_equal(A0, A2)
    np.testing.assert_array_equal(B0, B2)


def test_uniqueness_linkage_with_rank_deficiency(rng):
    # when the certificate reports deficiency, full-rank DMDc must refuse
    n, k, m = 3, 2, 4
    traj = Trajectory(rng.normal(size=(n, m + 1)), rng.normal(size=(k, m)))
    data = Dataset([traj], 0, m)
    report = uniqueness_certificate(data, mode="fixed_d")
    assert not report.rank_condition
    with pytest.raises(ValueError):
        dmdc_fit(data, n + k)
    # at the attainable rank the minimum-norm solution matches the pinv
    r = attainable_rank(data)
    A, B = dmdc_fit(data, r)
    mat = data.matrices[0]
    target = mat.Y @ np.linalg.pinv(np.vstack([mat.X, mat.U]))
    np.testing.assert_allclose(np.hstack([A, B]), target, atol=1e-9)
