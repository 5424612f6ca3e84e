"""Downstream regressors: kernel ridge, MLP, and MAE/RMSE metrics."""
import numpy as np
import pytest

from softaug import Metrics, RegressorSpec, evaluate, fit
from softaug.data import TabularDataset
from softaug.errors import ConditioningError, ContractError
from softaug.regress import (KernelRidgeRegressor, MlpRegressor,
                             median_bandwidth, metrics_from_residuals,
                             rbf_kernel, squared_distances)


def _dataset(x, y):
    x = np.asarray(x, dtype=float)
    return TabularDataset(x, np.asarray(y, dtype=float),
                          tuple(f"x{i+1}" for i in range(x.shape[1])))


class _Echo:
    """Stub regressor whose predictions are supplied up front."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)

    def predict(self, x):
        return self.values[: x.shape[0]]


# ------------------------------------------------------------ distance/kernel

def test_squared_distances_matches_naive_loops():
    rng = np.random.default_rng(7)
    a, b = rng.normal(size=(5, 3)), rng.normal(size=(4, 3))
    naive = np.array([[np.sum((ra - rb) ** 2) for rb in b] for ra in a])
    assert np.allclose(squared_distances(a, b), naive, atol=1e-12)


def test_rbf_kernel_hand_value():
    k = rbf_kernel(np.array([[0.0]]), np.array([[1.0]]), 1.0)
    assert abs(k[0, 0] - np.exp(-0.5)) < 1e-15


def test_median_bandwidth_hand_case():
    # pairwise distances of {0, 1, 3} are {1, 2, 3}; median 2
    rows = np.array([[0.0], [1.0], [3.0]])
    assert median_bandwidth(rows) == 2.0


def test_median_bandwidth_degenerate_cases():
    assert median_bandwidth(np.array([[4.0]])) == 1.0
    assert median_bandwidth(np.full((4, 2), 3.0)) == 1.0


# ------------------------------------------------------------- kernel ridge

def test_small_ridge_interpolates_distinct_points():
    x = np.arange(5, dtype=float).reshape(-1, 1)
    y = np.array([0.2, 0.9, -0.4, 0.5, 1.3])
    model = fit(RegressorSpec(ridge=1e-12, bandwidth=0.5), _dataset(x, y))
    assert np.max(np.abs(model.predict(x) - y)) < 1e-6


def test_two_point_system_matches_direct_solve():
    x = np.array([[0.0], [1.0]])
    y = np.array([0.0, 1.0])
    model = KernelRidgeRegressor(RegressorSpec(bandwidth=1.0, ridge=0.1))
    model.fit(x, y)
    k01 = np.exp(-0.5)
    system = np.array([[1.1, k01], [k01, 1.1]])
    coef = np.linalg.solve(system, y)
    assert np.allclose(model._coef, coef, atol=1e-12)
    probe = np.array([[0.3]])
    expect = rbf_kernel(probe, x, 1.0) @ coef
    assert np.allclose(model.predict(probe), expect, atol=1e-12)


def test_duplicate_rows_with_zero_ridge_raise_conditioning_error():
    x = np.array([[0.5, 0.5], [0.5, 0.5], [0.1, 0.9]])
    y = np.array([1.0, 1.0, 0.0])
    model = KernelRidgeRegressor(RegressorSpec(ridge=0.0))
    with pytest.raises(ConditioningError, match="ridge > 0"):
        model.fit(x, y)


def test_negative_bandwidth_rejected():
    model = KernelRidgeRegressor(RegressorSpec(bandwidth=-2.0))
    with pytest.raises(ContractError, match="positive"):
        model.fit(np.zeros((3, 1)), np.zeros(3))


# ---------------------------------------------------------------------- mlp

def test_mlp_fits_constant_labels():
    rng = np.random.default_rng(3)
    ds = _dataset(rng.uniform(size=(20, 2)), np.full(20, 0.7))
    spec = RegressorSpec(kind="mlp", learning_rate=1e-2, epochs=1000)
    assert evaluate(fit(spec, ds), ds).mae < 1e-3


def test_mlp_is_deterministic_under_seed():
    rng = np.random.default_rng(11)
    ds = _dataset(rng.uniform(size=(16, 3)), rng.uniform(size=16))
    spec = RegressorSpec(kind="mlp", epochs=40, seed=9)
    a = fit(spec, ds).predict(ds.features)
    b = fit(spec, ds).predict(ds.features)
    assert np.array_equal(a, b)


# ------------------------------------------------------------------ metrics

def test_equal_magnitude_residuals_give_equal_metrics():
    m = metrics_from_residuals(np.array([0.1, -0.1]))
    assert abs(m.mae - 0.1) < 1e-15
    assert abs(m.rmse - 0.1) < 1e-15


def test_uneven_residuals_split_mae_and_rmse():
    m = metrics_from_residuals(np.array([0.0, 0.2]))
    assert abs(m.mae - 0.1) < 1e-15
    assert abs(m.rmse - np.sqrt(0.02)) < 1e-15


def test_perfect_predictions_give_zero_metrics():
    ds = _dataset(np.arange(4, dtype=float).reshape(-1, 1),
                  [0.3, 0.1, 0.9, 0.4])
    m = evaluate(_Echo(ds.labels), ds)
    assert m == Metrics(0.0, 0.0)


def test_rmse_never_below_mae():
    rng = np.random.default_rng(21)
    for _ in range(50):
        r = rng.normal(size=rng.integers(1, 30))
        m = metrics_from_residuals(r)
        assert m.rmse >= m.mae - 1e-15


def test_metrics_require_residuals():
    with pytest.raises(ContractError):
        metrics_from_residuals(np.array([]))


# ---------------------------------------------------------------- contracts

def test_spec_rejects_unknown_kind():
    with pytest.raises(ContractError, match="kind"):
        RegressorSpec(kind="forest")


@pytest.mark.parametrize("cls", [KernelRidgeRegressor, MlpRegressor])
def test_fit_contracts(cls):
    model = cls(RegressorSpec(kind="mlp" if cls is MlpRegressor else "kernel-ridge"))
    with pytest.raises(ContractError):
        model.fit(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(ContractError):
        model.fit(np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ContractError):
        model.predict(np.zeros((2, 2)))
