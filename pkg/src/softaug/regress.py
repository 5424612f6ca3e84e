"""Downstream regressors and error metrics.

Two families: an RBF kernel-ridge model (closed-form dense solve) and a
small MLP trained with Adam. Both consume datasets in normalized space;
metrics are reported in that space unless the caller inverts them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import TabularDataset
from .errors import ConditioningError, ContractError
from .layers import init_mlp
from .optim import Adam
from .rng import SeededRng

Bandwidth = Union[str, float]


@dataclass(frozen=True)
class RegressorSpec:
    kind: str = "kernel-ridge"          # kernel-ridge | mlp
    bandwidth: Bandwidth = "median"     # rbf width, or "median" heuristic
    ridge: float = 1e-3
    hidden: tuple[int, ...] = (32, 16)
    epochs: int = 500
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("kernel-ridge", "mlp"):
            raise ContractError(f"unknown regressor kind {self.kind!r}")


@dataclass(frozen=True)
class Metrics:
    mae: float
    rmse: float


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, (len(a), len(b))."""
    aa = np.sum(a * a, axis=1)[:, None]
    bb = np.sum(b * b, axis=1)[None, :]
    d2 = aa + bb - 2.0 * (a @ b.T)
    return np.maximum(d2, 0.0)


def median_bandwidth(rows: np.ndarray) -> float:
    """Median pairwise distance over the rows; 1.0 if that degenerates."""
    n = rows.shape[0]
    if n < 2:
        return 1.0
    d2 = squared_distances(rows, rows)
    upper = d2[np.triu_indices(n, k=1)]
    med = float(np.median(np.sqrt(upper)))
    return med if med > 0.0 else 1.0


def _resolve_bandwidth(bandwidth: Bandwidth, rows: np.ndarray) -> float:
    if bandwidth == "median":
        return median_bandwidth(rows)
    bw = float(bandwidth)
    if bw <= 0:
        raise ContractError(f"bandwidth must be positive, got {bw}")
    return bw


def rbf_kernel(a: np.ndarray, b: np.ndarray, sigma: float) -> np.ndarray:
    return np.exp(-squared_distances(a, b) / (2.0 * sigma * sigma))


class KernelRidgeRegressor:
    """f(x) = sum_i c_i k(x, x_i) with (K + ridge*I) c = y."""

    def __init__(self, spec: RegressorSpec):
        self.spec = spec
        self._x = None
        self._coef = None
        self.sigma = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "KernelRidgeRegressor":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        if x.shape[0] != y.shape[0]:
            raise ContractError(f"{x.shape[0]} rows vs {y.shape[0]} labels")
        if x.shape[0] == 0:
            raise ContractError("cannot fit on an empty dataset")
        self.sigma = _resolve_bandwidth(self.spec.bandwidth, x)
        gram = rbf_kernel(x, x, self.sigma)
        gram[np.diag_indices_from(gram)] += self.spec.ridge
        try:
            chol = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise ConditioningError(
                "kernel system is singular (duplicate rows?); "
                "use a ridge > 0") from None
        z = np.linalg.solve(chol, y)
        self._coef = np.linalg.solve(chol.T, z)
        self._x = x
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        if self._coef is None:
            raise ContractError("predict before fit")
        return rbf_kernel(np.asarray(x, dtype=float), self._x, self.sigma) @ self._coef


class MlpRegressor:
    """Small leaky-relu network with a linear head, full-batch Adam."""

    def __init__(self, spec: RegressorSpec):
        self.spec = spec
        self._net = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "MlpRegressor":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1, 1)
        if x.shape[0] != y.shape[0]:
            raise ContractError(f"{x.shape[0]} rows vs {y.shape[0]} labels")
        if x.shape[0] == 0:
            raise ContractError("cannot fit on an empty dataset")
        dims = [x.shape[1], *self.spec.hidden, 1]
        net = init_mlp(dims, SeededRng(self.spec.seed), out_activation="linear")
        opt = Adam(net.params(), learning_rate=self.spec.learning_rate)
        xt, yt = Tensor(x), Tensor(y)
        for _ in range(self.spec.epochs):
            loss = ad.mean_all(ad.square(ad.sub(net.forward(xt), yt)))
            opt.step(ad.grad_values(loss, net.params()))
        self._net = net
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        if self._net is None:
            raise ContractError("predict before fit")
        return self._net.forward_values(np.asarray(x, dtype=float)).ravel()


Regressor = Union[KernelRidgeRegressor, MlpRegressor]


def fit(spec: RegressorSpec, ds: TabularDataset) -> Regressor:
    model = KernelRidgeRegressor(spec) if spec.kind == "kernel-ridge" else MlpRegressor(spec)
    return model.fit(ds.features, ds.labels)


def evaluate(model: Regressor, ds: TabularDataset) -> Metrics:
    return metrics_from_residuals(model.predict(ds.features) - ds.labels)


def metrics_from_residuals(residuals: np.ndarray) -> Metrics:
    r = np.asarray(residuals, dtype=float).reshape(-1)
    if r.size == 0:
        raise ContractError("metrics need at least one residual")
    return Metrics(mae=float(np.mean(np.abs(r))),
                   rmse=float(np.sqrt(np.mean(r * r))))
