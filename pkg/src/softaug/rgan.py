"""Regression-aware Wasserstein GAN for joint [x, y] tabular rows.

Architecture: a generator maps noise to sigmoid-bounded joint rows; a
shallow trunk embeds x; a critic head scores trunk(x) joined with y; a
regressor head predicts y from trunk(x). With trunk sharing on (the
default) the critic and regressor use the same trunk object, so the
regression residuals shape the features the critic sees. With sharing
off the regressor keeps an independent copy of the trunk and is frozen
after pretraining.

Losses (per batch of N rows):
* critic/regressor: -mean D(real) + mean D(fake)
    + (gp_weight/N) * sum (||grad D at interpolates|| - 1)^2
    + critic_reg_weight * mean-residual term (when enabled)
* generator: -mean D(fake) + gen_reg_weight * mean-residual term
  (fake residuals steer the generator; the real-batch residual is added
  for loss-value fidelity even though its generator gradient is zero)

With both regression terms off and sharing off, training is exactly a
WGAN with gradient penalty.
"""
from __future__ import annotations

import json
import struct
import time
from dataclasses import dataclass, asdict, replace
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import TabularDataset
from .errors import ConfigError, ContractError, DivergenceError, ShapeError
from .layers import Mlp, init_mlp
from .optim import Adam
from .rng import SeededRng, gaussian_noise


@dataclass(frozen=True)
class GanConfig:
    noise_dim: int = 8
    n_critic: int = 5
    gp_weight: float = 0.5
    gen_reg_weight: float = 1.0
    critic_reg_weight: float = 1.0
    learning_rate: float = 1e-4
    batch_size: int = 32
    iterations: int = 10000
    pretrain_epochs: int = 200
    pretrain_lr: float | None = None
    share_trunk: bool = True
    generator_regression: bool = True
    critic_regression: bool = True
    trunk_width: int = 32
    gen_hidden: tuple[int, ...] = (32, 32)
    critic_hidden: int = 32
    regressor_hidden: int = 8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    slope: float = 0.01

    def __post_init__(self):
        if self.noise_dim < 1:
            raise ConfigError(f"noise_dim must be >= 1, got {self.noise_dim}")
        if self.n_critic < 1:
            raise ConfigError(f"n_critic must be >= 1, got {self.n_critic}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.iterations < 0 or self.pretrain_epochs < 0:
            raise ConfigError("iteration counts must be >= 0")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("gp_weight", "gen_reg_weight", "critic_reg_weight"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")

    def wgan_gp_mode(self) -> "GanConfig":
        """The plain WGAN-GP baseline: no sharing, no regression terms."""
        return replace(self, share_trunk=False, generator_regression=False,
                       critic_regression=False)


class RganModel:
    """Generator, trunk(s), critic head and regressor head."""

    def __init__(self, n_features: int, config: GanConfig, rng: SeededRng,
                 columns: tuple[str, ...] | None = None, label_name: str = "y"):
        if n_features < 1:
            raise ContractError(f"need at least one feature, got {n_features}")
        d = int(n_features)
        self.n_features = d
        self.config = config
        self.columns = tuple(columns) if columns else tuple(f"x{j+1}" for j in range(d))
        self.label_name = label_name
        s = config.slope
        # stream order is fixed: generator, trunk, critic head, regressor head
        self.generator = init_mlp([config.noise_dim, *config.gen_hidden, d + 1],
                                  rng, s, out_activation="sigmoid")
        trunk = init_mlp([d, config.trunk_width], rng, s)
        self.critic_trunk = trunk
        self.critic_head = init_mlp([config.trunk_width + 1, config.critic_hidden, 1],
                                    rng, s, out_activation="linear")
        # unshared mode copies the same initial trunk, so the critic starts
        # identically in every mode under one seed
        self.regressor_trunk = trunk if config.share_trunk else trunk.copy()
        self.regressor_head = init_mlp([config.trunk_width, config.regressor_hidden, 1],
                                       rng, s, out_activation="linear")

    # ------------------------------------------------------------- forwards

    def critic_score(self, x: Tensor, y: Tensor) -> Tensor:
        h = self.critic_trunk.forward(x)
        return self.critic_head.forward(ad.concat_cols([h, y]))

    def critic_score_values(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        h = self.critic_trunk.forward_values(x)
        return self.critic_head.forward_values(np.hstack([h, y.reshape(-1, 1)]))

    def regressor_predict(self, x: Tensor) -> Tensor:
        return self.regressor_head.forward(self.regressor_trunk.forward(x))

    def regressor_predict_values(self, x: np.ndarray) -> np.ndarray:
        return self.regressor_head.forward_values(
            self.regressor_trunk.forward_values(x)).ravel()

    # ------------------------------------------------------- parameter sets

    def generator_params(self):
        return self.generator.params()

    def critic_step_params(self):
        """Parameters a critic/regressor update may change."""
        params = self.critic_trunk.params() + self.critic_head.params()
        if self.config.share_trunk:
            params += self.regressor_head.params()
        return params

    def regressor_params(self):
        return self.regressor_trunk.params() + self.regressor_head.params()


# ------------------------------------------------------------------- losses

def _residual_sq_sum(model: RganModel, x: Tensor, y: Tensor) -> Tensor:
    """sum((regressor(x) - y)^2) as a graph node."""
    return ad.sum_all(ad.square(ad.sub(model.regressor_predict(x), y)))


def regression_loss(model: RganModel, real_x, real_y, fake_x, fake_y) -> Tensor:
    """Mean joint residual over a real and a fake batch of equal size."""
    rx, ry = Tensor(real_x), Tensor(np.reshape(real_y, (-1, 1)))
    fx, fy = Tensor(fake_x), Tensor(np.reshape(fake_y, (-1, 1)))
    if rx.shape[0] != fx.shape[0]:
        raise ContractError(
            f"real and fake batches must match: {rx.shape[0]} vs {fx.shape[0]}")
    n = rx.shape[0]
    return ad.scale(ad.add(_residual_sq_sum(model, fx, fy),
                           _residual_sq_sum(model, rx, ry)), 1.0 / n)


def critic_regressor_loss(model: RganModel, real_x, real_y, fake_x, fake_y,
                          mu: np.ndarray, config: GanConfig):
    """Joint critic(+regressor) objective; returns (loss node, float parts)."""
    real_x = np.asarray(real_x, dtype=float)
    real_y = np.reshape(np.asarray(real_y, dtype=float), (-1, 1))
    fake_x = np.asarray(fake_x, dtype=float)
    fake_y = np.reshape(np.asarray(fake_y, dtype=float), (-1, 1))
    mu = np.reshape(np.asarray(mu, dtype=float), (-1, 1))
    n = real_x.shape[0]
    if fake_x.shape[0] != n or mu.shape[0] != n:
        raise ContractError("real, fake and mu must have the same row count")
    d = model.n_features

    d_real = ad.mean_all(model.critic_score(Tensor(real_x), Tensor(real_y)))
    d_fake = ad.mean_all(model.critic_score(Tensor(fake_x), Tensor(fake_y)))
    loss = ad.sub(d_fake, d_real)
    parts = {"wasserstein": d_real.item() - d_fake.item()}

    if config.gp_weight != 0.0:
        joint_real = np.hstack([real_x, real_y])
        joint_fake = np.hstack([fake_x, fake_y])
        interp = mu * joint_real + (1.0 - mu) * joint_fake
        jt = Tensor(interp, requires_grad=True)
        score = model.critic_score(ad.slice_cols(jt, 0, d), ad.slice_cols(jt, d, d + 1))
        g = ad.grad(ad.sum_all(score), [jt], create_graph=True)[0]
        pen = ad.sum_all(ad.square(ad.shift(ad.norm_rows(g), -1.0)))
        loss = ad.add(loss, ad.scale(pen, config.gp_weight / n))
        parts["penalty"] = pen.item() / n
    else:
        parts["penalty"] = 0.0

    if config.critic_regression and config.critic_reg_weight != 0.0:
        reg = regression_loss(model, real_x, real_y, fake_x, fake_y)
        loss = ad.add(loss, ad.scale(reg, config.critic_reg_weight))
        parts["regression"] = reg.item()
    else:
        parts["regression"] = float("nan")

    parts["loss"] = loss.item()
    return loss, parts


def generator_loss(model: RganModel, noise: np.ndarray, real_x, real_y,
                   config: GanConfig):
    """Adversarial + regression-consistency generator objective."""
    noise = np.asarray(noise, dtype=float)
    real_x = np.asarray(real_x, dtype=float)
    real_y = np.reshape(np.asarray(real_y, dtype=float), (-1, 1))
    n = noise.shape[0]
    d = model.n_features

    out = model.generator.forward(Tensor(noise))
    fx, fy = ad.slice_cols(out, 0, d), ad.slice_cols(out, d, d + 1)
    loss = ad.neg(ad.mean_all(model.critic_score(fx, fy)))
    parts = {"adversarial": loss.item()}

    if config.generator_regression and config.gen_reg_weight != 0.0:
        if real_x.shape[0] != n:
            raise ContractError(
                f"real batch of {real_x.shape[0]} rows for {n} noise rows")
        fake_term = _residual_sq_sum(model, fx, fy)
        real_term = _residual_sq_sum(model, Tensor(real_x), Tensor(real_y))
        reg = ad.scale(ad.add(fake_term, real_term), 1.0 / n)
        loss = ad.add(loss, ad.scale(reg, config.gen_reg_weight))
        parts["regression"] = reg.item()
    else:
        parts["regression"] = float("nan")

    parts["loss"] = loss.item()
    return loss, parts


# ----------------------------------------------------------------- training

@dataclass
class TrainTrace:
    pretrain_mse: list[float]
    iteration: list[int]
    critic_loss: list[float]
    generator_loss: list[float]
    regression_loss: list[float]
    wasserstein: list[float]
    wall_clock: list[float]

    @staticmethod
    def empty() -> "TrainTrace":
        return TrainTrace([], [], [], [], [], [], [])

    def numeric_rows(self) -> list[tuple]:
        return list(zip(self.iteration, self.critic_loss, self.generator_loss,
                        self.regression_loss, self.wasserstein))


def pretrain_regressor(model: RganModel, train: TabularDataset,
                       config: GanConfig) -> list[float]:
    """Full-batch Adam on the real-sample MSE; one epoch = one update.

    Returns the per-epoch MSE history (value before each update). Runs in
    every mode; in unshared mode it touches only the regressor's own trunk.
    """
    if config.pretrain_epochs == 0:
        return []
    lr = config.pretrain_lr if config.pretrain_lr is not None else config.learning_rate
    params = _dedup(model.regressor_params())
    opt = Adam(params, lr, config.adam_beta1, config.adam_beta2, config.adam_epsilon)
    xt = Tensor(train.features)
    yt = Tensor(train.labels.reshape(-1, 1))
    history = []
    for _ in range(config.pretrain_epochs):
        loss = ad.mean_all(ad.square(ad.sub(model.regressor_predict(xt), yt)))
        history.append(loss.item())
        opt.step(ad.grad_values(loss, params))
    return history


def _dedup(params):
    seen, out = set(), []
    for p in params:
        if id(p) not in seen:
            seen.add(id(p))
            out.append(p)
    return out


def train(train_ds: TabularDataset, config: GanConfig, seed: int,
          model: RganModel | None = None) -> tuple[RganModel, TrainTrace]:
    """Adversarial training: n_critic critic updates per generator update.

    The stream consumption order per iteration is fixed (real indices,
    noise, mu for each critic update; then noise and real indices for the
    generator update), so a seed pins the whole trajectory bit-for-bit.
    """
    if train_ds.n_rows < 1:
        raise ContractError("training needs a non-empty dataset")
    rng = SeededRng(seed)
    if model is None:
        model = RganModel(train_ds.n_features, config, rng,
                          columns=train_ds.columns, label_name=train_ds.label_name)
    trace = TrainTrace.empty()
    trace.pretrain_mse = pretrain_regressor(model, train_ds, config)

    x = train_ds.features
    y = train_ds.labels.reshape(-1, 1)
    m, d = x.shape
    critic_params = model.critic_step_params()
    adam_c = Adam(critic_params, config.learning_rate, config.adam_beta1,
                  config.adam_beta2, config.adam_epsilon)
    adam_g = Adam(model.generator_params(), config.learning_rate,
                  config.adam_beta1, config.adam_beta2, config.adam_epsilon)

    for it in range(config.iterations):
        t0 = time.perf_counter()
        parts = {}
        try:
            for _ in range(config.n_critic):
                idx = rng.integers(0, m, config.batch_size)
                z = gaussian_noise(config.batch_size, config.noise_dim, rng)
                fake = model.generator.forward_values(z)
                mu = rng.uniform(config.batch_size, 1)
                loss, parts = critic_regressor_loss(
                    model, x[idx], y[idx], fake[:, :d], fake[:, d:], mu, config)
                if not np.isfinite(parts["loss"]):
                    raise DivergenceError(
                        f"non-finite critic loss at iteration {it}", trace=trace)
                adam_c.step(ad.grad_values(loss, critic_params))
            z = gaussian_noise(config.batch_size, config.noise_dim, rng)
            idx = rng.integers(0, m, config.batch_size)
            gloss, gparts = generator_loss(model, z, x[idx], y[idx], config)
            if not np.isfinite(gparts["loss"]):
                raise DivergenceError(
                    f"non-finite generator loss at iteration {it}", trace=trace)
            adam_g.step(ad.grad_values(gloss, model.generator_params()))
        except DivergenceError as err:
            if err.trace is None:
                err.trace = trace
            raise
        trace.iteration.append(it)
        trace.critic_loss.append(parts["loss"])
        trace.generator_loss.append(gparts["loss"])
        trace.regression_loss.append(parts["regression"])
        trace.wasserstein.append(parts["wasserstein"])
        trace.wall_clock.append(time.perf_counter() - t0)
    return model, trace


def generate(model: RganModel, n: int, seed: int) -> TabularDataset:
    """n joint rows from the generator; rows are a prefix-stable stream.

    The noise block is drawn row-contiguously from the seeded stream, so
    generate(model, 100, s) equals the first 100 rows of
    generate(model, 1000, s) bit-for-bit.
    """
    d = model.n_features
    if n == 0:
        return TabularDataset(np.zeros((0, d)), np.zeros(0), model.columns,
                              model.label_name, "generated")
    z = gaussian_noise(n, model.config.noise_dim, SeededRng(seed))
    out = model.generator.forward_values(z)
    return TabularDataset(out[:, :d], out[:, d], model.columns,
                          model.label_name, "generated")


# -------------------------------------------------------------- checkpoints

_MAGIC = b"SAUGCKPT"
_FORMAT_VERSION = 1


def _layer_blocks(model: RganModel):
    nets = [("generator", model.generator), ("critic_trunk", model.critic_trunk),
            ("critic_head", model.critic_head)]
    if not model.config.share_trunk:
        nets.append(("regressor_trunk", model.regressor_trunk))
    nets.append(("regressor_head", model.regressor_head))
    return nets


def save_checkpoint(model: RganModel, path, extra: dict | None = None) -> None:
    """Binary checkpoint: magic, version, JSON header, float64 LE blocks.

    Blocks follow the documented order generator, critic trunk, critic
    head, (regressor trunk when unshared), regressor head; within a
    network, layer by layer, weight then bias.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cfg = asdict(model.config)
    cfg["gen_hidden"] = list(cfg["gen_hidden"])
    header = {
        "format_version": _FORMAT_VERSION,
        "n_features": model.n_features,
        "columns": list(model.columns),
        "label_name": model.label_name,
        "config": cfg,
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with path.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for _, net in _layer_blocks(model):
            for w, b in net.layers:
                fh.write(np.ascontiguousarray(w.value, dtype="<f8").tobytes())
                fh.write(np.ascontiguousarray(b.value, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[RganModel, dict]:
    """Rebuild a model; rejects bad magic, version or dimension mismatches."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] != _MAGIC:
        raise ContractError(f"{path}: not a model checkpoint")
    version, hlen = struct.unpack("<II", raw[8:16])
    if version != _FORMAT_VERSION:
        raise ContractError(
            f"{path}: format version {version}, expected {_FORMAT_VERSION}")
    header = json.loads(raw[16:16 + hlen].decode())
    cfg_dict = dict(header["config"])
    cfg_dict["gen_hidden"] = tuple(cfg_dict["gen_hidden"])
    config = GanConfig(**cfg_dict)
    model = RganModel(header["n_features"], config, SeededRng(0),
                      columns=tuple(header["columns"]),
                      label_name=header["label_name"])
    offset = 16 + hlen
    for name, net in _layer_blocks(model):
        for li, (w, b) in enumerate(net.layers):
            for tensor in (w, b):
                count = tensor.value.size
                end = offset + count * 8
                if end > len(raw):
                    raise ContractError(
                        f"{path}: truncated parameter block in {name} layer {li}")
                block = np.frombuffer(raw[offset:end], dtype="<f8")
                tensor.value = block.reshape(tensor.value.shape).astype(np.float64)
                offset = end
    if offset != len(raw):
        raise ContractError(
            f"{path}: {len(raw) - offset} trailing bytes; dimensions do not match")
    return model, header.get("extra", {})
