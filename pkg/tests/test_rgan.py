"""Adversarial trainer: losses, modes, training loop, checkpoints."""
from dataclasses import replace

import numpy as np
import pytest

from conftest import central_difference, max_relative_error

from softaug import (GanConfig, RganModel, SeededRng, generate,
                     load_checkpoint, save_checkpoint, train)
from softaug import autodiff as ad
from softaug.data import TabularDataset
from softaug.errors import ConfigError, ContractError, DivergenceError
from softaug.optim import Adam
from softaug.rgan import (critic_regressor_loss, generator_loss,
                          pretrain_regressor, regression_loss)
from softaug.rng import gaussian_noise


def _tiny(**overrides):
    base = dict(noise_dim=4, n_critic=2, batch_size=4, iterations=3,
                pretrain_epochs=2, learning_rate=1e-3, trunk_width=8,
                gen_hidden=(8,), critic_hidden=8, regressor_hidden=4)
    base.update(overrides)
    return GanConfig(**base)


def _train_ds(n=10, d=2, seed=0):
    rng = np.random.default_rng(seed)
    return TabularDataset(rng.uniform(size=(n, d)), rng.uniform(size=n),
                          tuple(f"x{i+1}" for i in range(d)))


def _batch(n, d, seed):
    rng = np.random.default_rng(seed)
    return (rng.uniform(size=(n, d)), rng.uniform(size=n),
            rng.uniform(size=(n, d)), rng.uniform(size=n),
            rng.uniform(size=(n, 1)))


def _zero_net(net):
    for w, b in net.layers:
        w.value[...] = 0.0
        b.value[...] = 0.0


# ------------------------------------------------------------- configuration

def test_config_validation():
    for bad in (dict(noise_dim=0), dict(n_critic=0), dict(batch_size=0),
                dict(iterations=-1), dict(pretrain_epochs=-1),
                dict(learning_rate=0.0), dict(gp_weight=-0.1),
                dict(gen_reg_weight=-1.0), dict(critic_reg_weight=-0.5)):
        with pytest.raises(ConfigError):
            _tiny(**bad)


def test_wgan_gp_mode_flips_exactly_the_three_mode_flags():
    cfg = _tiny(gp_weight=0.7)
    wgan = cfg.wgan_gp_mode()
    assert not wgan.share_trunk
    assert not wgan.generator_regression and not wgan.critic_regression
    assert replace(wgan, share_trunk=True, generator_regression=True,
                   critic_regression=True) == cfg


def test_model_initialization_is_mode_fair():
    # the unshared trunk is a copy of the same tensors, so both modes draw
    # identical parameters from one seed and comparisons across modes are
    # apples to apples
    shared = RganModel(2, _tiny(), SeededRng(7))
    unshared = RganModel(2, _tiny(share_trunk=False), SeededRng(7))
    for name in ("generator", "critic_trunk", "critic_head", "regressor_head"):
        assert getattr(shared, name).checksum() == getattr(unshared, name).checksum()
    assert shared.regressor_trunk is shared.critic_trunk
    assert unshared.regressor_trunk is not unshared.critic_trunk
    assert unshared.regressor_trunk.checksum() == unshared.critic_trunk.checksum()


def test_model_rejects_zero_features():
    with pytest.raises(ContractError):
        RganModel(0, _tiny(), SeededRng(0))


# ------------------------------------------------------------------- losses

def test_regression_loss_matches_value_oracle():
    model = RganModel(2, _tiny(), SeededRng(3))
    rx, ry, fx, fy, _ = _batch(6, 2, seed=1)
    got = regression_loss(model, rx, ry, fx, fy).item()
    fake_res = model.regressor_predict_values(fx) - fy
    real_res = model.regressor_predict_values(rx) - ry
    want = (np.sum(fake_res ** 2) + np.sum(real_res ** 2)) / 6
    assert abs(got - want) < 1e-12


def test_regression_loss_requires_equal_batches():
    model = RganModel(2, _tiny(), SeededRng(3))
    rx, ry, fx, fy, _ = _batch(6, 2, seed=1)
    with pytest.raises(ContractError):
        regression_loss(model, rx[:4], ry[:4], fx, fy)


def test_wasserstein_part_is_zero_for_identical_batches():
    model = RganModel(2, _tiny(), SeededRng(5))
    rx, ry, _, _, mu = _batch(5, 2, seed=2)
    _, parts = critic_regressor_loss(model, rx, ry, rx, ry, mu, _tiny())
    assert parts["wasserstein"] == 0.0


def test_linear_critic_penalty_hand_case():
    # critic rigged to score(x, y) = 3x + 4y on positive inputs: the joint
    # gradient is (3, 4) with norm 5 on every row, so the mean penalty is
    # (5 - 1)^2 = 16 and the loss is 0 + (beta/n) * 16n = 8 with beta 0.5
    cfg = _tiny(trunk_width=4, critic_hidden=4, gp_weight=0.5,
                critic_regression=False)
    model = RganModel(1, cfg, SeededRng(0))
    _zero_net(model.critic_trunk)
    _zero_net(model.critic_head)
    model.critic_trunk.layers[0][0].value[0, 0] = 1.0
    w1 = model.critic_head.layers[0][0]
    w1.value[0, 0] = 3.0          # trunk unit 0 -> hidden unit 0
    w1.value[4, 1] = 4.0          # y column -> hidden unit 1
    w2 = model.critic_head.layers[1][0]
    w2.value[0, 0] = 1.0
    w2.value[1, 0] = 1.0

    rng = np.random.default_rng(4)
    x = rng.uniform(0.1, 0.9, size=(4, 1))
    y = rng.uniform(0.1, 0.9, size=4)
    mu = rng.uniform(size=(4, 1))
    _, parts = critic_regressor_loss(model, x, y, x, y, mu, cfg)
    assert parts["wasserstein"] == 0.0
    assert parts["penalty"] == 16.0
    assert parts["loss"] == 8.0
    assert np.isnan(parts["regression"])


def test_zero_weights_reduce_critic_loss_to_wasserstein():
    cfg = _tiny(gp_weight=0.0, critic_reg_weight=0.0)
    model = RganModel(2, cfg, SeededRng(6))
    rx, ry, fx, fy, mu = _batch(5, 2, seed=3)
    _, parts = critic_regressor_loss(model, rx, ry, fx, fy, mu, cfg)
    assert parts["penalty"] == 0.0
    assert np.isnan(parts["regression"])
    assert parts["loss"] == -parts["wasserstein"]


def test_critic_loss_batch_contracts():
    cfg = _tiny()
    model = RganModel(2, cfg, SeededRng(6))
    rx, ry, fx, fy, mu = _batch(5, 2, seed=3)
    with pytest.raises(ContractError):
        critic_regressor_loss(model, rx[:3], ry[:3], fx, fy, mu, cfg)
    with pytest.raises(ContractError):
        critic_regressor_loss(model, rx, ry, fx, fy, mu[:3], cfg)


def _hand_wgan_loss(model, real_x, real_y, fake_x, fake_y, mu, beta):
    """Plain-numpy critic loss: score means, interpolates, penalty."""
    s = model.config.slope
    d = model.n_features
    width = model.config.trunk_width
    ((tw, tb),) = model.critic_trunk.layers
    (w1, b1), (w2, b2) = model.critic_head.layers

    def leaky(z):
        return np.where(z > 0.0, z, s * z)

    def dleaky(z):
        return np.where(z > 0.0, 1.0, s)

    def score(x, y):
        h = leaky(x @ tw.value + tb.value)
        z2 = np.hstack([h, y.reshape(-1, 1)]) @ w1.value + b1.value
        return leaky(z2) @ w2.value + b2.value

    n = real_x.shape[0]
    d_real = float(score(real_x, real_y).mean())
    d_fake = float(score(fake_x, fake_y).mean())

    joint = mu * np.hstack([real_x, real_y.reshape(-1, 1)]) \
        + (1.0 - mu) * np.hstack([fake_x, fake_y.reshape(-1, 1)])
    z1 = joint[:, :d] @ tw.value + tb.value
    z2 = np.hstack([leaky(z1), joint[:, d:]]) @ w1.value + b1.value
    g_z2 = dleaky(z2) * w2.value.ravel()[None, :]
    g_cat = g_z2 @ w1.value.T
    g_x = (dleaky(z1) * g_cat[:, :width]) @ tw.value.T
    grad = np.hstack([g_x, g_cat[:, width:]])
    norms = np.sqrt(np.sum(grad ** 2, axis=1))
    return -d_real + d_fake + beta / n * float(np.sum((norms - 1.0) ** 2))


def test_critic_loss_in_baseline_mode_matches_hand_coded_wgan_gp():
    for seed in range(5):
        cfg = _tiny(gp_weight=0.5).wgan_gp_mode()
        model = RganModel(3, cfg, SeededRng(100 + seed))
        rx, ry, fx, fy, mu = _batch(8, 3, seed=200 + seed)
        _, parts = critic_regressor_loss(model, rx, ry, fx, fy, mu, cfg)
        want = _hand_wgan_loss(model, rx, ry, fx, fy, mu, cfg.gp_weight)
        assert abs(parts["loss"] - want) < 1e-10


def test_generator_loss_without_regression_is_pure_adversarial():
    cfg = _tiny(generator_regression=False)
    model = RganModel(2, cfg, SeededRng(8))
    z = gaussian_noise(6, cfg.noise_dim, SeededRng(1))
    rx, ry, _, _, _ = _batch(6, 2, seed=5)
    _, parts = generator_loss(model, z, rx, ry, cfg)
    assert parts["loss"] == parts["adversarial"]
    assert np.isnan(parts["regression"])
    fake = model.generator.forward_values(z)
    want = -float(np.mean(model.critic_score_values(fake[:, :2], fake[:, 2])))
    assert abs(parts["adversarial"] - want) < 1e-12


def test_zero_fake_residual_leaves_only_the_real_term():
    # generator all zero -> every fake row is sigmoid(0) = 0.5; regressor
    # rigged to predict 0.5 everywhere -> fake residuals vanish exactly
    cfg = _tiny()
    model = RganModel(2, cfg, SeededRng(9))
    _zero_net(model.generator)
    _zero_net(model.regressor_trunk)
    _zero_net(model.regressor_head)
    model.regressor_head.layers[-1][1].value[...] = 0.5

    z = gaussian_noise(5, cfg.noise_dim, SeededRng(2))
    rx, ry, _, _, _ = _batch(5, 2, seed=6)
    _, parts = generator_loss(model, z, rx, ry, cfg)
    want = float(np.sum((0.5 - ry) ** 2)) / 5
    assert abs(parts["regression"] - want) < 1e-15


def test_generator_loss_checks_real_batch_size():
    cfg = _tiny()
    model = RganModel(2, cfg, SeededRng(8))
    z = gaussian_noise(6, cfg.noise_dim, SeededRng(1))
    rx, ry, _, _, _ = _batch(4, 2, seed=5)
    with pytest.raises(ContractError):
        generator_loss(model, z, rx, ry, cfg)


# ---------------------------------------------------------------- gradients

def test_generator_gradients_match_finite_differences():
    cfg = _tiny()
    model = RganModel(2, cfg, SeededRng(11))
    z = gaussian_noise(4, cfg.noise_dim, SeededRng(3))
    rx, ry, _, _, _ = _batch(4, 2, seed=7)
    params = model.generator_params()
    loss, _ = generator_loss(model, z, rx, ry, cfg)
    analytic = ad.grad_values(loss, params)
    numeric = central_difference(
        lambda: generator_loss(model, z, rx, ry, cfg)[1]["loss"], params)
    assert max_relative_error(analytic, numeric) < 1e-4


def test_critic_gradients_match_finite_differences():
    cfg = _tiny()
    model = RganModel(2, cfg, SeededRng(12))
    rx, ry, fx, fy, mu = _batch(4, 2, seed=8)
    params = model.critic_step_params()
    loss, _ = critic_regressor_loss(model, rx, ry, fx, fy, mu, cfg)
    analytic = ad.grad_values(loss, params)
    numeric = central_difference(
        lambda: critic_regressor_loss(model, rx, ry, fx, fy, mu, cfg)[1]["loss"],
        params)
    assert max_relative_error(analytic, numeric) < 1e-4


# ----------------------------------------------------------- training steps

def test_updates_touch_only_their_own_parameters():
    cfg = _tiny()
    model = RganModel(2, cfg, SeededRng(13))
    rx, ry, fx, fy, mu = _batch(4, 2, seed=9)

    gen_before = model.generator.checksum()
    closs, _ = critic_regressor_loss(model, rx, ry, fx, fy, mu, cfg)
    critic_params = model.critic_step_params()
    Adam(critic_params, 1e-3).step(ad.grad_values(closs, critic_params))
    assert model.generator.checksum() == gen_before
    trunk_after_critic = model.critic_trunk.checksum()

    z = gaussian_noise(4, cfg.noise_dim, SeededRng(4))
    gloss, _ = generator_loss(model, z, rx, ry, cfg)
    gen_params = model.generator_params()
    Adam(gen_params, 1e-3).step(ad.grad_values(gloss, gen_params))
    assert model.generator.checksum() != gen_before
    assert model.critic_trunk.checksum() == trunk_after_critic


def test_pretraining_reaches_the_critic_only_when_trunk_is_shared():
    shared = RganModel(2, _tiny(pretrain_epochs=3), SeededRng(14))
    before = shared.critic_trunk.checksum()
    pretrain_regressor(shared, _train_ds(seed=1), shared.config)
    assert shared.critic_trunk.checksum() != before

    unshared = RganModel(2, _tiny(pretrain_epochs=3, share_trunk=False),
                         SeededRng(14))
    trunk_before = unshared.critic_trunk.checksum()
    head_before = unshared.critic_head.checksum()
    reg_trunk_before = unshared.regressor_trunk.checksum()
    pretrain_regressor(unshared, _train_ds(seed=1), unshared.config)
    assert unshared.critic_trunk.checksum() == trunk_before
    assert unshared.critic_head.checksum() == head_before
    assert unshared.regressor_trunk.checksum() != reg_trunk_before


def test_pretrain_history_tracks_mse():
    cfg = _tiny(pretrain_epochs=40, pretrain_lr=1e-2)
    model = RganModel(2, cfg, SeededRng(15))
    history = pretrain_regressor(model, _train_ds(n=16, seed=2), cfg)
    assert len(history) == 40
    assert all(np.isfinite(history))
    assert history[-1] < history[0]
    assert pretrain_regressor(model, _train_ds(seed=2), _tiny(pretrain_epochs=0)) == []


def test_unshared_regressor_is_frozen_after_pretraining():
    ds = _train_ds(n=12, seed=3)
    cfg = _tiny(share_trunk=False, iterations=3)
    trained, _ = train(ds, cfg, seed=31)
    frozen, _ = train(ds, replace(cfg, iterations=0), seed=31)
    assert trained.regressor_trunk.checksum() == frozen.regressor_trunk.checksum()
    assert trained.regressor_head.checksum() == frozen.regressor_head.checksum()
    assert trained.critic_trunk.checksum() != frozen.critic_trunk.checksum()

    shared_cfg = _tiny(iterations=3)
    moved, _ = train(ds, shared_cfg, seed=31)
    still, _ = train(ds, replace(shared_cfg, iterations=0), seed=31)
    assert moved.regressor_head.checksum() != still.regressor_head.checksum()


def test_training_is_deterministic():
    ds = _train_ds(n=12, seed=4)
    runs = [train(ds, _tiny(), seed=77) for _ in range(2)]
    (model_a, trace_a), (model_b, trace_b) = runs
    assert trace_a.numeric_rows() == trace_b.numeric_rows()
    assert trace_a.pretrain_mse == trace_b.pretrain_mse
    for name in ("generator", "critic_trunk", "critic_head", "regressor_head"):
        assert getattr(model_a, name).checksum() == getattr(model_b, name).checksum()


def test_trace_shape_and_mode_marking():
    ds = _train_ds(n=12, seed=5)
    _, full = train(ds, _tiny(), seed=1)
    assert len(full.iteration) == 3 and full.iteration == [0, 1, 2]
    assert all(np.isfinite(full.regression_loss))
    assert all(t >= 0.0 for t in full.wall_clock)

    _, wgan = train(ds, _tiny().wgan_gp_mode(), seed=1)
    assert np.isnan(wgan.regression_loss).all()
    assert all(np.isfinite(wgan.wasserstein))


def test_training_handles_batches_larger_than_the_dataset():
    ds = _train_ds(n=3, seed=6)
    model, trace = train(ds, _tiny(batch_size=8, iterations=1), seed=2)
    assert len(trace.iteration) == 1
    assert generate(model, 4, seed=0).n_rows == 4


def test_divergence_carries_the_partial_trace():
    rng = np.random.default_rng(7)
    ds = TabularDataset(rng.uniform(size=(6, 2)), np.full(6, 1e160),
                        ("x1", "x2"))
    cfg = _tiny(pretrain_epochs=0)
    with np.errstate(over="ignore"), pytest.raises(DivergenceError) as excinfo:
        train(ds, cfg, seed=3)
    assert excinfo.value.trace is not None


def test_zero_iterations_returns_pretrained_model():
    ds = _train_ds(n=8, seed=8)
    model, trace = train(ds, _tiny(iterations=0, pretrain_epochs=5), seed=4)
    assert trace.numeric_rows() == []
    assert len(trace.pretrain_mse) == 5
    assert generate(model, 3, seed=1).n_rows == 3


# ------------------------------------------------------------------ sampling

def test_generated_rows_are_sigmoid_bounded_and_tagged():
    ds = _train_ds(n=8, seed=9)
    model, _ = train(ds, _tiny(iterations=1), seed=5)
    out = generate(model, 50, seed=6)
    assert out.provenance == "generated"
    assert out.columns == ds.columns and out.label_name == ds.label_name
    assert np.all(out.features > 0.0) and np.all(out.features < 1.0)
    assert np.all(out.labels > 0.0) and np.all(out.labels < 1.0)


def test_generate_is_a_prefix_stable_stream():
    model = RganModel(2, _tiny(), SeededRng(16))
    small = generate(model, 5, seed=11)
    large = generate(model, 40, seed=11)
    assert np.array_equal(small.features, large.features[:5])
    assert np.array_equal(small.labels, large.labels[:5])
    empty = generate(model, 0, seed=11)
    assert empty.n_rows == 0 and empty.provenance == "generated"


# --------------------------------------------------------------- checkpoints

def test_checkpoint_roundtrip_preserves_generation(tmp_path):
    ds = _train_ds(n=8, seed=10)
    model, _ = train(ds, _tiny(iterations=1), seed=7)
    path = tmp_path / "model.bin"
    save_checkpoint(model, path, extra={"seed": 7, "tag": "demo"})
    loaded, extra = load_checkpoint(path)
    assert extra == {"seed": 7, "tag": "demo"}
    assert loaded.config == model.config
    assert loaded.columns == model.columns
    a, b = generate(model, 20, seed=8), generate(loaded, 20, seed=8)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert loaded.regressor_trunk is loaded.critic_trunk


def test_checkpoint_roundtrip_keeps_unshared_trunks_independent(tmp_path):
    ds = _train_ds(n=8, seed=11)
    model, _ = train(ds, _tiny(iterations=1, share_trunk=False), seed=9)
    path = tmp_path / "model.bin"
    save_checkpoint(model, path)
    loaded, extra = load_checkpoint(path)
    assert extra == {}
    assert loaded.regressor_trunk is not loaded.critic_trunk
    assert loaded.regressor_trunk.checksum() == model.regressor_trunk.checksum()
    assert loaded.critic_trunk.checksum() == model.critic_trunk.checksum()
    preds_a = model.regressor_predict_values(ds.features)
    preds_b = loaded.regressor_predict_values(ds.features)
    assert np.array_equal(preds_a, preds_b)


def test_checkpoint_rejects_corruption(tmp_path):
    model = RganModel(2, _tiny(), SeededRng(17))
    path = tmp_path / "model.bin"
    save_checkpoint(model, path)
    raw = path.read_bytes()

    bad_magic = tmp_path / "magic.bin"
    bad_magic.write_bytes(b"NOTMODEL" + raw[8:])
    with pytest.raises(ContractError, match="not a model checkpoint"):
        load_checkpoint(bad_magic)

    bad_version = tmp_path / "version.bin"
    bad_version.write_bytes(raw[:8] + bytes([raw[8] + 1]) + raw[9:])
    with pytest.raises(ContractError, match="format version"):
        load_checkpoint(bad_version)

    truncated = tmp_path / "short.bin"
    truncated.write_bytes(raw[:-8])
    with pytest.raises(ContractError, match="truncated"):
        load_checkpoint(truncated)

    padded = tmp_path / "long.bin"
    padded.write_bytes(raw + b"\x00" * 16)
    with pytest.raises(ContractError, match="trailing"):
        load_checkpoint(padded)
