"""MLP container: forward passes, recording, init, and input gradients."""
import numpy as np
import pytest

from softaug import (ContractError, SeededRng, ShapeError, Tensor, forward_mlp,
                     grad_wrt_input, grad_wrt_params, init_mlp)
from softaug import autodiff as ad
from softaug.layers import Mlp


def _manual_forward(net, x):
    """Straight-line re-evaluation with plain numpy loops."""
    h = np.asarray(x, dtype=float)
    for li, (w, b) in enumerate(net.layers):
        pre = h @ w.value + b.value
        act = net.out_activation if li == len(net.layers) - 1 else "leaky-relu"
        if act == "leaky-relu":
            h = np.where(pre > 0.0, pre, net.slope * pre)
        elif act == "sigmoid":
            h = 1.0 / (1.0 + np.exp(-pre))
        else:
            h = pre
    return h


def test_identity_single_layer_leaky_relu():
    net = Mlp([(Tensor(np.eye(2)), Tensor(np.zeros((1, 2))))], slope=0.01)
    out = net.forward_values(np.array([[1.0, -1.0]]))
    assert np.array_equal(out, np.array([[1.0, -0.01]]))


def test_zero_network_outputs_zero():
    layers = [(Tensor(np.zeros((2, 4))), Tensor(np.zeros((1, 4)))),
              (Tensor(np.zeros((4, 1))), Tensor(np.zeros((1, 1))))]
    net = Mlp(layers)
    out = net.forward_values(np.array([[5.0, -7.0], [0.1, 0.2]]))
    assert np.array_equal(out, np.zeros((2, 1)))


def test_forward_matches_naive_reevaluation():
    net = init_mlp([2, 8, 1], SeededRng(31))
    x = SeededRng(32).normal(5, 2)
    assert np.array_equal(net.forward_values(x), _manual_forward(net, x))


def test_forward_values_equals_graph_forward():
    net = init_mlp([3, 6, 2], SeededRng(8), out_activation="sigmoid")
    x = SeededRng(9).normal(4, 3)
    assert np.array_equal(net.forward_values(x), net.forward(Tensor(x)).value)


def test_forward_mlp_record_replays_bit_exactly():
    net = init_mlp([2, 5, 1], SeededRng(12))
    x = SeededRng(13).normal(3, 2)
    plain, none_graph = forward_mlp(net, x, record=False)
    assert none_graph is None
    recorded, node = forward_mlp(net, x, record=True)
    assert np.array_equal(plain, recorded)
    assert np.array_equal(ad.replay(node), recorded)


def test_dimension_mismatch_names_the_layer():
    net = init_mlp([3, 4, 1], SeededRng(1))
    with pytest.raises(ShapeError, match="layer 0"):
        net.forward_values(np.zeros((2, 5)))


def test_init_mlp_xavier_bounds_and_zero_biases():
    dims = [7, 16, 4]
    net = init_mlp(dims, SeededRng(44))
    for (w, b), fan_in, fan_out in zip(net.layers, dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        assert np.all(np.abs(w.value) <= bound)
        assert np.array_equal(b.value, np.zeros((1, fan_out)))
        assert w.requires_grad and b.requires_grad
    assert net.n_in == 7 and net.n_out == 4


def test_init_mlp_rejects_bad_arguments():
    with pytest.raises(ContractError):
        init_mlp([5], SeededRng(0))
    with pytest.raises(ContractError):
        Mlp([(Tensor(np.zeros((2, 2))), Tensor(np.zeros((1, 2))))],
            out_activation="tanh")


def test_copy_is_equal_but_independent():
    net = init_mlp([2, 3, 1], SeededRng(71))
    dup = net.copy()
    assert net.checksum() == dup.checksum()
    dup.layers[0][0].value[0, 0] += 1.0
    assert net.checksum() != dup.checksum()
    assert net.layers[0][0] is not dup.layers[0][0]


def test_checksum_tracks_values():
    net = init_mlp([2, 2], SeededRng(3))
    before = net.checksum()
    assert before == net.checksum()
    net.layers[0][1].value[0, 0] = 0.5
    assert net.checksum() != before


def test_grad_wrt_params_shapes_match():
    net = init_mlp([2, 4, 1], SeededRng(5))
    out = net.forward(Tensor(SeededRng(6).normal(3, 2)))
    grads = grad_wrt_params(ad.mean_all(ad.square(out)), net.params())
    assert len(grads) == len(net.params())
    for g, p in zip(grads, net.params()):
        assert g.shape == p.value.shape
        assert np.all(np.isfinite(g))


def test_grad_wrt_input_requires_grad_flag():
    net = init_mlp([2, 4, 1], SeededRng(5))
    x_plain = Tensor(np.ones((3, 2)))
    with pytest.raises(ContractError):
        grad_wrt_input(net.forward(x_plain), x_plain)
    x = Tensor(np.ones((3, 2)), requires_grad=True)
    g = grad_wrt_input(net.forward(x), x)
    assert g.shape == (3, 2)


def test_grad_wrt_input_requires_column_output():
    net = init_mlp([2, 4, 2], SeededRng(5))
    x = Tensor(np.ones((3, 2)), requires_grad=True)
    with pytest.raises(ContractError):
        grad_wrt_input(net.forward(x), x)


def test_forward_rejects_non_finite():
    net = init_mlp([2, 3, 1], SeededRng(2))
    with np.errstate(invalid="ignore"), pytest.raises(ContractError):
        forward_mlp(net, np.array([[np.inf, 0.0]]))
