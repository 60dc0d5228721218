import numpy as np
import pytest

from slidemask.context import ContextWindowConfig
from slidemask.nn import (
    AdamState,
    MaskEstimator,
    ModelConfig,
    adam_step,
    count_params,
    layer_shapes,
    param_increase_pct,
    reference_config,
)
from slidemask.nn.model import LayerSpec, conv, conv_t
from slidemask.errors import ShapeError


def tiny_config(arch="cdae", w_in=2, w_out=2, n_freq=9):
    encoder = (conv(3), LayerSpec("relu"), conv(4), LayerSpec("relu"))
    decoder = (conv_t(3), LayerSpec("relu"), conv_t(w_out), LayerSpec("sigmoid"))
    return ModelConfig(arch, encoder, decoder, ContextWindowConfig(w_in, w_out),
                       lstm_units=3 if arch == "crn" else None, n_freq=n_freq)


def flat_loss_grad_check(model, x, rng, h=1e-5, rtol=1e-4):
    y = model.forward(x)
    R = rng.standard_normal(y.shape)
    grads = model.backward(R)
    for (name, p), g in zip(model.parameters(), grads):
        fd = np.empty_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = np.sum(model.forward(x) * R)
            p[idx] = old - h
            dn = np.sum(model.forward(x) * R)
            p[idx] = old
            fd[idx] = (up - dn) / (2 * h)
        np.testing.assert_allclose(g, fd, rtol=rtol, atol=1e-8, err_msg=name)


@pytest.mark.parametrize("arch", ["cdae", "crn"])
def test_model_gradients(arch, rng):
    model = MaskEstimator(tiny_config(arch), seed=3)
    assert model.n_params <= 5000
    for _, p in model.parameters():
        p += 0.05 * rng.standard_normal(p.shape)  # non-zero biases
    flat_loss_grad_check(model, rng.standard_normal((2, 2, 9, 4)), rng)


def test_unused_parameter_has_zero_gradient(rng):
    model = MaskEstimator(tiny_config(), seed=0)
    x = rng.standard_normal((1, 2, 9, 3))
    x[:, 1] = 0.0  # second input channel is silent
    model.forward(x)
    grads = model.backward(np.ones((1, 2, 9, 3)))
    W0 = grads[0]  # first conv, shape (kernel, c_in, c_out)
    assert not W0[:, 1, :].any()
    assert W0[:, 0, :].any()


def test_gradients_scale_linearly(rng):
    model = MaskEstimator(tiny_config(), seed=0)
    x = rng.standard_normal((2, 2, 9, 3))
    R = rng.standard_normal((2, 2, 9, 3))
    model.forward(x)
    g1 = [g.copy() for g in model.backward(R)]
    model.forward(x)
    g2 = model.backward(2 * R)
    for a, b in zip(g1, g2):
        np.testing.assert_allclose(b, 2 * a, rtol=1e-13, atol=1e-300)


def test_reference_cdae_restores_65_bins():
    cfg = reference_config("cdae", 8, 8)
    shapes = layer_shapes(cfg)
    assert shapes[0] == (65, 8)
    assert (33, 8) in shapes and (9, 96) in shapes
    assert shapes[-1] == (65, 8)
    out = MaskEstimator(cfg).forward(np.zeros((8, 65, 5)))
    assert out.shape == (8, 65, 5)


@pytest.mark.parametrize("arch", ["cdae", "crn"])
@pytest.mark.parametrize("w", [(1, 1), (3, 1), (3, 3)])
def test_output_shape_and_range(arch, w, rng):
    model = MaskEstimator(reference_config(arch, *w), seed=1)
    for T in (1, 7):
        out = model.forward(rng.standard_normal((2, w[0], 65, T)) * 10)
        assert out.shape == (2, w[1], 65, T)
        assert np.all((out >= 0) & (out <= 1))


def test_zero_final_layer_gives_half(rng):
    model = MaskEstimator(reference_config("cdae", 3, 3), seed=0)
    last = [l for l in model.layers if l.params][-1]
    last.params["W"][:] = 0
    last.params["b"][:] = 0
    out = model.forward(rng.standard_normal((3, 65, 6)))
    assert np.all(out == 0.5)


def test_shape_mismatch_raises():
    model = MaskEstimator(reference_config("cdae", 3, 3))
    with pytest.raises(ShapeError):
        model.forward(np.zeros((2, 65, 4)))
    with pytest.raises(ShapeError):
        model.forward(np.zeros((3, 64, 4)))


def test_time_mixing_cdae_vs_crn(rng):
    T, t0 = 12, 5
    for arch in ("cdae", "crn"):
        model = MaskEstimator(tiny_config(arch, 1, 1), seed=2)
        for _, p in model.parameters():
            p += 0.1 * rng.standard_normal(p.shape)
        x = np.zeros((1, 1, 9, T))
        base = model.forward(x)
        x[0, 0, :, t0] = 3.0
        diff = np.abs(model.forward(x) - base).max(axis=(0, 1, 2))
        assert np.all(diff[:t0] == 0)  # never earlier
        assert diff[t0] > 0
        if arch == "cdae":
            assert np.all(diff[t0 + 1 :] == 0)
        else:
            assert np.any(diff[t0 + 1 :] > 0)


def test_count_params_conv_formula():
    cfg = ModelConfig(
        "cdae",
        (LayerSpec("conv2d-freq", 16, 3, 1, 1), LayerSpec("relu")),
        (LayerSpec("conv2d-freq", 1, 1, 1, 0), LayerSpec("sigmoid")),
        n_freq=65,
    )
    # 16*1*3 + 16 for the first conv, 1*16*1 + 1 for the 1x1 head
    assert count_params(cfg) == 64 + 17


@pytest.mark.parametrize("arch", ["cdae", "crn"])
@pytest.mark.parametrize("w", [(1, 1), (8, 1), (8, 8), (13, 13)])
def test_count_params_matches_instantiated(arch, w):
    cfg = reference_config(arch, *w)
    assert count_params(cfg) == MaskEstimator(cfg).n_params


def test_context_only_changes_first_and_last_layers():
    base = MaskEstimator(reference_config("cdae", 1, 1))
    wide = MaskEstimator(reference_config("cdae", 8, 8))
    shapes_b = [p.shape for _, p in base.parameters()]
    shapes_w = [p.shape for _, p in wide.parameters()]
    changed = [i for i, (a, b) in enumerate(zip(shapes_b, shapes_w)) if a != b]
    assert changed == [0, len(shapes_b) - 2, len(shapes_b) - 1]


def test_reference_param_increase_is_negligible():
    pct = param_increase_pct(reference_config("cdae", 8, 8), reference_config("cdae", 1, 1))
    assert 0 < pct <= 1.1
    crn = param_increase_pct(reference_config("crn", 8, 8), reference_config("crn", 1, 1))
    assert 0 < crn < pct


def test_invalid_configs():
    with pytest.raises(ValueError, match="restore|frequency bins"):
        ModelConfig("cdae", (conv(4),), (conv_t(1, padding=0), LayerSpec("sigmoid")), n_freq=65)
    with pytest.raises(ValueError, match="sigmoid"):
        ModelConfig("cdae", (conv(4),), (conv_t(1), LayerSpec("relu")), n_freq=65)
    with pytest.raises(ValueError, match="LSTM"):
        ModelConfig("crn", (conv(4),), (conv_t(1), LayerSpec("sigmoid")), n_freq=65)


def test_config_roundtrip_dict():
    cfg = reference_config("crn", 8, 8)
    assert ModelConfig.from_dict(cfg.to_dict()) == cfg


def test_flat_roundtrip():
    model = MaskEstimator(reference_config("cdae", 3, 1), seed=4)
    other = MaskEstimator(reference_config("cdae", 3, 1), seed=5)
    other.set_flat(model.get_flat())
    np.testing.assert_array_equal(other.get_flat(), model.get_flat())


def test_same_seed_same_init():
    a = MaskEstimator(reference_config("crn", 3, 3), seed=7).get_flat()
    b = MaskEstimator(reference_config("crn", 3, 3), seed=7).get_flat()
    assert a.tobytes() == b.tobytes()


# ---------------------------------------------------------------- Adam


def test_adam_zero_gradient_keeps_params(rng):
    p = [rng.standard_normal(5)]
    before = p[0].copy()
    adam_step(p, [np.zeros(5)], AdamState())
    np.testing.assert_array_equal(p[0], before)


def test_adam_first_step_is_signed_lr(rng):
    p = [np.zeros(6)]
    g = np.array([3.0, -2.0, 1e-3, -1e-3, 50.0, -0.5])
    adam_step(p, [g], AdamState(), lr=5e-4)
    # first step: m_hat = g, v_hat = g^2, update = -lr * g / (|g| + eps)
    np.testing.assert_allclose(p[0], -5e-4 * g / (np.abs(g) + 1e-8), rtol=1e-12)
    np.testing.assert_allclose(p[0], -5e-4 * np.sign(g), rtol=1e-5)


def test_adam_matches_reference_recursion(rng):
    p = [rng.standard_normal(4)]
    ref = p[0].copy()
    m = np.zeros(4)
    v = np.zeros(4)
    state = AdamState()
    for t in range(1, 6):
        g = rng.standard_normal(4)
        adam_step(p, [g], state, lr=1e-2)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        ref -= 1e-2 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
        np.testing.assert_allclose(p[0], ref, rtol=1e-13)


def test_adam_shape_check():
    with pytest.raises(ValueError):
        adam_step([np.zeros(3)], [np.zeros(4)], AdamState())
