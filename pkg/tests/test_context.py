import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slidemask.context import (
    ContextWindowConfig,
    combine,
    coverage_counts,
    frame_windows,
    latency,
    run_sliding_inference,
)
from slidemask.errors import InputTooShortError, ShapeError


def brute_force_combine(est, T, w):
    """Enumerate every (window, frame) pair and average per frame."""
    F = est.shape[2]
    sums = [np.zeros(F) for _ in range(T)]
    counts = [0] * T
    for k in range(T - w + 1):
        for j in range(w):
            sums[k + j] = sums[k + j] + est[k, j]
            counts[k + j] += 1
    return np.array([s / c for s, c in zip(sums, counts)]), np.array(counts)


def paper_counts(T, w):
    """Denominators of the start / steady / end regimes, 1-based frame index t.

    Valid when T >= 2w - 1; shorter sequences make the regimes overlap.
    """
    out = []
    for t in range(1, T + 1):
        if t <= w - 1:
            out.append(t)
        elif t <= T - w + 1:
            out.append(w)
        else:
            out.append(T - t + 1)
    return np.array(out)


def test_frame_windows_enumeration():
    Y = np.arange(5 * 2, dtype=float).reshape(5, 2)
    win = frame_windows(Y, 3)
    assert win.shape == (3, 3, 2)
    for k in range(3):
        np.testing.assert_array_equal(win[k], Y[k : k + 3])


def test_frame_windows_edges():
    Y = np.random.default_rng(0).standard_normal((6, 4))
    assert frame_windows(Y, 1).shape == (6, 1, 4)
    np.testing.assert_array_equal(frame_windows(Y, 6)[0], Y)
    with pytest.raises(InputTooShortError, match="shorter than window"):
        frame_windows(Y, 7)


def test_counts_w3_T6():
    np.testing.assert_array_equal(coverage_counts(6, 3), [1, 2, 3, 3, 2, 1])


def test_combine_w3_T6_against_brute_force(rng):
    est = rng.uniform(0, 1, (4, 3, 5))
    ref, counts = brute_force_combine(est, 6, 3)
    np.testing.assert_array_equal(counts, [1, 2, 3, 3, 2, 1])
    np.testing.assert_allclose(combine(est, 6, 3), ref, rtol=0, atol=1e-15)


def test_combine_oracle_all_sizes(rng):
    for T in range(1, 33):
        for w in range(1, T + 1):
            est = rng.uniform(0, 1, (T - w + 1, w, 3))
            ref, counts = brute_force_combine(est, T, w)
            if T >= 2 * w - 1:
                np.testing.assert_array_equal(counts, paper_counts(T, w))
            t = np.arange(1, T + 1)
            np.testing.assert_array_equal(
                counts, np.minimum.reduce([t, np.full(T, w), T - t + 1, np.full(T, T - w + 1)])
            )
            np.testing.assert_array_equal(coverage_counts(T, w), counts)
            assert np.max(np.abs(combine(est, T, w) - ref)) <= 1e-15


def test_combine_identity_for_w1(rng):
    est = rng.uniform(0, 1, (7, 1, 4))
    np.testing.assert_array_equal(combine(est, 7, 1), est[:, 0])


def test_combine_constant_is_idempotent():
    est = np.full((5, 4, 3), 0.37)
    np.testing.assert_allclose(combine(est, 8, 4), 0.37, rtol=0, atol=1e-16)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 2**31))
def test_combine_convexity(T, w, seed):
    w = min(w, T)
    est = np.random.default_rng(seed).uniform(0, 1, (T - w + 1, w, 2))
    out = combine(est, T, w)
    for t in range(T):
        contrib = [est[k, t - k] for k in range(max(0, t - w + 1), min(t, T - w) + 1)]
        lo, hi = np.min(contrib, axis=0), np.max(contrib, axis=0)
        assert np.all(out[t] >= lo - 1e-15) and np.all(out[t] <= hi + 1e-15)
    assert np.all((out >= 0) & (out <= 1))


def test_combine_causality(rng):
    """Frame t is final once window t (0-based, the last covering it) is in."""
    T, w = 12, 4
    est = rng.uniform(0, 1, (T - w + 1, w, 2))
    full = combine(est, T, w)
    for t in range(T - w + 1):
        # perturb every window that starts after t: frames <= t must not move
        other = est.copy()
        other[t + 1 :] = rng.uniform(0, 1, other[t + 1 :].shape)
        np.testing.assert_array_equal(combine(other, T, w)[: t + 1], full[: t + 1])


def test_combine_shape_errors():
    with pytest.raises(ShapeError):
        combine(np.zeros((4, 3, 2)), 7, 3)
    with pytest.raises(ShapeError):
        combine(np.zeros((4, 2, 2)), 6, 3)


def test_latency_values():
    assert latency(1, 0.004) == 0.0
    assert latency(3, 0.004) == pytest.approx(0.008, abs=1e-15)
    assert latency(13, 0.004) == pytest.approx(0.048, abs=1e-15)
    with pytest.raises(ValueError):
        latency(0, 0.004)


@given(st.integers(1, 100), st.floats(1e-4, 1.0))
def test_latency_linear(w, hop):
    assert latency(w, hop) == pytest.approx((w - 1) * hop)
    assert latency(w + 1, hop) - latency(w, hop) == pytest.approx(hop)


def test_context_config_validation():
    ContextWindowConfig(8, 8)
    ContextWindowConfig(8, 1)
    with pytest.raises(ValueError):
        ContextWindowConfig(8, 4)
    with pytest.raises(ValueError):
        ContextWindowConfig(0, 1)


class ClipStub:
    """Deterministic model: returns its input windows clipped to [0, 1]."""

    def __init__(self, w_out):
        self.w_out = w_out

    def predict(self, windows):
        clipped = np.clip(windows, 0, 1)
        return clipped if self.w_out > 1 else clipped[:, -1:]


def test_sliding_inference_stub_equals_combine(rng):
    Y = rng.uniform(-0.5, 1.5, (20, 5))
    out = run_sliding_inference(ClipStub(4), Y, ContextWindowConfig(4, 4))
    expected = combine(np.clip(frame_windows(Y, 4), 0, 1), 20, 4)
    np.testing.assert_array_equal(out, expected)
    # every window sees the same frame value, so averaging reproduces it
    np.testing.assert_allclose(out, np.clip(Y, 0, 1), atol=1e-15)


def test_sliding_inference_w1_is_per_frame(rng):
    Y = rng.uniform(-0.5, 1.5, (9, 5))
    out = run_sliding_inference(ClipStub(1), Y, ContextWindowConfig(1, 1))
    np.testing.assert_array_equal(out, np.clip(Y, 0, 1))


def test_sliding_inference_newest_frame_mode(rng):
    Y = rng.uniform(0, 1, (5, 3))
    out = run_sliding_inference(ClipStub(1), Y, ContextWindowConfig(3, 1))
    assert out.shape == (5, 3)
    np.testing.assert_array_equal(out[2:], Y[2:])
    # warm-up frames reuse the first window's estimate
    np.testing.assert_array_equal(out[0], Y[2])
    np.testing.assert_array_equal(out[1], Y[2])


def test_sliding_inference_rejects_bad_model_shape(rng):
    with pytest.raises(ShapeError):
        run_sliding_inference(ClipStub(1), rng.uniform(0, 1, (6, 3)), ContextWindowConfig(3, 3))
