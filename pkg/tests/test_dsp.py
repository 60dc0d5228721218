import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slidemask import dsp
from slidemask.errors import InputTooShortError, ShapeError

CFG = dsp.StftConfig()


def dft_by_definition(frame):
    n = len(frame)
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    return (frame[None, :] * np.exp(-2j * np.pi * k * t / n)).sum(axis=1)


def test_defaults_give_paper_timing():
    assert CFG.frame_len == 128 and CFG.hop_len == 64
    assert CFG.frame_seconds() == pytest.approx(0.008)
    assert CFG.hop_seconds() == pytest.approx(0.004)
    assert CFG.n_freq == 65


def test_zero_input_gives_zero_grid():
    spec = dsp.stft(np.zeros(256))
    assert spec.shape == (3, 65)
    assert not spec.any()


@pytest.mark.parametrize("n", [128, 129, 191, 192, 1000, 16000])
def test_frame_count(n):
    assert dsp.stft(np.ones(n)).shape[0] == 1 + (n - 128) // 64


def test_too_short_raises():
    with pytest.raises(InputTooShortError, match="input too short"):
        dsp.stft(np.zeros(127))


def test_bin_centred_sinusoid_matches_direct_dft():
    k0, n = 9, 1024
    x = np.cos(2 * np.pi * k0 * np.arange(n) / 128 + 0.3)
    spec = dsp.stft(x)
    win = CFG.analysis_window()
    frames = dsp.frame_signal(x, CFG)
    for t in range(spec.shape[0]):
        ref = dft_by_definition(frames[t] * win)
        np.testing.assert_allclose(spec[t], ref, rtol=1e-9, atol=1e-9 * np.abs(ref).max())
    mag = np.abs(spec)
    assert np.all(mag.argmax(axis=1) == k0)
    # Hann leakage: only the two neighbouring bins are non-negligible
    rel = mag / mag[:, [k0]]
    np.testing.assert_allclose(rel[:, [k0 - 1, k0 + 1]], 0.5, atol=1e-12)
    others = np.delete(rel, [k0 - 1, k0, k0 + 1], axis=1)
    assert others.max() < 1e-12


def test_roundtrip_interior(rng):
    x = rng.uniform(-1, 1, 16000)
    y = dsp.istft(dsp.stft(x))
    sl = slice(128, len(y) - 128)
    assert np.max(np.abs(y[sl] - x[sl])) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(4 * 128, 3000), st.integers(0, 2**32 - 1))
def test_roundtrip_property(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    y = dsp.istft(dsp.stft(x))
    sl = slice(128, len(y) - 128)
    assert np.max(np.abs(y[sl] - x[sl])) < 1e-6


def test_istft_zero_and_length():
    out = dsp.istft(np.zeros((5, 65), complex), length=500)
    assert out.shape == (500,) and not out.any()


def test_istft_single_windowed_impulse():
    win = CFG.analysis_window()
    frame = np.zeros(128)
    frame[40] = 1.0
    spec = np.fft.rfft(frame * win)[None, :]
    # direct synthesis: irfft, synthesis window, divide by window^2
    direct = np.fft.irfft(spec[0], 128) * win / np.maximum(win * win, 1e-8)
    out = dsp.istft(spec)
    np.testing.assert_allclose(out, direct, atol=1e-12)
    assert out[40] == pytest.approx(1.0)


def test_istft_dimension_error():
    with pytest.raises(ShapeError):
        dsp.istft(np.zeros((3, 64), complex))


def test_parseval_against_windowed_energy(rng):
    x = rng.standard_normal(8000)
    spec = dsp.stft(x)
    weights = np.full(65, 2.0)
    weights[[0, -1]] = 1.0
    spectral = np.sum(weights * np.abs(spec) ** 2) / 128
    windowed = np.sum((dsp.frame_signal(x, CFG) * CFG.analysis_window()) ** 2)
    assert spectral == pytest.approx(windowed, rel=0.01)


@pytest.mark.parametrize("z, expected", [(3 + 4j, 5.0), (0j, 0.0), (-2 + 0j, 2.0)])
def test_magnitude(z, expected):
    assert dsp.magnitude(np.array([z]))[0] == expected


def test_normalize_two_values():
    grid = np.array([[0.0, 2.0], [2.0, 0.0]])
    out, stats = dsp.normalize(grid)
    assert stats.mean == 1.0 and stats.std == 1.0
    np.testing.assert_array_equal(out, [[-1, 1], [1, -1]])


def test_normalize_constant_uses_floor():
    out, stats = dsp.normalize(np.full((4, 65), 3.5))
    assert stats.std == dsp.STD_FLOOR
    assert not out.any()
    assert np.all(np.isfinite(out))


def test_normalize_inverse_and_moments(rng):
    grid = np.abs(rng.standard_normal((50, 65))) * 3
    out, stats = dsp.normalize(grid)
    assert abs(out.mean()) < 1e-9
    assert abs(out.std() - 1) < 1e-9
    np.testing.assert_allclose(stats.invert(out), grid, atol=1e-12)


@pytest.mark.parametrize("frame_len", [64, 128, 256, 512])
def test_freq_bins(frame_len):
    cfg = dsp.StftConfig(frame_len, frame_len // 2)
    assert dsp.stft(np.ones(2048), cfg).shape[1] == frame_len // 2 + 1


def test_bad_configs():
    with pytest.raises(ValueError):
        dsp.StftConfig(128, 0)
    with pytest.raises(ValueError):
        dsp.StftConfig(128, 129)
    with pytest.raises(ValueError):
        dsp.StftConfig(128, 64, "kaiser")
