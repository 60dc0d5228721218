"""
Analysis and resynthesis of a short waveform
============================================

Frames of 128 samples, hop 64, periodic Hann window.
"""
import numpy as np

from slidemask import dsp

rng = np.random.default_rng(0)
x = rng.uniform(-1, 1, dsp.SAMPLE_RATE)

cfg = dsp.StftConfig()
Y = dsp.stft(x, cfg)
print("spectrogram shape (frames, bins):", Y.shape)
print("frame hop in ms:", 1000 * cfg.hop_seconds())

# weighted overlap-add brings the signal back; only the edges lack full coverage
y = dsp.istft(Y, cfg, length=len(x))
interior = slice(cfg.frame_len, len(x) - cfg.frame_len)
print("max interior error:", np.max(np.abs(y[interior] - x[interior])))

# the network sees a per-utterance normalized magnitude
Ybar, stats = dsp.normalize(dsp.magnitude(Y))
print("normalized mean/std: %.3g / %.3g" % (Ybar.mean(), Ybar.std()))
print("stored stats:", stats)
