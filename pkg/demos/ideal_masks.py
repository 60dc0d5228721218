"""
Ideal ratio masks and what they buy you
=======================================
"""
import numpy as np

from slidemask.data import read_manifest, synthesize_example, write_desk_corpus
from slidemask.enhance import oracle_denoise
from slidemask.masking import ideal_ratio_mask
from slidemask.metrics import si_sdr_db
import tempfile

# a few hand-picked bins
S = np.array([1.0, 1.0, np.sqrt(3), 0.0])
N = np.array([0.0, 1.0, 1.0, 0.0])
for beta in (1.0, 0.5):
    print("beta", beta, "->", np.round(ideal_ratio_mask(S, N, beta), 4))

# on real mixtures the oracle mask is an upper bound for any mask estimator
corpus = read_manifest(write_desk_corpus(tempfile.mkdtemp(), n_speech=8, n_noise=6, seed=3))
for snr in (-5, 0, 10, 20):
    ex = synthesize_example(corpus, 0, seed=5, snr_db=snr)
    before = si_sdr_db(ex.clean, ex.noisy)
    after = si_sdr_db(ex.clean, oracle_denoise(ex.clean, ex.noisy, beta=1.0))
    print(f"{snr:>4} dB mixture: SI-SDR {before:6.2f} -> {after:6.2f} dB")
