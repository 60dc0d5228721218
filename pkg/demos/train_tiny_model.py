"""
Training a small mask estimator on synthetic speech
===================================================

Takes a couple of minutes on one CPU core.
"""
import logging
import tempfile

import numpy as np

from slidemask.data import read_manifest, synthesize_example, write_desk_corpus
from slidemask.enhance import denoise
from slidemask.metrics import si_sdr_db
from slidemask.nn import MaskEstimator, TrainConfig, count_params, prepare_example, reference_config, train

logging.basicConfig(level=logging.INFO, format="%(message)s")
root = tempfile.mkdtemp()
corpus = read_manifest(write_desk_corpus(f"{root}/train", n_speech=12, n_noise=8, seed=1))
held_out = read_manifest(write_desk_corpus(f"{root}/test", n_speech=4, n_noise=4, seed=2))

train_set = [prepare_example(e.clean, e.noisy)
             for e in (synthesize_example(corpus, i, seed=0) for i in range(16))]
test_set = [synthesize_example(held_out, i, seed=1, snr_db=0.0) for i in range(4)]

for w in (1, 8):
    cfg = reference_config("cdae", w, w)
    print(f"\ncontext {w}/{w}: {count_params(cfg)} parameters")
    model = MaskEstimator(cfg, seed=0)
    log = train(model, train_set, TrainConfig(epochs=3, batch_size=32))
    print("loss by epoch:", np.round(log.epoch_losses, 1))
    scores = [si_sdr_db(e.clean, denoise(model, e.noisy)) for e in test_set]
    print("held-out SI-SDR at 0 dB input: %.2f dB" % np.mean(scores))
