"""Time-frequency soft masking with sliding context-window averaging."""
from .context import (
    ContextWindowConfig,
    combine,
    coverage_counts,
    frame_windows,
    latency,
    run_sliding_inference,
)
from .dsp import NormalizationStats, StftConfig, istft, magnitude, normalize, stft
from .enhance import ConstantMask, denoise, oracle_denoise
from .masking import LossReport, apply_mask, compressed_mse, ideal_ratio_mask
from .metrics import lsd_db, si_sdr_db, snr_db

__version__ = "0.1.0"
