from .pipeline import (
    CLIP_SECONDS,
    DatasetManifest,
    Example,
    MixSpec,
    apply_fades,
    build_clean_track,
    build_noise_track,
    fade_curve,
    fade_gain,
    mix_at_snr,
    peak_normalize,
    read_manifest,
    synthesize_example,
    write_manifest,
)
from .synthetic import NOISE_KINDS, noise_like, speech_like, write_desk_corpus
