"""Command-line entry point: ``slidemask {synth,train,denoise,eval,latency}``.

Exit codes: 0 success, 1 usage/config error, 2 data or format error,
3 numerical failure during training.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dsp
from .audio import read_wav, write_wav
from .config import RunConfig
from .context import ContextWindowConfig
from .data.pipeline import read_manifest, synthesize_example
from .enhance import denoise, estimate_mask, oracle_denoise
from .errors import ConfigError, DataError, NumericalError, SlidemaskError
from .gridio import save_grid
from .masking import apply_mask
from .metrics import MetricReport, evaluate_pair, write_report_csv
from .nn import (
    MaskEstimator,
    TrainConfig,
    load_checkpoint,
    prepare_example,
    reference_config,
    save_checkpoint,
    train,
)

log = logging.getLogger("slidemask")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
METADATA_FILE = "metadata.tsv"
METADATA_COLUMNS = (
    "index", "seed", "snr_db", "noise_scale", "headroom", "segment_gains_db",
    "segment_fades_s", "noise_fade_s", "noise_file",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- commands


def cmd_synth(manifest_path, out_dir, seed: int, count: int, snr_db=None,
              stft_cfg=dsp.StftConfig()) -> Path:
    """Write ``count`` clean/noise/noisy WAV triplets plus ``metadata.tsv``.

    The three tracks of an example share one headroom gain so that the
    noisy mix fits 16-bit PCM without clipping; SNR is unaffected.
    """
    manifest = read_manifest(manifest_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for index in range(count):
        ex = synthesize_example(manifest, index, seed, snr_db, stft_cfg)
        peak = max(np.max(np.abs(ex.clean)), np.max(np.abs(ex.noise)), np.max(np.abs(ex.noisy)))
        headroom = 0.99 / peak
        stem = out / f"{index:05d}"
        write_wav(f"{stem}_clean.wav", headroom * ex.clean)
        write_wav(f"{stem}_noise.wav", headroom * ex.noise)
        write_wav(f"{stem}_noisy.wav", headroom * ex.noisy)
        spec = ex.spec
        rows.append([
            index, seed, f"{spec.snr_db:.6f}", f"{ex.noise_scale:.9g}", f"{headroom:.9g}",
            ",".join(f"{g:.6f}" for g in spec.segment_gains_db),
            ",".join(f"{f:.6f}" for f in spec.segment_fades_s),
            f"{spec.noise_fade_s:.6f}", Path(ex.noise_file).name,
        ])
    with open(out / METADATA_FILE, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(METADATA_COLUMNS)
        writer.writerows(rows)
    return out


def read_metadata(dataset_dir) -> list[dict]:
    path = Path(dataset_dir) / METADATA_FILE
    if not path.is_file():
        raise DataError(f"{path}: dataset metadata not found")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))


def load_triplet(dataset_dir, index: int):
    stem = Path(dataset_dir) / f"{int(index):05d}"
    return read_wav(f"{stem}_clean.wav"), read_wav(f"{stem}_noisy.wav")


def cmd_train(config: RunConfig, dataset_dir, checkpoint_out, loss_csv=None):
    """Train a reference model on a synthesized dataset; return the training log."""
    rows = read_metadata(dataset_dir)
    if not rows:
        raise DataError(f"{dataset_dir}: dataset is empty")
    stft_cfg = config.stft_config()
    examples = [prepare_example(*load_triplet(dataset_dir, r["index"]), stft_cfg) for r in rows]
    ctx = config.context_config()
    model_cfg = reference_config(config.get("model", "architecture"), ctx.w_in, ctx.w_out,
                                 stft_cfg.n_freq)
    t = config.values["train"]
    train_cfg = TrainConfig(
        learning_rate=t["learning_rate"], batch_size=t["batch_size"], epochs=t["epochs"],
        seed=t["seed"], chunk_frames=t["chunk_frames"],
    )
    model = MaskEstimator(model_cfg, seed=train_cfg.seed)
    history = train(model, examples, train_cfg)
    save_checkpoint(checkpoint_out, model)
    loss_csv = Path(loss_csv) if loss_csv else Path(f"{checkpoint_out}.loss.csv")
    with open(loss_csv, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss"])
        for i, loss in enumerate(history.epoch_losses, 1):
            writer.writerow([i, repr(loss)])
    return history


def _context_for(model, w_in, w_out) -> ContextWindowConfig:
    native = model.config.context
    w_in = native.w_in if w_in is None else w_in
    w_out = native.w_out if w_out is None else w_out
    if w_in != native.w_in:
        raise UsageError(f"checkpoint was trained with w_in={native.w_in}, not {w_in}")
    if w_out not in (1, native.w_out):
        raise UsageError(f"checkpoint emits w_out={native.w_out}; use {native.w_out} or 1")
    return ContextWindowConfig(w_in, w_out)


def cmd_denoise(checkpoint, in_wav, out_wav, w_in=None, w_out=None, mask_out=None,
                stft_cfg=dsp.StftConfig()):
    model = load_checkpoint(checkpoint)
    ctx = _context_for(model, w_in, w_out)
    noisy = read_wav(in_wav)
    mask, Y = estimate_mask(model, noisy, ctx, stft_cfg)
    if mask_out:
        save_grid(mask_out, mask)
    enhanced = dsp.istft(apply_mask(mask, Y), stft_cfg, length=len(noisy))
    write_wav(out_wav, enhanced)
    return enhanced


def nearest_bucket(snr: float, buckets) -> float:
    return min(buckets, key=lambda b: (abs(b - snr), b))


def _fmt_bucket(b) -> str:
    return "all" if b == "all" else f"{b:g}"


def cmd_eval(dataset_dir, report_csv, checkpoint=None, oracle_beta=None, w_in=None,
             w_out=None, buckets=(-5.0, 0.0, 10.0, 20.0), stft_cfg=dsp.StftConfig()):
    """Score a checkpoint (or the oracle IRM) against the noisy input, per SNR bucket.

    Each example goes to the bucket nearest its mixing SNR. Returns the
    report rows that were written.
    """
    rows = read_metadata(dataset_dir)
    if not rows:
        raise DataError(f"{dataset_dir}: dataset is empty")
    if (checkpoint is None) == (oracle_beta is None):
        raise UsageError("give exactly one of a checkpoint or the oracle mask")
    if checkpoint is not None:
        model = load_checkpoint(checkpoint)
        ctx = _context_for(model, w_in, w_out)
        name = model.config.architecture
    else:
        model, ctx, name = None, None, "oracle_irm"
    reports = {"noisy": {}, name: {}}
    for r in rows:
        clean, noisy = load_triplet(dataset_dir, r["index"])
        if model is not None:
            enhanced = denoise(model, noisy, ctx, stft_cfg)
        else:
            enhanced = oracle_denoise(clean, noisy, oracle_beta, stft_cfg)
        bucket = nearest_bucket(float(r["snr_db"]), buckets)
        clean_mag = dsp.magnitude(dsp.stft(clean, stft_cfg))
        for label, signal in (("noisy", noisy), (name, enhanced)):
            values = evaluate_pair(clean, signal, clean_mag, dsp.magnitude(dsp.stft(signal, stft_cfg)))
            for key in (bucket, "all"):
                reports[label].setdefault(key, MetricReport()).add(*values)
    out_rows = []
    w = (ctx.w_in, ctx.w_out) if ctx else (0, 0)
    for b in buckets:
        if b not in reports[name]:
            log.warning("no examples in the %g dB bucket; omitted", b)
    for label in ("noisy", name):
        wi, wo = (0, 0) if label == "noisy" else w
        for key in [b for b in buckets if b in reports[label]] + ["all"]:
            for metric, value in reports[label][key].mean().items():
                out_rows.append((label, wi, wo, _fmt_bucket(key), metric, value))
    write_report_csv(report_csv, out_rows)
    return out_rows


def latency_ms(w: int, hop_samples: int, sample_rate: int) -> Fraction:
    if w < 1 or hop_samples < 1 or sample_rate < 1:
        raise UsageError("w, hop and sample rate must be positive")
    return Fraction((w - 1) * hop_samples * 1000, sample_rate)


def cmd_latency(w: int, hop_samples: int = 64, sample_rate: int = dsp.SAMPLE_RATE) -> str:
    ms = latency_ms(w, hop_samples, sample_rate)
    text = f"{float(ms):g} ms"
    print(text)
    return text


# ---------------------------------------------------------------- argparse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="slidemask", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--seed", type=int, help="seed for every random draw")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize a dataset of WAV triplets")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--count", type=int)
    s.add_argument("--snr-db", type=float, help="fix the mixing SNR instead of drawing it")

    t = sub.add_parser("train", help="train a mask estimator")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--loss-csv")
    t.add_argument("--model", choices=("cdae", "crn"))
    t.add_argument("--w-in", type=int)
    t.add_argument("--w-out", type=int)
    t.add_argument("--epochs", type=int)

    d = sub.add_parser("denoise", help="denoise a WAV file")
    d.add_argument("--checkpoint", required=True)
    d.add_argument("--input", required=True)
    d.add_argument("--output", required=True)
    d.add_argument("--w-in", type=int)
    d.add_argument("--w-out", type=int)
    d.add_argument("--mask-out", help="also save the estimated mask as a grid file")

    e = sub.add_parser("eval", help="score a model on a dataset, per SNR bucket")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--checkpoint")
    src.add_argument("--oracle", action="store_true", help="use the ideal ratio mask")
    e.add_argument("--data", required=True)
    e.add_argument("--report", required=True)
    e.add_argument("--beta", type=float)
    e.add_argument("--w-in", type=int)
    e.add_argument("--w-out", type=int)

    lat = sub.add_parser("latency", help="added latency of a context window")
    lat.add_argument("--w", type=int, required=True)
    lat.add_argument("--hop", type=int, default=64, help="hop in samples")
    lat.add_argument("--sample-rate", type=int, default=dsp.SAMPLE_RATE)
    return p


def _run(args) -> None:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is not None:
        config.set("train", "seed", args.seed)
        config.set("data", "seed", args.seed)
    for key in ("model", "w_in", "w_out", "epochs", "beta"):
        value = getattr(args, key, None)
        if value is not None:
            section = {"model": "model", "epochs": "train", "beta": "eval"}.get(key, "context")
            config.set(section, "architecture" if key == "model" else key, value)
    stft_cfg = config.stft_config()

    if args.command == "synth":
        count = args.count if args.count is not None else config.get("data", "count")
        snr = args.snr_db
        if snr is None and config.get("data", "snr_db") != "":
            snr = float(config.get("data", "snr_db"))
        cmd_synth(args.manifest, args.out, config.get("data", "seed"), count, snr, stft_cfg)
    elif args.command == "train":
        try:
            config.context_config()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        cmd_train(config, args.data, args.out, args.loss_csv)
    elif args.command == "denoise":
        cmd_denoise(args.checkpoint, args.input, args.output, args.w_in, args.w_out,
                    args.mask_out, stft_cfg)
    elif args.command == "eval":
        cmd_eval(
            args.data, args.report,
            checkpoint=args.checkpoint,
            oracle_beta=config.get("eval", "beta") if args.oracle else None,
            w_in=args.w_in, w_out=args.w_out,
            buckets=config.snr_buckets(), stft_cfg=stft_cfg,
        )
    elif args.command == "latency":
        cmd_latency(args.w, args.hop, args.sample_rate)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        _run(args)
    except (UsageError, ConfigError) as exc:
        print(f"slidemask: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"slidemask: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SlidemaskError, OSError, ValueError) as exc:
        print(f"slidemask: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
