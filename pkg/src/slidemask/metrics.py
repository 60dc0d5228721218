"""Objective quality metrics: SNR, SI-SDR and log-spectral distance."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError

CAP_DB = 200.0
LSD_EPS = 1e-8


def _pair(ref, deg):
    ref = np.asarray(ref, dtype=np.float64)
    deg = np.asarray(deg, dtype=np.float64)
    if ref.shape != deg.shape:
        raise ShapeError(f"length mismatch: ref {ref.shape} vs deg {deg.shape}")
    e_ref = float(np.dot(ref.ravel(), ref.ravel()))
    if e_ref == 0.0:
        raise ValueError("reference signal has zero energy")
    return ref, deg, e_ref


def _ratio_db(num: float, den: float) -> float:
    if den == 0.0:
        return CAP_DB
    return min(10.0 * math.log10(num / den), CAP_DB) if num > 0 else -CAP_DB


def snr_db(ref, deg) -> float:
    """``10 log10(|ref|^2 / |deg - ref|^2)``, capped at +200 dB."""
    ref, deg, e_ref = _pair(ref, deg)
    res = deg - ref
    return _ratio_db(e_ref, float(np.dot(res, res)))


def si_sdr_db(ref, deg) -> float:
    """Scale-invariant SDR: energy of ``deg``'s projection on ``ref`` over the rest."""
    ref, deg, e_ref = _pair(ref, deg)
    alpha = float(np.dot(deg, ref)) / e_ref
    target = alpha * ref
    res = deg - target
    return _ratio_db(float(np.dot(target, target)), float(np.dot(res, res)))


def lsd_db(ref_mag, deg_mag) -> float:
    """Log-spectral distance of two ``(T, F)`` magnitude grids, averaged over frames."""
    ref_mag = np.asarray(ref_mag, dtype=np.float64)
    deg_mag = np.asarray(deg_mag, dtype=np.float64)
    if ref_mag.shape != deg_mag.shape or ref_mag.ndim != 2:
        raise ShapeError(f"need equal (T, F) grids, got {ref_mag.shape} and {deg_mag.shape}")
    d = 20.0 * np.log10((deg_mag + LSD_EPS) / (ref_mag + LSD_EPS))
    return float(np.mean(np.sqrt(np.mean(d * d, axis=1))))


@dataclass
class MetricReport:
    """Per-example metric values and their means."""

    snr_db: list = field(default_factory=list)
    si_sdr_db: list = field(default_factory=list)
    lsd_db: list = field(default_factory=list)

    def add(self, snr, si_sdr, lsd) -> None:
        self.snr_db.append(snr)
        self.si_sdr_db.append(si_sdr)
        self.lsd_db.append(lsd)

    def __len__(self):
        return len(self.snr_db)

    def mean(self) -> dict:
        return {
            "snr_db": float(np.mean(self.snr_db)),
            "si_sdr_db": float(np.mean(self.si_sdr_db)),
            "lsd_db": float(np.mean(self.lsd_db)),
        }


def evaluate_pair(clean, estimate, clean_mag, estimate_mag) -> tuple[float, float, float]:
    return snr_db(clean, estimate), si_sdr_db(clean, estimate), lsd_db(clean_mag, estimate_mag)


REPORT_COLUMNS = ("model", "w_in", "w_out", "snr_bucket", "metric", "value")


def write_report_csv(path, rows) -> None:
    """Write rows of ``(model, w_in, w_out, snr_bucket, metric, value)``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for model, w_in, w_out, bucket, metric, value in rows:
            writer.writerow([model, w_in, w_out, bucket, metric, f"{value:.6f}"])


def read_report_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["value"] = float(r["value"])
    return rows
