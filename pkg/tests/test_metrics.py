import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slidemask.errors import ShapeError
from slidemask.metrics import (
    CAP_DB,
    MetricReport,
    lsd_db,
    read_report_csv,
    si_sdr_db,
    snr_db,
    write_report_csv,
)


def test_snr_examples(rng):
    ref = rng.standard_normal(1000)
    assert snr_db(ref, ref) == CAP_DB
    assert snr_db(ref, ref + ref) == pytest.approx(0.0, abs=1e-12)
    assert snr_db(ref, 2 * ref) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        snr_db(np.zeros(5), np.ones(5))
    with pytest.raises(ShapeError):
        snr_db(np.ones(5), np.ones(6))


def test_si_sdr_examples(rng):
    ref = rng.standard_normal(1000)
    for alpha in (0.01, 1.0, 3.7):
        assert si_sdr_db(ref, alpha * ref) == CAP_DB
    noise = rng.standard_normal(1000)
    noise -= noise @ ref / (ref @ ref) * ref
    noise *= np.linalg.norm(ref) / np.linalg.norm(noise)
    assert si_sdr_db(ref, ref + noise) == pytest.approx(0.0, abs=1e-9)
    deg = ref + 0.5 * rng.standard_normal(1000)
    assert si_sdr_db(ref, deg) == si_sdr_db(ref, 2 * deg)


@settings(max_examples=50)
@given(st.floats(1e-3, 1e3), st.integers(0, 2**31))
def test_si_sdr_scale_invariance(alpha, seed):
    r = np.random.default_rng(seed)
    ref = r.standard_normal(300)
    deg = ref + r.standard_normal(300)
    assert si_sdr_db(ref, alpha * deg) == pytest.approx(si_sdr_db(ref, deg), abs=1e-9)


def test_snr_decreases_with_error_norm(rng):
    ref = rng.standard_normal(500)
    e = rng.standard_normal(500)
    vals = [snr_db(ref, ref + g * e) for g in (0.01, 0.1, 0.5, 1.0, 4.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_lsd_examples(rng):
    ref = rng.uniform(0.1, 2.0, (10, 65))
    assert lsd_db(ref, ref) == 0.0
    assert lsd_db(ref, 10 * ref) == pytest.approx(20.0, abs=1e-6)
    half = ref.copy()
    half[:, ::2] *= 10  # 33 of 65 bins
    expected = np.sqrt(33 / 65) * 20
    assert lsd_db(ref, half) == pytest.approx(expected, abs=1e-6)
    even = rng.uniform(0.1, 2.0, (4, 64))
    mixed = even.copy()
    mixed[:, :32] *= 10
    assert lsd_db(even, mixed) == pytest.approx(np.sqrt(0.5) * 20, abs=1e-6)
    assert lsd_db(even, mixed) == pytest.approx(14.14, abs=1e-2)


def test_lsd_symmetric(rng):
    a = rng.uniform(0, 2, (8, 65))
    b = rng.uniform(0, 2, (8, 65))
    assert lsd_db(a, b) == pytest.approx(lsd_db(b, a), rel=1e-12)


def test_report_mean_and_csv(tmp_path):
    rep = MetricReport()
    rep.add(1.0, 2.0, 3.0)
    rep.add(3.0, 4.0, 5.0)
    assert rep.mean() == {"snr_db": 2.0, "si_sdr_db": 3.0, "lsd_db": 4.0}
    rows = [("cdae", 8, 8, "-5", "si_sdr_db", 1.25)]
    write_report_csv(tmp_path / "r.csv", rows)
    back = read_report_csv(tmp_path / "r.csv")
    assert back[0]["model"] == "cdae" and back[0]["value"] == 1.25
    assert list(back[0]) == ["model", "w_in", "w_out", "snr_bucket", "metric", "value"]
