import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morphflight.spectral import (
    KAPPA_THRESHOLD,
    ProbeSpectrum,
    amplitude_spectrum,
    kappa_band,
    resample_uniform,
    unsteadiness_report,
)

from oracles import sinusoid_amplitude_fit


def test_resample_uniform_grid():
    t = np.sort(np.random.default_rng(0).uniform(0.0, 10.0, 400))
    t[0], t[-1] = 0.0, 10.0
    x = np.sin(t)
    tu, xu = resample_uniform(t, x, rate=50.0)
    assert tu[1] - tu[0] == pytest.approx(0.02)
    # linear interpolation over a coarse random grid: O(h^2) error
    assert np.max(np.abs(xu - np.sin(tu))) < 1e-2


@given(st.integers(20, 320), st.floats(0.05, 2.0))
@settings(max_examples=25, deadline=None)
def test_amplitude_calibration(cycles, amp):
    # a bin-aligned sinusoid must report its amplitude within 1%
    # (off-bin tones suffer the usual Hann scalloping, up to ~15%)
    dt = 1.0 / 50.0
    n = 2000
    t = dt * np.arange(n)
    freq_hz = cycles / (n * dt)
    x = amp * np.sin(2 * np.pi * freq_hz * t + 0.4)
    omega, a = amplitude_spectrum(x, dt)
    k = np.argmin(np.abs(omega - 2 * np.pi * freq_hz))
    # Hann leakage spreads energy over ~3 bins; take the local peak
    peak = np.max(a[max(k - 2, 0) : k + 3])
    assert peak == pytest.approx(amp, rel=0.01)
    # cross-check against a least-squares sinusoid fit
    fit = sinusoid_amplitude_fit(t, x, 2 * np.pi * freq_hz)
    assert peak == pytest.approx(fit, rel=0.01)


def test_spectrum_mean_removed():
    dt = 0.02
    x = 5.0 + 0.1 * np.sin(2 * np.pi * 1.0 * dt * np.arange(1000))
    omega, a = amplitude_spectrum(x, dt)
    assert a[0] < 1e-6  # only window leakage of the tone remains at DC


def test_short_series_rejected():
    with pytest.raises(ValueError, match="too short"):
        amplitude_spectrum(np.zeros(8), 0.02)


def test_kappa_band_bounds():
    omega = np.array([0.0, 1.0, 2.0])
    amp = np.array([0.0, 1.0, 0.5])
    sp = kappa_band(omega, amp, semichord=0.075, v_series=[20.0, 25.0, 30.0])
    assert np.allclose(sp.kappa_min, 0.075 * omega / 30.0)
    assert np.allclose(sp.kappa_max, 0.075 * omega / 20.0)
    assert np.all(sp.kappa_min <= sp.kappa_max)
    with pytest.raises(ValueError):
        kappa_band(omega, amp, 0.075, [0.0, 25.0])


def test_kappa_arithmetic_example():
    # b = 0.075 m, omega = 0.628 rad/s, V = 25 m/s -> kappa = 0.001884
    sp = kappa_band(np.array([0.0, 0.628]), np.array([0.0, 1.0]), 0.075, [25.0])
    assert sp.kappa_max[1] == pytest.approx(0.075 * 0.628 / 25.0, rel=1e-12)
    assert sp.kappa_max[1] == pytest.approx(0.00188, abs=5e-6)


def test_unsteadiness_report_threshold_logic():
    # construct a spectrum with a strong line just above the kappa threshold
    v = 25.0
    b = 0.075
    omega_star = KAPPA_THRESHOLD * v / b  # 3.333 rad/s
    omega = np.linspace(0.0, 10.0, 101)
    amp = np.zeros_like(omega)
    target_omega = 2 * np.pi / 10.0
    amp[np.argmin(np.abs(omega - target_omega))] = 1.0
    k_hi = np.argmin(np.abs(omega - 1.2 * omega_star))
    amp[k_hi] = 0.3
    sp = kappa_band(omega, amp, b, [v])
    rep = unsteadiness_report(sp, target_period=10.0)
    assert rep.above_threshold_peak == pytest.approx(0.3)
    assert rep.power_ratio == pytest.approx(0.09)
    assert rep.exceeds_quasisteady  # 0.09 > 1e-2
    assert rep.critical_timescale == pytest.approx(2 * np.pi / omega_star)
    # weak high-frequency content does not trip the flag
    amp[k_hi] = 0.05
    rep2 = unsteadiness_report(kappa_band(omega, amp, b, [v]), target_period=10.0)
    assert not rep2.exceeds_quasisteady


def test_report_rejects_out_of_range_target():
    sp = kappa_band(np.linspace(0.0, 5.0, 50), np.zeros(50), 0.075, [25.0])
    with pytest.raises(ValueError, match="outside"):
        unsteadiness_report(sp, target_period=0.1)


def test_probe_spectrum_csv(tmp_path):
    sp = kappa_band(np.array([0.0, 1.0]), np.array([0.0, 0.5]), 0.075, [25.0], probe_id="w[0]")
    p = tmp_path / "spec.csv"
    sp.write_csv(p)
    header = p.read_text().splitlines()[0]
    assert header == "omega_rad_s,amplitude_rad,kappa_min,kappa_max"
