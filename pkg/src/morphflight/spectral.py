"""Reduced-frequency certification of maneuver unsteadiness.

Probe angle-of-attack histories are resampled to a uniform rate, Fourier
analyzed with an amplitude-calibrated Hann window, and mapped into reduced
frequency kappa = b*omega/V. Because the probe airspeed varies over a
maneuver, kappa is bounded: using the minimum airspeed gives kappa_max and
the maximum gives kappa_min; the exact value lies in between. Threshold
decisions use kappa_max (the conservative direction).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

RESAMPLE_HZ = 50.0
KAPPA_THRESHOLD = 0.01
POWER_RATIO_LIMIT = 1e-2  # above-threshold content beyond this exceeds quasisteady validity
MIN_SERIES_LENGTH = 16


@dataclass(frozen=True)
class ProbeSpectrum:
    omega: np.ndarray  # rad/s
    amplitude: np.ndarray  # rad
    kappa_min: np.ndarray
    kappa_max: np.ndarray
    semichord: float
    v_min: float
    v_max: float
    probe_id: str = ""

    def __post_init__(self):
        if np.any(self.kappa_min > self.kappa_max + 1e-15):
            raise ValueError("kappa_min must not exceed kappa_max")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega_rad_s", "amplitude_rad", "kappa_min", "kappa_max"])
            for row in zip(self.omega, self.amplitude, self.kappa_min, self.kappa_max):
                w.writerow([f"{v:.10g}" for v in row])


@dataclass(frozen=True)
class UnsteadinessReport:
    threshold: float
    target_omega: float  # rad/s
    target_amplitude: float  # rad
    above_threshold_peak: float  # rad
    power_ratio: float
    critical_timescale: float  # s
    exceeds_quasisteady: bool
    probe_id: str = ""

    def __post_init__(self):
        if self.power_ratio < 0:
            raise ValueError("power ratio must be non-negative")

    def summary(self) -> str:
        lines = [
            f"probe:              {self.probe_id or '(unnamed)'}",
            f"threshold kappa*:   {self.threshold:g}",
            f"target peak:        {self.target_amplitude:.4e} rad "
            f"({np.degrees(self.target_amplitude):.4f} deg) at {self.target_omega:.4f} rad/s",
            f"above-threshold:    {self.above_threshold_peak:.4e} rad "
            f"({np.degrees(self.above_threshold_peak):.4f} deg)",
            f"power ratio:        {self.power_ratio:.3e}",
            f"critical timescale: {self.critical_timescale:.3f} s",
            f"quasisteady valid:  {'NO - above-threshold content significant' if self.exceeds_quasisteady else 'yes'}",
        ]
        return "\n".join(lines)


def resample_uniform(t, x, rate: float = RESAMPLE_HZ):
    """Linear-interpolation resample onto a uniform grid at `rate` Hz."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two samples to resample")
    dt = 1.0 / rate
    n = int(np.floor((t[-1] - t[0]) / dt)) + 1
    tu = t[0] + dt * np.arange(n)
    return tu, np.interp(tu, t, x)


def amplitude_spectrum(x, dt: float):
    """Hann-windowed single-sided amplitude spectrum, mean removed.

    Calibrated so a pure sinusoid of amplitude A reports A at its bin.
    Returns (omega [rad/s], amplitude).
    """
    x = np.asarray(x, dtype=float)
    if x.size < MIN_SERIES_LENGTH:
        raise ValueError(f"series too short for spectral analysis (< {MIN_SERIES_LENGTH})")
    n = x.size
    w = np.hanning(n)
    spec = np.fft.rfft(w * (x - np.mean(x)))
    amp = 2.0 * np.abs(spec) / np.sum(w)
    amp[0] = np.abs(spec[0]) / np.sum(w)
    if n % 2 == 0:
        amp[-1] /= 2.0
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, dt)
    return omega, amp


def kappa_band(omega, amplitude, semichord: float, v_series, probe_id: str = "") -> ProbeSpectrum:
    """Bound the reduced frequency of each spectral line by the airspeed range."""
    v = np.asarray(v_series, dtype=float)
    if np.any(v <= 0):
        raise ValueError("airspeed series must be strictly positive")
    omega = np.asarray(omega, dtype=float)
    v_min, v_max = float(np.min(v)), float(np.max(v))
    return ProbeSpectrum(
        omega=omega,
        amplitude=np.asarray(amplitude, dtype=float),
        kappa_min=semichord * omega / v_max,
        kappa_max=semichord * omega / v_min,
        semichord=semichord,
        v_min=v_min,
        v_max=v_max,
        probe_id=probe_id,
    )


def probe_spectrum(trajectory, probe_id: str, semichord: float, rate: float = RESAMPLE_HZ) -> ProbeSpectrum:
    """Spectrum of one trajectory probe's angle-of-attack history."""
    rec = trajectory.probes[probe_id]
    tu, phi = resample_uniform(trajectory.t, rec["phi"], rate)
    omega, amp = amplitude_spectrum(phi, 1.0 / rate)
    return kappa_band(omega, amp, semichord, rec["v"], probe_id=probe_id)


def unsteadiness_report(
    spectrum: ProbeSpectrum,
    target_period: float,
    threshold: float = KAPPA_THRESHOLD,
) -> UnsteadinessReport:
    """Certify a probe spectrum against the quasisteady validity threshold."""
    omega_t = 2.0 * np.pi / target_period
    if not (spectrum.omega[0] <= omega_t <= spectrum.omega[-1]):
        raise ValueError(
            f"target frequency {omega_t:.4g} rad/s outside spectrum range "
            f"[{spectrum.omega[0]:.4g}, {spectrum.omega[-1]:.4g}]"
        )
    k_target = int(np.argmin(np.abs(spectrum.omega - omega_t)))
    target_amp = float(spectrum.amplitude[k_target])
    above = spectrum.kappa_max > threshold
    peak = float(np.max(spectrum.amplitude[above])) if np.any(above) else 0.0
    ratio = (peak / target_amp) ** 2 if target_amp > 0 else (np.inf if peak > 0 else 0.0)
    omega_star = threshold * spectrum.v_min / spectrum.semichord
    return UnsteadinessReport(
        threshold=threshold,
        target_omega=float(spectrum.omega[k_target]),
        target_amplitude=target_amp,
        above_threshold_peak=peak,
        power_ratio=float(ratio),
        critical_timescale=float(2.0 * np.pi / omega_star),
        exceeds_quasisteady=bool(ratio > POWER_RATIO_LIMIT),
        probe_id=spectrum.probe_id,
    )
