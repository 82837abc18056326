"""Wavelet transform and amplitude spectrum."""

import math

import numpy as np
import pytest

from vines import (DomainError, SimState, SystemParams, amplitude_spectrum,
                   cwt_morlet, default_scales, scale_frequencies, simulate)

F_HOST = 1.0 / (2.0 * math.pi)


def _grid(n=4096, dt=0.05):
    return np.arange(n) * dt


def test_zero_signal_zero_transform():
    tau = _grid(1024)
    _, _, W = cwt_morlet(tau, np.zeros_like(tau))
    assert np.max(W) == 0.0
    _, mag = amplitude_spectrum(tau, np.zeros_like(tau))
    assert np.max(mag) == 0.0


def test_cwt_is_linear():
    tau = _grid(2048)
    a = np.sin(2.0 * np.pi * 0.11 * tau)
    b = np.cos(2.0 * np.pi * 0.23 * tau)
    scales = default_scales(32)
    _, _, wa = cwt_morlet(tau, a, scales)
    _, _, w2a = cwt_morlet(tau, 2.0 * a, scales)
    assert np.max(np.abs(w2a - 2.0 * wa)) < 1e-9 * np.max(wa)
    # |W| of a sum is only sub-additive, so check on the complex-free route:
    # transforms of disjoint narrowband parts add where one of them is ~0.
    _, _, wb = cwt_morlet(tau, b, scales)
    _, _, wab = cwt_morlet(tau, a + b, scales)
    assert np.max(wab) <= np.max(wa) + np.max(wb) + 1e-9


def test_cwt_ridge_at_host_frequency():
    tau = _grid(8192, 0.05)
    y = np.sin(tau)  # frequency 1/(2*pi) cycles per time unit
    scales = default_scales(96, 0.05, 0.5)
    _, freqs, W = cwt_morlet(tau, y, scales)
    mid = W[:, W.shape[1] // 4: 3 * W.shape[1] // 4]
    ridge = freqs[np.argmax(mid.mean(axis=1))]
    bins = np.abs(np.log(freqs) - np.log(F_HOST))
    assert abs(math.log(ridge) - math.log(F_HOST)) <= np.sort(bins)[1] + 1e-12


def test_cwt_rejects_bad_grids():
    y = np.zeros(8)
    with pytest.raises(DomainError):
        cwt_morlet(np.array([0.0, 0.1, 0.2, 0.15, 0.4, 0.5, 0.6, 0.7]), y)
    with pytest.raises(DomainError):
        cwt_morlet(np.array([0.0, 0.1, 0.3, 0.35, 0.5, 0.6, 0.7, 0.8]), y)
    with pytest.raises(DomainError):
        cwt_morlet(np.arange(8) * 0.1, np.zeros(7))
    with pytest.raises(DomainError):
        cwt_morlet(np.arange(8) * 0.1, y, scales=np.array([0.5, -1.0]))


def test_scales_frequency_round_trip():
    scales = default_scales(16, 0.02, 1.5)
    freqs = scale_frequencies(scales)
    assert freqs[0] == pytest.approx(1.5, rel=1e-12)
    assert freqs[-1] == pytest.approx(0.02, rel=1e-12)
    assert np.all(np.diff(scales) > 0.0)
    with pytest.raises(DomainError):
        default_scales(16, 0.5, 0.2)
    with pytest.raises(DomainError):
        scale_frequencies(np.array([1.0, 0.0]))


def test_spectrum_unit_sine_unwindowed():
    n, cycles = 1000, 25
    tau = np.arange(n) * 0.1
    f0 = cycles / (n * 0.1)
    freq, mag = amplitude_spectrum(tau, np.sin(2.0 * np.pi * f0 * tau),
                                   window="none")
    k = np.argmax(mag)
    assert freq[k] == pytest.approx(f0, rel=1e-12)
    assert mag[k] == pytest.approx(1.0, abs=1e-9)
    others = np.delete(mag, k)
    assert np.max(others) < 1e-9


def test_spectrum_hann_peak_location():
    tau = _grid(4096, 0.05)
    freq, mag = amplitude_spectrum(tau, 0.7 * np.sin(tau))
    assert freq[np.argmax(mag)] == pytest.approx(F_HOST, abs=freq[1])
    with pytest.raises(DomainError):
        amplitude_spectrum(tau, np.sin(tau), window="hamming")


def test_spectrum_of_decaying_host_without_ball():
    eps, lam = 0.05, 0.2
    p = SystemParams(eps=eps, lam=lam, c_e=0.0, kappa=0.5, L_c=1e6)
    tr = simulate(p, SimState(0.0, 1.0, 0.0, 0.0, 0.0), 120.0,
                  sample_dt=0.05)
    tau, st = tr.uniform()
    freq, mag = amplitude_spectrum(tau, st[:, 0])
    f_damped = math.sqrt(1.0 - (eps * lam / 2.0) ** 2) / (2.0 * math.pi)
    assert abs(freq[np.argmax(mag)] - f_damped) <= freq[1] + 1e-12
