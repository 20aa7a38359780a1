import numpy as np
import pytest

from src.core.errors import SamplingError
from src.services.spectrum_service import (check_uniform, dft_amplitude, low_band_ratio,
                                           spectral_agreement)


def test_constant_signal():
    spectrum = dft_amplitude(np.full(200, 3.0), dt=0.01)
    assert spectrum.amplitude[0] == pytest.approx(3.0)
    np.testing.assert_allclose(spectrum.amplitude[1:], 0.0, atol=1e-12)


def test_dc_bin_keeps_the_sign_of_the_mean():
    t = np.arange(1000) * 0.01
    spectrum = dft_amplitude(-1.5 + np.sin(2.0 * np.pi * 1.0 * t), dt=0.01)
    assert spectrum.amplitude[0] == pytest.approx(-1.5)
    assert spectrum.peak() == pytest.approx((0.0, -1.5))
    f, a = spectrum.peak(f_min=spectrum.frequency[1])
    assert (f, a) == pytest.approx((1.0, 1.0))
    assert spectrum.parseval_energy() == pytest.approx(float(np.sum((-1.5 + np.sin(2.0 * np.pi * t)) ** 2)))


def test_sine_amplitude_at_its_bin():
    t = np.arange(6000) * 0.01
    spectrum = dft_amplitude(2.0 * np.sin(2.0 * np.pi * 0.5 * t), times=t)
    f, a = spectrum.peak(f_min=spectrum.frequency[1])
    assert f == pytest.approx(0.5)
    assert a == pytest.approx(2.0, rel=1e-9)
    assert spectrum.frequency[1] == pytest.approx(1.0 / 60.0)


@pytest.mark.parametrize("n", [512, 513])
def test_parseval(n):
    x = np.random.default_rng(7).normal(size=n)
    spectrum = dft_amplitude(x, dt=0.001)
    assert spectrum.parseval_energy() == pytest.approx(float(np.sum(x ** 2)), rel=1e-6)


def test_sampling_checks():
    with pytest.raises(SamplingError):
        check_uniform([0.0, 0.01, 0.03])
    with pytest.raises(SamplingError):
        dft_amplitude([1.0, 2.0, 3.0], times=[0.0, 0.01, 0.03])
    with pytest.raises(SamplingError):
        dft_amplitude([1.0])
    with pytest.raises(SamplingError):
        dft_amplitude([1.0, 2.0], dt=0.0)
    assert check_uniform(np.arange(100) * 0.001) == pytest.approx(0.001)


def test_band_and_empty_peak():
    spectrum = dft_amplitude(np.ones(100), dt=0.01)
    freq, _ = spectrum.band(2.0)
    assert freq.max() < 2.0
    with pytest.raises(SamplingError):
        spectrum.peak(f_min=1000.0)


def test_spectral_agreement():
    t = np.arange(20000) * 0.001
    reference = np.sin(2.0 * np.pi * 0.25 * t)
    close = spectral_agreement(reference, 0.95 * reference, 0.001)
    assert close.passed
    assert close.max_error == pytest.approx(0.05, rel=1e-6)
    far = spectral_agreement(reference, 0.5 * reference, 0.001)
    assert not far.passed
    assert low_band_ratio(reference, 0.5 * reference, 0.001) == pytest.approx(0.5)
