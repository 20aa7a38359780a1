# src/services/spectrum_service.py
"""遥测通道的单边 DFT 幅值谱 (矩形窗)"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import SamplingError


@dataclass(frozen=True)
class Spectrum:
    frequency: np.ndarray
    amplitude: np.ndarray
    n_samples: int

    @property
    def has_nyquist(self) -> bool:
        return self.n_samples % 2 == 0

    def parseval_energy(self) -> float:
        """由幅值推算的时域样本平方和"""
        a = self.amplitude
        inner = a[1:-1] if self.has_nyquist else a[1:]
        nyquist = a[-1] ** 2 if self.has_nyquist and len(a) > 1 else 0.0
        return float(self.n_samples * (a[0] ** 2 + 0.5 * np.sum(inner ** 2) + nyquist))

    def band(self, f_max: float, f_min: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        mask = (self.frequency >= f_min) & (self.frequency < f_max)
        return self.frequency[mask], self.amplitude[mask]

    def peak(self, f_min: float = 0.0, f_max: float = np.inf) -> Tuple[float, float]:
        """[f_min, f_max) 内最大频点的 (频率, 幅值)"""
        freq, amp = self.band(f_max, f_min)
        if amp.size == 0:
            raise SamplingError(f"no spectral bins in [{f_min}, {f_max})")
        i = int(np.argmax(np.abs(amp)))
        return float(freq[i]), float(amp[i])

    def rows(self) -> List[Tuple[float, float]]:
        return [(float(f), float(a)) for f, a in zip(self.frequency, self.amplitude)]


def check_uniform(times: Sequence[float], rtol: float = 1e-6) -> float:
    """``times`` 的采样间隔, 不均匀时抛出 SamplingError"""
    t = np.asarray(times, dtype=float)
    if t.size < 2:
        raise SamplingError("at least two samples are required")
    steps = np.diff(t)
    dt = float(np.mean(steps))
    if not dt > 0.0 or np.max(np.abs(steps - dt)) > rtol * dt:
        raise SamplingError(f"non-uniform sampling (spacing {np.min(steps):.6g} .. {np.max(steps):.6g} s)")
    return dt


def dft_amplitude(samples: Sequence[float], dt: Optional[float] = None,
                  times: Optional[Sequence[float]] = None) -> Spectrum:
    """
    幅值谱, 幅值为 A 的正弦在其频点处约为 A, 0 Hz 频点为带符号的均值

    Args:
        samples: 等间隔采样序列
        dt: 采样间隔 [s]
        times: 采样时刻, 给出时由其检查并求出 dt

    Raises:
        SamplingError: 样本不足, 间隔非正或不均匀
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise SamplingError("at least two samples are required")
    if times is not None:
        if len(times) != x.size:
            raise SamplingError("times and samples differ in length")
        dt = check_uniform(times)
    if dt is None or not dt > 0.0:
        raise SamplingError(f"sample spacing must be positive, got {dt}")
    n = x.size
    coefficients = np.fft.rfft(x)
    amplitude = np.abs(coefficients) / n
    # the 0 Hz bin keeps its sign: it is the mean of the record
    amplitude[0] = coefficients[0].real / n
    if n % 2 == 0:
        amplitude[1:-1] *= 2.0
    else:
        amplitude[1:] *= 2.0
    frequency = np.fft.rfftfreq(n, d=dt)
    return Spectrum(frequency, amplitude, n)


@dataclass(frozen=True)
class SpectralAgreement:
    frequencies: np.ndarray
    relative_errors: np.ndarray
    tolerance: float

    @property
    def max_error(self) -> float:
        return float(np.max(self.relative_errors)) if self.relative_errors.size else 0.0

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def spectral_agreement(reference: Sequence[float], measured: Sequence[float], dt: float,
                       f_max: float = 1.0, significance: float = 0.2, tolerance: float = 0.1) -> SpectralAgreement:
    """在 ``f_max`` 以下, 参考幅值超过频带峰值 ``significance`` 倍的每个频点上比较两个频谱"""
    ref = dft_amplitude(reference, dt)
    meas = dft_amplitude(measured, dt)
    if ref.n_samples != meas.n_samples:
        raise SamplingError("spectra need equally long records")
    freq, ref_amp = ref.band(f_max)
    _, meas_amp = meas.band(f_max)
    ref_amp, meas_amp = np.abs(ref_amp), np.abs(meas_amp)
    if ref_amp.size == 0:
        raise SamplingError(f"record too short to resolve anything below {f_max} Hz")
    significant = ref_amp > significance * np.max(ref_amp)
    errors = np.abs(meas_amp[significant] - ref_amp[significant]) / ref_amp[significant]
    return SpectralAgreement(freq[significant], errors, tolerance)


def low_band_ratio(reference: Sequence[float], measured: Sequence[float], dt: float, f_max: float = 1.0) -> float:
    """``f_max`` 以下测量幅值之和与参考幅值之和的比"""
    _, ref_amp = dft_amplitude(reference, dt).band(f_max)
    _, meas_amp = dft_amplitude(measured, dt).band(f_max)
    total = float(np.sum(np.abs(ref_amp)))
    return float(np.sum(np.abs(meas_amp))) / total if total > 0.0 else float("nan")
