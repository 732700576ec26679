"""Closed-form degradation and its regularized inverse

The low tier is ``gain * blur(x) + bias + noise``. Blurring uses
half-sample reflection at the ends of each channel, which equals circular
convolution of the even (mirrored) extension of length 2V. The inverse runs
in that extended Fourier domain with a Tikhonov-regularized filter.
"""

from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from ..fmri.models import FmriSample
from ..fmri.preprocessing import gaussian_kernel, smooth_channels
from ..utils.error_handler import ValidationError
from .models import DegradationSpec

TIKHONOV_EPSILON = 1e-3


def degrade(clean: np.ndarray, spec: DegradationSpec,
            rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Apply the low-tier degradation to a (..., V) array"""
    degraded = spec.gain * smooth_channels(clean, spec.blur_fwhm_vertices) + spec.bias
    if spec.noise_sigma_low > 0.0:
        if rng is None:
            raise ValidationError("a random generator is required when noise_sigma_low > 0")
        degraded = degraded + rng.normal(0.0, spec.noise_sigma_low, size=degraded.shape)
    return degraded


def _circular_kernel(kernel: np.ndarray, length: int) -> np.ndarray:
    """Fold centered taps onto a circle of ``length`` samples"""
    radius = kernel.size // 2
    circular = np.zeros(length)
    np.add.at(circular, np.arange(-radius, radius + 1) % length, kernel)
    return circular


def inverse_filter(spec: DegradationSpec, vertex_count: int) -> Optional[np.ndarray]:
    """Frequency response H/(H^2 + eps) of the deblurring step, or None without blur"""
    kernel = gaussian_kernel(spec.blur_fwhm_vertices)
    if kernel.size == 1:
        return None
    response = sp_fft.rfft(_circular_kernel(kernel, 2 * vertex_count)).real
    return response / (response ** 2 + TIKHONOV_EPSILON)


def deconvolution_gain(spec: DegradationSpec, vertex_count: int) -> float:
    """Largest amplitude gain of the full inverse, including 1/|gain|"""
    response = inverse_filter(spec, vertex_count)
    peak = 1.0 if response is None else float(np.max(np.abs(response)))
    return peak / abs(spec.gain)


def invert_channels(channels: np.ndarray, spec: DegradationSpec) -> np.ndarray:
    """Undo bias and gain, then deconvolve the blur, on a (..., V) array"""
    restored = (np.asarray(channels, dtype=np.float64) - spec.bias) / spec.gain
    vertex_count = restored.shape[-1]
    response = inverse_filter(spec, vertex_count)
    if response is None:
        return restored
    extended = np.concatenate([restored, restored[..., ::-1]], axis=-1)
    spectrum = sp_fft.rfft(extended, axis=-1) * response
    return sp_fft.irfft(spectrum, n=2 * vertex_count, axis=-1)[..., :vertex_count]


def oracle_enhance(sample: FmriSample, spec: DegradationSpec) -> FmriSample:
    """Ideal inverse transport map for the synthetic degradation"""
    return sample.with_channels(invert_channels(sample.channels, spec))
