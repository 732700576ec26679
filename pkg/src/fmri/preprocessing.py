"""Temporal filtering, spatial smoothing and trial averaging on vertex vectors

Surface operations are applied along the 1-D vertex index of each hemisphere
channel; FWHM values are therefore in vertex units.
"""

import math
from typing import List

import numpy as np
from scipy import fft as sp_fft
from scipy import ndimage

from ..utils.error_handler import ShapeError, ValidationError
from ..utils.validators import validate_real
from .models import AVERAGED_TRIAL, FmriSample

FWHM_TO_SIGMA = 1.0 / math.sqrt(8.0 * math.log(2.0))

# Kernel radius in standard deviations
KERNEL_TRUNCATE = 4.0


def gaussian_kernel(fwhm: float) -> np.ndarray:
    """Normalized, symmetric Gaussian taps for a FWHM in vertices

    A FWHM of zero gives the identity kernel ``[1.0]``.
    """
    fwhm = validate_real(fwhm, "fwhm", minimum=0.0)
    sigma = fwhm * FWHM_TO_SIGMA
    radius = int(KERNEL_TRUNCATE * sigma + 0.5)
    if radius == 0:
        return np.ones(1)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-0.5 * (x / sigma) ** 2)
    return weights / weights.sum()


def smooth_channels(channels: np.ndarray, fwhm: float) -> np.ndarray:
    """Gaussian smoothing along the last axis with half-sample reflection"""
    kernel = gaussian_kernel(fwhm)
    if kernel.size == 1:
        return np.asarray(channels, dtype=np.float64).copy()
    return ndimage.correlate1d(np.asarray(channels, dtype=np.float64), kernel,
                               axis=-1, mode='reflect')


def smooth_spatial(sample: FmriSample, fwhm_vertices: float) -> FmriSample:
    """Smooth both hemisphere channels; per-channel sums are preserved"""
    validate_real(fwhm_vertices, "fwhm_vertices", minimum=0.0, exclusive=True)
    return sample.with_channels(smooth_channels(sample.channels, fwhm_vertices))


def dct_cutoff_index(n_timepoints: int, cutoff_s: float, tr_s: float) -> int:
    """Highest DCT-II component whose period 2*N*TR/k exceeds ``cutoff_s``"""
    return max(0, math.ceil(2.0 * n_timepoints * tr_s / cutoff_s) - 1)


def highpass_temporal(series: List[FmriSample], cutoff_s: float,
                      tr_s: float) -> List[FmriSample]:
    """High-pass filter per-vertex time series by DCT detrending

    Components with a period longer than ``cutoff_s`` are regressed out of
    each vertex's time course; the mean of every vertex is kept.
    """
    if len(series) < 2:
        raise ValidationError("high-pass filtering needs at least two time points")
    cutoff_s = validate_real(cutoff_s, "cutoff_s", minimum=0.0, exclusive=True)
    tr_s = validate_real(tr_s, "tr_s", minimum=0.0, exclusive=True)
    if cutoff_s <= 2.0 * tr_s:
        raise ValidationError(f"cutoff_s ({cutoff_s}) must exceed twice tr_s ({tr_s})")
    vertex_counts = {s.vertex_count for s in series}
    if len(vertex_counts) != 1:
        raise ShapeError(f"time points have different vertex counts: {sorted(vertex_counts)}")

    data = np.stack([s.channels for s in series]).astype(np.float64)
    n = data.shape[0]
    k_max = min(dct_cutoff_index(n, cutoff_s, tr_s), n - 1)
    if k_max == 0:
        return [s.with_channels(s.channels) for s in series]

    mean = data.mean(axis=0)
    coefficients = sp_fft.dct(data - mean, type=2, norm='ortho', axis=0)
    coefficients[1:k_max + 1] = 0.0
    filtered = sp_fft.idct(coefficients, type=2, norm='ortho', axis=0) + mean

    return [s.with_channels(filtered[i]) for i, s in enumerate(series)]


def trial_average(samples: List[FmriSample]) -> FmriSample:
    """Element-wise mean of repeated trials of one subject and image"""
    if not samples:
        raise ValidationError("cannot average an empty list of trials")
    first = samples[0]
    for sample in samples[1:]:
        if (sample.subject_id, sample.image_id) != (first.subject_id, first.image_id):
            raise ValidationError(
                f"trial_average mixes ({first.subject_id}, {first.image_id}) "
                f"with ({sample.subject_id}, {sample.image_id})")
        if sample.vertex_count != first.vertex_count:
            raise ShapeError("trials have different vertex counts")

    # Sorted summation keeps the result independent of input order
    stacked = np.stack([s.channels for s in samples]).astype(np.float64)
    stacked.sort(axis=0)
    mean = stacked.sum(axis=0) / len(samples)
    return FmriSample(
        subject_id=first.subject_id,
        image_id=first.image_id,
        trial_index=AVERAGED_TRIAL,
        channels=mean,
        quality_tier=first.quality_tier,
    )


def average_by_image(samples: List[FmriSample]) -> List[FmriSample]:
    """Trial-average every (subject, image) group, sorted by key"""
    groups = {}
    for sample in samples:
        groups.setdefault((sample.subject_id, sample.image_id), []).append(sample)
    return [trial_average(groups[key]) for key in sorted(groups)]
