"""Temporal filtering, spatial smoothing and trial averaging"""

import numpy as np
import pytest
from scipy import fft as sp_fft

from src.fmri.models import AVERAGED_TRIAL, FmriSample
from src.fmri.preprocessing import (
    average_by_image, dct_cutoff_index, gaussian_kernel, highpass_temporal, smooth_spatial,
    trial_average
)
from src.utils.error_handler import ValidationError


def _series(values):
    """Time-ordered samples from an (n, 2, V) array"""
    return [FmriSample('lsub01', f"t{i:03d}", 0, v) for i, v in enumerate(values)]


def _stack(series):
    return np.stack([s.channels for s in series]).astype(np.float64)


def test_linear_drift_is_removed():
    """200 volumes at TR 2 s, 128 s cutoff: drift amplitude drops by at least 95%"""
    n, vertex_count = 200, 8
    ramp = np.linspace(-1.0, 1.0, n)
    offsets = np.arange(2 * vertex_count).reshape(2, vertex_count) * 0.1
    values = ramp[:, None, None] + offsets[None]

    filtered = _stack(highpass_temporal(_series(values), cutoff_s=128.0, tr_s=2.0))
    drift_in = (values - values.mean(axis=0)).std(axis=0)
    drift_out = (filtered - filtered.mean(axis=0)).std(axis=0)
    assert np.all(drift_out <= 0.05 * drift_in)
    assert np.allclose(filtered.mean(axis=0), values.mean(axis=0), atol=1e-5)


def test_white_noise_keeps_power_above_cutoff(rng):
    n = 200
    values = rng.standard_normal((n, 2, 64))
    filtered = _stack(highpass_temporal(_series(values), cutoff_s=128.0, tr_s=2.0))

    k_max = dct_cutoff_index(n, 128.0, 2.0)
    power_in = (sp_fft.dct(values.astype(np.float32).astype(np.float64), type=2,
                           norm='ortho', axis=0)[k_max + 1:] ** 2).sum()
    power_out = (sp_fft.dct(filtered, type=2, norm='ortho', axis=0)[k_max + 1:] ** 2).sum()
    assert abs(power_out - power_in) <= 0.10 * power_in
    assert np.allclose(filtered.mean(axis=0), values.mean(axis=0), atol=1e-5)


def test_constant_series_unchanged():
    values = np.full((50, 2, 10), 3.25)
    filtered = _stack(highpass_temporal(_series(values), cutoff_s=100.0, tr_s=1.5))
    assert np.allclose(filtered, values, atol=1e-6)


def test_highpass_rejects_bad_input(rng):
    with pytest.raises(ValidationError):
        highpass_temporal(_series(rng.standard_normal((1, 2, 4))), 128.0, 2.0)
    with pytest.raises(ValidationError):
        highpass_temporal(_series(rng.standard_normal((10, 2, 4))), 3.0, 2.0)


def test_delta_spike_becomes_kernel():
    channels = np.zeros((2, 256))
    channels[:, 100] = 1.0
    smoothed = smooth_spatial(FmriSample('s', 'i', 0, channels), 8.0).channels

    kernel = gaussian_kernel(8.0)
    radius = kernel.size // 2
    expected = np.zeros(256)
    expected[100 - radius:100 + radius + 1] = kernel
    for channel in smoothed:
        assert int(np.argmax(channel)) == 100
        assert abs(channel.sum() - 1.0) <= 1e-4
        assert np.allclose(channel, expected, atol=1e-6)


def test_constant_channel_unchanged():
    sample = FmriSample('s', 'i', 0, np.full((2, 40), -1.5))
    assert np.allclose(smooth_spatial(sample, 6.0).channels, -1.5, atol=1e-6)


def test_tiny_fwhm_is_identity(make_sample):
    sample = make_sample(vertex_count=128)
    assert np.allclose(smooth_spatial(sample, 0.1).channels, sample.channels, atol=1e-4)


def test_smoothing_preserves_sums_and_commutes_with_swap(make_sample):
    sample = make_sample(vertex_count=300)
    smoothed = smooth_spatial(sample, 12.0)
    sums_in = sample.channels.astype(np.float64).sum(axis=1)
    sums_out = smoothed.channels.astype(np.float64).sum(axis=1)
    assert np.allclose(sums_out, sums_in, rtol=1e-4, atol=1e-4)

    swapped = sample.with_channels(sample.channels[::-1])
    assert np.array_equal(smooth_spatial(swapped, 12.0).channels, smoothed.channels[::-1])


def test_smoothing_needs_positive_fwhm(make_sample):
    with pytest.raises(ValidationError):
        smooth_spatial(make_sample(), 0.0)


def test_average_of_identical_trials(make_sample):
    sample = make_sample(vertex_count=64)
    averaged = trial_average([sample] * 10)
    assert averaged.trial_index == AVERAGED_TRIAL
    assert np.allclose(averaged.channels, sample.channels, rtol=1e-6, atol=1e-7)


def test_average_of_zero_and_two():
    trials = [FmriSample('s', 'i', 0, np.zeros((2, 5))),
              FmriSample('s', 'i', 1, np.full((2, 5), 2.0))]
    assert np.array_equal(trial_average(trials).channels, np.ones((2, 5), dtype=np.float32))


def test_averaging_reduces_noise_variance(rng):
    """Ten trials of signal + N(0, 1) noise leave variance near 1/10"""
    vertex_count = 4096
    signal = rng.standard_normal((2, vertex_count))
    trials = [FmriSample('s', 'i', t, signal + rng.standard_normal((2, vertex_count)))
              for t in range(10)]
    residual = trial_average(trials).channels - signal.astype(np.float32)
    assert abs(residual.var() - 0.1) <= 0.2 * 0.1


def test_average_is_permutation_invariant(rng):
    trials = [FmriSample('s', 'i', t, rng.standard_normal((2, 33))) for t in range(7)]
    reference = trial_average(trials).channels
    for _ in range(5):
        order = rng.permutation(len(trials))
        assert np.array_equal(trial_average([trials[i] for i in order]).channels, reference)


def test_average_rejects_mixed_or_empty(make_sample):
    with pytest.raises(ValidationError):
        trial_average([])
    with pytest.raises(ValidationError):
        trial_average([make_sample(image_id='a'), make_sample(image_id='b')])


def test_average_by_image_groups(make_sample):
    samples = [make_sample(subject_id=s, image_id=i, trial_index=t)
               for s in ('b', 'a') for i in ('i2', 'i1') for t in range(3)]
    averaged = average_by_image(samples)
    assert [(a.subject_id, a.image_id) for a in averaged] == [
        ('a', 'i1'), ('a', 'i2'), ('b', 'i1'), ('b', 'i2')]
