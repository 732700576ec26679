"""Synthetic oracle data: degradation, determinism and the closed-form inverse"""

import numpy as np
import pytest

from src.fmri.manifest import validate_manifest
from src.fmri.models import FmriSample, QualityTier
from src.fmri.sample_io import load_sample, load_samples
from src.regression.targets import load_latent_targets
from src.synth.generator import build_ground_truth, generate, load_ground_truth
from src.synth.models import DegradationSpec, SynthConfig
from src.synth.oracle import deconvolution_gain, degrade, oracle_enhance
from src.utils.error_handler import ValidationError


def _smooth_signal(rng, vertex_count, max_component=40):
    """Random mix of low-order cosine modes with mirrored ends"""
    modes = np.arange(1, max_component + 1)
    positions = (np.arange(vertex_count) + 0.5) / vertex_count
    basis = np.cos(np.pi * modes[:, None] * positions[None, :])
    weights = rng.standard_normal((2, max_component))
    return weights @ basis + 0.3


def _relative_l2(estimate, truth):
    return np.linalg.norm(estimate - truth) / np.linalg.norm(truth)


def test_identity_degradation_gives_identical_tiers(tmp_path):
    config = SynthConfig(vertex_count=24, n_images=3, n_subjects_low=2, n_subjects_high=2,
                         trials_per_image_low=2, trials_per_image_high=2,
                         noise_sigma_high=0.0, subject_offset_sigma=0.0,
                         degradation=DegradationSpec())
    low, high, _ = generate(config, tmp_path)
    for low_ref, high_ref in zip(low.refs(['lsub01']), high.refs(['hsub01'])):
        assert np.array_equal(load_sample(low_ref.path).channels,
                              load_sample(high_ref.path).channels)


def test_affine_degradation(tmp_path):
    config = SynthConfig(vertex_count=24, n_images=3, n_subjects_low=1, n_subjects_high=1,
                         trials_per_image_low=1, trials_per_image_high=1,
                         noise_sigma_high=0.0,
                         degradation=DegradationSpec(gain=2.0, bias=1.0))
    low, high, truth = generate(config, tmp_path)
    for sample in load_samples(low.refs()):
        clean = truth.clean_signal(sample.subject_id, sample.image_id)
        assert np.allclose(sample.channels, 2.0 * clean + 1.0, rtol=1e-6, atol=1e-6)
    for sample in load_samples(high.refs()):
        clean = truth.clean_signal(sample.subject_id, sample.image_id)
        assert np.array_equal(sample.channels, clean.astype(np.float32))


def test_generated_manifests_validate(small_dataset, small_synth_config):
    low, high, _, _ = small_dataset
    assert low.sample_count == 3 * 5 * 4
    assert high.sample_count == 2 * 5 * 2
    assert low.shared_image_ids == high.shared_image_ids
    assert low.quality_tier is QualityTier.LOW and high.quality_tier is QualityTier.HIGH
    assert validate_manifest(low).is_valid
    assert validate_manifest(high).is_valid


def test_full_scale_manifest_counts(tmp_path):
    config = SynthConfig.full_scale(vertex_count=16, latent_dim_visual=2,
                                      latent_dim_semantic=2, encoding_smoothness_fwhm=1.0)
    low, high, _ = generate(config, tmp_path)
    assert low.sample_count == 6300
    assert high.sample_count == 1680
    assert len(low.subjects) == 9 and len(high.subjects) == 8


def test_regeneration_is_byte_identical(tmp_path, small_synth_config):
    first_dir, second_dir = tmp_path / 'a', tmp_path / 'b'
    generate(small_synth_config, first_dir)
    generate(small_synth_config, second_dir)

    first_files = sorted(p.relative_to(first_dir) for p in first_dir.rglob('*') if p.is_file())
    second_files = sorted(p.relative_to(second_dir) for p in second_dir.rglob('*')
                          if p.is_file())
    assert first_files == second_files
    for relative in first_files:
        assert (first_dir / relative).read_bytes() == (second_dir / relative).read_bytes()


def test_different_seed_changes_data(small_synth_config):
    first = build_ground_truth(small_synth_config)
    small_synth_config.encoding_seed += 1
    second = build_ground_truth(small_synth_config)
    assert not np.array_equal(first.latents_visual, second.latents_visual)


def test_marginal_means_follow_gain_and_bias(rng):
    spec = DegradationSpec(blur_fwhm_vertices=5.0, gain=-1.7, bias=0.4)
    clean = rng.standard_normal((2, 500)) + 2.0
    low = degrade(clean, spec)
    assert np.allclose(low.mean(axis=-1), spec.gain * clean.mean(axis=-1) + spec.bias,
                       atol=1e-9)


def test_oracle_inverts_affine_degradation(rng):
    spec = DegradationSpec(gain=1.5, bias=0.5)
    clean = rng.standard_normal((2, 1024))
    sample = FmriSample('s', 'i', 0, degrade(clean, spec))
    restored = oracle_enhance(sample, spec).channels
    assert _relative_l2(restored, clean) <= 1e-5


def test_oracle_deblurs_smooth_signal(rng):
    """FWHM 8 blur without noise is recovered to 1% relative L2 at V=1024"""
    spec = DegradationSpec(blur_fwhm_vertices=8.0, gain=1.5, bias=0.5)
    clean = _smooth_signal(rng, 1024)
    sample = FmriSample('s', 'i', 0, degrade(clean, spec))
    assert _relative_l2(oracle_enhance(sample, spec).channels, clean) <= 0.01


def test_oracle_error_bounded_by_amplified_noise():
    spec = DegradationSpec(blur_fwhm_vertices=8.0, gain=1.5, bias=0.5, noise_sigma_low=0.1)
    noiseless_spec = DegradationSpec(blur_fwhm_vertices=8.0, gain=1.5, bias=0.5)
    clean = _smooth_signal(np.random.default_rng(3), 1024)

    noisy = degrade(clean, spec, np.random.default_rng(11))
    noiseless = degrade(clean, noiseless_spec)
    noise = noisy - noiseless

    error = np.linalg.norm(oracle_enhance(FmriSample('s', 'i', 0, noisy), spec).channels - clean)
    baseline = np.linalg.norm(
        oracle_enhance(FmriSample('s', 'i', 0, noiseless), spec).channels - clean)
    # The inverse runs on the mirrored 2V extension, doubling the noise energy
    bound = baseline + np.sqrt(2.0) * deconvolution_gain(spec, 1024) * np.linalg.norm(noise)
    assert error <= bound + 1e-3


def test_noisy_degradation_needs_generator(rng):
    with pytest.raises(ValidationError):
        degrade(rng.standard_normal((2, 8)), DegradationSpec(noise_sigma_low=0.1))


def test_config_invariants():
    with pytest.raises(ValidationError):
        DegradationSpec(gain=0.0)
    with pytest.raises(ValidationError):
        SynthConfig(n_images=0)
    with pytest.raises(ValidationError):
        SynthConfig(noise_sigma_high=-0.1)
    config = SynthConfig(degradation={'gain': 2.0})
    assert isinstance(config.degradation, DegradationSpec)


def test_ground_truth_round_trip(small_dataset):
    _, _, truth, data_dir = small_dataset
    loaded = load_ground_truth(data_dir / 'ground_truth')

    assert loaded.image_ids == truth.image_ids
    for name in ('latents_visual', 'latents_semantic', 'encoding_visual', 'encoding_semantic'):
        assert np.array_equal(getattr(loaded, name), getattr(truth, name))
    assert loaded.subject_offsets.keys() == truth.subject_offsets.keys()
    assert np.array_equal(loaded.clean_signal('lsub02', 'img0003'),
                          truth.clean_signal('lsub02', 'img0003'))

    targets = load_latent_targets(data_dir / 'ground_truth' / 'latent_targets.json')
    assert targets.image_ids == truth.image_ids


def test_high_tier_trials_are_clean_plus_noise(small_dataset, small_synth_config):
    _, high, truth, _ = small_dataset
    residuals = [s.channels - truth.clean_signal(s.subject_id, s.image_id)
                 for s in load_samples(high.refs())]
    spread = np.concatenate([r.ravel() for r in residuals]).std()
    assert abs(spread - small_synth_config.noise_sigma_high) <= 0.2 * small_synth_config.noise_sigma_high
