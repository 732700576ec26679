"""Synthetic oracle dataset generation

Random draws come from one seeded stream in a fixed order (encoding
matrices, latents, subject offsets); per-trial noise uses counter-based
seeds ``(encoding_seed, tier, subject, image, trial)`` so samples can be
produced in any order or in parallel without changing a byte.
"""

import json
from pathlib import Path
from typing import Tuple

import numpy as np

from ..fmri.manifest import save_manifest
from ..fmri.matrix_io import read_matrix, write_matrix
from ..fmri.models import (
    DatasetManifest, FmriSample, N_CHANNELS, QualityTier, SubjectEntry
)
from ..fmri.preprocessing import smooth_channels
from ..fmri.sample_io import save_sample
from ..regression.targets import LatentTargets, save_latent_targets
from ..utils.error_handler import DataError
from ..utils.logger import get_logger
from ..utils.validators import validate_keys
from .models import GroundTruth, SynthConfig
from .oracle import degrade

logger = get_logger(__name__)

TIER_CODES = {QualityTier.HIGH: 1, QualityTier.LOW: 2}
GROUND_TRUTH_VERSION = 1
GROUND_TRUTH_FIELDS = ('version', 'vertex_count', 'image_ids', 'subject_ids', 'matrices')


def subject_ids(prefix: str, count: int):
    return [f"{prefix}{i + 1:02d}" for i in range(count)]


def image_ids(count: int):
    return [f"img{i + 1:04d}" for i in range(count)]


def _as_float32_exact(array: np.ndarray) -> np.ndarray:
    """Round to float32 so stored matrices reproduce the truth exactly"""
    return np.asarray(array, dtype=np.float32).astype(np.float64)


def _encoding_matrix(rng: np.random.Generator, config: SynthConfig, dim: int) -> np.ndarray:
    """Spatially smooth random encoding columns, shape (2V, dim)"""
    total_dim = config.latent_dim_visual + config.latent_dim_semantic
    raw = rng.standard_normal((dim, N_CHANNELS, config.vertex_count))
    smooth = smooth_channels(raw, config.encoding_smoothness_fwhm).reshape(dim, -1)
    scale = smooth.std(axis=1, keepdims=True)
    scale[scale == 0.0] = 1.0
    columns = smooth / scale / np.sqrt(total_dim)
    return _as_float32_exact(columns.T)


def build_ground_truth(config: SynthConfig) -> GroundTruth:
    rng = np.random.default_rng(config.encoding_seed)
    encoding_visual = _encoding_matrix(rng, config, config.latent_dim_visual)
    encoding_semantic = _encoding_matrix(rng, config, config.latent_dim_semantic)
    latents_visual = _as_float32_exact(
        rng.standard_normal((config.n_images, config.latent_dim_visual)))
    latents_semantic = _as_float32_exact(
        rng.standard_normal((config.n_images, config.latent_dim_semantic)))

    offsets = {}
    for subject_id in (subject_ids('lsub', config.n_subjects_low)
                       + subject_ids('hsub', config.n_subjects_high)):
        offsets[subject_id] = _as_float32_exact(
            rng.normal(0.0, config.subject_offset_sigma, N_CHANNELS * config.vertex_count))

    return GroundTruth(
        vertex_count=config.vertex_count,
        image_ids=image_ids(config.n_images),
        latents_visual=latents_visual,
        latents_semantic=latents_semantic,
        encoding_visual=encoding_visual,
        encoding_semantic=encoding_semantic,
        subject_offsets=offsets,
    )


def trial_rng(config: SynthConfig, tier: QualityTier, subject: int, image: int,
              trial: int) -> np.random.Generator:
    return np.random.default_rng(
        [config.encoding_seed, TIER_CODES[tier], subject, image, trial])


def synthesize_trial(config: SynthConfig, truth: GroundTruth, tier: QualityTier,
                     subject_index: int, image_index: int, trial: int) -> FmriSample:
    """One trial of either tier, reproducible from its counters alone"""
    prefix = 'hsub' if tier is QualityTier.HIGH else 'lsub'
    subject_id = f"{prefix}{subject_index + 1:02d}"
    image_id = truth.image_ids[image_index]
    clean = truth.clean_signal(subject_id, image_id)
    rng = trial_rng(config, tier, subject_index, image_index, trial)

    if tier is QualityTier.HIGH:
        values = clean
        if config.noise_sigma_high > 0.0:
            values = clean + rng.normal(0.0, config.noise_sigma_high, size=clean.shape)
    else:
        values = degrade(clean, config.degradation, rng)

    return FmriSample(subject_id, image_id, trial, values, tier)


def _write_tier(config: SynthConfig, truth: GroundTruth, tier: QualityTier,
                out_dir: Path) -> DatasetManifest:
    if tier is QualityTier.HIGH:
        n_subjects, trials, prefix = config.n_subjects_high, config.trials_per_image_high, 'hsub'
    else:
        n_subjects, trials, prefix = config.n_subjects_low, config.trials_per_image_low, 'lsub'

    root = out_dir / tier.value
    manifest = DatasetManifest(
        name=f"synthetic-{tier.value}",
        quality_tier=tier,
        vertex_count=config.vertex_count,
        subjects=[SubjectEntry(s, trials) for s in subject_ids(prefix, n_subjects)],
        shared_image_ids=list(truth.image_ids),
        root_dir=root,
    )

    for s in range(n_subjects):
        for i in range(config.n_images):
            for t in range(trials):
                sample = synthesize_trial(config, truth, tier, s, i, t)
                relative = f"samples/{sample.subject_id}/{sample.image_id}_t{t:02d}.otf"
                save_sample(sample, root / relative)
                manifest.sample_index[sample.key] = relative

    save_manifest(manifest, root / 'manifest.json')
    logger.info(f"Wrote {manifest.sample_count} {tier.value}-tier samples to {root}")
    return manifest


def save_ground_truth(truth: GroundTruth, directory: Path) -> Path:
    """JSON index plus float32 little-endian matrices"""
    directory = Path(directory)
    subjects = sorted(truth.subject_offsets)
    matrices = {
        'latents_visual': write_matrix(truth.latents_visual, directory, 'latents_visual'),
        'latents_semantic': write_matrix(truth.latents_semantic, directory, 'latents_semantic'),
        'encoding_visual': write_matrix(truth.encoding_visual, directory, 'encoding_visual'),
        'encoding_semantic': write_matrix(truth.encoding_semantic, directory,
                                          'encoding_semantic'),
        'subject_offsets': write_matrix(
            np.stack([truth.subject_offsets[s] for s in subjects]), directory,
            'subject_offsets'),
    }
    index = {
        'version': GROUND_TRUTH_VERSION,
        'vertex_count': truth.vertex_count,
        'image_ids': list(truth.image_ids),
        'subject_ids': subjects,
        'matrices': matrices,
    }
    path = directory / 'ground_truth.json'
    path.write_text(json.dumps(index, indent=2))

    save_latent_targets(LatentTargets(list(truth.image_ids), truth.latents_visual,
                                      truth.latents_semantic),
                        directory / 'latent_targets.json')
    return path


def load_ground_truth(path: Path) -> GroundTruth:
    path = Path(path)
    if path.is_dir():
        path = path / 'ground_truth.json'
    try:
        index = json.loads(path.read_text())
    except FileNotFoundError as e:
        raise DataError(f"ground truth not found: {path}") from e
    validate_keys(index, GROUND_TRUTH_FIELDS, "ground truth index", required=GROUND_TRUTH_FIELDS)
    if index['version'] != GROUND_TRUTH_VERSION:
        raise DataError(f"unsupported ground truth version {index['version']}")

    directory = path.parent
    matrices = {name: read_matrix(descriptor, directory, name)
                for name, descriptor in index['matrices'].items()}
    offsets = matrices['subject_offsets']
    return GroundTruth(
        vertex_count=index['vertex_count'],
        image_ids=list(index['image_ids']),
        latents_visual=matrices['latents_visual'],
        latents_semantic=matrices['latents_semantic'],
        encoding_visual=matrices['encoding_visual'],
        encoding_semantic=matrices['encoding_semantic'],
        subject_offsets={s: offsets[i] for i, s in enumerate(index['subject_ids'])},
    )


def generate(config: SynthConfig,
             out_dir) -> Tuple[DatasetManifest, DatasetManifest, GroundTruth]:
    """Write both tiers and the ground truth under ``out_dir``"""
    out_dir = Path(out_dir)
    truth = build_ground_truth(config)
    high = _write_tier(config, truth, QualityTier.HIGH, out_dir)
    low = _write_tier(config, truth, QualityTier.LOW, out_dir)
    save_ground_truth(truth, out_dir / 'ground_truth')
    return low, high, truth
