"""Manifest (de)serialization, dataset validation and train/test splitting"""

import json
import os
from collections import Counter
from pathlib import Path
from typing import List, Tuple, Union

from ..utils.error_handler import DataError, DecodeError, SplitError, ValidationError
from ..utils.logger import get_logger
from ..utils.validators import validate_identifier, validate_keys
from .models import (
    DatasetManifest, QualityTier, SampleRef, SplitSpec, SubjectEntry, TrainPool,
    ValidationReport
)
from .sample_io import load_sample

logger = get_logger(__name__)

MANIFEST_FIELDS = ('name', 'quality_tier', 'vertex_count', 'subjects',
                   'shared_image_ids', 'sample_index')
SUBJECT_FIELDS = ('subject_id', 'trials_per_image')
INDEX_FIELDS = ('subject_id', 'image_id', 'trial_index', 'path')


def manifest_from_dict(document: dict, root_dir: Path = None) -> DatasetManifest:
    """Build a manifest from its JSON document; unknown fields are rejected"""
    validate_keys(document, MANIFEST_FIELDS, "manifest", required=MANIFEST_FIELDS)

    subjects = []
    for i, entry in enumerate(document['subjects']):
        validate_keys(entry, SUBJECT_FIELDS, f"manifest.subjects[{i}]", required=SUBJECT_FIELDS)
        subjects.append(SubjectEntry(entry['subject_id'], entry['trials_per_image']))

    if not isinstance(document['shared_image_ids'], list):
        raise ValidationError("manifest.shared_image_ids must be a list")
    for image_id in document['shared_image_ids']:
        validate_identifier(image_id, "shared image id")

    sample_index = {}
    for i, entry in enumerate(document['sample_index']):
        validate_keys(entry, INDEX_FIELDS, f"manifest.sample_index[{i}]", required=INDEX_FIELDS)
        key = (entry['subject_id'], entry['image_id'], entry['trial_index'])
        if key in sample_index:
            raise ValidationError(f"manifest.sample_index has a duplicate entry for {key}")
        sample_index[key] = entry['path']

    try:
        tier = QualityTier(document['quality_tier'])
    except ValueError as e:
        raise ValidationError(f"unknown quality_tier {document['quality_tier']!r}") from e

    return DatasetManifest(
        name=document['name'],
        quality_tier=tier,
        vertex_count=document['vertex_count'],
        subjects=subjects,
        shared_image_ids=list(document['shared_image_ids']),
        sample_index=sample_index,
        root_dir=root_dir,
    )


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        'name': manifest.name,
        'quality_tier': manifest.quality_tier.value,
        'vertex_count': manifest.vertex_count,
        'subjects': [{'subject_id': s.subject_id, 'trials_per_image': s.trials_per_image}
                     for s in manifest.subjects],
        'shared_image_ids': list(manifest.shared_image_ids),
        'sample_index': [
            {'subject_id': s, 'image_id': i, 'trial_index': t, 'path': str(p)}
            for (s, i, t), p in sorted(manifest.sample_index.items())
        ],
    }


def load_manifest(path: Union[str, os.PathLike]) -> DatasetManifest:
    """Load a manifest; sample paths resolve against its directory"""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError as e:
        raise DataError(f"manifest not found: {path}") from e
    except json.JSONDecodeError as e:
        raise DecodeError(f"malformed manifest JSON ({e.msg})", e.pos, str(path)) from e
    return manifest_from_dict(document, root_dir=path.parent)


def save_manifest(manifest: DatasetManifest, path: Union[str, os.PathLike]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest_to_dict(manifest), indent=2), encoding='utf-8')
    return path


def validate_manifest(manifest: DatasetManifest, root_dir=None) -> ValidationReport:
    """Check a manifest against the files under ``root_dir``

    Every violation is collected; an empty report means the dataset is valid.
    """
    root = Path(root_dir) if root_dir is not None else manifest.root_dir
    if root is None or not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
        raise DataError(f"dataset root directory is not readable: {root}")

    report = ValidationReport(manifest.name)

    for image_id, count in sorted(Counter(manifest.shared_image_ids).items()):
        if count > 1:
            report.add('duplicate_image_id', f"shared image id '{image_id}' listed {count} times")
    for subject_id, count in sorted(Counter(manifest.subject_ids).items()):
        if count > 1:
            report.add('duplicate_subject', f"subject '{subject_id}' listed {count} times")

    subjects = {s.subject_id: s.trials_per_image for s in manifest.subjects}
    images = set(manifest.shared_image_ids)

    trial_counts = Counter()
    for key, relative_path in sorted(manifest.sample_index.items()):
        subject_id, image_id, _ = key
        if subject_id not in subjects or image_id not in images:
            report.add('unknown_reference',
                       "index entry refers to an undeclared subject or image", key)
        trial_counts[(subject_id, image_id)] += 1

        path = root / relative_path
        if not path.is_file():
            report.add('missing_file', f"{relative_path} does not exist", key)
            continue
        report.checked_samples += 1
        try:
            sample = load_sample(path)
        except DecodeError as e:
            report.add('decode_error', str(e), key)
            continue
        if sample.vertex_count != manifest.vertex_count:
            report.add('vertex_mismatch',
                       f"{relative_path} has V={sample.vertex_count}, "
                       f"manifest declares {manifest.vertex_count}", key)
        if sample.key != key:
            report.add('identity_mismatch',
                       f"{relative_path} carries identity {sample.key}", key)

    for subject_id, expected in sorted(subjects.items()):
        for image_id in sorted(images):
            found = trial_counts.get((subject_id, image_id), 0)
            if found != expected:
                report.add('trial_count',
                           f"subject '{subject_id}' image '{image_id}' has {found} trials, "
                           f"expected {expected}")

    if report.violations:
        logger.warning(f"Manifest '{manifest.name}' has {len(report)} violation(s)")
    else:
        logger.info(f"Manifest '{manifest.name}' valid ({report.checked_samples} samples)")
    return report


def make_split(low: DatasetManifest, high: DatasetManifest,
               spec: SplitSpec) -> Tuple[TrainPool, List[SampleRef]]:
    """Build the unpaired training pools and the held-out test set

    Pools and test set are restricted to the images shared by both
    manifests and ordered by (subject, image, trial).
    """
    test = set(spec.test_subjects_low)
    overlap = sorted(test & (set(spec.train_subjects_low) | set(spec.train_subjects_high)))
    if overlap:
        raise SplitError(f"test subjects also used for training: {overlap}")
    if not spec.train_subjects_low or not spec.train_subjects_high:
        raise SplitError("both training roles need at least one subject")

    for subject_ids, manifest, role in (
            (spec.train_subjects_low, low, 'train_subjects_low'),
            (spec.test_subjects_low, low, 'test_subjects_low'),
            (spec.train_subjects_high, high, 'train_subjects_high')):
        missing = sorted(set(subject_ids) - set(manifest.subject_ids))
        if missing:
            raise SplitError(f"{role} not present in manifest '{manifest.name}': {missing}")

    if low.vertex_count != high.vertex_count:
        raise SplitError(f"vertex counts differ: {low.vertex_count} vs {high.vertex_count}")

    shared = sorted(set(low.shared_image_ids) & set(high.shared_image_ids))
    if not shared:
        raise SplitError("the manifests share no image ids")
    if set(low.shared_image_ids) != set(high.shared_image_ids):
        logger.warning(f"Shared image lists differ; using the {len(shared)} common images")

    pool = TrainPool(
        low=low.refs(spec.train_subjects_low, shared),
        high=high.refs(spec.train_subjects_high, shared),
    )
    test_set = low.refs(spec.test_subjects_low, shared)
    logger.info(f"Split: {len(pool.low)} low-tier and {len(pool.high)} high-tier "
                f"training trials, {len(test_set)} test trials")
    return pool, test_set


def default_split(low: DatasetManifest, high: DatasetManifest) -> SplitSpec:
    """All but the last low-tier subject train, the last one is held out"""
    low_subjects = sorted(low.subject_ids)
    if len(low_subjects) < 2:
        raise SplitError("the default split needs at least two low-tier subjects")
    return SplitSpec(
        train_subjects_low=low_subjects[:-1],
        train_subjects_high=sorted(high.subject_ids),
        test_subjects_low=low_subjects[-1:],
    )
