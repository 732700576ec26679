"""Data models for surface-mapped fMRI trials, manifests and splits"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..utils.error_handler import ShapeError, ValidationError
from ..utils.validators import (
    ensure_finite, validate_identifier, validate_positive_int
)

# Left and right hemisphere
N_CHANNELS = 2

# trial_index of a trial-averaged sample
AVERAGED_TRIAL = -1

SampleKey = Tuple[str, str, int]


class QualityTier(Enum):
    """Acquisition quality of a dataset"""
    LOW = "low"
    HIGH = "high"
    ENHANCED = "enhanced"


@dataclass
class FmriSample:
    """One trial: two hemisphere channels of V vertex values"""
    subject_id: str
    image_id: str
    trial_index: int
    channels: np.ndarray
    quality_tier: QualityTier = QualityTier.LOW

    def __post_init__(self):
        validate_identifier(self.subject_id, "subject_id")
        validate_identifier(self.image_id, "image_id")
        if isinstance(self.trial_index, bool) or not isinstance(self.trial_index, (int, np.integer)):
            raise ValidationError(f"trial_index must be an integer, got {self.trial_index!r}")
        self.trial_index = int(self.trial_index)
        if self.trial_index < 0 and self.trial_index != AVERAGED_TRIAL:
            raise ValidationError(f"trial_index must be non-negative, got {self.trial_index}")

        if isinstance(self.quality_tier, str):
            self.quality_tier = QualityTier(self.quality_tier)

        channels = np.ascontiguousarray(self.channels, dtype=np.float32)
        if channels.ndim != 2 or channels.shape[0] != N_CHANNELS:
            raise ShapeError(f"channels must have shape (2, V), got {channels.shape}")
        if channels.shape[1] < 1:
            raise ShapeError("vertex count must be positive")
        ensure_finite(channels, f"sample {self.key}")
        self.channels = channels

    @property
    def vertex_count(self) -> int:
        return self.channels.shape[1]

    @property
    def key(self) -> SampleKey:
        return (self.subject_id, self.image_id, self.trial_index)

    def flatten(self) -> np.ndarray:
        """Design vector of length 2V, channel 0 first"""
        return self.channels.reshape(-1)

    def with_channels(self, channels: np.ndarray,
                      quality_tier: Optional[QualityTier] = None) -> 'FmriSample':
        """Copy of this sample with new values and the same identity"""
        return FmriSample(
            subject_id=self.subject_id,
            image_id=self.image_id,
            trial_index=self.trial_index,
            channels=channels,
            quality_tier=quality_tier or self.quality_tier,
        )


@dataclass
class SubjectEntry:
    subject_id: str
    trials_per_image: int

    def __post_init__(self):
        validate_identifier(self.subject_id, "subject_id")
        validate_positive_int(self.trials_per_image, "trials_per_image")


@dataclass(frozen=True)
class SampleRef:
    """Index entry pointing at one sample file"""
    subject_id: str
    image_id: str
    trial_index: int
    path: Path

    @property
    def key(self) -> SampleKey:
        return (self.subject_id, self.image_id, self.trial_index)


@dataclass
class DatasetManifest:
    """Declarative description of one dataset on disk

    ``sample_index`` maps (subject_id, image_id, trial_index) to a path
    relative to ``root_dir``; ``root_dir`` is not serialized.
    """
    name: str
    quality_tier: QualityTier
    vertex_count: int
    subjects: List[SubjectEntry]
    shared_image_ids: List[str]
    sample_index: Dict[SampleKey, str] = field(default_factory=dict)
    root_dir: Optional[Path] = field(default=None, compare=False)

    def __post_init__(self):
        if isinstance(self.quality_tier, str):
            self.quality_tier = QualityTier(self.quality_tier)
        validate_positive_int(self.vertex_count, "vertex_count")

    @property
    def subject_ids(self) -> List[str]:
        return [s.subject_id for s in self.subjects]

    def trials_per_image(self, subject_id: str) -> int:
        for entry in self.subjects:
            if entry.subject_id == subject_id:
                return entry.trials_per_image
        raise KeyError(subject_id)

    def resolve(self, relative_path: str) -> Path:
        path = Path(relative_path)
        if self.root_dir is not None and not path.is_absolute():
            return Path(self.root_dir) / path
        return path

    def refs(self, subject_ids: Optional[List[str]] = None,
             image_ids: Optional[List[str]] = None) -> List[SampleRef]:
        """Sample references sorted by (subject, image, trial)"""
        subjects = set(subject_ids) if subject_ids is not None else None
        images = set(image_ids) if image_ids is not None else None
        refs = [
            SampleRef(s, i, t, self.resolve(p))
            for (s, i, t), p in self.sample_index.items()
            if (subjects is None or s in subjects) and (images is None or i in images)
        ]
        return sorted(refs, key=lambda r: r.key)

    @property
    def sample_count(self) -> int:
        return len(self.sample_index)


@dataclass
class SplitSpec:
    train_subjects_low: List[str]
    train_subjects_high: List[str]
    test_subjects_low: List[str]


@dataclass
class TrainPool:
    """Unpaired training pools: low tier is side Y, high tier is side X"""
    low: List[SampleRef]
    high: List[SampleRef]


@dataclass
class Violation:
    kind: str
    detail: str
    key: Optional[SampleKey] = None

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'detail': self.detail,
                'key': list(self.key) if self.key else None}


@dataclass
class ValidationReport:
    manifest_name: str
    checked_samples: int = 0
    violations: List[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        # Truthy when there is something to report
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def add(self, kind: str, detail: str, key: Optional[SampleKey] = None):
        self.violations.append(Violation(kind, detail, key))

    def of_kind(self, kind: str) -> List[Violation]:
        return [v for v in self.violations if v.kind == kind]

    def to_dict(self) -> dict:
        return {
            'manifest': self.manifest_name,
            'checked_samples': self.checked_samples,
            'valid': self.is_valid,
            'violations': [v.to_dict() for v in self.violations],
        }
