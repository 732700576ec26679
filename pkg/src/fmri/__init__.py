"""Surface-mapped fMRI trials: types, file formats, manifests and preprocessing"""

from .manifest import (
    default_split, load_manifest, make_split, save_manifest, validate_manifest
)
from .models import (
    AVERAGED_TRIAL, DatasetManifest, FmriSample, QualityTier, SampleRef, SplitSpec,
    SubjectEntry, TrainPool, ValidationReport
)
from .preprocessing import highpass_temporal, smooth_spatial, trial_average
from .sample_io import load_sample, load_samples, save_sample

__all__ = [
    'AVERAGED_TRIAL', 'DatasetManifest', 'FmriSample', 'QualityTier', 'SampleRef',
    'SplitSpec', 'SubjectEntry', 'TrainPool', 'ValidationReport',
    'default_split', 'load_manifest', 'make_split', 'save_manifest', 'validate_manifest',
    'highpass_temporal', 'smooth_spatial', 'trial_average',
    'load_sample', 'load_samples', 'save_sample',
]
