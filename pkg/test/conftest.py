"""Shared fixtures for the otfmri test suite"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.fmri.models import FmriSample, QualityTier  # noqa: E402
from src.synth.generator import generate  # noqa: E402
from src.synth.models import DegradationSpec, SynthConfig  # noqa: E402
from src.utils.logger import LoggerSetup  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long oracle training runs (deselect with -m 'not slow')")


@pytest.fixture(autouse=True)
def _quiet_logs(tmp_path_factory):
    """Keep test logs out of the working tree"""
    log_dir = tmp_path_factory.getbasetemp() / 'logs'
    LoggerSetup.configure({'level': 'WARNING', 'file_path': str(log_dir / 'otfmri.log')})
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_sample(rng):
    def _make(vertex_count=16, subject_id='lsub01', image_id='img0001', trial_index=0,
              tier=QualityTier.LOW, channels=None):
        if channels is None:
            channels = rng.standard_normal((2, vertex_count))
        return FmriSample(subject_id, image_id, trial_index, channels, tier)
    return _make


@pytest.fixture
def small_synth_config():
    """A few subjects, images and trials at V=32"""
    return SynthConfig(
        vertex_count=32,
        n_images=5,
        n_subjects_low=3,
        n_subjects_high=2,
        trials_per_image_low=4,
        trials_per_image_high=2,
        latent_dim_visual=3,
        latent_dim_semantic=2,
        encoding_seed=7,
        noise_sigma_high=0.05,
        degradation=DegradationSpec(blur_fwhm_vertices=2.0, gain=1.5, bias=0.5,
                                    noise_sigma_low=0.05),
    )


@pytest.fixture
def small_dataset(tmp_path, small_synth_config):
    """(low manifest, high manifest, ground truth, dataset directory)"""
    low, high, truth = generate(small_synth_config, tmp_path / 'data')
    return low, high, truth, tmp_path / 'data'
