"""Configuration and ground-truth models of the synthetic oracle dataset"""

from dataclasses import asdict, dataclass, field
from typing import Dict, List

import numpy as np

from ..fmri.models import N_CHANNELS
from ..utils.error_handler import ValidationError
from ..utils.validators import validate_non_negative_int, validate_positive_int, validate_real


@dataclass
class DegradationSpec:
    """Affine gain/bias, Gaussian blur and additive noise of the low tier"""
    blur_fwhm_vertices: float = 0.0
    gain: float = 1.0
    bias: float = 0.0
    noise_sigma_low: float = 0.0

    def __post_init__(self):
        self.blur_fwhm_vertices = validate_real(self.blur_fwhm_vertices, "blur_fwhm_vertices",
                                                minimum=0.0)
        self.gain = validate_real(self.gain, "gain")
        if self.gain == 0.0:
            raise ValidationError("gain must be non-zero so the degradation stays invertible")
        self.bias = validate_real(self.bias, "bias")
        self.noise_sigma_low = validate_real(self.noise_sigma_low, "noise_sigma_low", minimum=0.0)


@dataclass
class SynthConfig:
    vertex_count: int = 1024
    n_images: int = 70
    n_subjects_low: int = 9
    n_subjects_high: int = 8
    trials_per_image_low: int = 10
    trials_per_image_high: int = 3
    latent_dim_visual: int = 8
    latent_dim_semantic: int = 8
    encoding_seed: int = 0
    noise_sigma_high: float = 0.05
    degradation: DegradationSpec = field(default_factory=DegradationSpec)
    subject_offset_sigma: float = 0.1
    encoding_smoothness_fwhm: float = 6.0

    def __post_init__(self):
        if isinstance(self.degradation, dict):
            self.degradation = DegradationSpec(**self.degradation)
        for name in ('vertex_count', 'n_images', 'n_subjects_low', 'n_subjects_high',
                     'trials_per_image_low', 'trials_per_image_high',
                     'latent_dim_visual', 'latent_dim_semantic'):
            validate_positive_int(getattr(self, name), name)
        validate_non_negative_int(self.encoding_seed, "encoding_seed")
        validate_real(self.noise_sigma_high, "noise_sigma_high", minimum=0.0)
        validate_real(self.subject_offset_sigma, "subject_offset_sigma", minimum=0.0)
        validate_real(self.encoding_smoothness_fwhm, "encoding_smoothness_fwhm", minimum=0.0)

    @classmethod
    def full_scale(cls, **overrides) -> 'SynthConfig':
        """Nine low-tier subjects x 10 trials, eight high-tier x 3, 70 images"""
        values = dict(n_images=70, n_subjects_low=9, n_subjects_high=8,
                      trials_per_image_low=10, trials_per_image_high=3)
        values.update(overrides)
        return cls(**values)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GroundTruth:
    """Latents, encoding matrices and subject offsets behind every trial

    The clean high-quality signal of a (subject, image) pair is
    ``W_z z + W_c c + offset``; it is identical across that pair's trials.
    """
    vertex_count: int
    image_ids: List[str]
    latents_visual: np.ndarray        # (n_images, d_z)
    latents_semantic: np.ndarray      # (n_images, d_c)
    encoding_visual: np.ndarray       # (2V, d_z)
    encoding_semantic: np.ndarray     # (2V, d_c)
    subject_offsets: Dict[str, np.ndarray] = field(default_factory=dict)

    def image_row(self, image_id: str) -> int:
        try:
            return self.image_ids.index(image_id)
        except ValueError:
            raise KeyError(image_id) from None

    def clean_signal(self, subject_id: str, image_id: str) -> np.ndarray:
        """Clean (2, V) signal in float64"""
        row = self.image_row(image_id)
        flat = (self.encoding_visual @ self.latents_visual[row]
                + self.encoding_semantic @ self.latents_semantic[row]
                + self.subject_offsets[subject_id])
        return flat.reshape(N_CHANNELS, self.vertex_count)
