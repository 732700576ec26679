"""Linear latent decoding heads and diffusion forward-noising utilities"""

from .decoder import ToyDecoder, toy_decode
from .diffusion import NoiseSchedule, forward_noise
from .ridge import (
    DEFAULT_ALPHA_GRID, LatentKind, RegressionHead, cross_validated_r2, design_matrix,
    fit_head, load_head, predict_latents, r2_score, ridge_path, save_head
)
from .targets import LatentTargets, load_latent_targets, save_latent_targets

__all__ = [
    'ToyDecoder', 'toy_decode', 'NoiseSchedule', 'forward_noise',
    'DEFAULT_ALPHA_GRID', 'LatentKind', 'RegressionHead', 'cross_validated_r2',
    'design_matrix', 'fit_head', 'load_head', 'predict_latents', 'r2_score',
    'ridge_path', 'save_head',
    'LatentTargets', 'load_latent_targets', 'save_latent_targets',
]
