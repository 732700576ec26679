"""Synthetic oracle datasets with known clean signals, degradation and latents"""

from .generator import build_ground_truth, generate, load_ground_truth, save_ground_truth
from .models import DegradationSpec, GroundTruth, SynthConfig
from .oracle import deconvolution_gain, degrade, oracle_enhance

__all__ = [
    'DegradationSpec', 'GroundTruth', 'SynthConfig',
    'build_ground_truth', 'generate', 'load_ground_truth', 'save_ground_truth',
    'deconvolution_gain', 'degrade', 'oracle_enhance',
]
