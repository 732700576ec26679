"""Frechet distance evaluation of feature sets"""

from .features import load_features, save_features
from .frechet import (
    FeatureSet, GaussianMoments, best_of_k, feature_distance, fit_moments,
    frechet_distance, moment_diagnostics, sqrtm_psd
)

__all__ = [
    'load_features', 'save_features',
    'FeatureSet', 'GaussianMoments', 'best_of_k', 'feature_distance', 'fit_moments',
    'frechet_distance', 'moment_diagnostics', 'sqrtm_psd',
]
