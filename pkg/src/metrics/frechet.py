"""Frechet distance between Gaussian moments of two feature sets

    d^2 = ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2)

The inner product is symmetric PSD, so both square roots come from an
eigendecomposition with negative eigenvalues clamped to zero.
"""

from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, TypeVar

import numpy as np
from scipy import linalg

from ..utils.error_handler import ShapeError, ValidationError
from ..utils.validators import ensure_finite

SYMMETRY_TOLERANCE = 1e-8

T = TypeVar('T')


@dataclass
class FeatureSet:
    """n x d feature matrix with the label of its source"""
    features: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ShapeError(f"features must be an n x d matrix, got shape {self.features.shape}")
        n, d = self.features.shape
        if n < 2 or d < 1:
            raise ValidationError(f"a feature set needs n >= 2 and d >= 1, got {n} x {d}")
        ensure_finite(self.features, f"feature set '{self.label}'")

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass
class GaussianMoments:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        self.covariance = np.atleast_2d(np.asarray(self.covariance, dtype=np.float64))
        d = self.mean.shape[0]
        if self.mean.ndim != 1 or self.covariance.shape != (d, d):
            raise ShapeError(f"mean {self.mean.shape} and covariance {self.covariance.shape} "
                             f"are inconsistent")
        _check_symmetric(self.covariance, "covariance")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def _check_symmetric(A: np.ndarray, what: str):
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_TOLERANCE * scale:
        raise ValidationError(f"{what} is not symmetric within {SYMMETRY_TOLERANCE:g}")


def fit_moments(features: FeatureSet) -> GaussianMoments:
    """Sample mean and unbiased (n - 1) covariance, symmetrized"""
    X = features.features
    if X.shape[0] < 2:
        raise ValidationError("moments need at least two feature rows")
    mean = X.mean(axis=0)
    centered = X - mean
    covariance = centered.T @ centered / (X.shape[0] - 1)
    return GaussianMoments(mean, (covariance + covariance.T) / 2)


def sqrtm_psd(A: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root by eigendecomposition"""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"square root needs a square matrix, got shape {A.shape}")
    _check_symmetric(A, "matrix")
    eigenvalues, eigenvectors = linalg.eigh((A + A.T) / 2)
    root = (eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.T
    return (root + root.T) / 2


def frechet_distance(a: GaussianMoments, b: GaussianMoments) -> float:
    if a.dim != b.dim:
        raise ShapeError(f"cannot compare moments of dimension {a.dim} and {b.dim}")
    root_a = sqrtm_psd(a.covariance)
    inner = root_a @ b.covariance @ root_a
    cross = sqrtm_psd((inner + inner.T) / 2)
    trace_term = float(np.trace(a.covariance) + np.trace(b.covariance) - 2.0 * np.trace(cross))
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    return mean_term + max(trace_term, 0.0)


def feature_distance(a: FeatureSet, b: FeatureSet) -> float:
    return frechet_distance(fit_moments(a), fit_moments(b))


def best_of_k(candidates: Sequence[T], score: Callable[[T], float]) -> Tuple[int, T]:
    """Lowest-scoring candidate; among equal scores the first one wins"""
    if not candidates:
        raise ValidationError("best_of_k needs at least one candidate")
    best_index, best_score = 0, score(candidates[0])
    for index in range(1, len(candidates)):
        value = score(candidates[index])
        if value < best_score:
            best_index, best_score = index, value
    return best_index, candidates[best_index]


def moment_diagnostics(moments: GaussianMoments) -> dict:
    """Eigenvalue range and condition number of the covariance"""
    eigenvalues = linalg.eigvalsh(moments.covariance)
    smallest, largest = float(eigenvalues[0]), float(eigenvalues[-1])
    clamped = int(np.sum(eigenvalues < 0.0))
    condition = largest / smallest if smallest > 0.0 else None
    return {
        'dim': moments.dim,
        'min_eigenvalue': smallest,
        'max_eigenvalue': largest,
        'condition_number': condition,
        'clamped_eigenvalues': clamped,
        'trace': float(np.trace(moments.covariance)),
    }

