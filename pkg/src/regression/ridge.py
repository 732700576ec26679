"""Closed-form ridge heads mapping fMRI vectors to latent targets

Solutions come from a thin SVD of the centered design, X_c = U S V^T,
so that every ridge strength costs one diagonal rescaling:

    W^T = V diag(s / (s^2 + alpha)) U^T Y_c
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import torch
from scipy import linalg
from sklearn import metrics
from sklearn.model_selection import KFold

from ..fmri.models import FmriSample
from ..utils.container import load_container, save_container
from ..utils.error_handler import ShapeError, ValidationError
from ..utils.logger import get_logger
from ..utils.validators import ensure_finite

logger = get_logger(__name__)

DEFAULT_ALPHA_GRID = (1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
DEFAULT_FOLDS = 5
FOLD_SEED = 20240101
HEAD_FORMAT = 'otfmri-regression-head'
HEAD_FIELDS = ('kind', 'alpha', 'weight', 'bias', 'cv_scores')

# Relative score difference treated as a tie between ridge strengths
TIE_TOLERANCE = 1e-12


class LatentKind(Enum):
    VISUAL = "visual"
    SEMANTIC = "semantic"


@dataclass
class RegressionHead:
    weight: np.ndarray          # (d_out, 2V)
    bias: np.ndarray            # (d_out,)
    alpha: float
    kind: LatentKind
    cv_scores: Dict[float, float] = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = LatentKind(self.kind)
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(f"head weight {self.weight.shape} and bias {self.bias.shape} "
                             f"are inconsistent")
        ensure_finite(self.weight, "head weight")
        ensure_finite(self.bias, "head bias")

    @property
    def input_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def output_dim(self) -> int:
        return self.weight.shape[0]


def design_matrix(samples: List[FmriSample]) -> np.ndarray:
    """(n, 2V) float64 design, channel 0 values first in each row"""
    if not samples:
        raise ValidationError("design matrix needs at least one sample")
    return np.stack([s.flatten() for s in samples]).astype(np.float64)


def _check_inputs(X: np.ndarray, Y: np.ndarray, alphas: Sequence[float]):
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, np.newaxis]
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ShapeError(f"design {X.shape} and targets {Y.shape} do not align")
    if X.shape[0] < 2:
        raise ValidationError("ridge fitting needs at least two rows")
    ensure_finite(X, "design matrix")
    ensure_finite(Y, "targets")
    if not alphas or any(not np.isfinite(a) or a <= 0 for a in alphas):
        raise ValidationError(f"ridge strengths must be positive and finite, got {list(alphas)}")
    return X, Y


def _factorize(X_c: np.ndarray):
    U, s, Vt = linalg.svd(X_c, full_matrices=False, lapack_driver='gesdd')
    return U, s, Vt


def _weights(factors, Y_c: np.ndarray, alpha: float) -> np.ndarray:
    U, s, Vt = factors
    shrink = s / (s ** 2 + alpha)
    return ((Vt.T * shrink) @ (U.T @ Y_c)).T


def ridge_path(X: np.ndarray, Y: np.ndarray, alphas: Sequence[float]) -> Dict[float, np.ndarray]:
    """Centered ridge weights (d_out, p) for every strength in ``alphas``"""
    X, Y = _check_inputs(X, Y, alphas)
    factors = _factorize(X - X.mean(axis=0))
    Y_c = Y - Y.mean(axis=0)
    return {float(a): _weights(factors, Y_c, a) for a in alphas}


def r2_score(Y: np.ndarray, Y_hat: np.ndarray) -> float:
    """Coefficient of determination averaged over outputs with non-zero variance"""
    Y = np.asarray(Y, dtype=np.float64)
    Y_hat = np.asarray(Y_hat, dtype=np.float64)
    if Y.ndim == 1:
        Y, Y_hat = Y[:, np.newaxis], Y_hat[:, np.newaxis]
    informative = Y.var(axis=0) > 0
    if not informative.any():
        return 0.0
    scores = metrics.r2_score(Y[:, informative], Y_hat[:, informative], multioutput='raw_values')
    return float(np.mean(scores))


def fold_assignment(n: int, n_folds: int) -> List[np.ndarray]:
    """Seeded, deterministic partition of ``range(n)`` into folds"""
    folds = KFold(n_splits=min(n_folds, n), shuffle=True, random_state=FOLD_SEED)
    return [held_out for _, held_out in folds.split(np.empty((n, 1)))]


def cross_validated_r2(X: np.ndarray, Y: np.ndarray, alphas: Sequence[float],
                       n_folds: int = DEFAULT_FOLDS) -> Dict[float, float]:
    """Pooled out-of-fold R^2 for every ridge strength"""
    if isinstance(n_folds, bool) or not isinstance(n_folds, int) or n_folds < 2:
        raise ValidationError(f"cross-validation needs at least two folds, got {n_folds!r}")
    X, Y = _check_inputs(X, Y, alphas)
    predictions = {float(a): np.empty_like(Y) for a in alphas}

    for fold in fold_assignment(X.shape[0], n_folds):
        train = np.ones(X.shape[0], dtype=bool)
        train[fold] = False
        x_mean = X[train].mean(axis=0)
        y_mean = Y[train].mean(axis=0)
        factors = _factorize(X[train] - x_mean)
        Y_c = Y[train] - y_mean
        X_held = X[fold] - x_mean
        for alpha in predictions:
            predictions[alpha][fold] = X_held @ _weights(factors, Y_c, alpha).T + y_mean

    return {alpha: r2_score(Y, Y_hat) for alpha, Y_hat in predictions.items()}


def select_alpha(scores: Dict[float, float]) -> float:
    """Best cross-validated strength; ties go to the larger alpha"""
    best_alpha, best_score = None, -np.inf
    for alpha in sorted(scores, reverse=True):
        score = scores[alpha]
        if best_alpha is None or score > best_score + TIE_TOLERANCE * max(1.0, abs(best_score)):
            best_alpha, best_score = alpha, score
    return best_alpha


def fit_head(X: np.ndarray, Y: np.ndarray, alpha_grid: Sequence[float] = DEFAULT_ALPHA_GRID,
             kind: Union[LatentKind, str] = LatentKind.VISUAL,
             n_folds: int = DEFAULT_FOLDS) -> RegressionHead:
    """Ridge head with alpha chosen by k-fold cross-validated R^2"""
    X, Y = _check_inputs(X, Y, alpha_grid)
    scores = cross_validated_r2(X, Y, alpha_grid, n_folds)
    alpha = select_alpha(scores)

    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    weight = _weights(_factorize(X - x_mean), Y - y_mean, alpha)
    bias = y_mean - weight @ x_mean

    head = RegressionHead(weight=weight, bias=bias, alpha=alpha, kind=kind, cv_scores=scores)
    logger.info(f"Fitted {head.kind.value} head: alpha={alpha:g}, "
                f"cv R2={scores[alpha]:.4f}, n={X.shape[0]}, p={X.shape[1]}")
    return head


def predict_latents(head: RegressionHead,
                    x: Union[FmriSample, np.ndarray]) -> np.ndarray:
    """Affine map W x + b for one vector (2V,) or a batch (n, 2V)"""
    if isinstance(x, FmriSample):
        x = x.flatten()
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != head.input_dim or x.ndim not in (1, 2):
        raise ShapeError(f"input of shape {x.shape} does not match head input {head.input_dim}")
    return x @ head.weight.T + head.bias


def save_head(head: RegressionHead, path: Path) -> Path:
    return save_container(path, HEAD_FORMAT, {
        'kind': head.kind.value,
        'alpha': float(head.alpha),
        'weight': torch.from_numpy(np.ascontiguousarray(head.weight, dtype=np.float32)),
        'bias': torch.from_numpy(np.ascontiguousarray(head.bias, dtype=np.float32)),
        'cv_scores': {str(a): float(s) for a, s in head.cv_scores.items()},
    })


def load_head(path: Path) -> RegressionHead:
    document = load_container(path, HEAD_FORMAT, HEAD_FIELDS)
    return RegressionHead(
        weight=document['weight'].numpy().astype(np.float64),
        bias=document['bias'].numpy().astype(np.float64),
        alpha=document['alpha'],
        kind=document['kind'],
        cv_scores={float(a): s for a, s in document['cv_scores'].items()},
    )
