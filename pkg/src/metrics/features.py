"""Feature files: JSON sidecar plus flat row-major float32 payload"""

from pathlib import Path
from typing import Optional, Sequence, Union

from ..fmri.matrix_io import load_matrix_file, save_matrix_file
from ..utils.error_handler import DataError
from .frechet import FeatureSet


def load_features(path: Union[str, Path]) -> FeatureSet:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"feature file not found: {path}")
    matrix, descriptor = load_matrix_file(path)
    return FeatureSet(matrix, label=descriptor.get('label') or path.stem)


def save_features(features: FeatureSet, path: Union[str, Path],
                  row_ids: Optional[Sequence[str]] = None) -> Path:
    return save_matrix_file(features.features, Path(path), label=features.label,
                            row_ids=list(row_ids) if row_ids is not None else None)
