"""Latent regression targets indexed by image id"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np

from ..fmri.matrix_io import read_matrix, write_matrix
from ..utils.error_handler import DataError, DecodeError, ShapeError
from ..utils.validators import validate_keys

TARGET_FIELDS = ('image_ids', 'visual', 'semantic')


@dataclass
class LatentTargets:
    """Per-image (visual, semantic) latent pairs"""
    image_ids: List[str]
    visual: np.ndarray      # (n_images, d_z)
    semantic: np.ndarray    # (n_images, d_c)

    def __post_init__(self):
        self.visual = np.asarray(self.visual, dtype=np.float64)
        self.semantic = np.asarray(self.semantic, dtype=np.float64)
        n = len(self.image_ids)
        if self.visual.shape[0] != n or self.semantic.shape[0] != n:
            raise ShapeError("latent target rows do not match the image ids")
        if len(set(self.image_ids)) != n:
            raise DataError("latent targets list an image id more than once")

    def rows_for(self, image_ids: List[str], kind: str) -> np.ndarray:
        """Target rows for ``image_ids``; every unknown id is reported at once"""
        lookup = {image_id: i for i, image_id in enumerate(self.image_ids)}
        missing = sorted({i for i in image_ids if i not in lookup})
        if missing:
            raise DataError(f"no latent targets for image ids: {missing}")
        matrix = self.visual if kind == 'visual' else self.semantic
        return matrix[[lookup[i] for i in image_ids]]


def save_latent_targets(targets: LatentTargets, path: Path) -> Path:
    path = Path(path)
    stem = path.stem
    document = {
        'image_ids': list(targets.image_ids),
        'visual': write_matrix(targets.visual, path.parent, f"{stem}_visual"),
        'semantic': write_matrix(targets.semantic, path.parent, f"{stem}_semantic"),
    }
    path.write_text(json.dumps(document, indent=2))
    return path


def load_latent_targets(path: Path) -> LatentTargets:
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except FileNotFoundError as e:
        raise DataError(f"latent target file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise DecodeError(f"malformed latent targets ({e.msg})", e.pos, str(path)) from e
    validate_keys(document, TARGET_FIELDS, "latent targets", required=TARGET_FIELDS)
    return LatentTargets(
        image_ids=list(document['image_ids']),
        visual=read_matrix(document['visual'], path.parent, 'visual'),
        semantic=read_matrix(document['semantic'], path.parent, 'semantic'),
    )
