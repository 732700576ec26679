"""Versioned torch containers for checkpoints and regression heads"""

import os
from pathlib import Path
from typing import Iterable, Union

import torch

from .error_handler import DataError

CONTAINER_VERSION = 1


def save_container(path: Union[str, os.PathLike], kind: str, payload: dict) -> Path:
    """Write ``payload`` tagged with its kind and the container version

    The file is written next to its destination first and moved into place.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {'format': kind, 'version': CONTAINER_VERSION}
    document.update(payload)
    tmp_path = path.with_name(path.name + '.tmp')
    torch.save(document, tmp_path)
    os.replace(tmp_path, path)
    return path


def load_container(path: Union[str, os.PathLike], kind: str,
                   fields: Iterable[str]) -> dict:
    """Load a container and require exactly the expected fields"""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{kind} file not found: {path}")
    try:
        document = torch.load(path, map_location='cpu', weights_only=True)
    except Exception as e:
        raise DataError(f"cannot read {kind} file {path}: {e}") from e

    if not isinstance(document, dict) or document.get('format') != kind:
        raise DataError(f"{path} is not a {kind} file")
    if document.get('version') != CONTAINER_VERSION:
        raise DataError(f"{path}: unsupported {kind} version {document.get('version')}")

    expected = set(fields) | {'format', 'version'}
    unknown = sorted(set(document) - expected)
    missing = sorted(expected - set(document))
    if unknown or missing:
        raise DataError(f"{path}: unexpected fields {unknown}, missing fields {missing}")
    return document
