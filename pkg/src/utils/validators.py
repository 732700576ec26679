"""Input validation utilities for the otfmri package"""

import math
import re
from typing import Iterable, Mapping, Optional, Set

import numpy as np

from .error_handler import ValidationError

_IDENTIFIER = re.compile(r'^[A-Za-z0-9][A-Za-z0-9._\-]*$')


def validate_identifier(value, what: str = "identifier") -> str:
    """Validate subject/image identifiers used in manifests and file names"""
    if not isinstance(value, str) or not value:
        raise ValidationError(f"{what} must be a non-empty string")
    if len(value) > 128:
        raise ValidationError(f"{what} '{value[:20]}...' is longer than 128 characters")
    if not _IDENTIFIER.match(value):
        raise ValidationError(f"{what} '{value}' contains invalid characters")
    return value


def validate_positive_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value <= 0:
        raise ValidationError(f"{what} must be a positive integer, got {value!r}")
    return int(value)


def validate_non_negative_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 0:
        raise ValidationError(f"{what} must be a non-negative integer, got {value!r}")
    return int(value)


def validate_real(value, what: str, minimum: Optional[float] = None,
                  exclusive: bool = False) -> float:
    """Validate a finite real number with an optional lower bound"""
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
        raise ValidationError(f"{what} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{what} must be finite, got {value}")
    if minimum is not None:
        if exclusive and value <= minimum:
            raise ValidationError(f"{what} must be > {minimum}, got {value}")
        if not exclusive and value < minimum:
            raise ValidationError(f"{what} must be >= {minimum}, got {value}")
    return value


def ensure_finite(array: np.ndarray, what: str) -> np.ndarray:
    """Raise naming the first non-finite flat index of ``array``"""
    finite = np.isfinite(array)
    if not finite.all():
        index = int(np.flatnonzero(~finite.reshape(-1))[0])
        position = (tuple(int(i) for i in np.unravel_index(index, array.shape))
                    if array.ndim > 1 else index)
        raise ValidationError(f"{what} contains a non-finite value at index {position}")
    return array


def validate_keys(document: Mapping, allowed: Iterable[str], what: str,
                  required: Optional[Iterable[str]] = None) -> None:
    """Reject unknown keys and report missing required ones"""
    if not isinstance(document, Mapping):
        raise ValidationError(f"{what} must be a JSON object")
    allowed_set: Set[str] = set(allowed)
    unknown = sorted(set(document) - allowed_set)
    if unknown:
        raise ValidationError(f"{what} has unknown fields: {unknown}")
    if required is not None:
        missing = sorted(set(required) - set(document))
        if missing:
            raise ValidationError(f"{what} is missing fields: {missing}")
