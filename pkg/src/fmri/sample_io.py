"""Flat binary sample file format

Layout, all integers little-endian:

    0   16 bytes   magic b"OTF1" followed by 12 reserved zero bytes
    16  u64        V, vertices per hemisphere
    24  2*V f32    channel 0 values then channel 1 values
    ..  u32        metadata length M
    ..  M bytes    UTF-8 JSON {subject_id, image_id, trial_index, quality_tier}
"""

import json
import os
import struct
from pathlib import Path
from typing import List, Union

import numpy as np

from ..utils.error_handler import DecodeError, ValidationError
from ..utils.logger import get_logger
from .models import FmriSample, N_CHANNELS, SampleRef

logger = get_logger(__name__)

MAGIC = b"OTF1"
HEADER = MAGIC + bytes(12)
HEADER_SIZE = len(HEADER)
VERTEX_FIELD = struct.Struct('<Q')
META_LENGTH_FIELD = struct.Struct('<I')
PAYLOAD_OFFSET = HEADER_SIZE + VERTEX_FIELD.size
METADATA_FIELDS = ('subject_id', 'image_id', 'trial_index', 'quality_tier')

PathLike = Union[str, os.PathLike]


def encode_sample(sample: FmriSample) -> bytes:
    metadata = json.dumps({
        'subject_id': sample.subject_id,
        'image_id': sample.image_id,
        'trial_index': sample.trial_index,
        'quality_tier': sample.quality_tier.value,
    }, sort_keys=True, separators=(',', ':')).encode('utf-8')

    return b''.join([
        HEADER,
        VERTEX_FIELD.pack(sample.vertex_count),
        sample.channels.astype('<f4', copy=False).tobytes(order='C'),
        META_LENGTH_FIELD.pack(len(metadata)),
        metadata,
    ])


def encoded_size(vertex_count: int, metadata_length: int) -> int:
    return PAYLOAD_OFFSET + N_CHANNELS * vertex_count * 4 + META_LENGTH_FIELD.size + metadata_length


def decode_sample(data: bytes, path: str = None) -> FmriSample:
    """Decode a sample, raising DecodeError with the failing byte offset"""
    if len(data) < HEADER_SIZE:
        raise DecodeError("truncated header", len(data), path)
    if data[:len(MAGIC)] != MAGIC:
        raise DecodeError(f"bad magic {data[:len(MAGIC)]!r}", 0, path)

    if len(data) < PAYLOAD_OFFSET:
        raise DecodeError("truncated vertex count", len(data), path)
    (vertex_count,) = VERTEX_FIELD.unpack_from(data, HEADER_SIZE)
    if vertex_count == 0:
        raise DecodeError("vertex count is zero", HEADER_SIZE, path)

    payload_size = N_CHANNELS * vertex_count * 4
    payload_end = PAYLOAD_OFFSET + payload_size
    if len(data) < payload_end:
        raise DecodeError(
            f"truncated payload ({len(data) - PAYLOAD_OFFSET} of {payload_size} bytes)",
            len(data), path)

    values = np.frombuffer(data, dtype='<f4', count=N_CHANNELS * vertex_count,
                           offset=PAYLOAD_OFFSET)
    finite = np.isfinite(values)
    if not finite.all():
        index = int(np.flatnonzero(~finite)[0])
        raise DecodeError("non-finite value", PAYLOAD_OFFSET + 4 * index, path)

    if len(data) < payload_end + META_LENGTH_FIELD.size:
        raise DecodeError("truncated metadata length", len(data), path)
    (meta_length,) = META_LENGTH_FIELD.unpack_from(data, payload_end)
    meta_start = payload_end + META_LENGTH_FIELD.size
    meta_end = meta_start + meta_length
    if len(data) < meta_end:
        raise DecodeError("truncated metadata", len(data), path)
    if len(data) > meta_end:
        raise DecodeError("trailing bytes after metadata", meta_end, path)

    try:
        metadata = json.loads(data[meta_start:meta_end].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DecodeError(f"malformed metadata ({e})", meta_start, path) from e
    if not isinstance(metadata, dict) or set(metadata) - set(METADATA_FIELDS) \
            or not {'subject_id', 'image_id', 'trial_index'} <= set(metadata):
        raise DecodeError("metadata fields do not match the sample format", meta_start, path)

    try:
        return FmriSample(
            subject_id=metadata['subject_id'],
            image_id=metadata['image_id'],
            trial_index=metadata['trial_index'],
            channels=values.reshape(N_CHANNELS, vertex_count).astype(np.float32),
            quality_tier=metadata.get('quality_tier', 'low'),
        )
    except (ValidationError, ValueError) as e:
        raise DecodeError(f"invalid metadata ({e})", meta_start, path) from e


def save_sample(sample: FmriSample, path: PathLike) -> Path:
    """Write one sample file; concurrent writers to one path are a caller error"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_sample(sample))
    return path


def load_sample(path: PathLike) -> FmriSample:
    path = Path(path)
    return decode_sample(path.read_bytes(), str(path))


def load_samples(refs: List[SampleRef]) -> List[FmriSample]:
    """Load referenced samples in order"""
    samples = []
    for ref in refs:
        sample = load_sample(ref.path)
        if sample.key != ref.key:
            raise DecodeError(f"file identity {sample.key} does not match index entry {ref.key}",
                              0, str(ref.path))
        samples.append(sample)
    logger.debug(f"Loaded {len(samples)} samples")
    return samples


def stack_channels(samples: List[FmriSample]) -> np.ndarray:
    """Stack samples into an (n, 2, V) float32 array"""
    if not samples:
        raise ValidationError("cannot stack an empty sample list")
    return np.stack([s.channels for s in samples]).astype(np.float32, copy=False)
