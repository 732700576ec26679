"""Linear stand-in for the frozen image decoder, used to close the loop in tests"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from ..utils.error_handler import ShapeError


@dataclass
class ToyDecoder:
    """Renders a visual latent as a vector: ``weight @ z + bias``

    ``weight`` is the pseudo-inverse of the latent encoder, which itself is
    the pseudo-inverse of the synthetic encoding matrix.
    """
    weight: np.ndarray      # (d_out, d_z)
    bias: np.ndarray        # (d_out,)

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError("decoder weight and bias are inconsistent")
        self._encoder = linalg.pinv(self.weight)

    @classmethod
    def from_encoding(cls, encoding_visual: np.ndarray,
                      bias: Optional[np.ndarray] = None) -> 'ToyDecoder':
        encoder = linalg.pinv(np.asarray(encoding_visual, dtype=np.float64))
        weight = linalg.pinv(encoder)
        if bias is None:
            bias = np.zeros(weight.shape[0])
        return cls(weight, bias)

    @classmethod
    def from_ground_truth(cls, truth) -> 'ToyDecoder':
        return cls.from_encoding(truth.encoding_visual)

    @property
    def latent_dim(self) -> int:
        return self.weight.shape[1]

    def toy_decode(self, z_visual: np.ndarray) -> np.ndarray:
        z_visual = np.asarray(z_visual, dtype=np.float64)
        if z_visual.shape[-1] != self.latent_dim:
            raise ShapeError(f"latent of dimension {z_visual.shape[-1]} does not match "
                             f"decoder dimension {self.latent_dim}")
        return z_visual @ self.weight.T + self.bias

    def toy_encode(self, vector: np.ndarray) -> np.ndarray:
        """Least-squares latent of a decoded vector"""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape[-1] != self.weight.shape[0]:
            raise ShapeError("vector dimension does not match the decoder output")
        return (vector - self.bias) @ self._encoder.T


def toy_decode(z_visual: np.ndarray, decoder: ToyDecoder) -> np.ndarray:
    return decoder.toy_decode(z_visual)
