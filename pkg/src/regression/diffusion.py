"""Forward-noising schedules of denoising diffusion models"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..utils.error_handler import ShapeError, ValidationError
from ..utils.validators import validate_positive_int


@dataclass(frozen=True)
class NoiseSchedule:
    """Cumulative signal fractions alpha_bar[t] for t = 0..T

    ``alpha_bar[0] == 1`` and the sequence never increases. A terminal
    value of exactly zero (pure noise at t = T) is allowed.
    """
    alpha_bars: np.ndarray

    def __post_init__(self):
        alpha_bars = np.asarray(self.alpha_bars, dtype=np.float64)
        if alpha_bars.ndim != 1 or alpha_bars.size < 2:
            raise ValidationError("a schedule needs alpha_bar for t = 0 and at least one step")
        if alpha_bars[0] != 1.0:
            raise ValidationError(f"alpha_bar[0] must be 1, got {alpha_bars[0]}")
        if np.any(alpha_bars[1:] < 0.0) or np.any(alpha_bars > 1.0):
            raise ValidationError("alpha_bar values must lie in [0, 1]")
        if np.any(np.diff(alpha_bars) > 0.0):
            raise ValidationError("alpha_bar must be non-increasing in t")
        object.__setattr__(self, 'alpha_bars', alpha_bars)

    @property
    def num_steps(self) -> int:
        return self.alpha_bars.size - 1

    @classmethod
    def from_alpha_bars(cls, values: Sequence[float]) -> 'NoiseSchedule':
        """Schedule from alpha_bar[1..T]; alpha_bar[0] = 1 is prepended"""
        return cls(np.concatenate([[1.0], np.asarray(values, dtype=np.float64)]))

    @classmethod
    def from_betas(cls, betas: Sequence[float]) -> 'NoiseSchedule':
        betas = np.asarray(betas, dtype=np.float64)
        if np.any(betas < 0.0) or np.any(betas > 1.0):
            raise ValidationError("betas must lie in [0, 1]")
        return cls.from_alpha_bars(np.cumprod(1.0 - betas))

    @classmethod
    def linear(cls, num_steps: int = 1000, beta_start: float = 1e-4,
               beta_end: float = 0.02) -> 'NoiseSchedule':
        validate_positive_int(num_steps, "num_steps")
        return cls.from_betas(np.linspace(beta_start, beta_end, num_steps))

    @classmethod
    def cosine(cls, num_steps: int = 1000, s: float = 0.008,
               max_beta: float = 0.999) -> 'NoiseSchedule':
        """Squared-cosine schedule with clipped per-step betas"""
        validate_positive_int(num_steps, "num_steps")
        t = np.arange(num_steps + 1, dtype=np.float64) / num_steps
        f = np.cos((t + s) / (1.0 + s) * math.pi / 2.0) ** 2
        betas = np.clip(1.0 - f[1:] / f[:-1], 0.0, max_beta)
        return cls.from_betas(betas)

    def alpha_bar(self, t: int) -> float:
        return float(self.alpha_bars[t])


def forward_noise(x0: np.ndarray, t: int, schedule: NoiseSchedule,
                  noise: np.ndarray) -> np.ndarray:
    """x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise"""
    if isinstance(t, bool) or not isinstance(t, (int, np.integer)) \
            or not 1 <= t <= schedule.num_steps:
        raise ValidationError(f"step t must lie in [1, {schedule.num_steps}], got {t!r}")
    x0 = np.asarray(x0, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if x0.shape != noise.shape:
        raise ShapeError(f"x0 {x0.shape} and noise {noise.shape} differ in shape")
    alpha_bar = schedule.alpha_bar(int(t))
    return math.sqrt(alpha_bar) * x0 + math.sqrt(1.0 - alpha_bar) * noise
