"""Configuration and state of optimal-transport GAN training"""

from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch

from ..utils.error_handler import ConfigurationError, ValidationError
from ..utils.validators import validate_non_negative_int, validate_positive_int, validate_real

# Fields that fix tensor shapes; a checkpoint only resumes under equal values
ARCHITECTURE_FIELDS = ('depth', 'base_width', 'reduction', 'critic_stages',
                       'critic_base_width', 'critic_pool_length', 'critic_hidden')

HISTORY_COLUMNS = ('step', 'transport_cost', 'w1_estimate', 'critic_loss',
                   'gradient_penalty', 'generator_loss')


@dataclass
class TrainConfig:
    """Hyper-parameters of the alternating generator/critic updates

    ``divergence_weight`` multiplies the Wasserstein-1 term of the generator
    objective; ``gradient_penalty`` is the coefficient of the critic's
    unit-gradient penalty.
    """
    divergence_weight: float = 1.0
    critic_steps_per_gen: int = 5
    generator_lr: float = 1e-4
    critic_lr: float = 1e-4
    betas: Tuple[float, float] = (0.5, 0.9)
    gradient_penalty: float = 10.0
    batch_size: int = 16
    max_steps: int = 5000
    seed: int = 0
    checkpoint_interval: int = 500
    log_interval: int = 100

    depth: int = 4
    base_width: int = 16
    reduction: int = 4
    critic_stages: int = 4
    critic_base_width: int = 16
    critic_pool_length: int = 16
    critic_hidden: int = 64

    def __post_init__(self):
        self.divergence_weight = validate_real(self.divergence_weight, "divergence_weight",
                                               minimum=0.0, exclusive=True)
        self.gradient_penalty = validate_real(self.gradient_penalty, "gradient_penalty",
                                              minimum=0.0)
        self.generator_lr = validate_real(self.generator_lr, "generator_lr",
                                          minimum=0.0, exclusive=True)
        self.critic_lr = validate_real(self.critic_lr, "critic_lr", minimum=0.0, exclusive=True)
        if len(self.betas) != 2 or not all(0.0 <= b < 1.0 for b in self.betas):
            raise ValidationError(f"betas must be two values in [0, 1), got {self.betas!r}")
        self.betas = (float(self.betas[0]), float(self.betas[1]))
        for name in ('critic_steps_per_gen', 'batch_size', 'checkpoint_interval', 'log_interval',
                     'depth', 'base_width', 'reduction', 'critic_stages', 'critic_base_width',
                     'critic_pool_length', 'critic_hidden'):
            validate_positive_int(getattr(self, name), name)
        validate_non_negative_int(self.max_steps, "max_steps")
        validate_non_negative_int(self.seed, "seed")

    @classmethod
    def from_dict(cls, values: dict) -> 'TrainConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError(f"unknown training options: {unknown}")
        values = dict(values)
        if 'betas' in values:
            values['betas'] = tuple(values['betas'])
        return cls(**values)

    def to_dict(self) -> dict:
        values = asdict(self)
        values['betas'] = list(self.betas)
        return values

    def architecture(self) -> Dict[str, int]:
        return {name: getattr(self, name) for name in ARCHITECTURE_FIELDS}


@dataclass
class LossHistory:
    """Per-step losses, one row per generator update"""
    rows: List[Tuple] = field(default_factory=list)

    def append(self, step: int, transport_cost: float, w1_estimate: float,
               critic_loss: float, gradient_penalty: float, generator_loss: float):
        self.rows.append((int(step), float(transport_cost), float(w1_estimate),
                          float(critic_loss), float(gradient_penalty), float(generator_loss)))

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        index = HISTORY_COLUMNS.index(name)
        return np.array([row[index] for row in self.rows], dtype=np.float64)

    def records(self) -> List[dict]:
        return [dict(zip(HISTORY_COLUMNS, row)) for row in self.rows]

    def to_dict(self) -> Dict[str, list]:
        return {name: [row[i] for row in self.rows] for i, name in enumerate(HISTORY_COLUMNS)}

    @classmethod
    def from_dict(cls, columns: Dict[str, list]) -> 'LossHistory':
        if set(columns) != set(HISTORY_COLUMNS):
            raise ValidationError(f"loss history columns {sorted(columns)} do not match "
                                  f"{list(HISTORY_COLUMNS)}")
        return cls(rows=[tuple(values) for values in zip(*(columns[c] for c in HISTORY_COLUMNS))])


@dataclass
class TrainState:
    """Everything needed to continue training from ``step``"""
    config: TrainConfig
    vertex_count: int
    step: int
    generator: torch.nn.Module
    critic: torch.nn.Module
    generator_optimizer: torch.optim.Optimizer
    critic_optimizer: torch.optim.Optimizer
    sampler: torch.Generator
    history: LossHistory = field(default_factory=LossHistory)
    last_checkpoint: Optional[str] = None
