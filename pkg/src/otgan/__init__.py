"""Optimal-transport guided GAN that maps low-quality trials toward high quality"""

from .checkpoint import load_checkpoint, save_checkpoint
from .losses import (
    critic_loss, generator_loss, gradient_penalty, transport_cost, w1_estimate
)
from .models import LossHistory, TrainConfig, TrainState
from .networks import Critic1d, RCAB1d, UNetGenerator, build_networks, padded_length, rcab_forward
from .trainer import enhance, initial_state, moving_average, train, train_from_pool

__all__ = [
    'load_checkpoint', 'save_checkpoint',
    'critic_loss', 'generator_loss', 'gradient_penalty', 'transport_cost', 'w1_estimate',
    'LossHistory', 'TrainConfig', 'TrainState',
    'Critic1d', 'RCAB1d', 'UNetGenerator', 'build_networks', 'padded_length', 'rcab_forward',
    'enhance', 'initial_state', 'moving_average', 'train', 'train_from_pool',
]
