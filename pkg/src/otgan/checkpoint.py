"""Training checkpoints: parameters, optimizer moments, sampler state and history"""

import shutil
from pathlib import Path
from typing import Union

import torch

from ..utils.container import load_container, save_container
from ..utils.error_handler import ConfigurationError
from ..utils.logger import get_logger
from .models import LossHistory, TrainConfig, TrainState
from .networks import build_networks

logger = get_logger(__name__)

CHECKPOINT_FORMAT = 'otfmri-otgan-checkpoint'
CHECKPOINT_FIELDS = ('config', 'vertex_count', 'step', 'generator', 'critic',
                     'generator_optimizer', 'critic_optimizer', 'sampler_state', 'history')
LATEST_NAME = 'latest.pt'


def checkpoint_name(step: int) -> str:
    return f"ckpt_{step:06d}.pt"


def make_optimizers(config: TrainConfig, generator, critic):
    generator_optimizer = torch.optim.Adam(generator.parameters(), lr=config.generator_lr,
                                           betas=config.betas)
    critic_optimizer = torch.optim.Adam(critic.parameters(), lr=config.critic_lr,
                                        betas=config.betas)
    return generator_optimizer, critic_optimizer


def save_checkpoint(state: TrainState, directory: Union[str, Path]) -> Path:
    """Write ``ckpt_<step>.pt`` and refresh ``latest.pt`` next to it"""
    directory = Path(directory)
    path = save_container(directory / checkpoint_name(state.step), CHECKPOINT_FORMAT, {
        'config': state.config.to_dict(),
        'vertex_count': state.vertex_count,
        'step': state.step,
        'generator': state.generator.state_dict(),
        'critic': state.critic.state_dict(),
        'generator_optimizer': state.generator_optimizer.state_dict(),
        'critic_optimizer': state.critic_optimizer.state_dict(),
        'sampler_state': state.sampler.get_state(),
        'history': state.history.to_dict(),
    })
    latest = directory / LATEST_NAME
    shutil.copyfile(path, latest.with_name(LATEST_NAME + '.tmp'))
    latest.with_name(LATEST_NAME + '.tmp').replace(latest)
    state.last_checkpoint = str(path)
    logger.debug(f"Saved checkpoint {path}")
    return path


def load_checkpoint(path: Union[str, Path], config: TrainConfig = None) -> TrainState:
    """Rebuild a TrainState; ``config`` may change the schedule but not the architecture"""
    document = load_container(path, CHECKPOINT_FORMAT, CHECKPOINT_FIELDS)
    saved_config = TrainConfig.from_dict(document['config'])
    if config is None:
        config = saved_config
    elif config.architecture() != saved_config.architecture():
        raise ConfigurationError(f"checkpoint {path} was trained with architecture "
                                 f"{saved_config.architecture()}, not {config.architecture()}")

    generator, critic = build_networks(config)
    generator.load_state_dict(document['generator'])
    critic.load_state_dict(document['critic'])
    generator_optimizer, critic_optimizer = make_optimizers(config, generator, critic)
    generator_optimizer.load_state_dict(document['generator_optimizer'])
    critic_optimizer.load_state_dict(document['critic_optimizer'])
    sampler = torch.Generator()
    sampler.set_state(document['sampler_state'])

    return TrainState(
        config=config,
        vertex_count=int(document['vertex_count']),
        step=int(document['step']),
        generator=generator,
        critic=critic,
        generator_optimizer=generator_optimizer,
        critic_optimizer=critic_optimizer,
        sampler=sampler,
        history=LossHistory.from_dict(document['history']),
        last_checkpoint=str(path),
    )
