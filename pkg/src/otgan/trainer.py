"""Alternating critic/generator training and enhancement of trials"""

import math
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import torch

from ..fmri.models import FmriSample, QualityTier, TrainPool
from ..fmri.sample_io import load_samples, stack_channels
from ..utils.error_handler import NumericalError, ShapeError, ValidationError
from ..utils.logger import get_logger
from .checkpoint import load_checkpoint, make_optimizers, save_checkpoint
from .losses import critic_loss, generator_terms
from .models import HISTORY_COLUMNS, LossHistory, TrainConfig, TrainState
from .networks import as_batch, build_networks

logger = get_logger(__name__)

ENHANCE_BATCH = 32
LOSS_TERMS = ('critic_loss', 'generator_loss')


def initial_state(config: TrainConfig, vertex_count: int) -> TrainState:
    """Freshly initialized networks, optimizers and batch sampler for ``config.seed``"""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        generator, critic = build_networks(config)
    generator_optimizer, critic_optimizer = make_optimizers(config, generator, critic)
    sampler = torch.Generator().manual_seed(config.seed)
    return TrainState(config=config, vertex_count=vertex_count, step=0,
                      generator=generator, critic=critic,
                      generator_optimizer=generator_optimizer,
                      critic_optimizer=critic_optimizer,
                      sampler=sampler, history=LossHistory())


def _draw(pool: torch.Tensor, batch_size: int, sampler: torch.Generator) -> torch.Tensor:
    """Uniform draw with replacement"""
    return pool[torch.randint(pool.shape[0], (batch_size,), generator=sampler)]


def _require_finite(value: torch.Tensor, where: str, state: TrainState):
    if not torch.isfinite(value).all():
        logger.error(f"Non-finite {where} at step {state.step + 1}; "
                     f"last good checkpoint: {state.last_checkpoint}")
        raise NumericalError(f"non-finite {where} at step {state.step + 1}", where=where,
                             last_checkpoint=state.last_checkpoint)


def train_step(state: TrainState, low: torch.Tensor, high: torch.Tensor):
    """Critic updates followed by one generator update

    Non-finite values, in a loss or inside the generator, raise NumericalError
    naming the last checkpoint written by this run.
    """
    try:
        _update(state, low, high)
    except NumericalError as e:
        if e.where in LOSS_TERMS:
            raise
        logger.error(f"{e} at step {state.step + 1}; last good checkpoint: {state.last_checkpoint}")
        raise NumericalError(f"{e} at step {state.step + 1}", where=e.where,
                             last_checkpoint=state.last_checkpoint) from e


def _update(state: TrainState, low: torch.Tensor, high: torch.Tensor):
    config = state.config
    generator, critic = state.generator, state.critic

    for _ in range(config.critic_steps_per_gen):
        y = _draw(low, config.batch_size, state.sampler)
        x = _draw(high, config.batch_size, state.sampler)
        with torch.no_grad():
            g_y = generator(y)
        loss_c, w1, penalty = critic_loss(critic, x, g_y, config.gradient_penalty, state.sampler)
        _require_finite(loss_c, 'critic_loss', state)
        state.critic_optimizer.zero_grad()
        loss_c.backward()
        state.critic_optimizer.step()

    y = _draw(low, config.batch_size, state.sampler)
    loss_g, transport = generator_terms(generator, critic, y, config.divergence_weight)
    _require_finite(loss_g, 'generator_loss', state)
    state.generator_optimizer.zero_grad()
    loss_g.backward()
    state.generator_optimizer.step()

    state.step += 1
    state.history.append(state.step, transport.item(), w1.item(), loss_c.item(),
                         penalty.item(), loss_g.item())


def _as_pool(data, what: str) -> torch.Tensor:
    pool = torch.as_tensor(np.asarray(data, dtype=np.float32))
    if pool.dim() != 3 or pool.shape[0] == 0:
        raise ValidationError(f"{what} pool must be a non-empty (n, 2, V) array")
    return pool


def train(config: TrainConfig, low, high, out_dir: Optional[Union[str, Path]] = None,
          resume_from: Optional[Union[str, Path]] = None) -> TrainState:
    """Train on unpaired low-tier (side y) and high-tier (side x) trial arrays

    Checkpoints go to ``out_dir`` every ``checkpoint_interval`` steps and at
    the end. Training is deterministic given ``config.seed``; resuming from
    a checkpoint continues exactly as an uninterrupted run would.
    """
    low = _as_pool(low, "low-tier")
    high = _as_pool(high, "high-tier")
    if low.shape[1:] != high.shape[1:]:
        raise ShapeError(f"low-tier trials {tuple(low.shape[1:])} and high-tier trials "
                         f"{tuple(high.shape[1:])} differ in shape")
    vertex_count = low.shape[-1]

    if resume_from is not None:
        state = load_checkpoint(resume_from, config)
        if state.vertex_count != vertex_count:
            raise ShapeError(f"checkpoint trained on V={state.vertex_count}, data has V={vertex_count}")
        logger.info(f"Resuming from {resume_from} at step {state.step}")
    else:
        state = initial_state(config, vertex_count)
        if out_dir is not None:
            save_checkpoint(state, out_dir)

    logger.info(f"Training on {low.shape[0]} low-tier and {high.shape[0]} high-tier trials, "
                f"V={vertex_count}, steps {state.step}..{config.max_steps}")
    state.generator.train()
    state.critic.train()
    while state.step < config.max_steps:
        train_step(state, low, high)
        if state.step % config.log_interval == 0:
            row = dict(zip(HISTORY_COLUMNS, state.history.rows[-1]))
            logger.info(f"step {row['step']}: transport={row['transport_cost']:.5f} "
                        f"w1={row['w1_estimate']:.5f} critic={row['critic_loss']:.5f} "
                        f"generator={row['generator_loss']:.5f}")
        if out_dir is not None and (state.step % config.checkpoint_interval == 0
                                    or state.step == config.max_steps):
            save_checkpoint(state, out_dir)
    return state


def train_from_pool(config: TrainConfig, pool: TrainPool,
                    out_dir: Optional[Union[str, Path]] = None,
                    resume_from: Optional[Union[str, Path]] = None) -> TrainState:
    """Load a split's training pools and train on them"""
    if not pool.low or not pool.high:
        raise ValidationError("both quality tiers need training samples")
    low = stack_channels(load_samples(pool.low))
    high = stack_channels(load_samples(pool.high))
    return train(config, low, high, out_dir, resume_from)


def enhance(state: TrainState, samples: Sequence[FmriSample]) -> List[FmriSample]:
    """Apply the generator to every trial, keeping identities"""
    samples = list(samples)
    for sample in samples:
        if sample.vertex_count != state.vertex_count:
            raise ShapeError(f"sample {sample.key} has V={sample.vertex_count}, the generator "
                             f"was trained on V={state.vertex_count}")
    state.generator.eval()
    enhanced = []
    with torch.no_grad():
        for start in range(0, len(samples), ENHANCE_BATCH):
            chunk = samples[start:start + ENHANCE_BATCH]
            outputs = state.generator(as_batch(np.stack([s.channels for s in chunk]))).numpy()
            enhanced += [s.with_channels(out, QualityTier.ENHANCED)
                         for s, out in zip(chunk, outputs)]
    return enhanced


def moving_average(values: Sequence[float], window: int) -> np.ndarray:
    """Trailing mean over up to ``window`` values ending at each position"""
    values = np.asarray(values, dtype=np.float64)
    if window < 1:
        raise ValidationError(f"window must be positive, got {window}")
    sums = np.concatenate([[0.0], np.cumsum(values)])
    ends = np.arange(1, values.size + 1)
    starts = np.maximum(ends - window, 0)
    return (sums[ends] - sums[starts]) / (ends - starts)


def objective_trend(state: TrainState, window: int = 500) -> np.ndarray:
    """Moving average of transport cost + lambda * |W1| over the history"""
    history = state.history
    combined = (history.column('transport_cost')
                + state.config.divergence_weight * np.abs(history.column('w1_estimate')))
    return moving_average(combined, min(window, max(1, len(history))))


def mse_to_reference(samples: Sequence[FmriSample], references: Sequence[np.ndarray]) -> float:
    """Mean squared error of samples against matching (2, V) references"""
    errors = [np.mean((s.channels.astype(np.float64) - np.asarray(r, dtype=np.float64)) ** 2)
              for s, r in zip(samples, references)]
    return float(np.mean(errors)) if errors else math.nan
