"""Transport cost, Wasserstein-1 estimate and gradient penalty

The generator G maps low-quality trials y toward the high-quality
distribution of x. It minimizes

    E||y - G(y)||^2 + lambda * (-E[D(G(y))])

while the critic D maximizes E[D(x)] - E[D(G(y))] under a unit-gradient
penalty on points between x and G(y).
"""

from typing import Optional, Tuple

import torch
import torch.nn as nn

from ..utils.error_handler import ShapeError, ValidationError

# Keeps the norm differentiable where the critic gradient vanishes
_NORM_EPSILON = 1e-12


def transport_cost(y: torch.Tensor, g_y: torch.Tensor) -> torch.Tensor:
    """Batch mean of the per-sample mean squared difference over all 2V values"""
    if y.shape != g_y.shape:
        raise ShapeError(f"transport cost needs equal shapes, got {tuple(y.shape)} "
                         f"and {tuple(g_y.shape)}")
    return (y - g_y).pow(2).flatten(1).mean(dim=1).mean()


def w1_estimate(critic: nn.Module, x_batch: torch.Tensor, gy_batch: torch.Tensor) -> torch.Tensor:
    """Mean critic output on real high-quality trials minus that on generated ones"""
    if x_batch.shape[0] == 0 or gy_batch.shape[0] == 0:
        raise ValidationError("Wasserstein estimate needs non-empty batches")
    if x_batch.shape[1:] != gy_batch.shape[1:]:
        raise ShapeError(f"batches of shape {tuple(x_batch.shape)} and {tuple(gy_batch.shape)} "
                         f"differ per sample")
    return critic(x_batch).mean() - critic(gy_batch).mean()


def gradient_penalty(critic: nn.Module, x_batch: torch.Tensor, gy_batch: torch.Tensor,
                     gamma: float, generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """gamma * E[(||grad D(x_hat)||_2 - 1)^2] at x_hat = u x + (1 - u) G(y)

    ``u`` is drawn uniformly per sample from ``generator``.
    """
    if gamma < 0:
        raise ValidationError(f"gradient penalty coefficient must be >= 0, got {gamma}")
    if x_batch.shape != gy_batch.shape:
        raise ShapeError("gradient penalty pairs batches of equal shape")
    if gamma == 0:
        return x_batch.new_zeros(())

    u = torch.rand((x_batch.shape[0],) + (1,) * (x_batch.dim() - 1),
                   generator=generator, dtype=x_batch.dtype, device=x_batch.device)
    x_hat = u * x_batch + (1 - u) * gy_batch
    if not x_hat.requires_grad:
        x_hat.requires_grad_(True)
    scores = critic(x_hat)
    gradients, = torch.autograd.grad(outputs=scores, inputs=x_hat,
                                     grad_outputs=torch.ones_like(scores),
                                     create_graph=True)
    norm = torch.sqrt(gradients.flatten(1).pow(2).sum(dim=1) + _NORM_EPSILON)
    return gamma * (norm - 1).pow(2).mean()


def generator_terms(generator: nn.Module, critic: nn.Module, y_batch: torch.Tensor,
                    divergence_weight: float) -> Tuple[torch.Tensor, torch.Tensor]:
    """(generator loss, transport cost) of one batch"""
    g_y = generator(y_batch)
    transport = transport_cost(y_batch, g_y)
    loss = transport + divergence_weight * (-critic(g_y).mean())
    return loss, transport


def generator_loss(generator: nn.Module, critic: nn.Module, y_batch: torch.Tensor,
                   divergence_weight: float) -> torch.Tensor:
    return generator_terms(generator, critic, y_batch, divergence_weight)[0]


def critic_loss(critic: nn.Module, x_batch: torch.Tensor, gy_batch: torch.Tensor,
                gamma: float, generator: Optional[torch.Generator] = None
                ) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """(loss, W1 estimate, penalty); the critic minimizes -W1 + penalty"""
    w1 = w1_estimate(critic, x_batch, gy_batch)
    penalty = gradient_penalty(critic, x_batch, gy_batch, gamma, generator)
    return -w1 + penalty, w1, penalty
