"""Transport cost, Wasserstein estimate, gradient penalty and generator objective"""

import numpy as np
import pytest
import torch
import torch.nn as nn
from torch.func import functional_call

from src.otgan.losses import (
    critic_loss, generator_loss, gradient_penalty, transport_cost, w1_estimate
)
from src.otgan.networks import Critic1d, UNetGenerator
from src.utils.error_handler import ShapeError, ValidationError


class LinearCritic(nn.Module):
    """D(x) = w . flatten(x) + b"""

    def __init__(self, weight: torch.Tensor, bias: float = 0.0):
        super().__init__()
        self.linear = nn.Linear(weight.numel(), 1)
        with torch.no_grad():
            self.linear.weight.copy_(weight.reshape(1, -1))
            self.linear.bias.fill_(bias)

    def forward(self, x):
        return self.linear(x.flatten(1)).squeeze(-1)


def _zero_critic():
    critic = Critic1d(stages=2, base_width=4, pool_length=4, hidden=8)
    with torch.no_grad():
        for parameter in critic.parameters():
            parameter.zero_()
    return critic


def test_transport_cost_cases(rng):
    y = torch.as_tensor(rng.standard_normal((4, 2, 16)), dtype=torch.float64)
    assert transport_cost(y, y).item() == 0.0
    assert transport_cost(y, y + 1.0).item() == pytest.approx(1.0)

    g_y = torch.as_tensor(rng.standard_normal((4, 2, 16)), dtype=torch.float64)
    diff = (y - g_y).numpy()
    expected = np.mean([np.sum(d ** 2) / d.size for d in diff])
    assert transport_cost(y, g_y).item() == pytest.approx(expected, rel=1e-12)
    assert transport_cost(y, g_y).item() > 0.0


def test_transport_cost_gradient_matches_finite_differences(rng):
    y = torch.as_tensor(rng.standard_normal((3, 2, 8)), dtype=torch.float64)
    g_y = torch.as_tensor(rng.standard_normal((3, 2, 8)), dtype=torch.float64).requires_grad_()
    assert torch.autograd.gradcheck(lambda v: transport_cost(y, v), (g_y,), eps=1e-6, atol=1e-6)

    transport_cost(y, g_y).backward()
    expected = 2.0 * (g_y.detach() - y) / (2 * 8) / 3
    assert torch.allclose(g_y.grad, expected, atol=1e-12)


def test_transport_cost_shape_mismatch():
    with pytest.raises(ShapeError):
        transport_cost(torch.zeros(2, 2, 8), torch.zeros(2, 2, 9))


def test_w1_identical_batches_and_antisymmetry():
    torch.manual_seed(2)
    critic = Critic1d(stages=2, base_width=4, pool_length=4, hidden=8)
    x, g_y = torch.randn(5, 2, 32), torch.randn(7, 2, 32)
    with torch.no_grad():
        assert w1_estimate(critic, x, x).item() == 0.0
        assert w1_estimate(critic, g_y, x).item() == -w1_estimate(critic, x, g_y).item()
        assert w1_estimate(_zero_critic(), x, g_y).item() == 0.0


def test_w1_of_linear_critic(rng):
    weight = torch.as_tensor(rng.standard_normal((2, 8)))
    critic = LinearCritic(weight, bias=3.0).double()
    x = torch.as_tensor(rng.standard_normal((6, 2, 8)))
    g_y = torch.as_tensor(rng.standard_normal((4, 2, 8)))

    w = critic.linear.weight.detach().numpy().ravel()
    expected = float(w @ (x.numpy().mean(axis=0) - g_y.numpy().mean(axis=0)).ravel())
    assert w1_estimate(critic, x, g_y).item() == pytest.approx(expected, rel=1e-10)


def test_w1_rejects_empty_batch():
    with pytest.raises(ValidationError):
        w1_estimate(_zero_critic(), torch.zeros(0, 2, 8), torch.zeros(3, 2, 8))


def test_penalty_vanishes_for_unit_gradient_critic(rng):
    weight = torch.as_tensor(rng.standard_normal((2, 16)))
    critic = LinearCritic(weight / weight.norm())
    x = torch.randn(8, 2, 16)
    g_y = torch.randn(8, 2, 16)
    penalty = gradient_penalty(critic, x, g_y, 10.0, torch.Generator().manual_seed(0))
    assert abs(penalty.item()) <= 1e-6


def test_penalty_of_zero_critic_is_gamma():
    x, g_y = torch.randn(4, 2, 32), torch.randn(4, 2, 32)
    penalty = gradient_penalty(_zero_critic(), x, g_y, 10.0)
    # The norm carries a 1e-12 floor inside the square root
    assert penalty.item() == pytest.approx(10.0, rel=1e-5)


def test_penalty_with_zero_gamma():
    critic = Critic1d(stages=2, base_width=4, pool_length=4, hidden=8)
    x, g_y = torch.randn(4, 2, 32), torch.randn(4, 2, 32)
    assert gradient_penalty(critic, x, g_y, 0.0).item() == 0.0
    with pytest.raises(ValidationError):
        gradient_penalty(critic, x, g_y, -1.0)


def test_penalty_gradient_matches_finite_differences():
    torch.manual_seed(4)
    critic = Critic1d(stages=2, base_width=2, pool_length=2, hidden=4).double()
    x = torch.randn(2, 2, 8, dtype=torch.float64)
    g_y = torch.randn(2, 2, 8, dtype=torch.float64, requires_grad=True)

    def penalty_of(points):
        # Fresh generator per call so every evaluation sees the same mixing weights
        return gradient_penalty(critic, x, points, 10.0, torch.Generator().manual_seed(7))

    assert torch.autograd.gradcheck(penalty_of, (g_y,), eps=1e-6, atol=1e-5)


def test_critic_loss_combines_terms():
    torch.manual_seed(5)
    critic = Critic1d(stages=2, base_width=4, pool_length=4, hidden=8)
    x, g_y = torch.randn(4, 2, 32), torch.randn(4, 2, 32)
    loss, w1, penalty = critic_loss(critic, x, g_y, 10.0, torch.Generator().manual_seed(1))
    assert loss.item() == pytest.approx(-w1.item() + penalty.item(), rel=1e-6, abs=1e-6)
    assert penalty.item() >= 0.0


def test_generator_loss_without_divergence_is_transport():
    torch.manual_seed(6)
    generator = UNetGenerator(depth=2, base_width=4)
    with torch.no_grad():
        generator.tail.weight.normal_(0.0, 0.1)
    critic = Critic1d(stages=2, base_width=4, pool_length=4, hidden=8)
    y = torch.randn(3, 2, 32)

    loss = generator_loss(generator, critic, y, 0.0)
    assert loss.item() == pytest.approx(transport_cost(y, generator(y)).item(), rel=1e-6)


def test_identity_generator_and_zero_critic_give_zero():
    generator = UNetGenerator(depth=2, base_width=4)
    y = torch.randn(3, 2, 32)
    assert generator_loss(generator, _zero_critic(), y, 1.0).item() == 0.0


@pytest.mark.parametrize("name", ['tail.weight', 'inc.weight', 'skips.0.body.0.weight'])
def test_generator_loss_gradient_matches_finite_differences(name):
    """V=64, width 4, batch 2 in float64"""
    torch.manual_seed(8)
    generator = UNetGenerator(depth=2, base_width=4).double()
    with torch.no_grad():
        generator.tail.weight.normal_(0.0, 0.2)
    critic = Critic1d(stages=2, base_width=4, pool_length=4, hidden=8).double()
    y = torch.randn(2, 2, 64, dtype=torch.float64)
    parameters = dict(generator.named_parameters())

    def loss_of(value):
        g_y = functional_call(generator, {**parameters, name: value}, (y,))
        return transport_cost(y, g_y) + 0.5 * (-critic(g_y).mean())

    value = parameters[name].detach().clone().requires_grad_(True)
    assert torch.autograd.gradcheck(loss_of, (value,), eps=1e-6, atol=1e-6, rtol=1e-5)
