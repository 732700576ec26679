"""Generator, RCAB and critic forward passes"""

import numpy as np
import pytest
import torch
import torch.nn as nn

from src.otgan.models import TrainConfig
from src.otgan.networks import (
    Critic1d, RCAB1d, UNetGenerator, as_batch, build_networks, padded_length, rcab_forward
)
from src.utils.error_handler import NumericalError, ShapeError


def _zero_(module: nn.Module):
    with torch.no_grad():
        for parameter in module.parameters():
            parameter.zero_()
    return module


def _randomize_(module: nn.Module, seed: int = 0, scale: float = 0.3):
    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for parameter in module.parameters():
            parameter.copy_(scale * torch.randn(parameter.shape, generator=generator,
                                                dtype=parameter.dtype))
    return module


def _conv1d(x, weight, bias, stride=1, padding=0):
    """Direct-summation convolution (cross-correlation) of a (C, L) array"""
    x = np.pad(x, ((0, 0), (padding, padding)))
    out_channels, _, width = weight.shape
    length = (x.shape[1] - width) // stride + 1
    out = np.empty((out_channels, length))
    for o in range(out_channels):
        for position in range(length):
            start = position * stride
            out[o, position] = bias[o] + np.sum(weight[o] * x[:, start:start + width])
    return out


def _numpy(parameter):
    return parameter.detach().double().numpy()


def test_rcab_with_zero_weights_is_identity(rng):
    block = _zero_(RCAB1d(4))
    x = torch.as_tensor(rng.standard_normal((4, 32)), dtype=torch.float32)
    assert torch.equal(rcab_forward(x, block), x)


def test_rcab_saturated_attention_passes_input(rng):
    block = _randomize_(RCAB1d(4))
    with torch.no_grad():
        block.attention.excite.bias.fill_(-1e4)
    x = torch.as_tensor(rng.standard_normal((3, 4, 20)), dtype=torch.float32)
    assert torch.allclose(rcab_forward(x, block), x, atol=1e-6)


def test_rcab_matches_direct_formula(rng):
    """C=2, L=8 against a loop-based reimplementation"""
    block = _randomize_(RCAB1d(2, reduction=4), seed=5).double()
    x = rng.standard_normal((2, 8))

    conv1, conv2 = block.body[0], block.body[2]
    h = np.maximum(_conv1d(x, _numpy(conv1.weight), _numpy(conv1.bias), padding=1), 0.0)
    body = _conv1d(h, _numpy(conv2.weight), _numpy(conv2.bias), padding=1)
    pooled = body.mean(axis=1)
    squeeze = _numpy(block.attention.squeeze.weight)[:, :, 0]
    excite = _numpy(block.attention.excite.weight)[:, :, 0]
    hidden = np.maximum(squeeze @ pooled + _numpy(block.attention.squeeze.bias), 0.0)
    scale = 1.0 / (1.0 + np.exp(-(excite @ hidden + _numpy(block.attention.excite.bias))))
    expected = x + scale[:, None] * body

    out = rcab_forward(torch.as_tensor(x), block).detach().numpy()
    assert np.allclose(out, expected, atol=1e-6)


def test_rcab_gradients_match_finite_differences():
    block = _randomize_(RCAB1d(4, reduction=2), seed=5, scale=0.5).double()
    x = torch.randn(4, 8, dtype=torch.float64, requires_grad=True,
                    generator=torch.Generator().manual_seed(6))
    assert torch.autograd.gradcheck(lambda v: rcab_forward(v, block), (x,), eps=1e-6, atol=1e-5)


def test_rcab_rejects_wrong_channels():
    with pytest.raises(ShapeError):
        rcab_forward(torch.zeros(3, 8), RCAB1d(2))


@pytest.mark.parametrize("vertex_count, padded", [(64, 64), (1000, 1008), (1024, 1024),
                                                  (32492, 32496)])
def test_generator_preserves_length(vertex_count, padded):
    assert padded_length(vertex_count, 4) == padded
    generator = _randomize_(UNetGenerator(depth=4, base_width=4), scale=0.1)
    y = torch.randn(1, 2, vertex_count, generator=torch.Generator().manual_seed(1))
    with torch.no_grad():
        out = generator(y)
    assert out.shape == y.shape
    assert torch.isfinite(out).all()


def test_untrained_generator_is_identity():
    torch.manual_seed(0)
    generator = UNetGenerator(depth=3, base_width=4)
    y = 3.0 * torch.randn(100, 2, 64)
    with torch.no_grad():
        out = generator(y)
    assert (out - y).abs().max().item() <= 1e-5


def test_generator_is_deterministic():
    generator = _randomize_(UNetGenerator(depth=2, base_width=4), scale=0.2)
    y = torch.randn(4, 2, 30)
    with torch.no_grad():
        assert torch.equal(generator(y), generator(y))


def test_generator_shape_errors():
    generator = UNetGenerator(depth=2, base_width=4)
    with pytest.raises(ShapeError):
        generator(torch.zeros(1, 3, 16))
    with pytest.raises(ShapeError):
        generator(torch.zeros(2, 16))


def test_generator_names_non_finite_layer():
    generator = UNetGenerator(depth=2, base_width=4)
    with torch.no_grad():
        generator.down[1].bias.fill_(float('inf'))
    with pytest.raises(NumericalError) as excinfo:
        generator(torch.zeros(1, 2, 16))
    assert excinfo.value.where == 'down1'


def test_generator_gradients_match_finite_differences():
    generator = _randomize_(UNetGenerator(depth=2, base_width=2), seed=3, scale=0.5).double()
    y = torch.randn(2, 2, 8, dtype=torch.float64, requires_grad=True)
    assert torch.autograd.gradcheck(generator, (y,), eps=1e-6, atol=1e-5)


def test_critic_gradients_match_finite_differences():
    critic = _randomize_(Critic1d(stages=2, base_width=2, pool_length=2, hidden=4),
                         seed=8, scale=0.5).double()
    x = torch.randn(3, 2, 8, dtype=torch.float64, requires_grad=True,
                    generator=torch.Generator().manual_seed(9))
    assert torch.autograd.gradcheck(critic, (x,), eps=1e-6, atol=1e-5)


def test_zero_critic_outputs_zero():
    critic = _zero_(Critic1d(stages=3, base_width=4, pool_length=4, hidden=8))
    scores = critic(torch.randn(5, 2, 50))
    assert scores.shape == (5,)
    assert torch.equal(scores, torch.zeros(5))


def test_doubling_final_weights_doubles_output():
    critic = _randomize_(Critic1d(stages=2, base_width=4, pool_length=4, hidden=8))
    with torch.no_grad():
        critic.output.bias.zero_()
    x = torch.randn(6, 2, 32)
    with torch.no_grad():
        before = critic(x)
        critic.output.weight.mul_(2.0)
        after = critic(x)
    assert torch.allclose(after, 2.0 * before, rtol=1e-6, atol=1e-6)


def test_critic_matches_direct_formula(rng):
    critic = _randomize_(Critic1d(stages=2, base_width=2, pool_length=4, hidden=3), seed=9)
    critic = critic.double()
    x = rng.standard_normal((2, 32))

    def leaky(v):
        return np.where(v >= 0, v, 0.2 * v)

    h = x
    for conv in (critic.features[0], critic.features[2]):
        h = leaky(_conv1d(h, _numpy(conv.weight), _numpy(conv.bias), stride=2, padding=1))
    # 8 positions pooled into 4 bins of two
    pooled = h.reshape(h.shape[0], 4, 2).mean(axis=2)
    hidden = leaky(_numpy(critic.hidden.weight) @ pooled.reshape(-1) + _numpy(critic.hidden.bias))
    expected = _numpy(critic.output.weight) @ hidden + _numpy(critic.output.bias)

    score = critic(torch.as_tensor(x).unsqueeze(0)).detach().numpy()
    assert np.allclose(score, expected, atol=1e-6)


def test_critic_pads_odd_lengths():
    critic = Critic1d(stages=4, base_width=4, pool_length=4, hidden=8)
    assert critic(torch.randn(3, 2, 1001)).shape == (3,)
    with pytest.raises(ShapeError):
        critic(torch.randn(3, 1, 64))


def test_build_networks_follows_config():
    config = TrainConfig(depth=3, base_width=8, critic_stages=2, critic_base_width=4)
    generator, critic = build_networks(config)
    assert generator.depth == 3
    assert generator.inc.out_channels == 8
    assert critic.stages == 2
    assert as_batch(np.zeros((2, 16))).shape == (1, 2, 16)
