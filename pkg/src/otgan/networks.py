"""One-dimensional U-Net generator with channel-attention skips, and its critic

Both networks see a sample as a (2, V) signal: one channel per hemisphere,
vertices along the length axis.
"""

from typing import Tuple, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..fmri.models import N_CHANNELS
from ..utils.error_handler import NumericalError, ShapeError
from .models import TrainConfig


def padded_length(vertex_count: int, depth: int) -> int:
    """Smallest multiple of 2**depth that holds ``vertex_count`` values"""
    factor = 2 ** depth
    return -(-vertex_count // factor) * factor


def pad_to_multiple(x: torch.Tensor, depth: int) -> torch.Tensor:
    extra = padded_length(x.shape[-1], depth) - x.shape[-1]
    return F.pad(x, (0, extra)) if extra else x


def _check_finite(x: torch.Tensor, layer: str) -> torch.Tensor:
    if not torch.isfinite(x).all():
        raise NumericalError(f"non-finite activations after generator layer '{layer}'",
                             where=layer)
    return x


class ChannelAttention1d(nn.Module):
    """Squeeze-and-excitation scale per channel, shape (N, C, 1)"""

    def __init__(self, channels: int, reduction: int = 4):
        super().__init__()
        hidden = max(1, channels // reduction)
        self.pool = nn.AdaptiveAvgPool1d(1)
        self.squeeze = nn.Conv1d(channels, hidden, kernel_size=1)
        self.excite = nn.Conv1d(hidden, channels, kernel_size=1)

    def forward(self, x):
        return torch.sigmoid(self.excite(F.relu(self.squeeze(self.pool(x)))))


class RCAB1d(nn.Module):
    """Residual channel attention block: x + attention(body(x)) * body(x)"""

    def __init__(self, channels: int, reduction: int = 4):
        super().__init__()
        self.channels = channels
        self.body = nn.Sequential(
            nn.Conv1d(channels, channels, kernel_size=3, padding=1),
            nn.ReLU(),
            nn.Conv1d(channels, channels, kernel_size=3, padding=1),
        )
        self.attention = ChannelAttention1d(channels, reduction)

    def forward(self, x):
        body = self.body(x)
        return x + body * self.attention(body)


def rcab_forward(x: torch.Tensor, block: RCAB1d) -> torch.Tensor:
    """Apply ``block`` to a (C, L) signal or an (N, C, L) batch"""
    unbatched = x.dim() == 2
    if unbatched:
        x = x.unsqueeze(0)
    if x.dim() != 3 or x.shape[1] != block.channels or x.shape[-1] < 1:
        raise ShapeError(f"RCAB with {block.channels} channels cannot take input {tuple(x.shape)}")
    out = block(x)
    return out.squeeze(0) if unbatched else out


class UNetGenerator(nn.Module):
    """Encoder/decoder over vertex vectors with RCAB-filtered skip connections

    Channel widths double per level starting from ``base_width``. The last
    convolution starts at zero and its output is added to the input, so an
    untrained generator returns its input unchanged.
    """

    def __init__(self, depth: int = 4, base_width: int = 16, reduction: int = 4):
        super().__init__()
        self.depth = depth
        widths = [base_width * 2 ** level for level in range(depth + 1)]

        self.inc = nn.Conv1d(N_CHANNELS, widths[0], kernel_size=3, padding=1)
        self.down = nn.ModuleList(
            nn.Conv1d(widths[i], widths[i + 1], kernel_size=4, stride=2, padding=1)
            for i in range(depth)
        )
        self.skips = nn.ModuleList(RCAB1d(widths[i], reduction) for i in range(depth))
        self.up = nn.ModuleList(
            nn.ConvTranspose1d(widths[i + 1], widths[i], kernel_size=4, stride=2, padding=1)
            for i in range(depth)
        )
        self.fuse = nn.ModuleList(
            nn.Conv1d(2 * widths[i], widths[i], kernel_size=3, padding=1)
            for i in range(depth)
        )
        self.tail = nn.Conv1d(widths[0], N_CHANNELS, kernel_size=3, padding=1)
        nn.init.zeros_(self.tail.weight)
        nn.init.zeros_(self.tail.bias)

    def forward(self, y):
        if y.dim() != 3 or y.shape[1] != N_CHANNELS:
            raise ShapeError(f"generator expects (N, 2, V) input, got {tuple(y.shape)}")
        length = y.shape[-1]
        h = _check_finite(F.relu(self.inc(pad_to_multiple(y, self.depth))), 'inc')

        encoded = []
        for level, down in enumerate(self.down):
            encoded.append(h)
            h = _check_finite(F.relu(down(h)), f'down{level}')

        for level in reversed(range(self.depth)):
            skip = _check_finite(self.skips[level](encoded[level]), f'skip{level}')
            h = F.relu(self.up[level](h))
            h = _check_finite(F.relu(self.fuse[level](torch.cat([h, skip], dim=1))), f'up{level}')

        residual = _check_finite(self.tail(h), 'tail')[..., :length]
        return y + residual


class Critic1d(nn.Module):
    """Strided convolutions, average pooling and a two-layer dense head

    Outputs one unbounded real per sample.
    """

    def __init__(self, stages: int = 4, base_width: int = 16, pool_length: int = 16,
                 hidden: int = 64, negative_slope: float = 0.2):
        super().__init__()
        self.stages = stages
        layers = []
        in_channels = N_CHANNELS
        for stage in range(stages):
            out_channels = base_width * 2 ** stage
            layers += [nn.Conv1d(in_channels, out_channels, kernel_size=4, stride=2, padding=1),
                       nn.LeakyReLU(negative_slope)]
            in_channels = out_channels
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool1d(pool_length)
        self.hidden = nn.Linear(in_channels * pool_length, hidden)
        self.act = nn.LeakyReLU(negative_slope)
        self.output = nn.Linear(hidden, 1)

    def forward(self, x):
        if x.dim() != 3 or x.shape[1] != N_CHANNELS:
            raise ShapeError(f"critic expects (N, 2, V) input, got {tuple(x.shape)}")
        h = self.pool(self.features(pad_to_multiple(x, self.stages)))
        return self.output(self.act(self.hidden(h.flatten(1)))).squeeze(-1)


def build_networks(config: TrainConfig) -> Tuple[UNetGenerator, Critic1d]:
    generator = UNetGenerator(config.depth, config.base_width, config.reduction)
    critic = Critic1d(config.critic_stages, config.critic_base_width,
                      config.critic_pool_length, config.critic_hidden)
    return generator, critic


def as_batch(x: Union[torch.Tensor, np.ndarray]) -> torch.Tensor:
    """float32 (N, 2, V) tensor from an array of one or more samples"""
    x = torch.as_tensor(x, dtype=torch.float32)
    return x.unsqueeze(0) if x.dim() == 2 else x
