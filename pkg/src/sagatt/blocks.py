"""Transformer blocks pairing global compressed attention with local
window attention.

Each block is the standard pre-norm composition
``x + Attn(LN(x))`` then ``x + MLP(LN(x))``. The attention half is
either compressed cross-attention over aggregated tokens (global
receptive field at reduced cost) or plain attention inside
non-overlapping square windows (local detail). Stacks alternate the two
kinds to get both behaviors.

Multi-head attention partitions the channels into head_count contiguous
slices, runs one independent head per slice with its own projections,
and concatenates the results; there is no output projection, so a
single-head block reduces exactly to the underlying attention function.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .attention import (
    AttentionSpec,
    make_projection_weights,
    saa_attention,
    window_attention,
)
from .dta import DtaConfig
from .errors import ConfigError, ShapeError
from .tokens import FeatureMapShape, as_token_matrix, layer_norm, matmul

BLOCK_KINDS = ("satb", "ltb")


@dataclass(frozen=True)
class BlockConfig:
    """Geometry and knobs for one block.

    block_kind "satb" uses compressed global attention; "ltb" uses
    window attention with the given window_size (must divide both map
    sides). head_count must divide channels.
    """

    channels: int
    block_kind: str = "satb"
    head_count: int = 1
    window_size: int = 4
    mlp_ratio: float = 2.0
    dta: DtaConfig = field(default_factory=DtaConfig)
    spec: AttentionSpec | None = None

    def __post_init__(self):
        if self.channels < 1:
            raise ConfigError(f"channels must be >= 1, got {self.channels}")
        if self.block_kind not in BLOCK_KINDS:
            raise ConfigError(f"block_kind must be one of {BLOCK_KINDS}, got {self.block_kind!r}")
        if self.head_count < 1 or self.channels % self.head_count:
            raise ConfigError(
                f"head_count must divide channels, got {self.head_count} for {self.channels}")
        if self.window_size < 1:
            raise ConfigError(f"window_size must be >= 1, got {self.window_size}")
        if self.mlp_ratio <= 0:
            raise ConfigError(f"mlp_ratio must be positive, got {self.mlp_ratio}")
        if self.spec is not None and self.spec.head_dim != self.head_dim:
            raise ConfigError(
                f"spec head_dim {self.spec.head_dim} != channels/head_count {self.head_dim}")

    @property
    def head_dim(self) -> int:
        return self.channels // self.head_count

    @property
    def attention_spec(self) -> AttentionSpec:
        return self.spec if self.spec is not None else AttentionSpec(self.head_dim)

    @property
    def mlp_hidden(self) -> int:
        return max(1, int(round(self.channels * self.mlp_ratio)))


@dataclass(frozen=True)
class BlockWeights:
    """All learnable tensors of one block, here drawn at random."""

    ln1_gamma: np.ndarray
    ln1_beta: np.ndarray
    ln2_gamma: np.ndarray
    ln2_beta: np.ndarray
    heads: tuple
    w_mlp1: np.ndarray
    w_mlp2: np.ndarray


def init_block_weights(cfg: BlockConfig, seed: int = 0) -> BlockWeights:
    """Seeded uniform projections, identity LayerNorm affine."""
    master = np.random.Generator(np.random.PCG64(seed))
    d = cfg.head_dim
    spec = cfg.attention_spec
    scaled = spec.scaled_dim if spec.use_channel_scaling else None
    heads = tuple(
        make_projection_weights(d, d, int(master.integers(2**31)), scaled_dim=scaled)
        for _ in range(cfg.head_count)
    )
    c, hidden = cfg.channels, cfg.mlp_hidden
    w1 = master.uniform(-1, 1, size=(c, hidden)) / np.sqrt(c)
    w2 = master.uniform(-1, 1, size=(hidden, c)) / np.sqrt(hidden)
    ones = np.ones(c)
    zeros = np.zeros(c)
    return BlockWeights(ones.copy(), zeros.copy(), ones.copy(), zeros.copy(), heads, w1, w2)


def mlp_forward(x, w1, w2) -> np.ndarray:
    """Two dense layers around a smooth gate: gelu(x.W1).W2 with
    gelu(t) = t/2 * (1 + erf(t/sqrt(2)))."""
    hidden = matmul(as_token_matrix(x), w1)
    return matmul(_kernels.gelu(hidden), w2)


def _head_slices(cfg: BlockConfig):
    d = cfg.head_dim
    return [slice(h * d, (h + 1) * d) for h in range(cfg.head_count)]


def attention_sublayer(x, shape: FeatureMapShape, cfg: BlockConfig,
                       weights: BlockWeights) -> np.ndarray:
    """Per-head attention on channel slices, concatenated back to C."""
    xm = as_token_matrix(x)
    shape.check(xm)
    out = np.empty_like(xm)
    spec = cfg.attention_spec
    for sl, w in zip(_head_slices(cfg), weights.heads):
        piece = as_token_matrix(xm[:, sl])
        if cfg.block_kind == "satb":
            out[:, sl] = saa_attention(piece, w, spec, cfg.dta)
        else:
            out[:, sl] = window_attention(piece, w, shape_with_channels(shape, piece.shape[1]), cfg.window_size)
    return out


def shape_with_channels(shape: FeatureMapShape, channels: int) -> FeatureMapShape:
    return FeatureMapShape(shape.height, shape.width, channels)


def block_forward(x, shape: FeatureMapShape, cfg: BlockConfig,
                  weights: BlockWeights) -> np.ndarray:
    """Pre-norm residual composition; output shape equals input shape."""
    xm = as_token_matrix(x)
    shape.check(xm)
    if xm.shape[1] != cfg.channels:
        raise ShapeError(f"input width {xm.shape[1]} != block channels {cfg.channels}")
    normed = layer_norm(xm, weights.ln1_gamma, weights.ln1_beta)
    out = xm + attention_sublayer(normed, shape, cfg, weights)
    normed = layer_norm(out, weights.ln2_gamma, weights.ln2_beta)
    return out + mlp_forward(normed, weights.w_mlp1, weights.w_mlp2)


def satb_forward(x, shape: FeatureMapShape, cfg: BlockConfig,
                 weights: BlockWeights) -> np.ndarray:
    if cfg.block_kind != "satb":
        raise ConfigError(f"expected a satb config, got {cfg.block_kind!r}")
    return block_forward(x, shape, cfg, weights)


def ltb_forward(x, shape: FeatureMapShape, cfg: BlockConfig,
                weights: BlockWeights) -> np.ndarray:
    if cfg.block_kind != "ltb":
        raise ConfigError(f"expected an ltb config, got {cfg.block_kind!r}")
    return block_forward(x, shape, cfg, weights)


@dataclass(frozen=True)
class BlockStack:
    """Ordered blocks plus their weights; kinds give the alternation."""

    blocks: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.blocks) != len(self.weights):
            raise ConfigError(
                f"{len(self.blocks)} blocks but {len(self.weights)} weight sets")
        widths = {b.channels for b in self.blocks}
        if len(widths) > 1:
            raise ConfigError(f"blocks disagree on channels: {sorted(widths)}")

    @property
    def pattern(self) -> tuple:
        return tuple(b.block_kind for b in self.blocks)


def build_stack(configs, seed: int = 0) -> BlockStack:
    """One weight set per block, seeds fanned out from the master seed."""
    master = np.random.Generator(np.random.PCG64(seed))
    weights = tuple(init_block_weights(cfg, int(master.integers(2**31))) for cfg in configs)
    return BlockStack(tuple(configs), weights)


def stack_forward(x, shape: FeatureMapShape, stack: BlockStack) -> np.ndarray:
    """Sequential composition; the empty stack is the identity."""
    out = as_token_matrix(x).copy()
    shape.check(out)
    for cfg, w in zip(stack.blocks, stack.weights):
        out = block_forward(out, shape, cfg, w)
    return out
