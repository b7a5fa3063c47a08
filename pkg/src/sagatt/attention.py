"""Full self-attention and its compressed cross-attention variant.

The compressed form keeps every query row but replaces the N keys and
values with K aggregated representatives, so the score matrix shrinks
from N x N to N x K while the output keeps N rows. Clustering runs once
on the projected keys and the resulting partition is reused to aggregate
the projected values, keeping key and value rows positionally aligned.

Also houses the analytic operation-count model used by the benchmark
reports; the closed forms are documented on estimate_flops.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dta import ClusterResult, DtaConfig, dta_compress, restore_feature_norms, weighted_cluster_means
from .errors import ConfigError, ShapeError
from .tokens import FeatureMapShape, ProjectionWeights, as_token_matrix, matmul, row_softmax


@dataclass(frozen=True)
class AttentionSpec:
    """Head geometry: output width d and optional channel scaling.

    With scaling enabled, queries and compressed keys are projected down
    to scaled_dim = ceil(channel_scale * head_dim) columns before the
    score product, and the softmax scale becomes sqrt(scaled_dim).
    """

    head_dim: int
    channel_scale: float = 0.5
    use_channel_scaling: bool = False

    def __post_init__(self):
        if int(self.head_dim) != self.head_dim or self.head_dim < 1:
            raise ConfigError(f"head_dim must be a positive integer, got {self.head_dim}")
        if not 0.0 < self.channel_scale <= 1.0:
            raise ConfigError(f"channel_scale must be in (0, 1], got {self.channel_scale}")

    @property
    def scaled_dim(self) -> int:
        if not self.use_channel_scaling:
            return self.head_dim
        return max(1, int(math.ceil(self.channel_scale * self.head_dim)))


def make_projection_weights(channels: int, head_dim: int, seed: int = 0,
                            scaled_dim: int | None = None) -> ProjectionWeights:
    """Seeded uniform weights on [-1/sqrt(C), 1/sqrt(C)].

    The bound keeps logits O(1) so softmax stays well-conditioned at any
    desk-scale width. Pass scaled_dim to also draw the score-side
    down-projections.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    bound = 1.0 / math.sqrt(channels)

    def draw(rows, cols):
        return rng.uniform(-bound, bound, size=(rows, cols))

    w_q = draw(channels, head_dim)
    w_k = draw(channels, head_dim)
    w_v = draw(channels, head_dim)
    if scaled_dim is None:
        return ProjectionWeights(w_q, w_k, w_v)
    w_qs = draw(head_dim, scaled_dim)
    w_ks = draw(head_dim, scaled_dim)
    return ProjectionWeights(w_q, w_k, w_v, w_qs, w_ks)


def cross_attention(q, k_rows, v_rows, scale: float) -> np.ndarray:
    """softmax(q . k_rows^T / scale) . v_rows with fixed-order reductions."""
    qm = as_token_matrix(q)
    km = as_token_matrix(k_rows)
    vm = as_token_matrix(v_rows)
    if km.shape[0] != vm.shape[0]:
        raise ShapeError(f"key/value row counts disagree: {km.shape[0]} vs {vm.shape[0]}")
    scores = matmul(qm, km.T)
    attn = row_softmax(scores / scale)
    return matmul(attn, vm)


def vanilla_attention(x, w: ProjectionWeights) -> np.ndarray:
    """Standard single-head self-attention over all N tokens."""
    xm = as_token_matrix(x)
    if xm.shape[1] != w.channels:
        raise ShapeError(f"token width {xm.shape[1]} != projection input {w.channels}")
    q = matmul(xm, w.w_q)
    k = matmul(xm, w.w_k)
    v = matmul(xm, w.w_v)
    return cross_attention(q, k, v, math.sqrt(w.head_dim))


def apply_clusters(values, result: ClusterResult, cfg: DtaConfig) -> np.ndarray:
    """Aggregate a second matrix with an existing partition.

    Reuses (assignment, weights, centers) computed elsewhere, then
    restores norms against THIS matrix's own rows when enabled.
    """
    vm = as_token_matrix(values)
    out = weighted_cluster_means(vm, result.assignment, result.weights,
                                 result.num_clusters, centers=result.centers)
    if cfg.fnr_enabled:
        out = restore_feature_norms(out, vm, cfg)
    return out


def compress_kv(keys, values, cfg: DtaConfig, compressor=dta_compress):
    """Cluster the keys, aggregate both matrices with the shared partition.

    `compressor` is any callable(tokens, cfg) -> ClusterResult, so the
    baseline clusterings can drive the same attention path.
    """
    result = compressor(keys, cfg)
    v_rows = apply_clusters(values, result, cfg)
    return result.aggregated, v_rows, result


def saa_attention(x, w: ProjectionWeights, spec: AttentionSpec, cfg: DtaConfig) -> np.ndarray:
    """Selective-aggregation attention: full queries, compressed keys/values.

    Output has one row per input token regardless of compression level.
    """
    xm = as_token_matrix(x)
    if xm.shape[1] != w.channels:
        raise ShapeError(f"token width {xm.shape[1]} != projection input {w.channels}")
    if spec.head_dim != w.head_dim:
        raise ShapeError(f"spec head_dim {spec.head_dim} != projection output {w.head_dim}")
    q = matmul(xm, w.w_q)
    keys = matmul(xm, w.w_k)
    values = matmul(xm, w.w_v)
    k_rows, v_rows, _ = compress_kv(keys, values, cfg)
    if spec.use_channel_scaling:
        if w.w_qs is None:
            raise ConfigError("channel scaling enabled but scaling projections missing")
        if w.w_qs.shape[1] != spec.scaled_dim:
            raise ShapeError(f"scaling projection width {w.w_qs.shape[1]} != scaled_dim {spec.scaled_dim}")
        q = matmul(q, w.w_qs)
        k_rows = matmul(k_rows, w.w_ks)
        scale = math.sqrt(spec.scaled_dim)
    else:
        scale = math.sqrt(spec.head_dim)
    return cross_attention(q, k_rows, v_rows, scale)


def window_tiles(shape: FeatureMapShape, window: int):
    """Raster indices of each non-overlapping window x window tile.

    Tiles are yielded row-major; the window must divide both map sides.
    """
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    if shape.height % window or shape.width % window:
        raise ConfigError(
            f"window {window} does not divide map {shape.height}x{shape.width}")
    cols = np.arange(window, dtype=np.int64)
    for ti in range(shape.height // window):
        for tj in range(shape.width // window):
            rows = (ti * window + cols) * shape.width + tj * window
            yield (rows[:, None] + cols[None, :]).ravel()


def window_attention(x, w: ProjectionWeights, shape: FeatureMapShape, window: int) -> np.ndarray:
    """Self-attention restricted to non-overlapping square tiles.

    Each tile attends only within itself, so the output at a tile is a
    function of that tile alone.
    """
    xm = as_token_matrix(x)
    shape.check(xm)
    out = np.empty((xm.shape[0], w.head_dim))
    for idx in window_tiles(shape, window):
        out[idx] = vanilla_attention(xm[idx], w)
    return out


@dataclass(frozen=True)
class FlopEstimate:
    """Term-by-term operation counts for one attention variant."""

    variant: str
    n: int
    k: int
    c: int
    d: int
    q_projection: int
    kv_projection: int
    dta_cost: int
    attention_matrix: int
    softmax_cost: int
    weighted_sum: int

    @property
    def total(self) -> int:
        return (self.q_projection + self.kv_projection + self.dta_cost
                + self.attention_matrix + self.softmax_cost + self.weighted_sum)

    def terms(self):
        """(term, count) pairs in fixed report order, total last."""
        return (("q_projection", self.q_projection),
                ("kv_projection", self.kv_projection),
                ("dta_cost", self.dta_cost),
                ("attention_matrix", self.attention_matrix),
                ("softmax_cost", self.softmax_cost),
                ("weighted_sum", self.weighted_sum),
                ("total", self.total))


def estimate_flops(n: int, k: int, c: int, d: int, variant: str) -> FlopEstimate:
    """Analytic operation counts.

    vanilla: NC^2 + 2NC^2 + 2N^2d + N^2 + N^2d   (q proj, kv proj,
             score matrix with multiply-add counted, softmax, mix)
    saa:     NC^2 + 2KC^2 + NKC + NKd + NK + NKd (q proj, kv proj,
             clustering, score matrix, softmax, mix)

    The clustering term counts the N x K assignment pass, the dominant
    cost; subsample scoring is O(S^2 C) with S << N and is folded out.
    """
    for name, v in (("n", n), ("k", k), ("c", c), ("d", d)):
        if int(v) != v or v < 1:
            raise ConfigError(f"{name} must be a positive integer, got {v}")
    if variant == "vanilla":
        return FlopEstimate("vanilla", n, k, c, d,
                            q_projection=n * c * c,
                            kv_projection=2 * n * c * c,
                            dta_cost=0,
                            attention_matrix=2 * n * n * d,
                            softmax_cost=n * n,
                            weighted_sum=n * n * d)
    if variant == "saa":
        return FlopEstimate("saa", n, k, c, d,
                            q_projection=n * c * c,
                            kv_projection=2 * k * c * c,
                            dta_cost=n * k * c,
                            attention_matrix=n * k * d,
                            softmax_cost=n * k,
                            weighted_sum=n * k * d)
    raise ConfigError(f"unknown variant {variant!r}")


def speedup_ratio(n: int, k: int, c: int, d: int) -> float:
    """total(vanilla) / total(saa) at the same geometry."""
    return estimate_flops(n, k, c, d, "vanilla").total / estimate_flops(n, k, c, d, "saa").total


def write_flops_csv(path, estimates) -> None:
    """Rows of ``variant,N,K,C,d,term,count``, one per term plus total."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("variant,N,K,C,d,term,count\n")
        for est in estimates:
            for term, count in est.terms():
                fh.write(f"{est.variant},{est.n},{est.k},{est.c},{est.d},{term},{count}\n")
