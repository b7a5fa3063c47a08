"""Density-driven token aggregation.

Compresses an N-token sequence to K representatives in five steps:
stratified subsampling of the raster order, k-NN cosine density and
separation scoring on the subsample, top-score center selection, full
assignment by cosine similarity, and temperature-weighted aggregation
with optional restoration of the original norm scale.

Scoring favors tokens that sit inside dense semantic neighborhoods
(high mean similarity to their nearest neighbors) while being far from
any denser token, so each selected center stands for one coherent
region of the feature space.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DegenerateInputError
from .tokens import DEFAULT_EPS, as_token_matrix, cosine_similarity_matrix

# Repo-fixed PRNG: numpy's PCG64, a documented, platform-independent
# permuted-congruential generator. Subsampling must reproduce across
# machines for a given seed.
def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class DtaConfig:
    """Clustering knobs.

    keep_ratio  fraction of tokens kept as centers; K = max(1, round(ratio*N))
    beta        subsampling factor; the density statistics run on
                S = min(beta*K, N) tokens instead of all N
    neighbor_count  m for the k-NN density estimate (clamped to S-1)
    temperature     softness of the aggregation weights exp(sim/tau)
    eps             zero-guard for norms and similarity denominators
    fnr_enabled     rescale aggregated rows back to the max original norm
    seed            subsample PRNG seed
    """

    keep_ratio: float = 0.03
    beta: int = 4
    neighbor_count: int = 5
    temperature: float = 1.0
    eps: float = DEFAULT_EPS
    fnr_enabled: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.keep_ratio <= 1.0:
            raise ConfigError(f"keep_ratio must be in (0, 1], got {self.keep_ratio}")
        if int(self.beta) != self.beta or self.beta < 2:
            raise ConfigError(f"beta must be an integer >= 2, got {self.beta}")
        if int(self.neighbor_count) != self.neighbor_count or self.neighbor_count < 1:
            raise ConfigError(f"neighbor_count must be >= 1, got {self.neighbor_count}")
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")
        if self.eps <= 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    def num_centers(self, n: int) -> int:
        """K = max(1, round(keep_ratio * n)), rounding half up."""
        return max(1, int(np.floor(self.keep_ratio * n + 0.5)))

    def sample_size(self, n: int, k: int) -> int:
        """S = beta * K, clamped to n."""
        return min(self.beta * k, n)


@dataclass(frozen=True)
class SubsamplePlan:
    """Which token indices feed the density statistics.

    region_bounds partitions [0, N) into K contiguous raster blocks;
    per_region_counts holds the pre-top-up draw m_i per block;
    sampled_indices is the merged, ascending sample of size min(S, N).
    """

    region_bounds: tuple
    sampled_indices: np.ndarray
    per_region_counts: tuple


@dataclass(frozen=True)
class DensityStats:
    """Per-subsample-token density, separation, and their product."""

    rho: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray


@dataclass(frozen=True)
class ClusterResult:
    """Output of one compression: K centers over an N-token input.

    centers      ascending token indices of the K representatives
    assignment   cluster ordinal per token; assignment[centers[k]] == k
    weights      aggregation weight per token (positive)
    aggregated   K x C representative rows
    max_norm     largest row norm among the original tokens
    """

    centers: np.ndarray
    assignment: np.ndarray
    weights: np.ndarray
    aggregated: np.ndarray
    max_norm: float

    @property
    def num_clusters(self) -> int:
        return self.centers.shape[0]


def region_bounds(n: int, k: int) -> tuple:
    """K contiguous half-open raster blocks; the last absorbs the remainder."""
    base = n // k
    bounds = [(i * base, (i + 1) * base) for i in range(k - 1)]
    bounds.append(((k - 1) * base, n))
    return tuple(bounds)


def build_subsample_plan(n: int, cfg: DtaConfig, k: int | None = None) -> SubsamplePlan:
    """Draw a stratified subsample of min(beta*K, n) token indices.

    Each raster block contributes min(floor(S/K), block size) indices
    drawn uniformly without replacement; any deficit is topped up
    uniformly from the still-unsampled indices. Deterministic for a
    fixed (n, cfg). Pass k to override the keep-ratio-derived count.
    """
    if n < 1:
        raise ConfigError(f"token count must be >= 1, got {n}")
    k = cfg.num_centers(n) if k is None else int(k)
    if not 1 <= k <= n:
        raise ConfigError(f"center count must be in [1, {n}], got {k}")
    s = cfg.sample_size(n, k)
    bounds = region_bounds(n, k)
    quota = s // k
    rng = _rng(cfg.seed)
    chosen = []
    counts = []
    for lo, hi in bounds:
        size = hi - lo
        m_i = min(quota, size)
        counts.append(m_i)
        picks = rng.choice(size, size=m_i, replace=False)
        chosen.append(lo + np.sort(picks))
    sampled = np.concatenate(chosen)
    deficit = s - sampled.shape[0]
    if deficit > 0:
        mask = np.ones(n, dtype=bool)
        mask[sampled] = False
        pool = np.flatnonzero(mask)
        extra = rng.choice(pool.shape[0], size=deficit, replace=False)
        sampled = np.concatenate([sampled, pool[extra]])
    sampled = np.sort(sampled).astype(np.int64)
    return SubsamplePlan(bounds, sampled, tuple(counts))


def compute_density_stats(tokens, cfg: DtaConfig) -> DensityStats:
    """k-NN density, separation, and center score for subsample rows.

    rho_i is the mean cosine similarity to the m nearest neighbors
    (excluding self). delta_i is the min cosine distance to any strictly
    denser row; rows tied at the global density maximum get the max
    distance to any row instead. gamma = rho * delta.
    """
    x = as_token_matrix(tokens)
    s = x.shape[0]
    if s < 2:
        raise DegenerateInputError(f"density stats need >= 2 tokens, got {s}")
    m = min(cfg.neighbor_count, s - 1)
    sim = cosine_similarity_matrix(x, x, cfg.eps)
    rho = _kernels.knn_mean_similarity(sim, m)
    delta = _kernels.separation_from_density(sim, rho)
    return DensityStats(rho, delta, rho * delta)


def select_centers(stats: DensityStats, plan: SubsamplePlan, k: int) -> np.ndarray:
    """Top-k tokens by score, returned as ascending original indices.

    Score ties break toward the lower subsample position, so selection
    is deterministic.
    """
    s = stats.gamma.shape[0]
    if k > s:
        raise ConfigError(f"cannot select {k} centers from a subsample of {s}")
    order = np.argsort(-stats.gamma, kind="stable")
    picked = plan.sampled_indices[order[:k]]
    return np.sort(picked).astype(np.int64)


def assign_tokens(tokens, centers, cfg: DtaConfig) -> np.ndarray:
    """Nearest-center assignment by cosine similarity.

    Ties go to the lowest center ordinal; each center is then pinned to
    its own cluster so duplicate centers keep distinct clusters.
    """
    x = as_token_matrix(tokens)
    c_idx = np.asarray(centers, dtype=np.int64)
    if c_idx.shape[0] < 1:
        raise ConfigError("need at least one center")
    sims = cosine_similarity_matrix(x, x[c_idx], cfg.eps)
    assignment = np.argmax(sims, axis=1).astype(np.int64)
    assignment[c_idx] = np.arange(c_idx.shape[0], dtype=np.int64)
    return assignment


def weighted_cluster_means(tokens, assignment, weights, k: int, centers=None) -> np.ndarray:
    """Weighted mean of each cluster's member rows, ascending token order.

    Singleton clusters copy their center row verbatim when `centers` is
    given, keeping the no-compression path bit-exact.
    """
    x = as_token_matrix(tokens)
    a = np.asarray(assignment, dtype=np.int64)
    w = np.asarray(weights, dtype=np.float64)
    acc, wsum, sizes = _kernels.weighted_cluster_sums(x, a, w, k)
    if (sizes == 0).any():
        empty = int(np.flatnonzero(sizes == 0)[0])
        raise ConfigError(f"cluster {empty} has no members")
    y = acc / wsum[:, None]
    if centers is not None:
        c_idx = np.asarray(centers, dtype=np.int64)
        single = np.flatnonzero(sizes == 1)
        if single.size:
            y[single] = x[c_idx[single]]
    return y


def aggregate_clusters(tokens, assignment, centers, cfg: DtaConfig):
    """Similarity-weighted merge of each cluster into one row.

    Member weights are exp(sim(token, own center) / temperature); small
    temperatures sharpen toward the center, large ones approach the
    plain mean. Returns (K x C rows, per-token weights).
    """
    x = as_token_matrix(tokens)
    c_idx = np.asarray(centers, dtype=np.int64)
    a = np.asarray(assignment, dtype=np.int64)
    k = c_idx.shape[0]
    sims = cosine_similarity_matrix(x, x[c_idx], cfg.eps)
    own = sims[np.arange(x.shape[0]), a]
    weights = np.exp(own / cfg.temperature)
    y = weighted_cluster_means(x, a, weights, k, centers=c_idx)
    return y, weights


def max_row_norm(tokens) -> float:
    return float(np.max(_kernels.row_norms(as_token_matrix(tokens))))


def restore_feature_norms(y, original, cfg: DtaConfig) -> np.ndarray:
    """Rescale aggregated rows to the largest original row norm.

    Weighted averaging can only shrink norms (triangle inequality), so
    each row with norm above eps is stretched back to the global max
    norm of the original tokens, direction unchanged. Near-zero rows
    pass through.
    """
    ym = as_token_matrix(y)
    n_max = max_row_norm(original)
    norms = _kernels.row_norms(ym)
    out = ym.copy()
    live = norms > cfg.eps
    out[live] = ym[live] * (n_max / norms[live])[:, None]
    return out


def compress_with_plan(x: np.ndarray, plan: SubsamplePlan, k: int, cfg: DtaConfig) -> ClusterResult:
    """Score, select, assign, aggregate, restore over a fixed sample.

    The approximate and exact pipelines differ only in the plan they
    pass here, so clamping the sample to all of [0, N) reproduces the
    exact variant bit-for-bit.
    """
    n = x.shape[0]
    n_max = max_row_norm(x)
    if plan.sampled_indices.shape[0] < 2:
        # single-token input: the token is its own center
        centers = np.zeros(1, dtype=np.int64)
        assignment = np.zeros(n, dtype=np.int64)
        weights = np.ones(n)
        aggregated = x[:1].copy()
        return ClusterResult(centers, assignment, weights, aggregated, n_max)
    stats = compute_density_stats(x[plan.sampled_indices], cfg)
    centers = select_centers(stats, plan, k)
    assignment = assign_tokens(x, centers, cfg)
    aggregated, weights = aggregate_clusters(x, assignment, centers, cfg)
    if cfg.fnr_enabled:
        aggregated = restore_feature_norms(aggregated, x, cfg)
    return ClusterResult(centers, assignment, weights, aggregated, n_max)


def dta_compress(tokens, cfg: DtaConfig, k: int | None = None) -> ClusterResult:
    """Full pipeline: plan, score, select, assign, aggregate, restore."""
    x = as_token_matrix(tokens)
    n = x.shape[0]
    k = cfg.num_centers(n) if k is None else int(k)
    plan = build_subsample_plan(n, cfg, k)
    return compress_with_plan(x, plan, k, cfg)


def write_assignment_csv(path, result: ClusterResult) -> None:
    """Rows of ``token_id,cluster_id,weight``."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("token_id,cluster_id,weight\n")
        for i in range(result.assignment.shape[0]):
            fh.write(f"{i},{result.assignment[i]},{float(result.weights[i])!r}\n")


def write_centers_csv(path, result: ClusterResult, shape=None) -> None:
    """Rows of ``cluster_id,center_token_id``, plus row/col when a
    feature-map shape is known."""
    with open(path, "w", encoding="ascii") as fh:
        if shape is None:
            fh.write("cluster_id,center_token_id\n")
            for k, c in enumerate(result.centers):
                fh.write(f"{k},{c}\n")
        else:
            fh.write("cluster_id,center_token_id,row,col\n")
            for k, c in enumerate(result.centers):
                fh.write(f"{k},{c},{c // shape.width},{c % shape.width}\n")
