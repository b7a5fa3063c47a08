"""Reference clusterings and the method-comparison harness.

dpc_compress is the exact density-peak pipeline (no subsampling, all
N^2 pairs scored); kmeans_baseline is fixed-iteration Lloyd with cosine
assignment. compare_methods drives each clustering through the same
cross-attention path, timing the compression stage and measuring output
error against the uncompressed oracle.

Timing convention: median of `reps` runs after two warm-ups, running
single-threaded so scaling ratios stay interpretable.
"""

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .attention import apply_clusters, cross_attention, vanilla_attention, window_attention
from .dta import (
    ClusterResult,
    DtaConfig,
    SubsamplePlan,
    compress_with_plan,
    dta_compress,
    max_row_norm,
    restore_feature_norms,
)
from .errors import ConfigError, DegenerateInputError
from .tokens import (
    FeatureMapShape,
    as_token_matrix,
    cosine_similarity_matrix,
    frobenius_error,
    matmul,
)

METHOD_NAMES = ("dta", "dpc_knn", "kmeans", "vanilla", "window")


@dataclass(frozen=True)
class OracleReport:
    """One method's timing and accuracy row."""

    method: str
    wall_clock: int
    cluster_result: ClusterResult | None
    frobenius_error_vs_vanilla: float


def median_time_ns(fn, reps: int = 5, warmup: int = 2) -> int:
    """Median wall-clock of `reps` calls, after `warmup` discarded calls."""
    if reps < 1:
        raise ConfigError(f"reps must be >= 1, got {reps}")
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(reps):
        start = time.perf_counter_ns()
        fn()
        times.append(time.perf_counter_ns() - start)
    return int(statistics.median(times))


def dpc_compress(tokens, cfg: DtaConfig, k: int | None = None) -> ClusterResult:
    """Density-peak clustering with exact all-pairs statistics.

    Identical to dta_compress except the density scan covers every
    token, so cost grows with N^2 instead of (beta*K)^2.
    """
    x = as_token_matrix(tokens)
    n = x.shape[0]
    if n < 2:
        raise DegenerateInputError(f"exact density scan needs >= 2 tokens, got {n}")
    k = cfg.num_centers(n) if k is None else int(k)
    if not 1 <= k <= n:
        raise ConfigError(f"center count must be in [1, {n}], got {k}")
    plan = SubsamplePlan(((0, n),), np.arange(n, dtype=np.int64), (n,))
    return compress_with_plan(x, plan, k, cfg)


def dpc_knn_exact(tokens, k: int | None = None, m: int = 5, tau: float = 1.0,
                  eps: float = 1e-6, fnr: bool = True) -> ClusterResult:
    """Scalar-argument front end for dpc_compress."""
    cfg = DtaConfig(neighbor_count=m, temperature=tau, eps=eps, fnr_enabled=fnr)
    return dpc_compress(tokens, cfg, k)


def kmeans_baseline(tokens, k: int, iters: int = 20, seed: int = 0,
                    cfg: DtaConfig | None = None) -> ClusterResult:
    """Lloyd iterations with cosine assignment and mean updates.

    Runs exactly `iters` iterations with no early stop. Empty clusters
    are re-seeded each iteration from the token farthest (max cosine
    distance) from its own centroid, lowest index on ties, drawn only
    from clusters that can spare a member. Returned centers are the
    medoids of the final clusters; aggregated rows are the final
    centroids, norm-restored when the config asks for it.
    """
    x = as_token_matrix(tokens)
    n = x.shape[0]
    if cfg is None:
        cfg = DtaConfig(seed=seed)
    if not 1 <= k <= n:
        raise ConfigError(f"k must be in [1, {n}], got {k}")
    if iters < 1:
        raise ConfigError(f"iters must be >= 1, got {iters}")
    rng = np.random.Generator(np.random.PCG64(seed))
    init = np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)
    centroids = x[init].copy()
    ones = np.ones(n)
    assignment = np.zeros(n, dtype=np.int64)
    for _ in range(iters):
        sims = cosine_similarity_matrix(x, centroids, cfg.eps)
        assignment = np.argmax(sims, axis=1).astype(np.int64)
        sizes = np.bincount(assignment, minlength=k)
        own = sims[np.arange(n), assignment]
        for empty in np.flatnonzero(sizes == 0):
            donors = np.flatnonzero(sizes[assignment] >= 2)
            far = donors[np.argmin(own[donors])]
            sizes[assignment[far]] -= 1
            assignment[far] = empty
            sizes[empty] = 1
        acc, wsum, _ = _kernels.weighted_cluster_sums(x, assignment, ones, k)
        centroids = acc / wsum[:, None]
    sims = cosine_similarity_matrix(x, centroids, cfg.eps)
    centers = np.empty(k, dtype=np.int64)
    for j in range(k):
        members = np.flatnonzero(assignment == j)
        centers[j] = members[np.argmax(sims[members, j])]
    aggregated = centroids
    if cfg.fnr_enabled:
        aggregated = restore_feature_norms(aggregated, x, cfg)
    return ClusterResult(centers, assignment, ones.copy(), aggregated, max_row_norm(x))


def attention_with_compressor(x, w, cfg: DtaConfig, compressor, k: int | None = None) -> np.ndarray:
    """Cross-attention where `compressor` supplies the key/value rows.

    The partition is computed on the projected keys and reused on the
    projected values, matching the main compressed-attention path.
    """
    xm = as_token_matrix(x)
    q = matmul(xm, w.w_q)
    keys = matmul(xm, w.w_k)
    values = matmul(xm, w.w_v)
    result = compressor(keys, cfg) if k is None else compressor(keys, cfg, k)
    v_rows = apply_clusters(values, result, cfg)
    return cross_attention(q, result.aggregated, v_rows, math.sqrt(w.head_dim))


def _kmeans_compressor(keys, cfg, k):
    return kmeans_baseline(keys, k, iters=20, seed=cfg.seed, cfg=cfg)


def compare_methods(tokens, w, cfg: DtaConfig, methods=("dta", "kmeans", "dpc_knn"),
                    reps: int = 5, k: int | None = None,
                    shape: FeatureMapShape | None = None, window: int = 8):
    """Time each method's compression stage and score its attention output.

    Wall-clock covers the token-compression stage only (the part the
    methods differ in); vanilla and window rows, which compress nothing,
    time their full attention instead. Error is the Frobenius distance
    of the end-to-end attention output from the uncompressed result.
    Returns one OracleReport per requested method, in request order.
    """
    for name in methods:
        if name not in METHOD_NAMES:
            raise ConfigError(f"unknown method {name!r}; expected one of {METHOD_NAMES}")
    x = as_token_matrix(tokens)
    n = x.shape[0]
    kk = cfg.num_centers(n) if k is None else int(k)
    q = matmul(x, w.w_q)
    keys = matmul(x, w.w_k)
    values = matmul(x, w.w_v)
    scale = math.sqrt(w.head_dim)
    vanilla_out = cross_attention(q, keys, values, scale)
    compressors = {
        "dta": lambda: dta_compress(keys, cfg, kk),
        "dpc_knn": lambda: dpc_compress(keys, cfg, kk),
        "kmeans": lambda: _kmeans_compressor(keys, cfg, kk),
    }
    reports = []
    for name in methods:
        if name == "vanilla":
            out = vanilla_attention(x, w)
            wall = median_time_ns(lambda: vanilla_attention(x, w), reps)
            result = None
        elif name == "window":
            if shape is None:
                side = math.isqrt(n)
                if side * side != n:
                    raise ConfigError(f"window method needs a square map, got N={n}")
                shape = FeatureMapShape(side, side, x.shape[1])
            out = window_attention(x, w, shape, window)
            wall = median_time_ns(lambda: window_attention(x, w, shape, window), reps)
            result = None
        else:
            run = compressors[name]
            result = run()
            v_rows = apply_clusters(values, result, cfg)
            out = cross_attention(q, result.aggregated, v_rows, scale)
            wall = median_time_ns(run, reps)
        reports.append(OracleReport(name, wall, result, frobenius_error(out, vanilla_out)))
    return reports


def write_reports_csv(path, reports, n: int, k: int, c: int, seed: int) -> None:
    """Rows of ``method,N,K,C,seed,wall_clock_ns,frobenius_error``."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("method,N,K,C,seed,wall_clock_ns,frobenius_error\n")
        for r in reports:
            fh.write(f"{r.method},{n},{k},{c},{seed},{r.wall_clock},"
                     f"{float(r.frobenius_error_vs_vanilla)!r}\n")
