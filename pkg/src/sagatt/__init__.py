"""Token-aggregation attention at desk scale.

A numpy/numba library for studying attention whose keys and values are
compressed to K representative tokens by density-driven clustering
while queries keep full resolution. Ships the clustering pipeline, the
attention variants, exact and baseline reference clusterings, analytic
operation counts, composable transformer blocks, and a benchmark CLI.

All numerics run through fixed-reduction-order kernels, so results are
bit-reproducible across runs and machines for a given seed.
"""

from .attention import (
    AttentionSpec,
    FlopEstimate,
    apply_clusters,
    compress_kv,
    cross_attention,
    estimate_flops,
    make_projection_weights,
    saa_attention,
    speedup_ratio,
    vanilla_attention,
    window_attention,
    window_tiles,
    write_flops_csv,
)
from .blocks import (
    BlockConfig,
    BlockStack,
    BlockWeights,
    block_forward,
    build_stack,
    init_block_weights,
    ltb_forward,
    mlp_forward,
    satb_forward,
    stack_forward,
)
from .dta import (
    ClusterResult,
    DensityStats,
    DtaConfig,
    SubsamplePlan,
    aggregate_clusters,
    assign_tokens,
    build_subsample_plan,
    compute_density_stats,
    dta_compress,
    max_row_norm,
    restore_feature_norms,
    select_centers,
    weighted_cluster_means,
    write_assignment_csv,
    write_centers_csv,
)
from .errors import ConfigError, DegenerateInputError, ShapeError, TokenFormatError
from .oracles import (
    OracleReport,
    attention_with_compressor,
    compare_methods,
    dpc_compress,
    dpc_knn_exact,
    kmeans_baseline,
    median_time_ns,
    write_reports_csv,
)
from .synthetic import SyntheticSpec, clustered_tokens, gaussian_tokens, parse_synthetic
from .tokenio import load_tokens, load_tokens_csv, save_tokens, save_tokens_csv
from .tokens import (
    FeatureMapShape,
    ProjectionWeights,
    as_token_matrix,
    cosine_distance,
    cosine_similarity,
    cosine_similarity_matrix,
    frobenius_error,
    layer_norm,
    matmul,
    row_norms,
    row_softmax,
)

__version__ = "0.1.0"
