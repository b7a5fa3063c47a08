"""Walk through the token clustering pipeline on planted groups.

We plant four well-separated groups of tokens, compress them to K = 4
representatives, and check that the pipeline finds one center per group.
Along the way we print the intermediate artifacts: the subsample plan,
the density/separation scores, and the restored representative norms.
"""

import numpy as np

from sagatt import (
    DtaConfig,
    build_subsample_plan,
    clustered_tokens,
    compute_density_stats,
    dta_compress,
    max_row_norm,
)
from sagatt.tokens import row_norms


def main():
    tokens, labels = clustered_tokens(80, 16, groups=4, spread=0.05, seed=0)
    cfg = DtaConfig(keep_ratio=0.05, beta=8, neighbor_count=5, seed=0)
    k = cfg.num_centers(80)
    print(f"{tokens.shape[0]} tokens, {tokens.shape[1]} channels, "
          f"keep_ratio={cfg.keep_ratio} -> K={k} centers")

    plan = build_subsample_plan(80, cfg, k)
    print(f"subsample: {plan.sampled_indices.size} of 80 tokens, "
          f"region sizes {plan.per_region_counts}")

    stats = compute_density_stats(tokens[plan.sampled_indices], cfg)
    order = np.argsort(-stats.gamma)[:k]
    print("top center scores:",
          np.array2string(stats.gamma[order], precision=3))

    result = dta_compress(tokens, cfg)
    print("chosen centers (original ids):", result.centers)
    print("center group labels:", labels[result.centers])

    sizes = np.bincount(result.assignment, minlength=k)
    print("cluster sizes:", sizes)
    purity = sum(
        np.bincount(labels[result.assignment == j]).max() for j in range(k)
    ) / len(labels)
    print(f"cluster purity vs planted groups: {purity:.2%}")

    print(f"restored representative norms: "
          f"{np.array2string(row_norms(result.aggregated), precision=6)} "
          f"(global max input norm {max_row_norm(tokens):.6f})")


if __name__ == "__main__":
    main()
