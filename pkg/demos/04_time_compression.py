"""Benchmark the three clustering backends on one instance.

The subsampled pipeline reads density from a size-S sample (S = beta*K),
the exact scan reads it from all N tokens, and k-means iterates 20
Lloyd rounds. Median-of-5 wall clocks show why subsampling matters at
sequence lengths where N^2 is painful.
"""

from sagatt import DtaConfig, compare_methods, gaussian_tokens, make_projection_weights


def main():
    n, c = 2048, 64
    x = gaussian_tokens(n, c, seed=11)
    w = make_projection_weights(c, c, seed=11)
    cfg = DtaConfig(keep_ratio=0.03)
    k = cfg.num_centers(n)
    print(f"N={n}, C={c}, K={k}, beta={cfg.beta} "
          f"(subsample size {cfg.sample_size(n, k)})\n")

    reports = compare_methods(x, w, cfg,
                              methods=("dta", "kmeans", "dpc_knn", "vanilla"),
                              reps=5)
    print(f"{'method':<10} {'median ms':>10} {'frobenius error':>16}")
    for r in reports:
        print(f"{r.method:<10} {r.wall_clock / 1e6:>10.2f} "
              f"{r.frobenius_error_vs_vanilla:>16.4f}")
    print("\n(clustering rows time the compression stage; "
          "the vanilla row times full attention)")


if __name__ == "__main__":
    main()
