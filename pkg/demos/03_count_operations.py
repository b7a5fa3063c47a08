"""Tabulate analytic operation counts for both attention variants.

The closed-form model counts multiply-accumulates per pipeline stage.
Compressed attention replaces the two N^2-sized stages with N x K ones
at the price of an N x K x C clustering term, so its advantage is the
headcount ratio N/K up to projection overhead.
"""

from sagatt import estimate_flops, speedup_ratio


def main():
    c = d = 64
    k = 123
    print(f"{'N':>6} {'K':>5} {'full attn':>14} {'compressed':>14} "
          f"{'speedup':>8} {'N/K':>7}")
    for n in (1024, 2048, 4096, 8192):
        full = estimate_flops(n, k, c, d, "vanilla")
        comp = estimate_flops(n, k, c, d, "saa")
        print(f"{n:>6} {k:>5} {full.total:>14,} {comp.total:>14,} "
              f"{speedup_ratio(n, k, c, d):>8.2f} {n / k:>7.2f}")

    print("\nper-stage counts at N=4096:")
    full = estimate_flops(4096, k, c, d, "vanilla")
    comp = estimate_flops(4096, k, c, d, "saa")
    for (term, a), (_, b) in zip(full.terms(), comp.terms()):
        print(f"  {term:<18} {a:>14,} {b:>14,}")


if __name__ == "__main__":
    main()
