"""Acceptance gate: one test per headline guarantee, one verdict line each.

Each test prints a single ``[criterion NN] ... PASS/FAIL`` line before
asserting, so a ``pytest -s tests/test_acceptance.py`` run reads as a
checklist. Tolerances are pinned here and must not be loosened to make a
failing criterion pass.
"""

import time
from dataclasses import replace

import numpy as np

from sagatt import (
    AttentionSpec,
    BlockConfig,
    BlockStack,
    DtaConfig,
    build_stack,
    compare_methods,
    dpc_compress,
    dpc_knn_exact,
    dta_compress,
    estimate_flops,
    frobenius_error,
    init_block_weights,
    ltb_forward,
    make_projection_weights,
    max_row_norm,
    median_time_ns,
    saa_attention,
    satb_forward,
    speedup_ratio,
    stack_forward,
    vanilla_attention,
)
from sagatt.cli import main
from sagatt.synthetic import gaussian_tokens
from sagatt.tokens import FeatureMapShape, row_norms


def verdict(num, label, ok, detail):
    print(f"[criterion {num:2d}] {label}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num} ({label}): {detail}"


def test_criterion_01_identity_compression_matches_vanilla():
    """keep_ratio=1 with norm restoration and channel scaling off must
    reproduce uncompressed attention to 1e-9 relative error."""
    start = time.perf_counter()
    cfg = DtaConfig(keep_ratio=1.0, fnr_enabled=False)
    worst = 0.0
    for n in (16, 64, 256):
        spec = AttentionSpec(head_dim=32)
        for i in range(50):
            rng = np.random.default_rng(10_000 + 97 * n + i)
            x = rng.standard_normal((n, 32))
            w = make_projection_weights(32, 32, seed=i)
            approx = saa_attention(x, w, spec, cfg)
            exact = vanilla_attention(x, w)
            rel = frobenius_error(approx, exact) / frobenius_error(
                exact, np.zeros_like(exact))
            worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    verdict(1, "identity compression equals vanilla attention",
            worst <= 1e-9 and elapsed < 30.0,
            f"max rel err {worst:.3e}, {elapsed:.1f}s for 150 instances")


def test_criterion_02_full_sample_matches_exact_scan_bitwise():
    """With the subsample budget clamped to N the fast path must equal the
    exact quadratic scan bit for bit."""
    mismatches = 0
    for i in range(50):
        rng = np.random.default_rng(20_000 + i)
        n = int(rng.integers(2, 257))
        c = int(rng.integers(3, 33))
        x = rng.standard_normal((n, c))
        cfg = DtaConfig(keep_ratio=0.05, beta=10 * n, seed=i)
        a = dta_compress(x, cfg)
        b = dpc_compress(x, cfg)
        same = (
            np.array_equal(a.centers, b.centers)
            and np.array_equal(a.assignment, b.assignment)
            and np.array_equal(a.weights, b.weights)
            and np.array_equal(a.aggregated, b.aggregated)
            and a.max_norm == b.max_norm
        )
        mismatches += not same
    verdict(2, "clamped subsampling is bit-exact vs full scan",
            mismatches == 0, f"{mismatches} of 50 instances differed")


def test_criterion_03_norm_restoration_invariants():
    """Restored rows sit at the global max input norm with direction kept;
    pre-restoration rows never exceed the largest member norm."""
    worst_norm = 0.0
    worst_dir = 0.0
    worst_shrink = -np.inf
    for i in range(100):
        rng = np.random.default_rng(30_000 + i)
        n = int(rng.integers(4, 129))
        c = int(rng.integers(3, 33))
        x = rng.standard_normal((n, c))
        cfg = DtaConfig(keep_ratio=0.2, seed=i)
        raw = dta_compress(x, replace(cfg, fnr_enabled=False))
        restored = dta_compress(x, cfg)
        target = max_row_norm(x)
        worst_norm = max(worst_norm,
                         np.abs(row_norms(restored.aggregated) - target).max())
        unit_raw = raw.aggregated / row_norms(raw.aggregated)[:, None]
        unit_res = restored.aggregated / row_norms(restored.aggregated)[:, None]
        worst_dir = max(worst_dir, np.abs(unit_res - unit_raw).max())
        member_norms = row_norms(x)
        for k in range(raw.num_clusters):
            members = member_norms[raw.assignment == k]
            worst_shrink = max(
                worst_shrink,
                float(np.linalg.norm(raw.aggregated[k]) - members.max()))
    verdict(3, "feature norm restoration invariants",
            worst_norm <= 1e-9 and worst_dir <= 1e-12 and worst_shrink <= 1e-9,
            f"norm dev {worst_norm:.2e}, direction dev {worst_dir:.2e}, "
            f"shrinkage excess {worst_shrink:.2e}")


def test_criterion_04_center_count_tracks_keep_ratio():
    """At a 3% keeping ratio the center count lands within [2.5%, 3.5%]
    of N across three decades."""
    cfg = DtaConfig(keep_ratio=0.03)
    ratios = {n: cfg.num_centers(n) / n for n in (100, 1000, 4096)}
    ok = all(0.025 <= r <= 0.035 for r in ratios.values())
    detail = ", ".join(f"N={n}: K/N={r:.4f}" for n, r in ratios.items())
    verdict(4, "token reduction arithmetic", ok, detail)


def test_criterion_05_wall_clock_scaling():
    """With K fixed at 64, compressed attention time grows roughly linearly
    in N while the exact density scan grows quadratically."""
    start = time.perf_counter()
    spec = AttentionSpec(head_dim=64)
    saa_times = {}
    dpc_times = {}
    for n in (1024, 4096):
        x = gaussian_tokens(n, 64, seed=5)
        w = make_projection_weights(64, 64, seed=5)
        cfg = DtaConfig(keep_ratio=64 / n)
        assert cfg.num_centers(n) == 64
        saa_times[n] = median_time_ns(lambda: saa_attention(x, w, spec, cfg),
                                      reps=5)
        dpc_times[n] = median_time_ns(lambda: dpc_compress(x, cfg), reps=5)
    saa_ratio = saa_times[4096] / saa_times[1024]
    dpc_ratio = dpc_times[4096] / dpc_times[1024]
    elapsed = time.perf_counter() - start
    verdict(5, "wall-clock complexity scaling",
            2.5 <= saa_ratio <= 6.0 and dpc_ratio >= 10.0 and elapsed < 300.0,
            f"compressed 4096/1024 = {saa_ratio:.2f}, "
            f"exact scan = {dpc_ratio:.2f}, {elapsed:.0f}s total")


def test_criterion_06_compression_runtime_ordering():
    """At N=4096, K=123 the subsampled pipeline beats 20-iteration k-means
    by 5x or more, and k-means beats the exact scan."""
    x = gaussian_tokens(4096, 64, seed=6)
    w = make_projection_weights(64, 64, seed=6)
    cfg = DtaConfig(keep_ratio=123 / 4096)
    assert cfg.num_centers(4096) == 123
    reports = {r.method: r for r in
               compare_methods(x, w, cfg, methods=("dta", "kmeans", "dpc_knn"),
                               reps=5)}
    t_dta = reports["dta"].wall_clock
    t_km = reports["kmeans"].wall_clock
    t_dpc = reports["dpc_knn"].wall_clock
    ok = t_dta < t_km < t_dpc and t_km >= 5 * t_dta
    verdict(6, "compression runtime ordering",
            ok,
            f"dta {t_dta / 1e6:.1f}ms < kmeans {t_km / 1e6:.1f}ms "
            f"< exact {t_dpc / 1e6:.1f}ms, kmeans/dta {t_km / t_dta:.1f}x")


def test_criterion_07_error_falls_then_saturates_with_keep_ratio():
    """Mean approximation error is non-increasing in the keeping ratio and
    the 0.10 to 0.20 step buys less than the 0.01 to 0.03 step."""
    ratios = (0.01, 0.03, 0.10, 0.20)
    sums = dict.fromkeys(ratios, 0.0)
    for seed in range(20):
        x = gaussian_tokens(256, 64, seed=seed)
        w = make_projection_weights(64, 64, seed=seed)
        spec = AttentionSpec(head_dim=64)
        exact = vanilla_attention(x, w)
        for r in ratios:
            approx = saa_attention(x, w, spec, DtaConfig(keep_ratio=r))
            sums[r] += frobenius_error(approx, exact)
    means = [sums[r] / 20 for r in ratios]
    non_increasing = all(b <= a + 1e-12 for a, b in zip(means, means[1:]))
    saturates = (means[2] - means[3]) < (means[0] - means[1])
    verdict(7, "error decreases then saturates",
            non_increasing and saturates,
            "means " + " -> ".join(f"{m:.2f}" for m in means))


def test_criterion_08_analytic_speedup_tracks_n_over_k():
    """The flop model's predicted speedup stays within a factor of two of
    the N/K headcount ratio."""
    n, k = 4096, 123
    predicted = speedup_ratio(n, k, 64, 64)
    ok = (n / k) / 2 <= predicted <= (n / k) * 2
    verdict(8, "analytic speedup within 2x of N/K",
            ok, f"predicted {predicted:.2f}, N/K = {n / k:.2f}")


def test_criterion_09_block_invariants():
    """Window blocks respect tile boundaries bit-exactly, compressed-attention
    blocks preserve shape, and a one-token poke escapes its window."""
    shape = FeatureMapShape(8, 8, 16)
    rng = np.random.default_rng(90)
    x = rng.standard_normal((64, 16))

    ltb = BlockConfig(16, "ltb", window_size=4)
    w_ltb = init_block_weights(ltb, seed=90)
    base = ltb_forward(x, shape, ltb, w_ltb)
    poked = x.copy()
    poked[63, 0] += 10.0
    out = ltb_forward(poked, shape, ltb, w_ltb)
    top_left = [r * 8 + c for r in range(4) for c in range(4)]
    local = bool((out[top_left] == base[top_left]).all())

    satb = BlockConfig(16, "satb", dta=DtaConfig(keep_ratio=0.2))
    w_satb = init_block_weights(satb, seed=90)
    y = satb_forward(x, shape, satb, w_satb)
    shaped = y.shape == (64, 16) and bool(np.isfinite(y).all())

    escaped = False
    for seed in (9, 90, 900):
        stack = build_stack([ltb, satb], seed=seed)
        sx = np.random.default_rng(seed).standard_normal((64, 16))
        sb = stack_forward(sx, shape, stack)
        sp = sx.copy()
        sp[63, 0] += 5.0
        so = stack_forward(sp, shape, stack)
        changed = set(np.flatnonzero(np.abs(so - sb).max(axis=1) > 1e-9).tolist())
        window = {r * 8 + c for r in range(4, 8) for c in range(4, 8)}
        if changed - window:
            escaped = True
            break
    verdict(9, "block locality/shape/globality invariants",
            local and shaped and escaped,
            f"tile locality {local}, shape {shaped}, probe escaped {escaped}")


def test_criterion_10_ratio_sweep_is_byte_deterministic(tmp_path):
    """Two identical sweep-ratio invocations write byte-identical CSVs."""
    outs = []
    for run in range(2):
        out = tmp_path / f"sweep_{run}.csv"
        code = main([
            "sweep-ratio", "--synthetic", "128,32,gaussian",
            "--ratios", "0.03,0.10", "--seeds", "3",
            "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        outs.append(out.read_bytes())
    verdict(10, "ratio sweep byte-determinism",
            outs[0] == outs[1],
            f"{len(outs[0])} bytes vs {len(outs[1])} bytes, "
            f"identical={outs[0] == outs[1]}")
