"""Command-line harness: cluster, equivalence, sweep-ratio, bench, compare.

Every command is deterministic for a fixed (config, seed): token
generation, subsampling, and weight draws all run off seeded PCG64
streams and the numeric kernels use fixed reduction orders, so repeated
runs produce byte-identical CSV output. The one exception is wall-clock
columns, which the sweep command therefore zeroes unless timing is
explicitly switched on.

Exit codes: 0 success / check passed, 1 check failed, 2 bad usage or
bad input data.
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from .attention import (
    AttentionSpec,
    estimate_flops,
    make_projection_weights,
    saa_attention,
    vanilla_attention,
)
from .dta import DtaConfig, dta_compress, write_assignment_csv, write_centers_csv
from .errors import ConfigError, DegenerateInputError, ShapeError, TokenFormatError
from .oracles import (
    attention_with_compressor,
    compare_methods,
    dpc_compress,
    kmeans_baseline,
    median_time_ns,
    write_reports_csv,
)
from .synthetic import parse_synthetic
from .tokenio import load_tokens, load_tokens_csv
from .tokens import FeatureMapShape, frobenius_error

EQUIVALENCE_SIZES = (16, 64, 256)
EQUIVALENCE_INSTANCES = 5
EQUIVALENCE_BOUND = 1e-9
DEFAULT_RATIOS = "0.01,0.03,0.10,0.20"
DEFAULT_BENCH_SIZES = "1024,2048,4096"


def load_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment; keys match the
    long flag names with '-' or '_'."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
            key, value = line.split("=", 1)
            out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


class Resolver:
    """Flag > config file > default, with typed parsing of file values."""

    def __init__(self, ns, filecfg):
        self.ns = ns
        self.filecfg = filecfg

    def get(self, key, cast, default):
        flag = getattr(self.ns, key, None)
        if flag is not None:
            return flag
        if key in self.filecfg:
            raw = self.filecfg[key]
            try:
                return cast(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key}: bad value {raw!r}") from exc
        return default


def _onoff(value: str) -> bool:
    if value in ("on", "off"):
        return value == "on"
    raise ConfigError(f"expected on or off, got {value!r}")


def _float_list(text: str):
    items = [p for p in (s.strip() for s in text.split(",")) if p]
    if not items:
        raise ConfigError("empty list")
    return [float(p) for p in items]


def _int_list(text: str):
    return [int(v) for v in _float_list(text)]


def make_dta_config(r: Resolver, keep_default: float = 0.03, fnr_default: bool = True) -> DtaConfig:
    fnr = r.get("fnr", _onoff, None)
    return DtaConfig(
        keep_ratio=r.get("keep_ratio", float, keep_default),
        beta=r.get("beta", int, 4),
        neighbor_count=r.get("m", int, 5),
        temperature=r.get("tau", float, 1.0),
        eps=r.get("eps", float, 1e-6),
        fnr_enabled=fnr_default if fnr is None else fnr,
        seed=r.get("seed", int, 0),
    )


def make_attention_spec(r: Resolver, head_dim: int) -> AttentionSpec:
    rc = r.get("rc", float, None)
    if rc is None:
        return AttentionSpec(head_dim)
    return AttentionSpec(head_dim, channel_scale=rc, use_channel_scaling=True)


def load_input_tokens(r: Resolver, default_synthetic: str | None = None):
    """Exactly one token source; returns (matrix, source description)."""
    inp = r.get("input", str, None)
    syn = r.get("synthetic", str, None)
    if inp is not None and syn is not None:
        raise ConfigError("give exactly one of --input and --synthetic")
    if inp is not None:
        if inp.endswith(".csv"):
            return load_tokens_csv(inp), inp
        return load_tokens(inp), inp
    if syn is None:
        if default_synthetic is None:
            raise ConfigError("give exactly one of --input and --synthetic")
        syn = default_synthetic
    spec = parse_synthetic(syn)
    seed = r.get("seed", int, 0)
    return spec.make(seed), f"synthetic {syn}"


def cmd_cluster(ns, filecfg) -> int:
    r = Resolver(ns, filecfg)
    tokens, source = load_input_tokens(r)
    cfg = make_dta_config(r)
    k = r.get("k", int, None)
    result = dta_compress(tokens, cfg, k)
    n, c = tokens.shape
    height = r.get("height", int, None)
    width = r.get("width", int, None)
    shape = None
    if height is not None and width is not None:
        shape = FeatureMapShape(height, width, c)
        shape.check(tokens)
    prefix = r.get("out", str, "clusters")
    assign_path = f"{prefix}_assignments.csv"
    centers_path = f"{prefix}_centers.csv"
    write_assignment_csv(assign_path, result)
    write_centers_csv(centers_path, result, shape)
    print(f"{source}: N={n} C={c} K={result.num_clusters}")
    print(f"wrote {assign_path} and {centers_path}")
    return 0


def cmd_equivalence(ns, filecfg) -> int:
    r = Resolver(ns, filecfg)
    seed = r.get("seed", int, 0)
    cfg = make_dta_config(r, keep_default=1.0, fnr_default=False)
    if cfg.keep_ratio != 1.0:
        raise ConfigError("equivalence requires keep_ratio 1.0")
    c = 32
    spec = make_attention_spec(r, c)
    worst = 0.0
    for n in EQUIVALENCE_SIZES:
        worst_n = 0.0
        for i in range(EQUIVALENCE_INSTANCES):
            inst_seed = seed + 1000 * i + n
            rng = np.random.Generator(np.random.PCG64(inst_seed))
            tokens = rng.standard_normal((n, c))
            scaled = spec.scaled_dim if spec.use_channel_scaling else None
            w = make_projection_weights(c, c, inst_seed, scaled_dim=scaled)
            vsa = vanilla_attention(tokens, w)
            saa = saa_attention(tokens, w, spec, replace(cfg, seed=inst_seed))
            rel = frobenius_error(saa, vsa) / np.linalg.norm(vsa)
            worst_n = max(worst_n, rel)
        print(f"N={n}: max relative frobenius error {worst_n:.3e}")
        worst = max(worst, worst_n)
    ok = worst <= EQUIVALENCE_BOUND
    print(f"max relative frobenius error: {worst:.3e} "
          f"({'PASS' if ok else 'FAIL'}, bound {EQUIVALENCE_BOUND:.0e})")
    return 0 if ok else 1


def cmd_sweep_ratio(ns, filecfg) -> int:
    r = Resolver(ns, filecfg)
    ratios = r.get("ratios", _float_list, None)
    if ratios is None:
        ratios = _float_list(DEFAULT_RATIOS)
    if not ratios:
        raise ConfigError("ratio list is empty")
    seeds = r.get("seeds", int, 20)
    if seeds < 1:
        raise ConfigError(f"need >= 1 seeds, got {seeds}")
    base_seed = r.get("seed", int, 0)
    timing = r.get("timing", _onoff, False)
    reps = r.get("reps", int, 5)
    out_path = r.get("out", str, "sweep.csv")
    base_cfg = make_dta_config(r)
    inp = r.get("input", str, None)
    fixed = None
    if inp is not None:
        fixed = load_tokens_csv(inp) if inp.endswith(".csv") else load_tokens(inp)
        n, c = fixed.shape
    else:
        syn = r.get("synthetic", str, "256,64,gaussian")
        spec_syn = parse_synthetic(syn)
        n, c = spec_syn.n, spec_syn.c
    spec = make_attention_spec(r, c)
    scaled = spec.scaled_dim if spec.use_channel_scaling else None
    rows = {}
    for i in range(seeds):
        seed_i = base_seed + i
        tokens = fixed if fixed is not None else spec_syn.make(seed_i)
        w = make_projection_weights(c, c, seed_i, scaled_dim=scaled)
        vsa = vanilla_attention(tokens, w)
        for ratio in ratios:
            cfg = replace(base_cfg, keep_ratio=ratio, seed=seed_i)
            out = saa_attention(tokens, w, spec, cfg)
            err = frobenius_error(out, vsa)
            runtime = 0
            if timing:
                runtime = median_time_ns(lambda: saa_attention(tokens, w, spec, cfg), reps)
            k = cfg.num_centers(n)
            fl_saa = estimate_flops(n, k, c, c, "saa").total
            fl_van = estimate_flops(n, k, c, c, "vanilla").total
            rows[(ratio, seed_i)] = (err, runtime, fl_saa, fl_van)
    with open(out_path, "w", encoding="ascii") as fh:
        fh.write("keep_ratio,seed,frobenius_error,runtime_ns,flops_saa,flops_vanilla\n")
        for ratio in ratios:
            for i in range(seeds):
                seed_i = base_seed + i
                err, runtime, fl_saa, fl_van = rows[(ratio, seed_i)]
                fh.write(f"{ratio!r},{seed_i},{err!r},{runtime},{fl_saa},{fl_van}\n")
    for ratio in ratios:
        mean = sum(rows[(ratio, base_seed + i)][0] for i in range(seeds)) / seeds
        print(f"keep_ratio={ratio}: mean frobenius error {mean:.6f}")
    print(f"wrote {out_path}")
    return 0


def cmd_bench(ns, filecfg) -> int:
    r = Resolver(ns, filecfg)
    sizes = r.get("sizes", _int_list, None)
    if sizes is None:
        sizes = _int_list(DEFAULT_BENCH_SIZES)
    k = r.get("k", int, 64)
    seed = r.get("seed", int, 0)
    reps = r.get("reps", int, 5)
    out_path = r.get("out", str, "bench.csv")
    base_cfg = make_dta_config(r)
    c = 64
    spec = make_attention_spec(r, c)
    scaled = spec.scaled_dim if spec.use_channel_scaling else None
    records = []
    medians = {}
    for n in sizes:
        if k > n:
            raise ConfigError(f"fixed k {k} exceeds n {n}")
        rng = np.random.Generator(np.random.PCG64(seed + n))
        tokens = rng.standard_normal((n, c))
        w = make_projection_weights(c, c, seed + n, scaled_dim=scaled)
        cfg = replace(base_cfg, keep_ratio=k / n, seed=seed + n)
        vsa = vanilla_attention(tokens, w)
        runs = (
            ("dta", lambda: saa_attention(tokens, w, spec, cfg)),
            ("kmeans", lambda: attention_with_compressor(
                tokens, w, cfg, _kmeans_adapter, k)),
            ("dpc_knn", lambda: attention_with_compressor(
                tokens, w, cfg, dpc_compress, k)),
        )
        for name, fn in runs:
            out = fn()
            err = frobenius_error(out, vsa)
            wall = median_time_ns(fn, reps)
            medians[(name, n)] = wall
            records.append((name, n, err, wall))
            print(f"{name} N={n}: median {wall / 1e6:.2f} ms, error {err:.4f}")
    with open(out_path, "w", encoding="ascii") as fh:
        fh.write("method,N,K,C,seed,wall_clock_ns,frobenius_error\n")
        for name, n, err, wall in records:
            fh.write(f"{name},{n},{k},{c},{seed},{wall},{err!r}\n")
    lo, hi = min(sizes), max(sizes)
    if lo != hi:
        for name in ("dta", "dpc_knn"):
            ratio = medians[(name, hi)] / medians[(name, lo)]
            print(f"{name} scaling N={hi}/N={lo}: {ratio:.2f}x")
    print(f"wrote {out_path}")
    return 0


def _kmeans_adapter(keys, cfg, k):
    return kmeans_baseline(keys, k, iters=20, seed=cfg.seed, cfg=cfg)


def cmd_compare(ns, filecfg) -> int:
    r = Resolver(ns, filecfg)
    tokens, source = load_input_tokens(r, default_synthetic="1024,64,gaussian")
    n, c = tokens.shape
    cfg = make_dta_config(r)
    k = r.get("k", int, None)
    kk = cfg.num_centers(n) if k is None else k
    methods_text = r.get("methods", str, "dta,kmeans,dpc_knn")
    methods = [m.strip() for m in methods_text.split(",") if m.strip()]
    if not methods:
        raise ConfigError("method list is empty")
    reps = r.get("reps", int, 5)
    window = r.get("window", int, 8)
    seed = r.get("seed", int, 0)
    w = make_projection_weights(c, c, seed)
    reports = compare_methods(tokens, w, cfg, methods, reps=reps, k=kk, window=window)
    print(f"{source}: N={n} C={c} K={kk}")
    for rep in reports:
        print(f"{rep.method}: median {rep.wall_clock / 1e6:.2f} ms, "
              f"error {rep.frobenius_error_vs_vanilla:.4f}")
    out_path = r.get("out", str, None)
    if out_path is not None:
        write_reports_csv(out_path, reports, n, kk, c, seed)
        print(f"wrote {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value defaults file")
    common.add_argument("--input", help="token file (binary, or .csv)")
    common.add_argument("--synthetic", metavar="N,C,DIST",
                        help="generate tokens: DIST is gaussian or clustered(G,SPREAD)")
    common.add_argument("--seed", type=int)
    common.add_argument("--keep-ratio", dest="keep_ratio", type=float)
    common.add_argument("--beta", type=int)
    common.add_argument("--tau", type=float)
    common.add_argument("--m", type=int, help="density neighbor count")
    common.add_argument("--fnr", type=_onoff, metavar="on|off")
    common.add_argument("--rc", type=float, help="enable channel scaling with this factor")
    common.add_argument("--reps", type=int, help="timing repetitions")
    common.add_argument("--out", help="output path (or prefix for cluster)")

    parser = argparse.ArgumentParser(
        prog="sagatt",
        description="Token-aggregation attention harness: clustering, "
                    "equivalence checks, ratio sweeps, and benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", parents=[common],
                       help="compress tokens and export the clustering")
    p.add_argument("--k", type=int, help="override the center count")
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("equivalence", parents=[common],
                       help="check zero-compression output equals full attention")
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("sweep-ratio", parents=[common],
                       help="error and FLOPs across keeping ratios")
    p.add_argument("--ratios", type=_float_list, metavar="R1,R2,...")
    p.add_argument("--seeds", type=int, help="number of seeds per ratio")
    p.add_argument("--timing", type=_onoff, metavar="on|off",
                   help="fill runtime_ns (default off: column is 0 for "
                        "byte-reproducible output)")
    p.set_defaults(func=cmd_sweep_ratio)

    p = sub.add_parser("bench", parents=[common],
                       help="wall-clock scaling across token counts")
    p.add_argument("--sizes", type=_int_list, metavar="N1,N2,...")
    p.add_argument("--k", type=int, help="fixed center count")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare", parents=[common],
                       help="time compression methods and score their outputs")
    p.add_argument("--methods", help="comma list from dta,dpc_knn,kmeans,vanilla,window")
    p.add_argument("--k", type=int, help="override the center count")
    p.add_argument("--window", type=int, help="tile side for the window method")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        filecfg = load_config_file(ns.config) if ns.config else {}
        return ns.func(ns, filecfg)
    except (ConfigError, TokenFormatError, ShapeError, DegenerateInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
