"""Command-line driver: ``boltzbound {catalog, bound, sweep}``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import graphs
from .engine import MeanFieldConvergenceError, bounds_for_orders, relative_error
from .evaluator import MissingCatalogError
from .model import MAX_ENUM_N, exact_log_partition, load_network
from .poly_bounds import InvalidOrderError
from .sweep import SweepConfig, SweepConfigError, aggregate, aggregate_to_csv, rows_to_csv, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parse_orders(text):
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def cmd_catalog(args, out=None):
    out = out or sys.stdout
    try:
        orders = _parse_orders(args.order)
    except ValueError:
        print(f"error: cannot parse order range {args.order!r}", file=sys.stderr)
        return EXIT_CONFIG
    bad = [n for n in orders if not 2 <= n <= graphs.MAX_ORDER]
    if bad:
        print(
            f"error: unsupported order {bad[0]}; catalogs cover 2..{graphs.MAX_ORDER}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    outdir = Path(args.out) if args.out else graphs.catalog_path(2).parent
    outdir.mkdir(parents=True, exist_ok=True)
    print(f"{'order':>5} {'# partitions':>24} {'pi':>3}  complexity", file=out)
    for n in orders:
        cat = graphs.enumerate_partitions(n)
        graphs.save_catalog(cat, outdir / graphs.catalog_path(n).name)
        hist = cat.clique_histogram()
        pi = cat.pi()
        brackets = "+".join(str(hist[k]) for k in sorted(hist))
        lead = hist[pi]
        cost = f"O(N^{pi})" if lead == 1 else f"O({lead} N^{pi})"
        print(f"{n:>5} {len(cat):>8} ({brackets}){'':<{max(0, 13 - len(brackets))}} {pi:>3}  {cost}", file=out)
    return EXIT_OK


def _load_catalogs(directory, n_max):
    if directory is None:
        return None
    cats = {}
    for n in range(2, n_max + 1):
        p = Path(directory) / graphs.catalog_path(n).name
        if not p.exists():
            raise MissingCatalogError(n)
        cats[n] = graphs.load_catalog(p, expected_order=n)
    return cats


def cmd_bound(args, out=None):
    out = out or sys.stdout
    try:
        bm = load_network(args.network)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot read network file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    K = args.order
    try:
        catalogs = _load_catalogs(args.catalog_dir, K - 1) if args.path == "graph" else None
        res = bounds_for_orders(bm, [K], args.path, args.mf_start, catalogs=catalogs)[K]
    except MissingCatalogError as exc:
        print(f"error: missing partition catalog for order {exc.order}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidOrderError, ValueError, graphs.CatalogParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MeanFieldConvergenceError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report = {
        "N": bm.N,
        "K": K,
        "path": res.evaluator_path,
        "mf_converged": bool(res.converged),
        "log_z_tilde": res.log_z_tilde,
        "moments": res.moments_used.values.tolist(),
        "mus": list(res.mus),
        "log_bound": res.log_bound,
    }
    if bm.N <= MAX_ENUM_N and not args.no_exact:
        lz = exact_log_partition(bm)
        report["log_z_exact"] = lz
        report["rel_error"] = relative_error(res.log_bound, lz) if lz != 0 else None
    if args.json:
        print(json.dumps(report, indent=1), file=out)
    else:
        for k, v in report.items():
            if isinstance(v, list):
                v = " ".join(f"{x:.10g}" for x in v)
            print(f"{k:>13}: {v}", file=out)
    if not res.valid or not math.isfinite(res.log_bound):
        print("numeric failure: bound sum is not positive", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_sweep(args, out=None):
    out = out or sys.stdout
    try:
        cfg = SweepConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
        if args.seed is not None:
            cfg.seed = args.seed
        if args.path is not None:
            cfg.evaluator_path = args.path
        if args.mf_start is not None:
            cfg.mf_start = [args.mf_start]
        if args.networks is not None:
            cfg.networks_per_point = args.networks
        cfg.__post_init__()
    except (OSError, SweepConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = run_sweep(cfg, workers=args.workers)
    target = Path(args.out)
    target.write_text(rows_to_csv(rows, cfg), encoding="utf-8")
    agg_path = target.with_name(target.stem + "_aggregate.csv")
    agg = aggregate(rows, cfg.group_size)
    agg_path.write_text(aggregate_to_csv(agg, cfg), encoding="utf-8")
    failed = sum(1 for r in rows if r.get("error"))
    print(f"wrote {len(rows)} rows to {target} ({failed} failed), aggregate in {agg_path}", file=out)
    for a in agg:
        print(
            f"sigma_w={a['sigma_w']:<5} K={a['K']:<3} {a['mf_start']:<8} "
            f"E={a['mean_rel_error']:.3e} corr_mse={a['mean_corr_sq_error']:.3e}",
            file=out,
        )
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="boltzbound", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="enumerate partition graphs and write catalog files")
    c.add_argument("--order", default="2-9", help="order or range, e.g. 9, 2-9, 3,5")
    c.add_argument("--out", help="output directory (default: the packaged data directory)")
    c.set_defaults(func=cmd_catalog)

    b = sub.add_parser("bound", help="lower bound on log Z for one network file")
    b.add_argument("network", help="network JSON file")
    b.add_argument("--order", type=int, default=10, help="even bound order K")
    b.add_argument("--path", choices=["graph", "brute"], default="graph")
    b.add_argument("--mf-start", choices=["standard", "zero"], default="standard")
    b.add_argument("--catalog-dir", help="directory with partition catalogs")
    b.add_argument("--no-exact", action="store_true", help="skip exact enumeration")
    b.add_argument("--json", action="store_true", help="print the report as JSON")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("sweep", help="ensemble sweep over random SK networks")
    s.add_argument("config", help="sweep config JSON")
    s.add_argument("--out", default="sweep.csv")
    s.add_argument("--seed", type=int)
    s.add_argument("--path", choices=["graph", "brute"])
    s.add_argument("--mf-start", choices=["standard", "zero"])
    s.add_argument("--networks", type=int, help="override networks_per_point")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
