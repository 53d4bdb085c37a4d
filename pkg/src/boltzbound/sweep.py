"""Ensemble sweeps over random SK networks: bound quality and correlations."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .engine import approx_correlations, bounds_for_orders, relative_error
from .model import RNG_NAME, exact_correlation, exact_log_partition, is_attractor, sk_random

COLUMNS = [
    "seed",
    "sigma_w",
    "network",
    "K",
    "log_z_exact",
    "log_bound",
    "rel_error",
    "corr_exact_12",
    "corr_approx_12",
    "mf_start",
    "converged",
    "mf_attractor",
    "error",
]


class SweepConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    N: int = 14
    sigma_theta: float = 0.2
    sigma_w_grid: list = field(default_factory=lambda: [0.2, 0.5, 1.0, 1.5, 2.0])
    orders: list = field(default_factory=lambda: [2, 4, 6, 8, 10])
    networks_per_point: int = 200
    seed: int = 0
    mf_start: list = field(default_factory=lambda: ["standard"])
    evaluator_path: str = "brute-force"
    group_size: int = 20
    correlations: bool = True

    def __post_init__(self):
        if isinstance(self.mf_start, str):
            self.mf_start = [self.mf_start]
        self.sigma_w_grid = [float(s) for s in self.sigma_w_grid]
        self.orders = [int(K) for K in self.orders]
        if not self.sigma_w_grid:
            raise SweepConfigError("sigma_w_grid is empty")
        if any(s < 0 for s in self.sigma_w_grid) or self.sigma_theta < 0:
            raise SweepConfigError("standard deviations must be non-negative")
        if not self.orders or any(K < 2 or K % 2 for K in self.orders):
            raise SweepConfigError(f"orders must be even integers >= 2, got {self.orders}")
        if self.N < 2:
            raise SweepConfigError("N must be at least 2 (correlations use units 1 and 2)")
        if self.networks_per_point < 1 or self.group_size < 1:
            raise SweepConfigError("networks_per_point and group_size must be positive")
        bad = set(self.mf_start) - {"standard", "zero"}
        if bad:
            raise SweepConfigError(f"unknown mf_start {sorted(bad)}")
        if self.evaluator_path not in ("graph", "brute", "brute-force"):
            raise SweepConfigError(f"unknown evaluator_path {self.evaluator_path!r}")

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise SweepConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise SweepConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SweepConfigError(f"line {exc.lineno}: {exc.msg}") from None
        if not isinstance(d, dict):
            raise SweepConfigError("config must be a JSON object")
        return cls.from_dict(d)


def network_seed(base_seed, point, index):
    return int(np.random.SeedSequence([base_seed, point, index]).generate_state(1)[0])


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _run_network(args):
    cfg, point, index = args
    sw = cfg.sigma_w_grid[point]
    seed = network_seed(cfg.seed, point, index)
    rows = []
    base = {"seed": seed, "sigma_w": sw, "network": index}
    try:
        bm = sk_random(cfg.N, sw, cfg.sigma_theta, seed)
        log_z = exact_log_partition(bm)
        corr = exact_correlation(bm, 0, 1) if cfg.correlations else math.nan
    except Exception as exc:  # recorded per row, the sweep continues
        for start in cfg.mf_start:
            for K in cfg.orders:
                rows.append({**base, "K": K, "mf_start": start, "error": repr(exc)})
        return rows
    for start in cfg.mf_start:
        try:
            res = bounds_for_orders(bm, cfg.orders, cfg.evaluator_path, start)
            attractor = is_attractor(bm, res[cfg.orders[0]].mean_field.h)
            approx = (
                approx_correlations(bm, 0, 1, cfg.orders, cfg.evaluator_path, start)
                if cfg.correlations
                else {}
            )
        except Exception as exc:
            for K in cfg.orders:
                rows.append({**base, "K": K, "mf_start": start, "log_z_exact": log_z, "error": repr(exc)})
            continue
        for K in cfg.orders:
            r = res[K]
            est, ok = approx.get(K, (math.nan, True))
            rows.append(
                {
                    **base,
                    "K": K,
                    "log_z_exact": log_z,
                    "log_bound": r.log_bound,
                    "rel_error": relative_error(r.log_bound, log_z),
                    "corr_exact_12": corr,
                    "corr_approx_12": est,
                    "mf_start": start,
                    "converged": bool(r.converged and ok),
                    "mf_attractor": attractor,
                    "error": "",
                }
            )
    return rows


def run_sweep(cfg, workers=1):
    """All rows of the sweep, in deterministic config order."""
    jobs = [
        (cfg, p, i) for p in range(len(cfg.sigma_w_grid)) for i in range(cfg.networks_per_point)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_network, jobs, chunksize=4))
    else:
        chunks = [_run_network(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def _metadata(cfg):
    return {"config": asdict(cfg), "rng": RNG_NAME, "columns": COLUMNS}


def rows_to_csv(rows, cfg):
    buf = io.StringIO()
    buf.write(f"# boltzbound sweep {json.dumps(_metadata(cfg), sort_keys=True)}\n")
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _fmt(row.get(c, "nan")) for c in COLUMNS})
    return buf.getvalue()


def aggregate(rows, group_size):
    """Mean relative error and correlation MSE per (sigma_w, K, mf_start).

    Error bars follow the grouped construction: networks are split into
    consecutive groups of ``group_size``, each group gives one mean, and the
    reported spread is the standard deviation of those group means.
    """
    buckets = {}
    for r in rows:
        if r.get("error"):
            continue
        key = (r["sigma_w"], r["K"], r["mf_start"])
        buckets.setdefault(key, []).append(r)
    out = []
    for (sw, K, start), rs in sorted(buckets.items(), key=lambda kv: (kv[0][0], kv[0][2], kv[0][1])):
        rs.sort(key=lambda r: r["network"])
        e = np.array([r["rel_error"] for r in rs], dtype=float)
        se = np.array([(r["corr_approx_12"] - r["corr_exact_12"]) ** 2 for r in rs], dtype=float)
        n_groups = max(1, len(rs) // group_size)
        usable = n_groups * group_size if len(rs) >= group_size else len(rs)
        ge = e[:usable].reshape(n_groups, -1).mean(axis=1)
        gs = se[:usable].reshape(n_groups, -1).mean(axis=1)
        out.append(
            {
                "sigma_w": sw,
                "K": K,
                "mf_start": start,
                "networks": len(rs),
                "mean_rel_error": float(e.mean()),
                "sd_of_means_rel_error": float(ge.std(ddof=1)) if n_groups > 1 else math.nan,
                "mean_corr_sq_error": float(se.mean()),
                "sd_of_means_corr_sq_error": float(gs.std(ddof=1)) if n_groups > 1 else math.nan,
            }
        )
    return out


AGG_COLUMNS = [
    "sigma_w",
    "K",
    "mf_start",
    "networks",
    "mean_rel_error",
    "sd_of_means_rel_error",
    "mean_corr_sq_error",
    "sd_of_means_corr_sq_error",
]


def aggregate_to_csv(agg, cfg):
    buf = io.StringIO()
    buf.write(f"# boltzbound sweep aggregate {json.dumps(_metadata(cfg), sort_keys=True)}\n")
    writer = csv.DictWriter(buf, fieldnames=AGG_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in agg:
        writer.writerow({c: _fmt(row[c]) for c in AGG_COLUMNS})
    return buf.getvalue()
