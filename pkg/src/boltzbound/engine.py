"""Lower bounds on log Z for Boltzmann machines, and quantities derived from them.

``Z >= Z_ref * sum_n A[K; n] <dH^n>`` for any factorized reference
distribution; the reference is the mean-field solution and the polynomial
parameters are optimized in closed form from the moments of ``dH``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import poly_bounds
from .evaluator import delta_h_moments_graph
from .graphs import MAX_ORDER as MAX_GRAPH_ORDER
from .model import (
    MAX_ENUM_N,
    MeanFieldState,
    MomentVector,
    brute_force_delta_h_moments,
    log_z_tilde,
    solve_mean_field,
)

PATHS = ("graph", "brute-force")


class UndefinedMetricError(ZeroDivisionError):
    pass


class MeanFieldConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundResult:
    order_K: int
    log_bound: float
    mus: tuple
    moments_used: MomentVector
    evaluator_path: str
    mean_field: MeanFieldState
    log_z_tilde: float = 0.0
    inner_sum: float = 1.0
    # largest |A_n <dH^n>| relative to the sum; large values mean the
    # reference distribution is not flat enough for this order
    dominance: float = 1.0
    valid: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.mean_field.converged


def _normalize_path(path):
    if path in ("brute", "brute-force", "brute_force"):
        return "brute-force"
    if path == "graph":
        return "graph"
    raise ValueError(f"unknown evaluator path {path!r}; expected one of {PATHS}")


def _check_K(K, path):
    poly_bounds._check_order(K)
    if path == "graph" and K - 1 > MAX_GRAPH_ORDER:
        raise ValueError(
            f"K={K} needs moments up to order {K - 1}; graph catalogs stop at {MAX_GRAPH_ORDER}, "
            "use the brute-force path"
        )


def compute_moments(bm, state, n_max, path="graph", catalogs=None):
    path = _normalize_path(path)
    if path == "graph":
        if not state.converged:
            raise MeanFieldConvergenceError(
                f"graph path needs a mean-field solution (residual {state.residual:.3g})"
            )
        return delta_h_moments_graph(bm, state, catalogs=catalogs, n_max=max(n_max, 1))
    return brute_force_delta_h_moments(bm, state, max(n_max, 1))


def bound_from_moments(moments, K, log_zt=0.0, state=None, path="brute-force"):
    """Optimize the order-``K`` polynomial for ``moments`` and assemble the bound."""
    m = np.asarray(moments.values, dtype=float)
    mus = poly_bounds.optimal_mus(m, K)
    poly = poly_bounds.build_coefficients(mus, K)
    terms = poly.coeffs * m[:K]
    inner = math.fsum(terms)
    if inner > 0 and math.isfinite(inner):
        log_b = log_zt + math.log(inner)
        valid = True
        dominance = float(np.max(np.abs(terms)) / inner)
    else:
        log_b = -math.inf
        valid = False
        dominance = math.inf
    return BoundResult(
        order_K=K,
        log_bound=log_b,
        mus=tuple(mus),
        moments_used=moments,
        evaluator_path=path,
        mean_field=state,
        log_z_tilde=log_zt,
        inner_sum=inner,
        dominance=dominance,
        valid=valid,
        diagnostics={} if valid else {"raw_inner_sum": inner, "terms": terms.tolist()},
    )


def bounds_for_orders(bm, orders, path="graph", mf_start="standard", state=None, catalogs=None):
    """Bounds for several orders sharing one mean-field state and moment vector."""
    path = _normalize_path(path)
    orders = sorted(set(int(K) for K in orders))
    for K in orders:
        _check_K(K, path)
    if state is None:
        state = solve_mean_field(bm, init=mf_start)
    if path == "graph" and not state.converged and bm.N <= MAX_ENUM_N:
        # a non-solution is still a valid reference, but only the general form applies
        path = "brute-force"
    moments = compute_moments(bm, state, max(orders) - 1, path, catalogs)
    lzt = log_z_tilde(state, bm)
    return {K: bound_from_moments(moments, K, lzt, state, path) for K in orders}


def lower_bound_log_z(bm, K, path="graph", mf_start="standard", state=None, catalogs=None):
    """Optimized order-``K`` lower bound on ``log Z``."""
    return bounds_for_orders(bm, [K], path, mf_start, state, catalogs)[K]


def relative_error(log_bound, log_z):
    """``1 - log_bound / log_z``."""
    if log_z == 0:
        raise UndefinedMetricError("relative error is undefined for log Z = 0")
    return 1.0 - log_bound / log_z


def approx_correlations(bm, i, j, orders, path="graph", mf_start="standard", eps=None):
    """``<s_i s_j>`` estimates from central differences of ``log B_K`` in ``w_ij``.

    The mean field is re-solved at each perturbed weight.  Returns a dict
    ``K -> (estimate, ok)`` where ``ok`` is False if a perturbed solve failed.
    """
    if i == j:
        raise ValueError("correlation estimate needs i != j")
    w0 = float(bm.weights[i, j])
    if eps is None:
        eps = 1e-5 * max(1.0, abs(w0))
    init = mf_start
    if mf_start == "standard":
        init = solve_mean_field(bm).h
    out = {}
    lo = bounds_for_orders(bm.with_weight(i, j, w0 - eps), orders, path, init, catalogs=None)
    hi = bounds_for_orders(bm.with_weight(i, j, w0 + eps), orders, path, init, catalogs=None)
    for K in orders:
        ok = lo[K].converged and hi[K].converged and lo[K].valid and hi[K].valid
        out[K] = ((hi[K].log_bound - lo[K].log_bound) / (2 * eps), ok)
    return out


def approx_correlation(bm, i, j, K, path="graph", mf_start="standard", eps=None):
    return approx_correlations(bm, i, j, [K], path, mf_start, eps)[K][0]
