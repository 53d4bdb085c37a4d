"""Boltzmann machines on +/-1 spins: instances, mean field and exact oracles.

The energy is ``H(s) = 1/2 sum_ij w_ij s_i s_j + sum_i theta_i s_i`` and the
distribution is ``p(s) ~ exp(H(s))``.  The factorized reference distribution
has energy ``sum_i h_i s_i + C`` with ``m_i = tanh(h_i)``; the constant ``C``
is chosen so that ``<H - H_ref> = 0`` under the reference distribution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

MAX_ENUM_N = 24
RNG_NAME = "numpy.random.PCG64"


class EnumerationLimitError(ValueError):
    pass


class InvalidMagnetizationError(ValueError):
    pass


@dataclass(frozen=True)
class BoltzmannMachine:
    weights: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        th = np.array(self.thresholds, dtype=float).reshape(-1)
        if w.shape != (th.size, th.size):
            raise ValueError(f"weights shape {w.shape} does not match {th.size} thresholds")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(th))):
            raise ValueError("weights and thresholds must be finite")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("weights must have a zero diagonal")
        w.setflags(write=False)
        th.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "thresholds", th)

    @property
    def N(self):
        return self.thresholds.size

    def energy(self, states):
        """``H(s)`` for a (..., N) array of +/-1 states."""
        s = np.asarray(states, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", s, self.weights, s) + s @ self.thresholds

    def with_weight(self, i, j, value):
        w = self.weights.copy()
        w[i, j] = w[j, i] = value
        return BoltzmannMachine(w, self.thresholds)

    def upper_triangle(self):
        return self.weights[np.triu_indices(self.N, 1)]


@dataclass(frozen=True)
class MeanFieldState:
    h: np.ndarray
    m: np.ndarray
    residual: float
    converged: bool
    iterations: int = 0
    moments_table: np.ndarray = field(default=None, repr=False)

    def with_moments(self, c_max):
        table = np.array([corrected_moments(mi, c_max) for mi in self.m]).T
        # row c holds M'_c for every unit; row 0 is unused
        table = np.vstack([np.zeros(self.m.size), table])
        return MeanFieldState(self.h, self.m, self.residual, self.converged, self.iterations, table)


@dataclass(frozen=True)
class MomentVector:
    """Raw moments ``<dH^n>``, ``n = 0 .. n_max``, under the reference distribution."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_max(self):
        return self.values.size - 1

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return self.values.size


# ---------------------------------------------------------------------------
# instances


def sk_random(N, sigma_w, sigma_theta, seed):
    """SK-style instance: theta ~ N(0, sigma_theta^2), w_ij ~ N(0, sigma_w^2 / N)."""
    if N < 1 or sigma_w < 0 or sigma_theta < 0:
        raise ValueError("need N >= 1 and non-negative standard deviations")
    rng = np.random.default_rng(seed)
    theta = rng.normal(0.0, sigma_theta, N)
    iu = np.triu_indices(N, 1)
    w = np.zeros((N, N))
    w[iu] = rng.normal(0.0, sigma_w / math.sqrt(N), iu[0].size)
    w = w + w.T
    return BoltzmannMachine(w, theta)


def network_to_dict(bm):
    return {
        "N": bm.N,
        "theta": bm.thresholds.tolist(),
        "weights_upper_triangle": bm.upper_triangle().tolist(),
    }


def network_from_dict(d):
    N = int(d["N"])
    theta = np.asarray(d["theta"], dtype=float)
    upper = np.asarray(d["weights_upper_triangle"], dtype=float)
    if theta.shape != (N,) or upper.shape != (N * (N - 1) // 2,):
        raise ValueError("network file has inconsistent sizes")
    w = np.zeros((N, N))
    w[np.triu_indices(N, 1)] = upper
    return BoltzmannMachine(w + w.T, theta)


def save_network(bm, path):
    Path(path).write_text(json.dumps(network_to_dict(bm), indent=1) + "\n", encoding="utf-8")


def load_network(path):
    return network_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# mean field


def mean_field_residual(bm, h):
    return float(np.max(np.abs(h - bm.thresholds - bm.weights @ np.tanh(h)), initial=0.0))


def _leading_direction(w, scale=0.1):
    if w.size == 0 or not np.any(w):
        return np.zeros(w.shape[0])
    vals, vecs = np.linalg.eigh(w)
    v = vecs[:, -1]
    # fix the sign so the start is deterministic
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return scale * v


def solve_mean_field(bm, init="standard", tol=1e-12, max_iter=10_000, damping=0.5):
    """Damped fixed-point iteration ``h <- (1-d) h + d (theta + W tanh h)``.

    ``init`` is a vector, ``"standard"`` or ``"zero"``.  The standard start is
    ``h = theta``; with all thresholds zero that point is itself a fixed point,
    so the start is nudged along the leading eigenvector of ``W`` instead.  The
    zero start is returned verbatim when all thresholds vanish, because
    ``h = 0`` is then an exact (possibly unstable) fixed point.
    Non-convergence is reported through ``converged``, not raised.
    """
    if tol <= 0 or not 0 <= damping < 1:
        raise ValueError("need tol > 0 and damping in [0, 1)")
    theta = bm.thresholds
    if isinstance(init, str):
        if init == "standard":
            h = theta.copy() if np.any(theta) else _leading_direction(bm.weights)
        elif init == "zero":
            h = np.zeros(bm.N)
            if not np.any(theta):
                return MeanFieldState(h, np.zeros(bm.N), 0.0, True, 0)
        else:
            raise ValueError(f"unknown mean-field start {init!r}")
    else:
        h = np.array(init, dtype=float)
    step = 1.0 - damping
    res = mean_field_residual(bm, h)
    it = 0
    while res > tol and it < max_iter:
        h = damping * h + step * (theta + bm.weights @ np.tanh(h))
        res = mean_field_residual(bm, h)
        it += 1
    if res <= tol:
        h, res = _newton_polish(bm, h, res)
    return MeanFieldState(h, np.tanh(h), res, res <= tol, it)


def _newton_polish(bm, h, res, steps=3):
    # a few Newton steps take a converged solution down to rounding level;
    # the moment expansion assumes the fixed point holds exactly
    eye = np.eye(bm.N)
    for _ in range(steps):
        r = h - bm.thresholds - bm.weights @ np.tanh(h)
        jac = eye - bm.weights * (1.0 - np.tanh(h) ** 2)
        try:
            cand = h - np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            break
        cres = mean_field_residual(bm, cand)
        if not cres < res:
            break
        h, res = cand, cres
    return h, res


def is_attractor(bm, h, damping=0.5):
    """Whether ``h`` is a stable fixed point of the damped iteration.

    The Jacobian of ``theta + W tanh h`` is ``W D`` with ``D = diag(1 - m^2)``;
    it is similar to the symmetric ``D^1/2 W D^1/2``, so its spectrum is real.
    """
    d = np.sqrt(1.0 - np.tanh(np.asarray(h, dtype=float)) ** 2)
    lam = np.linalg.eigvalsh(d[:, None] * bm.weights * d[None, :])
    step = damping + (1.0 - damping) * lam
    return bool(np.all(np.abs(step) < 1.0))


def reference_constant(bm, h):
    """``C`` such that ``<H - h.s - C> = 0`` under the factorized distribution."""
    m = np.tanh(h)
    return float(0.5 * m @ bm.weights @ m + (bm.thresholds - h) @ m)


def log_z_tilde(state, bm):
    h = state.h
    # log(2 cosh h) without overflow
    log2cosh = np.abs(h) + np.log1p(np.exp(-2.0 * np.abs(h)))
    return float(log2cosh.sum() + reference_constant(bm, h))


# ---------------------------------------------------------------------------
# corrected moments


def raw_centered_moments(m, c_max):
    """``M_c = <(s - m)^c>`` for ``p(s = +1) = (1 + m) / 2``, c = 0..c_max."""
    c = np.arange(c_max + 1)
    return 0.5 * (1 + m) * (1 - m) ** c + 0.5 * (1 - m) * (-1 - m) ** c


def corrected_moments(m, c_max):
    """Corrected (connected) moments ``M'_1 .. M'_{c_max}`` of one unit.

    ``M'_c = M_c - sum_{k<c} binom(c-1, k-1) M'_k M_{c-k}``: the moment minus
    all ways of splitting the ``c`` slots into smaller connected blocks.
    """
    if not abs(m) < 1:
        raise InvalidMagnetizationError(f"|m| must be < 1, got {m}")
    if c_max < 1:
        raise ValueError("c_max must be >= 1")
    M = raw_centered_moments(float(m), c_max)
    K = np.zeros(c_max + 1)
    for c in range(1, c_max + 1):
        acc = M[c]
        for k in range(1, c):
            acc -= math.comb(c - 1, k - 1) * K[k] * M[c - k]
        K[c] = acc
    return K[1:]


# ---------------------------------------------------------------------------
# exact enumeration


def _check_enum(N):
    if N > MAX_ENUM_N:
        raise EnumerationLimitError(
            f"N={N} is too large for exact enumeration (limit {MAX_ENUM_N}); use the bounds instead"
        )


def state_blocks(N, block_bits=15):
    """Yield all 2^N spin states as (block, N) float arrays of +/-1."""
    _check_enum(N)
    total = 1 << N
    size = min(total, 1 << block_bits)
    shifts = np.arange(N)
    for start in range(0, total, size):
        idx = np.arange(start, start + size)
        bits = (idx[:, None] >> shifts) & 1
        yield 2.0 * bits - 1.0


def exact_log_partition(bm):
    """``log sum_s exp(H(s))`` by streaming log-sum-exp over all states."""
    parts = [logsumexp(bm.energy(S)) for S in state_blocks(bm.N)]
    return float(logsumexp(parts))


def exact_correlation(bm, i, j):
    """``<s_i s_j>`` under the exact Boltzmann distribution."""
    if i == j:
        return 1.0
    log_z = exact_log_partition(bm)
    acc = []
    for S in state_blocks(bm.N):
        p = np.exp(bm.energy(S) - log_z)
        acc.append(float(p @ (S[:, i] * S[:, j])))
    return math.fsum(acc)


def _accumulate_moments(dh_and_p, n_max):
    sums = [[] for _ in range(n_max + 1)]
    for dh, p in dh_and_p:
        term = p.copy()
        for n in range(n_max + 1):
            sums[n].append(float(term.sum()))
            term *= dh
    return np.array([math.fsum(s) for s in sums])


def _factorized_prob(S, m):
    return np.prod(0.5 * (1.0 + S * m), axis=1)


def brute_force_delta_h_moments(bm, state, n_max):
    """``<dH^n>`` under the reference distribution by summing all states.

    ``dH = H(s) - h.s - C`` holds for any ``h``; when ``h`` solves the mean
    field equations it reduces to ``1/2 sum_ij w_ij (s_i - m_i)(s_j - m_j)``.
    """
    _check_enum(bm.N)
    h = np.asarray(state.h, dtype=float)
    m = np.tanh(h)
    C = reference_constant(bm, h)

    def gen():
        for S in state_blocks(bm.N):
            yield bm.energy(S) - S @ h - C, _factorized_prob(S, m)

    vals = _accumulate_moments(gen(), n_max)
    vals[0] = 1.0
    return MomentVector(vals)


def brute_force_coupling_moments(weights, m, n_max):
    """``<(1/2 sum_ij w_ij d_i d_j)^n>`` with ``d = s - m`` for frozen ``m``."""
    w = np.asarray(weights, dtype=float)
    m = np.asarray(m, dtype=float)
    _check_enum(m.size)

    def gen():
        for S in state_blocks(m.size):
            D = S - m
            yield 0.5 * np.einsum("ki,ij,kj->k", D, w, D), _factorized_prob(S, m)

    vals = _accumulate_moments(gen(), n_max)
    vals[0] = 1.0
    return MomentVector(vals)
