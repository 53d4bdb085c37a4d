"""Odd-degree polynomial lower bounds on the exponential function.

A bound of order ``K`` (``K`` even) is a polynomial of degree ``K - 1``

    B_K(x) = sum_{n<K} A[K; n] x^n  <=  exp(x)   for all real x,

obtained by integrating the trivial bound ``exp(x) >= 0`` twice per level,
each time fixing the integration constants so that the primitives touch at a
free point ``mu_k``.  The ``K/2`` touching points ``mu_0, mu_2, ..., mu_{K-2}``
are the variational parameters.  Given the raw moments ``<x^n>`` of the
argument, the expected bound is maximized in closed form by a single
backward pass over the parameters (:func:`optimal_mus`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_ORDER = 18


class InvalidOrderError(ValueError):
    pass


class InvalidParameterError(ValueError):
    pass


class DegenerateDenominatorError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BoundPolynomial:
    """Coefficients ``A[K; 0..K-1]`` together with the parameters that made them.

    ``absent[l]`` marks level ``l`` (parameter ``mu_{2l}``) as the limit
    ``mu -> -inf``, where the exponential terms of that level drop out.
    """

    order_K: int
    mus: tuple
    coeffs: np.ndarray
    absent: tuple = ()

    def __call__(self, x):
        return eval_bound(self, x)

    def expectation(self, moments):
        """``<B_K(x)>`` from raw moments ``<x^0>, ..., <x^{K-1}>``."""
        return float(np.dot(self.coeffs, np.asarray(moments, dtype=float)[: self.order_K]))


@dataclass(frozen=True)
class DerivativeStructure:
    """Derivative of ``B_K`` with respect to ``mu_i``.

    ``coeffs_prime = E_i * (X_poly + mu_i * Y_poly)`` where ``X_poly`` and
    ``Y_poly`` depend only on the parameters ``mu_j`` with ``j > i``.
    """

    wrt_index: int
    coeffs_prime: np.ndarray
    E_i: float
    X_poly: np.ndarray
    Y_poly: np.ndarray


def _check_order(K):
    if not isinstance(K, (int, np.integer)) or K < 2 or K % 2:
        raise InvalidOrderError(f"order K must be an even integer >= 2, got {K!r}")
    if K > MAX_ORDER:
        raise InvalidOrderError(f"order K={K} exceeds the configured cap {MAX_ORDER}")
    return int(K)


def _check_mus(mus, K, absent=()):
    mus = tuple(float(m) for m in mus)
    if len(mus) != K // 2:
        raise InvalidParameterError(f"expected {K // 2} parameters for K={K}, got {len(mus)}")
    absent = tuple(bool(a) for a in absent) + (False,) * (K // 2 - len(absent))
    for level, (mu, gone) in enumerate(zip(mus, absent)):
        if gone:
            if any(not a for a in absent[:level]):
                raise InvalidParameterError("absent levels must form a prefix")
            continue
        if not math.isfinite(mu):
            raise InvalidParameterError(f"mu_{2 * level} = {mu} is not finite")
    return mus, absent


def _next_level(prev, mu, K, with_exp=True):
    """One step of the coefficient recursion from level k to k + 2."""
    out = np.zeros(K)
    n = np.arange(len(prev))
    out[2:] = prev[: K - 2] / ((n[: K - 2] + 2) * (n[: K - 2] + 1))
    if with_exp:
        # integration constants: B_{k+2}' and B_{k+2} touch e^x at mu
        p1 = prev / (n + 1) * mu ** (n + 1)
        p2 = prev / (n + 2) * mu ** (n + 2)
        e = math.exp(mu)
        out[1] = e - p1.sum()
        out[0] = e * (1.0 - mu) + p2.sum()
    return out


def _level_map(prev, mu, K):
    """The linear (derivative) recursion: same as above without e^mu terms."""
    out = np.zeros(K)
    n = np.arange(len(prev))
    out[2:] = prev[: K - 2] / ((n[: K - 2] + 2) * (n[: K - 2] + 1))
    out[1] = -(prev / (n + 1) * mu ** (n + 1)).sum()
    out[0] = (prev / (n + 2) * mu ** (n + 2)).sum()
    return out


def _coeff_levels(mus, absent, K):
    levels = [np.zeros(K)]
    for level, mu in enumerate(mus):
        if absent[level]:
            # e^{mu} -> 0 and every polynomial term multiplies A_k, which is 0 here
            levels.append(np.zeros(K))
        else:
            levels.append(_next_level(levels[-1], mu, K))
    return levels


def build_coefficients(mus, K, absent=()):
    """Coefficients ``A[K; n]`` for the touching points ``mus``."""
    K = _check_order(K)
    mus, absent = _check_mus(mus, K, absent)
    coeffs = _coeff_levels(mus, absent, K)[-1]
    coeffs.setflags(write=False)
    return BoundPolynomial(order_K=K, mus=mus, coeffs=coeffs, absent=absent)


def horner(coeffs, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for c in coeffs[::-1]:
        out = out * x + c
    return out


def eval_bound(poly, x):
    """Value of the bounding polynomial at ``x`` (scalar or array)."""
    x_arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x_arr)):
        raise InvalidParameterError("x must be finite")
    val = horner(poly.coeffs, x_arr)
    return float(val) if val.ndim == 0 else val


def _propagate(seed, mus, start_level, K):
    p = seed
    for level in range(start_level, K // 2):
        p = _level_map(p, mus[level], K)
    return p


def build_derivative(mus, K, i):
    """``dB_K / dmu_i`` split into ``E_i``, ``X_i`` and ``Y_i``."""
    K = _check_order(K)
    mus, absent = _check_mus(mus, K)
    if not isinstance(i, (int, np.integer)) or i % 2 or not 0 <= i <= K - 2:
        raise InvalidParameterError(f"index i must be even in [0, {K - 2}], got {i!r}")
    i = int(i)
    level = i // 2
    A_i = _coeff_levels(mus[:level], absent[:level], K)[-1]
    mu = mus[level]
    E = math.exp(mu) - float(horner(A_i, mu))
    # E is e^mu minus a lower bound at mu; clip rounding noise
    E = max(E, 0.0)
    x_seed = np.zeros(K)
    x_seed[1] = 1.0
    y_seed = np.zeros(K)
    y_seed[0] = -1.0
    X = _propagate(x_seed, mus, level + 1, K)
    Y = _propagate(y_seed, mus, level + 1, K)
    prime = E * (X + mu * Y)
    return DerivativeStructure(wrt_index=i, coeffs_prime=prime, E_i=E, X_poly=X, Y_poly=Y)


def _moments_array(moments, K):
    m = np.asarray(getattr(moments, "values", moments), dtype=float)
    if m.shape[0] < K:
        raise InvalidParameterError(f"need moments up to power {K - 1}, got {m.shape[0] - 1}")
    if abs(m[0] - 1.0) > 1e-12:
        raise InvalidParameterError("zeroth moment must equal 1")
    return m[:K]


def optimal_mus(moments, K):
    """Closed-form maximizer of ``<B_K(x)>`` given raw moments ``<x^n>``.

    Runs backward from ``mu_{K-2}`` (which equals the mean) to ``mu_0``; each
    parameter only depends on the ones already fixed.
    """
    K = _check_order(K)
    m = _moments_array(moments, K)
    if K > 2:
        var = m[2] - m[1] ** 2
        if abs(var) <= 1e-15 * max(1.0, m[2]):
            # point mass: the Taylor bound around the mean is exact
            return [float(m[1])] * (K // 2)
    mus = [0.0] * (K // 2)
    x_seed = np.zeros(K)
    x_seed[1] = 1.0
    y_seed = np.zeros(K)
    y_seed[0] = -1.0
    for level in range(K // 2 - 1, -1, -1):
        X = _propagate(x_seed, mus, level + 1, K)
        Y = _propagate(y_seed, mus, level + 1, K)
        num = float(np.dot(X, m))
        den = float(np.dot(Y, m))
        # Y is negative everywhere, so any distribution gives <Y> < 0
        if not den < 0.0 or not math.isfinite(den):
            raise DegenerateDenominatorError(
                f"<Y_{2 * level}> = {den}; the moments are not those of a distribution"
            )
        mus[level] = -num / den
    return mus


def optimal_bound(moments, K):
    """Optimized ``BoundPolynomial`` and its expectation under ``moments``."""
    mus = optimal_mus(moments, K)
    poly = build_coefficients(mus, K)
    return poly, poly.expectation(_moments_array(moments, K))


def embed_next_order(mus, K, absent=()):
    """Parameters of an order ``K + 2`` bound identical to the order ``K`` one.

    Returns ``(mus, absent)``: the old parameters shift up one slot and the
    new first slot is the ``mu -> -inf`` limit, flagged rather than stored.
    """
    K = _check_order(K)
    mus, absent = _check_mus(mus, K, absent)
    _check_order(K + 2)
    return [0.0, *mus], (True, *absent)
