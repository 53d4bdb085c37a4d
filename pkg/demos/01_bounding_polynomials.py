"""Polynomial lower bounds on exp(x), and how the optimizer picks them.

Run: python demos/01_bounding_polynomials.py
"""

import math

import numpy as np

from boltzbound import poly_bounds as pb

# an order-K bound has degree K-1 and K/2 touching points
x = np.linspace(-4, 3, 8)
for K, mus in [(2, [0.0]), (4, [-1.0, 0.5]), (6, [-2.0, 0.0, 1.0])]:
    poly = pb.build_coefficients(mus, K)
    gap = np.exp(x) - poly(x)
    print(f"K={K} mus={mus}")
    print("  coeffs", np.round(poly.coeffs, 4))
    print("  exp(x) - B(x) on a grid:", np.round(gap, 4))  # never negative

# all touching points at zero gives the Taylor polynomial
print(pb.build_coefficients([0.0] * 4, 8).coeffs * [math.factorial(n) for n in range(8)])

# a three-point distribution: how close does the best bound get to <exp(x)>?
pts = np.array([-1.5, 0.2, 1.1])
probs = np.array([0.3, 0.5, 0.2])
moments = np.array([probs @ pts**n for n in range(18)])
target = probs @ np.exp(pts)
print(f"\n<exp(x)> = {target:.10f}")
for K in range(2, 19, 2):
    poly, value = pb.optimal_bound(moments, K)
    print(f"K={K:2d}  <B_K> = {value:.10f}  gap {target - value:.2e}  mus {np.round(poly.mus, 3)}")

# the last touching point is always the mean
print("mean", moments[1], "last mu", pb.optimal_mus(moments, 10)[-1])
