"""Lower bounds on log Z for random SK networks, and what they buy.

Run: python demos/03_bounds_on_sk_networks.py
"""

import numpy as np

from boltzbound import engine as E
from boltzbound import model as M

orders = [2, 4, 6, 8, 10]

# one network, several orders
bm = M.sk_random(14, 0.5, 0.2, seed=1)
log_z = M.exact_log_partition(bm)
res = E.bounds_for_orders(bm, orders, path="graph")
print(f"log Z = {log_z:.8f}")
for K in orders:
    r = res[K]
    print(f"K={K:2d} log B = {r.log_bound:.8f}  E = {E.relative_error(r.log_bound, log_z):.2e}")

# a small ensemble: the error shrinks with order, fastest for weak couplings
for sigma in (0.2, 0.5, 1.0, 1.5):
    errs = []
    for seed in range(20):
        net = M.sk_random(14, sigma, 0.2, seed=seed)
        lz = M.exact_log_partition(net)
        out = E.bounds_for_orders(net, orders, path="brute")
        errs.append([E.relative_error(out[K].log_bound, lz) for K in orders])
    print(f"sigma_w={sigma}: mean E by K", " ".join(f"{e:.1e}" for e in np.mean(errs, axis=0)))

# correlations from the derivative of log B_K with respect to w_12
bm = M.sk_random(12, 0.5, 0.2, seed=7)
exact = M.exact_correlation(bm, 0, 1)
approx = E.approx_correlations(bm, 0, 1, orders, path="graph")
print(f"\n<s1 s2> exact {exact:.6f}")
for K in orders:
    print(f"K={K:2d} estimate {approx[K][0]:.6f}")

# zero thresholds: the h = 0 solution against the usual one
bm = M.sk_random(14, 0.8, 0.0, seed=2)
lz = M.exact_log_partition(bm)
for start in ("standard", "zero"):
    out = E.bounds_for_orders(bm, [2, 18], path="brute", mf_start=start)
    h = out[2].mean_field.h
    print(
        f"{start:8s} attractor={M.is_attractor(bm, h)!s:5s} "
        f"E(K=2)={E.relative_error(out[2].log_bound, lz):.3e} E(K=18)={E.relative_error(out[18].log_bound, lz):.3e}"
    )
