"""The multigraphs behind <dH^n> and what it costs to sum them.

Run: python demos/02_partition_graphs.py
"""

import numpy as np

from boltzbound import evaluator as ev
from boltzbound import graphs as G
from boltzbound import model as M

# the catalogs ship with the package; enumerate_partitions rebuilds them
for n in range(2, 10):
    cat = G.packaged_catalog(n)
    hist = cat.clique_histogram()
    print(f"order {n}: {len(cat):4d} graphs, clique sizes {dict(sorted(hist.items()))}, cost ~N^{cat.pi()}")

# order 3: a triangle and a triple edge
for g in G.packaged_catalog(3).graphs:
    print(g.edges, "coefficient", g.coefficient, "|Aut|", g.automorphisms)

# w_ij w_ij w_ik w_il w_jl w_kl as a graph on i, j, k, l
six = G.make_partition_graph(4, [(0, 1, 2), (0, 2, 1), (0, 3, 1), (1, 3, 1), (2, 3, 1)])
print("\nsix-edge example: width", six.width, "elimination order", six.elim_order)

# the moments from the graphs agree with summing all 2^N states
bm = M.sk_random(8, 1.0, 0.2, seed=3)
st = M.solve_mean_field(bm)
graph = ev.delta_h_moments_graph(bm, st, n_max=9).values
brute = M.brute_force_delta_h_moments(bm, st, 9).values
for n in range(10):
    print(f"<dH^{n}>  graphs {graph[n]: .12e}  states {brute[n]: .12e}")

# the graph route does not need 2^N states
big = M.sk_random(60, 1.0, 0.2, seed=3)
print("N=60 moments:", np.round(ev.delta_h_moments_graph(big, M.solve_mean_field(big), n_max=6).values, 4))
