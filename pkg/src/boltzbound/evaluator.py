"""Moments of the coupling energy by variable elimination over partition graphs.

Every partition graph is a small tensor network: an ``N x N`` factor
``w^mult`` per edge and a length-``N`` factor ``M'_deg`` per node.  Summing
the node indices out in an elimination order of induced width ``w`` costs
``O(N^(w + 1))``, so each moment is polynomial in ``N``.

Graphs that share an underlying simple graph differ only in which powers
and corrected moments feed the network, so they are contracted together
along a leading batch axis.  The free index sums cancel heavily (corrected
moments alternate in sign), hence all arithmetic runs in ``np.longdouble``.
"""

from __future__ import annotations

from dataclasses import dataclass
from string import ascii_letters

import numpy as np

from .graphs import _canonical_search, elimination_order, packaged_catalog
from .model import MeanFieldState, MomentVector

DTYPE = np.longdouble
_BATCH = "z"


class ConfigurationError(ValueError):
    pass


class MissingCatalogError(ConfigurationError):
    def __init__(self, order):
        super().__init__(f"no partition catalog for order {order}")
        self.order = order


@dataclass(frozen=True)
class EliminationTask:
    """Graphs with one shared simple structure, compiled into einsum steps.

    ``mults[b, e]`` is the multiplicity of edge ``e`` in member ``b`` and
    ``degrees[b, v]`` the degree of node ``v``; ``weights[b]`` is
    ``coefficient / |Aut|``.  Each step contracts the listed slots and
    appends the result as a new slot.
    """

    num_nodes: int
    edges: tuple
    mults: np.ndarray
    degrees: np.ndarray
    weights: np.ndarray
    elim_order: tuple
    steps: tuple
    final_slots: tuple
    max_arity: int


def _letters(vs):
    return _BATCH + "".join(ascii_letters[v] for v in vs)


def _compile_structure(num_nodes, edges, elim):
    live = {i: (a, b) for i, (a, b) in enumerate(edges)}
    live.update({len(edges) + v: (v,) for v in range(num_nodes)})
    steps = []
    nxt = len(edges) + num_nodes
    max_arity = 0
    for v in elim:
        use = sorted(i for i, vs in live.items() if v in vs)
        out = tuple(sorted(set().union(*(live[i] for i in use)) - {v}))
        max_arity = max(max_arity, len(out))
        subs = ",".join(_letters(live[i]) for i in use) + "->" + _letters(out)
        steps.append((tuple(use), subs))
        for i in use:
            del live[i]
        live[nxt] = out
        nxt += 1
    return tuple(steps), tuple(sorted(live)), max_arity


def _simple_labeling(graph):
    V = graph.num_nodes
    adj = [[0] * V for _ in range(V)]
    for a, b, _ in graph.edges:
        adj[a][b] = adj[b][a] = 1
    cert, perm, _ = _canonical_search(adj)
    pos = {v: p for p, v in enumerate(perm)}
    return cert, pos


def compile_graphs(graphs):
    """Group graphs by underlying simple graph and compile each group."""
    groups = {}
    for g in graphs:
        cert, pos = _simple_labeling(g)
        mapped = {}
        for a, b, k in g.edges:
            mapped[tuple(sorted((pos[a], pos[b])))] = k
        groups.setdefault((g.num_nodes, cert), []).append((g, mapped))
    tasks = []
    for (V, _), members in groups.items():
        edges = tuple(sorted(members[0][1]))
        elim, _ = elimination_order((V, tuple((a, b, 1) for a, b in edges)))
        steps, final, arity = _compile_structure(V, edges, elim)
        mults = np.array([[m[e] for e in edges] for _, m in members], dtype=np.intp)
        degrees = np.zeros((len(members), V), dtype=np.intp)
        for e, (a, b) in enumerate(edges):
            degrees[:, a] += mults[:, e]
            degrees[:, b] += mults[:, e]
        weights = np.array(
            [DTYPE(g.coefficient) / DTYPE(g.automorphisms) for g, _ in members], dtype=DTYPE
        )
        tasks.append(
            EliminationTask(V, edges, mults, degrees, weights, tuple(elim), steps, final, arity)
        )
    return tasks


_COMPILED = {}


def _catalog_tasks(catalog):
    key = id(catalog)
    hit = _COMPILED.get(key)
    if hit is None or hit[0] is not catalog:
        hit = (catalog, compile_graphs(catalog.graphs))
        _COMPILED[key] = hit
    return hit[1]


def _run(task, wpow, table):
    slots = [wpow[task.mults[:, e]] for e in range(len(task.edges))]
    slots += [table[task.degrees[:, v]] for v in range(task.num_nodes)]
    for use, subs in task.steps:
        slots.append(np.einsum(subs, *(slots[i] for i in use)))
    out = np.ones(task.mults.shape[0], dtype=DTYPE)
    for i in task.final_slots:
        out = out * slots[i]
    return out


def _neumaier(values):
    s = DTYPE(0)
    c = DTYPE(0)
    for x in values:
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


def weight_powers(weights, n_max):
    """Stacked elementwise powers ``w^0 .. w^n_max`` in extended precision."""
    w = np.asarray(weights, dtype=DTYPE)
    pows = np.empty((n_max + 1,) + w.shape, dtype=DTYPE)
    pows[0] = 1
    for k in range(1, n_max + 1):
        pows[k] = pows[k - 1] * w
    return pows


def corrected_moment_table(m, c_max):
    """Row ``c`` holds ``M'_c`` for every unit (row 0 unused), extended precision."""
    m = np.asarray(m, dtype=DTYPE)
    c_max = max(c_max, 1)
    M = np.empty((c_max + 1, m.size), dtype=DTYPE)
    up, dn = (1 + m) / 2, (1 - m) / 2
    a, b = np.ones_like(m), np.ones_like(m)
    for c in range(c_max + 1):
        M[c] = up * a + dn * b
        a = a * (1 - m)
        b = b * (-1 - m)
    K = np.zeros_like(M)
    binom = [[1]]
    for c in range(1, c_max + 1):
        binom.append([1] + [binom[-1][k - 1] + binom[-1][k] for k in range(1, c)] + [1])
    for c in range(1, c_max + 1):
        acc = M[c].copy()
        for k in range(1, c):
            acc -= binom[c - 1][k - 1] * K[k] * M[c - k]
        K[c] = acc
    return K


def _state_table(state, c_max):
    table = state.moments_table
    if table is None:
        return corrected_moment_table(state.m, c_max)
    if table.shape[0] <= c_max:
        raise ConfigurationError(
            f"mean-field state carries corrected moments up to {table.shape[0] - 1}, need {c_max}"
        )
    return np.asarray(table, dtype=DTYPE)


def graph_contribution(bm, state, graph):
    """``S(g)``: the free index sum of ``g`` divided by its automorphism count."""
    deg = graph.degrees()
    if min(deg) < 2:
        # M'_1 = 0: any node with a single connection kills the term
        return 0.0
    table = _state_table(state, max(deg))
    (task,) = compile_graphs([graph])
    val = _run(task, weight_powers(bm.weights, graph.order), table)[0]
    return float(val / graph.automorphisms)


def order_moment(wpow, table, catalog):
    """``<dH^n>`` for the single order held by ``catalog`` (extended precision)."""
    parts = [np.sum(t.weights * _run(t, wpow, table)) for t in _catalog_tasks(catalog)]
    return _neumaier(parts)


def _load(n_max, catalogs):
    if catalogs is None:
        catalogs = {}
        for n in range(2, n_max + 1):
            try:
                catalogs[n] = packaged_catalog(n)
            except FileNotFoundError:
                raise MissingCatalogError(n) from None
    for n in range(2, n_max + 1):
        if n not in catalogs:
            raise MissingCatalogError(n)
    return catalogs


def _moments(weights, table, n_max, catalogs):
    catalogs = _load(n_max, catalogs)
    wpow = weight_powers(weights, n_max)
    vals = np.zeros(n_max + 1)
    vals[0] = 1.0
    for n in range(2, n_max + 1):
        vals[n] = float(order_moment(wpow, table, catalogs[n]))
    return MomentVector(vals)


def coupling_moments_graph(weights, m, n_max, catalogs=None):
    """``<(1/2 sum_ij w_ij d_i d_j)^n>`` for ``n <= n_max`` at fixed ``m``."""
    return _moments(weights, corrected_moment_table(m, n_max), n_max, catalogs)


def delta_h_moments_graph(bm, state, catalogs=None, n_max=9):
    """``<dH^n>`` via the partition catalogs; the state must solve the mean field equations."""
    if not isinstance(state, MeanFieldState):
        raise TypeError("state must be a MeanFieldState")
    return _moments(bm.weights, _state_table(state, n_max), n_max, catalogs)
