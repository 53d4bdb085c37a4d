"""Partition multigraphs for the moments of a pairwise spin interaction.

Expanding ``<(sum_{i<j} w_ij d_i d_j)^n>`` over a factorized distribution
(``d_i = s_i - m_i``) produces one term per way the ``2n`` indices can
coincide.  Each such coupling pattern is a loopless multigraph with ``n``
edges; nodes with a single connection vanish because the first corrected
moment is zero.

Sum convention (``CONVENTION_TAG``)
-----------------------------------
For a graph ``g`` let ``F(g)`` be the *free* index sum

    F(g) = sum_{l: nodes -> 1..N} prod_edges w_{l(a) l(b)}^mult * prod_nodes M'_deg(l(v))

where coinciding labels are allowed (they are accounted for by the
corrected moments ``M'`` and by ``w_ii = 0``).  The per-graph contribution
is ``S(g) = F(g) / |Aut(g)|`` and

    <dH^n> = sum_g coefficient(g) * S(g),   coefficient(g) = n! / prod(mult!)

so every coefficient is a positive integer.  Occurrence counts for the
unhalved sum ``<(sum_ij w_ij d_i d_j)^n>`` are ``2^n * coefficient / |Aut|``;
see :func:`table_coefficient`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from pathlib import Path

MAX_ORDER = 9
CONVENTION_TAG = "free-sum-over-automorphisms/v1"


class UnsupportedOrderError(ValueError):
    pass


class CatalogParseError(ValueError):
    def __init__(self, msg, lineno=None):
        if lineno is not None:
            msg = f"line {lineno}: {msg}"
        super().__init__(msg)
        self.lineno = lineno


class CatalogVersionError(ValueError):
    pass


@dataclass(frozen=True)
class PartitionGraph:
    """One coupling pattern of the expansion, stored in canonical labeling."""

    num_nodes: int
    edges: tuple  # ((a, b, multiplicity), ...) with a < b
    coefficient: int
    automorphisms: int
    canonical_key: bytes
    elim_order: tuple
    width: int
    max_clique: int

    @property
    def order(self):
        return sum(e[2] for e in self.edges)

    def degrees(self):
        deg = [0] * self.num_nodes
        for a, b, k in self.edges:
            deg[a] += k
            deg[b] += k
        return deg


@dataclass
class GraphCatalog:
    order_n: int
    graphs: list = field(default_factory=list)
    convention_tag: str = CONVENTION_TAG

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def clique_histogram(self):
        hist = {}
        for g in self.graphs:
            hist[g.max_clique] = hist.get(g.max_clique, 0) + 1
        return dict(sorted(hist.items()))

    def pi(self):
        return max(g.max_clique for g in self.graphs)


# ---------------------------------------------------------------------------
# canonical labeling


def _adjacency(num_nodes, edges):
    adj = [[0] * num_nodes for _ in range(num_nodes)]
    for a, b, k in edges:
        if a == b:
            raise ValueError("self-loops are not allowed")
        adj[a][b] += k
        adj[b][a] += k
    return adj


def _refine(adj, colors):
    # colour refinement on the weighted adjacency; colours are ranked by
    # signature so the result is invariant under relabeling
    V = len(adj)
    ncells = len(set(colors))
    while True:
        sigs = [
            (colors[v], tuple(sorted((colors[u], adj[v][u]) for u in range(V) if adj[v][u])))
            for v in range(V)
        ]
        ranks = {s: r for r, s in enumerate(sorted(set(sigs)))}
        colors = [ranks[s] for s in sigs]
        if len(ranks) == ncells:
            return colors
        ncells = len(ranks)


def _canonical_search(adj):
    """Individualization-refinement search without pruning.

    Returns (certificate, ordering, number of leaves with that certificate).
    Automorphisms act freely and transitively on the optimal leaves, so the
    leaf count is the automorphism group order.
    """
    V = len(adj)
    best = [None, None, 0]

    def visit(colors):
        colors = _refine(adj, colors)
        if len(set(colors)) == V:
            perm = sorted(range(V), key=colors.__getitem__)
            cert = tuple(adj[perm[p]][perm[q]] for p, q in combinations(range(V), 2))
            if best[0] is None or cert < best[0]:
                best[:] = [cert, perm, 1]
            elif cert == best[0]:
                best[2] += 1
            return
        counts = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, k in counts.items() if k > 1)
        for v in range(V):
            if colors[v] == target:
                nc = [2 * c for c in colors]
                nc[v] -= 1
                visit(nc)

    visit([0] * V)
    return best[0], best[1], best[2]


def _as_nodes_edges(graph):
    if isinstance(graph, PartitionGraph):
        return graph.num_nodes, graph.edges
    num_nodes, edges = graph
    return num_nodes, tuple(edges)


def _key_bytes(num_nodes, cert):
    return bytes([num_nodes, *cert])


def canonical_form(graph):
    """Canonical key of a multigraph given as ``(num_nodes, edges)``.

    Two multigraphs share a key exactly when they are isomorphic.
    """
    num_nodes, edges = _as_nodes_edges(graph)
    cert, _, _ = _canonical_search(_adjacency(num_nodes, edges))
    return _key_bytes(num_nodes, cert)


def automorphism_count(graph):
    num_nodes, edges = _as_nodes_edges(graph)
    return _canonical_search(_adjacency(num_nodes, edges))[2]


def _relabel(num_nodes, edges):
    adj = _adjacency(num_nodes, edges)
    cert, perm, aut = _canonical_search(adj)
    pos = {v: p for p, v in enumerate(perm)}
    new_edges = []
    for a, b, k in edges:
        a, b = sorted((pos[a], pos[b]))
        new_edges.append((a, b, k))
    # merge parallel entries so the edge list is unique per pair
    merged = {}
    for a, b, k in new_edges:
        merged[(a, b)] = merged.get((a, b), 0) + k
    new_edges = tuple((a, b, k) for (a, b), k in sorted(merged.items()))
    return _key_bytes(num_nodes, cert), new_edges, aut


# ---------------------------------------------------------------------------
# elimination orders


def _neighbor_masks(num_nodes, edges):
    nbr = [0] * num_nodes
    for a, b, _ in edges:
        nbr[a] |= 1 << b
        nbr[b] |= 1 << a
    return tuple(nbr)


def induced_width(num_nodes, edges, order):
    """Largest neighbourhood met while eliminating nodes in ``order``."""
    nbr = [set() for _ in range(num_nodes)]
    for a, b, _ in edges:
        nbr[a].add(b)
        nbr[b].add(a)
    width = 0
    for v in order:
        ns = nbr[v]
        width = max(width, len(ns))
        for a in ns:
            nbr[a] |= ns - {a}
            nbr[a].discard(v)
        nbr[v] = set()
    return width


def greedy_elimination_order(num_nodes, edges):
    """Min-fill ordering, ties broken by min degree then label."""
    nbr = [set() for _ in range(num_nodes)]
    for a, b, _ in edges:
        nbr[a].add(b)
        nbr[b].add(a)
    remaining = set(range(num_nodes))
    order = []
    width = 0
    while remaining:
        def cost(v):
            ns = list(nbr[v])
            fill = sum(1 for x, y in combinations(ns, 2) if y not in nbr[x])
            return fill, len(ns), v

        v = min(remaining, key=cost)
        ns = nbr[v]
        width = max(width, len(ns))
        for a in ns:
            nbr[a] |= ns - {a}
            nbr[a].discard(v)
        remaining.remove(v)
        order.append(v)
    return tuple(order), width


@lru_cache(maxsize=None)
def _exact_order(nbr):
    # dynamic programme over eliminated sets: tw(S) = min_v max(tw(S-v), |Q(S-v, v)|)
    V = len(nbr)
    full = (1 << V) - 1

    def q_size(S, v):
        seen = 1 << v
        frontier = nbr[v]
        out = 0
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            if seen & low:
                continue
            seen |= low
            if S & low:
                frontier |= nbr[low.bit_length() - 1] & ~seen
            else:
                out |= low
        return bin(out).count("1")

    tw = {0: -1}
    choice = {}
    for size in range(1, V + 1):
        for combo in combinations(range(V), size):
            S = 0
            for v in combo:
                S |= 1 << v
            best = None
            for v in combo:
                rest = S & ~(1 << v)
                val = max(tw[rest], q_size(rest, v))
                if best is None or val < best:
                    best, arg = val, v
            tw[S] = best
            choice[S] = arg
    order = []
    S = full
    while S:
        v = choice[S]
        order.append(v)
        S &= ~(1 << v)
    return tuple(reversed(order)), max(tw[full], 0)


def elimination_order(graph, method="exact"):
    """Return ``(elim_order, induced_width)`` for a graph.

    ``method="exact"`` gives a minimum-width order (cheap for the node counts
    that occur here); ``"min_fill"`` is the greedy heuristic.
    """
    num_nodes, edges = _as_nodes_edges(graph)
    if method == "min_fill":
        return greedy_elimination_order(num_nodes, edges)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    return _exact_order(_neighbor_masks(num_nodes, edges))


# ---------------------------------------------------------------------------
# enumeration


def _degree_sequences(total, parts, smallest=2, largest=None):
    if largest is None:
        largest = total
    if parts == 0:
        if total == 0:
            yield ()
        return
    for d in range(min(largest, total - smallest * (parts - 1)), smallest - 1, -1):
        for rest in _degree_sequences(total - d, parts - 1, smallest, d):
            yield (d,) + rest


def _realizations(degrees):
    """Labeled loopless multigraphs with the given degree sequence.

    Columns that are still interchangeable (same degree, same entries in all
    rows filled so far) receive non-increasing multiplicities, which removes
    most labeled duplicates without losing any isomorphism class.
    """
    V = len(degrees)
    adj = [[0] * V for _ in range(V)]
    rem = list(degrees)

    def feasible(i):
        r = rem[i:]
        s = sum(r)
        return s % 2 == 0 and (not r or 2 * max(r) <= s)

    def row(i):
        if i >= V - 1:
            if rem[V - 1] == 0:
                yield tuple(tuple(r) for r in adj)
            return
        if not feasible(i):
            return
        cols = list(range(i + 1, V))
        cls = [(degrees[j], tuple(adj[r][j] for r in range(i))) for j in cols]
        left0 = rem[i]
        rem[i] = 0
        last = {}

        def place(idx, left):
            if idx == len(cols):
                if left == 0:
                    yield from row(i + 1)
                return
            j = cols[idx]
            c = cls[idx]
            cap_rest = sum(rem[k] for k in cols[idx + 1:])
            hi = min(left, rem[j], last.get(c, left))
            lo = max(0, left - cap_rest)
            prev = last.get(c)
            for x in range(hi, lo - 1, -1):
                adj[i][j] = adj[j][i] = x
                rem[j] -= x
                last[c] = x
                yield from place(idx + 1, left - x)
                rem[j] += x
            adj[i][j] = adj[j][i] = 0
            if prev is None:
                last.pop(c, None)
            else:
                last[c] = prev

        yield from place(0, left0)
        rem[i] = left0

    yield from row(0)


def _edges_from_adj(adj):
    V = len(adj)
    return tuple((a, b, adj[a][b]) for a, b in combinations(range(V), 2) if adj[a][b])


def make_partition_graph(num_nodes, edges):
    """Build a catalog entry (canonical labeling, coefficient, order)."""
    key, cedges, aut = _relabel(num_nodes, edges)
    n = sum(k for _, _, k in cedges)
    coeff = math.factorial(n)
    for _, _, k in cedges:
        coeff //= math.factorial(k)
    order, width = elimination_order((num_nodes, cedges))
    return PartitionGraph(
        num_nodes=num_nodes,
        edges=cedges,
        coefficient=coeff,
        automorphisms=aut,
        canonical_key=key,
        elim_order=order,
        width=width,
        max_clique=width + 1,
    )


def enumerate_partitions(n):
    """All degree->=2 loopless multigraphs with ``n`` edges, up to isomorphism."""
    if not isinstance(n, int) or not 2 <= n <= MAX_ORDER:
        raise UnsupportedOrderError(
            f"order {n} is not supported; graph catalogs cover 2..{MAX_ORDER}"
        )
    found = {}
    for V in range(2, n + 1):
        for degrees in _degree_sequences(2 * n, V):
            for adj in _realizations(degrees):
                edges = _edges_from_adj(adj)
                key = canonical_form((V, edges))
                if key not in found:
                    found[key] = (V, edges)
    graphs = [make_partition_graph(V, edges) for V, edges in found.values()]
    graphs.sort(key=lambda g: g.canonical_key)
    return GraphCatalog(order_n=n, graphs=graphs)


def table_coefficient(graph):
    """Occurrence count under the unhalved sum ``(sum_ij w_ij d_i d_j)^n``."""
    n = graph.order
    num = graph.coefficient * 2**n
    if num % graph.automorphisms:
        raise ArithmeticError("non-integral occurrence count")
    return num // graph.automorphisms


# ---------------------------------------------------------------------------
# persistence


def catalog_to_dict(catalog):
    return {
        "order": catalog.order_n,
        "convention_tag": catalog.convention_tag,
        "graphs": [
            {
                "key": g.canonical_key.hex(),
                "nodes": g.num_nodes,
                "edges": [list(e) for e in g.edges],
                "coefficient": g.coefficient,
                "automorphisms": g.automorphisms,
                "elim_order": list(g.elim_order),
                "width": g.width,
                "max_clique": g.max_clique,
            }
            for g in catalog.graphs
        ],
    }


def dumps_catalog(catalog):
    d = catalog_to_dict(catalog)
    lines = ["{"]
    lines.append(f'  "order": {d["order"]},')
    lines.append(f'  "convention_tag": {json.dumps(d["convention_tag"])},')
    lines.append('  "graphs": [')
    rows = [
        "    " + json.dumps(g, separators=(", ", ": ")) for g in d["graphs"]
    ]
    lines.append(",\n".join(rows))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_catalog(catalog, path):
    Path(path).write_text(dumps_catalog(catalog), encoding="utf-8")


def _graph_from_record(rec, order, idx):
    try:
        num_nodes = int(rec["nodes"])
        edges = tuple((int(a), int(b), int(k)) for a, b, k in rec["edges"])
        g = PartitionGraph(
            num_nodes=num_nodes,
            edges=edges,
            coefficient=int(rec["coefficient"]),
            automorphisms=int(rec.get("automorphisms") or automorphism_count((num_nodes, edges))),
            canonical_key=(
                bytes.fromhex(rec["key"]) if "key" in rec else canonical_form((num_nodes, edges))
            ),
            elim_order=tuple(int(v) for v in rec["elim_order"]),
            width=int(rec["width"]),
            max_clique=int(rec.get("max_clique", int(rec["width"]) + 1)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogParseError(f"graph #{idx}: malformed record ({exc})") from None
    if g.order != order:
        raise CatalogParseError(f"graph #{idx}: edge multiplicities sum to {g.order}, not {order}")
    if any(a == b or not (0 <= a < num_nodes and 0 <= b < num_nodes) for a, b, _ in edges):
        raise CatalogParseError(f"graph #{idx}: invalid edge endpoints")
    if sorted(g.elim_order) != list(range(num_nodes)):
        raise CatalogParseError(f"graph #{idx}: elim_order is not a permutation of the nodes")
    return g


def loads_catalog(text, expected_order=None):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogParseError(exc.msg, exc.lineno) from None
    if not isinstance(d, dict) or "order" not in d or "graphs" not in d:
        raise CatalogParseError("missing 'order' or 'graphs' field", 1)
    order = d["order"]
    if expected_order is not None and order != expected_order:
        raise CatalogVersionError(f"catalog holds order {order}, expected {expected_order}")
    tag = d.get("convention_tag", CONVENTION_TAG)
    if tag != CONVENTION_TAG:
        raise CatalogVersionError(f"unsupported convention {tag!r}")
    graphs = [_graph_from_record(rec, order, i) for i, rec in enumerate(d["graphs"])]
    return GraphCatalog(order_n=order, graphs=graphs, convention_tag=tag)


def load_catalog(path, expected_order=None):
    return loads_catalog(Path(path).read_text(encoding="utf-8"), expected_order)


def catalog_path(order):
    return Path(__file__).parent / "data" / f"partitions_order{order}.json"


_CACHE = {}


def packaged_catalog(order):
    """Catalog shipped with the package; raises if the file is absent."""
    if order not in _CACHE:
        path = catalog_path(order)
        if not path.exists():
            raise FileNotFoundError(f"no graph catalog for order {order} ({path})")
        _CACHE[order] = load_catalog(path, expected_order=order)
    return _CACHE[order]


def packaged_catalogs(max_order):
    return {n: packaged_catalog(n) for n in range(2, max_order + 1)}
