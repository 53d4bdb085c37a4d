import itertools
import math
from collections import Counter

import pytest

from boltzbound import graphs as G

# i=0, j=1, k=2, l=3: w_ij w_ij w_ik w_il w_jl w_kl
SIX_EDGE = (4, ((0, 1, 2), (0, 2, 1), (0, 3, 1), (1, 3, 1), (2, 3, 1)))

COUNTS = {2: 1, 3: 2, 4: 5, 5: 11, 6: 34, 7: 87, 8: 279, 9: 897}

# occurrence counts listed for the second to fifth order expansions
OCCURRENCES = {
    2: [2],
    3: [4, 8],
    4: [8, 96, 48, 12, 48],
    5: [16, 320, 480, 320, 80, 480, 960, 960, 960, 160, 384],
}


def brute_automorphisms(num_nodes, edges):
    target = Counter({(a, b): k for a, b, k in edges})
    count = 0
    for perm in itertools.permutations(range(num_nodes)):
        mapped = Counter()
        for (a, b), k in target.items():
            mapped[tuple(sorted((perm[a], perm[b])))] += k
        count += mapped == target
    return count


@pytest.mark.parametrize("n", range(2, 8))
def test_counts_small_orders(n):
    cat = G.enumerate_partitions(n)
    assert len(cat) == COUNTS[n]
    assert len({g.canonical_key for g in cat.graphs}) == len(cat)
    for g in cat.graphs:
        assert g.order == n
        assert min(g.degrees()) >= 2


def test_packaged_catalogs_match_enumeration():
    for n in range(2, 7):
        assert G.dumps_catalog(G.packaged_catalog(n)) == G.dumps_catalog(G.enumerate_partitions(n))


def test_occurrence_counts():
    for n, expected in OCCURRENCES.items():
        got = sorted(G.table_coefficient(g) for g in G.packaged_catalog(n).graphs)
        assert got == sorted(expected)


def test_occurrences_from_sequences():
    # independent count: every ordered sequence of n ordered index pairs on
    # n labels, grouped by the isomorphism class of the multigraph it spells
    for n in (2, 3, 4):
        pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
        seen = Counter()
        memo = {}
        for seq in itertools.product(pairs, repeat=n):
            deg = Counter()
            for a, b in seq:
                deg[a] += 1
                deg[b] += 1
            if min(deg.values()) < 2:
                continue
            used = sorted(deg)
            ix = {v: i for i, v in enumerate(used)}
            mult = Counter(tuple(sorted((ix[a], ix[b]))) for a, b in seq)
            edges = tuple((a, b, k) for (a, b), k in sorted(mult.items()))
            key = memo.get(edges)
            if key is None:
                key = memo[edges] = G.canonical_form((len(used), edges))
            seen[key] += 1
        cat = G.packaged_catalog(n)
        assert set(seen) == {g.canonical_key for g in cat.graphs}
        for g in cat.graphs:
            labelings = math.perm(n, g.num_nodes)
            assert seen[g.canonical_key] == labelings * G.table_coefficient(g)


def test_automorphisms_against_permutations():
    for n in range(2, 6):
        for g in G.packaged_catalog(n).graphs:
            assert g.automorphisms == brute_automorphisms(g.num_nodes, g.edges)


def test_canonical_form_is_label_invariant():
    V, edges = SIX_EDGE
    key = G.canonical_form(SIX_EDGE)
    for perm in itertools.permutations(range(V)):
        relabeled = tuple((perm[a], perm[b], k) for a, b, k in edges)
        assert G.canonical_form((V, relabeled)) == key
    # moving the double edge gives a different graph
    other = (4, ((0, 1, 1), (0, 2, 1), (0, 3, 2), (1, 3, 1), (2, 3, 1)))
    assert G.canonical_form(other) != key


def test_six_edge_graph():
    g = G.make_partition_graph(*SIX_EDGE)
    assert g.order == 6
    assert g.coefficient == math.factorial(6) // 2
    assert g.width == 2 and g.max_clique == 3
    assert G.induced_width(g.num_nodes, g.edges, g.elim_order) == 2
    assert g.canonical_key in {h.canonical_key for h in G.packaged_catalog(6).graphs}
    # summing out k, then l, then i and j stays at width 2
    assert G.induced_width(4, SIX_EDGE[1], (2, 3, 0, 1)) == 2


def test_complete_graph_width():
    k4 = (4, tuple((a, b, 1) for a, b in itertools.combinations(range(4), 2)))
    order, width = G.elimination_order(k4)
    assert width == 3
    assert G.elimination_order(k4, method="min_fill")[1] == 3


def test_exact_order_never_worse_than_greedy():
    for g in G.packaged_catalog(8).graphs:
        greedy = G.greedy_elimination_order(g.num_nodes, g.edges)[1]
        assert g.width <= greedy
        assert G.induced_width(g.num_nodes, g.edges, g.elim_order) == g.width


def test_catalog_round_trip(tmp_path):
    cat = G.packaged_catalog(6)
    path = tmp_path / "c6.json"
    G.save_catalog(cat, path)
    again = G.load_catalog(path, expected_order=6)
    assert again.graphs == cat.graphs
    assert G.dumps_catalog(again) == path.read_text()


def test_hand_written_catalog():
    text = """{"order": 2, "graphs": [
      {"nodes": 2, "edges": [[0, 1, 2]], "coefficient": 1, "elim_order": [0, 1], "width": 1}
    ]}"""
    cat = G.loads_catalog(text, expected_order=2)
    (g,) = cat.graphs
    assert g.automorphisms == 2
    assert g.canonical_key == G.packaged_catalog(2).graphs[0].canonical_key


def test_truncated_catalog_reports_line(tmp_path):
    text = G.dumps_catalog(G.packaged_catalog(5))
    lines = text.splitlines()
    with pytest.raises(G.CatalogParseError) as info:
        G.loads_catalog("\n".join(lines[:8]))
    assert info.value.lineno is not None and info.value.lineno >= 8


def test_wrong_order_is_version_error():
    text = G.dumps_catalog(G.packaged_catalog(3))
    with pytest.raises(G.CatalogVersionError):
        G.loads_catalog(text, expected_order=4)
    with pytest.raises(G.CatalogVersionError):
        G.loads_catalog(text.replace(G.CONVENTION_TAG, "other/v0"))


def test_inconsistent_record():
    text = '{"order": 3, "graphs": [{"nodes": 2, "edges": [[0, 1, 2]], "coefficient": 1, "elim_order": [0, 1], "width": 1}]}'
    with pytest.raises(G.CatalogParseError):
        G.loads_catalog(text)


@pytest.mark.parametrize("n", [1, 10, 0])
def test_unsupported_orders(n):
    with pytest.raises(G.UnsupportedOrderError):
        G.enumerate_partitions(n)
