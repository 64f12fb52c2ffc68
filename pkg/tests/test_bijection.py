"""The word/map correspondence: arch graphs, the dual/contract steps,
the full map, its inverse, duality, and the percolated-tree variant."""

import random
from fractions import Fraction

import pytest

from cfkmaps.bijection import (
    ArchGraph,
    BijectionError,
    arch_graph_to_word,
    build_arch_graph,
    dual_image,
    enumerate_plane_trees,
    loop_tree_decode,
    loop_tree_encode,
    plane_tree_from_parens,
    psi,
    psi_inverse,
    split_triangulation,
    tree_of_psi,
    tutte_map,
)
from cfkmaps.maps import (
    SubgraphRootedMap,
    canonical_key,
    component_count,
    dual,
    enumerate_maps,
    enumerate_rooted_maps,
    loop_count_euler,
    loop_count_trace,
    validate,
)
from cfkmaps.model import ModelParams, word_probability
from cfkmaps.sampler import enumerate_Wn, sample_Wn_batch
from cfkmaps.words import Word, dual_word, parse_word


def doubly_rooted_key(sm):
    return canonical_key(
        SubgraphRootedMap(sm.map, sm.subgraph, second_root=sm.second_root),
        include_second_root=True,
    )


# --------------------------------------------------------------------------
# step 1: arch graphs


def test_arch_graph_smallest():
    ag = build_arch_graph(parse_word("aA"))
    assert ag.n == 1
    counts = validate(ag.map)
    assert counts == {"v": 2, "e": 3, "f": 3}
    assert len(ag.arch_edges) == 1
    assert len(ag.cycle_edges) == 2
    assert ag.root_dart == ag.second_dart  # k = 0
    assert ag.starred == frozenset()


def test_arch_graph_requires_empty_reduction():
    with pytest.raises(BijectionError):
        build_arch_graph(parse_word("aB"))
    with pytest.raises(BijectionError):
        build_arch_graph(parse_word("aABb"))


def test_arch_graph_is_cubic_with_counts():
    for w in enumerate_Wn(2):
        ag = build_arch_graph(w)
        counts = validate(ag.map)
        assert counts["v"] == 2 * ag.n
        assert counts["e"] == 3 * ag.n
        assert len(ag.arch_edges) == ag.n
        assert len(ag.starred) == w.letters.count("F")
        for cyc in ag.map.vertices():
            assert len(cyc) == 3


def test_arch_graph_determines_word():
    for n in (1, 2):
        for w in enumerate_Wn(n):
            assert arch_graph_to_word(build_arch_graph(w)) == w
    for w in sample_Wn_batch(ModelParams.from_p(0.5), 12, 25, seed=2):
        assert arch_graph_to_word(build_arch_graph(w)) == w


# --------------------------------------------------------------------------
# step 2: dual triangulation and contraction


def test_split_triangulation_properties():
    for n in (1, 2, 3):
        for w in enumerate_Wn(n)[:: max(1, n * n)]:
            ag = build_arch_graph(w)
            ts = split_triangulation(ag)
            counts = validate(ts.delta)
            assert counts["v"] == n + 2
            assert counts["e"] == 3 * n
            assert counts["f"] == 2 * n
            for face in ts.delta.faces():
                assert len(face) == 3  # triangulation
            # the two trees partition the diagonals by side and are acyclic
            assert len(ts.tree_edges) + len(ts.dual_tree_edges) == n
            vertex = ts.delta.vertex_of()
            for edges in (ts.tree_edges, ts.dual_tree_edges):
                touched = {vertex[d] for e in edges for d in e}
                assert component_count(ts.delta, edges) == (n + 2) - len(edges)
            # tree edges join two upper faces, dual tree edges two lower
            for e in ts.tree_edges:
                assert {vertex[e[0]], vertex[e[1]]} <= ts.black_vertices
            for e in ts.dual_tree_edges:
                assert not ({vertex[e[0]], vertex[e[1]]} & ts.black_vertices)


def test_quadrangulation_faces():
    for n in (1, 2, 3):
        for w in enumerate_Wn(n)[:: max(1, 2 * n)]:
            ts = split_triangulation(build_arch_graph(w))
            q_darts = {d for e in ts.q_edges for d in e}
            sigma_q = {}
            for d in q_darts:
                e = ts.delta.sigma[d]
                while e not in q_darts:
                    e = ts.delta.sigma[e]
                sigma_q[d] = e
            inv = {v: k for k, v in sigma_q.items()}
            seen = set()
            faces = 0
            for d in q_darts:
                if d in seen:
                    continue
                faces += 1
                size = 0
                e = d
                while e not in seen:
                    seen.add(e)
                    size += 1
                    e = inv[ts.delta.alpha[e]]
                assert size == 4  # quadrangle
            assert faces == n


def test_tutte_map_properties():
    for n in (1, 2, 3):
        for w in enumerate_Wn(n)[:: max(1, 2 * n)]:
            ts = split_triangulation(build_arch_graph(w))
            tr = tutte_map(ts)
            assert tr.map.num_edges == n
            counts = validate(tr.map)
            v = counts["v"]
            assert len(tr.tree) == v - 1
            assert component_count(tr.map, tr.tree) == 1  # spanning tree
            # the complement is a spanning tree of the dual
            dm = dual(tr.map)
            cotree = frozenset(set(tr.map.edges()) - set(tr.tree))
            assert component_count(dm, cotree) == 1
            assert len(cotree) == len(dm.vertices()) - 1


# --------------------------------------------------------------------------
# the full correspondence


def test_psi_smallest_cases():
    images = {}
    for w in enumerate_Wn(1):
        sm = psi(w)
        validate(sm.map)
        images[(w.offset, w.letters)] = sm
    edge_g = images[(0, "aA")]
    assert edge_g.map.num_edges == 1
    assert len(edge_g.map.vertices()) == 2
    assert edge_g.subgraph == frozenset(edge_g.map.edges())
    loop_g = images[(0, "bF")]
    assert len(loop_g.map.vertices()) == 1
    assert loop_g.subgraph == frozenset(loop_g.map.edges())


def test_psi_images_without_flexible_orders_are_tree_decorated():
    for n in (1, 2, 3):
        for w in enumerate_Wn(n):
            if "F" in w.letters:
                continue
            sm = psi(w)
            assert sm.subgraph == tree_of_psi(sm)
            assert loop_count_euler(sm) == 1


def test_psi_bijective_and_loop_identity():
    for n in (1, 2, 3):
        words = enumerate_Wn(n)
        maps = enumerate_maps(n)
        keys = set()
        for w in words:
            sm = psi(w)
            assert loop_count_euler(sm) == 1 + w.letters.count("F")
            assert loop_count_trace(sm) == loop_count_euler(sm)
            assert len(sm.stars) == w.letters.count("F")
            keys.add(doubly_rooted_key(sm))
        assert len(keys) == len(words) == len(maps)
        assert keys == {canonical_key(mm, include_second_root=True) for mm in maps}


def test_psi_inverse_round_trip_exhaustive():
    for n in (1, 2):
        for w in enumerate_Wn(n):
            assert psi_inverse(psi(w)) == w
    # and the other composition, on the map side
    for sm in enumerate_maps(2):
        w = psi_inverse(sm)
        assert doubly_rooted_key(psi(w)) == canonical_key(sm, include_second_root=True)


def test_psi_inverse_round_trip_sampled():
    params = ModelParams.from_p(1 / 3)
    for w in sample_Wn_batch(params, 50, 40, seed=9):
        assert psi_inverse(psi(w)) == w


def test_psi_inverse_rejects_invalid():
    sm = psi(parse_word("aAbB"))
    no_second = SubgraphRootedMap(sm.map, sm.subgraph)
    with pytest.raises(BijectionError):
        psi_inverse(no_second)
    from cfkmaps.maps import CombinatorialMap

    torus = CombinatorialMap((1, 0, 3, 2), (2, 3, 1, 0), 0)  # genus 1
    with pytest.raises(BijectionError):
        psi_inverse(SubgraphRootedMap(torus, frozenset(), second_root=0))


def test_duality_square_commutes():
    for n in (1, 2):
        for w in enumerate_Wn(n):
            left = psi(dual_word(w))
            right = dual_image(psi(w))
            assert doubly_rooted_key(left) == doubly_rooted_key(right)
            assert psi_inverse(right) == dual_word(w)


def test_measure_transport():
    # the conditioned word law pushes to weights proportional to
    # sqrt(q)^loops on decorated maps (second root forgotten)
    for q, root in ((1, Fraction(1)), (4, Fraction(2))):
        params = ModelParams.from_q(Fraction(q))
        for n in (1, 2):
            transported = {}
            for w in enumerate_Wn(n):
                sm = psi(w)
                key = canonical_key(SubgraphRootedMap(sm.map, sm.subgraph))
                transported[key] = transported.get(key, Fraction(0)) + word_probability(
                    params, w
                )
            weights = {}
            for mm in enumerate_maps(n):
                key = canonical_key(SubgraphRootedMap(mm.map, mm.subgraph))
                if key not in weights:
                    weights[key] = root ** loop_count_euler(mm)
            ratios = {k: transported[k] / weights[k] for k in weights}
            assert len(set(ratios.values())) == 1  # exactly proportional


def test_star_count_identity():
    for w in enumerate_Wn(2):
        sm = psi(w)
        assert len(sm.stars) == loop_count_euler(sm) - 1


# --------------------------------------------------------------------------
# maximal-loop configurations and plane trees


def test_loop_tree_smallest():
    from cfkmaps.maps import CombinatorialMap

    loop = CombinatorialMap((1, 0), (1, 0), 0)
    sm = SubgraphRootedMap(loop, frozenset(loop.edges()))
    tree, subset = loop_tree_encode(sm)
    assert len(tree.faces()) == 1
    assert subset == frozenset(loop.edges())
    assert canonical_key(loop_tree_decode(tree, subset)) == canonical_key(sm)
    edge = CombinatorialMap((1, 0), (0, 1), 0)
    sm2 = SubgraphRootedMap(edge, frozenset())
    tree2, subset2 = loop_tree_encode(sm2)
    assert subset2 == frozenset()


def test_loop_tree_rejects_non_maximal():
    from cfkmaps.maps import CombinatorialMap

    edge = CombinatorialMap((1, 0), (0, 1), 0)
    with pytest.raises(BijectionError):
        loop_tree_encode(SubgraphRootedMap(edge, frozenset(edge.edges())))


def test_loop_tree_round_trip_and_count():
    import math

    def catalan(k):
        return math.comb(2 * k, k) // (k + 1)

    for n in (1, 2, 3):
        count = 0
        for m in enumerate_rooted_maps(n):
            edge_list = m.edges()
            for mask in range(1 << len(edge_list)):
                sub = frozenset(e for i, e in enumerate(edge_list) if mask >> i & 1)
                sm = SubgraphRootedMap(m, sub)
                if loop_count_euler(sm) != n + 1:
                    continue
                count += 1
                tree, subset = loop_tree_encode(sm)
                back = loop_tree_decode(tree, subset)
                assert canonical_key(back) == canonical_key(sm)
                assert loop_count_euler(back) == n + 1
        assert count == catalan(n) * 2**n


def test_loop_tree_decode_from_enumerated_trees():
    for n in (1, 2, 3):
        trees = enumerate_plane_trees(n)
        images = set()
        for tree in trees:
            edge_list = tree.edges()
            for mask in range(1 << n):
                subset = frozenset(
                    e for i, e in enumerate(edge_list) if mask >> i & 1
                )
                sm = loop_tree_decode(tree, subset)
                assert loop_count_euler(sm) == n + 1
                vertex = sm.map.vertex_of()
                for d1, d2 in sm.subgraph:
                    assert vertex[d1] == vertex[d2]  # decoded marks are loops
                t2, s2 = loop_tree_encode(sm)
                assert canonical_key(
                    SubgraphRootedMap(t2, s2)
                ) == canonical_key(SubgraphRootedMap(tree, subset))
                images.add(canonical_key(sm))
        import math

        assert len(images) == math.comb(2 * n, n) // (n + 1) * 2**n


def test_loop_tree_encode_order_independent():
    # splitting loops is done in a fixed order; the result must agree
    # with processing them in any other order
    words = [w for w in enumerate_Wn(3) if w.letters.count("F") == 3]
    rng = random.Random(5)
    for w in rng.sample(words, 10):
        sm = psi(w)
        base = SubgraphRootedMap(sm.map, sm.subgraph)
        tree, subset = loop_tree_encode(base)
        for _ in range(3):
            loops = sorted(base.subgraph)
            rng.shuffle(loops)
            sigma = list(base.map.sigma)
            for d, d2 in loops:
                x_last = d
                while sigma[x_last] != d2:
                    x_last = sigma[x_last]
                y_last = d2
                while sigma[y_last] != d:
                    y_last = sigma[y_last]
                sigma[x_last] = d
                sigma[y_last] = d2
            from cfkmaps.maps import CombinatorialMap

            shuffled = CombinatorialMap(base.map.alpha, tuple(sigma), base.map.root_dart)
            assert canonical_key(
                SubgraphRootedMap(shuffled, subset)
            ) == canonical_key(SubgraphRootedMap(tree, subset))


def test_plane_tree_from_parens():
    t = plane_tree_from_parens("(())()")
    assert validate(t) == {"v": 4, "e": 3, "f": 1}
    assert len(enumerate_plane_trees(3)) == 5
    with pytest.raises(ValueError):
        plane_tree_from_parens("(()")
