"""Combinatorial maps: validation, duality, loops, balls, enumeration,
serialization."""

import random

import pytest

from cfkmaps.maps import (
    Ball,
    CombinatorialMap,
    MapError,
    SubgraphRootedMap,
    ball,
    canonical_key,
    component_count,
    dual,
    dual_subgraph,
    enumerate_maps,
    enumerate_rooted_maps,
    isomorphic,
    loop_count_euler,
    loop_count_trace,
    map_distance,
    map_from_text,
    map_to_text,
    validate,
)

SELF_LOOP = CombinatorialMap((1, 0), (1, 0), 0)
SINGLE_EDGE = CombinatorialMap((1, 0), (0, 1), 0)


def decorated(m, edges=(), second=None, stars=None):
    sub = frozenset(m.edges()[i] for i in edges)
    st = None if stars is None else frozenset(m.edges()[i] for i in stars)
    return SubgraphRootedMap(m, sub, second_root=second, stars=st)


def all_decorated(n):
    for m in enumerate_rooted_maps(n):
        edge_list = m.edges()
        for mask in range(1 << len(edge_list)):
            sub = frozenset(e for i, e in enumerate(edge_list) if mask >> i & 1)
            yield SubgraphRootedMap(m, sub)


def test_validate_examples():
    assert validate(SELF_LOOP) == {"v": 1, "e": 1, "f": 2}
    assert validate(SINGLE_EDGE) == {"v": 2, "e": 1, "f": 1}
    with pytest.raises(MapError, match="fixed point"):
        validate(CombinatorialMap((0, 1), (1, 0), 0))
    with pytest.raises(MapError, match="connected"):
        validate(CombinatorialMap((1, 0, 3, 2), (0, 1, 2, 3), 0))
    assert validate(CombinatorialMap.vertex_map()) == {"v": 1, "e": 0, "f": 1}


def test_dual_classic_pair():
    d = dual(SELF_LOOP)
    assert isomorphic(
        SubgraphRootedMap(d, frozenset()), SubgraphRootedMap(SINGLE_EDGE, frozenset())
    )
    assert validate(d)["v"] == 2


def test_dual_involution_and_counts():
    for n in (1, 2, 3):
        for m in enumerate_rooted_maps(n):
            counts = validate(m)
            dm = dual(m)
            dcounts = validate(dm)
            assert dcounts["v"] == counts["f"]
            assert dcounts["f"] == counts["v"]
            assert dual(dm) == m


def test_dual_subgraph():
    sm = decorated(SELF_LOOP, edges=(0,))
    ds = dual_subgraph(sm)
    assert ds.subgraph == frozenset()
    sm2 = decorated(SELF_LOOP)
    assert dual_subgraph(sm2).subgraph == frozenset(dual(SELF_LOOP).edges())
    for n in (1, 2):
        for sm in all_decorated(n):
            assert isomorphic(dual_subgraph(dual_subgraph(sm)), sm)


def test_loop_counts_examples():
    assert loop_count_euler(decorated(SELF_LOOP, edges=(0,))) == 2
    assert loop_count_euler(decorated(SELF_LOOP)) == 1
    assert loop_count_trace(decorated(SELF_LOOP, edges=(0,))) == 2
    assert loop_count_trace(decorated(SELF_LOOP)) == 1


def test_loop_count_cross_oracle_exhaustive():
    for n in (1, 2, 3):
        for sm in all_decorated(n):
            assert loop_count_euler(sm) == loop_count_trace(sm)


def test_spanning_tree_gives_one_loop():
    for n in (1, 2, 3):
        for sm in all_decorated(n):
            v = len(sm.map.vertices())
            is_tree = (
                len(sm.subgraph) == v - 1
                and component_count(sm.map, sm.subgraph) == 1
            )
            if is_tree:
                assert loop_count_euler(sm) == 1


def test_loop_bounds():
    for n in (1, 2, 3):
        values = {loop_count_euler(sm) for sm in all_decorated(n)}
        assert min(values) == 1
        assert max(values) == n + 1


def test_ball_examples():
    loop = decorated(SELF_LOOP, edges=(0,))
    b0 = ball(loop, 0)
    assert b0.sm.map.num_edges == 1  # the self-loop stays at radius zero
    edge = decorated(SINGLE_EDGE)
    assert ball(edge, 0).sm.map.num_darts == 0  # bare root vertex
    assert ball(edge, 1).sm.map.num_edges == 1
    assert ball(edge, 5).sm.map == edge.map


def test_ball_monotone():
    rng = random.Random(0)
    maps = [sm for n in (2, 3) for sm in all_decorated(n)]
    for sm in rng.sample(maps, 60):
        for r in (0, 1):
            inner = ball(sm, r)
            outer = ball(sm, r + 1)
            again = ball(outer.sm, r)
            assert canonical_key(again.sm) == canonical_key(inner.sm)


def test_map_distance():
    loop = decorated(SELF_LOOP, edges=(0,))
    edge = decorated(SINGLE_EDGE)
    assert map_distance(loop, loop) == 0.0
    assert map_distance(loop, edge) == 1.0
    # same map, different subgraph: balls differ at radius 0 for the loop
    loop2 = decorated(SELF_LOOP)
    assert map_distance(loop, loop2) == 1.0


def test_map_distance_ultrametric_on_random_triples():
    rng = random.Random(3)
    maps = [sm for n in (1, 2, 3) for sm in all_decorated(n)]
    for _ in range(150):
        a, b, c = rng.sample(maps, 3)
        dab, dbc, dac = map_distance(a, b), map_distance(b, c), map_distance(a, c)
        assert dac <= max(dab, dbc) + 1e-12
        assert dab == map_distance(b, a)


def test_enumeration_counts():
    assert len(enumerate_rooted_maps(1)) == 2
    assert len(enumerate_rooted_maps(2)) == 9
    assert len(enumerate_rooted_maps(3)) == 54
    assert len(enumerate_maps(1)) == 8
    assert len(enumerate_maps(2)) == 144
    # dedup idempotence
    first = [canonical_key(sm, True) for sm in enumerate_maps(1)]
    second = [canonical_key(sm, True) for sm in enumerate_maps(1)]
    assert first == second
    assert len(set(first)) == len(first)


def test_partition_function_identity():
    # for each fixed map, summing sqrt(q)^e(G) q^c(G) q^(-v/2) over
    # subgraphs equals summing q^(l/2), term by term via the loop formula
    from fractions import Fraction

    for q, root in ((1, 1), (4, 2)):
        for n in (1, 2, 3):
            for m in enumerate_rooted_maps(n):
                v = len(m.vertices())
                edge_list = m.edges()
                lhs = Fraction(0)
                rhs = Fraction(0)
                for mask in range(1 << len(edge_list)):
                    sub = frozenset(
                        e for i, e in enumerate(edge_list) if mask >> i & 1
                    )
                    sm = SubgraphRootedMap(m, sub)
                    c = component_count(m, sub)
                    lhs += Fraction(root) ** len(sub) * Fraction(q) ** c
                    rhs += Fraction(root) ** loop_count_euler(sm)
                assert rhs == lhs * Fraction(root) ** (-v)


def test_serialization_round_trip():
    sm = decorated(SELF_LOOP, edges=(0,), second=1, stars=(0,))
    text = map_to_text(sm)
    assert map_from_text(text) == sm
    assert map_to_text(map_from_text(text)) == text
    plain = decorated(SINGLE_EDGE)
    assert map_from_text(map_to_text(plain)) == plain
    with pytest.raises(MapError):
        map_from_text("darts=2\nalpha=0 1\nsigma=0 1\nroot=0\n")


def test_serialization_rejects_corruption():
    text = map_to_text(decorated(SELF_LOOP, edges=(0,)))
    with pytest.raises(MapError):
        map_from_text(text.replace("alpha=1 0", "alpha=1 1"))
