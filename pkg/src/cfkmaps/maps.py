"""Genus-zero combinatorial maps with a root corner.

A map is a pair of permutations on darts: ``alpha`` (fixed-point-free
involution pairing the two darts of each edge) and ``sigma`` (the
counterclockwise dart order around each vertex).  Faces are the orbits
of ``phi(d) = sigma^-1(alpha(d))``: the face lying to the left of each
dart, traversed counterclockwise.  A corner is identified with the dart
it follows, so the root corner is just a distinguished dart.

The edgeless map on one vertex is allowed (``num_darts == 0``); it shows
up as the radius-0 ball of a root vertex without self-loops.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import permutations
from typing import Iterable, Optional, Sequence


class MapError(ValueError):
    """A structural invariant of a combinatorial map is violated."""


@dataclass(frozen=True)
class CombinatorialMap:
    alpha: tuple[int, ...]
    sigma: tuple[int, ...]
    root_dart: Optional[int]

    @property
    def num_darts(self) -> int:
        return len(self.alpha)

    @property
    def num_edges(self) -> int:
        return len(self.alpha) // 2

    @staticmethod
    def vertex_map() -> "CombinatorialMap":
        """The map with one vertex and no edges."""
        return CombinatorialMap((), (), None)

    def sigma_inv(self) -> tuple[int, ...]:
        inv = [0] * self.num_darts
        for d, e in enumerate(self.sigma):
            inv[e] = d
        return tuple(inv)

    def phi(self) -> tuple[int, ...]:
        """Face permutation: next dart counterclockwise along the face
        to the left."""
        inv = self.sigma_inv()
        return tuple(inv[self.alpha[d]] for d in range(self.num_darts))

    def vertices(self) -> list[tuple[int, ...]]:
        return _cycles(self.sigma)

    def faces(self) -> list[tuple[int, ...]]:
        return _cycles(self.phi())

    def edges(self) -> list[tuple[int, int]]:
        """Edges as (small dart, large dart), sorted; the list position is
        the canonical edge id used by subgraph bitmasks."""
        return sorted(
            (d, self.alpha[d]) for d in range(self.num_darts) if d < self.alpha[d]
        )

    def edge_of(self, dart: int) -> tuple[int, int]:
        e = self.alpha[dart]
        return (dart, e) if dart < e else (e, dart)

    def vertex_of(self) -> dict[int, int]:
        """Dart -> vertex id (position in ``vertices()``)."""
        label = {}
        for v, cyc in enumerate(self.vertices()):
            for d in cyc:
                label[d] = v
        return label

    def degree_of_root_vertex(self) -> int:
        if self.root_dart is None:
            return 0
        return len(_orbit(self.sigma, self.root_dart))


def _cycles(perm: Sequence[int]) -> list[tuple[int, ...]]:
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        d = start
        while not seen[d]:
            seen[d] = True
            cyc.append(d)
            d = perm[d]
        out.append(tuple(cyc))
    return out


def _orbit(perm: Sequence[int], start: int) -> list[int]:
    out = [start]
    d = perm[start]
    while d != start:
        out.append(d)
        d = perm[d]
    return out


def validate(m: CombinatorialMap) -> dict:
    """Check the map axioms; returns ``{"v": ..., "e": ..., "f": ...}``.

    Raises :class:`MapError` naming the first violated invariant:
    alpha involution without fixed points, sigma a permutation, the
    dart action transitive (connected), and Euler characteristic 2.
    """
    n = m.num_darts
    if n == 0:
        if m.root_dart is not None:
            raise MapError("edgeless map cannot have a root dart")
        return {"v": 1, "e": 0, "f": 1}
    if len(m.sigma) != n:
        raise MapError("alpha and sigma act on different dart sets")
    if sorted(m.sigma) != list(range(n)):
        raise MapError("sigma is not a permutation of the darts")
    if sorted(m.alpha) != list(range(n)):
        raise MapError("alpha is not a permutation of the darts")
    for d in range(n):
        if m.alpha[d] == d:
            raise MapError(f"alpha has a fixed point at dart {d}")
        if m.alpha[m.alpha[d]] != d:
            raise MapError(f"alpha is not an involution at dart {d}")
    if m.root_dart is None or not 0 <= m.root_dart < n:
        raise MapError(f"root dart {m.root_dart} out of range")
    seen = {0}
    stack = [0]
    while stack:
        d = stack.pop()
        for e in (m.alpha[d], m.sigma[d]):
            if e not in seen:
                seen.add(e)
                stack.append(e)
    if len(seen) != n:
        raise MapError("map is not connected")
    v = len(m.vertices())
    e = n // 2
    f = len(m.faces())
    if v - e + f != 2:
        raise MapError(f"Euler characteristic {v - e + f} != 2 (not genus 0)")
    return {"v": v, "e": e, "f": f}


def dual(m: CombinatorialMap) -> CombinatorialMap:
    """Dual map: faces become vertices on the same darts.

    The dual rotation sends a dart around its left face (the inverse
    face permutation ``alpha . sigma``) and the dual root is the
    reversed root dart.  With this choice the double dual is the
    identity dart for dart, and the correspondence with word duality
    commutes exactly.
    """
    if m.num_darts == 0:
        return m
    new_sigma = tuple(m.alpha[m.sigma[d]] for d in range(m.num_darts))
    return CombinatorialMap(m.alpha, new_sigma, m.alpha[m.root_dart])


@dataclass(frozen=True)
class SubgraphRootedMap:
    """A rooted map with a distinguished edge subset (and all vertices).

    ``subgraph`` and ``stars`` are frozensets of edge pairs as returned
    by :meth:`CombinatorialMap.edges`.  ``second_root`` is the optional
    extra corner used by the doubly-rooted spaces.
    """

    map: CombinatorialMap
    subgraph: frozenset[tuple[int, int]]
    second_root: Optional[int] = None
    stars: Optional[frozenset[tuple[int, int]]] = None

    def __post_init__(self) -> None:
        edge_set = set(self.map.edges())
        if not set(self.subgraph) <= edge_set:
            raise MapError("subgraph contains non-edges")
        if self.stars is not None and not set(self.stars) <= edge_set:
            raise MapError("stars contain non-edges")

    def with_subgraph(self, subgraph: Iterable[tuple[int, int]]) -> "SubgraphRootedMap":
        return replace(self, subgraph=frozenset(subgraph))


@dataclass(frozen=True)
class Ball:
    """A radius-R neighborhood of the root, as a subgraph-rooted map."""

    sm: SubgraphRootedMap
    radius: int


def dual_subgraph(sm: SubgraphRootedMap) -> SubgraphRootedMap:
    """Dual map with the complementary edge set (the edges not crossed)."""
    dm = dual(sm.map)
    complement = frozenset(set(sm.map.edges()) - set(sm.subgraph))
    second = None
    if sm.second_root is not None:
        second = sm.map.alpha[sm.second_root]
    return SubgraphRootedMap(dm, complement, second_root=second)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.count = n

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            self.count -= 1


def component_count(m: CombinatorialMap, edge_subset: Iterable[tuple[int, int]]) -> int:
    """Components of (all vertices of m, given edges); isolated vertices count."""
    vertex = m.vertex_of()
    uf = _UnionFind(len(m.vertices()) if m.num_darts else 1)
    for d1, d2 in edge_subset:
        uf.union(vertex[d1], vertex[d2])
    return uf.count


def loop_count_euler(sm: SubgraphRootedMap) -> int:
    """Loop number via the Euler-style identity e(G) + 2c(G) - v(M)."""
    m = sm.map
    v = len(m.vertices()) if m.num_darts else 1
    e = len(sm.subgraph)
    c = component_count(m, sm.subgraph)
    return e + 2 * c - v


def loop_count_trace(sm: SubgraphRootedMap) -> int:
    """Loop number as c(G) + c(G-dual) - 1, computed on the dual map.

    Independent of :func:`loop_count_euler`; the two must agree on every
    input.
    """
    c_g = component_count(sm.map, sm.subgraph)
    dual_sm = dual_subgraph(sm)
    c_gd = component_count(dual_sm.map, dual_sm.subgraph)
    return c_g + c_gd - 1


def _bfs_distances(m: CombinatorialMap, root_vertex: int) -> dict[int, int]:
    vertex = m.vertex_of()
    adj: dict[int, list[int]] = {}
    for d1, d2 in m.edges():
        u, w = vertex[d1], vertex[d2]
        adj.setdefault(u, []).append(w)
        adj.setdefault(w, []).append(u)
    dist = {root_vertex: 0}
    frontier = [root_vertex]
    while frontier:
        nxt = []
        for u in frontier:
            for w in adj.get(u, ()):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def submap_on_edges(
    sm: SubgraphRootedMap, kept_edges: set[tuple[int, int]], root_scan: bool = True
) -> SubgraphRootedMap:
    """Induced map on an edge subset, rotations filtered in place.

    The root moves to the first kept dart scanning sigma from the old
    root; if the root vertex keeps no darts the result is the edgeless
    map.  Darts are relabeled in increasing order of their old ids.
    """
    m = sm.map
    kept_darts = sorted(d for e in kept_edges for d in e)
    if not kept_darts:
        return SubgraphRootedMap(CombinatorialMap.vertex_map(), frozenset())
    relabel = {d: i for i, d in enumerate(kept_darts)}
    kept_set = set(kept_darts)
    new_alpha = [0] * len(kept_darts)
    new_sigma = [0] * len(kept_darts)
    for d in kept_darts:
        new_alpha[relabel[d]] = relabel[m.alpha[d]]
        e = m.sigma[d]
        while e not in kept_set:
            e = m.sigma[e]
        new_sigma[relabel[d]] = relabel[e]
    new_root = None
    if m.root_dart is not None and root_scan:
        d = m.root_dart
        for _ in range(m.num_darts):
            if d in kept_set:
                new_root = relabel[d]
                break
            d = m.sigma[d]
        if new_root is None:
            return SubgraphRootedMap(CombinatorialMap.vertex_map(), frozenset())
    new_second = None
    if sm.second_root is not None and sm.second_root in kept_set:
        new_second = relabel[sm.second_root]
    relabel_edge = lambda e: tuple(sorted((relabel[e[0]], relabel[e[1]])))
    new_sub = frozenset(relabel_edge(e) for e in sm.subgraph if e in kept_edges)
    new_stars = None
    if sm.stars is not None:
        new_stars = frozenset(relabel_edge(e) for e in sm.stars if e in kept_edges)
    return SubgraphRootedMap(
        CombinatorialMap(tuple(new_alpha), tuple(new_sigma), new_root),
        new_sub,
        second_root=new_second,
        stars=new_stars,
    )


def ball(sm: SubgraphRootedMap, radius: int) -> Ball:
    """Vertices within graph distance ``radius`` of the root vertex and
    every edge between them, subgraph membership inherited."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    m = sm.map
    if m.num_darts == 0:
        return Ball(sm, radius)
    vertex = m.vertex_of()
    dist = _bfs_distances(m, vertex[m.root_dart])
    kept_vertices = {v for v, d in dist.items() if d <= radius}
    kept_edges = {
        e for e in m.edges() if vertex[e[0]] in kept_vertices and vertex[e[1]] in kept_vertices
    }
    inner = submap_on_edges(sm, kept_edges)
    return Ball(replace(inner, second_root=None, stars=None), radius)


def canonical_key(sm: SubgraphRootedMap, include_second_root: bool = False) -> tuple:
    """Canonical form under root-preserving isomorphism.

    Darts are relabeled in the deterministic order of a traversal from
    the root by (alpha, sigma); rooted maps are rigid, so equality of
    keys is exactly root-preserving isomorphism of the decorated maps.
    """
    m = sm.map
    if m.num_darts == 0:
        return ("vertexmap", include_second_root and sm.second_root is not None)
    order = {m.root_dart: 0}
    queue = [m.root_dart]
    while queue:
        d = queue.pop()
        for e in (m.alpha[d], m.sigma[d]):
            if e not in order:
                order[e] = len(order)
                queue.append(e)
    n = m.num_darts
    alpha = [0] * n
    sigma = [0] * n
    for d, i in order.items():
        alpha[i] = order[m.alpha[d]]
        sigma[i] = order[m.sigma[d]]
    sub = tuple(sorted(tuple(sorted((order[a], order[b]))) for a, b in sm.subgraph))
    key = (n, tuple(alpha), tuple(sigma), sub)
    if sm.stars is not None:
        key += (tuple(sorted(tuple(sorted((order[a], order[b]))) for a, b in sm.stars)),)
    if include_second_root:
        key += (order[sm.second_root] if sm.second_root is not None else None,)
    return key


def isomorphic(a: SubgraphRootedMap, b: SubgraphRootedMap, second_roots: bool = False) -> bool:
    return canonical_key(a, second_roots) == canonical_key(b, second_roots)


def map_distance(a: SubgraphRootedMap, b: SubgraphRootedMap) -> float:
    """Local distance ``2**-R*`` from the largest radius at which the
    rooted balls (with their subgraph marks) are isomorphic."""
    a = replace(a, second_root=None, stars=None)
    b = replace(b, second_root=None, stars=None)
    if canonical_key(a) == canonical_key(b):
        return 0.0
    r = 0
    while True:
        ba, bb = ball(a, r), ball(b, r)
        if canonical_key(ba.sm) != canonical_key(bb.sm):
            return 2.0 ** (-(r - 1)) if r > 0 else 1.0
        r += 1


_STANDARD_ALPHA_CACHE: dict[int, tuple[int, ...]] = {}


def _standard_alpha(num_darts: int) -> tuple[int, ...]:
    if num_darts not in _STANDARD_ALPHA_CACHE:
        a = list(range(num_darts))
        for i in range(0, num_darts, 2):
            a[i], a[i + 1] = a[i + 1], a[i]
        _STANDARD_ALPHA_CACHE[num_darts] = tuple(a)
    return _STANDARD_ALPHA_CACHE[num_darts]


def enumerate_rooted_maps(n: int) -> list[CombinatorialMap]:
    """All rooted genus-0 maps with n edges, one per isomorphism class.

    Brute force over vertex permutations with the edge involution fixed
    in standard form and the root at dart 0, deduplicated by canonical
    key; n is capped at 4 (8 darts, 40320 permutations).
    """
    if not 1 <= n <= 4:
        raise ValueError(f"enumerate_rooted_maps supports 1 <= n <= 4, got {n}")
    num_darts = 2 * n
    alpha = _standard_alpha(num_darts)
    seen = {}
    for perm in permutations(range(num_darts)):
        m = CombinatorialMap(alpha, perm, 0)
        try:
            validate(m)
        except MapError:
            continue
        key = canonical_key(SubgraphRootedMap(m, frozenset()))
        if key not in seen:
            seen[key] = m
    return [seen[k] for k in sorted(seen)]


def enumerate_maps(n: int) -> list[SubgraphRootedMap]:
    """The doubly-rooted decorated space: every rooted map with n edges,
    every edge subset, every second-root corner."""
    out = []
    for m in enumerate_rooted_maps(n):
        edges = m.edges()
        for mask in range(1 << len(edges)):
            sub = frozenset(e for i, e in enumerate(edges) if mask >> i & 1)
            for s in range(m.num_darts):
                out.append(SubgraphRootedMap(m, sub, second_root=s))
    return out


def map_to_text(sm: SubgraphRootedMap) -> str:
    """Structured text form; bit-exact round-trip with :func:`map_from_text`."""
    m = sm.map
    lines = [f"darts={m.num_darts}"]
    lines.append("alpha=" + " ".join(map(str, m.alpha)))
    lines.append("sigma=" + " ".join(map(str, m.sigma)))
    lines.append(f"root={m.root_dart if m.root_dart is not None else -1}")
    if sm.second_root is not None:
        lines.append(f"second_root={sm.second_root}")
    edges = m.edges()
    index = {e: i for i, e in enumerate(edges)}
    submask = ["0"] * len(edges)
    for e in sm.subgraph:
        submask[index[e]] = "1"
    lines.append("subgraph=" + "".join(submask))
    if sm.stars is not None:
        starmask = ["0"] * len(edges)
        for e in sm.stars:
            starmask[index[e]] = "1"
        lines.append("stars=" + "".join(starmask))
    return "\n".join(lines) + "\n"


def map_from_text(text: str) -> SubgraphRootedMap:
    fields: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        fields[key] = value
    try:
        num = int(fields["darts"])
        alpha = tuple(map(int, fields["alpha"].split())) if fields["alpha"] else ()
        sigma = tuple(map(int, fields["sigma"].split())) if fields["sigma"] else ()
        root = int(fields["root"])
    except KeyError as exc:
        raise MapError(f"missing field {exc} in map text") from exc
    if len(alpha) != num or len(sigma) != num:
        raise MapError("dart count disagrees with permutation length")
    m = CombinatorialMap(alpha, sigma, None if root < 0 else root)
    validate(m)
    edges = m.edges()

    def mask_to_edges(mask: str) -> frozenset:
        if len(mask) != len(edges):
            raise MapError("edge bitmask length mismatch")
        return frozenset(e for i, e in enumerate(edges) if mask[i] == "1")

    sub = mask_to_edges(fields.get("subgraph", "0" * len(edges)))
    stars = mask_to_edges(fields["stars"]) if "stars" in fields else None
    second = int(fields["second_root"]) if "second_root" in fields else None
    return SubgraphRootedMap(m, sub, second_root=second, stars=stars)
