"""The three-step correspondence between fully reduced words and
doubly-rooted subgraph-decorated maps, and its inverse.

Step 1 turns a word whose letters are all matched into its arch graph:
the 2n letter positions on a cycle (segments plus one wrap-around edge)
with one non-crossing arch per matched pair, drawn above the axis for
hamburger pairs and below for cheeseburger pairs.  Step 2 dualizes the
arch graph into a triangulation, splits the dual edges into a
quadrangulation plus two trees, and contracts the quadrangulation to a
map with a distinguished spanning tree.  Step 3 toggles tree membership
of every edge whose order was flexible.

The inverse re-runs the corner tour of the map from the second root,
choosing each arch's side so that the induced word obeys the
last-in-first-out order-fulfilment discipline; the choice is forced at
every closure, and a final forward pass verifies the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .maps import (
    CombinatorialMap,
    MapError,
    SubgraphRootedMap,
    canonical_key,
    component_count,
    validate,
)
from .words import Word, dual_word, is_burger, reduce_word


class BijectionError(ValueError):
    """Input outside the domain/image of the correspondence."""


# dart ids in the arch graph: position t owns 3t (east along the cycle),
# 3t+1 (west along the cycle), 3t+2 (its arch end)
def _east(t: int) -> int:
    return 3 * t


def _west(t: int) -> int:
    return 3 * t + 1


def _arch(t: int) -> int:
    return 3 * t + 2


@dataclass(frozen=True)
class ArchGraph:
    """Decorated cycle-plus-arches map encoding a fully matched word."""

    map: CombinatorialMap
    n: int  # number of arches
    partner: tuple[int, ...]  # position -> matched position
    upper: tuple[bool, ...]  # position -> is its arch above the axis
    starred: frozenset[tuple[int, int]]  # arch edges with a flexible order
    root_dart: int  # oriented edge from index 0 to index -1
    second_dart: int  # oriented edge from first to last position
    word: Word

    @property
    def cycle_edges(self) -> frozenset[tuple[int, int]]:
        m = self.map
        return frozenset(m.edge_of(_east(t)) for t in range(2 * self.n))

    @property
    def arch_edges(self) -> frozenset[tuple[int, int]]:
        m = self.map
        return frozenset(m.edge_of(_arch(t)) for t in range(2 * self.n))


def build_arch_graph(w: Word) -> ArchGraph:
    """Step 1.  Requires every letter of ``w`` to be matched."""
    red = reduce_word(w)
    if not red.is_empty:
        raise BijectionError(
            f"word reduces to {red.reduced.letters!r}, not the empty word"
        )
    two_n = len(w)
    if two_n == 0:
        raise BijectionError("empty word has no arch graph")
    n = two_n // 2
    k = -w.offset
    if not 0 <= k < two_n:
        raise BijectionError(
            f"offset {w.offset} does not place index 0 inside the window"
        )
    partner = [0] * two_n
    upper = [False] * two_n
    for idx, mate in red.matching.phi.items():
        t = idx - w.offset
        tm = int(mate) - w.offset
        partner[t] = tm
        burger_pos = min(t, tm)
        upper[t] = w.letters[burger_pos] == "a"
    alpha = [0] * (3 * two_n)
    sigma = [0] * (3 * two_n)
    for t in range(two_n):
        t_next = (t + 1) % two_n
        alpha[_east(t)] = _west(t_next)
        alpha[_west(t_next)] = _east(t)
        alpha[_arch(t)] = _arch(partner[t])
        if upper[t]:
            sigma[_east(t)] = _arch(t)
            sigma[_arch(t)] = _west(t)
            sigma[_west(t)] = _east(t)
        else:
            sigma[_east(t)] = _west(t)
            sigma[_west(t)] = _arch(t)
            sigma[_arch(t)] = _east(t)
    starred = set()
    for t in range(two_n):
        if w.letters[t] == "F":
            d = _arch(t)
            e = alpha[d]
            starred.add((min(d, e), max(d, e)))
    root = _west(k)
    second = _west(0)
    m = CombinatorialMap(tuple(alpha), tuple(sigma), root)
    return ArchGraph(
        m, n, tuple(partner), tuple(upper), frozenset(starred), root, second, w
    )


def arch_graph_to_word(ag: ArchGraph) -> Word:
    """Reconstruct the word using only the map, the cycle/arch edge
    partition, the star marks and the two oriented roots."""
    m = ag.map
    two_n = 2 * ag.n
    cycle_darts = {d for e in ag.cycle_edges for d in e}

    def other_cycle_dart(d: int) -> int:
        # the second cycle dart at d's vertex (vertices are trivalent)
        e = m.sigma[d]
        while e == d or e not in cycle_darts:
            e = m.sigma[e]
        return e

    def arch_dart_at(d: int) -> int:
        e = m.sigma[d]
        while e in cycle_darts:
            e = m.sigma[e]
        return e

    # walk the cycle eastward: alpha of an east dart is the next
    # position's west dart, whose vertex-mate cycle dart points east
    east = [0] * two_n
    d = m.alpha[ag.second_dart]  # east dart of the last position
    for t in range(two_n):
        west = m.alpha[d]
        d = other_cycle_dart(west)
        east[t] = d
    if m.alpha[east[-1]] != ag.second_dart:
        raise BijectionError("cycle edges do not close after 2n steps")
    pos_of_east = {e: t for t, e in enumerate(east)}
    letters = [""] * two_n
    for t in range(two_n):
        e = east[t]
        arch_d = arch_dart_at(e)
        mate = m.alpha[arch_d]
        # position of the arch mate: via the east dart at its vertex
        mate_east = mate
        while mate_east not in pos_of_east:
            mate_east = m.sigma[mate_east]
        t2 = pos_of_east[mate_east]
        up = m.sigma[e] == arch_d  # upper rotation puts the arch after east
        if t < t2:
            letters[t] = "a" if up else "b"
        else:
            edge = m.edge_of(arch_d)
            letters[t] = "F" if edge in ag.starred else ("A" if up else "B")
    k = (pos_of_east[m.alpha[ag.root_dart]] + 1) % two_n
    return Word(-k, "".join(letters))


def _dart_kind(d: int) -> int:
    return d % 3


@dataclass(frozen=True)
class TriangulationSplit:
    """Dual of the arch graph with its edges classified."""

    delta: CombinatorialMap
    q_edges: frozenset[tuple[int, int]]
    tree_edges: frozenset[tuple[int, int]]  # duals of the upper arches
    dual_tree_edges: frozenset[tuple[int, int]]  # duals of the lower arches
    black_vertices: frozenset[int]  # delta vertex ids on the upper side


def split_triangulation(ag: ArchGraph) -> TriangulationSplit:
    """Step 2a.  Dualize and classify the dual edges."""
    a = ag.map
    phi = a.phi()
    delta = CombinatorialMap(a.alpha, phi, a.alpha[a.sigma[a.root_dart]])
    q_edges = ag.cycle_edges
    tree, dual_tree = set(), set()
    for t in range(2 * ag.n):
        e = a.edge_of(_arch(t))
        (tree if ag.upper[t] else dual_tree).add(e)
    blacks = set()
    for vid, cyc in enumerate(delta.vertices()):
        if any(_dart_kind(d) == 0 for d in cyc):
            blacks.add(vid)
    return TriangulationSplit(
        delta, frozenset(q_edges), frozenset(tree), frozenset(dual_tree), frozenset(blacks)
    )


@dataclass(frozen=True)
class TutteResult:
    """Contracted map with its spanning tree and dart bookkeeping."""

    map: CombinatorialMap  # provisionally rooted at dart 0
    tree: frozenset[tuple[int, int]]
    dart_of: dict[int, int]  # black quadrangulation dart -> map dart
    edge_of_diagonal: dict[tuple[int, int], tuple[int, int]]


def tutte_map(ts: TriangulationSplit) -> TutteResult:
    """Step 2b.  Contract each quadrangle to an edge joining its two
    corners on the tree side; the other tree becomes the dual tree."""
    delta = ts.delta
    n_darts = delta.num_darts
    q_darts = {d for e in ts.q_edges for d in e}
    vertex = delta.vertex_of()
    # rotation of the quadrangulation: skip diagonal darts, remembering
    # which quadrangulation corner hosts each skipped diagonal dart
    sigma_q = {}
    host = {}
    for d in q_darts:
        e = delta.sigma[d]
        while e not in q_darts:
            host[e] = d
            e = delta.sigma[e]
        sigma_q[d] = e
    sigma_q_inv = {v: k for k, v in sigma_q.items()}
    phi_q = {d: sigma_q_inv[delta.alpha[d]] for d in q_darts}
    blacks = [d for d in sorted(q_darts) if vertex[d] in ts.black_vertices]
    relabel = {d: i for i, d in enumerate(blacks)}
    alpha_m = [0] * len(blacks)
    sigma_m = [0] * len(blacks)
    for d in blacks:
        alpha_m[relabel[d]] = relabel[phi_q[phi_q[d]]]
        sigma_m[relabel[d]] = relabel[sigma_q[d]]
    m = CombinatorialMap(tuple(alpha_m), tuple(sigma_m), 0 if blacks else None)
    # associate each diagonal with the quadrangle (face orbit) hosting it,
    # then with that quadrangle's contracted edge
    face_id = {}
    seen = set()
    orbit_black_dart = {}
    for d in q_darts:
        if d in seen:
            continue
        orbit = []
        e = d
        while e not in seen:
            seen.add(e)
            orbit.append(e)
            e = phi_q[e]
        fid = min(orbit)
        for e in orbit:
            face_id[e] = fid
        for e in orbit:
            if vertex[e] in ts.black_vertices:
                orbit_black_dart[fid] = e
                break
    edge_of_diagonal = {}
    tree = set()
    for diag in ts.tree_edges | ts.dual_tree_edges:
        fids = {face_id[host[diag[0]]], face_id[host[diag[1]]]}
        if len(fids) != 1:
            raise BijectionError("diagonal darts land in different quadrangles")
        bd = orbit_black_dart[fids.pop()]
        md = relabel[bd]
        m_edge = m.edge_of(md)
        edge_of_diagonal[diag] = m_edge
        if diag in ts.tree_edges:
            tree.add(m_edge)
    return TutteResult(m, frozenset(tree), relabel, edge_of_diagonal)


def psi(w: Word) -> SubgraphRootedMap:
    """The full word-to-map correspondence on a fully matched word.

    Returns the doubly-rooted map with the toggled subgraph; the starred
    edges are kept on the result for bookkeeping.
    """
    ag = build_arch_graph(w)
    ts = split_triangulation(ag)
    tr = tutte_map(ts)
    a = ag.map
    root_m = tr.dart_of[a.alpha[ag.root_dart]]
    second_m = tr.dart_of[a.alpha[ag.second_dart]]
    stars_m = frozenset(tr.edge_of_diagonal[e] for e in ag.starred)
    subgraph = frozenset(tr.tree ^ stars_m)
    final_map = CombinatorialMap(tr.map.alpha, tr.map.sigma, root_m)
    return SubgraphRootedMap(final_map, subgraph, second_root=second_m, stars=stars_m)


def tree_of_psi(sm: SubgraphRootedMap) -> frozenset[tuple[int, int]]:
    """Spanning tree behind a bijection image (subgraph with stars untoggled)."""
    if sm.stars is None:
        raise BijectionError("map carries no star bookkeeping")
    return frozenset(set(sm.subgraph) ^ set(sm.stars))


def _tour_completions(
    m: CombinatorialMap, subgraph: frozenset, s: int
) -> Iterator[tuple[list[int], list[str]]]:
    """Depth-first search over arch-side choices for the corner tour.

    Yields (darts by position, letters by position) for every assignment
    whose closures obey the order-fulfilment stack discipline.
    """
    two_n = m.num_darts
    alpha, sigma = m.alpha, m.sigma
    vertex = m.vertex_of()
    darts: list[int] = []
    letters: list[str] = []
    open_at: dict[tuple[int, int], int] = {}
    side_of: dict[tuple[int, int], bool] = {}
    closed: set[tuple[int, int]] = set()
    open_a: list[int] = []
    open_b: list[int] = []
    visited = {s}
    # the tour consumes the darts of each vertex in rotation order, so an
    # arrival at a seen vertex must continue where the last visit stopped
    used_at_vertex: dict[int, list[int]] = {vertex[s]: [s]}

    def arrival_ok(nd: int) -> bool:
        used = used_at_vertex.get(vertex[nd])
        return not used or sigma[used[-1]] == nd

    def push_arrival(nd: int) -> None:
        used_at_vertex.setdefault(vertex[nd], []).append(nd)

    def pop_arrival(nd: int) -> None:
        used_at_vertex[vertex[nd]].pop()

    def step(t: int, prev: int) -> Iterator[None]:
        if t == two_n:
            if not open_at:
                yield None
            return
        e = m.edge_of(prev)
        if e in closed:
            return
        if e in open_at:
            u = open_at[e]
            up = side_of[e]
            in_tree = up
            star = (e in subgraph) != in_tree
            if star:
                last_open = max(
                    open_a[-1] if open_a else -1, open_b[-1] if open_b else -1
                )
                if last_open != u:
                    return
                letter = "F"
            elif up:
                if not open_a or open_a[-1] != u:
                    return
                letter = "A"
            else:
                if not open_b or open_b[-1] != u:
                    return
                letter = "B"
            nxt = sigma[alpha[prev]] if in_tree else sigma[prev]
            if t < two_n - 1:
                if nxt in visited:
                    return
            elif nxt != s:
                return
            if not arrival_ok(nxt):
                return
            stack = open_a if up else open_b
            stack.pop()
            del open_at[e]
            closed.add(e)
            darts.append(nxt)
            letters.append(letter)
            if nxt != s:
                visited.add(nxt)
            push_arrival(nxt)
            yield from step(t + 1, nxt)
            pop_arrival(nxt)
            if nxt != s:
                visited.discard(nxt)
            darts.pop()
            letters.pop()
            closed.discard(e)
            open_at[e] = u
            stack.append(u)
        else:
            if t == two_n - 1:
                return  # the last letter always closes an arch
            for up in (True, False):
                nxt = sigma[alpha[prev]] if up else sigma[prev]
                if nxt in visited or not arrival_ok(nxt):
                    continue
                open_at[e] = t
                side_of[e] = up
                (open_a if up else open_b).append(t)
                darts.append(nxt)
                letters.append("a" if up else "b")
                visited.add(nxt)
                push_arrival(nxt)
                yield from step(t + 1, nxt)
                pop_arrival(nxt)
                visited.discard(nxt)
                darts.pop()
                letters.pop()
                (open_a if up else open_b).pop()
                del open_at[e]
                del side_of[e]

    for _ in step(0, s):
        yield list(darts), list(letters)


def psi_inverse(dm: SubgraphRootedMap) -> Word:
    """Invert :func:`psi` on a doubly-rooted subgraph-decorated map.

    Raises :class:`BijectionError` when the input is not an image (the
    tour search finds no stack-consistent word, or the forward check
    fails)."""
    if dm.second_root is None:
        raise BijectionError("inverse needs a doubly-rooted map")
    m = dm.map
    try:
        validate(m)
    except MapError as exc:
        raise BijectionError(f"invalid map: {exc}") from exc
    two_n = m.num_darts
    target = canonical_key(
        SubgraphRootedMap(m, dm.subgraph, second_root=dm.second_root),
        include_second_root=True,
    )
    for darts, letters in _tour_completions(m, dm.subgraph, dm.second_root):
        t_r = darts.index(m.root_dart)
        k = (t_r + 1) % two_n
        word = Word(-k, "".join(letters))
        image = psi(word)
        key = canonical_key(
            SubgraphRootedMap(image.map, image.subgraph, second_root=image.second_root),
            include_second_root=True,
        )
        if key == target:
            return word
    raise BijectionError("map is not in the image of the correspondence")


def loop_count_of_word(w: Word) -> int:
    """Loops of the image, predicted from the word: one plus its F count."""
    return 1 + w.letters.count("F")


def dual_image(sm: SubgraphRootedMap) -> SubgraphRootedMap:
    """Dual map, complementary subgraph, corner-exchanged roots; the
    counterpart of word duality under the correspondence."""
    from .maps import dual_subgraph

    out = dual_subgraph(
        SubgraphRootedMap(sm.map, sm.subgraph, second_root=sm.second_root)
    )
    if sm.stars is None:
        return out
    return SubgraphRootedMap(
        out.map, out.subgraph, second_root=out.second_root, stars=sm.stars
    )


# ---------------------------------------------------------------------------
# the maximal-loop correspondence with percolated plane trees


def loop_tree_encode(
    sm: SubgraphRootedMap,
) -> tuple[CombinatorialMap, frozenset[tuple[int, int]]]:
    """Split every subgraph self-loop into a marked tree edge.

    Requires all subgraph edges to be self-loops and the complement to
    be a tree; those are exactly the maps with the maximal loop count.
    Returns the rooted plane tree and the set of marked (ex-loop) edges.
    """
    m = sm.map
    vertex = m.vertex_of()
    for d1, d2 in sm.subgraph:
        if vertex[d1] != vertex[d2]:
            raise BijectionError("subgraph edge is not a self-loop")
    rest = set(m.edges()) - set(sm.subgraph)
    v = len(m.vertices())
    if len(rest) != v - 1 or component_count(m, rest) != 1:
        raise BijectionError("complement of the subgraph is not a spanning tree")
    sigma = list(m.sigma)
    for d, d2 in sorted(sm.subgraph):
        # rotation at the loop's vertex: (d, x..., d2, y...); close the
        # two halves into separate cycles to divide the vertex
        x_last = d
        while sigma[x_last] != d2:
            x_last = sigma[x_last]
        y_last = d2
        while sigma[y_last] != d:
            y_last = sigma[y_last]
        sigma[x_last] = d
        sigma[y_last] = d2
    tree = CombinatorialMap(m.alpha, tuple(sigma), m.root_dart)
    validate(tree)
    if len(tree.faces()) != 1:
        raise BijectionError("split result is not a tree")
    return tree, frozenset(sm.subgraph)


def loop_tree_decode(
    tree: CombinatorialMap, subset: frozenset[tuple[int, int]]
) -> SubgraphRootedMap:
    """Inverse of :func:`loop_tree_encode`: contract each marked tree
    edge back into a self-loop at a merged vertex."""
    validate(tree)
    if len(tree.faces()) != 1:
        raise BijectionError("input map is not a plane tree")
    if not subset <= set(tree.edges()):
        raise BijectionError("marked subset contains non-edges")
    sigma = list(tree.sigma)
    for d, d2 in sorted(subset, reverse=True):
        x_last = d
        while sigma[x_last] != d:
            x_last = sigma[x_last]
        y_last = d2
        while sigma[y_last] != d2:
            y_last = sigma[y_last]
        sigma[x_last] = d2
        sigma[y_last] = d
    merged = CombinatorialMap(tree.alpha, tuple(sigma), tree.root_dart)
    validate(merged)
    return SubgraphRootedMap(merged, frozenset(subset))


# ---------------------------------------------------------------------------
# plane tree helpers (balanced-parenthesis encodings)


def plane_tree_from_parens(parens: str) -> CombinatorialMap:
    """Rooted plane tree from a balanced parenthesis word.

    Each '(' opens a new child edge; darts come in (down, up) pairs
    numbered in opening order, and the root dart is the first child.
    """
    n = len(parens) // 2
    if n == 0 or parens.count("(") != n or len(parens) != 2 * n:
        raise ValueError("need a nonempty balanced parenthesis word")
    alpha = [0] * (2 * n)
    rotations: list[list[int]] = [[]]
    stack = [0]
    next_edge = 0
    for c in parens:
        if c == "(":
            down, up = 2 * next_edge, 2 * next_edge + 1
            next_edge += 1
            alpha[down], alpha[up] = up, down
            rotations[stack[-1]].append(down)
            rotations.append([up])
            stack.append(len(rotations) - 1)
        else:
            if len(stack) == 1:
                raise ValueError("unbalanced parentheses")
            stack.pop()
    if len(stack) != 1 or next_edge != n:
        raise ValueError("unbalanced parentheses")
    sigma = [0] * (2 * n)
    for rot in rotations:
        for i, d in enumerate(rot):
            sigma[rot[i - 1]] = d
    return CombinatorialMap(tuple(alpha), tuple(sigma), 0)


def enumerate_plane_trees(n: int) -> list[CombinatorialMap]:
    """All rooted plane trees with n edges (Catalan many)."""
    words: list[str] = []

    def rec(prefix: str, open_count: int, closed: int) -> None:
        if len(prefix) == 2 * n:
            words.append(prefix)
            return
        if open_count < n:
            rec(prefix + "(", open_count + 1, closed)
        if closed < open_count:
            rec(prefix + ")", open_count, closed + 1)

    rec("", 0, 0)
    return [plane_tree_from_parens(w) for w in words]
