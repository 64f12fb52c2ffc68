"""Infinite-volume machinery: the burger-count walk, root-degree
statistics, and certified neighborhoods of the limit map.

A bi-infinite word is only ever seen through a finite window, so every
quantity here comes with a stopping rule.  The map structure is read off
the matched window directly: vertices of the limit map are the faces of
the arch diagram above the axis, identified by their innermost covering
arch; the edge joining two faces is the arch between them, marked as
subgraph according to its side and whether its order was flexible.  A
face is safe to use once its covering arch closes inside the window:
same-side arches cannot cross it, so nothing outside the window can
change the face's boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _kernels
from .bijection import loop_tree_decode
from .maps import Ball, CombinatorialMap, SubgraphRootedMap
from .model import ModelParams
from .sampler import InfiniteWordSource, letters_to_codes
from .words import Word, reduce_word

DEFAULT_WINDOW_CAP = 1 << 24  # total letters


class WindowCapExceeded(RuntimeError):
    """The window grew to its cap before the quantity stabilized."""

    def __init__(self, message: str, partial_radius: Optional[int] = None):
        super().__init__(message)
        self.partial_radius = partial_radius


class _NeedGrow(Exception):
    """Internal: the current window is too small to decide."""


class MatchedWindow:
    """A window of a bi-infinite word together with its stack matching.

    Backed either by an extendable source or by a fixed finite word (for
    embedding checks); growth doubles the half-width.  Matches already
    made never change when the window grows, so resolved structure stays
    valid across growth.
    """

    def __init__(
        self,
        source: Union[InfiniteWordSource, Word],
        start_halfwidth: int = 64,
        cap: int = DEFAULT_WINDOW_CAP,
    ):
        self.cap = cap
        if isinstance(source, Word):
            self.fixed = True
            self.lo = source.offset
            self.hi = source.offset + len(source)
            self.letters = letters_to_codes(source.letters)
            self.phi = _kernels.match_letters(self.letters)
            self.source = None
        else:
            self.fixed = False
            self.source = source
            m = max(16, start_halfwidth)
            self.lo, self.hi = -m, m
            self._rematch()

    def _rematch(self) -> None:
        m = -self.lo
        self.letters = np.asarray(self.source.window_codes(m))
        self.phi = _kernels.match_letters(self.letters)

    def grow(self) -> None:
        if self.fixed:
            raise _NeedGrow("fixed window cannot grow")
        if 2 * (self.hi - self.lo) > self.cap:
            raise WindowCapExceeded(
                f"window cap {self.cap} letters reached at half-width {-self.lo}"
            )
        self.lo *= 2
        self.hi *= 2
        self._rematch()

    def contains(self, i: int) -> bool:
        return self.lo <= i < self.hi

    def letter(self, i: int) -> int:
        if not self.contains(i):
            raise _NeedGrow(f"index {i} outside window")
        return int(self.letters[i - self.lo])

    def partner(self, i: int) -> int:
        """Matched partner of index i; raises if unmatched in-window."""
        if not self.contains(i):
            raise _NeedGrow(f"index {i} outside window")
        p = int(self.phi[i - self.lo])
        if p < 0:
            raise _NeedGrow(f"letter at {i} unmatched within window")
        return p + self.lo

    def is_matched(self, i: int) -> bool:
        return self.contains(i) and int(self.phi[i - self.lo]) >= 0

    def arch_at(self, i: int) -> tuple[int, int, bool, bool]:
        """(burger pos, order pos, is upper, is flexible) of i's arch."""
        j = self.partner(i)
        u, q = (i, j) if i < j else (j, i)
        upper = self.letter(u) == 0
        star = self.letter(q) == 4
        return u, q, upper, star


@dataclass(frozen=True)
class FaceData:
    """Resolved boundary of one vertex of the limit map (an upper face).

    ``entries`` lists, west to east, one boundary interval per incident
    edge: (interval start x, arch (u, q), upper?, in subgraph?, interval
    start of the arch's other end).
    """

    face_id: tuple[int, int]  # innermost covering upper arch (j, j')
    entries: tuple[tuple[int, tuple[int, int], bool, bool, int], ...]

    @property
    def degree(self) -> int:
        return len(self.entries)

    def neighbors_intervals(self) -> list[int]:
        return [e[4] for e in self.entries]


class LazyInfiniteMap:
    """Local structure of the limit map, resolved face by face.

    Faces are addressed by their covering arch; the face above the unit
    interval [x, x+1] is found by scanning west for an upper arch that
    closes over it, skipping the spans of closed upper arches (lower
    arches cannot bound an upper face, but upper feet may hide inside
    their spans, so lower spans are scanned through).
    """

    def __init__(self, window: MatchedWindow):
        self.window = window
        self._face_of: dict[int, tuple[int, int]] = {}
        self._faces: dict[tuple[int, int], FaceData] = {}

    def grow(self) -> None:
        self.window.grow()

    def face_of_interval(self, x: int) -> tuple[int, int]:
        """Covering-arch id of the upper face above [x, x+1].

        Scans west, stepping over cheeseburger letters (their arches lie
        below the axis whatever their match) and skipping the spans of
        upper arches closed in-window; stops at the first hamburger
        whose order lies east of x.  Letters whose side or span cannot
        be decided inside the window force growth.
        """
        if x in self._face_of:
            return self._face_of[x]
        w = self.window
        y = x
        while True:
            if not w.contains(y):
                raise _NeedGrow(f"scan for covering arch left window at {y}")
            c = w.letter(y)
            if c in (1, 3):  # cheeseburger or its order: below the axis
                y -= 1
                continue
            matched = w.is_matched(y)
            if not matched:
                raise _NeedGrow(f"cannot side/span letter at {y} in-window")
            p = w.partner(y)
            if c == 0:  # hamburger: upper-arch left foot
                if p <= x:
                    raise AssertionError("unskipped upper arch east of scan")
                self._face_of[x] = (y, p)
                return (y, p)
            if c == 2 or w.letter(p) == 0:  # order closing an upper arch
                y = p - 1
            else:  # flexible order on a cheeseburger
                y -= 1

    def resolve_face(self, fid: tuple[int, int]) -> FaceData:
        """Boundary walk of the face inside covering arch fid = (j, j')."""
        if fid in self._faces:
            return self._faces[fid]
        w = self.window
        j, jp = fid
        entries = []
        x = j
        while x < jp:
            y = x + 1
            u, q, upper, star = w.arch_at(y)
            in_g = upper != star
            other = u if y == q else q
            entries.append((x, (u, q), upper, in_g, other - 1))
            if upper and y == u:
                x = q  # child arch: its span is not on this boundary
            elif upper and y == q:
                if y != jp:
                    raise AssertionError("upper arch closes inside its parent")
                break  # covering arch reached: boundary complete
            else:
                x = y
        fd = FaceData(fid, tuple(entries))
        self._faces[fid] = fd
        return fd

    def root_face(self) -> tuple[int, int]:
        return self.face_of_interval(-1)


@dataclass(frozen=True)
class BurgerWalk:
    """Increments of the net-burger walk along a word's domain.

    ``increments[i - offset]`` is the step of (hamburger count, cheese-
    burger count) after reading letter i, or None for an order that is
    unmatched in the word.  ``position(k)`` anchors the walk at index 0.
    """

    offset: int
    increments: tuple[Optional[tuple[int, int]], ...]

    def domain(self) -> range:
        return range(self.offset, self.offset + len(self.increments))

    def increment(self, i: int) -> Optional[tuple[int, int]]:
        return self.increments[i - self.offset]

    def position(self, k: int) -> tuple[int, int]:
        """Walk value Z_k, with Z_0 = (0, 0); defined when every letter
        between 0 and k has a defined increment."""
        lo = self.offset
        hi = self.offset + len(self.increments)
        if not lo <= k <= hi:
            raise IndexError(f"walk position {k} outside [{lo}, {hi}]")
        x = y = 0
        if k >= 0:
            anchor = max(lo, 0)
            for i in range(anchor, k):
                inc = self.increments[i - self.offset]
                if inc is None:
                    raise ValueError(f"walk undefined across unmatched order at {i}")
                x += inc[0]
                y += inc[1]
        else:
            for i in range(k, min(hi, 0)):
                inc = self.increments[i - self.offset]
                if inc is None:
                    raise ValueError(f"walk undefined across unmatched order at {i}")
                x -= inc[0]
                y -= inc[1]
        return x, y


def burger_walk(w: Word, matching=None) -> BurgerWalk:
    """Walk increments from a word and its matching (recomputed if not
    given): +1 on the first coordinate per hamburger, -1 per letter
    consuming a hamburger; same on the second coordinate for
    cheeseburgers.  Unmatched orders have no increment."""
    if matching is None:
        matching = reduce_word(w).matching
    incs: list[Optional[tuple[int, int]]] = []
    for i in w.domain():
        c = w[i]
        if c == "a":
            incs.append((1, 0))
        elif c == "b":
            incs.append((0, 1))
        else:
            p = matching.phi.get(i)
            if p is None or p in (math.inf, -math.inf):
                incs.append(None)
            elif w[int(p)] == "a":
                incs.append((-1, 0))
            else:
                incs.append((0, -1))
    return BurgerWalk(w.offset, tuple(incs))


def w_infty_window_check(w: Word, k: int) -> tuple[int, int]:
    """Counts of hamburgers and cheeseburgers left on the stack of the
    window's prefix strictly before k: a growing lower bound for the
    everything-matches-eventually membership conditions."""
    prefix = w.restrict(w.offset, k)
    stack = reduce_word(prefix).lowercase_residue.letters
    return stack.count("a"), stack.count("b")


@dataclass(frozen=True)
class RootDegreeStats:
    """First hits of -1 by the hamburger walk on both sides of 0 and the
    zero-visit counts between them."""

    i0: int
    j0: int
    n0: int
    n0_plus: int
    halfwidth: int


def pending_indicator(w: Word) -> bool:
    """True when the root edge of the image map is pending: a hamburger
    at index -1 whose order at index 0 is plain or flexible."""
    return w[-1] == "a" and w[0] in ("A", "F")


def _x_increment(window: MatchedWindow, i: int) -> Optional[int]:
    c = window.letter(i)
    if c == 0:
        return 1
    if c == 1:
        return 0
    p = int(window.phi[i - window.lo])
    if p < 0:
        return None
    return -1 if int(window.letters[p]) == 0 else 0


def root_counts(
    source: Union[InfiniteWordSource, MatchedWindow],
    start_halfwidth: int = 64,
    cap: int = DEFAULT_WINDOW_CAP,
) -> RootDegreeStats:
    """Expand the window until the hamburger walk's first hits of -1 on
    both sides of 0 are resolved; count its zero visits in between."""
    window = (
        source
        if isinstance(source, MatchedWindow)
        else MatchedWindow(source, start_halfwidth, cap)
    )
    while True:
        try:
            x = 0
            j0 = None
            n0_plus = 1
            i = 0
            while True:
                inc = _x_increment(window, i)
                if inc is None:
                    raise _NeedGrow(f"undefined increment at {i}")
                x += inc
                if x == -1:
                    j0 = i + 1
                    break
                if x == 0:
                    n0_plus += 1
                i += 1
            x = 0
            i0 = None
            n0 = n0_plus
            i = -1
            while True:
                inc = _x_increment(window, i)
                if inc is None:
                    raise _NeedGrow(f"undefined increment at {i}")
                x -= inc
                if x == -1:
                    i0 = i
                    break
                if x == 0:
                    n0 += 1
                i -= 1
            return RootDegreeStats(i0, j0, n0, n0_plus, -window.lo)
        except _NeedGrow:
            window.grow()


@dataclass(frozen=True)
class BallCertificate:
    """A certified radius-R neighborhood of the limit map's root.

    ``witnesses`` maps each used vertex (face id) to its covering arch;
    certification means every face within radius R+1 resolved inside the
    window, which pins the ball independently of all unseen letters.
    """

    ball: Ball
    halfwidth: int
    certified: bool
    witnesses: dict[tuple[int, int], tuple[int, int]]
    face_of_vertex: dict[int, tuple[int, int]] = field(default_factory=dict)


def _assemble_ball(
    lim: LazyInfiniteMap, radius: int
) -> tuple[SubgraphRootedMap, dict, dict]:
    """BFS the face graph to radius+1 and build the induced ball."""
    root = lim.root_face()
    dist = {root: 0}
    frontier = [root]
    faces = {root: lim.resolve_face(root)}
    while frontier:
        nxt = []
        for fid in frontier:
            fd = faces[fid]
            for x in fd.neighbors_intervals():
                nid = lim.face_of_interval(x)
                if nid not in dist:
                    dist[nid] = dist[fid] + 1
                    # faces beyond the radius only need their distance
                    if dist[nid] <= radius:
                        faces[nid] = lim.resolve_face(nid)
                        nxt.append(nid)
        frontier = nxt
    kept = {fid for fid, d in dist.items() if d <= radius}
    # incidences: (face, entry slot) per kept edge end
    darts = []
    incidence_of = {}
    for fid in sorted(kept):
        fd = faces[fid]
        for slot, (x, arch, upper, in_g, other_x) in enumerate(fd.entries):
            nid = lim.face_of_interval(other_x)
            if nid in kept:
                incidence_of[(fid, x)] = len(darts)
                darts.append((fid, slot, x, arch, upper, in_g, other_x))
    if not darts:
        sm = SubgraphRootedMap(CombinatorialMap.vertex_map(), frozenset())
        return sm, dist, {0: root}
    sigma = [0] * len(darts)
    alpha = [0] * len(darts)
    for d, (fid, slot, x, arch, upper, in_g, other_x) in enumerate(darts):
        fd = faces[fid]
        nxt_slot = slot
        while True:
            nxt_slot = (nxt_slot + 1) % len(fd.entries)
            key = (fid, fd.entries[nxt_slot][0])
            if key in incidence_of:
                sigma[d] = incidence_of[key]
                break
        u, q = arch
        other_fid = lim.face_of_interval(other_x)
        alpha[d] = incidence_of[(other_fid, other_x)]
    # root corner: the interval [-1, 0] slot of the root face, or the
    # next kept slot scanning the rotation eastward
    root_fd = faces[root]
    root_dart = None
    slots = [e[0] for e in root_fd.entries]
    if -1 in slots:
        start = slots.index(-1)
    else:
        raise AssertionError("root face does not contain the interval [-1, 0]")
    for off in range(len(slots)):
        key = (root, slots[(start + off) % len(slots)])
        if key in incidence_of:
            root_dart = incidence_of[key]
            break
    if root_dart is None:
        sm = SubgraphRootedMap(CombinatorialMap.vertex_map(), frozenset())
        return sm, dist, {0: root}
    subgraph = set()
    for d, (fid, slot, x, arch, upper, in_g, other_x) in enumerate(darts):
        if in_g:
            e = alpha[d]
            subgraph.add((min(d, e), max(d, e)))
    m = CombinatorialMap(tuple(alpha), tuple(sigma), root_dart)
    vertex_face = {}
    for d, info in enumerate(darts):
        vertex_face[d] = info[0]
    sm = SubgraphRootedMap(m, frozenset(subgraph))
    return sm, dist, vertex_face


def infinite_ball(
    source: Union[InfiniteWordSource, Word],
    radius: int,
    start_halfwidth: int = 64,
    cap: int = DEFAULT_WINDOW_CAP,
) -> BallCertificate:
    """Certified radius-R ball of the limit map around the root.

    Grows the window (doubling) until every face within radius+1 of the
    root resolves in-window; a fixed finite word never grows, so the
    result is returned uncertified when resolution fails.  The flexible-
    order weight 1 case is served by the percolated-tree construction
    instead (see :func:`infinite_ball_max_loops`).
    """
    if isinstance(source, InfiniteWordSource) and source.params.p_float == 1.0:
        return infinite_ball_max_loops(source.seed, radius, cap=cap)
    fixed = isinstance(source, Word)
    window = MatchedWindow(source, start_halfwidth, cap)
    lim = LazyInfiniteMap(window)
    while True:
        try:
            sm, dist, vertex_face = _assemble_ball(lim, radius)
            witnesses = {fid: fid for fid, d in dist.items() if d <= radius + 1}
            return BallCertificate(
                Ball(sm, radius), -window.lo if not fixed else 0, True, witnesses,
                vertex_face,
            )
        except _NeedGrow:
            if fixed:
                return BallCertificate(
                    Ball(SubgraphRootedMap(CombinatorialMap.vertex_map(), frozenset()), radius),
                    0,
                    False,
                    {},
                )
            lim.grow()


@dataclass
class WalkStats:
    """Outcome of a simple-random-walk run over oriented edges."""

    steps: int
    pending_steps: int
    root_returns: int

    @property
    def pending_frequency(self) -> float:
        return self.pending_steps / self.steps if self.steps else 0.0


def srw_on_map(
    target: Union[SubgraphRootedMap, Ball, LazyInfiniteMap],
    steps: int,
    rng,
    root_counts_in_stats: bool = True,
) -> WalkStats:
    """Simple random walk as a sequence of oriented edges from the root
    edge; an oriented edge is pending when its starting vertex has
    degree one.  On the lazy infinite map the window grows on demand."""
    if isinstance(target, Ball):
        target = target.sm
    pending = 0
    returns = 0
    if isinstance(target, LazyInfiniteMap):
        lim = target
        while True:
            try:
                root = lim.root_face()
                lim.resolve_face(root)
                break
            except _NeedGrow:
                lim.grow()

        def face_data(fid):
            while True:
                try:
                    return lim.resolve_face(fid)
                except _NeedGrow:
                    lim.grow()

        def neighbor(fid, slot):
            while True:
                try:
                    x = face_data(fid).entries[slot][4]
                    return lim.face_of_interval(x)
                except _NeedGrow:
                    lim.grow()

        here = root
        # the first oriented edge is the root edge: the arch on the
        # interval [-1, 0] slot of the root face
        slot = [e[0] for e in face_data(root).entries].index(-1)
        for step_no in range(steps):
            deg = face_data(here).degree
            if deg == 1:
                pending += 1
            here = neighbor(here, slot)
            if here == root:
                returns += 1
            slot = rng.randrange(face_data(here).degree)
        return WalkStats(steps, pending, returns)
    m = target.map
    if m.num_darts == 0:
        raise ValueError("cannot walk on the edgeless map")
    vertex = m.vertex_of()
    rotations: dict[int, list[int]] = {}
    for v, cyc in enumerate(m.vertices()):
        rotations.setdefault(v, []).extend(cyc)
    root_vertex = vertex[m.root_dart]
    here = root_vertex
    dart = m.root_dart
    for step_no in range(steps):
        if len(rotations[here]) == 1:
            pending += 1
        here = vertex[m.alpha[dart]]
        if here == root_vertex:
            returns += 1
        rot = rotations[here]
        dart = rot[rng.randrange(len(rot))]
    return WalkStats(steps, pending, returns)


# ---------------------------------------------------------------------------
# maximal-loop-weight limit: percolated tree route


class _LazyKestenTree:
    """Critical geometric branching tree conditioned to survive, with
    independent half-density edge marks, materialized on demand.

    Node randomness is a pure function of (seed, node id); ids chain
    through :func:`mix64`, so any expansion order gives the same tree.
    """

    def __init__(self, seed: int):
        self.seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self.root = int(_kernels.mix64(self.seed, np.uint64(1)))
        self._children: dict[int, list[tuple[int, bool]]] = {}
        self._on_spine = {self.root: True}

    @staticmethod
    def _geom(u: float) -> int:
        # P(k) = 2^-(k+1) on {0, 1, ...}
        return int(-math.log2(max(1.0 - u, 1e-18)))

    def children(self, node: int) -> list[tuple[int, bool]]:
        """[(child id, edge marked)] in planar order."""
        if node in self._children:
            return self._children[node]
        nid = np.uint64(node)
        u1 = _kernels.uniform01(nid, np.uint64(0))
        u2 = _kernels.uniform01(nid, np.uint64(1))
        if self._on_spine.get(node, False):
            k = 1 + self._geom(u1) + self._geom(u2)
            spine_child = int(_kernels.uniform01(nid, np.uint64(2)) * k)
        else:
            k = self._geom(u1)
            spine_child = -1
        out = []
        for i in range(k):
            cid = int(_kernels.mix64(nid, np.uint64(10 + i)))
            mark = _kernels.uniform01(np.uint64(cid), np.uint64(3)) < 0.5
            self._on_spine[cid] = i == spine_child
            out.append((cid, bool(mark)))
        self._children[node] = out
        return out


def infinite_ball_max_loops(
    seed: int, radius: int, cap: int = DEFAULT_WINDOW_CAP
) -> BallCertificate:
    """Radius-R ball of the maximal-loop-weight limit map.

    The limit is explicit: a critical geometric branching tree
    conditioned to survive with half-density bond marks, where each
    marked cluster contracts to one vertex carrying its marked edges as
    self-loops.  The tree is materialized until every cluster within
    contracted distance radius+1 is closed, then decoded by the
    loop-splitting inverse and cut to the ball.
    """
    tree = _LazyKestenTree(seed)
    # BFS over (node, contracted depth); clusters must close fully
    budget = max(1024, 64 * (radius + 2) ** 2)
    nodes = {tree.root: 0}  # node -> contracted distance from root cluster
    order = [tree.root]
    parent: dict[int, tuple[int, bool]] = {}
    idx = 0
    while idx < len(order):
        node = order[idx]
        idx += 1
        d = nodes[node]
        if d > radius + 1:
            continue
        for cid, mark in tree.children(node):
            nodes[cid] = d if mark else d + 1
            parent[cid] = (node, mark)
            order.append(cid)
            if len(order) > budget:
                budget *= 4
                if budget > cap:
                    raise WindowCapExceeded(
                        f"tree materialization exceeded {cap} nodes",
                        partial_radius=None,
                    )
    # build the plane tree map over materialized nodes
    dart_of_edge: dict[tuple[int, int], tuple[int, int]] = {}
    rotations: dict[int, list[int]] = {node: [] for node in order}
    alpha: list[int] = []

    def new_dart() -> int:
        alpha.append(0)
        return len(alpha) - 1

    subset = set()
    for node in order:
        if node not in nodes or nodes[node] > radius + 1:
            continue
        for cid, mark in tree.children(node):
            if cid not in rotations:
                continue
            down, up = new_dart(), new_dart()
            alpha[down], alpha[up] = up, down
            rotations[node].append(down)
            rotations[cid].insert(0, up)  # parent dart first at the child
            if mark:
                subset.add((down, up))
    sigma = [0] * len(alpha)
    for rot in rotations.values():
        for i, d in enumerate(rot):
            sigma[rot[i - 1]] = d
    if not alpha:
        raise WindowCapExceeded("degenerate empty tree window")
    root_dart = rotations[tree.root][0]
    tree_map = CombinatorialMap(tuple(alpha), tuple(sigma), root_dart)
    decoded = loop_tree_decode(tree_map, frozenset(subset))
    from .maps import ball as finite_ball

    b = finite_ball(decoded, radius)
    return BallCertificate(b, len(order), True, {})
