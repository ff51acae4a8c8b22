"""Deterministic and random map families.

All families produce validated Maps.  Patch families also report their
boundary vertices and outer face; those stand in for the boundary at
infinity in wired and marked-face constructions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameters, NotNestable, TooLarge
from .map_core import Map, RootedMap, build_map

__all__ = [
    "GeneratorSpec",
    "GeneratedMap",
    "MapBuilder",
    "generate",
    "exhaustion",
    "parse_gen",
    "torus_grid",
    "grid",
    "disc_grid",
    "cycle",
    "polygon",
    "platonic",
    "complete",
    "pq_ball",
    "gw_tree",
    "canopy_pair",
    "thick_canopy",
    "random_rotation",
    "map_from_embedding",
]


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GeneratedMap:
    """A generated map plus the structure the family naturally carries."""

    map: Map
    root_dart: int | None = 0
    boundary_vertices: tuple[int, ...] | None = None
    outer_face: int | None = None
    family: str = ""
    params: dict = field(default_factory=dict)

    @property
    def rooted(self) -> RootedMap:
        return RootedMap(self.map, self.root_dart)


# -- rotation assembly ---------------------------------------------------


class MapBuilder:
    """Assemble a map by sewing faces one at a time.

    Darts are created in pairs (2k, 2k+1), so the finished map uses the
    default pairing.  add_face takes the face cycle as a list of items,
    each either an existing dart id or ("new", u, v) creating the edge
    u -> v.  Sewing enforces, at every corner, that the outgoing dart
    is followed in rotation by the reversal of the incoming dart, so
    each sewn face becomes one orbit of sigma_dagger.
    """

    def __init__(self):
        self.n_vertices = 0
        self.tail: list[int] = []
        self.rot: list[list[int]] = []

    def new_vertex(self) -> int:
        self.n_vertices += 1
        self.rot.append([])
        return self.n_vertices - 1

    def new_edge(self, u: int, v: int) -> tuple[int, int]:
        d = len(self.tail)
        self.tail.append(u)
        self.tail.append(v)
        return d, d + 1

    def add_face(self, items) -> list[int]:
        """Sew one face; returns its cycle of darts."""
        darts: list[int] = []
        for it in items:
            if isinstance(it, tuple):
                _, u, v = it
                d, _ = self.new_edge(u, v)
                darts.append(d)
            else:
                darts.append(int(it))
        p = len(darts)
        for i in range(p):
            d = darts[i]
            a = darts[i - 1] ^ 1  # reversal of the incoming dart
            w = self.tail[d]
            assert self.tail[a] == w, "face cycle does not close at a vertex"
            rot = self.rot[w]
            d_in = d in rot
            a_in = a in rot
            if not d_in and not a_in:
                assert not rot, "ambiguous sewing at vertex %d" % w
                rot.extend([d, a])
            elif d_in and not a_in:
                rot.insert(rot.index(d) + 1, a)
            elif not d_in and a_in:
                rot.insert(rot.index(a), d)
            else:
                n = len(rot)
                assert rot[(rot.index(d) + 1) % n] == a, (
                    "inconsistent sewing at vertex %d" % w
                )
        return darts

    def finish(self) -> Map:
        n = len(self.tail)
        sigma = np.empty(n, dtype=np.int64)
        placed = 0
        for rot in self.rot:
            placed += len(rot)
            for i, d in enumerate(rot):
                sigma[d] = rot[(i + 1) % len(rot)]
        assert placed == n, "some darts were never placed in a rotation"
        return build_map(sigma)


# -- lattice families ----------------------------------------------------


def torus_grid(w: int, h: int) -> GeneratedMap:
    """w x h square grid on the torus; genus 1 for all w, h >= 1."""
    if w < 1 or h < 1:
        raise BadParameters("torus_grid needs w, h >= 1")
    n = w * h

    def vid(x, y):
        return (y % h) * w + (x % w)

    # dart 4v+k, direction k: 0=E 1=N 2=W 3=S, rotation in that ccw order
    sigma = np.empty(4 * n, dtype=np.int64)
    alpha = np.empty(4 * n, dtype=np.int64)
    for y in range(h):
        for x in range(w):
            v = vid(x, y)
            for k in range(4):
                sigma[4 * v + k] = 4 * v + (k + 1) % 4
            alpha[4 * v + 0] = 4 * vid(x + 1, y) + 2
            alpha[4 * v + 2] = 4 * vid(x - 1, y) + 0
            alpha[4 * v + 1] = 4 * vid(x, y + 1) + 3
            alpha[4 * v + 3] = 4 * vid(x, y - 1) + 1
    m = build_map(sigma, alpha)
    return GeneratedMap(m, 0, None, None, "torus_grid", {"w": w, "h": h})


_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))  # E N W S, ccw


def _lattice_patch(coords: list[tuple[int, int]], family: str, params: dict,
                   boundary: list[int]) -> GeneratedMap:
    index = {c: i for i, c in enumerate(coords)}
    dart_id: dict[tuple[int, int], int] = {}
    rots: list[list[tuple[int, int]]] = []
    n_darts = 0
    for v, (x, y) in enumerate(coords):
        rot = []
        for k, (dx, dy) in enumerate(_DIRS):
            if (x + dx, y + dy) in index:
                dart_id[(v, k)] = n_darts
                rot.append((v, k))
                n_darts += 1
        rots.append(rot)
    sigma = np.empty(n_darts, dtype=np.int64)
    alpha = np.empty(n_darts, dtype=np.int64)
    for v, (x, y) in enumerate(coords):
        rot = rots[v]
        for i, key in enumerate(rot):
            d = dart_id[key]
            sigma[d] = dart_id[rot[(i + 1) % len(rot)]]
            k = key[1]
            dx, dy = _DIRS[k]
            u = index[(x + dx, y + dy)]
            alpha[d] = dart_id[(u, (k + 2) % 4)]
    m = build_map(sigma, alpha)
    if m.n_faces == 1:
        outer = 0
    else:
        outer = int(np.argmax(m.face_degrees))
    return GeneratedMap(m, 0, tuple(boundary), outer, family, params)


def grid(w: int, h: int) -> GeneratedMap:
    """w x h rectangle patch of the square lattice, on the sphere."""
    if w < 1 or h < 1 or w * h < 2:
        raise BadParameters("grid needs at least two vertices")
    coords = [(x, y) for y in range(h) for x in range(w)]
    boundary = [
        i for i, (x, y) in enumerate(coords)
        if x in (0, w - 1) or y in (0, h - 1)
    ]
    return _lattice_patch(coords, "grid", {"w": w, "h": h}, boundary)


def disc_grid(r: int) -> GeneratedMap:
    """Ball of radius r around the origin of the square lattice."""
    if r < 1:
        raise BadParameters("disc_grid needs r >= 1")
    coords = [
        (x, y)
        for x in range(-r, r + 1)
        for y in range(-r, r + 1)
        if abs(x) + abs(y) <= r
    ]
    coords.sort(key=lambda c: (abs(c[0]) + abs(c[1]), c[0], c[1]))
    boundary = [i for i, (x, y) in enumerate(coords) if abs(x) + abs(y) == r]
    return _lattice_patch(coords, "disc_grid", {"r": r}, boundary)


def cycle(n: int) -> GeneratedMap:
    """The n-gon: n vertices on a cycle, two faces."""
    if n < 1:
        raise BadParameters("cycle needs n >= 1")
    # dart 2i: i -> i+1, dart 2i+1: i -> i-1
    sigma = np.empty(2 * n, dtype=np.int64)
    alpha = np.empty(2 * n, dtype=np.int64)
    for i in range(n):
        sigma[2 * i] = 2 * i + 1
        sigma[2 * i + 1] = 2 * i
        alpha[2 * i] = 2 * ((i + 1) % n) + 1
        alpha[2 * i + 1] = 2 * ((i - 1) % n)
    m = build_map(sigma, alpha)
    return GeneratedMap(m, 0, None, None, "cycle", {"n": n})


def polygon(n: int) -> GeneratedMap:
    g = cycle(n)
    return GeneratedMap(g.map, g.root_dart, None, None, "polygon", {"n": n})


def complete(n: int) -> GeneratedMap:
    """K_n with the index rotation: at i the darts to j != i in cyclic
    increasing order of j."""
    if n < 2:
        raise BadParameters("complete needs n >= 2")

    def did(i, j):
        return i * (n - 1) + (j if j < i else j - 1)

    sigma = np.empty(n * (n - 1), dtype=np.int64)
    alpha = np.empty(n * (n - 1), dtype=np.int64)
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for a, j in enumerate(others):
            sigma[did(i, j)] = did(i, others[(a + 1) % (n - 1)])
            alpha[did(i, j)] = did(j, i)
    m = build_map(sigma, alpha)
    return GeneratedMap(m, 0, None, None, "complete", {"n": n})


# -- platonic solids via convex embeddings -------------------------------


def map_from_embedding(coords, edges) -> Map:
    """Map of a convex polytope skeleton: at each vertex the neighbors
    are sorted counterclockwise around the outward normal."""
    coords = np.asarray(coords, dtype=np.float64)
    nv = len(coords)
    nbrs: list[list[int]] = [[] for _ in range(nv)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    dart_id: dict[tuple[int, int], int] = {}
    rots = []
    n_darts = 0
    for v in range(nv):
        nrm = coords[v] / np.linalg.norm(coords[v])
        ref = np.array([0.0, 0.0, 1.0])
        if abs(float(np.dot(ref, nrm))) > 0.9:
            ref = np.array([1.0, 0.0, 0.0])
        u1 = np.cross(nrm, ref)
        u1 /= np.linalg.norm(u1)
        u2 = np.cross(nrm, u1)

        def ang(w):
            d = coords[w] - coords[v]
            return math.atan2(float(np.dot(d, u2)), float(np.dot(d, u1)))

        order = sorted(nbrs[v], key=ang)
        for w in order:
            dart_id[(v, w)] = n_darts
            n_darts += 1
        rots.append(order)
    sigma = np.empty(n_darts, dtype=np.int64)
    alpha = np.empty(n_darts, dtype=np.int64)
    for v in range(nv):
        order = rots[v]
        for i, w in enumerate(order):
            sigma[dart_id[(v, w)]] = dart_id[(v, order[(i + 1) % len(order)])]
            alpha[dart_id[(v, w)]] = dart_id[(w, v)]
    return build_map(sigma, alpha)


def _solid_coords(name: str) -> np.ndarray:
    f = (1 + math.sqrt(5)) / 2
    if name == "tetrahedron":
        pts = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif name == "cube":
        pts = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    elif name == "octahedron":
        pts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    elif name == "icosahedron":
        pts = (
            [(0, s1, s2 * f) for s1 in (-1, 1) for s2 in (-1, 1)]
            + [(s1, s2 * f, 0) for s1 in (-1, 1) for s2 in (-1, 1)]
            + [(s1 * f, 0, s2) for s1 in (-1, 1) for s2 in (-1, 1)]
        )
    elif name == "dodecahedron":
        pts = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
        pts += [(0, s1 / f, s2 * f) for s1 in (-1, 1) for s2 in (-1, 1)]
        pts += [(s1 / f, s2 * f, 0) for s1 in (-1, 1) for s2 in (-1, 1)]
        pts += [(s1 * f, 0, s2 / f) for s1 in (-1, 1) for s2 in (-1, 1)]
    else:
        raise BadParameters("unknown solid %r" % name)
    return np.array(pts, dtype=np.float64)


def platonic(name: str) -> GeneratedMap:
    coords = _solid_coords(name)
    n = len(coords)
    d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)
    off = d2[~np.eye(n, dtype=bool)]
    thr = off.min() * 1.0001
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if d2[i, j] <= thr]
    m = map_from_embedding(coords, edges)
    return GeneratedMap(m, 0, None, None, "platonic", {"name": name})


# -- hyperbolic tessellation balls ---------------------------------------


def pq_ball(p: int, q: int, radius: int) -> GeneratedMap:
    """Combinatorial ball of the {p, q} tessellation, built layer by
    layer.

    Every face except the outer one is a p-gon and every interior
    vertex has degree q; requires 1/p + 1/q < 1/2.  Each layer walks
    the current boundary ring.  A boundary vertex with angular deficit
    t = q - 2 - (faces so far) gets t extra faces pivoting there, each
    sharing a spoke edge with its neighbor; a vertex with t = -1 is
    covered by a single face spanning both of its boundary edges.
    """
    if p < 3 or q < 3 or 2 * (p + q) >= p * q:
        raise BadParameters("pq_ball needs p, q >= 3 with 1/p + 1/q < 1/2")
    if radius < 0:
        raise BadParameters("radius must be >= 0")
    if radius == 0:
        m = Map(np.empty(0, dtype=np.int64), check=False)
        return GeneratedMap(m, None, (0,), None, "pq_ball",
                            {"p": p, "q": q, "radius": 0})

    bld = MapBuilder()
    faces_at: list[int] = []

    def nv() -> int:
        faces_at.append(0)
        return bld.new_vertex()

    def count_corners(darts):
        for d in darts:
            faces_at[bld.tail[d]] += 1

    center = nv()

    # first ring: q faces pivoting at the center
    boundary: list[int] = []
    bdarts: list[int] = []
    first_spoke_pair = None   # claimed dart (x_0 -> center)
    x_first = None
    x_cur = None
    for j in range(q):
        mids = [nv() for _ in range(p - 3)]  # cycle order x_next, mids..., x_cur
        closing = j == q - 1
        if closing:
            x_next = x_first
            items: list = [first_spoke_pair ^ 1]  # existing center -> x_0
        else:
            x_next = nv()
            items = [("new", center, x_next)]
        if j == 0:
            x_cur = nv()
            x_first = x_cur
        prev = x_next
        for w in mids + [x_cur]:
            items.append(("new", prev, w))
            prev = w
        if j == 0:
            items.append(("new", x_cur, center))
        else:
            items.append(spoke ^ 1)  # existing x_cur -> center
        darts = bld.add_face(items)
        count_corners(darts)
        if j == 0:
            first_spoke_pair = darts[-1]
            boundary.append(x_cur)
        # walk order: x_cur, mids reversed, x_next
        boundary.extend(reversed(mids))
        if not closing:
            boundary.append(x_next)
        bdarts.extend(d ^ 1 for d in reversed(darts[1:-1]))
        spoke = darts[0]  # claimed (center -> x_next); its reversal closes face j+1
        x_cur = x_next

    for _ in range(radius - 1):
        boundary, bdarts = _pq_layer(bld, faces_at, nv, count_corners,
                                     boundary, bdarts, p, q)
        if len(bld.tail) > 400_000:
            raise TooLarge("pq_ball exceeds the dart budget")

    m = bld.finish()
    outer = int(m.face_of[bdarts[0]])
    return GeneratedMap(m, 0, tuple(boundary), outer, "pq_ball",
                        {"p": p, "q": q, "radius": radius})


def _pq_layer(bld, faces_at, nv, count_corners, boundary, bdarts, p, q):
    """Grow one layer; returns the new boundary ring and its darts."""
    mlen = len(boundary)
    t = [q - 2 - faces_at[v] for v in boundary]
    if max(t) < 0:
        raise BadParameters("boundary cannot grow, parameters too small")
    S = t.index(next(x for x in t if x >= 0))
    new_b: list[int] = []
    new_bd: list[int] = []
    first_closing = None   # claimed dart (c_k -> S) of the first face
    first_ck = None
    pending_v = None       # shared chain vertex at the current pivot
    pending_d = None       # claimed dart (pivot -> pending_v)
    i = S
    while True:
        run = [i]
        j = (i + 1) % mlen
        while t[j] == -1:
            run.append(j)
            j = (j + 1) % mlen
        B_idx = j
        s = len(run)
        k = p - s - 1
        if k < 1:
            raise BadParameters("a face would close the patch; unsupported")
        A, B = boundary[i], boundary[B_idx]
        is_first = pending_v is None
        is_last = B_idx == S
        assert not (is_first and is_last), "degenerate single-run layer"
        # chain c_1 (B side) ... c_k (A side); cycle order: covered,
        # spoke B->c_1, arcs c_1->...->c_k, closing c_k->A
        if is_first:
            ck = nv()
        else:
            ck = pending_v
        reuse_first = is_last and t[S] == 0
        if k == 1:
            assert not reuse_first, "chain too short to close the layer"
            c1 = ck
        elif reuse_first:
            c1 = first_ck
        else:
            c1 = nv()
        mids = [nv() for _ in range(k - 2)] if k >= 2 else []
        chain = [c1] + mids + ([ck] if k >= 2 else [])
        items: list = [bdarts[e] for e in run]
        if reuse_first:
            items.append(first_closing ^ 1)  # existing B -> c_1
        else:
            items.append(("new", B, c1))
        for a in range(k - 1):
            items.append(("new", chain[a], chain[a + 1]))
        if is_first:
            items.append(("new", ck, A))
        else:
            items.append(pending_d ^ 1)      # existing c_k -> A
        darts = bld.add_face(items)
        count_corners(darts)
        if is_first:
            first_closing = darts[-1]
            first_ck = ck
        # walk order A -> B: created chain vertices c_k, ..., c_1
        walk = []
        if is_first:
            walk.append(ck)
        walk.extend(reversed(mids))
        if k >= 2 and not reuse_first:
            walk.append(c1)
        elif k == 1 and is_first:
            pass  # ck == c1 already recorded
        new_b.extend(walk)
        arcs = darts[s + 1:-1]
        new_bd.extend(d ^ 1 for d in reversed(arcs))
        pending_v = c1
        pending_d = darts[s]  # claimed (B -> c_1)
        # pivot faces at B
        tb = t[B_idx]
        for pi in range(1, tb + 1):
            closing_pivot = is_last and pi == tb
            mids = [nv() for _ in range(p - 3)]
            if closing_pivot:
                x_next = first_ck
                pitems: list = [first_closing ^ 1]
            else:
                x_next = nv()
                pitems = [("new", B, x_next)]
            prev = x_next
            for w in mids + [pending_v]:
                pitems.append(("new", prev, w))
                prev = w
            pitems.append(pending_d ^ 1)     # existing x_cur -> B
            pdarts = bld.add_face(pitems)
            count_corners(pdarts)
            walk = list(reversed(mids))
            if not closing_pivot:
                walk.append(x_next)
            new_b.extend(walk)
            new_bd.extend(d ^ 1 for d in reversed(pdarts[1:-1]))
            pending_v = x_next
            pending_d = pdarts[0]
        if is_last:
            break
        i = B_idx
    for v in boundary:
        assert faces_at[v] == q, "old boundary vertex left unsaturated"
    assert len(new_b) == len(new_bd)
    return new_b, new_bd


# -- tree and canopy families --------------------------------------------


def _offspring_sampler(law: str, param: float, rng, biased: bool):
    if law == "poisson":
        if biased:
            return lambda: 1 + int(rng.poisson(param))
        return lambda: int(rng.poisson(param))
    if law == "geometric":
        # mean-param law P(k) = (1-a)^k a with a = 1/(1+param)
        a = 1.0 / (1.0 + param)
        if biased:
            return lambda: 1 + int(rng.negative_binomial(2, a))
        return lambda: int(rng.negative_binomial(1, a))
    if law == "deterministic":
        k = int(param)
        return lambda: k
    raise BadParameters("unknown offspring law %r" % law)


def gw_tree(law: str, mean: float, depth: int, rng,
            root_law: str = "plain", max_vertices: int = 200_000) -> GeneratedMap:
    """Branching-process plane tree truncated at the given depth.

    Truncation-depth vertices are reported as the boundary.  root_law
    "plain" draws the root offspring from the offspring law itself,
    "size_biased" from its size-biased version.
    """
    if depth < 0:
        raise BadParameters("depth must be >= 0")
    if root_law not in ("plain", "size_biased"):
        raise BadParameters("root_law must be plain or size_biased")
    draw = _offspring_sampler(law, mean, rng, False)
    draw_root = _offspring_sampler(law, mean, rng, root_law == "size_biased")
    children: list[list[int]] = [[]]
    level = [0]
    depths = [0]
    for d in range(depth):
        nxt = []
        for v in level:
            for _ in range(draw_root() if v == 0 else draw()):
                children.append([])
                depths.append(d + 1)
                children[v].append(len(children) - 1)
                nxt.append(len(children) - 1)
            if len(children) > max_vertices:
                raise TooLarge("tree exceeded %d vertices" % max_vertices)
        level = nxt
    return _tree_to_map(children, depths, depth, "gw_tree",
                        {"law": law, "mean": mean, "depth": depth,
                         "root_law": root_law})


def _tree_to_map(children, depths, depth, family, params) -> GeneratedMap:
    nv = len(children)
    if nv == 1:
        m = Map(np.empty(0, dtype=np.int64), check=False)
        return GeneratedMap(m, None, (0,), None, family, params)
    dart_id: dict[tuple[int, int], int] = {}
    n_darts = 0
    rots: list[list[tuple[int, int]]] = []
    parent = [-1] * nv
    for v, ch in enumerate(children):
        for c in ch:
            parent[c] = v
    for v, ch in enumerate(children):
        rot = []
        if parent[v] >= 0:
            rot.append((v, parent[v]))
        rot.extend((v, c) for c in ch)
        for key in rot:
            dart_id[key] = n_darts
            n_darts += 1
        rots.append(rot)
    sigma = np.empty(n_darts, dtype=np.int64)
    alpha = np.empty(n_darts, dtype=np.int64)
    for v, rot in enumerate(rots):
        for i, key in enumerate(rot):
            sigma[dart_id[key]] = dart_id[rot[(i + 1) % len(rot)]]
            alpha[dart_id[key]] = dart_id[(key[1], key[0])]
    m = build_map(sigma, alpha)
    bdry = tuple(v for v in range(nv) if depths[v] == depth)
    return GeneratedMap(m, 0, bdry if bdry else None, 0, family, params)


def canopy_pair(n: int) -> GeneratedMap:
    """Two mirrored complete binary trees of height n glued leaf to
    leaf; a sphere map with 2^n faces."""
    if n < 1:
        raise BadParameters("canopy_pair needs n >= 1")
    # left-tree internal nodes, right-tree internal nodes, shared leaves
    nb = 2 ** n - 1
    left = list(range(nb))
    right = list(range(nb, 2 * nb))
    leaves = list(range(2 * nb, 2 * nb + 2 ** n))

    def lchild(side, i):
        j = 2 * i + 1
        return (side[j] if j < nb else leaves[j - nb]), (
            side[j + 1] if j + 1 < nb else leaves[j + 1 - nb]
        )

    adj: dict[int, list[int]] = {}
    for i in range(nb):
        a, b = lchild(left, i)
        par = left[(i - 1) // 2] if i else None
        # left node: parent to the west; ccw order parent, bottom, top
        adj[left[i]] = ([par] if par is not None else []) + [b, a]
        a, b = lchild(right, i)
        par = right[(i - 1) // 2] if i else None
        # right node: mirror image; ccw order parent, top, bottom
        adj[right[i]] = ([par] if par is not None else []) + [a, b]
    for k, lf in enumerate(leaves):
        j = nb + k  # heap slot of the leaf
        adj[lf] = [left[(j - 1) // 2], right[(j - 1) // 2]]
    dart_id: dict[tuple[int, int], int] = {}
    n_darts = 0
    for v in sorted(adj):
        for w in adj[v]:
            dart_id[(v, w)] = n_darts
            n_darts += 1
    sigma = np.empty(n_darts, dtype=np.int64)
    alpha = np.empty(n_darts, dtype=np.int64)
    for v in sorted(adj):
        rot = adj[v]
        for i, w in enumerate(rot):
            sigma[dart_id[(v, w)]] = dart_id[(v, rot[(i + 1) % len(rot)])]
            alpha[dart_id[(v, w)]] = dart_id[(w, v)]
    m = build_map(sigma, alpha)
    return GeneratedMap(m, 0, None, None, "canopy_pair", {"n": n})


def thick_canopy(n: int) -> GeneratedMap:
    """canopy_pair(n) with every edge at distance k from the leaf level
    replaced by 3^k parallel edges."""
    base = canopy_pair(n)
    m = base.map
    dist = _leaf_distance(base)
    mult = [3 ** dist[e] for e in range(m.n_edges)]
    return GeneratedMap(_thicken(m, mult), 0, None, None,
                        "thick_canopy", {"n": n})


def _leaf_distance(gen: GeneratedMap) -> list[int]:
    """Distance of each canopy edge from the leaf level: an edge
    between levels k and k+1 counted from the leaves has distance k.

    Relies on canopy_pair's vertex numbering: internal nodes of either
    tree carry heap indices, leaves come last.
    """
    m = gen.map
    n = gen.params["n"]
    nb = 2 ** n - 1

    def level(v):
        if v >= 2 * nb:
            return 0
        i = v if v < nb else v - nb
        return n - ((i + 1).bit_length() - 1)

    out = []
    for e in range(m.n_edges):
        d = int(np.flatnonzero(m.edge_of == e)[0])
        out.append(min(level(m.tail(d)), level(m.head(d))))
    return out


def _thicken(m: Map, mult: list[int]) -> Map:
    """Replace edge e by mult[e] parallel edges, inserted as a nested
    bundle: consecutive order at one endpoint, reversed at the other."""
    d_new: dict[int, list[int]] = {}
    n = 0
    for e, k in enumerate(mult):
        if k < 1:
            raise BadParameters("multiplicity must be >= 1")
        d_new[e] = list(range(n, n + 2 * k))
        n += 2 * k
    sigma = np.empty(n, dtype=np.int64)
    alpha = np.empty(n, dtype=np.int64)
    for e, ds in d_new.items():
        k = len(ds) // 2
        for i in range(k):
            alpha[ds[i]] = ds[2 * k - 1 - i]
            alpha[ds[2 * k - 1 - i]] = ds[i]
    for v in range(m.n_vertices):
        run: list[int] = []
        for d in m.darts_of_vertex(v):
            e = int(m.edge_of[d])
            ds = d_new[e]
            k = len(ds) // 2
            lo = int(d) < int(m.alpha[d])
            # bundle darts at the tail of the smaller dart come first half
            run.extend(ds[:k] if lo else ds[k:])
        for i, d in enumerate(run):
            sigma[d] = run[(i + 1) % len(run)]
    return build_map(sigma, alpha)


def random_rotation(base: Map, rng) -> GeneratedMap:
    """Resample the rotation at every vertex uniformly, keeping alpha.

    The result usually changes genus; it is reported in params.
    """
    sigma = np.empty(base.n_darts, dtype=np.int64)
    for v in range(base.n_vertices):
        darts = list(base.darts_of_vertex(v))
        order = list(rng.permutation(len(darts)))
        for i in range(len(darts)):
            sigma[darts[order[i]]] = darts[order[(i + 1) % len(darts)]]
    m = build_map(sigma, base.alpha.copy())
    return GeneratedMap(m, 0, None, None, "random_rotation",
                        {"genus": m.genus})


# -- spec parsing and dispatch -------------------------------------------


_INT_FAMS = {
    "torus_grid": ("w", "h"),
    "grid": ("w", "h"),
    "disc_grid": ("r",),
    "cycle": ("n",),
    "polygon": ("n",),
    "complete": ("n",),
    "pq_ball": ("p", "q", "radius"),
    "canopy_pair": ("n",),
    "thick_canopy": ("n",),
}


def parse_gen(text: str) -> GeneratorSpec:
    """Parse a compact family spec like "grid:5x5", "pq_ball:3,7,4",
    "gw_tree:poisson,1.0,8" or "platonic:cube"."""
    text = text.strip()
    fam, _, rest = text.partition(":")
    fam = fam.strip().lower()
    alias = {"torus": "torus_grid", "disc": "disc_grid", "kn": "complete",
             "canopy": "canopy_pair", "ball": "pq_ball"}
    fam = alias.get(fam, fam)
    args = [a for a in rest.replace("x", ",").split(",") if a.strip()] \
        if fam in _INT_FAMS else [a for a in rest.split(",") if a.strip()]
    if fam in _INT_FAMS:
        names = _INT_FAMS[fam]
        if len(args) != len(names):
            raise BadParameters(
                "%s expects %d arguments, got %d" % (fam, len(names), len(args)))
        try:
            params = {k: int(v) for k, v in zip(names, args)}
        except ValueError as exc:
            raise BadParameters("bad integer in %r" % text) from exc
        return GeneratorSpec(fam, params)
    if fam == "platonic":
        if len(args) != 1:
            raise BadParameters("platonic expects one name")
        return GeneratorSpec(fam, {"name": args[0].strip().lower()})
    if fam == "gw_tree":
        if len(args) not in (3, 4):
            raise BadParameters("gw_tree expects law,mean,depth[,root_law]")
        try:
            params = {"law": args[0].strip().lower(), "mean": float(args[1]),
                      "depth": int(args[2])}
        except ValueError as exc:
            raise BadParameters("bad gw_tree arguments in %r" % text) from exc
        if len(args) == 4:
            params["root_law"] = args[3].strip().lower()
        return GeneratorSpec(fam, params)
    if fam == "random_rotation":
        if not rest:
            raise BadParameters("random_rotation expects a base spec")
        return GeneratorSpec(fam, {"base": parse_gen(rest)})
    raise BadParameters("unknown family %r" % fam)


def parse_gen_toml(text: str) -> GeneratorSpec:
    """TOML form of a generator spec: a `family` key plus the family's
    parameters, either top-level or under a [params] table.  The keys
    match the compact string form, e.g.

        family = "pq_ball"
        p = 3
        q = 7
        radius = 4
    """
    try:
        import tomllib
    except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
        import tomli as tomllib
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise BadParameters("bad TOML: %s" % exc) from exc
    fam = doc.get("family")
    if not isinstance(fam, str):
        raise BadParameters("TOML spec needs a string 'family' key")
    fam = fam.strip().lower()
    params = doc.get("params")
    if params is None:
        params = {k: v for k, v in doc.items() if k != "family"}
    if fam in _INT_FAMS:
        names = _INT_FAMS[fam]
        missing = [k for k in names if k not in params]
        if missing:
            raise BadParameters("%s needs keys %r" % (fam, missing))
        return GeneratorSpec(fam, {k: int(params[k]) for k in names})
    if fam == "platonic":
        return GeneratorSpec(fam, {"name": str(params.get("name", "")).lower()})
    if fam == "gw_tree":
        for k in ("law", "mean", "depth"):
            if k not in params:
                raise BadParameters("gw_tree needs law, mean, depth")
        out = {"law": str(params["law"]).lower(), "mean": float(params["mean"]),
               "depth": int(params["depth"])}
        if "root_law" in params:
            out["root_law"] = str(params["root_law"]).lower()
        return GeneratorSpec(fam, out)
    if fam == "random_rotation":
        base = params.get("base")
        if not isinstance(base, str):
            raise BadParameters("random_rotation needs a string 'base' spec")
        return GeneratorSpec(fam, {"base": parse_gen(base)})
    raise BadParameters("unknown family %r" % fam)


def generate(spec: GeneratorSpec, rng=None) -> GeneratedMap:
    """Build the map a spec describes.  Random families need rng."""
    fam, p = spec.family, spec.params
    fixed = {
        "torus_grid": lambda: torus_grid(p["w"], p["h"]),
        "grid": lambda: grid(p["w"], p["h"]),
        "disc_grid": lambda: disc_grid(p["r"]),
        "cycle": lambda: cycle(p["n"]),
        "polygon": lambda: polygon(p["n"]),
        "complete": lambda: complete(p["n"]),
        "pq_ball": lambda: pq_ball(p["p"], p["q"], p["radius"]),
        "canopy_pair": lambda: canopy_pair(p["n"]),
        "thick_canopy": lambda: thick_canopy(p["n"]),
        "platonic": lambda: platonic(p["name"]),
    }
    if fam in fixed:
        return fixed[fam]()
    if rng is None:
        raise BadParameters("family %r needs a random stream" % fam)
    if fam == "gw_tree":
        return gw_tree(p["law"], p["mean"], p["depth"], rng,
                       root_law=p.get("root_law", "plain"))
    if fam == "random_rotation":
        base = generate(p["base"], rng)
        return random_rotation(base.map, rng)
    raise BadParameters("unknown family %r" % fam)


# -- growing patch sequences ---------------------------------------------


def exhaustion(spec: GeneratorSpec, sizes, rng=None) -> list[GeneratedMap]:
    """A nested sequence of patches of the same infinite lattice.

    Only families with a size knob that grows the patch around a fixed
    root support this: disc_grid, pq_ball, grid, gw_tree (by depth).
    """
    fam, p = spec.family, spec.params
    out = []
    if fam == "disc_grid":
        out = [disc_grid(r) for r in sizes]
    elif fam == "pq_ball":
        out = [pq_ball(p["p"], p["q"], r) for r in sizes]
    elif fam == "grid":
        out = [grid(s, s) for s in sizes]
    elif fam == "gw_tree":
        if rng is None:
            raise BadParameters("gw_tree exhaustion needs a random stream")
        seq = sorted(sizes)
        full = gw_tree(p["law"], p["mean"], max(seq), rng,
                       root_law=p.get("root_law", "plain"))
        for d in seq:
            out.append(_truncate_tree(full, d))
    else:
        raise NotNestable("family %r has no nested patch sequence" % fam)
    return out


def _truncate_tree(gen: GeneratedMap, depth: int) -> GeneratedMap:
    """Retain only vertices within the given depth of the tree root."""
    m = gen.map
    if m.n_darts == 0 or depth <= 0:
        e = Map(np.empty(0, dtype=np.int64), check=False)
        return GeneratedMap(e, None, (0,), None, gen.family,
                            dict(gen.params, depth=0))
    root = m.tail(gen.root_dart)
    dist = m.distances(root)
    keep = {int(d) for d in range(m.n_darts)
            if max(dist[m.tail(d)], dist[m.head(d)]) <= depth}
    if not keep:
        e = Map(np.empty(0, dtype=np.int64), check=False)
        return GeneratedMap(e, None, (0,), None, gen.family,
                            dict(gen.params, depth=0))
    old = sorted(keep)
    new_id = {d: i for i, d in enumerate(old)}
    sigma = np.empty(len(old), dtype=np.int64)
    alpha = np.empty(len(old), dtype=np.int64)
    for d in old:
        nd = int(d)
        s = int(m.sigma[nd])
        while s not in keep:
            s = int(m.sigma[s])
        sigma[new_id[nd]] = new_id[s]
        alpha[new_id[nd]] = new_id[int(m.alpha[nd])]
    sub = build_map(sigma, alpha)
    bdry = tuple(sorted({int(sub.tail(new_id[d])) for d in old
                         if dist[m.tail(d)] == depth}))
    return GeneratedMap(sub, new_id[gen.root_dart] if gen.root_dart in keep
                        else 0, bdry if bdry else None, 0,
                        gen.family, dict(gen.params, depth=depth))
