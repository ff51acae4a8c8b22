"""Maps on compact oriented surfaces as rotation systems.

A map is a pair of permutations of the darts 0..n_darts-1: sigma sends a
dart to the next dart counterclockwise around its tail vertex, and alpha
is the fixed-point-free involution pairing each dart with its reversal.
Vertices are the orbits of sigma, edges the orbits of alpha, and faces
the orbits of sigma_dagger, where

    sigma_dagger(d) = sigma^{-1}(alpha(d)).

The orbit of d under sigma_dagger is the face to the right of d under
the orientation convention fixed here.  The genus is read off from
V - E + F = 2 - 2g.

The map with no darts is allowed and denotes the single-vertex map with
no edges (it arises as a radius-0 ball).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    Disconnected,
    GenusChangedWarning,
    NotInvolution,
    NotPermutation,
    WouldDisconnect,
)


def _orbits(perm: np.ndarray) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Orbit id per dart, representative (= min dart) per orbit, orbit sizes.

    Orbit ids are dense and ordered by their minimum dart.
    """
    n = len(perm)
    oid = np.full(n, -1, dtype=np.int64)
    reps: list[int] = []
    sizes: list[int] = []
    for d in range(n):
        if oid[d] >= 0:
            continue
        k = len(reps)
        reps.append(d)
        c = d
        size = 0
        while oid[c] < 0:
            oid[c] = k
            size += 1
            c = int(perm[c])
        sizes.append(size)
    return oid, reps, np.array(sizes, dtype=np.int64)


class Map:
    """Immutable rotation system on darts 0..n_darts-1.

    Vertex, edge and face ids are dense, ordered by the minimum dart of
    the orbit; the representative dart of an orbit is that minimum dart.
    """

    __slots__ = [
        "n_darts",
        "sigma",        # rotation permutation, next dart ccw at the tail
        "alpha",        # dart reversal, fixed-point-free involution
        "sigma_inv",    # inverse rotation
        "vertex_of",    # dart -> vertex id
        "edge_of",      # dart -> edge id
        "face_of",      # dart -> id of the face right of the dart
        "n_vertices",
        "n_edges",
        "n_faces",
        "vertex_degrees",
        "face_degrees",
        "vertex_rep",   # vertex id -> min dart of the sigma orbit
        "face_rep",     # face id -> min dart of the sigma_dagger orbit
        "_cache",       # derived tables, built on demand
    ]

    def __init__(self, sigma, alpha=None, check: bool = True):
        sigma = np.asarray(sigma, dtype=np.int64)
        n = len(sigma)
        if alpha is None:
            # default pairing: darts 2k and 2k+1 form edge k
            alpha = np.arange(n, dtype=np.int64) ^ 1
        else:
            alpha = np.asarray(alpha, dtype=np.int64)
        if check:
            if n % 2 != 0:
                raise NotInvolution("odd number of darts")
            if len(alpha) != n:
                raise NotInvolution("alpha length %d != %d" % (len(alpha), n))
            if sorted(sigma.tolist()) != list(range(n)):
                raise NotPermutation("sigma is not a permutation of 0..%d" % (n - 1))
            if n and not (
                alpha.min() >= 0
                and alpha.max() < n
                and (alpha[alpha] == np.arange(n)).all()
                and (alpha != np.arange(n)).all()
            ):
                raise NotInvolution("alpha is not a fixed-point-free involution")
        self.n_darts = n
        self.sigma = sigma
        self.alpha = alpha
        inv = np.empty(n, dtype=np.int64)
        inv[sigma] = np.arange(n)
        self.sigma_inv = inv
        self.vertex_of, vreps, self.vertex_degrees = _orbits(sigma)
        if n:
            sigma_dagger = inv[alpha]
        else:
            sigma_dagger = sigma
        self.face_of, freps, self.face_degrees = _orbits(sigma_dagger)
        eid = np.minimum(np.arange(n), alpha)
        # dense edge ids ordered by the smaller dart of the pair
        uniq, edge_of = np.unique(eid, return_inverse=True)
        self.edge_of = edge_of.astype(np.int64)
        self.n_edges = len(uniq)
        if n == 0:
            # the one-vertex map with no edges
            self.n_vertices = 1
            self.n_faces = 1
            self.vertex_degrees = np.zeros(1, dtype=np.int64)
            self.face_degrees = np.zeros(1, dtype=np.int64)
            vreps, freps = [0], [0]
        else:
            self.n_vertices = len(vreps)
            self.n_faces = len(freps)
        self.vertex_rep = np.array(vreps, dtype=np.int64)
        self.face_rep = np.array(freps, dtype=np.int64)
        self._cache = {}
        if check and n:
            seen = np.zeros(n, dtype=bool)
            stack = [0]
            seen[0] = True
            count = 0
            while stack:
                d = stack.pop()
                count += 1
                for e in (int(sigma[d]), int(alpha[d])):
                    if not seen[e]:
                        seen[e] = True
                        stack.append(e)
            if count != n:
                raise Disconnected("darts split into >1 orbit under <sigma, alpha>")
        for a in ("sigma", "alpha", "sigma_inv", "vertex_of", "edge_of", "face_of"):
            getattr(self, a).flags.writeable = False
        chi = self.n_vertices - self.n_edges + self.n_faces
        assert chi % 2 == 0, "odd Euler characteristic, invalid rotation system"

    # -- elementary queries -------------------------------------------------

    @property
    def genus(self) -> int:
        return (2 - self.n_vertices + self.n_edges - self.n_faces) // 2

    def tail(self, d: int) -> int:
        return int(self.vertex_of[d])

    def head(self, d: int) -> int:
        return int(self.vertex_of[self.alpha[d]])

    def sigma_dagger(self, d: int) -> int:
        return int(self.sigma_inv[self.alpha[d]])

    def degree(self, v: int) -> int:
        return int(self.vertex_degrees[v])

    def face_degree(self, f: int) -> int:
        return int(self.face_degrees[f])

    def darts_of_vertex(self, v: int) -> list[int]:
        """Darts with tail v, in rotation order from the representative."""
        if self.vertex_degrees[v] == 0:
            return []
        r = int(self.vertex_rep[v])
        out = [r]
        c = int(self.sigma[r])
        while c != r:
            out.append(c)
            c = int(self.sigma[c])
        return out

    def darts_of_face(self, f: int) -> list[int]:
        """Darts of the face orbit, in sigma_dagger order from the representative."""
        r = int(self.face_rep[f])
        out = [r]
        c = self.sigma_dagger(r)
        while c != r:
            out.append(c)
            c = self.sigma_dagger(c)
        return out

    def edge_darts(self, e: int) -> tuple[int, int]:
        d = int(np.flatnonzero(self.edge_of == e)[0])
        return d, int(self.alpha[d])

    def distances(self, v: int) -> np.ndarray:
        """Graph distance from v to every vertex (BFS)."""
        dist = np.full(self.n_vertices, -1, dtype=np.int64)
        dist[v] = 0
        frontier = [v]
        while frontier:
            nxt = []
            for u in frontier:
                for d in self.darts_of_vertex(u):
                    w = self.head(d)
                    if dist[w] < 0:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        return dist


@dataclass(frozen=True)
class RootedMap:
    """Map with a distinguished root dart.

    root_dart is None only for the dartless single-vertex map.
    """

    map: Map
    root_dart: int | None

    def __post_init__(self):
        if self.root_dart is None:
            if self.map.n_darts != 0:
                raise NotPermutation("root dart required on a map with darts")
        elif not 0 <= self.root_dart < self.map.n_darts:
            raise NotPermutation("root dart %r out of range" % (self.root_dart,))

    @property
    def root_vertex(self) -> int:
        if self.root_dart is None:
            return 0
        return self.map.tail(self.root_dart)


def build_map(sigma, alpha=None) -> Map:
    """Validating constructor, accepts any integer sequences."""
    return Map(sigma, alpha, check=True)


def maps_equal(a: Map, b: Map) -> bool:
    """Equality of the labeled structures, not isomorphism."""
    return (
        a.n_darts == b.n_darts
        and bool((a.sigma == b.sigma).all())
        and bool((a.alpha == b.alpha).all())
    )


def dual(m: Map) -> Map:
    """Dual map: same darts, rotation sigma_dagger, same pairing.

    Vertices of the dual are the faces of m and vice versa;
    dual(dual(m)) equals m relabeled by alpha.
    """
    if m.n_darts == 0:
        return Map(m.sigma, m.alpha, check=False)
    return Map(m.sigma_inv[m.alpha], m.alpha, check=False)


def submap_delete_edges(m: Map, edges) -> Map:
    """Delete the given edge ids, keeping all vertices.

    Raises WouldDisconnect if the remaining graph is not connected.
    Warns if the deletion changes the genus.
    """
    edges = set(int(e) for e in edges)
    keep = np.array([m.edge_of[d] not in edges for d in range(m.n_darts)], dtype=bool)
    parent = list(range(m.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for d in range(m.n_darts):
        if keep[d]:
            a, b = find(m.tail(d)), find(m.head(d))
            if a != b:
                parent[a] = b
    if len({find(v) for v in range(m.n_vertices)}) != 1:
        raise WouldDisconnect("deleting %r disconnects the map" % (sorted(edges),))
    new_id = np.cumsum(keep) - 1
    sigma = []
    for d in range(m.n_darts):
        if not keep[d]:
            continue
        c = int(m.sigma[d])
        while not keep[c]:
            c = int(m.sigma[c])
        sigma.append(int(new_id[c]))
    alpha = [int(new_id[m.alpha[d]]) for d in range(m.n_darts) if keep[d]]
    out = Map(sigma, alpha, check=False)
    if out.genus != m.genus:
        warnings.warn(
            "genus changed %d -> %d" % (m.genus, out.genus), GenusChangedWarning
        )
    return out


def ball(rooted: RootedMap, r: int) -> RootedMap:
    return ball_with_vertices(rooted, r)[0]


def ball_with_vertices(rooted: RootedMap, r: int) -> tuple[RootedMap, np.ndarray]:
    """Induced submap on vertices within distance r of the root vertex.

    Keeps the darts whose both endpoints lie in the ball, with the
    inherited rotation.  Rooted at the original root dart when retained,
    else at the least retained dart of the root vertex.  Also returns
    the original vertex id of each ball vertex.

    Work is proportional to the ball, not the ambient map: the
    truncated breadth-first search never leaves radius r.
    """
    m = rooted.map
    if m.n_darts == 0:
        return rooted, np.array([rooted.root_vertex], dtype=np.int64)
    root_v = rooted.root_vertex
    dist = {root_v: 0}
    frontier = [root_v]
    depth = 0
    while frontier and depth < r:
        depth += 1
        nxt = []
        for v in frontier:
            for d in m.darts_of_vertex(v):
                w = int(m.vertex_of[m.alpha[d]])
                if w not in dist:
                    dist[w] = depth
                    nxt.append(w)
        frontier = nxt
    kept = sorted(
        d
        for v in dist
        for d in m.darts_of_vertex(v)
        if int(m.vertex_of[m.alpha[d]]) in dist
    )
    if not kept:
        sub = RootedMap(Map(np.empty(0, dtype=np.int64), check=False), None)
        return sub, np.array([root_v], dtype=np.int64)
    new_id = {d: i for i, d in enumerate(kept)}
    sigma = []
    for d in kept:
        c = int(m.sigma[d])
        while c not in new_id:
            c = int(m.sigma[c])
        sigma.append(new_id[c])
    alpha = [new_id[int(m.alpha[d])] for d in kept]
    sub = Map(sigma, alpha, check=False)
    if rooted.root_dart in new_id:
        root = new_id[rooted.root_dart]
    else:
        root = min(new_id[d] for d in m.darts_of_vertex(root_v) if d in new_id)
    orig = np.zeros(sub.n_vertices, dtype=np.int64)
    for d, i in new_id.items():
        orig[sub.vertex_of[i]] = m.vertex_of[d]
    return RootedMap(sub, root), orig


def canonical_code(rooted: RootedMap, vertex_marks=None) -> bytes:
    """Canonical byte encoding of the rooted isomorphism class.

    Rooted maps are rigid, so the deterministic traversal from the root
    dart (breadth-first, exploring sigma then alpha) induces a canonical
    relabeling; two rooted maps get equal codes iff they are isomorphic.
    vertex_marks, if given, is a per-vertex integer sequence carried
    into the code.
    """
    m = rooted.map
    if m.n_darts == 0:
        mark = 0 if vertex_marks is None else int(vertex_marks[0])
        return b"M0:" + np.array([mark], dtype="<i8").tobytes()
    canon = np.full(m.n_darts, -1, dtype=np.int64)
    order = [rooted.root_dart]
    canon[rooted.root_dart] = 0
    i = 0
    while i < len(order):
        d = order[i]
        i += 1
        for e in (int(m.sigma[d]), int(m.alpha[d])):
            if canon[e] < 0:
                canon[e] = len(order)
                order.append(e)
    rec = [m.n_darts]
    for d in order:
        rec.append(int(canon[m.sigma[d]]))
        rec.append(int(canon[m.alpha[d]]))
        if vertex_marks is not None:
            rec.append(int(vertex_marks[m.tail(d)]))
    return np.array(rec, dtype="<i8").tobytes()


def rooted_isomorphic(a: RootedMap, b: RootedMap) -> bool:
    return canonical_code(a) == canonical_code(b)


def map_to_json(m: Map, root: int | None = None, weights=None) -> str:
    """Interchange form; doubles are written with 17 significant digits."""
    parts = ['{"n_darts": %d' % m.n_darts]
    parts.append(', "sigma": [%s]' % ", ".join(str(int(x)) for x in m.sigma))
    parts.append(', "alpha": [%s]' % ", ".join(str(int(x)) for x in m.alpha))
    parts.append(', "root": %s' % ("null" if root is None else str(int(root))))
    if weights is None:
        parts.append(', "weights": null')
    else:
        parts.append(
            ', "weights": [%s]' % ", ".join("%.17g" % float(w) for w in weights)
        )
    parts.append("}")
    return "".join(parts)


def map_from_json(text: str) -> tuple[Map, int | None, np.ndarray | None]:
    doc = json.loads(text)
    m = build_map(doc["sigma"], doc["alpha"])
    if m.n_darts != doc["n_darts"]:
        raise NotPermutation("n_darts %r does not match sigma" % (doc["n_darts"],))
    root = doc.get("root")
    w = doc.get("weights")
    weights = None if w is None else np.asarray(w, dtype=np.float64)
    return m, root, weights
