"""Angle sums, discrete curvature, the dual root law, and the
corner-label face triangulation.

A corner of a vertex v is a dart d with tail v; the face at that
corner is face_of(d).  The angle sum weights each corner by
pi(deg f - 2)/deg f, and curvature is the deficit from 2 pi.  Faces
listed as marked stand in for infinite faces and contribute pi per
corner, the (inf - 2)/inf = 1 convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DuplicateLabels
from .map_core import Map, build_map

__all__ = [
    "angle_sum",
    "angle_sum_exact",
    "curvature",
    "curvature_report",
    "total_curvature_exact",
    "average_curvature",
    "CurvatureReport",
    "DualRootLaw",
    "dual_root_law",
    "dual_degree_identity",
    "omega_dagger_identity",
    "chord_pairs",
    "linear_chord_count",
    "triangulate_face",
]


def _corner_weights(m: Map, marked_faces) -> np.ndarray:
    """Per-dart corner weight (deg f - 2)/deg f, in units of pi."""
    fd = m.face_degrees.astype(np.float64)
    w = (fd - 2.0) / fd
    if marked_faces:
        w[list(marked_faces)] = 1.0
    return w[m.face_of]


def angle_sum(m: Map, v: int, marked_faces=()) -> float:
    return math.pi * math.fsum(
        float(w) for w in _corner_weights(m, marked_faces)[m.darts_of_vertex(v)]
    )


def angle_sum_exact(m: Map, v: int, marked_faces=()) -> Fraction:
    """Angle sum at v in units of pi."""
    marked = set(marked_faces)
    tot = Fraction(0)
    for d in m.darts_of_vertex(v):
        f = int(m.face_of[d])
        if f in marked:
            tot += 1
        else:
            df = int(m.face_degrees[f])
            tot += Fraction(df - 2, df)
    return tot


def curvature(m: Map, v: int, marked_faces=()) -> float:
    return 2.0 * math.pi - angle_sum(m, v, marked_faces)


@dataclass(frozen=True)
class CurvatureReport:
    theta: np.ndarray
    kappa: np.ndarray
    total_kappa: float
    average_kappa: float

    def to_csv(self, m: Map) -> str:
        lines = ["vertex_id,degree,theta,kappa"]
        for v in range(len(self.theta)):
            lines.append("%d,%d,%.17g,%.17g" % (
                v, m.degree(v), self.theta[v], self.kappa[v]))
        return "\n".join(lines) + "\n"


def curvature_report(m: Map, marked_faces=()) -> CurvatureReport:
    if m.n_darts == 0:
        # dartless single vertex: no corners, theta 0; the Euler-based
        # totals do not apply to this degenerate case
        th = np.zeros(m.n_vertices)
        ka = np.full(m.n_vertices, 2.0 * math.pi)
        return CurvatureReport(th, ka, float(ka.sum()), float(ka.mean()))
    w = _corner_weights(m, marked_faces)
    theta = math.pi * np.bincount(m.vertex_of, weights=w,
                                  minlength=m.n_vertices)
    kappa = 2.0 * math.pi - theta
    total = math.fsum(kappa.tolist())
    return CurvatureReport(theta, kappa, total, total / m.n_vertices)


def total_curvature_exact(m: Map, marked_faces=()) -> Fraction:
    """Sum of kappa over vertices, in units of pi, exact."""
    marked = set(marked_faces)
    tot = Fraction(2 * m.n_vertices)
    for f in range(m.n_faces):
        df = int(m.face_degrees[f])
        if df == 0:
            continue  # dartless degenerate face, no corners
        if f in marked:
            tot -= df
        else:
            tot -= df - 2
    return tot


def average_curvature(m: Map) -> float:
    return curvature_report(m).average_kappa


# -- dual root law -------------------------------------------------------


@dataclass(frozen=True)
class DualRootLaw:
    face_weights: np.ndarray  # probabilities, one per face
    Z: float                  # normalization E[sum over corner faces of 1/deg]


def dual_root_law(m: Map) -> DualRootLaw:
    """Law of the dual root: pick a uniform root vertex, weight each
    face by the sum of 1/deg(f) over the root's corners on f."""
    raw = np.zeros(m.n_faces)
    fd = m.face_degrees.astype(np.float64)
    inv = 1.0 / fd
    np.add.at(raw, m.face_of, inv[m.face_of])
    raw /= m.n_vertices
    z = float(raw.sum())
    return DualRootLaw(raw / z, z)


def dual_degree_identity(m: Map) -> tuple[float, float]:
    """Expected dual-root degree computed two ways."""
    law = dual_root_law(m)
    lhs = float(np.dot(law.face_weights, m.face_degrees))
    mean_deg = m.n_darts / m.n_vertices
    rhs = mean_deg / law.Z
    return lhs, rhs


def omega_dagger_identity(m: Map, omega) -> tuple[float, float]:
    """Root-degree bookkeeping for an edge subset omega and its dual
    complement, evaluated as exact expectation sums.

    lhs is the mean omega-degree of a uniform root; rhs subtracts the
    dual-root mean degree in the complementary dual subset, weighted
    by Z, from the plain mean degree.
    """
    from .errors import NotPlanar

    if m.genus != 0:
        raise NotPlanar("the identity is exposed for genus 0 only")
    in_omega = np.zeros(m.n_edges, dtype=bool)
    if len(omega):
        in_omega[np.asarray(sorted(omega), dtype=np.int64)] = True
    open_dart = in_omega[m.edge_of]
    lhs = float(np.count_nonzero(open_dart)) / m.n_vertices
    law = dual_root_law(m)
    # dual degree of face f in the dual complement: closed darts on f
    dual_deg = np.bincount(m.face_of, weights=(~open_dart).astype(np.float64),
                           minlength=m.n_faces)
    mean_deg = m.n_darts / m.n_vertices
    rhs = mean_deg - law.Z * float(np.dot(law.face_weights, dual_deg))
    return lhs, rhs


# -- corner-label triangulation ------------------------------------------


def _check_labels(labels) -> list[float]:
    labels = [float(x) for x in labels]
    if len(set(labels)) != len(labels):
        raise DuplicateLabels("corner labels must be distinct")
    return labels


def chord_pairs(labels, linear: bool = False) -> list[tuple[int, int]]:
    """Chords (i, j) between non-adjacent corners such that every label
    strictly inside some arc from i to j exceeds both endpoint labels.

    Cyclic faces try both arcs; linear corner sequences only the
    straight interval.  Quadratic reference implementation.
    """
    u = _check_labels(labels)
    n = len(u)
    out = []
    for i in range(n):
        for j in range(i + 2, n):
            if not linear and i == 0 and j == n - 1:
                continue  # adjacent around the wrap
            hi = max(u[i], u[j])
            if all(u[k] > hi for k in range(i + 1, j)):
                out.append((i, j))
            elif not linear and all(u[k % n] > hi
                                    for k in range(j + 1, i + n)):
                out.append((i, j))
    return out


def linear_chord_count(labels) -> int:
    """Number of linear-rule chords, by a monotone stack in O(n).

    A pair is linked when its endpoints are the two smallest labels of
    the window they span; adjacent pairs are excluded from the count.
    """
    u = labels
    stack: list[int] = []
    count = 0
    for j in range(len(u)):
        x = u[j]
        while stack and u[stack[-1]] > x:
            count += 1
            stack.pop()
        if stack:
            count += 1
        stack.append(j)
    return count - (len(u) - 1)


def triangulate_face(m: Map, face: int, labels, linear: bool = False) -> Map:
    """Insert the rule's chords inside one face.

    Labels attach to the face's corners in sigma_dagger order starting
    from the face's representative dart.  With the cyclic rule the
    face splits into triangles; the linear rule leaves the cap between
    the first and last corner untriangulated.
    """
    from .errors import BadParameters

    cyc = m.darts_of_face(face)
    p = len(cyc)
    if p < 3:
        raise BadParameters("face of degree %d cannot be triangulated" % p)
    if len(labels) != p:
        raise BadParameters("need one label per corner")
    chords = chord_pairs(labels, linear=linear)
    n = m.n_darts
    sigma = m.sigma.copy()
    alpha = np.concatenate([m.alpha,
                            np.arange(n, n + 2 * len(chords)) ^ 1])
    sigma = np.concatenate([sigma, np.zeros(2 * len(chords), dtype=np.int64)])
    # chord c gets darts n+2c (at corner i) and n+2c+1 (at corner j)
    at_corner: dict[int, list[tuple[int, int]]] = {}
    for c, (i, j) in enumerate(chords):
        at_corner.setdefault(i, []).append(((j - i) % p, n + 2 * c))
        at_corner.setdefault(j, []).append(((i - j) % p, n + 2 * c + 1))
    for i, items in at_corner.items():
        items.sort()
        d = int(cyc[i])
        follow = sigma[d]
        for _, nd in items:
            sigma[d] = nd
            d = nd
        sigma[d] = follow
    out = build_map(sigma, alpha)
    assert out.genus == m.genus
    return out
