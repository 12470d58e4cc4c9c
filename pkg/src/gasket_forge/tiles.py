"""Reflection-group tiles of packed faces and their boundary geometry.

Each packed face with a simple boundary walk yields a chain of tangent
circles; the group generated by reflections in the chain bounds an open
tile whose boundary is sampled by reflecting the consecutive tangency
points through admissible reflection words.  The recursion below emits the
samples in cyclic boundary order, which also powers point-in-tile tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .mobius import (
    GenCircle,
    INF,
    Reflection,
    cap_overlap,
    compose_reflections,
    fixed_points,
    is_inf,
    map_circle,
    mobius_from_triples,
    spherical_distance,
    sphere_lift,
    tangency_point,
)
from .packing import Packing
from .subdivision import PlanarComplex


class ChainError(ValueError):
    pass


@dataclass
class FaceChain:
    face_id: str
    vertices: tuple
    circles: list
    reflections: list
    tangencies: list  # tangencies[i] joins circle i and circle i+1 (cyclic)

    @property
    def size(self) -> int:
        return len(self.circles)


def boundary_chain(p: Packing, cx: PlanarComplex, face_id: str,
                   tol: float = 1e-6) -> FaceChain:
    """Chain data for a face: consecutive circles tangent, others disjoint."""
    face = cx.faces[face_id]
    walk = face.walk
    r = len(walk)
    if r < 3 or len(set(walk)) != r:
        raise ChainError(f"face {face_id} has no simple boundary walk")
    circles = [p.circles[v] for v in walk]
    for i in range(r):
        for j in range(i + 1, r):
            ov = cap_overlap(circles[i], circles[j])
            adjacent = (j - i) % r in (1, r - 1)
            if adjacent:
                if abs(ov) > tol:
                    raise ChainError(
                        f"face {face_id}: circles {walk[i]},{walk[j]} not tangent (gap {ov:.2e})")
            else:
                if ov > -tol * 1e-3:
                    raise ChainError(
                        f"face {face_id}: non-consecutive circles {walk[i]},{walk[j]} touch")
    tangencies = [tangency_point(circles[i], circles[(i + 1) % r], tol=1e-4)
                  for i in range(r)]
    return FaceChain(face_id=face_id, vertices=tuple(walk), circles=circles,
                     reflections=[Reflection(c) for c in circles],
                     tangencies=tangencies)


def tile_boundary_samples(chain: FaceChain, depth: int):
    """Boundary samples in cyclic order; exactly r*(r-1)^depth points.

    Arc i runs from the tangency t_{i-1} (inclusive) through the i-th disk
    to t_i (exclusive); refining replaces it by the reflected image of the
    complementary arc.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    r = chain.size
    t = chain.tangencies
    arcs = [[t[(i - 1) % r]] for i in range(r)]
    for _ in range(depth):
        new_arcs = []
        for i in range(r):
            g = chain.reflections[i]
            seq = []
            for j in range(i + 1, i + r):
                seq.extend(arcs[j % r])
            img = [g(z) for z in seq]
            img.reverse()
            new_arcs.append([t[(i - 1) % r]] + img[:-1])
        arcs = new_arcs
    out = []
    for a in arcs:
        out.extend(a)
    return out


def admissible_words(r: int, length: int):
    """All index words (i1..il), i_j != i_{j+1}; r*(r-1)^(l-1) of them."""
    if length == 0:
        return [()]
    words = [(i,) for i in range(r)]
    for _ in range(length - 1):
        words = [w + (j,) for w in words for j in range(r) if j != w[-1]]
    return words


def word_disks(chain: FaceChain, depth: int):
    """Nested closed disks D_w for all admissible words of the given length."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    disks = {(i,): chain.circles[i] for i in range(chain.size)}
    for _ in range(depth - 1):
        nxt = {}
        for w, d in disks.items():
            for i in range(chain.size):
                if i != w[0]:
                    nxt[(i,) + w] = map_circle(chain.reflections[i], d)
        disks = nxt
    return disks


def _cap_pair_bound(c1: GenCircle, c2: GenCircle) -> float:
    (n1, r1) = c1.cap()
    (n2, r2) = c2.cap()
    dot = max(-1.0, min(1.0, n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2]))
    return min(math.pi, math.acos(dot) + r1 + r2)


def spherical_diameter(points, cap: int = 1500) -> float:
    pts = points[:: max(1, len(points) // cap)] if len(points) > cap else points
    lifted = [sphere_lift(z) for z in pts]
    best = 0.0
    for i in range(len(lifted)):
        ai = lifted[i]
        for j in range(i + 1, len(lifted)):
            bj = lifted[j]
            chord2 = ((ai[0] - bj[0]) ** 2 + (ai[1] - bj[1]) ** 2
                      + (ai[2] - bj[2]) ** 2)
            if chord2 > best:
                best = chord2
    return 2.0 * math.asin(min(1.0, 0.5 * math.sqrt(best)))


def tile_diameter(chain: FaceChain, depth: int, sample_depth: int = 6):
    """(lower, upper) spherical bounds on the tile diameter.

    Lower: spread of sampled boundary points.  Upper: the smaller of two
    covers of the boundary by the depth-L reflected disks: the pairwise
    disk-to-disk reach, and the sample spread plus twice the largest disk
    diameter (each disk carries its entry and exit samples).
    """
    samples = tile_boundary_samples(chain, max(depth, min(sample_depth, 7)))
    lower = spherical_diameter(samples)
    caps = [d.cap() for d in word_disks(chain, max(1, depth)).values()]
    worst = max(r for _, r in caps)
    upper_local = lower + 4.0 * worst
    upper_pairs = 0.0
    for i in range(len(caps)):
        n1, r1 = caps[i]
        upper_pairs = max(upper_pairs, min(math.pi, 2 * r1))
        for j in range(i + 1, len(caps)):
            n2, r2 = caps[j]
            dot = max(-1.0, min(1.0, n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2]))
            upper_pairs = max(upper_pairs, min(math.pi, math.acos(dot) + r1 + r2))
    upper = min(math.pi, upper_local, upper_pairs)
    return lower, max(lower, upper)


@dataclass
class MarkovTile:
    face_id: str
    level: int
    chain: FaceChain
    samples: list
    markers: dict  # vertex-pair key -> boundary points from alternating words
    diam_lower: float
    diam_upper: float


def limit_markers(chain: FaceChain) -> dict:
    """Boundary points reached by infinite alternating words in two letters.

    For each non-adjacent chain pair these are the two fixed points of the
    composed reflection: exactly the points shared with a tile meeting this
    one in two non-adjacent vertices.
    """
    out = {}
    r = chain.size
    for i in range(r):
        for j in range(i + 1, r):
            if (j - i) % r in (1, r - 1):
                continue
            m = compose_reflections(chain.reflections[i], chain.reflections[j])
            key = frozenset((chain.vertices[i], chain.vertices[j]))
            out[key] = fixed_points(m)
    return out


def tiles_at_level(p: Packing, cx: PlanarComplex, depth: int = 3):
    """One Markov tile per face of the packed complex."""
    tiles = []
    for f in cx.internal_faces():
        chain = boundary_chain(p, cx, f.id)
        lo, up = tile_diameter(chain, depth)
        tiles.append(MarkovTile(face_id=f.id, level=f.level, chain=chain,
                                samples=tile_boundary_samples(chain, min(depth, 6)),
                                markers=limit_markers(chain),
                                diam_lower=lo, diam_upper=up))
    return tiles


def max_tile_diameter(tiles) -> float:
    return max(t.diam_upper for t in tiles)


# --------------------------------------------------------------------------
# Intersection patterns
# --------------------------------------------------------------------------

@dataclass
class IntersectionVerdict:
    case: str
    expected: str  # "0", "1", "2", ">2"
    count: int
    matches: bool
    ambiguous: bool


_CASE_TABLE = {
    "none": "0",
    "vertex": "0",
    "edge": "1",
    "two-nonadjacent-vertices": "2",
    ">=3-vertices": ">2",
}


def shared_boundary_case(face_a, face_b) -> str:
    """Combinatorial intersection class of two face boundaries."""
    va, vb = set(face_a.walk), set(face_b.walk)
    ea = {frozenset((face_a.walk[i], face_a.walk[(i + 1) % len(face_a.walk)]))
          for i in range(len(face_a.walk))}
    eb = {frozenset((face_b.walk[i], face_b.walk[(i + 1) % len(face_b.walk)]))
          for i in range(len(face_b.walk))}
    common_v = va & vb
    common_e = ea & eb
    if not common_v:
        return "none"
    if len(common_v) == 1:
        return "vertex"
    if len(common_e) == 1 and common_v == set(next(iter(common_e))):
        return "edge"
    if len(common_v) == 2 and not common_e:
        return "two-nonadjacent-vertices"
    return ">=3-vertices"


def intersection_pattern(tile_a: MarkovTile, tile_b: MarkovTile, case: str,
                         tol: float) -> IntersectionVerdict:
    """Count near-coincident boundary samples and compare with the case table."""
    expected = _CASE_TABLE[case]
    pts_a = list(tile_a.samples)
    pts_b = list(tile_b.samples)
    for pts, tile in ((pts_a, tile_a), (pts_b, tile_b)):
        for pair in tile.markers.values():
            pts.extend(pair)
    close = []
    ambiguous = False
    for i, za in enumerate(pts_a):
        best = math.inf
        for zb in pts_b:
            d = spherical_distance(za, zb)
            if d < best:
                best = d
        if best <= tol:
            close.append(za)
        elif best <= 10 * tol:
            ambiguous = True
    # cluster the close points
    clusters = []
    for z in close:
        for c in clusters:
            if spherical_distance(z, c[0]) <= 10 * tol:
                c.append(z)
                break
        else:
            clusters.append([z])
    count = len(clusters)
    if expected == ">2":
        matches = count > 2
    else:
        matches = count == int(expected)
    return IntersectionVerdict(case=case, expected=expected, count=count,
                               matches=matches, ambiguous=ambiguous)


# --------------------------------------------------------------------------
# Tangency sets and density gaps
# --------------------------------------------------------------------------

@dataclass
class TangencySet:
    points: dict  # frozenset({u, v}) -> chart point
    level: int


def tangency_points(p: Packing, cx: PlanarComplex) -> TangencySet:
    pts = {}
    for e in sorted(tuple(sorted(t)) for t in cx.edge_set()):
        u, v = e
        pts[frozenset(e)] = tangency_point(p.circles[u], p.circles[v], tol=1e-4)
    return TangencySet(points=pts, level=cx.level)


def density_gap(ts: TangencySet, circle: GenCircle, vertex: str,
                arc=None) -> float:
    """Largest angular gap between consecutive tangency points on a circle.

    ``arc`` optionally restricts to the closed parameter interval (radians
    for proper circles); the gap is measured in the circle's own angular
    parameter.
    """
    params = []
    for key, z in ts.points.items():
        if vertex not in key:
            continue
        if circle.is_line:
            if is_inf(z):
                continue
            t = ((z - circle.center) * (1j * circle.normal).conjugate()).real
            params.append(t)
        else:
            w = z - circle.center
            params.append(math.atan2(w.imag, w.real))
    if len(params) < 2:
        raise ChainError("need at least two tangency points on the circle")
    params.sort()
    if arc is not None:
        lo, hi = arc
        inside = [t for t in params if lo <= t <= hi]
        if len(inside) < 2:
            raise ChainError("fewer than two tangency points in the arc")
        return max(b - a for a, b in zip(inside, inside[1:]))
    gaps = [b - a for a, b in zip(params, params[1:])]
    if not circle.is_line:
        gaps.append(params[0] + 2 * math.pi - params[-1])
    return max(gaps)


# --------------------------------------------------------------------------
# Eccentricity
# --------------------------------------------------------------------------

def _chart_point(axis) -> complex:
    x, y, z = axis
    if z >= 1.0 - 1e-12:
        return INF
    return complex(x, y) / (1.0 - z)


def _normalize3(v):
    n = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    return (v[0] / n, v[1] / n, v[2] / n)


def eccentricity(samples_or_circle, iters: int = 48) -> float:
    """Ratio of circumscribed to inscribed spherical ball about a searched center.

    For boundary samples of a region this estimates the eccentricity from
    above; a geometric disk evaluates to 1 within 1e-6.
    """
    if isinstance(samples_or_circle, GenCircle):
        c = samples_or_circle
        if c.is_line:
            pts = [c.center + 1j * c.normal * math.tan(0.5 * math.pi * (k / 16.0 - 1.0) * 0.98)
                   for k in range(33)]
        else:
            import cmath
            pts = [c.center + c.radius * cmath.exp(2j * math.pi * k / 32) for k in range(32)]
    else:
        pts = list(samples_or_circle)
    if not pts:
        raise ValueError("empty sample set")
    lifted = [sphere_lift(z) for z in pts]
    mean = _normalize3((sum(v[0] for v in lifted), sum(v[1] for v in lifted),
                        sum(v[2] for v in lifted)))

    def ratio(u):
        dots = [max(-1.0, min(1.0, u[0] * v[0] + u[1] * v[1] + u[2] * v[2]))
                for v in lifted]
        dmax = math.acos(min(dots))
        dmin = math.acos(max(dots))
        if dmin <= 1e-15:
            return math.inf
        return dmax / dmin

    best_u, best = mean, ratio(mean)
    step = 0.5
    for _ in range(iters):
        improved = False
        bx, by, bz = best_u
        # deterministic tangent frame
        ref = (1.0, 0.0, 0.0) if abs(bx) < 0.9 else (0.0, 1.0, 0.0)
        t1 = _normalize3((by * ref[2] - bz * ref[1], bz * ref[0] - bx * ref[2],
                          bx * ref[1] - by * ref[0]))
        t2 = (by * t1[2] - bz * t1[1], bz * t1[0] - bx * t1[2], bx * t1[1] - by * t1[0])
        for d in (t1, t2, (-t1[0], -t1[1], -t1[2]), (-t2[0], -t2[1], -t2[2])):
            cand = _normalize3((bx + step * d[0], by + step * d[1], bz + step * d[2]))
            val = ratio(cand)
            if val < best:
                best, best_u = val, cand
                improved = True
        if not improved:
            step *= 0.5
            if step < 1e-10:
                break
    return max(1.0, best)


def quasiroundness_report(p: Packing, cx: PlanarComplex, depth: int = 3):
    """Per-face tile eccentricities at one level."""
    out = {}
    for f in cx.internal_faces():
        chain = boundary_chain(p, cx, f.id)
        samples = tile_boundary_samples(chain, min(depth, 5))
        out[f.id] = eccentricity(samples)
    return out


# --------------------------------------------------------------------------
# Point-in-tile membership and containment
# --------------------------------------------------------------------------

def _strictly_inside(circle: GenCircle, z: complex, margin: float) -> bool:
    (axis, ang) = circle.cap()
    v = sphere_lift(z)
    d = math.acos(max(-1.0, min(1.0, axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2])))
    return d < ang - margin


def tile_membership(chain: FaceChain, z: complex, max_steps: int = 80,
                    margin: float = 1e-12) -> str:
    """Classify a point against the closed tile: "in", "out", or "boundary".

    Reduces the point into the common exterior of the chain disks by
    reflecting while it sits strictly inside one of them, then tests the
    winding of the tangency polygon in a chart centered inside disk 0.
    """
    w = z
    for _ in range(max_steps):
        inside = None
        for i, c in enumerate(chain.circles):
            if _strictly_inside(c, w, margin):
                inside = i
                break
        if inside is None:
            break
        w = chain.reflections[inside](w)
    else:
        return "boundary"
    axis, ang = chain.circles[0].cap()
    # a point well inside disk 0, off the tile; shifting it to infinity keeps
    # every tangency and the reduced point finite
    q = _chart_point(axis)
    if is_inf(q):
        poly = list(chain.tangencies)
        zz = w
    else:
        poly = [0j if is_inf(t) else 1.0 / (t - q) for t in chain.tangencies]
        zz = 0j if is_inf(w) else 1.0 / (w - q)
    if is_inf(zz) or any(is_inf(t) for t in poly):
        return "out"
    winding = 0.0
    import cmath
    for i in range(len(poly)):
        a = poly[i] - zz
        b = poly[(i + 1) % len(poly)] - zz
        if abs(a) < 1e-12 * (1.0 + abs(poly[i])) or abs(b) < 1e-12 * (1.0 + abs(poly[i])):
            return "boundary"
        winding += cmath.phase(b / a)
    return "in" if abs(winding) > math.pi else "out"


def tile_contains(parent: MarkovTile, child: MarkovTile, tol_steps: int = 80) -> bool:
    """Whether the child tile's sampled boundary stays inside the parent tile."""
    for z in child.samples:
        if tile_membership(parent.chain, z, max_steps=tol_steps) == "out":
            return False
    return True


# --------------------------------------------------------------------------
# Limit-set point cloud
# --------------------------------------------------------------------------

def circle_samples(c: GenCircle, count: int):
    import cmath
    if c.is_line:
        return [c.center + 1j * c.normal * math.tan(math.pi * ((k + 0.5) / count - 0.5))
                for k in range(count)]
    return [c.center + c.radius * cmath.exp(2j * math.pi * k / count) for k in range(count)]


def limit_set_cloud(p: Packing, cx: PlanarComplex, depth: int = 3,
                    samples_per_circle: int = 64):
    """Circle samples plus tile boundary samples; deterministic order/count.

    Count = (#circles) * samples_per_circle + sum over faces of r(r-1)^depth.
    """
    pts = []
    for v in sorted(p.circles):
        pts.extend(circle_samples(p.circles[v], samples_per_circle))
    for f in cx.internal_faces():
        chain = boundary_chain(p, cx, f.id)
        pts.extend(tile_boundary_samples(chain, depth))
    return pts
