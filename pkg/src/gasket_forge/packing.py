"""Circle packing solver for spherical complexes.

A sphere triangulation minus one vertex is realized as a maximal packing in
the strip between two parallel lines: the removed vertex's circle is the
real axis (its disk is the lower half-plane), one of its neighbors becomes
the line y = 1, and every remaining circle is determined by driving all
Euclidean angle sums to 2*pi.  Lines act as radius-infinity circles in the
angle formula, so one update rule covers the whole complex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mobius import GenCircle, INF, MobiusMap, is_inf, map_circle, mobius_from_triples, \
    spherical_distance, tangency_point
from .subdivision import PlanarComplex, SubdivisionRule, subdivision_tower


class PackingError(ValueError):
    pass


@dataclass
class Triangulation:
    vertices: list
    triangles: list  # oriented vertex triples
    helper_of: dict  # helper vertex id -> face id
    original_edges: set  # frozenset pairs of the untriangulated complex


def star_triangulate(cx: PlanarComplex) -> Triangulation:
    """Add one hub per face with >= 4 sides; original edges survive."""
    if cx.external is not None:
        raise PackingError("star triangulation expects a spherical complex")
    triangles = []
    helper_of = {}
    for f in cx.faces.values():
        w = f.walk
        if len(set(w)) != len(w):
            raise PackingError(f"face {f.id} walk is not simple")
        if len(w) == 3:
            triangles.append(tuple(w))
            continue
        hub = f"#{f.id}"
        helper_of[hub] = f.id
        for i in range(len(w)):
            triangles.append((w[i], w[(i + 1) % len(w)], hub))
    vertices = list(cx.vertices()) + sorted(helper_of)
    return Triangulation(vertices=vertices, triangles=triangles,
                         helper_of=helper_of, original_edges=cx.edge_set())


@dataclass
class SolverConfig:
    epsilon: float = 1e-10
    max_iterations: int = 1_000_000
    damping: float = 1.0


@dataclass
class Packing:
    circles: dict
    outer: str
    tangency_residual: float
    angle_residual: float
    converged: bool
    chart_note: str = "plane"
    normalization: str = "strip"

    def circle(self, v: str) -> GenCircle:
        return self.circles[v]

    def tangency(self, u: str, v: str) -> complex:
        return tangency_point(self.circles[u], self.circles[v])


def _triangle_arrays(tri: Triangulation, index: dict, line_ids):
    """Per-corner arrays (vertex, nbr1, nbr2) with -1 marking line neighbors."""
    vs, n1, n2 = [], [], []
    for (a, b, c) in tri.triangles:
        for v, x, y in ((a, b, c), (b, c, a), (c, a, b)):
            if v in line_ids:
                continue
            vs.append(index[v])
            n1.append(-1 if x in line_ids else index[x])
            n2.append(-1 if y in line_ids else index[y])
    return np.array(vs), np.array(n1), np.array(n2)


def solve_max_packing(tri: Triangulation, outer: str, cfg: SolverConfig = None) -> Packing:
    """Maximal packing with the given vertex realized as the outer circle."""
    cfg = cfg or SolverConfig()
    verts = tri.vertices
    index = {v: i for i, v in enumerate(verts)}
    if outer not in index:
        raise PackingError(f"unknown outer vertex {outer!r}")
    nbrs = {}
    tri_count = {}
    for t in tri.triangles:
        for v, x, y in ((t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[2], t[0], t[1])):
            nbrs.setdefault(v, set()).update((x, y))
            tri_count[v] = tri_count.get(v, 0) + 1
    for v in verts:
        if len(nbrs.get(v, ())) < 3:
            raise PackingError(f"vertex {v!r} has degree < 3: not a sphere triangulation")
    if len(tri.triangles) != 2 * len(verts) - 4:
        raise PackingError("triangle count is not 2V - 4: not a sphere triangulation")

    b0 = sorted(nbrs[outer])[0]
    side_tris = [t for t in tri.triangles if outer in t and b0 in t]
    if len(side_tris) != 2:
        raise PackingError("edge to the gauge neighbor must bound two triangles")
    pin = sorted((set(side_tris[0]) | set(side_tris[1])) - {outer, b0})[0]

    line_ids = {outer, b0}
    n = len(verts)
    rho = np.full(n, 0.5)
    corner_v, corner_a, corner_b = _triangle_arrays(tri, index, line_ids)
    pin_i = index[pin]
    free_mask = np.ones(n, bool)
    for v in line_ids:
        free_mask[index[v]] = False
    count = np.zeros(n)
    np.add.at(count, corner_v, 1.0)

    def angle_sums(r):
        rv = r[corner_v]
        fa = np.where(corner_a < 0, 1.0, r[corner_a] / (rv + np.abs(r[corner_a])))
        fb = np.where(corner_b < 0, 1.0, r[corner_b] / (rv + np.abs(r[corner_b])))
        ang = 2.0 * np.arcsin(np.sqrt(np.clip(fa * fb, 0.0, 1.0)))
        out = np.zeros(n)
        np.add.at(out, corner_v, ang)
        return out

    adjust = free_mask.copy()
    adjust[pin_i] = False
    target = 2.0 * math.pi
    q = np.where(count > 0, np.sin(np.pi / np.maximum(count, 1.0)), 1.0)
    converged = False
    sweeps = 0
    lam = cfg.damping
    sweep_budget = min(cfg.max_iterations, 5000)
    while sweeps < sweep_budget:
        sweeps += 1
        theta = angle_sums(rho)
        err = np.max(np.abs(theta[free_mask] - target)) if free_mask.any() else 0.0
        if err <= cfg.epsilon:
            converged = True
            break
        s = np.sin(theta / (2.0 * np.maximum(count, 1.0)))
        s = np.clip(s, 1e-14, 1.0 - 1e-14)
        rhat = rho * s / (1.0 - s)
        new = rhat * (1.0 - q) / np.maximum(q, 1e-14)
        new = np.clip(new, 1e-14, 1e14)
        if lam != 1.0:
            new = rho * (new / rho) ** lam
        rho = np.where(adjust, new, rho)
        rho[pin_i] = 0.5
    if not converged:
        # Newton stage: the sweep iteration stalls on long near-parabolic
        # chains, while the angle-sum system is small enough for dense LU.
        rho, converged = _newton_refine(rho, adjust, corner_v, corner_a, corner_b,
                                        angle_sums, cfg.epsilon, target)

    theta = angle_sums(rho)
    angle_residual = float(np.max(np.abs(theta[free_mask] - target)))

    circles = _layout(tri, index, rho, outer, b0, pin)
    _polish_layout(tri, circles, fixed=(outer, b0, pin))
    tangency_residual = _tangency_residual(tri, circles)
    return Packing(circles=circles, outer=outer,
                   tangency_residual=tangency_residual,
                   angle_residual=angle_residual, converged=converged,
                   normalization=f"strip outer={outer} top={b0} pin={pin}")


def _newton_refine(rho, adjust, corner_v, corner_a, corner_b, angle_sums,
                   eps, target, max_steps: int = 60):
    """Damped Newton on the angle-defect system over the adjustable radii."""
    n = len(rho)
    free_idx = np.flatnonzero(adjust)
    col = -np.ones(n, dtype=int)
    col[free_idx] = np.arange(len(free_idx))

    def residual(r):
        th = angle_sums(r)
        return th[free_idx] - target

    def jacobian(r):
        m = len(free_idx)
        J = np.zeros((m, m))
        rv = r[corner_v]
        line_a = corner_a < 0
        line_b = corner_b < 0
        ra = np.where(line_a, 1.0, r[corner_a])
        rb = np.where(line_b, 1.0, r[corner_b])
        fa = np.where(line_a, 1.0, ra / (rv + ra))
        fb = np.where(line_b, 1.0, rb / (rv + rb))
        s2 = np.clip(fa * fb, 1e-300, 1.0)
        s = np.sqrt(s2)
        both_line = line_a & line_b
        denom = np.sqrt(np.clip(1.0 - s2, 1e-18, 1.0))
        pref = np.where(both_line, 0.0, 1.0 / (s * denom))
        dfa_dv = np.where(line_a, 0.0, -ra / (rv + ra) ** 2)
        dfb_dv = np.where(line_b, 0.0, -rb / (rv + rb) ** 2)
        dfa_da = np.where(line_a, 0.0, rv / (rv + ra) ** 2)
        dfb_db = np.where(line_b, 0.0, rv / (rv + rb) ** 2)
        dv = pref * (fb * dfa_dv + fa * dfb_dv)
        da = pref * (fb * dfa_da)
        db = pref * (fa * dfb_db)
        for vi, ai, bi, dvi, dai, dbi in zip(corner_v, corner_a, corner_b, dv, da, db):
            rI = col[vi]
            if rI < 0:
                continue
            J[rI, rI] += dvi
            if ai >= 0 and col[ai] >= 0:
                J[rI, col[ai]] += dai
            if bi >= 0 and col[bi] >= 0:
                J[rI, col[bi]] += dbi
        return J

    r = rho.copy()
    err = float(np.max(np.abs(residual(r)))) if len(free_idx) else 0.0
    if err <= eps:
        return r, True
    for _ in range(max_steps):
        try:
            delta = np.linalg.solve(jacobian(r), -residual(r))
        except np.linalg.LinAlgError:
            return r, False
        step = 1.0
        for _ in range(40):
            trial = r.copy()
            moved = r[free_idx] + step * delta
            trial[free_idx] = np.maximum(moved, r[free_idx] * 1e-3)
            new_err = float(np.max(np.abs(residual(trial))))
            if new_err < err:
                r, err = trial, new_err
                break
            step *= 0.5
        else:
            return r, err <= eps
        if err <= eps:
            return r, True
    return r, err <= eps


def _tangent_point_pair(c1: GenCircle, c2: GenCircle) -> complex:
    return tangency_point(c1, c2, tol=math.inf)


def _ccw(p: complex, q: complex, r: complex) -> float:
    return ((q - p) * (r - p).conjugate()).imag * -1.0


def _layout(tri: Triangulation, index, rho, outer, b0, pin):
    lower = GenCircle.line(0j, -1j)  # real axis, disk below
    upper = GenCircle.line(1j, 1j)  # y = 1, disk above
    circles = {outer: lower, b0: upper}
    placed = {outer, b0}
    circles[pin] = GenCircle.proper(complex(0.0, 0.5), 0.5)
    placed.add(pin)

    by_edge = {}
    for t in tri.triangles:
        for i in range(3):
            by_edge.setdefault(frozenset((t[i], t[(i + 1) % 3])), []).append(t)

    from collections import deque

    queue = deque(tri.triangles)
    stall = 0
    while queue and stall <= len(queue):
        t = queue.popleft()
        missing = [v for v in t if v not in placed]
        if not missing:
            stall = 0
            continue
        if len(missing) > 1:
            queue.append(t)
            stall += 1
            continue
        target = missing[0]
        i = t.index(target)
        u, v = t[(i + 1) % 3], t[(i + 2) % 3]  # triangle cyclic order (target, u, v)
        cu, cv = circles[u], circles[v]
        if cu.is_line and cv.is_line:
            queue.append(t)
            stall += 1
            continue
        r = rho[index[target]]
        cands = _tangent_candidates(cu, cv, r)
        if not cands:
            queue.append(t)
            stall += 1
            continue
        best = None
        best_cross = -math.inf
        for c in cands:
            cand = GenCircle.proper(c, r)
            # Orientation: in triangle (target, u, v) the tangency triple
            # (T_uv, T_v-target, T_target-u) must wind positively.
            t_uv = _tangent_point_pair(cu, cv)
            t_vt = _tangent_point_pair(cv, cand)
            t_tu = _tangent_point_pair(cand, cu)
            if is_inf(t_uv):
                continue
            cross = _ccw(t_uv, t_vt, t_tu)
            if cross > best_cross:
                best_cross = cross
                best = cand
        if best is None:
            queue.append(t)
            stall += 1
            continue
        circles[target] = best
        placed.add(target)
        stall = 0
    if len(placed) != len(tri.vertices):
        raise PackingError(f"layout incomplete: placed {len(placed)} of {len(tri.vertices)}")
    return circles


def _tangent_candidates(cu: GenCircle, cv: GenCircle, r: float):
    """Centers of circles of radius r tangent to two placed circles/lines."""
    out = []
    if cu.is_line or cv.is_line:
        line, circ = (cu, cv) if cu.is_line else (cv, cu)
        # Tangent to y=0 from above or y=1 from below.
        y = r if line.center == 0j else 1.0 - r
        dy = y - circ.center.imag
        h2 = (circ.radius + r) ** 2 - dy * dy
        if h2 < 0:
            return out
        h = math.sqrt(h2)
        for sx in (+1.0, -1.0):
            out.append(complex(circ.center.real + sx * h, y))
        return out
    d = abs(cv.center - cu.center)
    if d == 0:
        return out
    e = (cv.center - cu.center) / d
    r1 = cu.radius + r
    r2 = cv.radius + r
    a = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
    h2 = r1 * r1 - a * a
    if h2 < -1e-9 * r1 * r1:
        return out
    h = math.sqrt(max(h2, 0.0))
    base = cu.center + a * e
    for s in (+1.0, -1.0):
        out.append(base + s * 1j * h * e)
    return out


def _polish_layout(tri: Triangulation, circles, fixed, sweeps: int = 30):
    """Local center corrections so each circle meets its tangency constraints.

    The tangency walk accumulates absolute error across scales; a few rounds
    of per-vertex Gauss-Seidel bring every gap down to the local roundoff.
    """
    nbrs = {}
    for t in tri.triangles:
        for i in range(3):
            nbrs.setdefault(t[i], set()).update((t[(i + 1) % 3], t[(i + 2) % 3]))
    order = sorted(v for v in tri.vertices if v not in fixed)
    for _ in range(sweeps):
        worst = 0.0
        for v in order:
            cv = circles[v]
            if cv.is_line:
                continue
            c = cv.center
            corr = 0j
            count = 0
            rel = 0.0
            for u in nbrs[v]:
                cu = circles[u]
                if cu.is_line:
                    s = ((c - cu.center) * cu.normal.conjugate()).real
                    towards = cu.normal if s >= 0 else -cu.normal
                    gap = abs(s) - cv.radius
                    corr -= gap * towards
                else:
                    d = abs(c - cu.center)
                    if d == 0.0:
                        continue
                    gap = d - (cv.radius + cu.radius)
                    corr -= gap * (c - cu.center) / d
                count += 1
                rel = max(rel, abs(gap) / max(cv.radius, 1e-300))
            if count:
                circles[v] = GenCircle.proper(c + corr / count, cv.radius,
                                              cv.orientation)
            worst = max(worst, rel)
        if worst < 1e-13:
            break


def _edge_gap(c1: GenCircle, c2: GenCircle) -> float:
    """Relative tangency defect of two circles that should be tangent."""
    if c1.is_line and c2.is_line:
        cross = (c1.normal * c2.normal.conjugate()).imag
        return abs(cross)
    if c1.is_line or c2.is_line:
        line, circ = (c1, c2) if c1.is_line else (c2, c1)
        s = abs(((circ.center - line.center) * line.normal.conjugate()).real)
        return abs(s - circ.radius) / max(circ.radius, 1e-300)
    d = abs(c1.center - c2.center)
    ext = abs(d - (c1.radius + c2.radius))
    inn = abs(abs(c1.radius - c2.radius) - d)
    return min(ext, inn) / max(c1.radius, c2.radius)


def _tangency_residual(tri: Triangulation, circles) -> float:
    worst = 0.0
    seen = set()
    for t in tri.triangles:
        for i in range(3):
            e = frozenset((t[i], t[(i + 1) % 3]))
            if e in seen:
                continue
            seen.add(e)
            u, v = tuple(e)
            worst = max(worst, _edge_gap(circles[u], circles[v]))
    return worst


def apply_mobius(p: Packing, m: MobiusMap) -> Packing:
    circles = {v: map_circle(m, c) for v, c in p.circles.items()}
    res = 0.0
    return Packing(circles=circles, outer=p.outer,
                   tangency_residual=p.tangency_residual,
                   angle_residual=p.angle_residual, converged=p.converged,
                   chart_note=p.chart_note, normalization=p.normalization)


def normalize(p: Packing, src_points, dst_points) -> Packing:
    """Mobius-normalize a packing by three point pairs."""
    m = mobius_from_triples(*src_points, *dst_points)
    q = apply_mobius(p, m)
    q.normalization = f"points->{dst_points}"
    return q


def default_outer(cx: PlanarComplex) -> str:
    """Max-degree level-0 vertex, ties broken by id."""
    rot = cx.rotations()
    level0 = [v for v in cx.vertices() if cx.vertex_level.get(v, 0) == 0]
    return sorted(level0, key=lambda v: (-len(rot[v]), v))[0]


def canonical_normalization_edges(cx0: PlanarComplex):
    """First three level-0 edges in id order; their tangencies go to 0, 1, inf."""
    edges = sorted(tuple(sorted(e)) for e in cx0.edge_set())
    return edges[:3]


def drop_helpers(p: Packing, tri: Triangulation) -> Packing:
    circles = {v: c for v, c in p.circles.items() if v not in tri.helper_of}
    return Packing(circles=circles, outer=p.outer,
                   tangency_residual=p.tangency_residual,
                   angle_residual=p.angle_residual, converged=p.converged,
                   chart_note=p.chart_note, normalization=p.normalization)


def pack_complex(cx: PlanarComplex, cfg: SolverConfig = None, outer: str = None,
                 norm_edges=None) -> Packing:
    """Triangulate, solve, drop hubs, and optionally Mobius-normalize."""
    tri = star_triangulate(cx)
    outer = outer or default_outer(cx)
    sol = solve_max_packing(tri, outer, cfg)
    sol = drop_helpers(sol, tri)
    if norm_edges:
        src = [tangency_point(sol.circles[u], sol.circles[v], tol=1e-3)
               for (u, v) in norm_edges]
        sol = normalize(sol, src, (0j, 1 + 0j, INF))
        sol.normalization = f"edges:{norm_edges}->0,1,inf"
    return sol


def pack_level(cx0: PlanarComplex, rule: SubdivisionRule, n: int,
               cfg: SolverConfig = None, outer: str = None) -> Packing:
    """Subdivide a spherical complex to level n and pack it canonically.

    The default angle target is tighter than the solver default so that the
    post-layout tangency residual stays at the 1e-10 scale.
    """
    tower = subdivision_tower(cx0, rule, n)
    cfg = cfg or SolverConfig(epsilon=1e-12)
    return pack_complex(tower[-1], cfg=cfg, outer=outer,
                        norm_edges=canonical_normalization_edges(tower[0]))


def measure_convergence(pa: Packing, pb: Packing, edges=None) -> float:
    """Max spherical drift of shared tangency points between two packings.

    ``edges`` restricts the comparison (pairs of vertex ids); otherwise all
    shared tangent pairs are scanned.
    """
    if pa.normalization != pb.normalization:
        raise PackingError("packings use different normalizations")
    shared = set(pa.circles) & set(pb.circles)
    if not shared:
        raise PackingError("packings share no vertices")
    if edges is None:
        edges = [(u, v) for u in shared for v in shared if u < v]
    worst = 0.0
    for u, v in edges:
        if u not in shared or v not in shared:
            continue
        try:
            ta = tangency_point(pa.circles[u], pa.circles[v])
            tb = tangency_point(pb.circles[u], pb.circles[v])
        except ValueError:
            continue
        worst = max(worst, spherical_distance(ta, tb))
    return worst
