"""Markov dynamics induced by subdivision homomorphisms.

The vertex map of a homomorphism G^1 -> G^0 transports canonically to every
deeper level, acts on circles and tangency points of a packing, defines
Markov partitions on invariant circles, and drives the measured parabolic
asymptotics and Mobius symmetry estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mobius import (
    INF,
    MobiusMap,
    cap_mismatch,
    classify,
    map_circle,
    mobius_from_triples,
    spherical_distance,
    tangency_point,
)
from .packing import Packing, SolverConfig, pack_complex, canonical_normalization_edges
from .subdivision import (
    ComplexError,
    PlanarComplex,
    SubdivisionHomomorphism,
    SubdivisionRule,
    partial_subdivide,
    subdivision_tower,
    subtree_vertex_map,
)


@dataclass
class VertexMarkovMap:
    """The induced vertex dynamics: one map defined on every computed level."""

    psi: dict
    face_image: dict
    tower: list
    hom: SubdivisionHomomorphism

    def apply(self, v: str, power: int = 1) -> str:
        for _ in range(power):
            v = self.psi[v]
        return v


def induce_vertex_markov(hom: SubdivisionHomomorphism, tower) -> VertexMarkovMap:
    """Extend the homomorphism's vertex map to all levels of the tower.

    A vertex born inside a face maps to the same interior label inside the
    image face; edge-equivariance is then verified exhaustively per level.
    """
    psi = dict(hom.vertex_map)
    face_image = dict(hom.face_map)
    start = hom.g1.level + 1
    gap = hom.g1.level - hom.g0.level
    for level in range(start, len(tower)):
        for f in tower[level].internal_faces():
            parent = f.parent
            img_parent = face_image.get(parent)
            if img_parent is None:
                raise ComplexError(f"no image for parent face {parent}")
            image_id = f"{img_parent}/{f.cell_index}"
            if image_id not in tower[level - gap].faces:
                raise ComplexError(f"transport ambiguity at face {f.id}: "
                                   f"missing image {image_id}")
            face_image[f.id] = image_id
    for level in range(start, len(tower)):
        for f in tower[level].internal_faces():
            # interior vertices born at this level inside the parent face
            img_parent = face_image[f.parent]
            for v in f.walk:
                if v in psi:
                    continue
                if not v.startswith(f"{f.parent}."):
                    raise ComplexError(f"vertex {v} not transportable (face {f.id})")
                lbl = v[len(f.parent) + 1:]
                psi[v] = f"{img_parent}.{lbl}"
    vm = VertexMarkovMap(psi=psi, face_image=face_image, tower=tower, hom=hom)
    verify_edge_equivariance(vm)
    return vm


def verify_edge_equivariance(vm: VertexMarkovMap):
    """Every edge at one level must map to an edge one homomorphism-step down."""
    gap = vm.hom.g1.level - vm.hom.g0.level
    for level in range(max(1, gap), len(vm.tower)):
        target_edges = vm.tower[level - gap].edge_set()
        for e in vm.tower[level].edge_set():
            u, v = tuple(e)
            iu, iv = vm.psi.get(u), vm.psi.get(v)
            if iu is None or iv is None or iu == iv \
                    or frozenset((iu, iv)) not in target_edges:
                raise ComplexError(
                    f"edge ({u},{v}) at level {level} maps to non-edge ({iu},{iv})")


# --------------------------------------------------------------------------
# Markov partitions on invariant circles
# --------------------------------------------------------------------------

@dataclass
class InvariantCircleData:
    vertex: str
    power: int
    neighbors: tuple  # counterclockwise rotation order
    points: dict  # neighbor -> tangency point on the invariant circle
    endpoint_map: dict  # neighbor -> neighbor
    degree: int


def markov_partition_on_circle(p: Packing, vm: VertexMarkovMap, v: str,
                               power: int = 1) -> InvariantCircleData:
    """Partition of an invariant circle by its neighbor tangency points."""
    if vm.apply(v, power) != v:
        raise ComplexError(f"vertex {v} is not fixed by the dynamics (power {power})")
    cx = vm.tower[power]
    neighbors = cx.rotations()[v]
    points = {u: tangency_point(p.circles[v], p.circles[u], tol=1e-4)
              for u in neighbors}
    endpoint_map = {}
    for u in neighbors:
        image = vm.apply(u, power)
        if image not in points:
            raise ComplexError(f"endpoint image {image} is not a partition point")
        endpoint_map[u] = image
    n = len(neighbors)
    idx = {u: i for i, u in enumerate(neighbors)}
    incs = []
    for i, u in enumerate(neighbors):
        j_cur = idx[endpoint_map[u]]
        j_nxt = idx[endpoint_map[neighbors[(i + 1) % n]]]
        incs.append((j_nxt - j_cur) % n)
    total = sum(incs)
    if total % n != 0:
        raise ComplexError("endpoint dynamics does not wind consistently")
    return InvariantCircleData(vertex=v, power=power, neighbors=neighbors,
                               points=points, endpoint_map=endpoint_map,
                               degree=total // n)


def preserves_cyclic_order(icd: InvariantCircleData) -> bool:
    """The endpoint map must traverse the image cycle monotonically."""
    n = len(icd.neighbors)
    idx = {u: i for i, u in enumerate(icd.neighbors)}
    images = [idx[icd.endpoint_map[u]] for u in icd.neighbors]
    total = 0
    for i in range(n):
        total += (images[(i + 1) % n] - images[i]) % n
    return total == icd.degree * n


# --------------------------------------------------------------------------
# Nested face chains and parabolic asymptotics
# --------------------------------------------------------------------------

def edge_chain_faces(tower, rule: SubdivisionRule, start_face: str, edge):
    """Per level, the nested face below ``start_face`` keeping ``edge``.

    Returns a list of face ids; entry k lives at level k + level(start).
    """
    u, w = edge
    chain = [start_face]
    for level in range(1, len(tower)):
        cur = chain[-1]
        found = None
        for j in range(len(rule.cells(tower[level - 1].faces[cur].type))):
            child = tower[level].faces.get(f"{cur}/{j}")
            if child is None:
                continue
            walk = child.walk
            n = len(walk)
            for i in range(n):
                a, b = walk[i], walk[(i + 1) % n]
                if {a, b} == {u, w}:
                    found = child.id
                    break
            if found:
                break
        if not found:
            break
        chain.append(found)
    return chain


def _chain_other_neighbor(face, v: str, w: str) -> str:
    walk = face.walk
    n = len(walk)
    i = walk.index(v)
    prev_v, next_v = walk[(i - 1) % n], walk[(i + 1) % n]
    return prev_v if next_v == w else next_v


@dataclass
class ChainRefinedPacking:
    packing: Packing
    complexes: object
    vertex: str
    fixed_neighbor: str
    opposite: str
    chain_neighbors: list  # distinct nested endpoints, one per dynamical step


def build_chain_refined_packing(cx0: PlanarComplex, rule: SubdivisionRule,
                                base_level: int, start_face: str, edge,
                                steps: int, step_levels: int = 2,
                                cfg: SolverConfig = None) -> ChainRefinedPacking:
    """Packing of a base-level complex with one nested edge chain refined deep.

    The faces keeping ``edge`` below ``start_face`` are subdivided for
    ``steps`` dynamical steps of ``step_levels`` subdivisions each; all other
    faces stay at the base level.  The nested tangency endpoints along the
    invariant circle come out of the chain walks.
    """
    v, w = edge
    tower = subdivision_tower(cx0, rule, base_level)
    chain = edge_chain_faces(tower, rule, start_face, edge)
    neighbors = []
    for k, fid in enumerate(chain):
        face = tower[k].faces[fid]
        neighbors.append(_chain_other_neighbor(face, v, w))
    cx = tower[-1]
    cur = chain[-1]
    cur_level = len(chain) - 1
    total_levels = steps * step_levels
    while cur_level < total_levels:
        cx = partial_subdivide(cx, rule, [cur])
        cur_level += 1
        found = None
        for j in range(len(rule.cells(rule.polygon_ids()[0]))):
            child = cx.faces.get(f"{cur}/{j}")
            if child is None:
                continue
            walk = child.walk
            n = len(walk)
            if any({walk[i], walk[(i + 1) % n]} == {v, w} for i in range(n)):
                found = child.id
                break
        if not found:
            raise ComplexError(f"chain lost the edge at {cur}")
        cur = found
        neighbors.append(_chain_other_neighbor(cx.faces[cur], v, w))
    # other-side neighbor for the normalization: from the face across the edge
    other_face = None
    for f in tower[min(1, len(tower) - 1)].internal_faces():
        walk = f.walk
        n = len(walk)
        if any({walk[i], walk[(i + 1) % n]} == {v, w} for i in range(n)) \
                and f.id not in chain:
            other_face = f
            break
    if other_face is None:
        raise ComplexError("no opposite face across the chain edge")
    opposite = _chain_other_neighbor(other_face, v, w)
    # the outer circle must stay away from the refined cusp at the chain edge
    rot = cx.rotations()
    outer = sorted((x for x in tower[0].vertices() if x not in (v, w)),
                   key=lambda x: (-len(rot[x]), x))[0]
    packing = pack_complex(cx, cfg=cfg or SolverConfig(epsilon=1e-12), outer=outer,
                           norm_edges=canonical_normalization_edges(tower[0]))
    distinct = []
    for u in neighbors[1:]:
        if not distinct or distinct[-1] != u:
            distinct.append(u)
    return ChainRefinedPacking(packing=packing, complexes=cx, vertex=v,
                               fixed_neighbor=w, opposite=opposite,
                               chain_neighbors=distinct)


def least_squares_slope(xs, ys) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = sum((x - mx) ** 2 for x in xs)
    return num / den


@dataclass
class AsymptoticsReport:
    distances: list
    gaps: list
    s_d: float
    s_g: float
    window: tuple


def fit_parabolic_exponents(distances, gaps, window=(0.1, 1.0)) -> "tuple":
    """Log-log slopes of the nested distances and gaps.

    Distances are fitted against their index n; the gap between steps n and
    n+1 is fitted against sqrt(n(n+1)), the natural midpoint index, which
    makes the exact model sequence 1/n come out at slopes (-1, -2) to
    machine precision.
    """
    m = len(distances)
    lo = max(1, int(math.floor(window[0] * m)))
    hi = int(math.floor(window[1] * m))
    if hi - lo < 3:
        raise ValueError("too few points for a stable fit")
    ns = list(range(lo, hi + 1))
    xs = [math.log(n) for n in ns]
    ys = [math.log(distances[n - 1]) for n in ns]
    s_d = least_squares_slope(xs, ys)
    ns_g = [n for n in ns if n <= len(gaps)]
    xg = [0.5 * math.log(n * (n + 1.0)) for n in ns_g]
    yg = [math.log(gaps[n - 1]) for n in ns_g]
    s_g = least_squares_slope(xg, yg)
    return s_d, s_g


def parabolic_asymptotics(crp: ChainRefinedPacking, count: int,
                          window=(0.1, 1.0)) -> AsymptoticsReport:
    """Measured decay of the nested tangency points toward the fixed tangency.

    Distances d_n = |a_n| and gaps g_n = |a_n - a_{n+1}| are taken after the
    chart is pinned by (fixed tangency, first endpoint, opposite endpoint)
    -> (0, 1, inf), matching the model normalization.
    """
    if count < 5:
        raise ValueError("need at least 5 points to fit asymptotics")
    p = crp.packing
    v = crp.vertex
    if len(crp.chain_neighbors) < count:
        raise ValueError(f"chain supports only {len(crp.chain_neighbors)} points")
    a = tangency_point(p.circles[v], p.circles[crp.fixed_neighbor], tol=1e-4)
    a1 = tangency_point(p.circles[v], p.circles[crp.chain_neighbors[0]], tol=1e-4)
    aopp = tangency_point(p.circles[v], p.circles[crp.opposite], tol=1e-4)
    m = mobius_from_triples(a, a1, aopp, 0j, 1 + 0j, INF)
    xs = []
    for u in crp.chain_neighbors[:count]:
        t = tangency_point(p.circles[v], p.circles[u], tol=1e-4)
        xs.append(m(t))
    distances = [abs(x) for x in xs]
    gaps = [abs(x - y) for x, y in zip(xs, xs[1:])]
    s_d, s_g = fit_parabolic_exponents(distances, gaps, window)
    return AsymptoticsReport(distances=distances, gaps=gaps, s_d=s_d, s_g=s_g,
                             window=window)


def model_asymptotics(count: int, window=(0.1, 1.0)) -> AsymptoticsReport:
    """Reference sequence a_n = 1/n of the exact parabolic model z/(z+1)."""
    xs = [1.0 / n for n in range(1, count + 1)]
    distances = xs
    gaps = [a - b for a, b in zip(xs, xs[1:])]
    s_d, s_g = fit_parabolic_exponents(distances, gaps, window)
    return AsymptoticsReport(distances=distances, gaps=gaps, s_d=s_d, s_g=s_g,
                             window=window)


# --------------------------------------------------------------------------
# Periodic face sequences and Mobius symmetry estimates
# --------------------------------------------------------------------------

@dataclass
class PeriodicFaceSequence:
    face_ids: list
    period: int
    kind: str  # "hyperbolic" | "parabolic"
    shared_vertices: set
    shared_edges: set


def classify_periodic_faces(tower, face_ids, period: int) -> PeriodicFaceSequence:
    """Type a nested periodic face sequence by its boundary recurrence."""
    if period < 1 or len(face_ids) < period + 1:
        raise ComplexError("need at least period+1 nested faces")
    paths = []
    for k in range(len(face_ids) - period):
        a, b = face_ids[k], face_ids[k + period]
        if not b.startswith(a + "/"):
            raise ComplexError(f"{b} does not descend from {a}")
        paths.append(b[len(a):])
    # the relative position of F^{n+p} inside F^n must recur with period p
    if any(paths[k] != paths[k + period] for k in range(len(paths) - period)):
        raise ComplexError("sequence is not periodic: descent paths differ")
    faces = {}
    for cx in tower:
        faces.update(cx.faces)
    f0 = faces[face_ids[0]]
    fp = faces[face_ids[period]]
    if f0.type != fp.type:
        raise ComplexError("period does not preserve the face type")
    w0 = set(f0.walk)
    wp = set(fp.walk)
    e0 = {frozenset((f0.walk[i], f0.walk[(i + 1) % len(f0.walk)]))
          for i in range(len(f0.walk))}
    ep = {frozenset((fp.walk[i], fp.walk[(i + 1) % len(fp.walk)]))
          for i in range(len(fp.walk))}
    shared_v = w0 & wp
    shared_e = e0 & ep
    kind = "hyperbolic" if (not shared_e and len(shared_v) <= 1) else "parabolic"
    return PeriodicFaceSequence(face_ids=list(face_ids), period=period, kind=kind,
                                shared_vertices=shared_v, shared_edges=shared_e)


@dataclass
class SymmetryEstimate:
    mobius: MobiusMap
    residual: float
    classification: str
    tr2_gap: float
    pairs: int
    level: int


def estimate_mobius_symmetry(p: Packing, tower, rule: SubdivisionRule,
                             seq: PeriodicFaceSequence, fit_cap: int = 4,
                             class_tol: float = 1e-6) -> SymmetryEstimate:
    """Fit the renormalization Mobius map of a periodic face sequence.

    The germ is fitted at the deepest phase-aligned period of the sequence
    (capped, so deeper packings refine the same comparison), where the
    renormalization structure has settled.  Measured in the frame pinned by
    the target face's first three boundary tangencies, so the residual is
    invariant under pre-composing the packing with any Mobius map.
    """
    faces = {}
    levels = {}
    for lv, cx in enumerate(tower):
        for fid, f in cx.faces.items():
            faces.setdefault(fid, f)
            levels.setdefault(fid, lv)
    k_src = len(seq.face_ids) - 1
    k_src -= k_src % seq.period
    k_src = max(seq.period, min(k_src, fit_cap))
    f0 = faces[seq.face_ids[k_src - seq.period]]
    fp = faces[seq.face_ids[k_src]]
    l0, lp = levels[f0.id], levels[fp.id]

    def chain_tangencies(face):
        walk = face.corr
        out = []
        for i in range(3):
            out.append(tangency_point(p.circles[walk[i]],
                                      p.circles[walk[(i + 1) % len(walk)]], tol=1e-4))
        return out

    t0 = chain_tangencies(f0)
    frame = mobius_from_triples(t0[0], t0[1], t0[2], 0j, 1 + 0j, INF)
    tp = chain_tangencies(fp)
    m_norm = mobius_from_triples(*(frame(t) for t in tp),
                                 *(frame(t) for t in t0))
    pairs, _ = subtree_vertex_map(tower, rule, fp.id, lp, f0.id, l0, 0)
    residual = 0.0
    used = 0
    for src, dst in sorted(pairs.items()):
        if src not in p.circles or dst not in p.circles:
            continue
        img = map_circle(m_norm, map_circle(frame, p.circles[src]))
        residual = max(residual, cap_mismatch(img, map_circle(frame, p.circles[dst])))
        used += 1
    mob = frame.inverse().compose(m_norm).compose(frame)
    t2 = m_norm.trace_squared()
    return SymmetryEstimate(mobius=mob, residual=residual,
                            classification=classify(m_norm, class_tol),
                            tr2_gap=abs(t2 - 4.0), pairs=used,
                            level=len(tower) - 1)


# --------------------------------------------------------------------------
# Contraction proxy
# --------------------------------------------------------------------------

def contraction_decay(p: Packing, tower, rule: SubdivisionRule, face_ids,
                      period: int):
    """Frame-normalized drift between nested faces and their period-shifts.

    Entry k compares the sub-packing of face_ids[k] with that of
    face_ids[k+period] under the canonical subtree identification; the values
    decay as the renormalization converges.
    """
    levels = {}
    for lv, cx in enumerate(tower):
        for fid in cx.faces:
            levels.setdefault(fid, lv)

    def frame(face):
        pts = [tangency_point(p.circles[face.corr[i]],
                              p.circles[face.corr[(i + 1) % len(face.corr)]],
                              tol=1e-4) for i in range(3)]
        return mobius_from_triples(*pts, 0j, 1 + 0j, INF)

    out = []
    for k in range(len(face_ids) - period):
        src_id, dst_id = face_ids[k + period], face_ids[k]
        src = tower[levels[src_id]].faces[src_id]
        dst = tower[levels[dst_id]].faces[dst_id]
        pairs, _ = subtree_vertex_map(tower, rule, src_id, levels[src_id],
                                      dst_id, levels[dst_id], 0)
        fs, fd = frame(src), frame(dst)
        # compare tangencies of corresponding subtree edges
        verts_src = set(pairs)
        worst = 0.0
        for e in tower[-1].edge_set():
            u, v = tuple(e)
            if u not in verts_src or v not in verts_src:
                continue
            iu, iv = pairs[u], pairs[v]
            if iu not in p.circles or iv not in p.circles:
                continue
            try:
                ts = fs(tangency_point(p.circles[u], p.circles[v], tol=1e-4))
                td = fd(tangency_point(p.circles[iu], p.circles[iv], tol=1e-4))
            except ValueError:
                continue
            worst = max(worst, spherical_distance(ts, td))
        out.append(worst)
    return out


def subtree_vertices(cx: PlanarComplex, face_id: str, walk):
    verts = set(walk)
    pref_slash = face_id + "/"
    pref_dot = face_id + "."
    for v in cx.vertices():
        if v.startswith(pref_slash) or v.startswith(pref_dot):
            verts.add(v)
    return verts


def contraction_proxy(pa: Packing, pb: Packing, cx: PlanarComplex,
                      face_id: str, face_walk) -> float:
    """Frame-normalized tangency drift between two packings over one face.

    Both sub-packings are pinned by the face's first three boundary
    tangencies; the proxy is the max spherical distance over corresponding
    tangency points of the face's subtree.  It vanishes iff the sub-packings
    are Mobius-equivalent on the compared data.
    """
    verts = subtree_vertices(cx, face_id, face_walk)
    edges = [tuple(sorted(e)) for e in cx.edge_set()
             if set(e) <= verts]
    edges.sort()

    def frame(p):
        pts = [tangency_point(p.circles[face_walk[i]],
                              p.circles[face_walk[(i + 1) % len(face_walk)]],
                              tol=1e-4) for i in range(3)]
        return mobius_from_triples(*pts, 0j, 1 + 0j, INF)

    fa, fb = frame(pa), frame(pb)
    worst = 0.0
    for u, v in edges:
        ta = fa(tangency_point(pa.circles[u], pa.circles[v], tol=1e-4))
        tb = fb(tangency_point(pb.circles[u], pb.circles[v], tol=1e-4))
        worst = max(worst, spherical_distance(ta, tb))
    return worst
