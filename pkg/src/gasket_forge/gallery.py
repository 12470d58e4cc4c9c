"""Built-in quadrilateral-splitting rule, its two sphere gluings, and the
branched-cover vertex dynamics, plus fitted Mobius symmetries of the second
gluing and the local-equivalence demo data."""

from __future__ import annotations

from dataclasses import dataclass, field

from .mobius import (
    INF,
    MobiusMap,
    cap_mismatch,
    classify,
    cross_ratio,
    map_circle,
    mobius_from_triples,
    tangency_point,
)
from .packing import Packing
from .subdivision import (
    CellDecomposition,
    ComplexError,
    Face,
    PlanarComplex,
    PolygonSpec,
    RuleCell,
    SubdivisionRule,
    align_shift,
    build_homomorphism,
    rule_automorphisms,
    subdivision_tower,
    subtree_vertex_map,
)

# Boundary indices of the square polygon run counterclockwise; in the
# lettered picture below index 0 = D (lower left), 1 = C (lower right),
# 2 = B (upper right), 3 = A (upper left).  The splitting wall joins the
# opposite corners 3 and 1 through one interior vertex "c", and each half is
# re-identified with the square so that "c" plays the lower-right corner.
P = "P"


def quad_split_rule() -> SubdivisionRule:
    """The built-in acylindrical rule: one square cut into two quadrilaterals."""
    cells = (
        RuleCell(type=P, walk=(3, "c", 1, 2), corr=(3, "c", 1, 2)),
        RuleCell(type=P, walk=(3, 0, 1, "c"), corr=(1, "c", 3, 0)),
    )
    return SubdivisionRule(
        polygons={P: PolygonSpec(P, 4)},
        decompositions={P: CellDecomposition(P, ("c",), cells)},
    )


def cylinder_rule() -> SubdivisionRule:
    """Cylindrical twin: the same wall, but each half keeps the wall corners.

    Every level adds one more corner-to-corner path through a fresh interior
    vertex, so the two off-wall corners never reconnect.
    """
    cells = (
        RuleCell(type=P, walk=(3, "c", 1, 2), corr=("c", 1, 2, 3)),
        RuleCell(type=P, walk=(3, 0, 1, "c"), corr=(0, 1, "c", 3)),
    )
    return SubdivisionRule(
        polygons={P: PolygonSpec(P, 4)},
        decompositions={P: CellDecomposition(P, ("c",), cells)},
    )


def grid_rule() -> SubdivisionRule:
    """Square cut into a 2x2 grid: invalid, the boundary edges get subdivided."""
    interior = ("m01", "m12", "m23", "m30", "ctr")
    cells = (
        RuleCell(type=P, walk=(0, "m01", "ctr", "m30"), corr=(0, "m01", "ctr", "m30")),
        RuleCell(type=P, walk=("m01", 1, "m12", "ctr"), corr=("m01", 1, "m12", "ctr")),
        RuleCell(type=P, walk=("ctr", "m12", 2, "m23"), corr=("ctr", "m12", 2, "m23")),
        RuleCell(type=P, walk=("m30", "ctr", "m23", 3), corr=("m30", "ctr", "m23", 3)),
    )
    return SubdivisionRule(
        polygons={P: PolygonSpec(P, 4)},
        decompositions={P: CellDecomposition(P, interior, cells)},
    )


def square_complex(vertices=("D", "C", "B", "A"), face_id="in", ext_id="out") -> PlanarComplex:
    """Level-0 complex of one square with an external face."""
    walk = tuple(vertices)
    faces = [
        Face(id=face_id, type=P, walk=walk, corr=walk, level=0),
        Face(id=ext_id, type=None, walk=tuple(reversed(walk)), corr=None, level=0),
    ]
    return PlanarComplex(faces, level=0, external=ext_id)


def sphere_complex(outer_corr) -> PlanarComplex:
    """Sphere from two squares sharing the 4-cycle A,B,C,D.

    ``outer_corr`` fixes how the outer copy is identified with the rule
    square, which decides where its splitting wall lands.
    """
    inner = Face(id="in", type=P, walk=("D", "C", "B", "A"),
                 corr=("D", "C", "B", "A"), level=0)
    outer = Face(id="out", type=P, walk=("A", "B", "C", "D"),
                 corr=tuple(outer_corr), level=0)
    return PlanarComplex([inner, outer], level=0, external=None)


def g1_complex() -> PlanarComplex:
    """Straight gluing: both splitting walls join A and C."""
    return sphere_complex(("B", "C", "D", "A"))


def g2_complex() -> PlanarComplex:
    """Quarter-turn gluing: the outer wall joins B and D instead."""
    return sphere_complex(("C", "D", "A", "B"))


# Vertex aliases for the two level-1 wall vertices.
E_VERTEX = "in.c"
F_VERTEX = "out.c"

# The degree-2 branched-cover vertex dynamics on the straight gluing:
# both wall corners are critical, one square half and the opposite outer
# half cover the inner square, the other two cover the outer one.
S_VERTEX_MAP = {"A": "B", "B": "A", "C": "D", "D": "A", E_VERTEX: "C", F_VERTEX: "C"}


@dataclass
class SymmetrySeed:
    """A face-to-face germ of a plane-graph symmetry, pinned at one vertex pair."""

    name: str
    src_face: str
    src_level: int
    dst_face: str
    dst_level: int
    src_vertex: str
    dst_vertex: str


# g1 sends the quadrilateral D,A,E,C onto the inner square A,B,C,D;
# g2 sends E,A,B,C onto it.  Both extend to symmetries of the quarter-turn
# gluing's subdivision graph.
G1_SEED = SymmetrySeed("g1", src_face="in/1", src_level=1, dst_face="in", dst_level=0,
                       src_vertex="D", dst_vertex="A")
G2_SEED = SymmetrySeed("g2", src_face="in/0", src_level=1, dst_face="in", dst_level=0,
                       src_vertex=E_VERTEX, dst_vertex="A")


@dataclass
class BuiltinCatalog:
    rule: SubdivisionRule
    cylindrical_rule: SubdivisionRule
    g1: PlanarComplex
    g2: PlanarComplex
    vertex_dynamics: dict
    symmetry_seeds: tuple
    parabolic_edge: tuple = ("A", "B")  # S^2-fixed tangency lives on this edge
    fixed_vertex: str = "A"  # fixed by the square of the vertex dynamics


def builtin() -> BuiltinCatalog:
    """Catalog of the built-in constructions, with the dynamics validated."""
    rule = quad_split_rule()
    g1 = g1_complex()
    tower = subdivision_tower(g1, rule, 1)
    build_homomorphism(S_VERTEX_MAP, tower[1], tower[0])  # raises if inconsistent
    return BuiltinCatalog(
        rule=rule,
        cylindrical_rule=cylinder_rule(),
        g1=g1,
        g2=g2_complex(),
        vertex_dynamics=dict(S_VERTEX_MAP),
        symmetry_seeds=(G1_SEED, G2_SEED),
    )


# --------------------------------------------------------------------------
# Partial plane-graph symmetries from a single face germ
# --------------------------------------------------------------------------

class AmbiguityError(ComplexError):
    """Raised when the level-by-level symmetry extension is not forced."""


@dataclass
class GraphSymmetry:
    name: str
    vertex_map: dict
    face_pairs: list  # (src_fid, src_level, dst_fid, dst_level, shift)
    deferred: list

    def inverse_map(self) -> dict:
        return {v: k for k, v in self.vertex_map.items()}


def _directed_face_index(tower):
    """(u, v) -> list of (level, face_id) carrying the directed edge."""
    index = {}
    for level, cx in enumerate(tower):
        for f in cx.faces.values():
            w = f.walk
            for i in range(len(w)):
                index.setdefault((w[i], w[(i + 1) % len(w)]), []).append((level, f.id))
    return index


def extend_symmetry(tower, rule: SubdivisionRule, seed: "SymmetrySeed") -> GraphSymmetry:
    """Grow a plane-graph symmetry germ across the computed truncation.

    Face pairs propagate to their children canonically and across shared
    edges to the shallowest non-conflicting candidate; the result is then
    verified globally (injectivity and edge preservation), so a wrong local
    choice cannot survive silently.
    """
    max_level = len(tower) - 1
    edge_index = _directed_face_index(tower)
    src0 = tower[seed.src_level].faces[seed.src_face]
    dst0 = tower[seed.dst_level].faces[seed.dst_face]
    shift0 = align_shift(rule, src0, dst0, seed.src_vertex, seed.dst_vertex)
    if shift0 is None:
        raise ComplexError("seed vertices are not on the face boundaries")
    mu = {}
    used_targets = {}
    auts = {t: rule_automorphisms(rule, t) for t in rule.polygons}
    face_pairs = []
    seen = set()
    deferred = []
    from collections import deque

    queue = deque([(seed.src_face, seed.src_level, seed.dst_face, seed.dst_level,
                    shift0)])

    def try_assign(pairs):
        for a, b in pairs:
            if mu.get(a, b) != b or used_targets.get(b, a) != a:
                return False
        return True

    def assign(pairs):
        for a, b in pairs:
            mu[a] = b
            used_targets[b] = a

    while queue:
        sf, sl, df, dl, s = queue.popleft()
        key = (sf, df)
        if key in seen:
            continue
        seen.add(key)
        src = tower[sl].faces[sf]
        dst = tower[dl].faces[df]
        k = len(src.corr)
        s %= k
        pairs = [(src.corr[i], dst.corr[(i + s) % k]) for i in range(k)]
        if not try_assign(pairs):
            raise AmbiguityError(f"conflicting vertex images at faces {sf}->{df}")
        assign(pairs)
        face_pairs.append((sf, sl, df, dl, s))
        # cross-edge propagation first: shallow anchors must be settled
        # before deep descendants look across their own boundaries
        w = src.walk
        for i in range(len(w)):
            u, v = w[i], w[(i + 1) % len(w)]
            nb = None
            for lvl, fid in edge_index.get((v, u), ()):
                if lvl == sl:
                    nb = fid
                    break
            if nb is None or any(a == nb for a, _ in seen):
                continue
            mu_u, mu_v = mu.get(u), mu.get(v)
            if mu_u is None or mu_v is None:
                continue
            candidates = edge_index.get((mu_v, mu_u), ())
            g = tower[sl].faces[nb]
            placed = False
            for lvl, fid in sorted(candidates):
                if (nb, fid) in seen or (nb, fid) in ((q[0], q[2]) for q in queue):
                    placed = True
                    break
                h = tower[lvl].faces[fid]
                if h.type != g.type or len(h.walk) != len(g.walk):
                    continue
                # align via the shared directed edge
                n = len(g.walk)
                gi = next(t for t in range(n)
                          if g.walk[t] == v and g.walk[(t + 1) % n] == u)
                hi = next(t for t in range(n)
                          if h.walk[t] == mu_v and h.walk[(t + 1) % n] == mu_u)
                cand_pairs = [(g.walk[(gi + t) % n], h.walk[(hi + t) % n])
                              for t in range(n)]
                if not try_assign(cand_pairs):
                    continue
                sh = align_shift(rule, g, h, g.walk[gi], h.walk[hi])
                if sh is None:
                    continue
                queue.append((g.id, sl, h.id, lvl, sh))
                placed = True
                break
            if not placed:
                deferred.append(("unmatched-neighbor", nb, (mu_v, mu_u)))
        # children via the rule automorphism data
        if sl + 1 <= max_level and dl + 1 <= max_level and src.type == dst.type:
            aut = auts[src.type].get(s)
            if aut is None:
                deferred.append(("non-symmetric-shift", sf, df, s))
            else:
                perm, residuals, imap = aut
                dec = rule.decompositions[src.type]
                for lbl in dec.interior:
                    a = f"{sf}.{lbl}"
                    b = f"{df}.{imap.get(lbl, lbl)}"
                    if not try_assign([(a, b)]):
                        raise AmbiguityError(f"interior conflict at {a}->{b}")
                    assign([(a, b)])
                for j in range(len(dec.cells)):
                    queue.append((f"{sf}/{j}", sl + 1, f"{df}/{perm[j]}", dl + 1,
                                  residuals[j]))
    sym = GraphSymmetry(name=seed.name, vertex_map=mu, face_pairs=face_pairs,
                        deferred=deferred)
    verify_symmetry(tower, sym)
    return sym


def verify_symmetry(tower, sym: GraphSymmetry):
    """Global check: the partial map is injective and preserves edges."""
    mu = sym.vertex_map
    if len(set(mu.values())) != len(mu):
        raise AmbiguityError(f"{sym.name}: vertex map is not injective")
    deepest = tower[-1]
    edges = deepest.edge_set()
    for e in edges:
        u, v = tuple(e)
        iu, iv = mu.get(u), mu.get(v)
        if iu is None or iv is None:
            continue
        if iu == iv or frozenset((iu, iv)) not in edges:
            raise AmbiguityError(
                f"{sym.name}: edge ({u},{v}) maps to non-edge ({iu},{iv})")


# --------------------------------------------------------------------------
# Mobius symmetry fitting and the group orbit
# --------------------------------------------------------------------------

@dataclass
class FittedSymmetry:
    name: str
    mobius: MobiusMap
    residual: float
    classification: str
    pairs: int
    graph: GraphSymmetry


def fit_symmetry(p: Packing, tower, rule: SubdivisionRule,
                 seed: "SymmetrySeed") -> FittedSymmetry:
    """Fit the Mobius map realizing a graph symmetry of a packed complex."""
    sym = extend_symmetry(tower, rule, seed)
    src = tower[seed.src_level].faces[seed.src_face]
    dst = tower[seed.dst_level].faces[seed.dst_face]
    s = align_shift(rule, src, dst, seed.src_vertex, seed.dst_vertex)
    k = len(src.corr)

    def tang(pk, face, i, shift=0):
        a = face.corr[(i + shift) % k]
        b = face.corr[(i + 1 + shift) % k]
        return tangency_point(pk.circles[a], pk.circles[b], tol=1e-4)

    srcs = [tang(p, src, i) for i in range(3)]
    dsts = [tang(p, dst, i, s) for i in range(3)]
    m = mobius_from_triples(*srcs, *dsts)
    residual = 0.0
    used = 0
    for a, b in sorted(sym.vertex_map.items()):
        if a in p.circles and b in p.circles:
            residual = max(residual, cap_mismatch(map_circle(m, p.circles[a]),
                                                  p.circles[b]))
            used += 1
    return FittedSymmetry(name=seed.name, mobius=m, residual=residual,
                          classification=classify(m, 1e-3), pairs=used, graph=sym)


def fit_group_symmetries(p: Packing, tower, rule: SubdivisionRule,
                         catalog: "BuiltinCatalog"):
    """Fitted generators of the quarter-turn gluing's symmetry group."""
    return tuple(fit_symmetry(p, tower, rule, seed)
                 for seed in catalog.symmetry_seeds)


@dataclass
class OrbitCircle:
    word: str
    base: str
    matched_vertex: "str | None"
    mismatch: "float | None"
    circle: object


@dataclass
class GroupOrbit:
    circles: list
    max_matched_mismatch: float
    matched: int
    unmatched: int


def group_limit_orbit(fits, p: Packing, base_vertices, max_word_len: int) -> GroupOrbit:
    """Reduced-word orbit of base circles under the fitted generators.

    Each orbit circle is matched against the packing circle of its
    combinatorial image (computed through the partial graph symmetries)
    whenever that image is defined and packed.
    """
    gens = []
    for f in fits:
        fwd = f.graph.vertex_map
        inv = f.graph.inverse_map()
        gens.append((f.name, f.mobius, fwd, f.name + "'"))
        gens.append((f.name + "'", f.mobius.inverse(), inv, f.name))
    words = [("", MobiusMap.identity(), {v: v for v in base_vertices}, None)]
    frontier = words[:]
    for _ in range(max_word_len):
        nxt = []
        for wname, wm, wmap, last in frontier:
            for gname, gm, gmap, banned in gens:
                if last is not None and gname == last:
                    continue  # reduced words only
                comb = {}
                for v, img in wmap.items():
                    if img is None:
                        comb[v] = None
                    else:
                        comb[v] = gmap.get(img)
                nxt.append((gname + wname, gm.compose(wm), comb, banned))
        words.extend(nxt)
        frontier = nxt
    circles = []
    worst = 0.0
    matched = 0
    unmatched = 0
    for wname, wm, wmap, _ in words:
        for v in base_vertices:
            img = map_circle(wm, p.circles[v])
            target = wmap.get(v)
            if target is not None and target in p.circles:
                mm = cap_mismatch(img, p.circles[target])
                worst = max(worst, mm)
                matched += 1
                circles.append(OrbitCircle(wname, v, target, mm, img))
            else:
                unmatched += 1
                circles.append(OrbitCircle(wname, v, None, None, img))
    return GroupOrbit(circles=circles, max_matched_mismatch=worst,
                      matched=matched, unmatched=unmatched)


# --------------------------------------------------------------------------
# Local-equivalence demo: six sub-packings, all with the same combinatorics
# --------------------------------------------------------------------------

def _subtree_vertex_set(cx: PlanarComplex, roots, walks):
    verts = set()
    for w in walks:
        verts.update(w)
    for v in cx.vertices():
        if any(v.startswith(r + "/") or v.startswith(r + ".") for r in roots):
            verts.add(v)
    return verts


def subgraph_edges(cx: PlanarComplex, verts):
    return sorted(tuple(sorted(e)) for e in cx.edge_set() if set(e) <= verts)


def graph_isomorphism(edges_a, edges_b):
    """Deterministic backtracking isomorphism between two small graphs.

    Returns a vertex bijection or None.  Degree sequences prune the search;
    the graphs here are trees of quadrilateral flowers, so this stays fast.
    """
    adj_a, adj_b = {}, {}
    for adj, edges in ((adj_a, edges_a), (adj_b, edges_b)):
        for u, v in edges:
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
    if len(adj_a) != len(adj_b) or len(edges_a) != len(edges_b):
        return None
    deg_a = sorted(len(s) for s in adj_a.values())
    deg_b = sorted(len(s) for s in adj_b.values())
    if deg_a != deg_b:
        return None
    order = sorted(adj_a, key=lambda v: (-len(adj_a[v]), v))
    candidates = {v: sorted(u for u in adj_b if len(adj_b[u]) == len(adj_a[v]))
                  for v in order}

    assignment = {}
    used = set()

    def backtrack(i):
        if i == len(order):
            return True
        v = order[i]
        for u in candidates[v]:
            if u in used:
                continue
            ok = True
            for nb in adj_a[v]:
                if nb in assignment and assignment[nb] not in adj_b[u]:
                    ok = False
                    break
            if not ok:
                continue
            mapped_nbs = {assignment[nb] for nb in adj_a[v] if nb in assignment}
            if any(x not in adj_b[u] for x in mapped_nbs):
                continue
            assignment[v] = u
            used.add(u)
            if backtrack(i + 1):
                return True
            del assignment[v]
            used.discard(u)
        return False

    return dict(assignment) if backtrack(0) else None


@dataclass
class SubPacking:
    name: str
    roots: tuple
    vertices: set
    edges: list
    iso_to_reference: dict  # reference-graph vertex -> this sub-packing vertex


@dataclass
class LocalEquivalenceDemo:
    level: int
    subpackings: dict  # name -> SubPacking
    cross_ratios: dict  # name -> {quad-key: complex}
    max_cr_difference: float


# the two diagonal halves of the straight gluing, and the square halves of both
_HALF_ROOTS = {
    "g1+": ("in",),
    "g1-": ("out",),
    "g1~+": ("in/0", "out/1"),
    "g1~-": ("in/1", "out/0"),
    "g2+": ("in",),
    "g2-": ("out",),
}


def _reference_edges(rule: SubdivisionRule, level: int):
    from .subdivision import rule_complex, iterate_subdivision

    cx = iterate_subdivision(rule_complex(rule, P), rule, level)
    return subgraph_edges(cx, set(cx.vertices())), cx


def local_equivalence_demo(p1: Packing, p2: Packing, tower1, tower2,
                           rule: SubdivisionRule, n: int) -> LocalEquivalenceDemo:
    """Extract the six sub-packings and quantify their geometric divergence.

    All six are graph-isomorphic to the one-square subdivision graph; their
    tangency cross-ratio tables agree combinatorially but differ numerically,
    which is the computable shadow of local-but-not-global equivalence.
    """
    if n < 2:
        raise ComplexError("need level >= 2 for the demo")
    # every half is one copy of the square with n rounds of subdivision
    ref_edges, ref_cx = _reference_edges(rule, n)
    subs = {}
    for name, roots in _HALF_ROOTS.items():
        tower = tower1 if name.startswith("g1") else tower2
        packing = p1 if name.startswith("g1") else p2
        cx = tower[n]
        walks = [tower[min(1, n)].faces[r].walk if "/" in r else tower[0].faces[r].walk
                 for r in roots]
        verts = _subtree_vertex_set(cx, roots, walks)
        edges = subgraph_edges(cx, verts)
        iso = graph_isomorphism(ref_edges, edges)
        if iso is None:
            raise ComplexError(f"sub-packing {name} is not isomorphic to the reference")
        subs[name] = SubPacking(name=name, roots=tuple(roots), vertices=verts,
                                edges=edges, iso_to_reference=iso)
    # cross-ratio tables over reference quadruples: each reference face of
    # depth <= 2 contributes its boundary-walk tangency quadruple
    tables = {}
    for name, sub in subs.items():
        packing = p1 if name.startswith("g1") else p2
        iso = sub.iso_to_reference
        table = {}
        from .subdivision import rule_complex, subdivision_tower as _st

        ref_tower = _st(rule_complex(rule, P), rule, min(2, n))
        for lvl, cxr in enumerate(ref_tower):
            for f in cxr.internal_faces():
                quad = [iso.get(v) for v in f.walk]
                if any(q is None or q not in packing.circles for q in quad):
                    continue
                pts = []
                ok = True
                for i in range(4):
                    try:
                        pts.append(tangency_point(packing.circles[quad[i]],
                                                  packing.circles[quad[(i + 1) % 4]],
                                                  tol=1e-4))
                    except ValueError:
                        ok = False
                        break
                if ok:
                    table[f"{lvl}:{f.id}"] = cross_ratio(*pts)
        tables[name] = table
    # largest divergence between the straight-gluing and quarter-turn halves
    worst = 0.0
    for key in tables["g1+"]:
        if key in tables["g2+"]:
            worst = max(worst, abs(tables["g1+"][key] - tables["g2+"][key]))
    return LocalEquivalenceDemo(level=n, subpackings=subs, cross_ratios=tables,
                                max_cr_difference=worst)


# --------------------------------------------------------------------------
# Degree-2 combinatorial branched-cover demo
# --------------------------------------------------------------------------

@dataclass
class BranchedCoverReport:
    level: int
    region_faces: list  # target faces (the half region)
    cover_faces: list  # source faces two levels deeper
    face_fibers: dict  # target face -> number of source faces
    vertex_fibers: dict  # target vertex -> number of source vertices
    branch_vertices: list  # targets with a single preimage
    commutes: bool


def qr_symmetry_demo(vm, n: int) -> BranchedCoverReport:
    """The square of the vertex dynamics restricted over one diagonal half.

    Faces of the half at level n pull back to faces at level n+2; the count
    is two everywhere while the fixed critical vertex has a single preimage,
    the combinatorial shadow of a degree-2 branched covering.
    """
    if n < 2:
        raise ComplexError("need level >= 2")
    if len(vm.tower) <= n + 2:
        raise ComplexError("tower too shallow: need levels to n+2")
    half_roots = ("in/0", "out/1")  # the half containing the period-2 vertex B
    target_cx = vm.tower[n]
    region = [f.id for f in target_cx.internal_faces()
              if any(f.id == r or f.id.startswith(r + "/") for r in half_roots)]
    region_set = set(region)
    face_sq = {}
    for f in vm.tower[n + 2].internal_faces():
        img = vm.face_image[f.id]
        img = vm.face_image[img]
        face_sq[f.id] = img
    preimage = [fid for fid, img in face_sq.items() if img in region_set]
    # connected component (across shared edges) containing the fixed vertex B
    deep = vm.tower[n + 2]
    walks = {fid: set(deep.faces[fid].walk) for fid in preimage}
    comp = set()
    frontier = [fid for fid in preimage if "B" in walks[fid]]
    while frontier:
        fid = frontier.pop()
        if fid in comp:
            continue
        comp.add(fid)
        for other in preimage:
            if other not in comp and len(walks[fid] & walks[other]) >= 2:
                frontier.append(other)
    cover = sorted(comp)
    face_fibers = {t: 0 for t in region}
    for fid in cover:
        face_fibers[face_sq[fid]] += 1
    target_vertices = set()
    for fid in region:
        target_vertices.update(target_cx.faces[fid].walk)
    cover_vertices = set()
    for fid in cover:
        cover_vertices.update(deep.faces[fid].walk)
    vertex_fibers = {t: 0 for t in target_vertices}
    for v in cover_vertices:
        img = vm.apply(v, 2)
        if img in vertex_fibers:
            vertex_fibers[img] += 1
    branch = sorted(v for v, c in vertex_fibers.items() if c == 1)
    # the covering commutes with the dynamics by construction; verify edges
    commutes = True
    deep_edges = deep.edge_set()
    target_edges = target_cx.edge_set()
    for e in deep_edges:
        u, v = tuple(e)
        if u in cover_vertices and v in cover_vertices:
            iu, iv = vm.apply(u, 2), vm.apply(v, 2)
            if iu != iv and frozenset((iu, iv)) not in target_edges:
                commutes = False
    return BranchedCoverReport(level=n, region_faces=region, cover_faces=cover,
                               face_fibers=face_fibers, vertex_fibers=vertex_fibers,
                               branch_vertices=branch, commutes=commutes)
