"""Finite subdivision rules and iterated plane complexes.

A rule is a finite set of oriented polygons, each decomposed into >= 2 cells
with typed, orientation-preserving boundary correspondences.  Complexes are
stored purely combinatorially: every face carries its counterclockwise
boundary walk, and rotation systems are derived from the walks.  Vertex and
face ids follow a canonical hierarchical scheme so that iterated subdivision
is deterministic and level-n complexes nest inside level-(n+1) complexes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Label = "int | str"  # rule labels: boundary index (int) or interior name (str)


class ComplexError(ValueError):
    """Raised for structurally invalid complexes or incompatible operations."""


# --------------------------------------------------------------------------
# Rule data model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PolygonSpec:
    id: str
    side_count: int


@dataclass(frozen=True)
class RuleCell:
    """One closed 2-cell of a decomposition.

    ``walk`` is the ccw boundary walk in rule labels; ``corr`` maps boundary
    index i of the type polygon to the walk label it is identified with.
    """

    type: str
    walk: tuple
    corr: tuple


@dataclass(frozen=True)
class CellDecomposition:
    polygon: str
    interior: tuple
    cells: tuple


@dataclass
class SubdivisionRule:
    polygons: dict
    decompositions: dict

    def polygon_ids(self):
        return sorted(self.polygons)

    def sides(self, pid: str) -> int:
        return self.polygons[pid].side_count

    def cells(self, pid: str):
        return self.decompositions[pid].cells


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    def add(self, code: str, message: str):
        self.violations.append((code, message))

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self):
        if self.ok:
            return ["wellformed=true"]
        out = ["wellformed=false"]
        for code, msg in self.violations:
            out.append(f"violation={code} {msg}")
        return out


def _cyclic_index(seq, sub) -> int:
    """Offset o with seq[(o+i) % n] == sub[i] for all i, else -1."""
    n = len(seq)
    if len(sub) != n:
        return -1
    for o in range(n):
        if all(seq[(o + i) % n] == sub[i] for i in range(n)):
            return o
    return -1


def validate_rule(rule: SubdivisionRule) -> ValidationReport:
    """Check every structural clause of a finite subdivision rule."""
    rep = ValidationReport()
    for pid, poly in rule.polygons.items():
        if poly.side_count < 3:
            rep.add("polygon-too-small", f"polygon {pid} has {poly.side_count} < 3 sides")
    for pid, poly in rule.polygons.items():
        dec = rule.decompositions.get(pid)
        if dec is None:
            rep.add("missing-decomposition", f"polygon {pid} has no decomposition")
            continue
        k = poly.side_count
        boundary = set(range(k))
        interior = set(dec.interior)
        if len(dec.cells) < 2:
            rep.add("too-few-cells", f"polygon {pid}: fewer than 2 cells")
        labels_ok = boundary | interior
        for j, cell in enumerate(dec.cells):
            name = f"{pid}.{j}"
            for lbl in cell.walk:
                if lbl not in labels_ok:
                    rep.add("unknown-label", f"cell {name}: label {lbl!r} undeclared")
            if cell.type not in rule.polygons:
                rep.add("bad-type", f"cell {name}: type {cell.type!r} not a polygon")
                continue
            kt = rule.polygons[cell.type].side_count
            if len(cell.walk) != kt:
                rep.add("walk-length", f"cell {name}: walk has {len(cell.walk)} != {kt} vertices")
                continue
            if len(cell.corr) != kt:
                rep.add("corr-length", f"cell {name}: correspondence arity mismatch")
                continue
            if _cyclic_index(cell.walk, cell.corr) < 0:
                rev = tuple(reversed(cell.corr))
                if _cyclic_index(cell.walk, rev) >= 0:
                    rep.add("corr-orientation",
                            f"cell {name}: correspondence reverses orientation")
                else:
                    rep.add("corr-mismatch",
                            f"cell {name}: correspondence is not a cyclic walk alignment")
        # Edge tiling: every interior edge in two walks with opposite direction,
        # boundary edges in exactly one; the once-traversed cycle must be the
        # polygon boundary itself (no interior vertices on boundary edges).
        directed = {}
        for j, cell in enumerate(dec.cells):
            w = cell.walk
            for i in range(len(w)):
                e = (w[i], w[(i + 1) % len(w)])
                if e[0] == e[1]:
                    rep.add("loop-edge", f"cell {pid}.{j}: loop at {e[0]!r}")
                directed[e] = directed.get(e, 0) + 1
        once = []
        for (u, v), cnt in directed.items():
            back = directed.get((v, u), 0)
            if cnt > 1:
                rep.add("edge-overuse", f"polygon {pid}: directed edge {u!r}->{v!r} used {cnt}x")
            if back == 0:
                once.append((u, v))
        succ = {u: v for u, v in once}
        if len(succ) != len(once):
            rep.add("boundary-branching", f"polygon {pid}: once-used edges do not form a cycle")
        else:
            cycle = []
            if once:
                start = once[0][0]
                cur = start
                for _ in range(len(once)):
                    cycle.append(cur)
                    cur = succ.get(cur)
                    if cur is None:
                        break
                closed = cur == start and len(cycle) == len(once)
                if not closed:
                    rep.add("boundary-open", f"polygon {pid}: decomposition boundary is not one cycle")
                else:
                    want = tuple(range(k))
                    got = tuple(cycle)
                    if _cyclic_index(got, want) < 0:
                        inner_on_boundary = [x for x in got if x not in boundary]
                        if inner_on_boundary:
                            rep.add("boundary-edge-subdivided",
                                    f"polygon {pid}: boundary edge contains interior "
                                    f"vertex(es) {inner_on_boundary!r}")
                        else:
                            rep.add("boundary-orientation",
                                    f"polygon {pid}: boundary cycle {got!r} does not match "
                                    f"the oriented polygon boundary")
    return rep


# --------------------------------------------------------------------------
# Planar complexes
# --------------------------------------------------------------------------

@dataclass
class Face:
    id: str
    type: "str | None"
    walk: tuple
    corr: "tuple | None"
    level: int
    parent: "str | None" = None
    cell_index: "int | None" = None


class PlanarComplex:
    """Plane (or sphere) complex encoded by ccw face walks.

    Every directed edge occurs in exactly one face walk; the rotation system
    and Euler characteristic are derived, not stored.
    """

    def __init__(self, faces, level: int = 0, external: "str | None" = None,
                 vertex_level=None, strict: bool = True):
        self.faces = {f.id: f for f in faces}
        if len(self.faces) != len(faces):
            raise ComplexError("duplicate face ids")
        self.level = level
        self.external = external
        if external is not None and external not in self.faces:
            raise ComplexError(f"external face {external!r} missing")
        verts = []
        seen = set()
        for f in faces:
            for v in f.walk:
                if v not in seen:
                    seen.add(v)
                    verts.append(v)
        self.vertex_order = verts
        self.vertex_level = dict(vertex_level or {})
        for v in verts:
            self.vertex_level.setdefault(v, 0)
        self._left = None
        self._rotations = None
        if strict:
            self.check_structure()

    # -- basic queries ------------------------------------------------------

    def vertices(self):
        return list(self.vertex_order)

    def edge_set(self):
        edges = set()
        for f in self.faces.values():
            w = f.walk
            for i in range(len(w)):
                edges.add(frozenset((w[i], w[(i + 1) % len(w)])))
        return edges

    def internal_faces(self):
        return [f for f in self.faces.values() if f.id != self.external]

    def left_map(self):
        if self._left is None:
            left = {}
            for f in self.faces.values():
                w = f.walk
                for i in range(len(w)):
                    e = (w[i], w[(i + 1) % len(w)])
                    if e in left:
                        raise ComplexError(f"directed edge {e} used twice "
                                           f"({left[e]} and {f.id})")
                    left[e] = f.id
            self._left = left
        return self._left

    def face_left(self, u, v):
        return self.left_map().get((u, v))

    def check_structure(self):
        left = self.left_map()
        for (u, v) in left:
            if (v, u) not in left:
                raise ComplexError(f"directed edge {(v, u)} missing: not a closed surface")
        v = len(self.vertex_order)
        e = len(self.edge_set())
        f = len(self.faces)
        if v - e + f != 2:
            raise ComplexError(f"Euler characteristic {v - e + f} != 2 (V={v} E={e} F={f})")
        self.rotations()

    def rotations(self):
        """ccw cyclic neighbor order at each vertex, derived from face walks."""
        if self._rotations is not None:
            return self._rotations
        left = self.left_map()
        pred = {}
        for f in self.faces.values():
            w = f.walk
            n = len(w)
            for i in range(n):
                pred[(f.id, w[i])] = w[(i - 1) % n]
        out_edges = {}
        for (u, v) in left:
            out_edges.setdefault(u, []).append(v)
        rot = {}
        for u, nbrs in out_edges.items():
            start = nbrs[0]
            cycle = [start]
            cur = start
            for _ in range(len(nbrs)):
                fid = left[(u, cur)]
                nxt = pred[(fid, u)]
                if nxt == start:
                    break
                cycle.append(nxt)
                cur = nxt
            else:
                raise ComplexError(f"rotation at {u!r} does not close")
            if len(cycle) != len(nbrs):
                raise ComplexError(f"rotation at {u!r} misses edges: embedding invalid")
            rot[u] = tuple(cycle)
        self._rotations = rot
        return rot

    def neighbors(self, v):
        return self.rotations()[v]


def rule_complex(rule: SubdivisionRule, polygon_id: str, prefix: str = "") -> PlanarComplex:
    """Level-0 complex of one polygon: the polygon face plus its external face."""
    k = rule.sides(polygon_id)
    names = tuple(f"{prefix}b{i}" for i in range(k))
    root = Face(id=f"{prefix}root", type=polygon_id, walk=names,
                corr=names, level=0)
    ext = Face(id=f"{prefix}ext", type=None,
               walk=tuple(reversed(names[1:] + names[:1])), corr=None, level=0)
    return PlanarComplex([root, ext], level=0, external=ext.id)


def subdivide(cx: PlanarComplex, rule: SubdivisionRule, strict: bool = True) -> PlanarComplex:
    """One subdivision step; the external face (if any) is untouched."""
    new_faces = []
    vertex_level = dict(cx.vertex_level)
    for f in cx.faces.values():
        if f.id == cx.external:
            new_faces.append(f)
            continue
        if f.type is None or f.type not in rule.decompositions:
            raise ComplexError(f"face {f.id}: no decomposition for type {f.type!r}")
        dec = rule.decompositions[f.type]
        if f.corr is None:
            raise ComplexError(f"face {f.id}: missing boundary correspondence")
        transport = {i: f.corr[i] for i in range(len(f.corr))}
        for lbl in dec.interior:
            vid = f"{f.id}.{lbl}"
            transport[lbl] = vid
            vertex_level[vid] = cx.level + 1
        for j, cell in enumerate(dec.cells):
            walk = tuple(transport[lbl] for lbl in cell.walk)
            corr = tuple(transport[lbl] for lbl in cell.corr)
            new_faces.append(Face(id=f"{f.id}/{j}", type=cell.type, walk=walk,
                                  corr=corr, level=cx.level + 1, parent=f.id,
                                  cell_index=j))
    return PlanarComplex(new_faces, level=cx.level + 1, external=cx.external,
                         vertex_level=vertex_level, strict=strict)


def partial_subdivide(cx: PlanarComplex, rule: SubdivisionRule, face_ids,
                      strict: bool = True) -> PlanarComplex:
    """Subdivide only the named faces; everything else is carried over."""
    face_ids = set(face_ids)
    new_faces = []
    vertex_level = dict(cx.vertex_level)
    for f in cx.faces.values():
        if f.id not in face_ids:
            new_faces.append(f)
            continue
        dec = rule.decompositions[f.type]
        transport = {i: f.corr[i] for i in range(len(f.corr))}
        for lbl in dec.interior:
            vid = f"{f.id}.{lbl}"
            transport[lbl] = vid
            vertex_level[vid] = f.level + 1
        for j, cell in enumerate(dec.cells):
            walk = tuple(transport[lbl] for lbl in cell.walk)
            corr = tuple(transport[lbl] for lbl in cell.corr)
            new_faces.append(Face(id=f"{f.id}/{j}", type=cell.type, walk=walk,
                                  corr=corr, level=f.level + 1, parent=f.id,
                                  cell_index=j))
    return PlanarComplex(new_faces, level=cx.level + 1, external=cx.external,
                         vertex_level=vertex_level, strict=strict)


def iterate_subdivision(cx: PlanarComplex, rule: SubdivisionRule, n: int,
                        strict: bool = True) -> PlanarComplex:
    if n < 0:
        raise ValueError("n must be >= 0")
    for _ in range(n):
        cx = subdivide(cx, rule, strict=strict)
    return cx


def subdivision_tower(cx: PlanarComplex, rule: SubdivisionRule, n: int,
                      strict: bool = True):
    """[G^0, ..., G^n] with canonical nested ids."""
    tower = [cx]
    for _ in range(n):
        tower.append(subdivide(tower[-1], rule, strict=strict))
    return tower


def glue_spherical(a: PlanarComplex, b: PlanarComplex, identification) -> PlanarComplex:
    """Glue two external-face complexes along their boundary cycles.

    ``identification`` maps boundary vertices of ``b`` to boundary vertices of
    ``a`` and must reverse the boundary orientation, so the union is a sphere.
    """
    if a.external is None or b.external is None:
        raise ComplexError("both complexes must have an external face")
    if a.level != b.level:
        raise ComplexError("complexes must be at the same level")
    ca = a.faces[a.external].walk
    cb = b.faces[b.external].walk
    if len(ca) != len(cb):
        raise ComplexError(f"boundary length mismatch: {len(ca)} vs {len(cb)}")
    if set(identification.keys()) != set(cb) or set(identification.values()) != set(ca):
        raise ComplexError("identification must biject the two boundary cycles")
    image = tuple(identification[v] for v in cb)
    # Each seam edge must be traversed once by a's interior faces and once,
    # oppositely, by b's; so the image of b's external walk has to run
    # against a's external walk.
    if _cyclic_index(tuple(reversed(ca)), image) < 0:
        raise ComplexError("identification does not reverse orientation across the seam")
    faces = []
    for f in a.internal_faces():
        faces.append(f)
    for f in b.internal_faces():
        walk = tuple(identification.get(v, v) for v in f.walk)
        corr = None if f.corr is None else tuple(identification.get(v, v) for v in f.corr)
        faces.append(Face(id=f.id, type=f.type, walk=walk, corr=corr, level=f.level,
                          parent=f.parent, cell_index=f.cell_index))
    vertex_level = dict(a.vertex_level)
    for v, lv in b.vertex_level.items():
        if v not in identification:
            vertex_level[v] = lv
    return PlanarComplex(faces, level=a.level, external=None, vertex_level=vertex_level)


# --------------------------------------------------------------------------
# Rule probes: simple / irreducible / acylindrical, standing assumptions
# --------------------------------------------------------------------------

@dataclass
class ProbeResult:
    status: str  # "holds" | "violation" | "certified" | "suspected-cylindrical" | "inconclusive"
    depth: int
    witness: object = None

    @property
    def ok(self) -> bool:
        return self.status in ("holds", "certified")


def _rule_towers(rule, max_depth):
    towers = {}
    for pid in rule.polygon_ids():
        towers[pid] = subdivision_tower(rule_complex(rule, pid), rule, max_depth,
                                        strict=False)
    return towers


def is_simple(rule: SubdivisionRule, max_depth: int) -> ProbeResult:
    """Scan G^n(P_i) for multi-edges and loops up to the given depth."""
    for pid in rule.polygon_ids():
        cx = rule_complex(rule, pid)
        for n in range(max_depth + 1):
            directed = {}
            for f in cx.faces.values():
                w = f.walk
                for i in range(len(w)):
                    u, v = w[i], w[(i + 1) % len(w)]
                    if u == v:
                        return ProbeResult("violation", n, ("loop", pid, u))
                    directed[(u, v)] = directed.get((u, v), 0) + 1
            for (u, v), cnt in directed.items():
                if cnt > 1:
                    return ProbeResult("violation", n, ("multi-edge", pid, (u, v)))
            if n < max_depth:
                cx = subdivide(cx, rule, strict=False)
    return ProbeResult("holds", max_depth)


def is_irreducible(rule: SubdivisionRule, max_depth: int) -> ProbeResult:
    """No G^n edge may join two boundary vertices outside the boundary cycle."""
    for pid in rule.polygon_ids():
        k = rule.sides(pid)
        boundary = {f"b{i}": i for i in range(k)}
        cx = rule_complex(rule, pid)
        for n in range(max_depth + 1):
            for e in cx.edge_set():
                uv = tuple(e)
                if len(uv) != 2:
                    continue
                u, v = uv
                if u in boundary and v in boundary:
                    d = (boundary[u] - boundary[v]) % k
                    if d not in (1, k - 1):
                        return ProbeResult("violation", n, ("chord", pid, (u, v)))
            if n < max_depth:
                cx = subdivide(cx, rule, strict=False)
    return ProbeResult("holds", max_depth)


def _adjacency(cx: PlanarComplex):
    adj = {}
    for e in cx.edge_set():
        u, v = tuple(e)
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def _connected(adj, sources, targets, banned):
    from collections import deque

    targets = set(targets) - banned
    queue = deque(s for s in sources if s not in banned)
    seen = set(queue)
    while queue:
        x = queue.popleft()
        if x in targets:
            return True
        for y in adj.get(x, ()):
            if y not in banned and y not in seen:
                seen.add(y)
                queue.append(y)
    return False


def _disjoint_path_count(adj, v, w, max_len):
    """Greedy count of internally-vertex-disjoint v-w paths of bounded length."""
    from collections import deque

    used = set()
    count = 0
    while True:
        parent = {v: None}
        depth = {v: 0}
        queue = deque([v])
        found = False
        while queue:
            x = queue.popleft()
            if depth[x] >= max_len:
                continue
            for y in adj.get(x, ()):
                if y == w:
                    parent[w] = x
                    found = True
                    queue.clear()
                    break
                if y in used or y in parent or y == v:
                    continue
                parent[y] = x
                depth[y] = depth[x] + 1
                queue.append(y)
        if not found:
            return count
        node = parent[w]
        while node is not None and node != v:
            used.add(node)
            node = parent[node]
        count += 1


def is_acylindrical(rule: SubdivisionRule, max_depth: int,
                    path_len_cap: int = 4) -> ProbeResult:
    """Certify acylindricity to a depth, or detect the cylindrical obstruction.

    A pair of non-adjacent boundary vertices certifies at depth K when the two
    boundary arcs reconnect in G^K(P_i) minus the pair.  Pairs that never
    certify are probed for a growing family of >= 3 disjoint bounded-length
    connecting paths, the combinatorial shadow of a cylinder.
    """
    simple = is_simple(rule, max_depth)
    irr = is_irreducible(rule, max_depth)
    if not (simple.ok and irr.ok):
        return ProbeResult("inconclusive", max_depth, ("needs-simple-irreducible",))
    worst_k = 0
    failing = []
    for pid in rule.polygon_ids():
        k = rule.sides(pid)
        tower = subdivision_tower(rule_complex(rule, pid), rule, max_depth, strict=False)
        for i in range(k):
            for j in range(i + 1, k):
                if (i - j) % k in (1, k - 1):
                    continue
                v, w = f"b{i}", f"b{j}"
                arc_a = [f"b{t % k}" for t in range(i + 1, j)]
                arc_b = [f"b{t % k}" for t in range(j + 1, i + k)]
                cert = None
                for depth in range(1, max_depth + 1):
                    adj = _adjacency(tower[depth])
                    if _connected(adj, arc_a, arc_b, {v, w}):
                        cert = depth
                        break
                if cert is None:
                    failing.append((pid, v, w, tower))
                else:
                    worst_k = max(worst_k, cert)
    if not failing:
        return ProbeResult("certified", worst_k)
    for pid, v, w, tower in failing:
        counts = [
            _disjoint_path_count(_adjacency(tower[d]), v, w, path_len_cap)
            for d in range(max_depth + 1)
        ]
        if max_depth >= 1 and counts[-1] >= 3 and counts[-2] >= 3 and counts[-1] >= counts[-2]:
            return ProbeResult("suspected-cylindrical", max_depth,
                               (pid, (v, w), counts))
    return ProbeResult("inconclusive", max_depth,
                       [(pid, v, w) for pid, v, w, _ in failing])


@dataclass
class StandingReport:
    s1_ok: bool
    s1_witness: object
    s2_power: "int | None"
    s2_witness: object
    depth: int


def _face_boundary_data(face: Face):
    w = face.walk
    verts = set(w)
    edges = {frozenset((w[i], w[(i + 1) % len(w)])) for i in range(len(w))}
    return verts, edges


def _s1_holds(cx: PlanarComplex):
    """Each face is a polygon (simple walk) with induced boundary."""
    adj = _adjacency(cx)
    for f in cx.internal_faces():
        w = f.walk
        if len(set(w)) != len(w):
            return ("walk-not-simple", f.id)
        verts, edges = _face_boundary_data(f)
        for u in w:
            for v in adj.get(u, ()):
                if v in verts and frozenset((u, v)) not in edges:
                    return ("boundary-not-induced", f.id, (u, v))
    return None


def _ancestor_id(fid: str, q: int) -> str:
    parts = fid.split("/")
    if len(parts) <= q:
        return parts[0]
    return "/".join(parts[:-q])


def _s2_classify(face: Face, anc: Face):
    fv, fe = _face_boundary_data(face)
    av, ae = _face_boundary_data(anc)
    common_v = fv & av
    common_e = fe & ae
    if not common_v:
        return "empty"
    if not common_e and len(common_v) == 1:
        return "vertex"
    if len(common_e) == 1 and common_v == set(next(iter(common_e))):
        return "edge"
    return "big"


def check_standing_assumptions(rule: SubdivisionRule, max_depth: int,
                               max_power: int = 3,
                               spherical: "PlanarComplex | None" = None) -> StandingReport:
    """Verify S1 (polygonal induced faces) and find the least S2 power.

    When a spherical complex is supplied its tower is checked too (the S1'
    variant); S2 is tested on the rule towers at powers 1..max_power.
    """
    towers = _rule_towers(rule, max_depth)
    s1_witness = None
    for pid, tower in towers.items():
        for cx in tower:
            s1_witness = s1_witness or _s1_holds(cx)
    if spherical is not None:
        for cx in subdivision_tower(spherical, rule, max_depth, strict=False):
            s1_witness = s1_witness or _s1_holds(cx)
    s2_power = None
    s2_witness = None
    for q in range(1, max_power + 1):
        ok = True
        for pid, tower in towers.items():
            for n in range(0, max_depth - q + 1):
                deep = tower[n + q]
                shallow = tower[n]
                for f in deep.internal_faces():
                    anc = shallow.faces.get(_ancestor_id(f.id, q))
                    if anc is None or anc.id == shallow.external:
                        continue
                    verdict = _s2_classify(f, anc)
                    if verdict == "big":
                        ok = False
                        if s2_witness is None or q > s2_witness[0]:
                            s2_witness = (q, pid, n, f.id, anc.id)
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            s2_power = q
            break
    return StandingReport(s1_ok=s1_witness is None, s1_witness=s1_witness,
                          s2_power=s2_power, s2_witness=s2_witness, depth=max_depth)


# --------------------------------------------------------------------------
# Subdivision homomorphisms and subtree transport
# --------------------------------------------------------------------------

@dataclass
class SubdivisionHomomorphism:
    vertex_map: dict
    face_map: dict
    g1: PlanarComplex
    g0: PlanarComplex


def build_homomorphism(vertex_map, g1: PlanarComplex, g0: PlanarComplex):
    """Validate a vertex map as a subdivision homomorphism G^1 -> G^0.

    Returns the homomorphism with the induced face map, or raises
    ``ComplexError`` carrying the violated faces/edges.
    """
    missing = [v for v in g1.vertices() if v not in vertex_map]
    if missing:
        raise ComplexError(f"vertex map undefined on {missing[:4]}...")
    edges0 = g0.edge_set()
    for e in g1.edge_set():
        u, v = tuple(e)
        iu, iv = vertex_map[u], vertex_map[v]
        if iu == iv or frozenset((iu, iv)) not in edges0:
            raise ComplexError(f"edge ({u},{v}) maps to non-edge ({iu},{iv})")
    by_corr = {}
    for f in g0.internal_faces():
        by_corr[(f.type, f.corr)] = f.id
    face_map = {}
    bad = []
    for f in g1.internal_faces():
        target = tuple(vertex_map[x] for x in f.corr)
        fid = by_corr.get((f.type, target))
        if fid is None:
            bad.append(f.id)
        else:
            face_map[f.id] = fid
    if bad:
        raise ComplexError(f"faces without compatible image: {bad}")
    return SubdivisionHomomorphism(dict(vertex_map), face_map, g1, g0)


def rule_automorphisms(rule: SubdivisionRule, pid: str):
    """Boundary rotations of a polygon that extend to decomposition symmetries.

    Returns {shift: (cell_permutation, residual_shifts, interior_map)} where a
    shift s relabels boundary index i to (i + s) mod k.
    """
    dec = rule.decompositions[pid]
    k = rule.sides(pid)
    out = {}
    for s in range(k):
        interior_map = {}
        perm = []
        residuals = []
        ok = True
        for j, cell in enumerate(dec.cells):
            image_walk = tuple((x + s) % k if isinstance(x, int) else ("@", x)
                               for x in cell.walk)
            match = None
            for j2, cell2 in enumerate(dec.cells):
                if cell2.type != cell.type or len(cell2.walk) != len(cell.walk):
                    continue
                for off in range(len(cell2.walk)):
                    good = True
                    trial = {}
                    for i, lbl in enumerate(image_walk):
                        tgt = cell2.walk[(off + i) % len(cell2.walk)]
                        if isinstance(lbl, tuple):  # interior placeholder
                            if not isinstance(tgt, str):
                                good = False
                                break
                            prev = interior_map.get(lbl[1], trial.get(lbl[1]))
                            if prev is not None and prev != tgt:
                                good = False
                                break
                            trial[lbl[1]] = tgt
                        elif lbl != tgt:
                            good = False
                            break
                    if good:
                        match = (j2, trial)
                        break
                if match:
                    break
            if match is None:
                ok = False
                break
            j2, trial = match
            interior_map.update(trial)
            # residual shift: cell2.corr[(i + r) % kt] == image of cell.corr[i]
            kt = rule.sides(cell.type)
            image_corr = tuple(
                (c + s) % k if isinstance(c, int) else interior_map[c]
                for c in cell.corr
            )
            cell2 = dec.cells[j2]
            r = _cyclic_index(cell2.corr, image_corr)
            if r < 0:
                ok = False
                break
            perm.append(j2)
            residuals.append(r % kt)
        if ok and sorted(perm) == list(range(len(dec.cells))):
            out[s] = (tuple(perm), tuple(residuals), dict(interior_map))
    return out


def subtree_vertex_map(tower, rule: SubdivisionRule, src_fid: str, src_level: int,
                       dst_fid: str, dst_level: int, shift: int):
    """Canonical vertex correspondence between two face subtrees.

    Aligns src.corr[i] with dst.corr[(i + shift) % k] and descends matched
    children as deep as the tower allows; the shift must be a rule
    automorphism of the face type at every step.
    """
    auts = {}
    pairs = {}
    face_pairs = []
    stack = [(src_fid, src_level, dst_fid, dst_level, shift)]
    max_level = len(tower) - 1
    while stack:
        sf, sl, df, dl, s = stack.pop()
        src = tower[sl].faces[sf]
        dst = tower[dl].faces[df]
        if src.type != dst.type:
            raise ComplexError(f"type mismatch {sf} vs {df}")
        t = src.type
        k = rule.sides(t)
        s %= k
        for i in range(k):
            a, b = src.corr[i], dst.corr[(i + s) % k]
            if pairs.setdefault(a, b) != b:
                raise ComplexError(f"inconsistent transport at {a!r}")
        face_pairs.append((sf, df))
        if sl + 1 > max_level or dl + 1 > max_level:
            continue
        if s == 0:
            perm = tuple(range(len(rule.cells(t))))
            residuals = tuple(0 for _ in perm)
            imap = {}
        else:
            if t not in auts:
                auts[t] = rule_automorphisms(rule, t)
            if s not in auts[t]:
                raise ComplexError(f"shift {s} is not a symmetry of polygon {t}")
            perm, residuals, imap = auts[t][s]
        dec = rule.decompositions[t]
        for lbl in dec.interior:
            a = f"{sf}.{lbl}"
            b = f"{df}.{imap.get(lbl, lbl)}"
            if pairs.setdefault(a, b) != b:
                raise ComplexError(f"inconsistent transport at {a!r}")
        for j in range(len(dec.cells)):
            stack.append((f"{sf}/{j}", sl + 1, f"{df}/{perm[j]}", dl + 1, residuals[j]))
    return pairs, face_pairs


def align_shift(rule, src: Face, dst: Face, src_vertex, dst_vertex) -> "int | None":
    """Shift s with dst.corr[(i+s)%k] = image of src.corr[i], pinned by one pair."""
    k = rule.sides(src.type)
    try:
        i0 = src.corr.index(src_vertex)
        i1 = dst.corr.index(dst_vertex)
    except ValueError:
        return None
    return (i1 - i0) % k
