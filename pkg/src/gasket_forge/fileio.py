"""Line-oriented file formats: rules, complexes, packings, point clouds.

All floats are written with 17 significant digits so that parse/serialize
round-trips are byte-identical; `#` starts a comment anywhere.
"""

from __future__ import annotations

from .mobius import GenCircle, is_inf
from .packing import Packing
from .subdivision import (
    CellDecomposition,
    Face,
    PlanarComplex,
    PolygonSpec,
    RuleCell,
    SubdivisionRule,
)


class ParseError(ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_label(tok: str):
    return int(tok) if tok.lstrip("-").isdigit() else tok


# --------------------------------------------------------------------------
# Rules
# --------------------------------------------------------------------------

def format_rule(rule: SubdivisionRule) -> str:
    out = []
    for pid in sorted(rule.polygons):
        out.append(f"polygon {pid} sides={rule.polygons[pid].side_count}")
    for pid in sorted(rule.decompositions):
        dec = rule.decompositions[pid]
        if dec.interior:
            out.append(f"interior {pid} {','.join(dec.interior)}")
        for j, cell in enumerate(dec.cells):
            walk = ",".join(str(x) for x in cell.walk)
            out.append(f"cell {pid}.{j} type={cell.type} walk={walk}")
            corr = " ".join(f"{i}->{cell.corr[i]}" for i in range(len(cell.corr)))
            out.append(f"corr {pid}.{j} {corr}")
    return "\n".join(out) + "\n"


def parse_rule(text: str) -> SubdivisionRule:
    polygons = {}
    interiors = {}
    cells = {}
    corrs = {}
    for lineno, toks in _tokens(text):
        kind = toks[0]
        if kind == "polygon":
            if len(toks) != 3 or not toks[2].startswith("sides="):
                raise ParseError(lineno, "expected: polygon <id> sides=<k>")
            polygons[toks[1]] = PolygonSpec(toks[1], int(toks[2][6:]))
        elif kind == "interior":
            if len(toks) != 3:
                raise ParseError(lineno, "expected: interior <id> <v,...>")
            interiors[toks[1]] = tuple(v for v in toks[2].split(",") if v)
        elif kind == "cell":
            if len(toks) != 4:
                raise ParseError(lineno, "expected: cell <id>.<j> type=.. walk=..")
            pid, _, j = toks[1].rpartition(".")
            if not pid or not j.isdigit():
                raise ParseError(lineno, f"bad cell name {toks[1]!r}")
            if not toks[2].startswith("type=") or not toks[3].startswith("walk="):
                raise ParseError(lineno, "cell needs type= and walk=")
            walk = tuple(_parse_label(t) for t in toks[3][5:].split(","))
            cells.setdefault(pid, {})[int(j)] = (toks[2][5:], walk)
        elif kind == "corr":
            pid, _, j = toks[1].rpartition(".")
            if not pid or not j.isdigit():
                raise ParseError(lineno, f"bad cell name {toks[1]!r}")
            mapping = {}
            for pair in toks[2:]:
                if "->" not in pair:
                    raise ParseError(lineno, f"bad correspondence token {pair!r}")
                a, b = pair.split("->", 1)
                mapping[int(a)] = _parse_label(b)
            corrs.setdefault(pid, {})[int(j)] = mapping
        else:
            raise ParseError(lineno, f"unknown directive {kind!r}")
    if not polygons:
        raise ParseError(0, "no polygons declared")
    decs = {}
    for pid, cellmap in cells.items():
        cell_list = []
        for j in sorted(cellmap):
            ctype, walk = cellmap[j]
            mapping = corrs.get(pid, {}).get(j)
            if mapping is None:
                raise ParseError(0, f"cell {pid}.{j} has no correspondence")
            k = max(mapping) + 1
            corr = tuple(mapping.get(i) for i in range(k))
            if any(c is None for c in corr):
                raise ParseError(0, f"cell {pid}.{j}: correspondence misses an index")
            cell_list.append(RuleCell(type=ctype, walk=walk, corr=corr))
        decs[pid] = CellDecomposition(polygon=pid, interior=interiors.get(pid, ()),
                                      cells=tuple(cell_list))
    return SubdivisionRule(polygons=polygons, decompositions=decs)


# --------------------------------------------------------------------------
# Complexes
# --------------------------------------------------------------------------

def format_complex(cx: PlanarComplex) -> str:
    out = [f"level {cx.level}"]
    for v in cx.vertices():
        out.append(f"vertex {v}")
    rot = cx.rotations()
    for v in cx.vertices():
        out.append(f"rot {v} = {','.join(rot[v])}")
    for f in cx.faces.values():
        t = f.type if f.type is not None else "-"
        out.append(f"face {f.id} type={t} walk={','.join(f.walk)}")
        if f.corr is not None:
            corr = " ".join(f"{i}->{v}" for i, v in enumerate(f.corr))
            out.append(f"fcorr {f.id} {corr}")
    if cx.external is not None:
        out.append(f"external {cx.external}")
    return "\n".join(out) + "\n"


def parse_complex(text: str) -> PlanarComplex:
    level = 0
    faces = []
    corrs = {}
    external = None
    for lineno, toks in _tokens(text):
        kind = toks[0]
        if kind == "level":
            level = int(toks[1])
        elif kind == "vertex":
            pass  # vertices are implied by the face walks
        elif kind == "rot":
            pass  # rotations are derived from the walks on load
        elif kind == "face":
            if len(toks) != 4 or not toks[2].startswith("type=") \
                    or not toks[3].startswith("walk="):
                raise ParseError(lineno, "expected: face <id> type=<t> walk=<...>")
            ftype = toks[2][5:]
            faces.append(Face(id=toks[1], type=None if ftype == "-" else ftype,
                              walk=tuple(toks[3][5:].split(",")), corr=None,
                              level=level))
        elif kind == "fcorr":
            mapping = {}
            for pair in toks[2:]:
                a, b = pair.split("->", 1)
                mapping[int(a)] = b
            corrs[toks[1]] = tuple(mapping[i] for i in range(len(mapping)))
        elif kind == "external":
            external = toks[1]
        else:
            raise ParseError(lineno, f"unknown directive {kind!r}")
    if not faces:
        raise ParseError(0, "no faces declared")
    for f in faces:
        if f.id in corrs:
            f.corr = corrs[f.id]
        elif f.type is not None:
            f.corr = f.walk  # default alignment
    return PlanarComplex(faces, level=level, external=external)


# --------------------------------------------------------------------------
# Packings
# --------------------------------------------------------------------------

def format_packing(p: Packing) -> str:
    out = [f"packing chart=plane outer={p.outer}"]
    for v in sorted(p.circles):
        c = p.circles[v]
        if c.is_line:
            out.append(f"line {v} {_fmt(c.center.real)} {_fmt(c.center.imag)} "
                       f"{_fmt(c.normal.real)} {_fmt(c.normal.imag)}")
        else:
            out.append(f"circle {v} {_fmt(c.center.real)} {_fmt(c.center.imag)} "
                       f"{_fmt(c.radius)}")
    out.append(f"residuals tangency={_fmt(p.tangency_residual)} "
               f"angle={_fmt(p.angle_residual)}")
    return "\n".join(out) + "\n"


def parse_packing(text: str) -> Packing:
    circles = {}
    outer = None
    tangency = angle = 0.0
    for lineno, toks in _tokens(text):
        kind = toks[0]
        if kind == "packing":
            for tok in toks[1:]:
                if tok.startswith("outer="):
                    outer = tok[6:]
        elif kind == "circle":
            if len(toks) != 5:
                raise ParseError(lineno, "expected: circle <id> <cx> <cy> <r>")
            v = toks[1]
            circles[v] = ("circle", float(toks[2]), float(toks[3]), float(toks[4]))
        elif kind == "line":
            if len(toks) != 6:
                raise ParseError(lineno, "expected: line <id> <ax> <ay> <nx> <ny>")
            v = toks[1]
            circles[v] = ("line", float(toks[2]), float(toks[3]),
                          float(toks[4]), float(toks[5]))
        elif kind == "residuals":
            for tok in toks[1:]:
                if tok.startswith("tangency="):
                    tangency = float(tok[9:])
                elif tok.startswith("angle="):
                    angle = float(tok[6:])
        else:
            raise ParseError(lineno, f"unknown directive {kind!r}")
    if outer is None:
        raise ParseError(0, "missing packing header")
    built = {}
    for v, rec in circles.items():
        if rec[0] == "line":
            built[v] = GenCircle.line(complex(rec[1], rec[2]), complex(rec[3], rec[4]))
        else:
            orientation = "unbounded" if v == outer else "bounded"
            built[v] = GenCircle.proper(complex(rec[1], rec[2]), rec[3], orientation)
    return Packing(circles=built, outer=outer, tangency_residual=tangency,
                   angle_residual=angle, converged=True, normalization="file")


# --------------------------------------------------------------------------
# Point clouds
# --------------------------------------------------------------------------

def format_cloud(points, level: int, depth: int) -> str:
    out = [f"cloud level={level} depth={depth}"]
    for z in points:
        if is_inf(z):
            continue  # the chart cannot carry the point at infinity
        out.append(f"pt {_fmt(z.real)} {_fmt(z.imag)}")
    return "\n".join(out) + "\n"


def parse_cloud(text: str):
    points = []
    level = depth = 0
    for lineno, toks in _tokens(text):
        if toks[0] == "cloud":
            for tok in toks[1:]:
                if tok.startswith("level="):
                    level = int(tok[6:])
                elif tok.startswith("depth="):
                    depth = int(tok[6:])
        elif toks[0] == "pt":
            if len(toks) != 3:
                raise ParseError(lineno, "expected: pt <x> <y>")
            points.append(complex(float(toks[1]), float(toks[2])))
        else:
            raise ParseError(lineno, f"unknown directive {toks[0]!r}")
    return points, level, depth
