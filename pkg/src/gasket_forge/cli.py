"""gasket-forge command line: validate, pack, render, stats, gallery.

Exit codes: 0 success, 1 validation or assertion failure, 2 I/O or parse
failure.  Every command is a pure function of its inputs and flags; the
GASKET_FORGE_THREADS variable is accepted for compatibility and can only
affect speed, never output bytes.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import fileio, gallery, markov, render, tiles
from .fileio import ParseError
from .mobius import INF, tangency_point
from .packing import SolverConfig, pack_complex, pack_level, canonical_normalization_edges
from .subdivision import (
    check_standing_assumptions,
    is_acylindrical,
    is_irreducible,
    is_simple,
    subdivision_tower,
    validate_rule,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_IO = 2


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise SystemExit2(f"cannot read {path}: {exc}")


class SystemExit2(Exception):
    pass


def _builtin_complex(name: str):
    cat = gallery.builtin()
    if name == "g1":
        return cat, cat.g1
    if name == "g2":
        return cat, cat.g2
    raise SystemExit2(f"unknown builtin {name!r} (use g1 or g2)")


# --------------------------------------------------------------------------
# validate
# --------------------------------------------------------------------------

def cmd_validate(args) -> int:
    text = _read(args.rule)
    try:
        rule = fileio.parse_rule(text)
    except ParseError as exc:
        print(f"parse-error {exc}")
        return EXIT_IO
    rep = validate_rule(rule)
    for line in rep.lines():
        print(line)
    if not rep.ok:
        return EXIT_FAIL
    depth = args.depth
    simple = is_simple(rule, depth)
    irr = is_irreducible(rule, depth)
    print(f"simple={simple.status} depth={simple.depth}")
    print(f"irreducible={irr.status} depth={irr.depth}")
    acyl = is_acylindrical(rule, depth)
    print(f"acylindrical={acyl.status} depth={acyl.depth}")
    if acyl.witness is not None:
        print(f"acylindrical_witness={acyl.witness}")
    standing = check_standing_assumptions(rule, max_depth=min(depth, 5))
    print(f"s1={'ok' if standing.s1_ok else 'violated'}")
    print(f"s2_power={standing.s2_power}")
    ok = simple.ok and irr.ok and acyl.status == "certified"
    print(f"verdict={'ok' if ok else 'rejected'}")
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# pack
# --------------------------------------------------------------------------

def cmd_pack(args) -> int:
    cfg = SolverConfig(epsilon=args.eps, max_iterations=args.max_iter)
    if args.builtin:
        cat, cx0 = _builtin_complex(args.builtin)
        p = pack_level(cx0, cat.rule, args.level, cfg=cfg, outer=args.outer)
    else:
        if not args.complex or not args.rule:
            raise SystemExit2("need --builtin or both --complex and --rule")
        rule = fileio.parse_rule(_read(args.rule))
        cx0 = fileio.parse_complex(_read(args.complex))
        p = pack_level(cx0, rule, args.level, cfg=cfg, outer=args.outer)
    text = fileio.format_packing(p)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"converged={'1' if p.converged else '0'} "
          f"tangency={p.tangency_residual:.3e} angle={p.angle_residual:.3e}",
          file=sys.stderr)
    return EXIT_OK if p.converged else EXIT_FAIL


# --------------------------------------------------------------------------
# render
# --------------------------------------------------------------------------

def cmd_render(args) -> int:
    text = _read(args.input)
    head = text.lstrip().split(None, 1)[0] if text.strip() else ""
    spec = render.RenderSpec(center=complex(args.center_x, args.center_y),
                             half_width=args.half_width,
                             stroke_width=args.stroke,
                             fill=args.fill,
                             point_size=args.point_size,
                             max_elements=args.max_elements)
    if head == "packing":
        p = fileio.parse_packing(text)
        elements = render.packing_elements(p)
    elif head == "cloud":
        points, _, _ = fileio.parse_cloud(text)
        elements = render.cloud_elements(points)
    else:
        raise SystemExit2(f"unrecognized input header {head!r}")
    svg = render.render_svg(elements, spec)
    if args.out:
        Path(args.out).write_text(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


# --------------------------------------------------------------------------
# stats
# --------------------------------------------------------------------------

def _stats_asymptotics(args) -> int:
    ok = True
    if args.model:
        rep = markov.model_asymptotics(args.points)
        print("# exact parabolic model a_n = 1/n")
    else:
        cat, cx0 = _builtin_complex(args.builtin or "g1")
        crp = markov.build_chain_refined_packing(
            cx0, cat.rule, base_level=args.level, start_face="in",
            edge=tuple(cat.parabolic_edge), steps=args.points + 2)
        rep = markov.parabolic_asymptotics(crp, count=args.points)
    print("n d_n g_n")
    for i, d in enumerate(rep.distances, start=1):
        g = rep.gaps[i - 1] if i - 1 < len(rep.gaps) else float("nan")
        print(f"{i} {d:.12e} {g:.12e}")
    print(f"fit s_d={rep.s_d:.12f} s_g={rep.s_g:.12f} "
          f"window=[{rep.window[0]},{rep.window[1]}]")
    if args.model:
        ok = abs(rep.s_d + 1.0) <= 1e-12 and abs(rep.s_g + 2.0) <= 1e-12
    else:
        ok = -1.15 <= rep.s_d <= -0.85 and -2.2 <= rep.s_g <= -1.8
    print(f"brackets={'pass' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_FAIL


def _stats_tiles(args) -> int:
    cat, cx0 = _builtin_complex(args.builtin or "g1")
    tower = subdivision_tower(cx0, cat.rule, args.level)
    print("level max_tile_diameter")
    maxima = []
    for n in range(1, args.level + 1):
        p = pack_level(cx0, cat.rule, n)
        tl = tiles.tiles_at_level(p, tower[n], depth=args.depth)
        maxima.append(tiles.max_tile_diameter(tl))
        print(f"{n} {maxima[-1]:.9e}")
    monotone = all(a > b for a, b in zip(maxima, maxima[1:]))
    print(f"monotone_decreasing={'pass' if monotone else 'fail'}")
    return EXIT_OK if monotone else EXIT_FAIL


def _stats_contraction(args) -> int:
    cat, cx0 = _builtin_complex(args.builtin or "g1")
    tower = subdivision_tower(cx0, cat.rule, args.level)
    p = pack_level(cx0, cat.rule, args.level)
    chain = markov.edge_chain_faces(tower, cat.rule, "in", tuple(cat.parabolic_edge))
    values = markov.contraction_decay(p, tower, cat.rule, chain, period=2)
    print("k proxy")
    for k, v in enumerate(values):
        print(f"{k} {v:.9e}")
    import math

    slope = markov.least_squares_slope(list(range(len(values))),
                                       [math.log(v) for v in values])
    ratio = math.exp(slope)
    print(f"fit ratio={ratio:.6f}")
    ok = 0.0 < ratio < 1.0
    print(f"geometric_decay={'pass' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_FAIL


def _stats_symmetry(args) -> int:
    cat, cx0 = _builtin_complex(args.builtin or "g2")
    levels = list(range(3, max(4, args.level) + 1))
    rows = {}
    for n in levels:
        tower = subdivision_tower(cx0, cat.rule, n)
        p = pack_level(cx0, cat.rule, n)
        fits = gallery.fit_group_symmetries(p, tower, cat.rule, cat)
        rows[n] = fits
    names = [f.name for f in rows[levels[0]]]
    print("level " + " ".join(f"residual_{nm}" for nm in names))
    for n in levels:
        print(f"{n} " + " ".join(f"{f.residual:.9e}" for f in rows[n]))
    ok = all(
        all(rows[a][i].residual > rows[b][i].residual for a, b in zip(levels, levels[1:]))
        for i in range(len(names))
    )
    print(f"strictly_decreasing={'pass' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_stats(args) -> int:
    if args.asymptotics:
        return _stats_asymptotics(args)
    if args.tiles:
        return _stats_tiles(args)
    if args.contraction:
        return _stats_contraction(args)
    if args.symmetry:
        return _stats_symmetry(args)
    raise SystemExit2("choose one of --asymptotics/--tiles/--contraction/--symmetry")


# --------------------------------------------------------------------------
# gallery
# --------------------------------------------------------------------------

def _demo_snlo(args, outdir: Path) -> int:
    cat = gallery.builtin()
    n = args.level
    t1 = subdivision_tower(cat.g1, cat.rule, n)
    t2 = subdivision_tower(cat.g2, cat.rule, n)
    p1 = pack_level(cat.g1, cat.rule, n)
    p2 = pack_level(cat.g2, cat.rule, n)
    demo = gallery.local_equivalence_demo(p1, p2, t1, t2, cat.rule, n)
    partner = {"g1+": "g2+", "g1-": "g2-", "g1~+": "g2+", "g1~-": "g2-",
               "g2+": "g2+", "g2-": "g2-"}
    for name in sorted(demo.subpackings):
        sub = demo.subpackings[name]
        mate = demo.subpackings[partner[name]]
        elements = []
        for packing, subp, color in ((p1 if name.startswith("g1") else p2, sub, "black"),
                                     (p2, mate, "red")):
            frame = _half_frame(packing, subp)
            for v in sorted(subp.vertices):
                from .mobius import map_circle

                elements.append(("circle", map_circle(frame, packing.circles[v]), color))
        spec = render.RenderSpec(center=complex(0.5, 0.0), half_width=2.5)
        fname = name.replace("~", "t").replace("+", "p").replace("-", "m")
        (outdir / f"snlo_{fname}.svg").write_text(render.render_svg(elements, spec))
    lines = ["# cross-ratio table: reference-face key then one column per sub-packing"]
    names = sorted(demo.cross_ratios)
    lines.append("key " + " ".join(names))
    keys = sorted(demo.cross_ratios[names[0]])
    for key in keys:
        row = [key]
        for nm in names:
            v = demo.cross_ratios[nm].get(key)
            row.append("NA" if v is None else f"{v.real:.12g}{v.imag:+.12g}j")
        lines.append(" ".join(row))
    lines.append(f"max_cr_difference={demo.max_cr_difference:.12g}")
    (outdir / "crossratios.txt").write_text("\n".join(lines) + "\n")
    print(f"subpackings={len(demo.subpackings)} max_cr_difference={demo.max_cr_difference:.6g}")
    return EXIT_OK if demo.max_cr_difference > 1e-3 else EXIT_FAIL


def _half_frame(packing, sub):
    iso = sub.iso_to_reference
    pts = []
    for a, b in (("b0", "b1"), ("b1", "b2"), ("b2", "b3")):
        pts.append(tangency_point(packing.circles[iso[a]], packing.circles[iso[b]],
                                  tol=1e-4))
    from .mobius import mobius_from_triples

    return mobius_from_triples(*pts, 0j, 1 + 0j, INF)


def _demo_qrsym(args, outdir: Path) -> int:
    from .subdivision import build_homomorphism

    cat = gallery.builtin()
    n = args.level
    tower = subdivision_tower(cat.g1, cat.rule, n + 2)
    hom = build_homomorphism(cat.vertex_dynamics, tower[1], tower[0])
    vm = markov.induce_vertex_markov(hom, tower)
    rep = gallery.qr_symmetry_demo(vm, n)
    lines = [f"level={rep.level}",
             f"region_faces={len(rep.region_faces)}",
             f"cover_faces={len(rep.cover_faces)}",
             f"commutes={'1' if rep.commutes else '0'}"]
    for fid in sorted(rep.face_fibers):
        lines.append(f"face_fiber {fid} {rep.face_fibers[fid]}")
    for v in sorted(rep.vertex_fibers):
        lines.append(f"vertex_fiber {v} {rep.vertex_fibers[v]}")
    lines.append(f"branch_vertices={','.join(rep.branch_vertices)}")
    (outdir / "qrsym.txt").write_text("\n".join(lines) + "\n")
    ok = rep.commutes and set(rep.face_fibers.values()) == {2} \
        and len(rep.branch_vertices) == 1
    print(f"faces={len(rep.region_faces)} branch={rep.branch_vertices} "
          f"verdict={'ok' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_FAIL


def _demo_symfit(args, outdir: Path) -> int:
    cat = gallery.builtin()
    lines = ["level residual_g1 residual_g2 class_g1 class_g2"]
    history = []
    for n in range(3, max(4, args.level) + 1):
        tower = subdivision_tower(cat.g2, cat.rule, n)
        p = pack_level(cat.g2, cat.rule, n)
        fits = gallery.fit_group_symmetries(p, tower, cat.rule, cat)
        history.append([f.residual for f in fits])
        lines.append(f"{n} {fits[0].residual:.9e} {fits[1].residual:.9e} "
                     f"{fits[0].classification} {fits[1].classification}")
    decreasing = all(
        all(a[i] > b[i] for i in range(len(a))) for a, b in zip(history, history[1:])
    )
    lines.append(f"strictly_decreasing={'1' if decreasing else '0'}")
    (outdir / "symfit.txt").write_text("\n".join(lines) + "\n")
    print(f"levels={len(history)} strictly_decreasing={decreasing}")
    return EXIT_OK if decreasing else EXIT_FAIL


def cmd_gallery(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.demo == "snlo":
        return _demo_snlo(args, outdir)
    if args.demo == "qrsym":
        return _demo_qrsym(args, outdir)
    if args.demo == "symfit":
        return _demo_symfit(args, outdir)
    raise SystemExit2(f"unknown demo {args.demo!r}")


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gasket-forge")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="validate a subdivision rule file")
    v.add_argument("rule")
    v.add_argument("--depth", type=int, default=5)

    p = sub.add_parser("pack", help="pack a spherical complex at a level")
    p.add_argument("--builtin", choices=("g1", "g2"))
    p.add_argument("--complex")
    p.add_argument("--rule")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=1_000_000)
    p.add_argument("--outer")
    p.add_argument("--out")

    r = sub.add_parser("render", help="render a packing or cloud file to SVG")
    r.add_argument("input")
    r.add_argument("--out")
    r.add_argument("--center-x", type=float, default=0.5)
    r.add_argument("--center-y", type=float, default=0.35)
    r.add_argument("--half-width", type=float, default=2.0)
    r.add_argument("--stroke", type=float, default=0.005)
    r.add_argument("--fill", action="store_true")
    r.add_argument("--point-size", type=float, default=0.004)
    r.add_argument("--max-elements", type=int, default=50000)

    s = sub.add_parser("stats", help="numeric diagnostics tables")
    s.add_argument("--asymptotics", action="store_true")
    s.add_argument("--tiles", action="store_true")
    s.add_argument("--contraction", action="store_true")
    s.add_argument("--symmetry", action="store_true")
    s.add_argument("--model", action="store_true")
    s.add_argument("--builtin", choices=("g1", "g2"))
    s.add_argument("--level", type=int, default=5)
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--points", type=int, default=30)

    g = sub.add_parser("gallery", help="built-in demos")
    g.add_argument("--demo", required=True, choices=("snlo", "qrsym", "symfit"))
    g.add_argument("--level", type=int, default=3)
    g.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    os.environ.get("GASKET_FORGE_THREADS")  # accepted; speed-only by contract
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "pack":
            return cmd_pack(args)
        if args.command == "render":
            return cmd_render(args)
        if args.command == "stats":
            return cmd_stats(args)
        if args.command == "gallery":
            return cmd_gallery(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ParseError as exc:
        print(f"parse-error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io-error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_IO


def console() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
