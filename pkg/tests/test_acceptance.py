"""Acceptance suite: one test per shipping criterion, tolerances pinned.

Each test prints a single PASS line so the suite doubles as a checklist
(`pytest -s tests/test_acceptance.py`).  Criterion 9's tolerance is applied
exactly as stated; see the assertion message for the measured compounding.
"""

import math
import os
import subprocess
import sys

import pytest

from gasket_forge.fixtures import k4_complex, octahedron_complex
from gasket_forge.gallery import (
    builtin,
    fit_group_symmetries,
    group_limit_orbit,
    local_equivalence_demo,
)
from gasket_forge.markov import (
    build_chain_refined_packing,
    classify_periodic_faces,
    edge_chain_faces,
    estimate_mobius_symmetry,
    model_asymptotics,
    parabolic_asymptotics,
)
from gasket_forge.mobius import cross_ratio, map_circle, mobius_from_triples, \
    tangency_point
from gasket_forge.packing import SolverConfig, pack_complex, pack_level, \
    solve_max_packing, star_triangulate
from gasket_forge.subdivision import (
    check_standing_assumptions,
    is_acylindrical,
    is_irreducible,
    is_simple,
    subdivision_tower,
)
from gasket_forge.tiles import (
    intersection_pattern,
    max_tile_diameter,
    shared_boundary_case,
    tiles_at_level,
)

CAT = builtin()
RULE = CAT.rule
SQ3 = math.sqrt(3.0)


def _ok(name):
    print(f"ACCEPTANCE {name}: PASS")


# -- 1. Descartes oracle ----------------------------------------------------------

def test_01_descartes_oracle():
    p = pack_complex(k4_complex(), cfg=SolverConfig(epsilon=1e-12), outer="w")
    b0 = p.normalization.split("top=")[1].split()[0]
    pin = p.normalization.split("pin=")[1].split()[0]
    last = next(v for v in p.circles if v not in ("w", b0, pin))
    src = (
        tangency_point(p.circles["w"], p.circles[b0]),
        tangency_point(p.circles["w"], p.circles[pin]),
        tangency_point(p.circles[b0], p.circles[pin]),
    )
    for sign in (1.0, -1.0):
        dst = (1 + 0j, complex(0.5, sign * SQ3 / 2), complex(1.5, sign * SQ3 / 2))
        m = mobius_from_triples(*src, *dst)
        fourth = map_circle(m, p.circles[last])
        if not fourth.is_line and fourth.orientation == "bounded":
            break
    assert abs(1.0 / fourth.radius - (3 + 2 * SQ3)) < 1e-8
    _ok("1 descartes-curvature")


# -- 2. residuals on all fixtures -------------------------------------------------

def test_02_residuals_fixtures():
    for cx, outer in ((k4_complex(), None), (octahedron_complex(), None)):
        p = pack_complex(cx, cfg=SolverConfig(epsilon=1e-12), outer=outer)
        assert p.converged
        assert p.angle_residual <= 1e-10
        assert p.tangency_residual <= 1e-10
    for make in (CAT.g1, CAT.g2):
        for n in range(1, 6):
            p = pack_level(make, RULE, n)
            assert p.converged, f"level {n}"
            assert p.angle_residual <= 1e-10, f"level {n}: {p.angle_residual}"
            assert p.tangency_residual <= 1e-10, f"level {n}: {p.tangency_residual}"
    _ok("2 residuals<=1e-10")


# -- 3. rule classification regression -------------------------------------------

def test_03_rule_classification():
    assert is_simple(RULE, 6).ok
    assert is_irreducible(RULE, 6).ok
    assert is_acylindrical(RULE, 6).status == "certified"
    assert is_acylindrical(CAT.cylindrical_rule, 5).status == "suspected-cylindrical"
    rep = check_standing_assumptions(RULE, max_depth=5)
    assert rep.s1_ok and rep.s2_power == 2
    _ok("3 rule-classification")


# -- 4. Mobius rigidity surrogate --------------------------------------------------

def test_04_rigidity_cross_ratios():
    n = 4
    tower = subdivision_tower(CAT.g1, RULE, n)
    # two independent solves of the same complex: different outer vertex and
    # strip gauge, then the same canonical normalization
    p1 = pack_level(CAT.g1, RULE, n, outer="A")
    p2 = pack_level(CAT.g1, RULE, n, outer="C")

    def cr_multiset(p):
        out = []
        for f in sorted(tower[n].faces):
            face = tower[n].faces[f]
            if face.type is None:
                continue
            pts = [tangency_point(p.circles[face.walk[i]],
                                  p.circles[face.walk[(i + 1) % 4]], tol=1e-4)
                   for i in range(4)]
            out.append(cross_ratio(*pts))
        return out

    a = cr_multiset(p1)
    b = cr_multiset(p2)
    worst = max(abs(x - y) for x, y in zip(a, b))
    assert worst <= 1e-8, worst
    _ok("4 rigidity-cross-ratios")


# -- 5. tile-diameter decay --------------------------------------------------------

def test_05_tile_diameter_decay():
    for cx0 in (CAT.g1, CAT.g2):
        tower = subdivision_tower(cx0, RULE, 5)
        maxima = []
        for n in range(1, 6):
            p = pack_level(cx0, RULE, n)
            tl = tiles_at_level(p, tower[n], depth=3)
            maxima.append(max_tile_diameter(tl))
        assert all(a > b for a, b in zip(maxima, maxima[1:])), maxima
        assert maxima[-1] < 0.25 * maxima[0], maxima
    _ok("5 tile-diameter-decay")


# -- 6. intersection patterns ------------------------------------------------------

def test_06_intersection_patterns():
    scale_tol = 1e-6
    for n in (1, 2, 3):
        tower = subdivision_tower(CAT.g1, RULE, n)
        p = pack_level(CAT.g1, RULE, n)
        tl = {t.face_id: t for t in tiles_at_level(p, tower[n], depth=5)}
        ids = sorted(tl)
        faces = tower[n].faces
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                case = shared_boundary_case(faces[a], faces[b])
                verdict = intersection_pattern(tl[a], tl[b], case, tol=scale_tol)
                assert verdict.matches, (n, a, b, case, verdict)
    _ok("6 intersection-patterns")


# -- 7. parabolic asymptotics ------------------------------------------------------

def test_07a_model_asymptotics():
    rep = model_asymptotics(100)
    assert abs(rep.s_d + 1.0) <= 1e-12
    assert abs(rep.s_g + 2.0) <= 1e-12
    _ok("7a model-slopes-(-1,-2)")


def test_07b_measured_asymptotics():
    crp = build_chain_refined_packing(CAT.g1, RULE, base_level=8,
                                      start_face="in", edge=CAT.parabolic_edge,
                                      steps=102, step_levels=2)
    assert crp.packing.converged
    rep = parabolic_asymptotics(crp, count=100)
    assert -1.15 <= rep.s_d <= -0.85, rep.s_d
    assert -2.2 <= rep.s_g <= -1.8, rep.s_g
    _ok(f"7b measured-slopes s_d={rep.s_d:.4f} s_g={rep.s_g:.4f}")


# -- 8. symmetry fitting -----------------------------------------------------------

def test_08_symmetry_fitting():
    residuals = {"g1": [], "g2": []}
    for n in (3, 4, 5):
        tower = subdivision_tower(CAT.g2, RULE, n)
        p = pack_level(CAT.g2, RULE, n)
        for fit in fit_group_symmetries(p, tower, RULE, CAT):
            residuals[fit.name].append(fit.residual)
    for name in ("g1", "g2"):
        r = residuals[name]
        assert r[0] > r[1] > r[2], (name, r)
    gaps = []
    for n in (3, 4, 5):
        tower = subdivision_tower(CAT.g1, RULE, n)
        p = pack_level(CAT.g1, RULE, n)
        chain = edge_chain_faces(tower, RULE, "in", CAT.parabolic_edge)
        seq = classify_periodic_faces(tower, chain, period=2)
        assert seq.kind == "parabolic"
        est = estimate_mobius_symmetry(p, tower, RULE, seq)
        gaps.append(est.tr2_gap)
    assert gaps[0] > gaps[1] > gaps[2], gaps
    _ok("8 symmetry-fitting-monotone")


# -- 9. group-orbit consistency ----------------------------------------------------

def test_09_group_orbit():
    n = 6
    tower = subdivision_tower(CAT.g2, RULE, n)
    p = pack_level(CAT.g2, RULE, n)
    fits = fit_group_symmetries(p, tower, RULE, CAT)
    residual = max(f.residual for f in fits)
    base = ["A", "B", "C", "D", "in.c", "out.c"]
    orbit = group_limit_orbit(fits, p, base, max_word_len=3)
    assert orbit.unmatched == 0  # every length-<=3 word has a counterpart
    bound = residual + 1e-6
    assert orbit.max_matched_mismatch <= bound, (
        f"orbit mismatch {orbit.max_matched_mismatch:.6f} exceeds single-application "
        f"residual bound {bound:.6f}; word errors compound "
        f"(<= 3x single residual {3 * residual:.6f})")
    _ok("9 group-orbit-consistency")


# -- 10. local-equivalence demo ----------------------------------------------------

def test_10_local_equivalence():
    n = 4
    t1 = subdivision_tower(CAT.g1, RULE, n)
    t2 = subdivision_tower(CAT.g2, RULE, n)
    p1 = pack_level(CAT.g1, RULE, n)
    p2 = pack_level(CAT.g2, RULE, n)
    demo = local_equivalence_demo(p1, p2, t1, t2, RULE, n)
    assert len(demo.subpackings) == 6  # all six are reference-isomorphic
    assert demo.max_cr_difference > 1e-3
    _ok("10 local-equivalence")


# -- 11. determinism ---------------------------------------------------------------

def test_11_cli_determinism(tmp_path):
    env = dict(os.environ)

    def run(threads, outdir):
        env["GASKET_FORGE_THREADS"] = threads
        files = {}
        base = tmp_path / outdir
        base.mkdir()
        pack = base / "p.pack"
        svg = base / "p.svg"
        subprocess.run([sys.executable, "-m", "gasket_forge.cli", "pack",
                        "--builtin", "g1", "--level", "2", "--out", str(pack)],
                       check=True, env=env, capture_output=True)
        subprocess.run([sys.executable, "-m", "gasket_forge.cli", "render",
                        str(pack), "--out", str(svg)],
                       check=True, env=env, capture_output=True)
        gal = base / "gal"
        subprocess.run([sys.executable, "-m", "gasket_forge.cli", "gallery",
                        "--demo", "qrsym", "--level", "2", "--out", str(gal)],
                       check=True, env=env, capture_output=True)
        for f in (pack, svg, gal / "qrsym.txt"):
            files[f.name] = f.read_bytes()
        return files

    a = run("1", "a")
    b = run("1", "b")
    c = run("0", "c")
    assert a == b == c
    # round-trip: packing file parse -> serialize is byte-identical
    from gasket_forge import fileio

    text = (tmp_path / "a" / "p.pack").read_text()
    assert fileio.format_packing(fileio.parse_packing(text)) == text
    _ok("11 determinism")
