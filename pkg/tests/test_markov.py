import math

import pytest

from gasket_forge.gallery import (
    E_VERTEX,
    F_VERTEX,
    S_VERTEX_MAP,
    g1_complex,
    quad_split_rule,
)
from gasket_forge.markov import (
    build_chain_refined_packing,
    classify_periodic_faces,
    contraction_proxy,
    edge_chain_faces,
    estimate_mobius_symmetry,
    fit_parabolic_exponents,
    induce_vertex_markov,
    markov_partition_on_circle,
    model_asymptotics,
    parabolic_asymptotics,
    preserves_cyclic_order,
)
from gasket_forge.mobius import MobiusMap, map_circle
from gasket_forge.packing import apply_mobius, pack_level
from gasket_forge.subdivision import ComplexError, build_homomorphism, subdivision_tower


def make_vm(levels=3):
    rule = quad_split_rule()
    tower = subdivision_tower(g1_complex(), rule, levels)
    hom = build_homomorphism(S_VERTEX_MAP, tower[1], tower[0])
    return rule, tower, induce_vertex_markov(hom, tower)


def test_vertex_images_level_one():
    _, _, vm = make_vm(2)
    assert vm.psi["A"] == "B"
    assert vm.psi["B"] == "A"
    assert vm.psi["D"] == "A"
    assert vm.psi["C"] == "D"
    assert vm.psi[E_VERTEX] == "C"
    assert vm.psi[F_VERTEX] == "C"


def test_periodic_orbits_of_dynamics():
    _, _, vm = make_vm(2)
    assert vm.apply("A", 2) == "A"  # period two
    orbit = ["C"]
    for _ in range(4):
        orbit.append(vm.psi[orbit[-1]])
    assert orbit == ["C", "D", "A", "B", "A"]  # strictly pre-periodic


def test_identity_hom_gives_identity_map():
    rule = quad_split_rule()
    cx = g1_complex()
    tower = subdivision_tower(cx, rule, 2)
    hom = build_homomorphism({v: v for v in cx.vertices()}, cx, cx)
    vm = induce_vertex_markov(hom, tower)
    assert all(vm.psi[v] == v for v in cx.vertices())


def test_deep_vertex_transport_matches_hand_trace():
    _, tower, vm = make_vm(3)
    # the wall vertex of face in/0 lives inside the image face out at one
    # level down, and so on for its children
    assert vm.psi["in/0.c"] == "out.c"
    assert vm.psi["in/1.c"] == "in.c"
    assert vm.psi["out/0.c"] == "out.c"
    assert vm.psi["out/1.c"] == "in.c"
    assert vm.psi["in/0/1.c"] == "out/1.c"


def test_markov_partition_on_invariant_circle():
    rule, tower, vm = make_vm(2)
    p = pack_level(g1_complex(), rule, 2)
    icd = markov_partition_on_circle(p, vm, "A", power=2)
    assert set(icd.neighbors) == {"B", "D", E_VERTEX, F_VERTEX}
    assert icd.endpoint_map["B"] == "B"
    assert icd.endpoint_map["D"] == "B"
    assert icd.endpoint_map[E_VERTEX] == "D"
    assert icd.endpoint_map[F_VERTEX] == "D"
    assert icd.degree == 2
    assert len(icd.points) == len(tower[1].rotations()["A"])
    assert preserves_cyclic_order(icd)


def test_partition_requires_fixed_vertex():
    rule, tower, vm = make_vm(2)
    p = pack_level(g1_complex(), rule, 2)
    with pytest.raises(ComplexError):
        markov_partition_on_circle(p, vm, "C", power=2)


# --- asymptotics -----------------------------------------------------------------

def test_model_sequence_slopes_exact():
    rep = model_asymptotics(100)
    assert abs(rep.s_d + 1.0) < 1e-12
    assert abs(rep.s_g + 2.0) < 1e-12


def test_fit_refuses_tiny_samples():
    with pytest.raises(ValueError):
        fit_parabolic_exponents([1.0, 0.5], [0.5])


def test_edge_chain_faces():
    rule = quad_split_rule()
    tower = subdivision_tower(g1_complex(), rule, 3)
    chain = edge_chain_faces(tower, rule, "in", ("A", "B"))
    assert chain == ["in", "in/0", "in/0/1", "in/0/1/0"]


def test_parabolic_asymptotics_small():
    rule = quad_split_rule()
    crp = build_chain_refined_packing(g1_complex(), rule, base_level=4,
                                      start_face="in", edge=("A", "B"),
                                      steps=30, step_levels=2)
    assert len(crp.chain_neighbors) >= 30
    rep = parabolic_asymptotics(crp, count=30)
    assert -1.3 < rep.s_d < -0.7
    assert -2.4 < rep.s_g < -1.6
    # distances shrink monotonically toward the parabolic point
    assert all(a > b for a, b in zip(rep.distances, rep.distances[1:]))


def test_asymptotics_insufficient_points():
    rule = quad_split_rule()
    crp = build_chain_refined_packing(g1_complex(), rule, base_level=3,
                                      start_face="in", edge=("A", "B"),
                                      steps=6, step_levels=2)
    with pytest.raises(ValueError):
        parabolic_asymptotics(crp, count=2)


# --- periodic faces and symmetry ---------------------------------------------------

def test_classify_parabolic_chain():
    rule = quad_split_rule()
    tower = subdivision_tower(g1_complex(), rule, 4)
    chain = edge_chain_faces(tower, rule, "in", ("A", "B"))
    seq = classify_periodic_faces(tower, chain, period=2)
    assert seq.kind == "parabolic"
    assert frozenset(("A", "B")) in seq.shared_edges


def test_classify_hyperbolic_sequence():
    rule = quad_split_rule()
    tower = subdivision_tower(g1_complex(), rule, 4)
    ids = ["in", "in/0", "in/0/0", "in/0/0/0", "in/0/0/0/0"]
    seq = classify_periodic_faces(tower, ids, period=4)
    assert seq.kind == "hyperbolic"
    assert not seq.shared_edges and not seq.shared_vertices


def test_nonperiodic_rejected():
    rule = quad_split_rule()
    tower = subdivision_tower(g1_complex(), rule, 3)
    with pytest.raises(ComplexError):
        classify_periodic_faces(tower, ["in", "in/0", "in/0/1", "in/0/1/1"], period=1)


def test_symmetry_estimate_parabolic_trend():
    rule = quad_split_rule()
    gaps = []
    residuals = []
    for n in (3, 4, 5):
        tower = subdivision_tower(g1_complex(), rule, n)
        p = pack_level(g1_complex(), rule, n)
        chain = edge_chain_faces(tower, rule, "in", ("A", "B"))
        seq = classify_periodic_faces(tower, chain, period=2)
        est = estimate_mobius_symmetry(p, tower, rule, seq)
        gaps.append(est.tr2_gap)
        residuals.append(est.residual)
    assert gaps[0] > gaps[1] > gaps[2]  # classification approaches parabolic
    assert residuals[0] > residuals[2]


def test_symmetry_estimate_mobius_equivariant():
    rule = quad_split_rule()
    n = 3
    tower = subdivision_tower(g1_complex(), rule, n)
    p = pack_level(g1_complex(), rule, n)
    chain = edge_chain_faces(tower, rule, "in", ("A", "B"))
    seq = classify_periodic_faces(tower, chain, period=2)
    est = estimate_mobius_symmetry(p, tower, rule, seq)
    mob = MobiusMap.from_coeffs(2 + 1j, 0.3, -0.2j, 1)
    q = apply_mobius(p, mob)
    est2 = estimate_mobius_symmetry(q, tower, rule, seq)
    assert abs(est.residual - est2.residual) < 1e-9
    assert est.classification == est2.classification


def test_contraction_proxy_zero_cases():
    rule = quad_split_rule()
    tower = subdivision_tower(g1_complex(), rule, 3)
    p = pack_level(g1_complex(), rule, 3)
    face = tower[1].faces["in/0"]
    assert contraction_proxy(p, p, tower[3], "in/0", face.walk) == 0.0
    mob = MobiusMap.from_coeffs(1, 1j, 0.1, 1)
    q = apply_mobius(p, mob)
    assert contraction_proxy(p, q, tower[3], "in/0", face.walk) < 1e-9


def test_contraction_decays_along_nested_faces():
    from gasket_forge.markov import contraction_decay, least_squares_slope

    rule = quad_split_rule()
    n = 6
    tower = subdivision_tower(g1_complex(), rule, n)
    p = pack_level(g1_complex(), rule, n)
    chain = edge_chain_faces(tower, rule, "in", ("A", "B"))
    values = contraction_decay(p, tower, rule, chain, period=2)
    assert len(values) >= 3
    assert values[0] > values[-1]
    slope = least_squares_slope(list(range(len(values))),
                                [math.log(v) for v in values])
    assert slope < 0  # geometric-style decay, fitted ratio exp(slope) in (0,1)
