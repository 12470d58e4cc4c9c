"""Six sub-packings, one combinatorial type, two geometries.

Both sphere gluings decompose into halves whose tangency graphs are all
isomorphic to the one-square subdivision graph, yet the straight-gluing
halves and the quarter-turn halves are not Mobius-equivalent: their
tangency cross-ratio tables differ.  This is the computable shadow of
"locally equivalent, globally different".
"""

from gasket_forge.gallery import builtin, local_equivalence_demo, qr_symmetry_demo
from gasket_forge.markov import induce_vertex_markov
from gasket_forge.packing import pack_level
from gasket_forge.subdivision import build_homomorphism, subdivision_tower

cat = builtin()
n = 3
t1 = subdivision_tower(cat.g1, cat.rule, n)
t2 = subdivision_tower(cat.g2, cat.rule, n)
p1 = pack_level(cat.g1, cat.rule, n)
p2 = pack_level(cat.g2, cat.rule, n)

demo = local_equivalence_demo(p1, p2, t1, t2, cat.rule, n)
print("== sub-packings (all isomorphic to the one-square graph) ==")
for name, sub in sorted(demo.subpackings.items()):
    print(f"{name:5s}: {len(sub.vertices)} circles, {len(sub.edges)} tangencies")

print("\n== cross-ratio divergence ==")
for key in sorted(demo.cross_ratios["g1+"]):
    a = demo.cross_ratios["g1+"][key]
    b = demo.cross_ratios["g2+"].get(key)
    if b is not None:
        print(f"{key:12s} straight {a.real:+.6f}  quarter-turn {b.real:+.6f}  "
              f"|diff| {abs(a - b):.6f}")
print(f"max difference: {demo.max_cr_difference:.6f} (>1e-3: not Mobius-equivalent)")

print("\n== degree-2 branched cover over one half ==")
tower = subdivision_tower(cat.g1, cat.rule, 4)
hom = build_homomorphism(cat.vertex_dynamics, tower[1], tower[0])
vm = induce_vertex_markov(hom, tower)
rep = qr_symmetry_demo(vm, 2)
print(f"face fibers: {sorted(set(rep.face_fibers.values()))} "
      f"(two preimage faces over every face)")
print(f"branch vertices: {rep.branch_vertices} (single preimage: the critical corner)")
print(f"commutes with the squared dynamics: {rep.commutes}")
