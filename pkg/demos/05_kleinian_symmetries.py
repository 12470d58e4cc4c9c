"""Fit the Mobius symmetries of the quarter-turn gluing and run its orbit.

The quarter-turn sphere packing carries two graph symmetries that extend a
one-quadrilateral germ; their fitted Mobius maps generate a group whose
orbit retraces the packing itself.  Deeper packings fit the generators
better.
"""

from gasket_forge.gallery import builtin, extend_symmetry, fit_group_symmetries, \
    group_limit_orbit
from gasket_forge.packing import pack_level
from gasket_forge.subdivision import subdivision_tower

cat = builtin()

print("== the two symmetry germs extend uniquely over the truncation ==")
tower = subdivision_tower(cat.g2, cat.rule, 4)
for seed in cat.symmetry_seeds:
    sym = extend_symmetry(tower, cat.rule, seed)
    mu = sym.vertex_map
    lvl1 = {k: mu[k] for k in ("A", "B", "C", "D", "in.c", "out.c")}
    print(f"{seed.name}: {len(mu)} vertices mapped; on level one: {lvl1}")

print("\n== fit quality by packing depth ==")
for n in (3, 4, 5):
    tower = subdivision_tower(cat.g2, cat.rule, n)
    p = pack_level(cat.g2, cat.rule, n)
    fits = fit_group_symmetries(p, tower, cat.rule, cat)
    row = "  ".join(f"{f.name}: {f.residual:.4f} ({f.classification})" for f in fits)
    print(f"level {n}: {row}")

print("\n== reduced-word orbit against the level-5 packing ==")
tower = subdivision_tower(cat.g2, cat.rule, 5)
p = pack_level(cat.g2, cat.rule, 5)
fits = fit_group_symmetries(p, tower, cat.rule, cat)
orbit = group_limit_orbit(fits, p, ["A", "B", "C", "D", "in.c", "out.c"], 2)
print(f"orbit circles: {len(orbit.circles)}; combinatorially matched: {orbit.matched}")
print(f"max mismatch over matched circles: {orbit.max_matched_mismatch:.4f}")
