"""Markov tiles: diameters shrink, boundaries nest, intersections obey the
combinatorial case table.
"""

from gasket_forge.gallery import builtin
from gasket_forge.packing import pack_level
from gasket_forge.subdivision import subdivision_tower
from gasket_forge.tiles import (
    intersection_pattern,
    max_tile_diameter,
    shared_boundary_case,
    tile_contains,
    tiles_at_level,
)

cat = builtin()
tower = subdivision_tower(cat.g1, cat.rule, 4)

print("== max tile diameter per level ==")
tiles_by_level = {}
for n in (1, 2, 3, 4):
    p = pack_level(cat.g1, cat.rule, n)
    tiles_by_level[n] = tiles_at_level(p, tower[n], depth=3)
    print(f"level {n}: {max_tile_diameter(tiles_by_level[n]):.4f} "
          f"({len(tiles_by_level[n])} tiles)")

print("\n== nesting: every level-2 tile sits inside its parent ==")
p2 = pack_level(cat.g1, cat.rule, 2)
parents = {t.face_id: t for t in tiles_at_level(p2, tower[1], depth=4)}
children = tiles_at_level(p2, tower[2], depth=4)
print(all(tile_contains(parents[c.face_id.rsplit("/", 1)[0]], c) for c in children))

print("\n== intersection patterns at level 2 ==")
p = pack_level(cat.g1, cat.rule, 2)
tl = {t.face_id: t for t in tiles_at_level(p, tower[2], depth=5)}
ids = sorted(tl)
for i, a in enumerate(ids):
    for b in ids[i + 1:]:
        case = shared_boundary_case(tower[2].faces[a], tower[2].faces[b])
        v = intersection_pattern(tl[a], tl[b], case, tol=1e-6)
        flag = "ok" if v.matches else "MISMATCH"
        print(f"{a:10s} {b:10s} {case:26s} expected {v.expected:>2s} got {v.count:2d} {flag}")
