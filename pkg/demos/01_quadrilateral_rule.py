"""Walk through the built-in quadrilateral splitting rule.

The rule cuts one square into two quadrilaterals by a wall through an
interior vertex, re-identifying each half with the square so that the new
vertex plays the lower-right corner.  We validate it, classify it, and grow
the first few subdivision levels of the two sphere gluings.
"""

from gasket_forge.gallery import builtin
from gasket_forge.subdivision import (
    check_standing_assumptions,
    is_acylindrical,
    is_irreducible,
    is_simple,
    iterate_subdivision,
    validate_rule,
)

cat = builtin()

print("== validation ==")
print("well-formed:", validate_rule(cat.rule).ok)
print("simple:", is_simple(cat.rule, 6).status)
print("irreducible:", is_irreducible(cat.rule, 6).status)
acyl = is_acylindrical(cat.rule, 6)
print("acylindrical:", acyl.status, "certified at depth", acyl.depth)

print("\n== the cylindrical twin is rejected ==")
twin = is_acylindrical(cat.cylindrical_rule, 5)
print("verdict:", twin.status)
print("disjoint corner-to-corner path counts by level:", twin.witness[2])

print("\n== standing assumptions ==")
rep = check_standing_assumptions(cat.rule, max_depth=5, spherical=cat.g1)
print("faces stay polygons with induced boundaries:", rep.s1_ok)
print("nested-boundary condition holds at iterate power:", rep.s2_power)

print("\n== growth of the two sphere gluings ==")
for name, cx0 in (("straight gluing", cat.g1), ("quarter-turn gluing", cat.g2)):
    cx = cx0
    counts = []
    for n in range(5):
        counts.append((len(cx.vertices()), len(cx.edge_set()), len(cx.faces)))
        cx = iterate_subdivision(cx, cat.rule, 1)
    print(f"{name}: (V, E, F) by level:", counts)
