"""Measure the parabolic multiplicity-2 asymptotics on the invariant circle.

The square of the vertex dynamics fixes the corner A and the tangency with
B.  The nested tangency points marching into that cusp behave like the
exact model a_n = 1/n: distances decay like 1/n and successive gaps like
1/n^2.  We fit both exponents from a packing whose cusp chain is refined
one hundred dynamical steps deep.
"""

from gasket_forge.gallery import builtin
from gasket_forge.markov import (
    build_chain_refined_packing,
    model_asymptotics,
    parabolic_asymptotics,
)

cat = builtin()

print("== exact model a_n = 1/n (validates the fitting code) ==")
rep = model_asymptotics(100)
print(f"s_d = {rep.s_d:+.12f}  (exact -1)")
print(f"s_g = {rep.s_g:+.12f}  (exact -2)")

print("\n== measured on the packed cusp chain ==")
crp = build_chain_refined_packing(cat.g1, cat.rule, base_level=8,
                                  start_face="in", edge=cat.parabolic_edge,
                                  steps=60, step_levels=2)
rep = parabolic_asymptotics(crp, count=50)
print(f"packing converged: {crp.packing.converged}")
print("first distances:", [round(d, 4) for d in rep.distances[:8]])
print(f"s_d = {rep.s_d:+.4f}   s_g = {rep.s_g:+.4f}")
print("expected near -1 and -2: the cusp is parabolic with multiplicity 2")
