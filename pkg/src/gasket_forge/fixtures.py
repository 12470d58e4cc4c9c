"""Small closed-form test complexes: tetrahedron and octahedron spheres."""

from __future__ import annotations

from .subdivision import Face, PlanarComplex


def k4_complex() -> PlanarComplex:
    """Tetrahedron: the tangency graph of four mutually tangent circles."""
    faces = [
        Face(id="f1", type=None, walk=("w", "b", "p"), corr=None, level=0),
        Face(id="f2", type=None, walk=("b", "w", "q"), corr=None, level=0),
        Face(id="f3", type=None, walk=("p", "b", "q"), corr=None, level=0),
        Face(id="f4", type=None, walk=("w", "p", "q"), corr=None, level=0),
    ]
    return PlanarComplex(faces, level=0, external=None)


def octahedron_complex() -> PlanarComplex:
    """Octahedron: two poles over a 4-cycle equator."""
    eq = [f"e{i}" for i in range(4)]
    faces = []
    for i in range(4):
        a, b = eq[i], eq[(i + 1) % 4]
        faces.append(Face(id=f"n{i}", type=None, walk=("n", a, b), corr=None, level=0))
        faces.append(Face(id=f"s{i}", type=None, walk=("s", b, a), corr=None, level=0))
    return PlanarComplex(faces, level=0, external=None)


def degree_two_complex() -> PlanarComplex:
    """Invalid input: a vertex of degree 2 (two triangles glued along two edges)."""
    faces = [
        Face(id="f1", type=None, walk=("a", "b", "c"), corr=None, level=0),
        Face(id="f2", type=None, walk=("c", "b", "a"), corr=None, level=0),
    ]
    return PlanarComplex(faces, level=0, external=None)
