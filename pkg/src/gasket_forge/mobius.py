"""Inversive geometry on the Riemann sphere.

Generalized circles (circles and lines), Mobius maps, circle reflections,
cross-ratios and the spherical metric.  Everything works in the plane chart
with an explicit point at infinity; lines are first-class generalized
circles, so every circle-valued operation is total.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

INF = complex(math.inf, 0.0)

_DEGENERATE_TOL = 1e-13


class DegenerateInputError(ValueError):
    """Raised when point data is too degenerate to determine a map or value."""


def is_inf(z: complex) -> bool:
    return not (math.isfinite(z.real) and math.isfinite(z.imag))


def sphere_lift(z: complex):
    """Lift a chart point to the unit sphere (0 -> south pole, inf -> north)."""
    if is_inf(z):
        return (0.0, 0.0, 1.0)
    n = abs(z) ** 2
    d = 1.0 + n
    return (2.0 * z.real / d, 2.0 * z.imag / d, (n - 1.0) / d)


def spherical_distance(p: complex, q: complex) -> float:
    """Great-circle distance in [0, pi] between two chart points."""
    a = sphere_lift(p)
    b = sphere_lift(q)
    chord = math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)
    return 2.0 * math.asin(min(1.0, 0.5 * chord))


@dataclass(frozen=True)
class GenCircle:
    """Generalized circle: a proper circle or a line, with a marked disk side.

    For proper circles ``orientation`` is ``"bounded"`` when the disk is the
    interior and ``"unbounded"`` when it is the complement.  For lines the
    disk is the side the unit ``normal`` points into.
    """

    kind: str  # "proper" | "line"
    center: complex = 0j  # proper: center; line: anchor point
    radius: float = 1.0  # proper only
    normal: complex = 1 + 0j  # line only, unit modulus
    orientation: str = "bounded"  # proper only: "bounded" | "unbounded"

    def __post_init__(self):
        if self.kind == "proper":
            if not (self.radius > 0.0):
                raise ValueError("proper circle needs radius > 0")
            if self.orientation not in ("bounded", "unbounded"):
                raise ValueError("orientation must be bounded or unbounded")
        elif self.kind == "line":
            if abs(abs(self.normal) - 1.0) > 1e-12:
                raise ValueError("line normal must have unit modulus")
        else:
            raise ValueError(f"unknown circle kind {self.kind!r}")

    @staticmethod
    def proper(center: complex, radius: float, orientation: str = "bounded") -> "GenCircle":
        return GenCircle(kind="proper", center=complex(center), radius=float(radius),
                         orientation=orientation)

    @staticmethod
    def line(anchor: complex, normal: complex) -> "GenCircle":
        n = complex(normal)
        return GenCircle(kind="line", center=complex(anchor), normal=n / abs(n))

    @property
    def is_line(self) -> bool:
        return self.kind == "line"

    def point_on(self, t: float = 0.0) -> complex:
        """A boundary point; ``t`` is an angle (proper) or a signed offset (line)."""
        if self.is_line:
            return self.center + 1j * self.normal * t
        return self.center + self.radius * cmath.exp(1j * t)

    def disk_contains(self, z: complex, tol: float = 0.0) -> bool:
        """Whether ``z`` lies in the (closed) marked disk."""
        if self.is_line:
            if is_inf(z):
                return True  # lines pass through infinity; boundary counts
            s = ((z - self.center) * self.normal.conjugate()).real
            return s >= -tol
        if is_inf(z):
            return self.orientation == "unbounded"
        d = abs(z - self.center) - self.radius
        return d <= tol if self.orientation == "bounded" else d >= -tol

    def interior_sample(self) -> complex:
        """A point strictly inside the marked disk."""
        if self.is_line:
            return self.center + self.normal
        if self.orientation == "bounded":
            return self.center
        return INF

    def signed_boundary_distance(self, z: complex) -> float:
        """Distance from ``z`` to the boundary circle (chart metric)."""
        if self.is_line:
            return abs(((z - self.center) * self.normal.conjugate()).real)
        return abs(abs(z - self.center) - self.radius)

    def cap(self):
        """Spherical-cap form ``(axis, angular_radius)`` of the marked disk.

        Uses the closed-form plane section of the lifted circle, which stays
        well-conditioned even for near-line circles.
        """
        if self.is_line:
            mx, my = self.normal.real, self.normal.imag
            h = (self.center * self.normal.conjugate()).real
            n = (mx, my, h)
            rhs = h
        else:
            a, b = self.center.real, self.center.imag
            cc = abs(self.center)
            # |c|^2 - r^2 via a difference of moduli, avoiding cancellation
            s = (cc - self.radius) * (cc + self.radius)
            n = (-2.0 * a, -2.0 * b, 1.0 - s)
            rhs = -(1.0 + s)
        nn = math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2)
        if nn == 0.0:
            raise ValueError("degenerate circle")
        axis = (n[0] / nn, n[1] / nn, n[2] / nn)
        cosr = max(-1.0, min(1.0, rhs / nn))
        ang = math.acos(cosr)
        if not self.is_line and self.orientation == "bounded":
            return (-axis[0], -axis[1], -axis[2]), math.pi - ang
        return axis, ang


def cap_mismatch(c1: GenCircle, c2: GenCircle) -> float:
    """Spherical mismatch between two generalized circles (0 for equal disks)."""
    (n1, r1) = c1.cap()
    (n2, r2) = c2.cap()
    chord = math.sqrt((n1[0] - n2[0]) ** 2 + (n1[1] - n2[1]) ** 2 + (n1[2] - n2[2]) ** 2)
    return 2.0 * math.asin(min(1.0, 0.5 * chord)) + abs(r1 - r2)


def cap_overlap(c1: GenCircle, c2: GenCircle) -> float:
    """Signed interior overlap of two marked disks as spherical caps.

    Positive values mean the open disks intersect; tangent disks give 0 and
    separated ones a negative value.
    """
    (n1, r1) = c1.cap()
    (n2, r2) = c2.cap()
    dot = max(-1.0, min(1.0, n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2]))
    return (r1 + r2) - math.acos(dot)


@dataclass(frozen=True)
class MobiusMap:
    """Fractional linear map z -> (az + b)/(cz + d), determinant-normalized."""

    a: complex
    b: complex
    c: complex
    d: complex

    @staticmethod
    def from_coeffs(a: complex, b: complex, c: complex, d: complex) -> "MobiusMap":
        det = a * d - b * c
        if det == 0:
            raise DegenerateInputError("singular coefficient matrix")
        s = cmath.sqrt(det)
        return MobiusMap(a / s, b / s, c / s, d / s)

    @staticmethod
    def identity() -> "MobiusMap":
        return MobiusMap(1 + 0j, 0j, 0j, 1 + 0j)

    def apply(self, z: complex) -> complex:
        if is_inf(z):
            return INF if self.c == 0 else self.a / self.c
        den = self.c * z + self.d
        if abs(den) == 0.0:
            return INF
        return (self.a * z + self.b) / den

    def __call__(self, z: complex) -> complex:
        return self.apply(z)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def pole(self) -> complex:
        """The point sent to infinity."""
        if abs(self.c) == 0.0:
            return INF
        return -self.d / self.c

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self after other."""
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def trace_squared(self) -> complex:
        t = self.a + self.d
        return t * t

    def is_near_identity(self, tol: float) -> bool:
        # Normalized matrices represent the identity iff they are +-I.
        for sign in (1, -1):
            if (abs(self.a - sign) <= tol and abs(self.d - sign) <= tol
                    and abs(self.b) <= tol and abs(self.c) <= tol):
                return True
        return False


def classify(m: MobiusMap, tol: float = 1e-6) -> str:
    """Classify a Mobius map: identity | elliptic | parabolic | loxodromic."""
    if m.is_near_identity(tol):
        return "identity"
    t2 = m.trace_squared()
    if abs(t2 - 4.0) <= tol:
        return "parabolic"
    if abs(t2.imag) <= tol and -tol <= t2.real < 4.0:
        return "elliptic"
    return "loxodromic"


def _to_zero_one_inf(z1: complex, z2: complex, z3: complex) -> MobiusMap:
    if is_inf(z1):
        return MobiusMap.from_coeffs(0j, z2 - z3, 1 + 0j, -z3)
    if is_inf(z2):
        return MobiusMap.from_coeffs(1 + 0j, -z1, 1 + 0j, -z3)
    if is_inf(z3):
        return MobiusMap.from_coeffs(1 + 0j, -z1, 0j, z2 - z1)
    return MobiusMap.from_coeffs(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))


def _pairwise_distinct(pts) -> bool:
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if spherical_distance(pts[i], pts[j]) <= _DEGENERATE_TOL:
                return False
    return True


def mobius_from_triples(z1, z2, z3, w1, w2, w3) -> MobiusMap:
    """The unique Mobius map with z1,z2,z3 -> w1,w2,w3."""
    if not _pairwise_distinct((z1, z2, z3)):
        raise DegenerateInputError("source points must be pairwise distinct")
    if not _pairwise_distinct((w1, w2, w3)):
        raise DegenerateInputError("target points must be pairwise distinct")
    src = _to_zero_one_inf(z1, z2, z3)
    dst = _to_zero_one_inf(w1, w2, w3)
    return dst.inverse().compose(src)


@dataclass(frozen=True)
class Reflection:
    """Anti-Mobius reflection (inversion) fixing a generalized circle."""

    mirror: GenCircle

    def apply(self, z: complex) -> complex:
        m = self.mirror
        if m.is_line:
            if is_inf(z):
                return INF
            t = 1j * m.normal  # unit tangent
            return m.center + t * t * (z - m.center).conjugate()
        if is_inf(z):
            return m.center
        w = z - m.center
        if abs(w) == 0.0:
            return INF
        return m.center + (m.radius * m.radius) / w.conjugate()

    def pole(self) -> complex:
        return INF if self.mirror.is_line else self.mirror.center

    def __call__(self, z: complex) -> complex:
        return self.apply(z)


def _reflection_matrix(mirror: GenCircle):
    """Matrix M with reflection(z) = Mobius(M) applied to conj(z)."""
    if mirror.is_line:
        p = mirror.center
        t = 1j * mirror.normal
        e2 = t * t
        return (e2, p - e2 * p.conjugate(), 0j, 1 + 0j)
    c, r = mirror.center, mirror.radius
    return (c, r * r - abs(c) ** 2, 1 + 0j, -c.conjugate())


def compose_reflections(r1: Reflection, r2: Reflection) -> MobiusMap:
    """The Mobius map r1 after r2."""
    a1, b1, c1, d1 = _reflection_matrix(r1.mirror)
    a2, b2, c2, d2 = (x.conjugate() for x in _reflection_matrix(r2.mirror))
    return MobiusMap.from_coeffs(a1 * a2 + b1 * c2, a1 * b2 + b1 * d2,
                                 c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)


def fixed_points(m: MobiusMap):
    """Both fixed points of a Mobius map (equal for parabolic maps)."""
    if abs(m.c) == 0.0:
        if abs(m.a - m.d) == 0.0:
            return (INF, INF)
        return (m.b / (m.d - m.a), INF)
    disc = cmath.sqrt((m.a + m.d) ** 2 - 4.0)
    z1 = (m.a - m.d + disc) / (2.0 * m.c)
    z2 = (m.a - m.d - disc) / (2.0 * m.c)
    return (z1, z2)


def _circle_through(p: complex, q: complex, r: complex) -> GenCircle:
    """Generalized circle through three distinct points (line if collinear/inf)."""
    pts = [p, q, r]
    inf_pts = [x for x in pts if is_inf(x)]
    if inf_pts:
        fin = [x for x in pts if not is_inf(x)]
        if len(fin) < 2:
            raise DegenerateInputError("need at least two finite points")
        d = fin[1] - fin[0]
        if abs(d) == 0.0:
            raise DegenerateInputError("coincident points")
        t = d / abs(d)
        return GenCircle.line(fin[0], -1j * t)
    # Collinearity test, scale-relative.
    area2 = ((q - p) * (r - p).conjugate()).imag
    scale = max(abs(q - p), abs(r - p), abs(r - q))
    if scale == 0.0:
        raise DegenerateInputError("coincident points")
    if abs(area2) <= 1e-14 * scale * scale:
        t = (q - p) / abs(q - p)
        return GenCircle.line(p, -1j * t)
    # Circumcenter via perpendicular bisector intersection.
    ax, ay = p.real, p.imag
    bx, by = q.real, q.imag
    cx, cy = r.real, r.imag
    dd = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
          + (cx * cx + cy * cy) * (ay - by)) / dd
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
          + (cx * cx + cy * cy) * (bx - ax)) / dd
    center = complex(ux, uy)
    return GenCircle.proper(center, abs(p - center))


def _pole_of(transform) -> complex:
    pole = getattr(transform, "pole", None)
    return pole() if pole is not None else INF


def map_circle(transform, circle: GenCircle) -> GenCircle:
    """Image of a generalized circle, with the disk side transported.

    When the map's pole lies on the circle the image is produced as an exact
    line; otherwise three boundary points are transported.
    """
    pole = _pole_of(transform)
    on_circle = False
    if not is_inf(pole):
        if circle.is_line:
            on_circle = circle.signed_boundary_distance(pole) <= 1e-9 * (1.0 + abs(pole))
        else:
            on_circle = circle.signed_boundary_distance(pole) <= 1e-9 * circle.radius
    if on_circle:
        if circle.is_line:
            t = 1j * circle.normal
            scale = 1.0 + abs(pole - circle.center)
            pts = (pole + scale * t, pole - scale * t, INF)
        else:
            c, r = circle.center, circle.radius
            u = (pole - c) / abs(pole - c)
            pts = (c - r * u, c + 1j * r * u, c - 1j * r * u)
        pts = tuple(transform.apply(p) for p in pts)
        finite = [p for p in pts if not is_inf(p)]
        image = _circle_through(finite[0], finite[1], INF)
    else:
        if circle.is_line:
            t = 1j * circle.normal
            pts = (circle.center, circle.center + t, INF)
        else:
            r = circle.radius
            pts = (circle.center + r, circle.center - r, circle.center + 1j * r)
        image = _circle_through(*(transform.apply(p) for p in pts))
    inside = circle.interior_sample()
    w = transform.apply(inside)
    if image.is_line:
        if is_inf(w):
            # Pick a second interior sample away from the pole.
            if circle.is_line:
                inside = circle.center + 2.5 * circle.normal
            else:
                inside = circle.center + (0.5 * circle.radius if circle.orientation == "bounded"
                                          else 3.0 * circle.radius)
            w = transform.apply(inside)
        s = ((w - image.center) * image.normal.conjugate()).real
        if s < 0:
            return GenCircle.line(image.center, -image.normal)
        return image
    side_in = (not is_inf(w)) and abs(w - image.center) < image.radius
    return GenCircle.proper(image.center, image.radius,
                            "bounded" if side_in else "unbounded")


def cross_ratio(z1: complex, z2: complex, z3: complex, z4: complex) -> complex:
    """(z1-z3)(z2-z4) / ((z1-z4)(z2-z3)) with the usual limits at infinity."""
    pts = (z1, z2, z3, z4)
    distinct = []
    for p in pts:
        if not any(spherical_distance(p, q) <= _DEGENERATE_TOL for q in distinct):
            distinct.append(p)
    if len(distinct) < 3:
        raise DegenerateInputError("need at least three distinct points")
    if is_inf(z1):
        return _div(z2 - z4, z2 - z3)
    if is_inf(z2):
        return _div(z1 - z3, z1 - z4)
    if is_inf(z3):
        return _div(z2 - z4, z1 - z4)
    if is_inf(z4):
        return _div(z1 - z3, z2 - z3)
    return _div((z1 - z3) * (z2 - z4), (z1 - z4) * (z2 - z3))


def _div(num: complex, den: complex) -> complex:
    if abs(den) == 0.0:
        return INF
    return num / den


def tangency_point(c1: GenCircle, c2: GenCircle, tol: float = 1e-7) -> complex:
    """Common point of two tangent generalized circles.

    Works for external and internal tangency and for lines; two parallel
    lines meet at infinity.  Raises if the circles are not tangent within
    ``tol`` relative to their scale.
    """
    if c1.is_line and c2.is_line:
        cross = (c1.normal * c2.normal.conjugate()).imag
        if abs(cross) > tol:
            raise ValueError("lines are not parallel, hence not tangent")
        return INF
    if c1.is_line or c2.is_line:
        line, circ = (c1, c2) if c1.is_line else (c2, c1)
        s = ((circ.center - line.center) * line.normal.conjugate()).real
        gap = abs(abs(s) - circ.radius)
        if gap > tol * max(1.0, circ.radius):
            raise ValueError("line and circle are not tangent")
        return circ.center - line.normal * s / abs(s) * circ.radius if s != 0 else circ.center
    d = abs(c2.center - c1.center)
    if d == 0.0:
        raise ValueError("concentric circles are not tangent")
    u = (c2.center - c1.center) / d
    cand = (c1.center + c1.radius * u, c1.center - c1.radius * u)
    best = min(cand, key=lambda p: abs(abs(p - c2.center) - c2.radius))
    scale = max(c1.radius, c2.radius)
    if abs(abs(best - c2.center) - c2.radius) > tol * max(1.0, scale):
        raise ValueError("circles are not tangent")
    return best
