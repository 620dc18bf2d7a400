"""Isometries of the Poincare disk and their action on the boundary circle.

Points of S^1 are stored as angles. Isometries are SU(1,1) matrices
``[[u, v], [conj(v), conj(u)]]`` with ``|u|^2 - |v|^2 = 1``; entries may be
python complex numbers or mpmath ``mpc`` values, and every operation keeps
the precision of its inputs.

The upper half-plane appears only through the Cayley map
``C(z) = (z - i) / (z + i)``, which sends 0 -> -1, infinity -> 1, 1 -> -i
and -1 -> i, and sends increasing reals to counterclockwise angles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath

from . import _num
from ._num import PT_EPS, TWO_PI, ccw
from .errors import (
    DegenerateConfiguration,
    GeodesicsCross,
    InvalidAxis,
    OrientationMismatch,
    SharedEndpoint,
)


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """A point e^{i angle} of the unit circle, angle reduced to [0, 2*pi)."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", _num.reduce_angle(float(self.angle)))

    @classmethod
    def from_complex(cls, z: complex) -> "BoundaryPoint":
        return cls(math.atan2(z.imag, z.real))

    @property
    def z(self) -> complex:
        return _num.expj(self.angle)

    def distance(self, other: "BoundaryPoint") -> float:
        return _num.angular_distance(self.angle, other.angle)

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        return self.distance(other) < PT_EPS

    __hash__ = None  # tolerance-based equality is not transitive

    def __repr__(self):
        return f"BoundaryPoint({self.angle!r})"


def as_point(p) -> BoundaryPoint:
    return p if isinstance(p, BoundaryPoint) else BoundaryPoint(p)


@dataclass(frozen=True, eq=False)
class Geodesic:
    """Oriented geodesic of the disk, given by its ideal endpoints."""

    p: BoundaryPoint
    q: BoundaryPoint

    def __post_init__(self):
        object.__setattr__(self, "p", as_point(self.p))
        object.__setattr__(self, "q", as_point(self.q))
        if self.p.distance(self.q) <= PT_EPS:
            raise InvalidAxis(f"geodesic endpoints coincide: {self.p.angle}, {self.q.angle}")

    @classmethod
    def from_angles(cls, p: float, q: float) -> "Geodesic":
        return cls(BoundaryPoint(p), BoundaryPoint(q))

    def reversed(self) -> "Geodesic":
        return Geodesic(self.q, self.p)

    def canonical(self) -> "Geodesic":
        """Unoriented canonical form: endpoints ordered by angle."""
        if self.p.angle <= self.q.angle:
            return self
        return self.reversed()

    @property
    def angles(self) -> tuple[float, float]:
        return self.p.angle, self.q.angle

    def __eq__(self, other):
        if not isinstance(other, Geodesic):
            return NotImplemented
        return self.p == other.p and self.q == other.q

    __hash__ = None

    def __repr__(self):
        return f"Geodesic({self.p.angle!r}, {self.q.angle!r})"


@dataclass(frozen=True)
class MobiusMap:
    """Orientation preserving disk isometry ``z -> (u z + v) / (conj(v) z + conj(u))``."""

    u: complex = 1.0 + 0j
    v: complex = 0j

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1.0 + 0j, 0j)

    @classmethod
    def rotation(cls, theta: float) -> "MobiusMap":
        h = _num.expj(theta / 2)
        return cls(h, 0 * h)

    @classmethod
    def from_matrix(cls, a, b, c, d) -> "MobiusMap":
        """Project a complex 2x2 matrix preserving the disk onto SU(1,1)."""
        det = a * d - b * c
        s = _num.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        u = (a + _num.conj(d)) / 2
        v = (b + _num.conj(c)) / 2
        return cls(u, v)

    @property
    def is_mp(self) -> bool:
        return _num.is_mp(self.u, self.v)

    @property
    def det(self):
        return abs(self.u) ** 2 - abs(self.v) ** 2

    @property
    def trace(self):
        return 2 * self.u.real

    def is_identity(self) -> bool:
        return self.v == 0 and self.u == 1

    def to_mp(self) -> "MobiusMap":
        return MobiusMap(_num.to_mp(self.u), _num.to_mp(self.v))

    def to_float(self) -> "MobiusMap":
        return MobiusMap(complex(self.u), complex(self.v))

    def apply_z(self, z):
        u, v = self.u, self.v
        return (u * z + v) / (_num.conj(v) * z + _num.conj(u))

    def apply_angle(self, theta):
        if self.v == 0 and self.u == 1:
            return theta
        if not isinstance(theta, mpmath.mpf) and self.is_mp:
            theta = mpmath.mpf(theta)  # exact; a double e^{i theta} would lose digits
        return _num.arg(self.apply_z(_num.expj(theta)))

    def __call__(self, p):
        return BoundaryPoint(float(self.apply_angle(as_point(p).angle)))

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self o other."""
        u1, v1, u2, v2 = self.u, self.v, other.u, other.v
        return MobiusMap(u1 * u2 + v1 * _num.conj(v2), u1 * v2 + v1 * _num.conj(u2))

    __matmul__ = compose

    def inverse(self) -> "MobiusMap":
        return MobiusMap(_num.conj(self.u), -self.v)

    def close_to(self, other: "MobiusMap", tol: float = 1e-9) -> bool:
        """Entrywise comparison up to the global sign ambiguity."""
        for s in (1, -1):
            if abs(self.u - s * other.u) <= tol and abs(self.v - s * other.v) <= tol:
                return True
        return False

    def normalized_sign(self) -> "MobiusMap":
        u = complex(self.u)
        if u.real < 0 or (u.real == 0 and u.imag < 0):
            return MobiusMap(-self.u, -self.v)
        return self

    def to_json(self) -> list[float]:
        """Eight floats: re/im of the matrix entries u, v, conj(v), conj(u)."""
        m = self.normalized_sign()
        u, v = complex(m.u), complex(m.v)
        vc, uc = v.conjugate(), u.conjugate()
        return [u.real, u.imag, v.real, v.imag, vc.real, vc.imag, uc.real, uc.imag]

    @classmethod
    def from_json(cls, data: Sequence[float]) -> "MobiusMap":
        if len(data) == 8:
            return cls(complex(data[0], data[1]), complex(data[2], data[3]))
        if len(data) == 4:
            return cls(complex(data[0], data[1]), complex(data[2], data[3]))
        raise ValueError("MobiusMap expects 8 (or 4) floats")


def mobius_apply(M: MobiusMap, p: BoundaryPoint) -> BoundaryPoint:
    return M(p)


def cross_ratio(a, b, c, d) -> float:
    """(c - a)(d - b) / ((d - a)(c - b)) for points of S^1.

    The quotient is real for concircular points; the imaginary residue is
    checked. Counterclockwise corners of a box give a value > 1.
    """
    a, b, c, d = (as_point(x) for x in (a, b, c, d))
    if a.distance(d) < PT_EPS or b.distance(c) < PT_EPS:
        raise DegenerateConfiguration("cross ratio denominator vanishes (a=d or b=c)")
    za, zb, zc, zd = a.z, b.z, c.z, d.z
    q = (zc - za) * (zd - zb) / ((zd - za) * (zc - zb))
    assert abs(q.imag) <= 1e-10 * max(1.0, abs(q)), f"non-real cross ratio {q}"
    return q.real


def _translation_from_fixed(attract, repel, length):
    """Hyperbolic translation with the given attracting/repelling points (complex)."""
    A, R = attract, repel
    e = _num.exp(length / 2)
    ei = 1 / e
    den = A - R
    u = (A * e - R * ei) / den
    v = A * R * (ei - e) / den
    return MobiusMap(u, v)


def hyperbolic_translation(axis: Geodesic, length: float, attracting: str = "q", dps: int | None = None) -> MobiusMap:
    """Translation of length ``length`` along ``axis`` toward the selected endpoint.

    ``attracting`` is ``"q"`` (default) or ``"p"``. With ``dps`` the matrix is
    built in mpmath at that many decimal digits.
    """
    if not isinstance(axis, Geodesic):
        raise InvalidAxis("axis must be a Geodesic")
    if attracting not in ("p", "q"):
        raise ValueError("attracting must be 'p' or 'q'")
    if length < 0:
        raise ValueError("translation length must be nonnegative")
    a_ang, r_ang = (axis.q.angle, axis.p.angle) if attracting == "q" else (axis.p.angle, axis.q.angle)
    if dps is None:
        return _translation_from_fixed(_num.expj(a_ang), _num.expj(r_ang), float(length))
    with mpmath.workdps(dps):
        return _translation_from_fixed(
            mpmath.expj(mpmath.mpf(a_ang)), mpmath.expj(mpmath.mpf(r_ang)), mpmath.mpf(length)
        )


def translation_with_fixed_angles(attract, repel, length) -> MobiusMap:
    """Like hyperbolic_translation, but from raw (possibly mpmath) angles."""
    return _translation_from_fixed(_num.expj(attract), _num.expj(repel), length)


def cyclic_orientation(x, y, z) -> int:
    """+1 if x, y, z are in counterclockwise order, -1 otherwise."""
    return 1 if ccw(x, y) < ccw(x, z) else -1


def _to_zero_one_inf(z1, z2, z3):
    # matrix of w -> (w - z1)(z2 - z3) / ((w - z3)(z2 - z1))
    return (z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))


def _mat_mul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _mat_inv(m):
    a, b, c, d = m
    return (d, -b, -c, a)


def three_point_map(src_angles, dst_angles) -> MobiusMap:
    """Möbius map sending three angles to three angles (float or mpmath)."""
    if len(src_angles) != 3 or len(dst_angles) != 3:
        raise ValueError("need exactly three source and three target points")
    eps = mpmath.mpf(10) ** (5 - mpmath.mp.dps) if _num.is_mp(*src_angles, *dst_angles) else PT_EPS
    for tri in (src_angles, dst_angles):
        for i in range(3):
            if _num.angular_distance(tri[i], tri[(i + 1) % 3]) <= eps:
                raise DegenerateConfiguration("three-point data must be pairwise distinct")
    if cyclic_orientation(*src_angles) != cyclic_orientation(*dst_angles):
        raise OrientationMismatch("source and target triples have opposite cyclic order")
    zs = [_num.expj(t) for t in src_angles]
    ws = [_num.expj(t) for t in dst_angles]
    m = _mat_mul(_mat_inv(_to_zero_one_inf(*ws)), _to_zero_one_inf(*zs))
    return MobiusMap.from_matrix(*m)


def mobius_from_three_pairs(src: Sequence[BoundaryPoint], dst: Sequence[BoundaryPoint]) -> MobiusMap:
    return three_point_map([as_point(p).angle for p in src], [as_point(p).angle for p in dst])


def geodesic_distance(g1: Geodesic, g2: Geodesic) -> float:
    """Hyperbolic distance between two disjoint geodesics.

    After normalizing g1 to the half-plane geodesic (0, inf), g2 has real
    endpoints 0 < u < v and the distance is arccosh((v + u) / (v - u)),
    i.e. 2 artanh(sqrt(u / v)). The ratio u / v is a cross ratio of the
    four endpoints, evaluated here from chord lengths.
    """
    p1, q1 = g1.p.angle, g1.q.angle
    p2, q2 = g2.p.angle, g2.q.angle
    for x in (p1, q1):
        for y in (p2, q2):
            if _num.angular_distance(x, y) < PT_EPS:
                raise SharedEndpoint("geodesics share an ideal endpoint")
    in1 = ccw(p1, p2) < ccw(p1, q1)
    in2 = ccw(p1, q2) < ccw(p1, q1)
    if in1 != in2:
        raise GeodesicsCross("geodesic endpoints interleave")

    def chord(x, y):
        return abs(math.sin(ccw(x, y) / 2))

    rho = chord(p2, p1) * chord(q2, q1) / (chord(p2, q1) * chord(q2, p1))
    if rho > 1:
        rho = 1 / rho
    return 2 * math.atanh(math.sqrt(rho))


def cayley_to_disk(x: float) -> BoundaryPoint:
    """Image of x in R u {inf} under z -> (z - i) / (z + i)."""
    if math.isinf(x):
        return BoundaryPoint(0.0)
    return BoundaryPoint(math.pi + 2 * math.atan(x))


def cayley_angle(x):
    """Cayley image as a raw angle; accepts mpmath reals for extended precision."""
    if isinstance(x, mpmath.mpf):
        if mpmath.isinf(x):
            return mpmath.mpf(0)
        return _num.reduce_angle(mpmath.pi + 2 * mpmath.atan(x))
    return cayley_to_disk(x).angle


def disk_to_cayley(p) -> float:
    """Inverse Cayley map: the boundary point angle theta goes to -cot(theta/2)."""
    theta = as_point(p).angle
    if theta == 0.0:
        return math.inf
    return -1.0 / math.tan(theta / 2)


def hyperbolic_point_distance(z: complex, w: complex) -> float:
    """Distance between two interior points of the disk."""
    return 2 * math.atanh(abs(z - w) / abs(1 - z.conjugate() * w))


def moebius_to_origin(w: complex) -> MobiusMap:
    """Isometry sending 0 to the interior point w (``z -> (z + w) / (1 + conj(w) z)``)."""
    s = 1 / cmath.sqrt(1 - abs(w) ** 2)
    return MobiusMap(s + 0j, w * s)


__all__ = [
    "BoundaryPoint",
    "Geodesic",
    "MobiusMap",
    "TWO_PI",
    "PT_EPS",
    "cross_ratio",
    "mobius_apply",
    "hyperbolic_translation",
    "mobius_from_three_pairs",
    "three_point_map",
    "geodesic_distance",
    "cayley_to_disk",
    "disk_to_cayley",
]
