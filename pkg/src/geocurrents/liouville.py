"""Boxes of geodesics and their Liouville measure."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _num
from ._num import PT_EPS, TWO_PI, ccw
from .errors import DegenerateConfiguration, InvalidBox, NoConvergence, NoSolutionInArc
from .mobius import BoundaryPoint, MobiusMap, as_point

LOG2 = math.log(2.0)
MIN_QUAD_SEPARATION = 1e-6


@dataclass(frozen=True, eq=False)
class Arc:
    """Closed counterclockwise arc from ``start`` to ``end``."""

    start: BoundaryPoint
    end: BoundaryPoint

    def __post_init__(self):
        object.__setattr__(self, "start", as_point(self.start))
        object.__setattr__(self, "end", as_point(self.end))
        if self.length <= PT_EPS:
            raise InvalidBox("arc is empty or a full circle")

    @classmethod
    def from_angles(cls, start: float, end: float) -> "Arc":
        return cls(BoundaryPoint(start), BoundaryPoint(end))

    @property
    def length(self) -> float:
        return ccw(self.start.angle, self.end.angle)

    def contains(self, x, closed: bool = True, tol: float = PT_EPS) -> bool:
        """Membership of angle ``x``; ``closed`` decides whether endpoints count."""
        x = as_point(x).angle if isinstance(x, BoundaryPoint) else x
        d = ccw(self.start.angle, x)
        if closed:
            if d <= self.length + tol:
                return True
            return TWO_PI - d <= tol
        return tol < d < self.length - tol

    def midpoint(self) -> float:
        return _num.reduce_angle(self.start.angle + self.length / 2)

    def __repr__(self):
        return f"Arc({self.start.angle!r}, {self.end.angle!r})"


@dataclass(frozen=True, eq=False)
class Box:
    """The box [a, b] x [c, d]: geodesics from the first arc to the second.

    Corners a, b, c, d are in counterclockwise order and the arcs are
    disjoint.
    """

    first: Arc
    second: Arc

    def __post_init__(self):
        a, b, c, d = self.corners
        gap1 = ccw(b, c)
        gap2 = ccw(d, a)
        total = ccw(a, b) + gap1 + ccw(c, d) + gap2
        if gap1 <= PT_EPS or gap2 <= PT_EPS or abs(total - TWO_PI) > 1e-9:
            raise InvalidBox(f"box corners not disjoint/counterclockwise: {self.corners}")

    @classmethod
    def from_angles(cls, a: float, b: float, c: float, d: float) -> "Box":
        return cls(Arc.from_angles(a, b), Arc.from_angles(c, d))

    @property
    def corners(self) -> tuple[float, float, float, float]:
        return self.first.start.angle, self.first.end.angle, self.second.start.angle, self.second.end.angle

    def flipped(self) -> "Box":
        return Box(self.second, self.first)

    def apply(self, M) -> "Box":
        """Image box under a Möbius map or an orientation preserving circle map."""
        return Box.from_angles(*(float(M.apply_angle(x)) for x in self.corners))

    @property
    def separation(self) -> float:
        a, b, c, d = self.corners
        return min(ccw(b, c), ccw(d, a))

    def __repr__(self):
        return "Box(%r, %r, %r, %r)" % self.corners


def log_cross_ratio(a, b, c, d):
    """log of the cross ratio of counterclockwise corners, from sines of half arcs.

    Uses cr - 1 = (b - a)(d - c) / ((d - a)(c - b)), written with chord
    lengths, so thin boxes keep full relative precision. Accepts floats or
    mpmath numbers.
    """
    ab, bc, cd, da = ccw(a, b), ccw(b, c), ccw(c, d), ccw(d, a)
    num = _num.sin(ab / 2) * _num.sin(cd / 2)
    den = _num.sin(da / 2) * _num.sin(bc / 2)
    if den == 0:
        raise DegenerateConfiguration("box arcs touch")
    return _num.log1p(num / den)


def liouville_box(Q: Box) -> float:
    """L(Q) = |log cross_ratio(a, b, c, d)|."""
    return float(log_cross_ratio(*Q.corners))


def _kernel(t, s):
    return 1.0 / (4.0 * np.sin((t - s) / 2.0) ** 2)


def _midpoint_sums(t0, t1, s0, s1, k):
    """Midpoint rule with k x k cells on each rectangle (vectorized over rectangles)."""
    w = (np.arange(k) + 0.5) / k
    ht = (t1 - t0)
    hs = (s1 - s0)
    T = t0[:, None, None] + ht[:, None, None] * w[None, :, None]
    S = s0[:, None, None] + hs[:, None, None] * w[None, None, :]
    vals = _kernel(T, S).sum(axis=(1, 2))
    return vals * ht * hs / (k * k)


def _rect_estimates(rects):
    r0, r1, q0, q1 = rects.T
    m1 = _midpoint_sums(r0, r1, q0, q1, 1)
    m2 = _midpoint_sums(r0, r1, q0, q1, 2)
    m4 = _midpoint_sums(r0, r1, q0, q1, 4)
    rich1 = m2 + (m2 - m1) / 3.0
    rich2 = m4 + (m4 - m2) / 3.0
    return rich2 + (rich2 - rich1) / 15.0, np.abs(rich2 - rich1) / 15.0


def _split(bad):
    """Bisect along the long side of elongated rectangles, quarter the rest."""
    wt = bad[:, 1] - bad[:, 0]
    ws = bad[:, 3] - bad[:, 2]
    tm = (bad[:, 0] + bad[:, 1]) / 2
    sm = (bad[:, 2] + bad[:, 3]) / 2
    long_t = wt > 2 * ws
    long_s = ws > 2 * wt
    sq = ~(long_t | long_s)
    parts = []
    b, m = bad[long_t], tm[long_t]
    parts += [np.stack([b[:, 0], m, b[:, 2], b[:, 3]], axis=1), np.stack([m, b[:, 1], b[:, 2], b[:, 3]], axis=1)]
    b, m = bad[long_s], sm[long_s]
    parts += [np.stack([b[:, 0], b[:, 1], b[:, 2], m], axis=1), np.stack([b[:, 0], b[:, 1], m, b[:, 3]], axis=1)]
    b, t, q = bad[sq], tm[sq], sm[sq]
    parts += [
        np.stack([b[:, 0], t, b[:, 2], q], axis=1),
        np.stack([b[:, 0], t, q, b[:, 3]], axis=1),
        np.stack([t, b[:, 1], b[:, 2], q], axis=1),
        np.stack([t, b[:, 1], q, b[:, 3]], axis=1),
    ]
    return np.concatenate(parts)


def liouville_quad(Q: Box, tol: float = 1e-8, max_evals: int = 1_000_000) -> float:
    """Liouville measure of Q as the integral of dt ds / |e^{it} - e^{is}|^2.

    Adaptive rectangle bisection with global error control. Each rectangle
    gets midpoint sums on 1, 2x2 and 4x4 cells; two Richardson steps give a
    fourth order value, and the usual Richardson bound |R2 - R1| / 15 is the
    local error estimate. While the summed estimate exceeds ``tol``,
    the rectangles carrying
    the largest half of the error are bisected (along the long side when
    elongated, into quarters otherwise). The kernel peaks
    where the two arcs approach, so refinement concentrates there.
    """
    if tol < 1e-10:
        raise ValueError("tol must be >= 1e-10")
    if Q.separation < MIN_QUAD_SEPARATION:
        raise DegenerateConfiguration("arcs closer than the quadrature separation limit; use liouville_box")
    a, b, c, d = Q.corners
    t0, t1 = a, a + ccw(a, b)
    s0 = a + ccw(a, c)
    s1 = s0 + ccw(c, d)

    rects = np.array([[t0, t1, s0, s1]])
    vals, errs = _rect_estimates(rects)
    evals = 21
    while errs.sum() > tol:
        order = np.argsort(-errs, kind="stable")
        cum = np.cumsum(errs[order])
        n_split = int(np.searchsorted(cum, 0.5 * cum[-1])) + 1
        split = np.zeros(len(rects), dtype=bool)
        split[order[:n_split]] = True
        children = _split(rects[split])
        evals += 21 * len(children)
        if evals > max_evals:
            raise NoConvergence(f"quadrature budget of {max_evals} kernel evaluations exhausted")
        cv, ce = _rect_estimates(children)
        rects = np.concatenate([rects[~split], children])
        vals = np.concatenate([vals[~split], cv])
        errs = np.concatenate([errs[~split], ce])
    return math.fsum(vals)


def complementary_box(Q: Box) -> Box:
    """[a, b] x [c, d] -> [b, c] x [d, a]."""
    a, b, c, d = Q.corners
    return Box.from_angles(b, c, d, a)


def solve_fourth_point(a, b, c, target_L: float, arc: Arc) -> BoundaryPoint:
    """The corner d with L([a, b] x [c, d]) = target_L, solved from the cross ratio.

    With K = exp(target_L), (c - a)(d - b) = K (d - a)(c - b) is linear in d.
    """
    if target_L <= 0:
        raise ValueError("target_L must be positive")
    za, zb, zc = (as_point(x).z for x in (a, b, c))
    K = math.exp(target_L)
    num = zb * (zc - za) - K * za * (zc - zb)
    den = (zc - za) - K * (zc - zb)
    if den == 0:
        raise NoSolutionInArc("cross-ratio equation has no finite solution")
    d = BoundaryPoint.from_complex(num / den)
    if not arc.contains(d.angle, closed=True, tol=1e-12):
        raise NoSolutionInArc(f"solution {d.angle} lies outside {arc}")
    got = liouville_box(Box.from_angles(as_point(a).angle, as_point(b).angle, as_point(c).angle, d.angle))
    if abs(got - target_L) > 1e-9 * max(1.0, target_L):
        raise NoSolutionInArc(f"validation failed: L = {got}, wanted {target_L}")
    return d


Q_STAR = Box.from_angles(0.0, math.pi / 2, math.pi, 3 * math.pi / 2)


def random_log2_box(gamma: MobiusMap) -> Box:
    """Isometry image of Q* = [1, i] x [-1, -i]; its Liouville measure is log 2."""
    return Q_STAR.apply(gamma)


def q_x_box(x: float) -> Box:
    """Q_x = [1, i] x [-1, x] for x on the open lower arc from -1 to 1."""
    return Box.from_angles(0.0, math.pi / 2, math.pi, x)


LOWER_ARC = Arc.from_angles(math.pi, TWO_PI - 1e-15)


def regression_boxes() -> list[Box]:
    """Twenty fixed boxes: fat, thin, skewed and near-touching shapes."""
    out = [Q_STAR]
    specs = [
        (0.1, 1.2, 2.5, 4.0),
        (0.0, 1e-3, math.pi, math.pi + 1e-3),
        (1.0, 1.001, 1.5, 1.501),
        (0.3, 2.9, 3.0, 6.0),
        (5.0, 5.5, 0.5, 1.0),
        (2.0, 3.0, 3.001, 4.0),
        (0.2, 0.3, 3.3, 3.4),
        (4.0, 6.0, 0.1, 3.9),
        (1.0, 2.0, 2.01, 2.02),
        (6.0, 0.5, 0.6, 5.9),
        (3.0, 3.2, 3.2001, 3.3),
        (0.0, 3.0, 3.1, 6.2),
        (2.5, 2.6, 5.6, 5.7),
        (1.0, 1.5, 1.5 + 1e-4, 2.0),
        (0.01, 0.02, 0.03, 6.27),
        (4.5, 4.6, 4.7, 4.8),
        (5.9, 6.1, 2.0, 2.2),
        (0.7, 1.7, 2.7, 3.7),
    ]
    out += [Box.from_angles(*s) for s in specs]
    out.append(Box.from_angles(1.0, 2.0, 3.0, 5.0))
    return out
