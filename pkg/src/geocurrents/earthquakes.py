"""Left earthquakes of finite laminations and piecewise-Möbius circle maps.

Maps are evaluated in mpmath: along an earthquake path of total weight W
the images of nearby points can be e^{-W} apart, so each map carries the
number of decimal digits it needs and evaluates inside that context.
"""

from __future__ import annotations

import bisect
import contextlib
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from . import _num
from ._num import PT_EPS, TWO_PI, ccw
from .errors import BaseOnLeaf
from .laminations import FiniteLamination
from .mobius import BoundaryPoint, MobiusMap, as_point, three_point_map, translation_with_fixed_angles

DEFAULT_BASE_REF = math.pi / 2  # Cayley image of -1


def _precision(dps):
    return mpmath.workdps(dps) if dps else contextlib.nullcontext()


def _dedupe_eps(dps):
    return mpmath.mpf(10) ** (8 - dps) if dps else 1e-15


@dataclass(frozen=True, eq=False)
class CircleMap:
    """Orientation preserving circle homeomorphism, Möbius on each arc.

    ``pieces[k]`` acts on the arc from ``breakpoints[k]`` (included) to
    ``breakpoints[k + 1]`` (excluded), cyclically. With no breakpoints there
    is a single piece acting everywhere.
    """

    breakpoints: tuple = ()
    pieces: tuple = (MobiusMap.identity(),)
    dps: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(self.breakpoints))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        n = len(self.breakpoints)
        if (n == 0 and len(self.pieces) != 1) or (n and len(self.pieces) != n):
            raise ValueError("need one piece per breakpoint (or a single piece)")
        if any(b1 <= b0 for b0, b1 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def identity(cls) -> "CircleMap":
        return cls()

    @classmethod
    def from_mobius(cls, M: MobiusMap, dps: int | None = None) -> "CircleMap":
        if M.is_mp and dps is None:
            dps = mpmath.mp.dps
        return cls((), (M,), dps)

    def precision(self):
        """Context manager setting the working precision of this map."""
        return _precision(self.dps)

    def is_identity(self) -> bool:
        return not self.breakpoints and self.pieces[0].is_identity()

    def piece_index(self, theta) -> int:
        n = len(self.breakpoints)
        if n == 0:
            return 0
        return (bisect.bisect_right(self.breakpoints, theta) - 1) % n

    def image_angle(self, theta):
        """Image of an angle; an mpmath value when the map is high precision."""
        if self.is_identity():
            return theta
        with self.precision():
            if self.dps and not isinstance(theta, mpmath.mpf):
                theta = _num.reduce_angle(mpmath.mpf(theta))
            return self.pieces[self.piece_index(theta)].apply_angle(theta)

    apply_angle = image_angle

    def image_point(self, p) -> BoundaryPoint:
        return BoundaryPoint(float(self.image_angle(as_point(p).angle)))

    __call__ = image_point

    def post_compose(self, M: MobiusMap) -> "CircleMap":
        """M o self."""
        with self.precision():
            if self.dps:
                M = M.to_mp()
            return CircleMap(self.breakpoints, tuple(M @ P for P in self.pieces), self.dps)

    def inverse(self) -> "CircleMap":
        if not self.breakpoints:
            with self.precision():
                return CircleMap((), (self.pieces[0].inverse(),), self.dps)
        with self.precision():
            imgs = [self.pieces[k].apply_angle(b) for k, b in enumerate(self.breakpoints)]
            order = sorted(range(len(imgs)), key=lambda k: imgs[k])
            return CircleMap(
                tuple(imgs[k] for k in order), tuple(self.pieces[k].inverse() for k in order), self.dps
            )

    def compose(self, other: "CircleMap") -> "CircleMap":
        """self o other."""
        if self.is_identity():
            return other
        if other.is_identity():
            return self
        dps = max(self.dps or 0, other.dps or 0) or None
        with _precision(dps):
            inv = other.inverse()
            cand = list(other.breakpoints) + [inv.image_angle(b) for b in self.breakpoints]
            cand.sort()
            eps = _dedupe_eps(dps)
            bps = []
            for b in cand:
                if not bps or b - bps[-1] > eps:
                    bps.append(b)
            if len(bps) > 1 and bps[0] + TWO_PI - bps[-1] <= eps:
                bps.pop()
            if not bps:
                return CircleMap((), (self.pieces[0] @ other.pieces[0],), dps)
            two_pi = 2 * mpmath.pi if dps else TWO_PI
            pieces = []
            for k, b in enumerate(bps):
                nxt = bps[k + 1] if k + 1 < len(bps) else bps[0] + two_pi
                mid = _num.reduce_angle((b + nxt) / 2)
                g = other.pieces[other.piece_index(mid)]
                y = g.apply_angle(mid)
                f = self.pieces[self.piece_index(y)]
                pieces.append(f @ g)
            return CircleMap(tuple(bps), tuple(pieces), dps)

    __matmul__ = compose

    def continuity_defect(self) -> float:
        """Largest angular jump between one-sided limits at the breakpoints."""
        n = len(self.breakpoints)
        if n == 0:
            return 0.0
        worst = 0.0
        with self.precision():
            for k, b in enumerate(self.breakpoints):
                left = self.pieces[(k - 1) % n].apply_angle(b)
                right = self.pieces[k].apply_angle(b)
                worst = max(worst, float(_num.angular_distance(left, right)))
        return worst

    def preserves_order(self, angles: Sequence[float]) -> bool:
        """True if the images of the sorted angles wind once counterclockwise.

        Angles closer than PT_EPS to a previous one are dropped first.
        """
        xs = []
        for a in sorted(float(_num.reduce_angle(a)) for a in angles):
            if not xs or a - xs[-1] > PT_EPS:
                xs.append(a)
        if len(xs) > 1 and xs[0] + TWO_PI - xs[-1] <= PT_EPS:
            xs.pop()
        if len(xs) < 3:
            return True
        with self.precision():
            ys = [self.image_angle(x) for x in xs]
            steps = [ccw(ys[k], ys[(k + 1) % len(ys)]) for k in range(len(ys))]
            total = sum(steps)
            two_pi = 2 * mpmath.pi if self.dps else TWO_PI
            return all(s > 0 for s in steps) and abs(total - two_pi) < 1e-9

    def to_json(self) -> list[dict]:
        if not self.breakpoints:
            return [{"breakpoint": None, "map": self.pieces[0].to_json()}]
        return [{"breakpoint": float(b), "map": P.to_json()} for b, P in zip(self.breakpoints, self.pieces)]

    @classmethod
    def from_json(cls, records: list[dict]) -> "CircleMap":
        if len(records) == 1 and records[0]["breakpoint"] is None:
            return cls((), (MobiusMap.from_json(records[0]["map"]),))
        return cls(
            tuple(r["breakpoint"] for r in records), tuple(MobiusMap.from_json(r["map"]) for r in records)
        )

    def __repr__(self):
        return f"CircleMap({len(self.breakpoints)} breakpoints, dps={self.dps})"


# --- earthquakes ---------------------------------------------------------


def _side(p, q, x) -> bool:
    """True if x lies on the counterclockwise arc from p to q."""
    return ccw(p, x) < ccw(p, q)


@dataclass(frozen=True, eq=False)
class EarthquakeMap:
    """Left earthquake of a finite lamination, identity on the gap of ``base_ref``."""

    lamination: FiniteLamination
    base_ref: float
    breakpoints: tuple
    gap_maps: tuple
    translations: tuple
    dps: int

    @property
    def n_gaps(self) -> int:
        return len(self.gap_maps)

    def gap_index(self, theta) -> int:
        n = len(self.breakpoints)
        if n == 0:
            return 0
        return (bisect.bisect_right(self.breakpoints, theta) - 1) % n

    def gap_midpoint(self, k: int) -> float:
        bps = self.breakpoints
        if not bps:
            return self.base_ref
        nxt = bps[k + 1] if k + 1 < len(bps) else bps[0] + TWO_PI
        return _num.reduce_angle((bps[k] + nxt) / 2)

    @property
    def base_gap(self) -> int:
        return self.gap_index(self.base_ref)

    def separating(self, theta) -> list[int]:
        """Indices of leaves separating base_ref from theta, nearest base first."""
        out = []
        for i, lf in enumerate(self.lamination.leaves):
            p, q = lf.endpoints
            if _side(p, q, theta) != _side(p, q, self.base_ref):
                far = ccw(p, q) if _side(p, q, theta) else ccw(q, p)
                out.append((far, i))
        out.sort(key=lambda fi: -fi[0])
        return [i for _, i in out]

    def boundary_map(self) -> CircleMap:
        if not self.breakpoints:
            return CircleMap.identity()
        return CircleMap(self.breakpoints, self.gap_maps, self.dps)

    def image_angle(self, theta):
        return self.boundary_map().image_angle(theta)


def attracting_endpoint(p: float, q: float, base_ref: float) -> tuple[float, float]:
    """(attracting, repelling) endpoints of the left translation along (p, q).

    The attracting endpoint is the one reached second when going
    counterclockwise from base_ref.
    """
    return (q, p) if ccw(base_ref, p) < ccw(base_ref, q) else (p, q)


def build_earthquake(lam: FiniteLamination, base_ref: float = DEFAULT_BASE_REF, dps: int | None = None) -> EarthquakeMap:
    """Left earthquake of ``lam`` normalized to be the identity on the gap of base_ref.

    The gap map is T_1 o ... o T_k over the leaves separating the base gap
    from it, nearest to the base first, so adjacent gap maps differ by the
    translation along the leaf between them.
    """
    base_ref = float(as_point(base_ref).angle)
    for lf in lam.leaves:
        for x in lf.endpoints:
            if _num.angular_distance(x, base_ref) < PT_EPS:
                raise BaseOnLeaf(f"base_ref {base_ref} is a leaf endpoint")
    if dps is None:
        dps = _num.dps_for_weight(lam.total_mass)
    ends = lam.endpoints()
    bps: list[float] = []
    for x in ends:
        if not bps or x - bps[-1] > PT_EPS:
            bps.append(x)
    if len(bps) > 1 and bps[0] + TWO_PI - bps[-1] <= PT_EPS:
        bps.pop()
    with mpmath.workdps(dps):
        trans = []
        for lf in lam.leaves:
            A, R = attracting_endpoint(*lf.endpoints, base_ref)
            trans.append(translation_with_fixed_angles(mpmath.mpf(A), mpmath.mpf(R), mpmath.mpf(lf.weight)))
        E = EarthquakeMap(lam, base_ref, tuple(bps), (), tuple(trans), dps)
        maps = []
        for k in range(len(bps)):
            M = MobiusMap(mpmath.mpc(1), mpmath.mpc(0))
            for i in E.separating(E.gap_midpoint(k)):
                M = M @ trans[i]
            maps.append(M)
    return EarthquakeMap(lam, base_ref, tuple(bps), tuple(maps), tuple(trans), dps)


def earthquake_boundary_map(E: EarthquakeMap) -> CircleMap:
    return E.boundary_map()


def earthquake_path(lam: FiniteLamination, t: float, base_ref: float = DEFAULT_BASE_REF, normalize: bool = False) -> CircleMap:
    """Boundary map of the earthquake of t * lam."""
    h = build_earthquake(lam.scaled(t), base_ref).boundary_map() if lam.leaves else CircleMap.identity()
    return normalize_fix_three(h) if normalize else h


@dataclass
class ComparisonCheck:
    gap_a: int
    gap_b: int
    leaf: int
    fixed_point_error: float
    trace_error: float
    left: bool

    def ok(self, fp_tol: float = 1e-9, trace_tol: float = 1e-10) -> bool:
        return self.fixed_point_error <= fp_tol and self.trace_error <= trace_tol and self.left


def comparison_checks(E: EarthquakeMap) -> list[ComparisonCheck]:
    """Check (map_A)^-1 o map_B for all gap pairs separated by exactly one leaf.

    It must be the translation along that leaf by its weight, with
    attracting endpoint the one reached second counterclockwise from A.
    """
    out = []
    seps = [set(E.separating(E.gap_midpoint(k))) for k in range(E.n_gaps)]
    with mpmath.workdps(E.dps):
        for a in range(E.n_gaps):
            for b in range(E.n_gaps):
                diff = seps[a] ^ seps[b]
                if a == b or len(diff) != 1:
                    continue
                (i,) = diff
                lf = E.lamination.leaves[i]
                C = E.gap_maps[a].inverse() @ E.gap_maps[b]
                p, q = lf.endpoints
                fp = max(float(_num.angular_distance(C.apply_angle(mpmath.mpf(x)), mpmath.mpf(x))) for x in (p, q))
                expect = 2 * mpmath.cosh(mpmath.mpf(lf.weight) / 2)
                tr = abs(C.trace)
                terr = float(abs(tr - expect) / max(1, expect))
                A, _ = attracting_endpoint(p, q, E.gap_midpoint(a))
                z = mpmath.expj(mpmath.mpf(A))
                left = abs(_num.conj(C.v) * z + _num.conj(C.u)) > 1
                out.append(ComparisonCheck(a, b, i, fp, terr, bool(left)))
    return out


def normalize_fix_three(h: CircleMap) -> CircleMap:
    """gamma o h, with the Möbius map gamma chosen so the result fixes 1, i and -1."""
    with h.precision():
        src = [h.image_angle(x) for x in (0.0, math.pi / 2, math.pi)]
        if h.dps:
            dst = [mpmath.mpf(0), mpmath.pi / 2, mpmath.pi]
        else:
            dst = [0.0, math.pi / 2, math.pi]
        gamma = three_point_map(src, dst)
        return h.post_compose(gamma)


def _chord(x, y):
    return 2 * _num.sin(ccw(x, y) / 2)


def qs_constant_estimate(h: CircleMap, n_samples: int = 2000, seed: int = 0, t_range=(1e-6, math.pi / 2)) -> float:
    """Sampled lower bound for the quasisymmetry constant of h.

    Takes the max over samples (x, t) of the ratio of chord lengths
    |h(x+t) - h(x)| / |h(x) - h(x-t)| and its reciprocal. Half the samples
    put x on a breakpoint; t is log-uniform in ``t_range``.
    """
    if h.is_identity():
        return 1.0
    rng = np.random.default_rng(seed)
    U = rng.random((n_samples, 3))
    lo, hi = math.log(t_range[0]), math.log(t_range[1])
    bps = [float(b) for b in h.breakpoints]
    best = 1.0
    with h.precision():
        for u0, u1, u2 in U:
            if bps and u2 < 0.5:
                x = bps[min(int(u0 * len(bps)), len(bps) - 1)]
            else:
                x = TWO_PI * u0
            t = math.exp(lo + u1 * (hi - lo))
            y0 = h.image_angle(_num.reduce_angle(x - t))
            y1 = h.image_angle(x)
            y2 = h.image_angle(_num.reduce_angle(x + t))
            r = _chord(y1, y2) / _chord(y0, y1)
            r = float(r)
            best = max(best, r, 1.0 / r)
    return best


def teich_convergence_gauge(h_n: CircleMap, h: CircleMap, n_samples: int = 2000, seed: int = 0) -> float:
    """qs_constant_estimate(h_n o h^-1) - 1."""
    return qs_constant_estimate(h_n.compose(h.inverse()), n_samples, seed) - 1.0


# --- closed forms used as oracles ----------------------------------------


def corner_leaf_value(m, b=1.0):
    """L(E(Q)) for a = 0, c = inf, d = -1 in the half-plane and leaf (a, c) of weight m."""
    if _num.is_mp(m, b):
        return mpmath.log(mpmath.exp(m) * b + 1)
    return math.log1p(math.exp(m) * b) if m < 700 else m + math.log(b + math.exp(-m))


def corner_leaf_bounds(m: float, D: float, L_Q: float) -> tuple[float, float]:
    return m + math.log(D * D / 4), m + L_Q


# (variable, range of the variable, range of the other endpoint) -> formula
MONOTONE_CASES = (
    ("x", "da", "bc"),
    ("x", "da", "cd"),
    ("x", "ab", "bc"),
    ("x", "ab", "cd"),
    ("y", "bc", "da"),
    ("y", "bc", "ab"),
    ("y", "cd", "da"),
    ("y", "cd", "ab"),
)

MONOTONE_SIGN = {"da": 1, "ab": -1, "bc": 1, "cd": -1}


def monotone_case_closed_form(case, m, a, b, c, d, s):
    """f for a single leaf of weight m in the half-plane normalization of ``case``.

    ``s`` is the finite endpoint of the leaf (x or y); the other one is at
    infinity.
    """
    E, F = math.exp(m), 1 - math.exp(-m)
    log = math.log
    if case == ("x", "da", "bc"):
        x = s
        return log((E * (a - x) + x - c) * (E * (b - x) + x) / ((E * (a - x) + x) * (E * (b - x) + x - c)))
    if case == ("x", "da", "cd"):
        x = s
        return log((c - a) * (b - F * x) / ((c - b) * (a - F * x)))
    if case == ("x", "ab", "bc"):
        x = s
        return log((-c) * (E * (b - x) + x - d) / ((-d) * (E * (b - x) + x - c)))
    if case == ("x", "ab", "cd"):
        x = s
        return log((E * (c - x) + x) * (E * (b - x) + x - d) / ((-d) * E * (c - b)))
    if case == ("y", "bc", "da"):
        y = s
        return log((E * (c - y) + y - a) * (E * (d - y) + y) / ((E * (d - y) + y - a) * (E * (c - y) + y)))
    if case == ("y", "bc", "ab"):
        y = s
        return log((a - c) * (d - F * y) / ((a - d) * (c - F * y)))
    if case == ("y", "cd", "da"):
        y = s
        return log(c * (E * (d - y) + y - b) / ((c - b) * (E * (d - y) + y)))
    if case == ("y", "cd", "ab"):
        y = s
        em = math.exp(-m)
        return log((a - em * c - F * y) * (d - F * y) / ((a - d) * em * c))
    raise ValueError(f"unknown case {case!r}")


# Half-plane numbers for each case: box corners and the range of the moving endpoint.
MONOTONE_CONFIGS = {
    ("x", "da", "bc"): dict(a=1.0, b=3.0, c=-2.0, d=0.0, lo=0.0, hi=1.0),
    ("x", "da", "cd"): dict(a=1.0, b=2.0, c=4.0, d=0.0, lo=0.0, hi=1.0),
    ("x", "ab", "bc"): dict(a=0.0, b=2.0, c=-3.0, d=-1.0, lo=0.0, hi=2.0),
    ("x", "ab", "cd"): dict(a=0.0, b=2.0, c=4.0, d=-1.0, lo=0.0, hi=2.0),
    ("y", "bc", "da"): dict(a=-2.0, b=0.0, c=2.0, d=4.0, lo=0.0, hi=2.0),
    ("y", "bc", "ab"): dict(a=5.0, b=0.0, c=1.0, d=3.0, lo=0.0, hi=1.0),
    ("y", "cd", "da"): dict(a=0.0, b=1.0, c=2.0, d=4.0, lo=2.0, hi=4.0),
    ("y", "cd", "ab"): dict(a=5.0, b=0.0, c=1.0, d=3.0, lo=1.0, hi=3.0),
}
