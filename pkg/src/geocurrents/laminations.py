"""Finite measured laminations and their box masses.

A finite lamination is a list of pairwise non-crossing geodesics with
positive weights. As a geodesic current it puts an atom of mass ``weight``
on both orientations of each leaf.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ._num import PT_EPS, TWO_PI, ccw, reduce_angle
from .errors import (
    CannotSeparate,
    CrossingFamily,
    CrossingLeaves,
    DuplicateLeaves,
    InvalidBox,
    NonpositiveWeight,
    SharedEndpoint,
)
from .liouville import Arc, Box
from .mobius import Geodesic, geodesic_distance


@dataclass(frozen=True, eq=False)
class Leaf:
    geodesic: Geodesic
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "geodesic", self.geodesic.canonical())
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def endpoints(self) -> tuple[float, float]:
        return self.geodesic.angles

    def __repr__(self):
        p, q = self.endpoints
        return f"Leaf({p!r}, {q!r}, weight={self.weight!r})"


def geodesics_cross(g1: Geodesic, g2: Geodesic) -> bool:
    """True iff the endpoints of g1 and g2 interleave on the circle.

    Geodesics sharing an ideal endpoint do not cross.
    """
    p1, q1 = g1.angles
    p2, q2 = g2.angles
    for x in (p1, q1):
        for y in (p2, q2):
            if min(ccw(x, y), ccw(y, x)) < PT_EPS:
                return False
    span = ccw(p1, q1)
    return (ccw(p1, p2) < span) != (ccw(p1, q2) < span)


@dataclass
class ValidationReport:
    crossing: list[tuple[int, int]] = field(default_factory=list)
    nonpositive: list[int] = field(default_factory=list)
    duplicates: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.crossing or self.nonpositive or self.duplicates)

    def raise_if_bad(self):
        if self.nonpositive:
            raise NonpositiveWeight(f"non-positive weights at leaves {self.nonpositive}")
        if self.duplicates:
            raise DuplicateLeaves(f"repeated leaves {self.duplicates}")
        if self.crossing:
            raise CrossingLeaves(f"crossing leaf pairs {self.crossing}")


def _same_leaf(g1: Geodesic, g2: Geodesic) -> bool:
    return (g1.p == g2.p and g1.q == g2.q) or (g1.p == g2.q and g1.q == g2.p)


def validate_lamination(leaves, raise_on_error: bool = True) -> ValidationReport:
    """Check weights and pairwise non-crossing; raise or return the report."""
    if isinstance(leaves, FiniteLamination):
        leaves = leaves.leaves
    leaves = list(leaves)
    rep = ValidationReport()
    for i, lf in enumerate(leaves):
        if not lf.weight > 0 or not math.isfinite(lf.weight):
            rep.nonpositive.append(i)
    for i in range(len(leaves)):
        for j in range(i + 1, len(leaves)):
            gi, gj = leaves[i].geodesic, leaves[j].geodesic
            if _same_leaf(gi, gj):
                rep.duplicates.append((i, j))
            elif geodesics_cross(gi, gj):
                rep.crossing.append((i, j))
    if raise_on_error:
        rep.raise_if_bad()
    return rep


@dataclass(frozen=True, eq=False)
class FiniteLamination:
    """Finitely many weighted, pairwise non-crossing leaves."""

    leaves: tuple[Leaf, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "leaves", tuple(self.leaves))
        validate_lamination(self.leaves)

    @classmethod
    def from_records(cls, records: Iterable[Sequence[float]]) -> "FiniteLamination":
        """Build from (p, q, weight) triples of angles."""
        return cls(tuple(Leaf(Geodesic.from_angles(p, q), w) for p, q, w in records))

    def to_records(self) -> list[tuple[float, float, float]]:
        return [(*lf.endpoints, lf.weight) for lf in self.leaves]

    @classmethod
    def empty(cls) -> "FiniteLamination":
        return cls(())

    def scaled(self, t: float) -> "FiniteLamination":
        if not t > 0:
            raise ValueError("scale factor must be positive")
        return FiniteLamination(tuple(Leaf(lf.geodesic, t * lf.weight) for lf in self.leaves))

    @property
    def total_mass(self) -> float:
        return math.fsum(lf.weight for lf in self.leaves)

    def endpoints(self) -> list[float]:
        return sorted(x for lf in self.leaves for x in lf.endpoints)

    def __len__(self):
        return len(self.leaves)

    def __iter__(self):
        return iter(self.leaves)

    def __repr__(self):
        return f"FiniteLamination({list(self.leaves)!r})"


def _in_arc(x: float, arc: Arc, include: bool) -> bool:
    return arc.contains(x, closed=include, tol=PT_EPS)


def lamination_box_mass(lam: FiniteLamination, Q: Box, boundary: str = "include") -> float:
    """Total weight of oriented atoms (p, q) with p in [a, b] and q in [c, d].

    With ``boundary="exclude"`` atoms having an endpoint on a corner (within
    the point tolerance) are dropped.
    """
    if boundary not in ("include", "exclude"):
        raise ValueError("boundary must be 'include' or 'exclude'")
    inc = boundary == "include"
    total = []
    for lf in lam.leaves:
        p, q = lf.endpoints
        for x, y in ((p, q), (q, p)):
            if _in_arc(x, Q.first, inc) and _in_arc(y, Q.second, inc):
                total.append(lf.weight)
                break
    return math.fsum(total)


# --- Thurston norm -------------------------------------------------------


def _klein(z):
    return 2 * z / (1 + np.abs(z) ** 2)


def _translate(w, z):
    """Isometry sending 0 to w, applied to z (vectorized)."""
    return (z + w) / (1 + np.conj(w) * z)


def _cross2(ax, ay, bx, by):
    return ax * by - ay * bx


def _segments_cross(p0, p1, q0, q1):
    """Strict crossing of segments p0p1 and q0q1 (complex arrays, broadcast)."""
    d1 = p1 - p0
    d2 = q1 - q0
    o1 = _cross2(d1.real, d1.imag, (q0 - p0).real, (q0 - p0).imag)
    o2 = _cross2(d1.real, d1.imag, (q1 - p0).real, (q1 - p0).imag)
    o3 = _cross2(d2.real, d2.imag, (p0 - q0).real, (p0 - q0).imag)
    o4 = _cross2(d2.real, d2.imag, (p1 - q0).real, (p1 - q0).imag)
    return (o1 * o2 < 0) & (o3 * o4 < 0)


def _leaf_points(p, q, s):
    """Points at signed arclength s from the point of leaf (p, q) nearest 0."""
    half = ccw(p, q) / 2
    mid = p + half
    r = (1 - math.sin(half)) / math.cos(half) if abs(half - math.pi / 2) > 1e-15 else 0.0
    w = r * np.exp(1j * mid)
    along = np.tanh(s / 2) * 1j * np.exp(1j * mid)
    return _translate(w, along)


def sample_unit_arcs(lam: FiniteLamination, n_samples: int, seed: int = 0, spread: float = 4.0):
    """Random geodesic arcs of length 1, each passing through a random leaf.

    Row k of the underlying uniform draw only depends on k, so a longer
    sample list extends a shorter one.
    """
    rng = np.random.default_rng(seed)
    U = rng.random((n_samples, 4))
    k = len(lam.leaves)
    idx = np.minimum((U[:, 0] * k).astype(int), k - 1)
    s = (2 * U[:, 1] - 1) * spread
    phi = TWO_PI * U[:, 2]
    off = U[:, 3]
    x = np.empty(n_samples, dtype=complex)
    for i, lf in enumerate(lam.leaves):
        sel = idx == i
        x[sel] = _leaf_points(*lf.endpoints, s[sel])
    direction = np.exp(1j * phi)
    z0 = _translate(x, np.tanh(-off / 2) * direction)
    z1 = _translate(x, np.tanh((1 - off) / 2) * direction)
    return z0, z1


def arc_masses(lam: FiniteLamination, z0, z1, chunk: int = 4096) -> np.ndarray:
    """Total weight of leaves crossed by each geodesic segment [z0, z1]."""
    k0, k1 = _klein(np.asarray(z0)), _klein(np.asarray(z1))
    P = np.array([np.exp(1j * lf.endpoints[0]) for lf in lam.leaves])
    Qe = np.array([np.exp(1j * lf.endpoints[1]) for lf in lam.leaves])
    W = np.array([lf.weight for lf in lam.leaves])
    out = np.empty(len(k0))
    for start in range(0, len(k0), chunk):
        a, b = k0[start : start + chunk, None], k1[start : start + chunk, None]
        hit = _segments_cross(a, b, P[None, :], Qe[None, :])
        out[start : start + chunk] = hit @ W
    return out


def leaf_distance(l1: Leaf, l2: Leaf) -> float:
    try:
        return geodesic_distance(l1.geodesic, l2.geodesic)
    except SharedEndpoint:
        return 0.0


def thurston_norm_estimate(lam: FiniteLamination, n_samples: int = 20000, seed: int = 0) -> tuple[float, float]:
    """Interval (lower, upper) containing sup over unit arcs J of lam(J).

    The lower bound is the largest mass seen on sampled unit arcs. The upper
    bound uses that all leaves met by one unit arc lie within distance 1 of
    each other, so the mass is at most max_i of the weight of leaves within
    distance 1 of leaf i.
    """
    if not lam.leaves:
        return 0.0, 0.0
    z0, z1 = sample_unit_arcs(lam, n_samples, seed)
    lower = float(arc_masses(lam, z0, z1).max()) if n_samples else 0.0
    leaves = lam.leaves
    upper = 0.0
    for i, li in enumerate(leaves):
        near = [lj.weight for j, lj in enumerate(leaves) if j == i or leaf_distance(li, lj) <= 1.0]
        upper = max(upper, math.fsum(near))
    return lower, upper


# --- continuous families -------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    """A one-parameter family of disjoint geodesics with a piecewise-constant density.

    ``endpoints(s)`` returns the two endpoint angles of the leaf at parameter
    s. ``breaks`` is increasing from s0 to s1 and ``values[k]`` is the
    density on ``[breaks[k], breaks[k+1]]``.
    """

    endpoints: Callable[[float], tuple[float, float]]
    breaks: tuple[float, ...]
    values: tuple[float, ...]
    name: str = "family"

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.breaks) != len(self.values) + 1 or len(self.values) == 0:
            raise ValueError("need len(breaks) == len(values) + 1 >= 2")
        if any(b1 <= b0 for b0, b1 in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise ValueError("density must be nonnegative")

    @classmethod
    def symmetric(cls, s0: float, s1: float, density: float = 1.0) -> "FamilySpec":
        """Nested leaves joining the angles -s and s, for s in [s0, s1]."""
        return cls(_symmetric_endpoints, (s0, s1), (density,), name="symmetric")

    @property
    def s0(self) -> float:
        return self.breaks[0]

    @property
    def s1(self) -> float:
        return self.breaks[-1]

    def cumulative(self) -> list[float]:
        acc = [0.0]
        for (b0, b1), v in zip(zip(self.breaks, self.breaks[1:]), self.values):
            acc.append(acc[-1] + v * (b1 - b0))
        return acc

    @property
    def total_mass(self) -> float:
        return self.cumulative()[-1]

    def density(self, s: float) -> float:
        k = min(max(bisect.bisect_right(self.breaks, s) - 1, 0), len(self.values) - 1)
        return self.values[k]

    def mass_between(self, u: float, v: float) -> float:
        """Integral of the density over [u, v] (clipped to the parameter range)."""
        u, v = max(u, self.s0), min(v, self.s1)
        if v <= u:
            return 0.0
        parts = []
        for (b0, b1), w in zip(zip(self.breaks, self.breaks[1:]), self.values):
            lo, hi = max(b0, u), min(b1, v)
            if hi > lo:
                parts.append(w * (hi - lo))
        return math.fsum(parts)

    def inverse_mass(self, target: float) -> float:
        """Smallest parameter s with mass_between(s0, s) = target."""
        cum = self.cumulative()
        k = bisect.bisect_left(cum, target) - 1
        k = min(max(k, 0), len(self.values) - 1)
        while k < len(self.values) - 1 and self.values[k] == 0:
            k += 1
        if self.values[k] == 0:
            return self.breaks[k]
        return self.breaks[k] + (target - cum[k]) / self.values[k]

    def geodesic(self, s: float) -> Geodesic:
        return Geodesic.from_angles(*self.endpoints(s))


def _symmetric_endpoints(s: float) -> tuple[float, float]:
    return reduce_angle(-s), reduce_angle(s)


def validate_family(spec: FamilySpec, n_pairs: int = 1000, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    S = spec.s0 + (spec.s1 - spec.s0) * rng.random((n_pairs, 2))
    for s, r in S:
        if abs(s - r) < 1e-12:
            continue
        if geodesics_cross(spec.geodesic(s), spec.geodesic(r)):
            raise CrossingFamily(f"family leaves at s={s} and s={r} cross")


def discretize_family(spec: FamilySpec, n: int, validate: bool = True) -> FiniteLamination:
    """n leaves at the mass medians of n equal-mass bins, each carrying mass M / n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if validate:
        validate_family(spec)
    M = spec.total_mass
    if M <= 0:
        raise ValueError("family has zero total mass")
    leaves = [Leaf(spec.geodesic(spec.inverse_mass((k + 0.5) * M / n)), M / n) for k in range(n)]
    return FiniteLamination(tuple(leaves))


def _in_box(Q: Box, p: float, q: float) -> bool:
    f, g = Q.first, Q.second
    return (f.contains(p, tol=0.0) and g.contains(q, tol=0.0)) or (f.contains(q, tol=0.0) and g.contains(p, tol=0.0))


def family_box_mass(spec: FamilySpec, Q: Box, grid: int = 2000) -> float:
    """Integral of the density over parameters whose leaf lies in Q.

    The membership indicator is scanned on a grid and its jumps are located
    by bisection, after which the density is integrated exactly.
    """
    pts = sorted(set(np.linspace(spec.s0, spec.s1, grid + 1).tolist()) | set(spec.breaks))
    ind = [_in_box(Q, *spec.endpoints(s)) for s in pts]
    edges = []
    for k in range(len(pts) - 1):
        if ind[k] != ind[k + 1]:
            lo, hi = pts[k], pts[k + 1]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if mid in (lo, hi):
                    break
                if _in_box(Q, *spec.endpoints(mid)) == ind[k]:
                    lo = mid
                else:
                    hi = mid
            edges.append(0.5 * (lo + hi))
    bounds = [spec.s0] + edges + [spec.s1]
    inside = ind[0]
    parts = []
    for u, v in zip(bounds, bounds[1:]):
        if inside:
            parts.append(spec.mass_between(u, v))
        inside = not inside
    return math.fsum(parts)


# --- generic boxes -------------------------------------------------------


def _shift_corner(x: float, sign: int, endpoints: list[float], max_shift: float, clearance: float) -> float:
    if all(min(ccw(x, e), ccw(e, x)) >= clearance for e in endpoints):
        return x
    # signed offsets of the endpoints along the direction of motion
    offs = [ccw(x, e) if sign > 0 else ccw(e, x) for e in endpoints]
    offs = sorted(o - TWO_PI if o > math.pi else o for o in offs)
    free_lo = 0.0
    for o in [o for o in offs if o > -clearance] + [math.inf]:
        hi = min(o - clearance, max_shift)
        if hi >= free_lo and hi > 0:
            return reduce_angle(x + sign * free_lo)
        free_lo = max(free_lo, o + clearance)
        if free_lo > max_shift:
            break
    raise CannotSeparate(f"cannot move corner {x} clear of leaf endpoints within {max_shift}")


def generic_box(
    Q: Box, lam: FiniteLamination, max_shift: float = 1e-3, direction: str = "shrink", clearance: float = 1e-9
) -> Box:
    """Move corners of Q off the leaf endpoints of lam.

    A corner closer than ``clearance`` to an endpoint moves by the least
    amount (at most ``max_shift``) that puts it ``clearance`` away from all
    endpoints: inward for ``"shrink"``, outward for ``"grow"``. ``"auto"``
    tries inward first, corner by corner. Other corners stay.
    """
    if direction not in ("shrink", "grow", "auto"):
        raise ValueError("direction must be 'shrink', 'grow' or 'auto'")
    ends = [x for lf in lam.leaves for x in lf.endpoints]
    inward = (1, -1, 1, -1)
    tries = {"shrink": (1,), "grow": (-1,), "auto": (1, -1)}[direction]
    options = []
    for x, d in zip(Q.corners, inward):
        opts = []
        for s in tries:
            try:
                opts.append(_shift_corner(x, s * d, ends, max_shift, clearance))
            except CannotSeparate:
                pass
        if not opts:
            raise CannotSeparate(f"cannot move corner {x} clear of leaf endpoints within {max_shift}")
        options.append(opts)
    for corners in itertools.product(*options):
        try:
            return Box.from_angles(*corners)
        except InvalidBox:
            continue
    raise CannotSeparate(f"no valid generic box near {Q}")


def boundary_mass(lam: FiniteLamination, Q: Box, width: float = PT_EPS) -> float:
    """Weight of leaves with an endpoint within ``width`` of a corner of Q."""
    out = []
    for lf in lam.leaves:
        if any(min(ccw(x, c), ccw(c, x)) <= width for x in lf.endpoints for c in Q.corners):
            out.append(lf.weight)
    return math.fsum(out)


def random_lamination(rng: np.random.Generator, n_leaves: int, weight_range=(0.2, 2.0), max_tries: int = 10000):
    """Random finite lamination built by rejecting chords that cross earlier ones."""
    leaves: list[Leaf] = []
    tries = 0
    while len(leaves) < n_leaves and tries < max_tries:
        tries += 1
        p, q = TWO_PI * rng.random(2)
        w = rng.uniform(*weight_range)
        if min(ccw(p, q), ccw(q, p)) < 0.05:
            continue
        g = Geodesic.from_angles(p, q)
        if any(geodesics_cross(g, lf.geodesic) for lf in leaves):
            continue
        if any(min(ccw(x, y), ccw(y, x)) < 1e-6 for lf in leaves for x in lf.endpoints for y in (p, q)):
            continue
        leaves.append(Leaf(g, w))
    return FiniteLamination(tuple(leaves))
