"""Geodesic currents evaluated on boxes, norms and discrepancies.

A current is represented only through its values on boxes. Three kinds are
supported: Liouville pull-backs by circle maps, finite laminations, and
positive multiples of either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .earthquakes import CircleMap, normalize_fix_three
from .errors import UnsupportedVariant
from .laminations import FiniteLamination, Leaf, lamination_box_mass
from .liouville import Q_STAR, Box, complementary_box, liouville_box, log_cross_ratio
from .mobius import Geodesic, MobiusMap, hyperbolic_translation


class Current:
    """Base class; subclasses implement ``value(Q)``."""

    def value(self, Q: Box) -> float:
        raise NotImplementedError

    def __call__(self, Q: Box) -> float:
        return self.value(Q)

    def scaled(self, s: float) -> "Scaled":
        return Scaled(s, self)


@dataclass(frozen=True, eq=False)
class Pullback(Current):
    """h*L: the Liouville measure of the image box h(Q)."""

    h: CircleMap

    def value(self, Q: Box) -> float:
        if self.h.is_identity():
            return liouville_box(Q)
        with self.h.precision():
            corners = [self.h.image_angle(x) for x in Q.corners]
            return float(log_cross_ratio(*corners))

    def __repr__(self):
        return f"Pullback({self.h!r})"


@dataclass(frozen=True, eq=False)
class LaminationCurrent(Current):
    lamination: FiniteLamination
    boundary: str = "include"

    def value(self, Q: Box) -> float:
        return lamination_box_mass(self.lamination, Q, self.boundary)


@dataclass(frozen=True, eq=False)
class Scaled(Current):
    factor: float
    inner: Current

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError("scale factor must be positive")

    def value(self, Q: Box) -> float:
        return self.factor * self.inner.value(Q)


def liouville_base() -> Pullback:
    return Pullback(CircleMap.identity())


def current_value(alpha: Current, Q: Box) -> float:
    return alpha.value(Q)


@dataclass(frozen=True)
class IsometrySampler:
    """Seeded list of disk isometries.

    Element k is R(theta) followed by a translation of length l along the
    axis (p, q), with l exponential of mean ``scale`` and p, q, theta
    uniform. Element k depends only on the seed and k, so longer samplers
    extend shorter ones. With ``include_identity`` element 0 is the identity.
    """

    seed: int = 0
    count: int = 64
    scale: float = 1.0
    include_identity: bool = True

    def _draws(self) -> np.ndarray:
        return np.random.default_rng(self.seed).random((self.count, 4))

    def maps(self) -> list[MobiusMap]:
        out = []
        for k, (u0, u1, u2, u3) in enumerate(self._draws()):
            if k == 0 and self.include_identity:
                out.append(MobiusMap.identity())
                continue
            length = -self.scale * math.log1p(-u0)
            p, q = 2 * math.pi * u1, 2 * math.pi * u2
            R = MobiusMap.rotation(2 * math.pi * u3)
            if min(abs(p - q), 2 * math.pi - abs(p - q)) < 1e-9 or length == 0:
                out.append(R)
                continue
            out.append(hyperbolic_translation(Geodesic.from_angles(p, q), length) @ R)
        return out

    def __len__(self):
        return self.count

    def extended(self, count: int) -> "IsometrySampler":
        return IsometrySampler(self.seed, count, self.scale, self.include_identity)


def sup_norm_estimate(alpha: Current, sampler: IsometrySampler) -> float:
    """max over the sampler of alpha(gamma Q*); every gamma Q* has L = log 2."""
    return max(alpha.value(Q_STAR.apply(g)) for g in sampler.maps())


def weak_discrepancy(alpha: Current, beta: Current, boxes: Sequence[Box]) -> float:
    return max((abs(alpha.value(Q) - beta.value(Q)) for Q in boxes), default=0.0)


@dataclass
class DiscrepancyReport:
    value: float
    rows: list[tuple[int, int, float, float, float]] = field(default_factory=list)


def discrepancy_rows(alpha: Current, beta: Current, gammas: Sequence[MobiusMap], base_boxes: Sequence[Box]):
    rows = []
    for gi, g in enumerate(gammas):
        for qi, Q in enumerate(base_boxes):
            B = Q.apply(g)
            va, vb = alpha.value(B), beta.value(B)
            rows.append((gi, qi, va, vb, abs(va - vb)))
    return rows


def uniform_discrepancy(
    alpha: Current, beta: Current, sampler: IsometrySampler, base_boxes: Sequence[Box], with_rows: bool = False
):
    """max over sampled gamma and base boxes Q of |alpha(gamma Q) - beta(gamma Q)|.

    With ``with_rows`` a DiscrepancyReport with the CSV rows
    (gamma_index, box_index, value_alpha, value_beta, abs_diff) is returned.
    """
    rows = discrepancy_rows(alpha, beta, sampler.maps(), base_boxes)
    val = max((r[4] for r in rows), default=0.0)
    return DiscrepancyReport(val, rows) if with_rows else val


def bonahon_residual(alpha: Current, Q: Box) -> float:
    """|exp(-alpha(Q)) + exp(-alpha(Q^)) - 1| for the complementary box Q^."""
    return abs(math.exp(-alpha.value(Q)) + math.exp(-alpha.value(complementary_box(Q))) - 1.0)


def mcg_pushforward(g: CircleMap, alpha: Current) -> Pullback:
    """Pull-back by normalize_fix_three(h o g^-1) for alpha = h*L."""
    if not isinstance(alpha, Pullback):
        raise UnsupportedVariant(f"push-forward is only defined for pull-back currents, not {type(alpha).__name__}")
    return Pullback(normalize_fix_three(alpha.h.compose(g.inverse())))


def push_lamination(lam: FiniteLamination, g) -> FiniteLamination:
    """Lamination whose leaves join the g-images of the leaf endpoints of lam."""
    leaves = []
    for lf in lam.leaves:
        p, q = (float(g.apply_angle(x)) for x in lf.endpoints)
        leaves.append(Leaf(Geodesic.from_angles(p, q), lf.weight))
    return FiniteLamination(tuple(leaves))


def default_base_boxes() -> list[Box]:
    """Q* and 24 fixed Möbius images of assorted boxes."""
    shapes = [
        (0.0, math.pi / 2, math.pi, 3 * math.pi / 2),
        (0.3, 1.1, 2.9, 4.4),
        (0.2, 2.4, 3.0, 3.6),
        (1.0, 1.4, 3.5, 5.8),
    ]
    out = [Q_STAR]
    k = 0
    while len(out) < 25:
        shape = shapes[k % len(shapes)]
        length = 0.25 + 0.35 * (k % 5)
        p = 0.7 * k + 0.4
        axis = Geodesic.from_angles(p, p + 2.0 + 0.13 * k)
        g = hyperbolic_translation(axis, length) @ MobiusMap.rotation(0.9 * k)
        out.append(Box.from_angles(*shape).apply(g))
        k += 1
    return out


def random_boxes(n: int, seed: int = 0, min_gap: float = 0.05) -> list[Box]:
    """Random boxes with corners in counterclockwise order and gaps >= min_gap."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        x = np.sort(rng.random(4) * 2 * math.pi)
        gaps = np.diff(np.r_[x, x[0] + 2 * math.pi])
        if gaps.min() < min_gap:
            continue
        r = rng.random() * 2 * math.pi
        out.append(Box.from_angles(*((x + r) % (2 * math.pi))))
    return out

