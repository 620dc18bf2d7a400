import math

import numpy as np
import pytest

from geocurrents.errors import CannotSeparate, CrossingFamily, CrossingLeaves, DuplicateLeaves, NonpositiveWeight
from geocurrents.laminations import (
    FamilySpec,
    FiniteLamination,
    Leaf,
    boundary_mass,
    discretize_family,
    family_box_mass,
    generic_box,
    geodesics_cross,
    lamination_box_mass,
    random_lamination,
    thurston_norm_estimate,
    validate_family,
    validate_lamination,
)
from geocurrents.liouville import Box
from geocurrents.mobius import Geodesic

TP = 2 * math.pi


def test_crossing_detection():
    assert geodesics_cross(Geodesic.from_angles(0, 2), Geodesic.from_angles(1, 3))
    assert not geodesics_cross(Geodesic.from_angles(0, 2), Geodesic.from_angles(3, 5))
    # a shared endpoint is not a crossing
    assert not geodesics_cross(Geodesic.from_angles(0, 2), Geodesic.from_angles(2, 4))


def test_validation_errors():
    with pytest.raises(CrossingLeaves):
        FiniteLamination.from_records([(0, 2, 1), (1, 3, 1)])
    with pytest.raises(NonpositiveWeight):
        FiniteLamination.from_records([(0, 2, 0.0)])
    with pytest.raises(DuplicateLeaves):
        FiniteLamination.from_records([(0, 2, 1), (2, 0, 1)])
    rep = validate_lamination([Leaf(Geodesic.from_angles(0, 2), 1), Leaf(Geodesic.from_angles(1, 3), 1)], raise_on_error=False)
    assert not rep.ok and rep.crossing == [(0, 1)]


def test_records_round_trip_and_scaling():
    lam = FiniteLamination.from_records([(0.1, 2.0, 1.5), (3.0, 4.0, 0.5)])
    assert FiniteLamination.from_records(lam.to_records()).to_records() == lam.to_records()
    assert lam.scaled(2).total_mass == pytest.approx(4.0)
    with pytest.raises(ValueError):
        lam.scaled(0)


def test_box_mass_boundary_policy():
    lam = FiniteLamination.from_records([(0.5, 3.0, 1.0), (1.0, 2.8, 2.0)])
    Q = Box.from_angles(0.0, 0.9, 2.5, 3.5)
    assert lamination_box_mass(lam, Q) == pytest.approx(1.0)
    # the second leaf runs corner to corner
    Q2 = Box.from_angles(0.0, 1.0, 2.8, 4.0)
    assert lamination_box_mass(lam, Q2, "include") == pytest.approx(3.0)
    assert lamination_box_mass(lam, Q2, "exclude") == pytest.approx(1.0)
    # orientation does not matter for unoriented leaves
    assert lamination_box_mass(lam, Q.flipped()) == pytest.approx(1.0)


def test_thurston_norm_single_leaf():
    lam = FiniteLamination.from_records([(0.0, math.pi, 1.5)])
    lo, hi = thurston_norm_estimate(lam, 2000)
    assert lo == pytest.approx(1.5) and hi == pytest.approx(1.5)


def test_thurston_norm_close_leaves_add():
    # distance between the two leaves is well below 1
    lam = FiniteLamination.from_records([(0.0, math.pi, 1.0), (0.3, math.pi - 0.3, 2.0)])
    lo, hi = thurston_norm_estimate(lam, 5000)
    assert lo == pytest.approx(3.0) and hi == pytest.approx(3.0)


def test_family_discretization():
    spec = FamilySpec.symmetric(0.1, 1.0)
    lam = discretize_family(spec, 2)
    assert sorted(lf.endpoints[0] for lf in lam.leaves) == pytest.approx([0.325, 0.775], abs=1e-12)
    assert [lf.weight for lf in lam.leaves] == pytest.approx([0.45, 0.45])
    one = discretize_family(spec, 1)
    assert len(one) == 1 and one.total_mass == pytest.approx(0.9)


def test_family_box_mass_window():
    spec = FamilySpec.symmetric(0.1, 1.0)
    Q = Box.from_angles(0.3, 0.8, TP - 0.8, TP - 0.3)
    assert family_box_mass(spec, Q) == pytest.approx(0.5, abs=1e-12)


def test_crossing_family_rejected():
    spec = FamilySpec(lambda s: (s, s + 2.0), (0.0, 2.0), (1.0,))
    with pytest.raises(CrossingFamily):
        validate_family(spec)


def test_generic_box_moves_corner():
    lam = FiniteLamination.from_records([(0.5, 3.0, 1.0)])
    Q = Box.from_angles(0.5, 1.0, 2.5, 3.5)
    assert boundary_mass(lam, Q) == pytest.approx(1.0)
    G = generic_box(Q, lam)
    assert boundary_mass(lam, G, 1e-10) == 0.0
    assert max(abs(x - y) for x, y in zip(G.corners, Q.corners)) <= 1e-3
    assert G.corners[0] > 0.5  # shrink moves a inward


def test_generic_box_cannot_separate():
    ends = [(0.5 + k * 1e-4, 3.0 - k * 1e-4, 1.0) for k in range(30)]
    lam = FiniteLamination.from_records(ends)
    with pytest.raises(CannotSeparate):
        generic_box(Box.from_angles(0.501, 1.0, 2.5, 3.5), lam, max_shift=1e-3, clearance=1e-4, direction="shrink")


def test_random_lamination_valid():
    rng = np.random.default_rng(3)
    lam = random_lamination(rng, 8)
    assert len(lam) == 8
    assert validate_lamination(lam.leaves, raise_on_error=False).ok
