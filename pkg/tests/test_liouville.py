import math

import pytest

from geocurrents.errors import InvalidBox, NoSolutionInArc
from geocurrents.liouville import (
    LOG2,
    Q_STAR,
    Arc,
    Box,
    complementary_box,
    liouville_box,
    liouville_quad,
    q_x_box,
    regression_boxes,
    solve_fourth_point,
)
from geocurrents.mobius import Geodesic, cayley_angle, hyperbolic_translation


def test_q_star_is_log2():
    assert abs(liouville_box(Q_STAR) - LOG2) < 1e-15


def test_box_validation():
    with pytest.raises(InvalidBox):
        Box.from_angles(0.0, 2.0, 1.0, 3.0)
    with pytest.raises(InvalidBox):
        Arc.from_angles(1.0, 1.0)


def test_flip_and_invariance():
    Q = Box.from_angles(0.3, 1.1, 2.9, 4.4)
    assert liouville_box(Q.flipped()) == pytest.approx(liouville_box(Q), rel=1e-14)
    g = hyperbolic_translation(Geodesic.from_angles(1.0, 4.0), 2.0)
    assert liouville_box(Q.apply(g)) == pytest.approx(liouville_box(Q), rel=1e-11)


def test_half_plane_value():
    # [0, 1] x [inf, -1] in the half-plane has cross ratio 2
    Q = Box.from_angles(*(cayley_angle(x) for x in (0.0, 1.0, math.inf, -1.0)))
    assert liouville_box(Q) == pytest.approx(LOG2, abs=1e-14)


def test_complementary_identity():
    Q = Box.from_angles(0.2, 1.0, 3.0, 5.0)
    s = math.exp(-liouville_box(Q)) + math.exp(-liouville_box(complementary_box(Q)))
    assert s == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("Q", regression_boxes()[:6])
def test_quadrature_matches_closed_form(Q):
    assert abs(liouville_quad(Q) - liouville_box(Q)) < 1e-8


def test_solve_fourth_point():
    a, b, c, d = 0.1, 1.0, 2.5, 4.0
    L = liouville_box(Box.from_angles(a, b, c, d))
    got = solve_fourth_point(a, b, c, L, Arc.from_angles(c, a))
    assert got.angle == pytest.approx(d, abs=1e-12)


def test_solve_fourth_point_outside_arc():
    with pytest.raises(NoSolutionInArc):
        solve_fourth_point(0.1, 1.0, 2.5, liouville_box(Box.from_angles(0.1, 1.0, 2.5, 4.0)), Arc.from_angles(4.5, 5.0))
    with pytest.raises(ValueError):
        solve_fourth_point(0.1, 1.0, 2.5, -1.0, Arc.from_angles(2.5, 0.1))


def test_q_x_box_monotone():
    vals = [liouville_box(q_x_box(x)) for x in (3.5, 4.0, 5.0, 6.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
