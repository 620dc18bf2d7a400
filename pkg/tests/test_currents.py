import math

import pytest

from geocurrents.currents import (
    IsometrySampler,
    LaminationCurrent,
    Pullback,
    Scaled,
    bonahon_residual,
    default_base_boxes,
    liouville_base,
    mcg_pushforward,
    push_lamination,
    random_boxes,
    sup_norm_estimate,
    uniform_discrepancy,
)
from geocurrents.earthquakes import CircleMap, build_earthquake
from geocurrents.errors import UnsupportedVariant
from geocurrents.laminations import FiniteLamination, lamination_box_mass
from geocurrents.liouville import LOG2, Q_STAR, Box, liouville_box
from geocurrents.mobius import Geodesic, MobiusMap, hyperbolic_translation


@pytest.fixture
def quake():
    lam = FiniteLamination.from_records([(0.3, 2.0, 0.8), (3.0, 5.0, 0.6)])
    return build_earthquake(lam, 2.5).boundary_map()


def test_liouville_base_matches_closed_form():
    Q = Box.from_angles(0.2, 1.0, 2.0, 4.0)
    assert liouville_base().value(Q) == liouville_box(Q)


def test_scaled_and_lamination_currents():
    lam = FiniteLamination.from_records([(0.5, 3.0, 2.0)])
    Q = Box.from_angles(0.0, 1.0, 2.5, 3.5)
    alpha = LaminationCurrent(lam)
    assert alpha(Q) == pytest.approx(2.0)
    assert alpha.scaled(0.25)(Q) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        Scaled(0.0, alpha)


def test_sampler_is_deterministic_and_extends():
    a = IsometrySampler(5, 10).maps()
    b = IsometrySampler(5, 20).maps()
    assert a[0].is_identity()
    for g, h in zip(a, b):
        assert g.close_to(h, 0.0)
    assert not IsometrySampler(6, 10).maps()[3].close_to(a[3])


def test_sup_norm_of_liouville_is_log2():
    est = sup_norm_estimate(liouville_base(), IsometrySampler(1, 128))
    assert est == pytest.approx(LOG2, abs=1e-9)


def test_bonahon_residual(quake):
    for Q in random_boxes(20, seed=2):
        assert bonahon_residual(liouville_base(), Q) < 1e-12
        assert bonahon_residual(Pullback(quake), Q) < 1e-9
    lam = FiniteLamination.from_records([(0.2, 3.0, 3.0)])
    assert bonahon_residual(LaminationCurrent(lam), Box.from_angles(0.0, 1.0, 2.5, 3.5)) == pytest.approx(math.exp(-3.0))


def test_pullback_by_mobius_is_liouville():
    g = hyperbolic_translation(Geodesic.from_angles(0.4, 2.5), 1.3)
    alpha = Pullback(CircleMap.from_mobius(g))
    for Q in default_base_boxes()[:5]:
        assert alpha.value(Q) == pytest.approx(liouville_box(Q), rel=1e-10)


def test_uniform_discrepancy_rows():
    rep = uniform_discrepancy(liouville_base(), Scaled(2.0, liouville_base()), IsometrySampler(0, 4), [Q_STAR], with_rows=True)
    assert len(rep.rows) == 4
    assert rep.value == pytest.approx(LOG2, abs=1e-9)


def test_mcg_pushforward(quake):
    with pytest.raises(UnsupportedVariant):
        mcg_pushforward(quake, LaminationCurrent(FiniteLamination.empty()))
    g = CircleMap.from_mobius(hyperbolic_translation(Geodesic.from_angles(1.0, 4.0), 0.5) @ MobiusMap.rotation(0.3))
    pushed = mcg_pushforward(g, Pullback(quake))
    ginv = g.inverse()
    for Q in default_base_boxes()[:6]:
        assert pushed.value(Q) == pytest.approx(Pullback(quake).value(Q.apply(ginv)), abs=1e-10)


def test_push_lamination(quake):
    lam = FiniteLamination.from_records([(0.5, 1.5, 1.0)])
    pushed = push_lamination(lam, quake)
    Q = Box.from_angles(0.4, 0.6, 1.4, 1.6)
    assert lamination_box_mass(pushed, Q.apply(quake)) == pytest.approx(1.0)
