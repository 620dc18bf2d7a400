import math

import numpy as np
import pytest

from geocurrents.currents import Pullback
from geocurrents.earthquakes import (
    MONOTONE_CASES,
    MONOTONE_CONFIGS,
    CircleMap,
    attracting_endpoint,
    build_earthquake,
    comparison_checks,
    earthquake_path,
    corner_leaf_value,
    normalize_fix_three,
    qs_constant_estimate,
)
from geocurrents.errors import BaseOnLeaf
from geocurrents.earthquakes import monotone_case_closed_form
from geocurrents.experiments import _random_base, monotone_case_value
from geocurrents.laminations import FiniteLamination, random_lamination
from geocurrents.liouville import Box, liouville_box
from geocurrents.mobius import Geodesic, MobiusMap, cayley_angle, hyperbolic_translation

TP = 2 * math.pi


def ang_err(x, y):
    d = (float(x) - float(y)) % TP
    return min(d, TP - d)


@pytest.fixture
def lam3():
    return FiniteLamination.from_records([(0.3, 2.0, 0.8), (0.5, 1.7, 1.1), (3.0, 5.0, 0.6)])


def test_empty_lamination_is_identity():
    h = earthquake_path(FiniteLamination.empty(), 5.0)
    assert h.is_identity()
    assert h.image_angle(1.234) == 1.234


def test_identity_on_base_gap(lam3):
    E = build_earthquake(lam3, base_ref=4.0)
    for x in (3.2, 4.0, 4.9):
        assert ang_err(E.image_angle(x), x) < 1e-15


def test_base_on_leaf_rejected(lam3):
    with pytest.raises(BaseOnLeaf):
        build_earthquake(lam3, base_ref=2.0)


def test_attracting_endpoint():
    assert attracting_endpoint(1.0, 3.0, 0.0) == (3.0, 1.0)
    assert attracting_endpoint(1.0, 3.0, 2.0) == (1.0, 3.0)


@pytest.mark.parametrize("m", [0.25, 1.0, 4.0, 30.0])
def test_single_leaf_closed_form(m):
    lam = FiniteLamination.from_records([(cayley_angle(0.0), cayley_angle(math.inf), m)])
    Q = Box.from_angles(*(cayley_angle(x) for x in (0.0, 1.0, math.inf, -1.0)))
    val = Pullback(build_earthquake(lam, cayley_angle(-2.0)).boundary_map()).value(Q)
    assert val == pytest.approx(float(corner_leaf_value(m)), abs=1e-10)


def test_value_independent_of_base(lam3):
    Q = Box.from_angles(0.1, 1.0, 2.5, 4.5)
    v = [Pullback(build_earthquake(lam3, b).boundary_map()).value(Q) for b in (0.1, 1.0, 2.5, 4.0)]
    assert max(v) - min(v) < 1e-12


def test_comparison_maps(lam3):
    checks = comparison_checks(build_earthquake(lam3, 4.0))
    assert checks and all(c.ok() for c in checks)


def test_continuity_and_order():
    rng = np.random.default_rng(11)
    for _ in range(5):
        lam = random_lamination(rng, 6)
        h = build_earthquake(lam, _random_base(rng, lam)).boundary_map()
        assert h.continuity_defect() < 1e-10
        assert h.preserves_order(list(np.linspace(0, TP, 300, endpoint=False)))


def test_large_weight_keeps_continuity():
    lam = FiniteLamination.from_records([(0.3, 2.0, 64.0), (0.5, 1.7, 40.0)])
    h = build_earthquake(lam, 4.0).boundary_map()
    assert h.dps > 30
    assert h.continuity_defect() < 1e-10


def test_inverse_and_compose(lam3):
    h = build_earthquake(lam3, 4.0).boundary_map()
    hi = h.inverse()
    for x in np.linspace(0.05, 6.2, 40):
        assert ang_err(hi.image_angle(h.image_angle(x)), x) < 1e-12
    ident = h.compose(hi)
    for x in np.linspace(0.05, 6.2, 40):
        assert ang_err(ident.image_angle(x), x) < 1e-12


def test_normalize_fixes_three_points(lam3):
    h = normalize_fix_three(build_earthquake(lam3, 4.0).boundary_map())
    for x in (0.0, math.pi / 2, math.pi):
        assert ang_err(h.image_angle(x), x) < 1e-12


def test_from_mobius_and_json():
    g = hyperbolic_translation(Geodesic.from_angles(0.3, 2.0), 0.9) @ MobiusMap.rotation(1.0)
    h = CircleMap.from_mobius(g)
    assert ang_err(h.image_angle(2.2), g.apply_angle(2.2)) < 1e-15
    h2 = CircleMap.from_json(h.to_json())
    assert ang_err(h2.image_angle(2.2), h.image_angle(2.2)) < 1e-12


def test_qs_constant():
    assert qs_constant_estimate(CircleMap.identity()) == 1.0
    lam = FiniteLamination.from_records([(0.3, 2.0, 1.5)])
    K = qs_constant_estimate(build_earthquake(lam, 4.0).boundary_map(), 500)
    assert 1.0 < K < 50


@pytest.mark.parametrize("case", MONOTONE_CASES)
def test_monotone_case_closed_forms(case):
    cfg = MONOTONE_CONFIGS[case]
    for s in np.linspace(cfg["lo"], cfg["hi"], 7)[1:-1]:
        want = monotone_case_closed_form(case, 1.0, cfg["a"], cfg["b"], cfg["c"], cfg["d"], s)
        assert monotone_case_value(case, 1.0, float(s)) == pytest.approx(want, abs=1e-10)


def test_monotone_case_zero_weight():
    case = MONOTONE_CASES[0]
    cfg = MONOTONE_CONFIGS[case]
    Q = Box.from_angles(*(cayley_angle(cfg[k]) for k in "abcd"))
    assert monotone_case_value(case, 0.0, 0.5) == liouville_box(Q)
