import json
import math

import pytest

from geocurrents import cli
from geocurrents.errors import ConfigError
from geocurrents.experiments import ExperimentSpec, fit_inverse_rate, run, single_leaf_rows, validate_t_grid, window_box
from geocurrents.io import load_lamination, rng_for, save_lamination
from geocurrents.laminations import FiniteLamination


def test_t_grid_validation():
    assert validate_t_grid([1, 2, 4]) == [1.0, 2.0, 4.0]
    for bad in ([0, 1, 2], [1, 1, 2], [2, 1], [], [1, math.inf]):
        with pytest.raises(ConfigError):
            validate_t_grid(bad)
    with pytest.raises(ConfigError):
        ExperimentSpec("theorem71", 0, {"t_grid": [0.0, 1.0]})


def test_spec_rejects_unknown_options():
    with pytest.raises(ConfigError):
        ExperimentSpec("prop93", 0, {"n_instance": 3})
    with pytest.raises(ConfigError):
        ExperimentSpec("prop93", 0, {"tolerances": {"nope": 1}})
    with pytest.raises(ConfigError):
        ExperimentSpec("nope")
    with pytest.raises(ConfigError):
        ExperimentSpec.from_config("mcg", {"mgc": {}})


def test_substreams_are_independent():
    a, b = rng_for(1, "x").random(3), rng_for(1, "y").random(3)
    assert (a != b).all()
    assert (rng_for(1, "x").random(3) == a).all()


def test_fit_inverse_rate():
    assert fit_inverse_rate([1, 2, 4], [3.0, 1.5, 0.75]) == pytest.approx(3.0)


def test_single_leaf_rows_match_closed_form():
    rows = single_leaf_rows([10.0])
    t, scaled, target, err, cf, diff = rows[0]
    assert scaled == pytest.approx(math.log(math.exp(10) + 1) / 10, abs=1e-12)
    assert target == 1.0 and err < 1e-5 and diff < 1e-12


def test_single_atom_family_runs():
    res = run(ExperimentSpec("lemma61", 0, {"ns": [1], "windows": [[0.05, 1.1]]}))
    rows = res.table("rows")
    assert len(rows) == 1 and rows[0]["target"] == pytest.approx(0.9)


def test_flagged_rows_are_excluded():
    # n = 2 puts an atom at s = 0.325; a window starting there has it on the boundary
    params = {"ns": [2, 4], "windows": [{"u": 0.325, "v": 0.9, "generic": False}, [0.05, 1.1]]}
    res = run(ExperimentSpec("lemma61", 0, params))
    flagged = [r for r in res.table("rows") if r["flagged"]]
    assert flagged and all(r["box"] == 0 for r in flagged)
    assert 0 not in res.verdicts["per_box_error_decreasing"]["measured"]


def test_window_box_target():
    from geocurrents.laminations import FamilySpec, family_box_mass

    assert family_box_mass(FamilySpec.symmetric(0.1, 1.0), window_box(0.3, 0.8)) == pytest.approx(0.5)


def test_lamination_files(tmp_path):
    lam = FiniteLamination.from_records([(0.1, 2.0, 1.5), (3.0, 4.0, 0.5)])
    for name in ("lam.txt", "lam.json"):
        save_lamination(lam, tmp_path / name)
        assert load_lamination(tmp_path / name).to_records() == lam.to_records()
    (tmp_path / "bad.txt").write_text("0 2 1\n1 3 1\n")
    with pytest.raises(ConfigError):
        load_lamination(tmp_path / "bad.txt")
    (tmp_path / "short.txt").write_text("0 2\n")
    with pytest.raises(ConfigError):
        load_lamination(tmp_path / "short.txt")


def test_cli_exit_codes(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("lemma92:\n  grid: 10\nlemma94:\n  n_instances: 20\nprop93:\n  n_instances: 10\n  n_tight: 2\n")
    assert cli.main(["--config", str(cfg), "--out", str(tmp_path / "o"), "-q", "ineq"]) == 0
    verdicts = json.loads((tmp_path / "o" / "lemma92" / "verdicts.json").read_text())
    assert verdicts["pass"] is True

    bad = tmp_path / "bad.yaml"
    bad.write_text("theorem71:\n  t_grid: [0, 1]\n")
    assert cli.main(["--config", str(bad), "--out", str(tmp_path / "o"), "-q", "converge", "--kind", "theorem71"]) == 2
    lam = tmp_path / "cross.txt"
    lam.write_text("0 2 1\n1 3 1\n")
    assert cli.main(["--out", str(tmp_path / "o"), "-q", "quake-eval", "--lamination", str(lam)]) == 2


def test_cli_failing_verdict_exits_1(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("lemma61:\n  ns: [2, 4]\n")
    assert cli.main(["--config", str(cfg), "--out", str(tmp_path / "o"), "-q", "converge", "--kind", "lemma61"]) == 1


def test_cli_plot_data(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"theorem71": {"t_grid": [1, 2, 4], "uniform": False, "boxes": [[0.2, 1.0, 2.0, 4.0]]}}))
    cli.main(["--config", str(cfg), "--out", str(tmp_path / "o"), "--plot-data", "-q", "converge", "--kind", "theorem71"])
    series = (tmp_path / "o" / "theorem71" / "series_max_error.csv").read_text().splitlines()
    assert series[0] == "t,error" and len(series) == 4
