"""Seeded drivers for the convergence and inequality experiments.

Each driver takes an :class:`ExperimentSpec` and returns a :class:`Result`
holding CSV-ready tables, a verdict per claim and optional (t, error)
series. Random inputs are drawn in the parent process from named
substreams of one seed; workers only evaluate, and results are collected
in submission order, so output does not depend on the worker count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from ._num import TWO_PI, ccw, reduce_angle
from .currents import (
    IsometrySampler,
    LaminationCurrent,
    Pullback,
    Scaled,
    bonahon_residual,
    default_base_boxes,
    liouville_base,
    mcg_pushforward,
    push_lamination,
    sup_norm_estimate,
)
from .earthquakes import (
    DEFAULT_BASE_REF,
    MONOTONE_CASES,
    MONOTONE_CONFIGS,
    MONOTONE_SIGN,
    CircleMap,
    build_earthquake,
    comparison_checks,
    earthquake_path,
    monotone_case_closed_form,
    corner_leaf_bounds,
    corner_leaf_value,
    normalize_fix_three,
    qs_constant_estimate,
)
from .errors import CannotSeparate, ConfigError, GeometryError
from .io import lamination_from_records, load_lamination, rng_for, seed_for, write_csv, write_json
from .laminations import (
    FamilySpec,
    FiniteLamination,
    boundary_mass,
    discretize_family,
    family_box_mass,
    generic_box,
    lamination_box_mass,
    random_lamination,
)
from .liouville import (
    LOG2,
    LOWER_ARC,
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
from .mobius import Geodesic, MobiusMap, cayley_angle, geodesic_distance, hyperbolic_translation

KINDS = ("liouville", "quake_eval", "theorem71", "lemma61", "prop93", "lemma92", "lemma94", "bonahon", "mcg", "supnorm")

GEOMETRIC_T = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)

# three nested leaves about the point 1 of the circle
NESTED3 = ((reduce_angle(-0.6), 0.6, 1.0), (reduce_angle(-0.9), 0.9, 0.7), (reduce_angle(-1.3), 1.3, 1.2))

DEFAULTS: dict[str, dict[str, Any]] = {
    "liouville": dict(n_pairs=1000, n_roundtrips=1000, tolerances=dict(log2=1e-12, invariance=1e-9, additivity=1e-10, quad=1e-8, roundtrip=1e-9)),
    "quake_eval": dict(
        t=1.0, lamination=None, n_laminations=100, max_leaves=8, n_reconstruct=10, reconstruct_points=20,
        grid=200, tolerances=dict(fixed_point=1e-9, trace=1e-10, continuity=1e-10, reconstruct=1e-8),
    ),
    "theorem71": dict(
        t_grid=list(GEOMETRIC_T), lamination=None, boxes="default", generic=True, max_shift=1e-3, base_ref=DEFAULT_BASE_REF,
        sampler=dict(count=64, scale=1.0), sup_samples=256, uniform=True, closed_form=True,
        tolerances=dict(final_rel=0.02, closed_form=1e-10),
    ),
    "lemma61": dict(
        ns=[4, 8, 16, 32], growth="n", family=dict(s0=0.1, s1=1.0, density=1.0),
        windows=[[0.3, 0.8], [0.2, 0.6], [0.5, 0.95], [0.15, 0.9], [0.05, 1.1]],
        generic=True, max_shift=1e-3, tolerances=dict(final_rel=0.05, min_target=0.1),
    ),
    "prop93": dict(n_instances=1000, max_leaves=5, min_gap=0.1, n_tight=20, tolerances=dict(slack=1e-9)),
    "lemma92": dict(m_values=[0.5, 2.0], grid=100, tolerances=dict(slack=1e-10, closed_form=1e-9)),
    "lemma94": dict(m_values=[0.25, 1.0, 4.0], n_instances=1000, m_range=[0.05, 6.0], min_gap=0.05, tolerances=dict(exact=1e-10, slack=1e-9)),
    "bonahon": dict(
        n_quakes=10, max_leaves=6, n_gammas=100, n_boxes=10, counter_weight=3.0, t_grid=[1.0, 2.0, 4.0, 8.0, 16.0],
        tolerances=dict(residual=1e-9, counterexample=0.04, closed_form=1e-10),
    ),
    "mcg": dict(
        t_grid=[4.0, 8.0, 16.0, 32.0], lamination=None, g="earthquake", g_lamination=None,
        sampler=dict(count=32, scale=1.0), boxes="default", tolerances=dict(reproduce=1e-10),
    ),
    "supnorm": dict(sampler_counts=[64, 256], lamination=None, qs_samples=2000, tolerances=dict(log2=1e-9)),
}

# one random experiment per substream name
SUBSTREAMS = ("lamination", "boxes", "isometries", "instances")


# --- spec ------------------------------------------------------------------


@dataclass
class ExperimentSpec:
    kind: str
    seed: int = 0
    params: dict = field(default_factory=dict)
    out: Path | None = None
    jobs: int = 1
    plot_data: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.jobs, (int, np.integer)) or self.jobs < 1:
            raise ConfigError("jobs must be a positive integer")
        merged = dict(DEFAULTS[self.kind])
        tol = dict(merged.get("tolerances", {}))
        for key, val in self.params.items():
            if key not in merged:
                raise ConfigError(f"unknown option {key!r} for {self.kind}")
            if key == "tolerances":
                if not isinstance(val, dict):
                    raise ConfigError("tolerances must be a mapping")
                for k, v in val.items():
                    if k not in tol:
                        raise ConfigError(f"unknown tolerance {k!r} for {self.kind}")
                    tol[k] = float(v)
            else:
                merged[key] = val
        merged["tolerances"] = tol
        self.params = merged
        for key in ("t_grid",):
            if key in merged:
                merged[key] = validate_t_grid(merged[key])
        if "ns" in merged:
            ns = merged["ns"]
            if not ns or any(int(n) != n or n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
                raise ConfigError("ns must be strictly increasing positive integers")
            merged["ns"] = [int(n) for n in ns]
        if merged.get("growth", "n") not in ("n", "n2"):
            raise ConfigError("growth must be 'n' or 'n2'")
        # parse laminations early so bad files fail as config errors
        for key in ("lamination", "g_lamination"):
            if merged.get(key) is not None:
                merged[key] = parse_lamination(merged[key])

    @property
    def tol(self) -> dict:
        return self.params["tolerances"]

    def rng(self, name: str) -> np.random.Generator:
        return rng_for(self.seed, f"{self.kind}/{name}")

    def subseed(self, name: str) -> int:
        return seed_for(self.seed, f"{self.kind}/{name}")

    @classmethod
    def from_config(cls, kind: str, config: dict | None = None, seed=None, jobs=None, out=None, plot_data=False):
        """Build a spec from a parsed config mapping; the section named ``kind`` holds the options."""
        config = dict(config or {})
        unknown = set(config) - set(KINDS) - {"seed", "jobs", "out", "plot_data"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        params = config.get(kind) or {}
        if not isinstance(params, dict):
            raise ConfigError(f"config section {kind!r} must be a mapping")
        seed = config.get("seed", 0) if seed is None else seed
        jobs = config.get("jobs", 1) if jobs is None else jobs
        out = config.get("out") if out is None else out
        return cls(kind, int(seed), dict(params), Path(out) if out else None, int(jobs), bool(plot_data or config.get("plot_data", False)))


def validate_t_grid(ts) -> list[float]:
    try:
        ts = [float(t) for t in ts]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"t grid must be a list of numbers: {exc}") from exc
    if not ts:
        raise ConfigError("t grid is empty")
    if any(not math.isfinite(t) or t <= 0 for t in ts):
        raise ConfigError("t grid entries must be positive and finite")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ConfigError("t grid must be strictly increasing")
    return ts


def parse_lamination(ref) -> FiniteLamination:
    if isinstance(ref, FiniteLamination):
        return ref
    if isinstance(ref, (str, Path)):
        return load_lamination(ref)
    if isinstance(ref, (list, tuple)):
        return lamination_from_records(ref)
    raise ConfigError(f"cannot interpret lamination reference {ref!r}")


def parse_boxes(ref) -> list[Box]:
    if ref == "default":
        return default_base_boxes()
    try:
        return [Box.from_angles(*map(float, b)) for b in ref]
    except (TypeError, ValueError, GeometryError) as exc:
        raise ConfigError(f"invalid box list: {exc}") from exc


# --- results ---------------------------------------------------------------


def verdict(passed: bool, measured, threshold=None, **extra) -> dict:
    out = {"pass": bool(passed), "measured": measured}
    if threshold is not None:
        out["threshold"] = threshold
    out.update(extra)
    return out


@dataclass
class Result:
    name: str
    tables: dict[str, tuple[list[str], list[tuple]]] = field(default_factory=dict)
    verdicts: dict[str, dict] = field(default_factory=dict)
    series: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v["pass"] for v in self.verdicts.values())

    def table(self, name: str) -> list[dict]:
        header, rows = self.tables[name]
        return [dict(zip(header, r)) for r in rows]

    def write(self, out: Path, plot_data: bool = False) -> None:
        out = Path(out) / self.name
        for name, (header, rows) in self.tables.items():
            write_csv(out / f"{name}.csv", header, rows)
        write_json(out / "verdicts.json", {"experiment": self.name, "pass": self.passed, "verdicts": self.verdicts, "info": self.info})
        if plot_data:
            for name, pts in self.series.items():
                write_csv(out / f"series_{name}.csv", ["t", "error"], pts)


def pmap(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """Ordered map, in a process pool when jobs > 1."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))


def _chunks(seq, size):
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def _strictly_decreasing(xs) -> bool:
    return all(b < a for a, b in zip(xs, xs[1:]))


def fit_inverse_rate(ts, errs) -> float:
    """Least-squares c in err ~ c / t."""
    ts, errs = np.asarray(ts, float), np.asarray(errs, float)
    return float(np.sum(errs / ts) / np.sum(1 / ts**2))


def _random_corners(rng, min_gap):
    while True:
        x = np.sort(rng.random(4)) * TWO_PI
        if np.diff(np.r_[x, x[0] + TWO_PI]).min() > min_gap:
            r = rng.random() * TWO_PI
            return tuple(float(reduce_angle(v + r)) for v in x)


def _leaf_value(lam: FiniteLamination, Q: Box, base_ref: float) -> float:
    """L(E(Q)) for the earthquake of lam normalized at base_ref."""
    if not lam.leaves:
        return liouville_box(Q)
    return Pullback(build_earthquake(lam, base_ref).boundary_map()).value(Q)


def _make_generic(boxes, lam, max_shift, info_key, info):
    out, flagged = [], []
    for i, Q in enumerate(boxes):
        try:
            out.append(generic_box(Q, lam, max_shift=max_shift, direction="auto"))
        except CannotSeparate as exc:
            warnings.warn(f"box {i} could not be made generic: {exc}", RuntimeWarning, stacklevel=2)
            out.append(Q)
            flagged.append(i)
    info[info_key] = flagged
    return out, flagged


# --- liouville -------------------------------------------------------------


def run_liouville(spec: ExperimentSpec) -> Result:
    """Closed form, invariance, additivity, quadrature and inversion round trips."""
    p, tol = spec.params, spec.tol
    res = Result("liouville")
    rng = spec.rng("instances")
    sampler = IsometrySampler(spec.subseed("isometries"), p["n_pairs"], include_identity=False)

    log2_err = abs(liouville_box(Q_STAR) - LOG2)
    res.verdicts["q_star_log2"] = verdict(log2_err <= tol["log2"], log2_err, tol["log2"])

    inv_rows = []
    for k, g in enumerate(sampler.maps()):
        Q = Box.from_angles(*_random_corners(rng, 0.05))
        try:
            gQ = Q.apply(g)
        except GeometryError:
            continue
        v0, v1 = liouville_box(Q), liouville_box(gQ)
        inv_rows.append((k, *Q.corners, v0, v1, abs(v0 - v1) / max(1.0, abs(v0))))
    worst = max(r[-1] for r in inv_rows)
    res.tables["invariance"] = (["pair", "a", "b", "c", "d", "L", "L_gamma", "rel_diff"], inv_rows)
    res.verdicts["mobius_invariance"] = verdict(worst <= tol["invariance"], worst, tol["invariance"], pairs=len(inv_rows))

    add_rows = []
    for k in range(p["n_pairs"] // 10):
        a, b, c, d = _random_corners(rng, 0.05)
        split = reduce_angle(a + ccw(a, b) * rng.uniform(0.1, 0.9))
        whole = liouville_box(Box.from_angles(a, b, c, d))
        parts = liouville_box(Box.from_angles(a, split, c, d)) + liouville_box(Box.from_angles(split, b, c, d))
        add_rows.append((k, a, split, b, c, d, whole, parts, abs(whole - parts)))
    worst = max(r[-1] for r in add_rows)
    res.tables["additivity"] = (["case", "a", "split", "b", "c", "d", "whole", "sum_parts", "abs_diff"], add_rows)
    res.verdicts["additivity"] = verdict(worst <= tol["additivity"], worst, tol["additivity"])

    quad_rows = []
    for k, Q in enumerate(regression_boxes()):
        cf, qv = liouville_box(Q), liouville_quad(Q, tol=tol["quad"])
        quad_rows.append((k, *Q.corners, cf, qv, abs(cf - qv)))
    worst = max(r[-1] for r in quad_rows)
    res.tables["quadrature"] = (["box", "a", "b", "c", "d", "closed_form", "quadrature", "abs_diff"], quad_rows)
    res.verdicts["quadrature"] = verdict(worst <= tol["quad"], worst, tol["quad"])

    rt_rows = []
    for k in range(p["n_roundtrips"]):
        a, b, c, d = _random_corners(rng, 0.01)
        target = liouville_box(Box.from_angles(a, b, c, d))
        arc = Arc.from_angles(c, a)
        got = solve_fourth_point(a, b, c, target, arc).angle
        err = min(ccw(got, d), ccw(d, got))
        rt_rows.append((k, a, b, c, d, got, err))
    worst = max(r[-1] for r in rt_rows)
    res.tables["roundtrip"] = (["case", "a", "b", "c", "d", "solved_d", "abs_err"], rt_rows)
    res.verdicts["fourth_point_roundtrip"] = verdict(worst <= tol["roundtrip"], worst, tol["roundtrip"])
    return res


# --- quake-eval ------------------------------------------------------------


def _structure_task(args):
    idx, records, base_ref, grid = args
    lam = FiniteLamination.from_records(records)
    E = build_earthquake(lam, base_ref)
    checks = comparison_checks(E)
    h = E.boundary_map()
    fp = max((c.fixed_point_error for c in checks), default=0.0)
    tr = max((c.trace_error for c in checks), default=0.0)
    left = all(c.left for c in checks)
    cont = h.continuity_defect()
    order = h.preserves_order(list(np.linspace(0, TWO_PI, grid, endpoint=False)) + [float(x) for x in lam.endpoints()])
    return (idx, len(lam), len(checks), fp, tr, left, cont, order)


def _random_base(rng, lam):
    ends = lam.endpoints()
    while True:
        x = float(rng.random() * TWO_PI)
        if all(min(ccw(x, e), ccw(e, x)) > 1e-3 for e in ends):
            return x


def _reconstruct_task(args):
    idx, records, base_ref, xs = args
    lam = FiniteLamination.from_records(records)
    h = normalize_fix_three(build_earthquake(lam, base_ref).boundary_map())
    alpha = Pullback(h)
    rows = []
    for x in xs:
        val = alpha.value(q_x_box(x))
        got = solve_fourth_point(0.0, math.pi / 2, math.pi, val, LOWER_ARC).angle
        want = float(h.image_angle(x))
        rows.append((idx, x, want, got, min(ccw(got, want), ccw(want, got))))
    return rows


def run_quake_eval(spec: ExperimentSpec) -> Result:
    """Evaluate one earthquake on boxes and sweep structural invariants over random laminations."""
    p, tol = spec.params, spec.tol
    res = Result("quake_eval")
    lam = p["lamination"] or random_lamination(spec.rng("lamination"), 4)
    t = float(p["t"])
    if t <= 0:
        raise ConfigError("t must be positive")
    h = earthquake_path(lam, t)
    boxes = default_base_boxes()
    rows = [(k, *Q.corners, liouville_box(Q), Pullback(h).value(Q), lamination_box_mass(lam, Q)) for k, Q in enumerate(boxes)]
    res.tables["values"] = (["box", "a", "b", "c", "d", "L", "pullback", "lamination_mass"], rows)
    res.tables["lamination"] = (["p", "q", "weight"], lam.to_records())

    rng = spec.rng("instances")
    tasks = []
    for k in range(p["n_laminations"]):
        lk = random_lamination(rng, int(rng.integers(1, p["max_leaves"] + 1)))
        tasks.append((k, lk.to_records(), _random_base(rng, lk), p["grid"]))
    srows = pmap(_structure_task, tasks, spec.jobs)
    res.tables["structure"] = (
        ["lamination", "leaves", "gap_pairs", "fixed_point_err", "trace_err", "left", "continuity", "order_preserved"],
        srows,
    )
    fp = max(r[3] for r in srows)
    tr = max(r[4] for r in srows)
    cont = max(r[6] for r in srows)
    res.verdicts["comparison_maps"] = verdict(
        fp <= tol["fixed_point"] and tr <= tol["trace"] and all(r[5] for r in srows),
        {"fixed_point": fp, "trace": tr}, {"fixed_point": tol["fixed_point"], "trace": tol["trace"]},
    )
    res.verdicts["continuity"] = verdict(cont <= tol["continuity"], cont, tol["continuity"])
    res.verdicts["cyclic_order"] = verdict(all(r[7] for r in srows), sum(not r[7] for r in srows), 0)

    tasks = []
    for k in range(p["n_reconstruct"]):
        lk = random_lamination(rng, int(rng.integers(1, 6)))
        xs = [float(x) for x in math.pi + (TWO_PI - math.pi) * (0.02 + 0.96 * rng.random(p["reconstruct_points"]))]
        tasks.append((k, lk.to_records(), _random_base(rng, lk), xs))
    rrows = [r for chunk in pmap(_reconstruct_task, tasks, spec.jobs) for r in chunk]
    res.tables["reconstruct"] = (["map", "x", "h_x", "reconstructed", "abs_err"], rrows)
    worst = max(r[-1] for r in rrows)
    res.verdicts["reconstruction"] = verdict(worst <= tol["reconstruct"], worst, tol["reconstruct"])
    return res


# --- theorem71 -------------------------------------------------------------


def _convergence_task(args):
    """Rows (gamma, box, scaled, target) for one t and a block of isometries."""
    t, lam, base_ref, boxes, gammas = args
    alpha = Scaled(1.0 / t, Pullback(earthquake_path(lam, t, base_ref)))
    beta = LaminationCurrent(lam)
    out = []
    for gi, g in gammas:
        for qi, Q in enumerate(boxes):
            B = Q if g is None else Q.apply(g)
            out.append((gi, qi, alpha.value(B), beta.value(B)))
    return t, out


def single_leaf_rows(t_grid, m: float = 1.0, b: float = 1.0):
    """Leaf (0, inf) of weight m on the box (0, b, inf, -1), against the closed form."""
    lam = FiniteLamination.from_records([(cayley_angle(0.0), cayley_angle(math.inf), m)])
    Q = Box.from_angles(cayley_angle(0.0), cayley_angle(b), cayley_angle(math.inf), cayley_angle(-1.0))
    base = cayley_angle(-2.0)
    rows = []
    for t in t_grid:
        scaled = Pullback(earthquake_path(lam, t, base)).value(Q) / t
        target = lamination_box_mass(lam, Q)
        err = abs(scaled - target)
        cf = abs(float(corner_leaf_value(t * m, b)) / t - m)
        rows.append((t, scaled, target, err, cf, abs(err - cf)))
    return rows


def run_theorem71(spec: ExperimentSpec) -> Result:
    p, tol = spec.params, spec.tol
    res = Result("theorem71")
    lam = p["lamination"] or FiniteLamination.from_records(NESTED3)
    ts = p["t_grid"]
    boxes = parse_boxes(p["boxes"])
    flagged = []
    if p["generic"]:
        boxes, flagged = _make_generic(boxes, lam, p["max_shift"], "non_generic_boxes", res.info)
    base_ref = float(p["base_ref"])

    tasks = [(t, lam, base_ref, boxes, [(0, None)]) for t in ts]
    if p["uniform"]:
        sc = p["sampler"]
        sampler = IsometrySampler(spec.subseed("isometries"), int(sc["count"]), float(sc.get("scale", 1.0)))
        gammas = list(enumerate(sampler.maps()))
        tasks = [(t, lam, base_ref, boxes, block) for t in ts for block in _chunks(gammas, 16)]
    per_t: dict[float, list] = {t: [] for t in ts}
    for t, rows in pmap(_convergence_task, tasks, spec.jobs):
        per_t[t].extend(rows)

    rows, summary = [], []
    for t in ts:
        base_rows = [r for r in per_t[t] if r[0] == 0]
        errs = []
        for gi, qi, scaled, target in base_rows:
            err = abs(scaled - target)
            rows.append((t, qi, scaled, target, err, qi in flagged))
            if qi not in flagged:
                errs.append(err)
        uerr = max(abs(s - g) for _, _, s, g in per_t[t])
        summary.append((t, max(errs), uerr))
    res.tables["rows"] = (["t", "box", "scaled", "target", "abs_error", "flagged"], rows)

    max_err = [s[1] for s in summary]
    c = fit_inverse_rate(ts, max_err)
    res.tables["summary"] = (["t", "max_error", "uniform_max_error", "fit_c_over_t"], [(*s, c / s[0]) for s in summary])
    res.series["max_error"] = [(s[0], s[1]) for s in summary]
    res.info["fit_c"] = c
    res.info["tail_c"] = ts[-1] * max_err[-1]
    res.verdicts["max_error_decreasing"] = verdict(_strictly_decreasing(max_err), max_err)

    sup = sup_norm_estimate(LaminationCurrent(lam), IsometrySampler(spec.subseed("isometries"), int(p["sup_samples"])))
    res.info["sup_norm_estimate"] = sup
    thr = tol["final_rel"] * sup
    res.verdicts["final_error_below_tolerance"] = verdict(max_err[-1] < thr, max_err[-1], thr, fit_c=c)
    if p["uniform"]:
        uerr = [s[2] for s in summary]
        res.series["uniform_max_error"] = [(s[0], s[2]) for s in summary]
        res.verdicts["uniform_error_decreasing"] = verdict(_strictly_decreasing(uerr), uerr)

    if p["closed_form"]:
        cf = single_leaf_rows(ts)
        res.tables["single_leaf"] = (["t", "scaled", "target", "abs_error", "closed_form_error", "diff"], cf)
        worst = max(r[-1] for r in cf)
        res.verdicts["single_leaf_closed_form"] = verdict(worst <= tol["closed_form"], worst, tol["closed_form"])
    return res


# --- lemma61 ---------------------------------------------------------------


def window_box(u: float, v: float) -> Box:
    """Box capturing the symmetric leaves (-s, s) with u <= s <= v."""
    return Box.from_angles(u, v, reduce_angle(-v), reduce_angle(-u))


def _family_task(args):
    n, t, fam, boxes = args
    lam = discretize_family(fam, n)
    alpha = Pullback(earthquake_path(lam, t))
    return [alpha.value(Q) / t for Q in boxes]


def run_lemma61(spec: ExperimentSpec) -> Result:
    p, tol = spec.params, spec.tol
    res = Result("lemma61")
    f = p["family"]
    try:
        fam = FamilySpec.symmetric(float(f["s0"]), float(f["s1"]), float(f.get("density", 1.0)))
    except (KeyError, TypeError, ValueError, GeometryError) as exc:
        raise ConfigError(f"invalid family: {exc}") from exc
    windows = []
    for w in p["windows"]:
        if isinstance(w, dict):
            windows.append((float(w["u"]), float(w["v"]), bool(w.get("generic", p["generic"]))))
        else:
            windows.append((float(w[0]), float(w[1]), bool(p["generic"])))
    tasks, meta = [], []
    for n in p["ns"]:
        lam = discretize_family(fam, n)
        t = float(n if p["growth"] == "n" else n * n)
        boxes, flags = [], []
        for u, v, gen in windows:
            Q = window_box(u, v)
            if gen:
                try:
                    Q = generic_box(Q, lam, max_shift=p["max_shift"], direction="auto")
                except CannotSeparate as exc:
                    warnings.warn(f"window ({u}, {v}) could not be made generic: {exc}", RuntimeWarning, stacklevel=2)
            boxes.append(Q)
            flags.append(boundary_mass(lam, Q) > 0)
        tasks.append((n, t, fam, boxes))
        meta.append((n, t, boxes, flags))
    values = pmap(_family_task, tasks, spec.jobs)

    rows = []
    per_box: dict[int, list] = {i: [] for i in range(len(windows))}
    for (n, t, boxes, flags), vals in zip(meta, values):
        for i, (Q, flag, val) in enumerate(zip(boxes, flags, vals)):
            target = family_box_mass(fam, Q)
            err = abs(val - target)
            rel = err / target if target > 0 else math.inf
            rows.append((n, t, i, val, target, err, rel, flag))
            if not flag:
                per_box[i].append((err, rel, target))
    res.tables["rows"] = (["n", "t_n", "box", "scaled", "target", "abs_error", "rel_error", "flagged"], rows)

    decreasing, final = {}, {}
    for i, seq in per_box.items():
        if len(seq) != len(p["ns"]) or seq[-1][2] < tol["min_target"]:
            continue
        decreasing[i] = _strictly_decreasing([e for e, _, _ in seq])
        final[i] = seq[-1][1]
        res.series[f"box{i}"] = [(n, e) for n, (e, _, _) in zip(p["ns"], seq)]
    res.verdicts["per_box_error_decreasing"] = verdict(all(decreasing.values()), decreasing)
    worst = max(final.values(), default=0.0)
    res.verdicts["final_relative_error"] = verdict(worst < tol["final_rel"], final, tol["final_rel"])
    return res


# --- inequalities ----------------------------------------------------------


def _nested_records(rng, lo1, len1, lo2, len2, k):
    ps = np.sort(rng.random(k)) * len1 + lo1
    qs = np.sort(rng.random(k))[::-1] * len2 + lo2
    w = rng.uniform(0.1, 2.0, k)
    return [(float(reduce_angle(a)), float(reduce_angle(b)), float(c)) for a, b, c in zip(ps, qs, w)]


def _comparison_task(args):
    idx, corners, inner, beta, gamma = args
    a, b, c, d = corners
    a1, b1, c1, d1 = inner
    Q, Q1 = Box.from_angles(*corners), Box.from_angles(*inner)
    base = reduce_angle(d + ccw(d, a) / 2)
    lb = FiniteLamination.from_records(beta)
    lg = FiniteLamination.from_records(gamma)
    single = lambda p, q, m: FiniteLamination.from_records([(p, q, m)]) if m > 0 else FiniteLamination.empty()
    lhs1 = _leaf_value(single(b1, d1, lb.total_mass), Q, base)
    rhs1 = _leaf_value(lb, Q, base)
    lhs2 = _leaf_value(lg, Q1, base)
    rhs2 = _leaf_value(single(a1, c1, lg.total_mass), Q1, base)
    return [(idx, "T2", len(lb), lhs1, rhs1, rhs1 - lhs1), (idx, "T1", len(lg), lhs2, rhs2, rhs2 - lhs2)]


def run_prop93(spec: ExperimentSpec) -> Result:
    """Both comparison inequalities on random nested laminations, plus corner-leaf tightness."""
    p, tol = spec.params, spec.tol
    res = Result("prop93")
    rng = spec.rng("instances")
    tasks = []
    for k in range(p["n_instances"]):
        corners = _random_corners(rng, p["min_gap"])
        a, b, c, d = corners
        u, v = np.sort(rng.random(2)), np.sort(rng.random(2))
        ab, cd = ccw(a, b), ccw(c, d)
        inner = tuple(float(reduce_angle(x)) for x in (a + u[0] * ab, a + u[1] * ab, c + v[0] * cd, c + v[1] * cd))
        a1, b1, c1, d1 = inner
        beta = _nested_records(rng, a1, ccw(a1, b1), c1, ccw(c1, d1), int(rng.integers(0, p["max_leaves"] + 1)))
        gamma = _nested_records(rng, a, ab, c, cd, int(rng.integers(0, p["max_leaves"] + 1)))
        tasks.append((k, corners, inner, beta, gamma))
    rows = [r for chunk in pmap(_comparison_chunk, _chunks(tasks, 25), spec.jobs) for r in chunk]
    res.tables["instances"] = (["instance", "inequality", "leaves", "lhs", "rhs", "slack"], rows)
    viol = sum(r[5] < -tol["slack"] for r in rows)
    res.verdicts["no_violations"] = verdict(viol == 0, viol, 0, min_slack=min(r[5] for r in rows), slack=tol["slack"])

    # tightness: beta a single leaf on the inner corner geodesic (b1, d1), gamma one on (a, c)
    tight = []
    for k in range(p["n_tight"]):
        corners = _random_corners(rng, p["min_gap"])
        a, b, c, d = corners
        u, v = np.sort(rng.random(2)), np.sort(rng.random(2))
        inner = tuple(float(reduce_angle(x)) for x in (a + u[0] * ccw(a, b), a + u[1] * ccw(a, b), c + v[0] * ccw(c, d), c + v[1] * ccw(c, d)))
        m = float(rng.uniform(0.1, 3.0))
        beta = [(inner[1], inner[3], m)]
        gamma = [(inner[0], inner[2], m)]
        tight.extend(_comparison_task((k, corners, inner, beta, gamma)))
    res.tables["tightness"] = (["instance", "inequality", "leaves", "lhs", "rhs", "slack"], tight)
    worst = max(abs(r[5]) for r in tight)
    res.verdicts["tightness"] = verdict(worst <= tol["slack"], worst, tol["slack"])
    return res


def _comparison_chunk(tasks):
    return [r for t in tasks for r in _comparison_task(t)]


def monotone_case_value(case, m: float, s: float) -> float:
    """f for the single-leaf earthquake with leaf endpoint s (half-plane) and the other at infinity."""
    cfg = MONOTONE_CONFIGS[case]
    Q = Box.from_angles(*(cayley_angle(cfg[k]) for k in "abcd"))
    if m == 0:
        return liouville_box(Q)
    S, inf = cayley_angle(s), cayley_angle(math.inf)
    x, y = (S, inf) if case[0] == "x" else (inf, S)
    lam = FiniteLamination.from_records([(x, y, m)])
    base = reduce_angle(y + ccw(y, x) / 2)
    return _leaf_value(lam, Q, base)


def _monotone_task(args):
    case, m, grid = args
    cfg = MONOTONE_CONFIGS[case]
    out = []
    for k, s in enumerate(grid):
        fq = monotone_case_value(case, m, s)
        fc = monotone_case_closed_form(case, m, cfg["a"], cfg["b"], cfg["c"], cfg["d"], s) if m > 0 else fq
        out.append((f"{case[0]}:{case[1]}:{case[2]}", m, k, s, fq, fc, abs(fq - fc)))
    return out


def run_lemma92(spec: ExperimentSpec) -> Result:
    p, tol = spec.params, spec.tol
    res = Result("lemma92")
    tasks = []
    for case in MONOTONE_CASES:
        cfg = MONOTONE_CONFIGS[case]
        grid = [float(s) for s in np.linspace(cfg["lo"], cfg["hi"], p["grid"])]
        for m in list(p["m_values"]) + [0.0]:
            tasks.append((case, float(m), grid))
    chunks = pmap(_monotone_task, tasks, spec.jobs)
    rows = [r for c in chunks for r in c]
    res.tables["grid"] = (["case", "m", "k", "s", "f", "closed_form", "abs_diff"], rows)
    viol, worst_cf, summary = 0, 0.0, []
    const_dev = 0.0
    for (case, m, _), chunk in zip(tasks, chunks):
        f = np.array([r[4] for r in chunk])
        if m == 0:
            const_dev = max(const_dev, float(np.ptp(f)))
            continue
        d = MONOTONE_SIGN[case[1]] * np.diff(f)
        bad = int(np.sum(d <= tol["slack"]))
        viol += bad
        worst_cf = max(worst_cf, max(r[6] for r in chunk))
        summary.append((chunk[0][0], m, MONOTONE_SIGN[case[1]], float(d.min()), bad))
    res.tables["summary"] = (["case", "m", "sign", "min_signed_step", "violations"], summary)
    res.verdicts["monotone_signs"] = verdict(viol == 0, viol, 0, slack=tol["slack"])
    res.verdicts["closed_form"] = verdict(worst_cf <= tol["closed_form"], worst_cf, tol["closed_form"])
    res.verdicts["m_zero_constant"] = verdict(const_dev <= tol["slack"], const_dev, tol["slack"])
    return res


def _corner_task(args):
    idx, corners, m = args
    a, b, c, d = corners
    Q = Box.from_angles(*corners)
    lam = FiniteLamination.from_records([(a, c, m)])
    val = _leaf_value(lam, Q, reduce_angle(c + ccw(c, d) / 2))
    D = geodesic_distance(Geodesic.from_angles(a, d), Geodesic.from_angles(b, c))
    lo, hi = corner_leaf_bounds(m, D, liouville_box(Q))
    return (idx, *corners, m, D, lo, val, hi, min(val - lo, hi - val))


def _corner_chunk(tasks):
    return [_corner_task(t) for t in tasks]


def run_lemma94(spec: ExperimentSpec) -> Result:
    p, tol = spec.params, spec.tol
    res = Result("lemma94")
    exact = []
    corners = tuple(cayley_angle(x) for x in (0.0, 1.0, math.inf, -1.0))
    for m in p["m_values"]:
        val = _corner_task((0, corners, float(m)))[8]
        cf = float(corner_leaf_value(float(m), 1.0))
        exact.append((float(m), val, cf, abs(val - cf)))
    res.tables["exact"] = (["m", "value", "closed_form", "abs_diff"], exact)
    worst = max(r[-1] for r in exact)
    res.verdicts["closed_form"] = verdict(worst <= tol["exact"], worst, tol["exact"])

    rng = spec.rng("instances")
    lo_m, hi_m = p["m_range"]
    tasks = [(k, _random_corners(rng, p["min_gap"]), float(rng.uniform(lo_m, hi_m))) for k in range(p["n_instances"])]
    rows = [r for chunk in pmap(_corner_chunk, _chunks(tasks, 50), spec.jobs) for r in chunk]
    res.tables["bounds"] = (["instance", "a", "b", "c", "d", "m", "D", "lower", "value", "upper", "slack"], rows)
    worst = min(r[-1] for r in rows)
    res.verdicts["bounds"] = verdict(worst >= -tol["slack"], worst, -tol["slack"])
    return res


# --- bonahon / supnorm -----------------------------------------------------


def _bonahon_task(args):
    idx, records, base_ref, gammas, boxes = args
    if records:
        alpha = Pullback(build_earthquake(FiniteLamination.from_records(records), base_ref).boundary_map())
    else:
        alpha = liouville_base()
    worst = 0.0
    for g in gammas:
        for Q in boxes:
            worst = max(worst, bonahon_residual(alpha, Q.apply(g)))
    return (idx, len(records), len(gammas) * len(boxes), worst)


def run_bonahon(spec: ExperimentSpec) -> Result:
    """Residual of the complementary-box identity, a lamination counterexample and the divergence dichotomy."""
    p, tol = spec.params, spec.tol
    res = Result("bonahon")
    gammas = IsometrySampler(spec.subseed("isometries"), p["n_gammas"]).maps()
    rng = spec.rng("boxes")
    boxes = [Box.from_angles(*_random_corners(rng, 0.05)) for _ in range(p["n_boxes"])]
    lrng = spec.rng("lamination")
    tasks = [(-1, [], DEFAULT_BASE_REF, gammas, boxes)]
    for k in range(p["n_quakes"]):
        lam = random_lamination(lrng, int(lrng.integers(1, p["max_leaves"] + 1)))
        tasks.append((k, lam.to_records(), _random_base(lrng, lam), gammas, boxes))
    rows = pmap(_bonahon_task, tasks, spec.jobs)
    res.tables["residuals"] = (["current", "leaves", "pairs", "max_residual"], rows)
    worst = max(r[3] for r in rows)
    res.verdicts["pullback_residual"] = verdict(worst <= tol["residual"], worst, tol["residual"], pairs=sum(r[2] for r in rows))

    w = float(p["counter_weight"])
    lam = FiniteLamination.from_records([(0.2, 3.0, w)])
    Q = Box.from_angles(0.0, 1.0, 2.5, 3.5)
    r = bonahon_residual(LaminationCurrent(lam), Q)
    res.tables["counterexample"] = (["weight", "a", "b", "c", "d", "residual", "expected"], [(w, *Q.corners, r, math.exp(-w))])
    res.verdicts["lamination_counterexample"] = verdict(r >= tol["counterexample"], r, tol["counterexample"])

    # single leaf (0, inf) on the box (0, 1, inf, -1); its complement shrinks like log(1 + e^-t)
    leaf = FiniteLamination.from_records([(cayley_angle(0.0), cayley_angle(math.inf), 1.0)])
    Q = Box.from_angles(*(cayley_angle(x) for x in (0.0, 1.0, math.inf, -1.0)))
    Qc = complementary_box(Q)
    base = cayley_angle(-2.0)
    drows = []
    for t in p["t_grid"]:
        alpha = Pullback(earthquake_path(leaf, t, base))
        v, vc = alpha.value(Q), alpha.value(Qc)
        cf = math.log1p(math.exp(-t))
        drows.append((t, v, vc, cf, abs(vc - cf)))
    res.tables["dichotomy"] = (["t", "value", "complementary", "closed_form", "abs_diff"], drows)
    res.series["complementary"] = [(r[0], r[2]) for r in drows]
    vc = [r[2] for r in drows]
    worst = max(r[4] for r in drows)
    res.verdicts["dichotomy_decreasing"] = verdict(_strictly_decreasing(vc) and worst <= tol["closed_form"], vc, max_closed_form_diff=worst)
    return res


def run_supnorm(spec: ExperimentSpec) -> Result:
    p, tol = spec.params, spec.tol
    res = Result("supnorm")
    lam = p["lamination"] or FiniteLamination.from_records(NESTED3)
    quake = random_lamination(spec.rng("lamination"), 3)
    h = build_earthquake(quake, _random_base(spec.rng("lamination"), quake)).boundary_map()
    currents = {
        "liouville": liouville_base(),
        "liouville_x2": Scaled(2.0, liouville_base()),
        "lamination": LaminationCurrent(lam),
        "pullback": Pullback(h),
    }
    rows = []
    ests: dict[str, list[float]] = {}
    seed = spec.subseed("isometries")
    for name, alpha in currents.items():
        for n in p["sampler_counts"]:
            est = sup_norm_estimate(alpha, IsometrySampler(seed, int(n)))
            ests.setdefault(name, []).append(est)
            rows.append((name, n, est))
    res.tables["estimates"] = (["current", "samples", "sup_estimate"], rows)
    err = max(abs(e - LOG2) for e in ests["liouville"])
    res.verdicts["liouville_log2"] = verdict(err <= tol["log2"], err, tol["log2"])
    err2 = max(abs(e - 2 * LOG2) for e in ests["liouville_x2"])
    res.verdicts["scaling"] = verdict(err2 <= 2 * tol["log2"], err2, 2 * tol["log2"])
    mono = all(all(b >= a for a, b in zip(v, v[1:])) for v in ests.values())
    res.verdicts["monotone_in_samples"] = verdict(mono, {k: v for k, v in ests.items()})
    bound = ests["lamination"][-1] <= lam.total_mass + 1e-12
    res.verdicts["lamination_bounded_by_mass"] = verdict(bound, ests["lamination"][-1], lam.total_mass)
    again = sup_norm_estimate(currents["pullback"], IsometrySampler(seed, int(p["sampler_counts"][0])))
    res.verdicts["reproducible"] = verdict(again == ests["pullback"][0], again)
    K = qs_constant_estimate(h, int(p["qs_samples"]), spec.subseed("instances"))
    res.info["qs_constant_estimate"] = K
    res.verdicts["quasisymmetric_finite"] = verdict(math.isfinite(K) and K >= 1.0, K)
    return res


# --- mcg -------------------------------------------------------------------

MCG_BETA = ((cayley_angle(0.0), cayley_angle(math.inf), 1.0),)
MCG_G_LAMINATION = ((1.0, 2.2, 0.8), (3.6, 5.0, 0.6))


def _mcg_task(args):
    t, lam, g, gammas, boxes = args
    alpha = Pullback(earthquake_path(lam, t))
    pushed = Scaled(1.0 / t, mcg_pushforward(g, alpha))
    base = Scaled(1.0 / t, alpha)
    ginv = g.inverse()
    out = []
    for gi, gm in gammas:
        for qi, Q in enumerate(boxes):
            B = Q.apply(gm)
            out.append((gi, qi, pushed.value(B), base.value(B.apply(ginv))))
    return t, out


def run_mcg(spec: ExperimentSpec) -> Result:
    """Push the convergent family forward by g and compare with the pushed limit."""
    p, tol = spec.params, spec.tol
    res = Result("mcg")
    lam = p["lamination"] or FiniteLamination.from_records(MCG_BETA)
    ts = p["t_grid"]
    boxes = parse_boxes(p["boxes"])
    sc = p["sampler"]
    sampler = IsometrySampler(spec.subseed("isometries"), int(sc["count"]), float(sc.get("scale", 1.0)))
    gammas = list(enumerate(sampler.maps()))
    kinds = {"identity": CircleMap.identity()}
    mob = hyperbolic_translation(Geodesic.from_angles(0.4, 2.9), 0.7) @ MobiusMap.rotation(1.3)
    kinds["mobius"] = CircleMap.from_mobius(mob)
    g_lam = p["g_lamination"] or FiniteLamination.from_records(MCG_G_LAMINATION)
    kinds["earthquake"] = build_earthquake(g_lam, DEFAULT_BASE_REF).boundary_map()
    if p["g"] not in kinds:
        raise ConfigError(f"g must be one of {sorted(kinds)}")

    # Möbius and identity g: compare pushed rows with the base rows on g^-1 boxes
    rep = {}
    for name in ("identity", "mobius"):
        tasks = [(t, lam, kinds[name], block, boxes) for t in ts for block in _chunks(gammas, 16)]
        worst = 0.0
        for t, rows in pmap(_mcg_task, tasks, spec.jobs):
            worst = max([worst] + [abs(a - b) for _, _, a, b in rows])
        rep[name] = worst
    res.tables["reproduce"] = (["g", "max_abs_diff"], sorted(rep.items()))
    res.verdicts["identity_reproduces_base"] = verdict(rep["identity"] <= tol["reproduce"], rep["identity"], tol["reproduce"])
    res.verdicts["mobius_reproduces_base"] = verdict(rep["mobius"] <= tol["reproduce"], rep["mobius"], tol["reproduce"])

    g = kinds[p["g"]]
    target = LaminationCurrent(push_lamination(lam, g))
    tasks = [(t, lam, g, block, boxes) for t in ts for block in _chunks(gammas, 16)]
    per_t: dict[float, float] = {t: 0.0 for t in ts}
    for t, rows in pmap(_mcg_task, tasks, spec.jobs):
        for gi, qi, val, _ in rows:
            B = boxes[qi].apply(gammas[gi][1])
            per_t[t] = max(per_t[t], abs(val - target.value(B)))
    disc = [per_t[t] for t in ts]
    res.tables["discrepancy"] = (["t", "g", "uniform_discrepancy"], [(t, p["g"], per_t[t]) for t in ts])
    res.series["discrepancy"] = [(t, per_t[t]) for t in ts]
    res.verdicts["pushforward_discrepancy_decreasing"] = verdict(_strictly_decreasing(disc), disc)
    return res


RUNNERS: dict[str, Callable[[ExperimentSpec], Result]] = {
    "liouville": run_liouville,
    "quake_eval": run_quake_eval,
    "theorem71": run_theorem71,
    "lemma61": run_lemma61,
    "prop93": run_prop93,
    "lemma92": run_lemma92,
    "lemma94": run_lemma94,
    "bonahon": run_bonahon,
    "mcg": run_mcg,
    "supnorm": run_supnorm,
}


def run(spec: ExperimentSpec) -> Result:
    res = RUNNERS[spec.kind](spec)
    if spec.out is not None:
        res.write(spec.out, spec.plot_data)
    return res


def run_bonahon_and_supnorm(spec: ExperimentSpec) -> tuple[Result, Result]:
    other = "supnorm" if spec.kind == "bonahon" else "bonahon"
    spec2 = ExperimentSpec(other, spec.seed, {}, spec.out, spec.jobs, spec.plot_data)
    pair = (spec, spec2) if spec.kind == "bonahon" else (spec2, spec)
    return run(pair[0]), run(pair[1])
