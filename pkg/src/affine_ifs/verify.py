"""Regression suite: recompute every reference fact and compare.

``verify_all("quick")`` trims the grid sizes; ``"full"`` runs the 256-cell
measure checks. ``overrides`` replaces reference values by name, which is
how the negative-control tests inject a wrong constant.
"""

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import catalog
from .affine import AffineMap, compose, determinant, lipschitz, matrix_power, spectral_norms
from .fibres import Address, classify_fibre, fibre_sequence, find_contractive_word, strongly_fibred_report
from .geometry import box
from .ifs import average_contractivity, critical_probability, iterate_system, word_lipschitz
from .measures import (
    MarkovOperator,
    escape_free_bounds,
    iterate_to_invariance,
    point_mass,
    total_variation,
    uniform_on_bounds,
    uniform_on_polygon,
)
from .oracles import power_iteration_norm, sampled_norm
from .sets import OrbitConfig, chaos_game, estimate_semiattractor, hausdorff_distance

SCALES = {
    "quick": {"grids": (32, 64, 128), "m": 128},
    "full": {"grids": (64, 128, 256), "m": 256},
}


@dataclass
class Check:
    id: int
    title: str
    passed: bool
    measured: dict
    expected: dict
    tolerance: str
    source: str
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.id:2d} {self.title} ({self.seconds:.2f}s) measured={_fmt(self.measured)}"


@dataclass
class VerifyReport:
    scale: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [c.line() for c in self.checks]
        n_ok = sum(c.passed for c in self.checks)
        lines.append(f"{n_ok}/{len(self.checks)} checks passed (scale={self.scale})")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {"scale": self.scale, "passed": self.passed, "checks": [asdict(c) for c in self.checks]},
            indent=2,
            default=_jsonable,
        )


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _fmt(d: dict) -> str:
    parts = []
    for k, v in d.items():
        if isinstance(v, float):
            parts.append(f"{k}={v:.10g}")
        else:
            parts.append(f"{k}={v}")
    return ", ".join(parts)


class _Refs:
    """Reference values by name, with optional overrides for negative controls."""

    def __init__(self, overrides: Optional[dict] = None):
        self.bv = catalog.bv_triangle(0.5)
        self.final = catalog.final_example()
        self.overrides = dict(overrides or {})

    def __call__(self, name: str):
        if name in self.overrides:
            return self.overrides[name]
        if name in self.bv.facts:
            return self.bv.facts[name].value
        return self.final.facts[name].value

    def source(self, *names) -> str:
        out = []
        for n in names:
            fact = self.bv.facts.get(n) or self.final.facts.get(n)
            out.append(f"{n}:{fact.source}")
        return ", ".join(out)


# -- checks --------------------------------------------------------------------


def check_lipschitz(refs, scale):
    s = refs.bv.system
    vals = {f"lip_{i}{j}": lipschitz(AffineMap(s.linears[i - 1] @ s.linears[j - 1], [0, 0])) for i in (1, 2) for j in (1, 2)}
    ok = all(abs(vals[f"lip_{i}2"] - refs("lip_tail2")) <= 1e-12 for i in (1, 2))
    ok &= all(abs(vals[f"lip_{i}1"] - refs("lip_tail1")) <= 1e-12 for i in (1, 2))
    exp = {"lip_i2": refs("lip_tail2"), "lip_i1": refs("lip_tail1")}
    return ok, vals, exp, "abs 1e-12", refs.source("lip_tail2", "lip_tail1")


def check_second_iterate(refs, scale):
    s = refs.bv.system
    total = float(word_lipschitz(s, 2).sum())
    avg = average_contractivity(s, 2)
    expected = refs("avg_k2_half")
    ok = total < refs("lip_sum_bound") and abs(avg - expected) <= 1e-9 and avg < 1
    return ok, {"lip_sum": total, "average": avg}, {"lip_sum_below": refs("lip_sum_bound"), "average": expected}, "abs 1e-9", refs.source("lip_sum_bound", "avg_k2_half")


def check_critical(refs, scale):
    p = critical_probability(refs.bv.system, 2)
    exact = refs("critical_p1_k2")
    ok = abs(p - exact) <= 1e-8 and round(p, 2) == refs("critical_p1_approx")
    return ok, {"bisection": p}, {"closed_form": exact, "approx": refs("critical_p1_approx")}, "abs 1e-8", refs.source("critical_p1_k2", "critical_p1_approx")


def check_area_law(refs, scale):
    s = refs.bv.system
    dets = [determinant(a) for a in s.linears]
    ok = all(d == refs("det") for d in dets)
    rng = np.random.default_rng(7)
    addresses = [Address.constant(1), Address.constant(2), Address((1,), (1, 2))]
    addresses += [Address(tuple(rng.integers(1, 3, 40).tolist())) for _ in range(20)]
    worst = 0.0
    for a in addresses:
        for f in fibre_sequence(s, refs.bv.hint, a, 40):
            expected = refs("det") ** f.depth * refs.bv.hint.area
            worst = max(worst, abs(f.area - expected) / expected)
    ok &= worst <= 1e-10
    return ok, {"det_A1": dets[0], "det_A2": dets[1], "worst_rel_area_err": worst}, {"det": refs("det")}, "exact / rel 1e-10", refs.source("det")


def check_power_closed_form(refs, scale):
    a1 = refs.bv.system.linears[0]
    worst = 0.0
    for n in range(1, 41):
        closed = np.array([[1.0, 1.0 - 2.0**-n], [0.0, 2.0**-n]])
        worst = max(worst, float(np.abs(matrix_power(a1, n) - closed).max()))
    return worst <= 1e-12, {"max_entry_err": worst}, {"max_entry_err_at_most": 1e-12}, "abs 1e-12", "closed form A1^n:reported"


def check_fibre_witnesses(refs, scale):
    s, C = refs.bv.system, refs.bv.hint
    seg = classify_fibre(fibre_sequence(s, C, Address.constant(1), 40))
    pt = classify_fibre(fibre_sequence(s, C, Address.constant(2), 40))
    (e0, e1) = refs("segment_fibre_1")
    ok = seg.kind == "segment" and pt.kind == "point"
    if ok:
        ends = sorted(seg.endpoints)
        ok &= max(np.abs(np.subtract(ends[0], e0)).max(), np.abs(np.subtract(ends[1], e1)).max()) <= 1e-6
        ok &= float(np.abs(np.subtract(pt.location, refs("point_fibre_2"))).max()) <= 1e-6
    return ok, {"fibre_1": seg.to_dict(), "fibre_2": pt.to_dict()}, {"segment": refs("segment_fibre_1"), "point": refs("point_fibre_2")}, "1e-6", refs.source("segment_fibre_1", "point_fibre_2")


def check_contractive_word(refs, scale):
    s, C = refs.bv.system, refs.bv.hint
    word, lip = find_contractive_word(s, 2)
    rep = strongly_fibred_report(s, C, 2)
    ok = tuple(word) == tuple(refs("witness_word")) and abs(lip - refs("lip_tail2")) <= 1e-12
    ok &= rep.strongly_fibred == "strongly-fibred" and rep.point_fibred == "falsified"
    meas = {"word": word, "lip": lip, "strongly_fibred": rep.strongly_fibred, "point_fibred": rep.point_fibred}
    return ok, meas, {"word": refs("witness_word"), "lip": refs("lip_tail2")}, "abs 1e-12", refs.source("witness_word")


def _triangle_raster(refs):
    return refs.bv.hint.raster(0.01)


def check_chaos(refs, scale):
    s, C = refs.bv.system, refs.bv.hint
    cloud = chaos_game(s, (0.3, 0.3), OrbitConfig(burn_in=100, samples=100_000, rng_seed=0))
    outside = float(max(0.0, -C.edge_distances(cloud.points).min()))
    h = hausdorff_distance(cloud, _triangle_raster(refs))
    ok = outside <= 1e-9 and h <= 0.02
    return ok, {"max_outside": outside, "hausdorff": h, "points": len(cloud)}, {"hausdorff_at_most": 0.02}, "1e-9 / 0.02", "statistical:derived"


_STARTS = [(0.3, 0.3), (5.0, 5.0), (-2.0, 1.0)]


def check_semiattractor(refs, scale):
    est = estimate_semiattractor(refs.bv.system, _STARTS, OrbitConfig(), 0.02)
    h = hausdorff_distance(est, _triangle_raster(refs))
    return h <= 0.05, {"hausdorff": h, "points": len(est)}, {"hausdorff_at_most": 0.05}, "0.05", "statistical:derived"


def check_invariance(refs, scale):
    s, C = refs.bv.system, refs.bv.hint
    res = {}
    for m in SCALES[scale]["grids"]:
        u = uniform_on_polygon(C, refs.bv.bounds, m)
        res[m] = total_variation(MarkovOperator(s, u.bounds, m)(u), u)
    ms = sorted(res)
    ok = res[ms[-1]] <= 0.02
    ok &= all(res[b] <= 0.75 * res[a] for a, b in zip(ms, ms[1:]))
    return ok, {f"tv_m{m}": r for m, r in res.items()}, {"tv_at_largest_m_at_most": 0.02, "ratio_at_most": 0.75}, "0.02 / 0.75", refs.source("invariant_measure")


def check_stability(refs, scale):
    s, C = refs.bv.system, refs.bv.hint
    m = SCALES[scale]["m"]
    start_box = box(*refs.bv.bounds)
    grid = escape_free_bounds(s, start_box)
    target = uniform_on_polygon(C, grid, m)
    runs = {
        "point_mass": point_mass(grid, m, (0.3, 0.3)),
        "uniform_on_bounds": uniform_on_polygon(start_box, grid, m),
    }
    meas = {"grid": grid}
    ok = True
    limits = {}
    for name, mu0 in runs.items():
        mu, rep = iterate_to_invariance(s, mu0, tol=1e-3, max_iters=500)
        tv = total_variation(mu, target)
        meas[f"tv_{name}"] = tv
        meas[f"escaped_{name}"] = mu.escaped
        ok &= tv <= 0.05 and rep.converged
        limits[name] = mu
    a, b = limits.values()
    meas["tv_between_limits"] = total_variation(a, b)
    ok &= meas["tv_between_limits"] <= 0.05
    return ok, meas, {"tv_at_most": 0.05}, "0.05", refs.source("invariant_measure")


def check_final_example(refs, scale):
    s = refs.final.system
    lips = word_lipschitz(s, 2)
    ok = float(np.abs(np.sort(lips) - np.sort(refs("iterate2_lips"))).max()) <= 1e-12
    target = np.asarray(refs("semiattractor"))
    est = estimate_semiattractor(s, [(0.0, 0.0), (3.0, 3.0)], OrbitConfig(), 0.02)
    dist = float(np.abs(est.points - target).max())
    ok &= dist <= 1e-3
    mu, rep = iterate_to_invariance(s, uniform_on_polygon(box(0, 1, 0, 1), refs.final.bounds, SCALES[scale]["m"]))
    conc = mu.mass_within(target, 0.05)
    ok &= conc >= 0.99
    meas = {"iterate2_lips": lips.tolist(), "semiattractor_max_dev": dist, "mass_near_fixed_point": conc, "average_k2": average_contractivity(s, 2)}
    ok &= abs(meas["average_k2"] - refs("avg_k2")) <= 1e-12
    return ok, meas, {"iterate2_lips": refs("iterate2_lips"), "point": tuple(target), "mass_at_least": 0.99}, "1e-12 / 1e-3 / 0.99", refs.source("iterate2_lips", "semiattractor", "avg_k2")


def check_higher_iterate(refs, scale):
    eps = 0.02
    s = refs.bv.system
    a = estimate_semiattractor(s, _STARTS, OrbitConfig(), eps)
    b = estimate_semiattractor(iterate_system(s, 2), _STARTS, OrbitConfig(), eps)
    h = hausdorff_distance(a, b)
    return h <= 3 * eps, {"hausdorff": h}, {"hausdorff_at_most": 3 * eps}, "3*eps", "empirical:derived"


def check_properties(refs, scale):
    rng = np.random.default_rng(2024)
    mats = rng.normal(size=(1000, 2, 2)) * rng.uniform(0.1, 3.0, size=(1000, 1, 1))
    closed = spectral_norms(mats)
    err_sample = float(np.abs(sampled_norm(mats) / closed - 1).max())
    err_power = float(np.abs(power_iteration_norm(mats) / closed - 1).max())

    # Hausdorff pseudometric on random triples
    worst_sym = worst_tri = 0.0
    for _ in range(50):
        a, b, c = (rng.uniform(-1, 1, size=(int(rng.integers(1, 40)), 2)) for _ in range(3))
        dab, dba = hausdorff_distance(a, b), hausdorff_distance(b, a)
        worst_sym = max(worst_sym, abs(dab - dba))
        worst_tri = max(worst_tri, dab - hausdorff_distance(a, c) - hausdorff_distance(c, b))

    # Markov mass conservation (escape included)
    s = refs.bv.system
    worst_mass = 0.0
    for m in (16, 33):
        op = MarkovOperator(s, refs.bv.bounds, m)
        mu = uniform_on_bounds(refs.bv.bounds, m)
        for _ in range(5):
            mu = op(mu)
            worst_mass = max(worst_mass, abs(mu.total - 1.0))

    # composition / determinant homomorphisms
    worst_det = worst_app = 0.0
    for _ in range(200):
        f = AffineMap(rng.normal(size=(2, 2)), rng.normal(size=2))
        g = AffineMap(rng.normal(size=(2, 2)), rng.normal(size=2))
        v = rng.normal(size=2)
        fg = compose(f, g)
        worst_det = max(worst_det, abs(determinant(fg.linear) - determinant(f.linear) * determinant(g.linear)))
        worst_app = max(worst_app, float(np.abs(fg(v) - f(g(v))).max()))

    meas = {
        "sampled_rel_err": err_sample,
        "power_rel_err": err_power,
        "hausdorff_asym": worst_sym,
        "triangle_excess": worst_tri,
        "mass_drift": worst_mass,
        "det_hom_err": worst_det,
        "compose_err": worst_app,
    }
    ok = (
        err_sample <= 1e-10
        and err_power <= 1e-10
        and worst_sym == 0.0
        and worst_tri <= 1e-12
        and worst_mass <= 1e-12
        and worst_det <= 1e-12
        and worst_app <= 1e-12
    )
    return ok, meas, {"oracle_rel": 1e-10, "others": 1e-12}, "1e-10 / 1e-12", "identity"


CHECKS: Dict[int, tuple] = {
    1: ("Lipschitz constants of second-iterate maps", check_lipschitz),
    2: ("second-iterate average contractivity", check_second_iterate),
    3: ("critical probability by bisection", check_critical),
    4: ("determinants and fibre area law", check_area_law),
    5: ("closed form of A1^n", check_power_closed_form),
    6: ("segment and point fibre witnesses", check_fibre_witnesses),
    7: ("contractive word and fibredness report", check_contractive_word),
    8: ("chaos game stays in and fills the triangle", check_chaos),
    9: ("semiattractor from starts outside the triangle", check_semiattractor),
    10: ("invariance of uniform measure on the triangle", check_invariance),
    11: ("asymptotic stability of the Markov operator", check_stability),
    12: ("final example: Lipschitz list, point attractor, Dirac limit", check_final_example),
    13: ("semiattractor of system and its 2nd iterate agree", check_higher_iterate),
    14: ("property suites", check_properties),
}


def run_check(cid: int, scale: str = "full", overrides: Optional[dict] = None, refs=None) -> Check:
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {sorted(SCALES)}")
    title, fn = CHECKS[cid]
    refs = refs or _Refs(overrides)
    t0 = time.perf_counter()
    try:
        ok, meas, exp, tol, src = fn(refs, scale)
    except Exception as exc:  # a crashing check is a failed check
        ok, meas, exp, tol, src = False, {"error": repr(exc)}, {}, "", ""
    return Check(cid, title, bool(ok), meas, exp, tol, src, time.perf_counter() - t0)


def verify_all(scale: str = "quick", overrides: Optional[dict] = None, only=None) -> VerifyReport:
    refs = _Refs(overrides)
    report = VerifyReport(scale)
    for cid in sorted(CHECKS):
        if only is not None and cid not in only:
            continue
        report.checks.append(run_check(cid, scale, refs=refs))
    return report
