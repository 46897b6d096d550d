"""Declarative experiment scenarios: six runner kinds, JSON reports, and a
deterministic CSV summary (timings go to a separate metadata file so
summaries are byte-reproducible)."""
from __future__ import annotations

import csv
import json
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import certificates as cert_mod
from . import cones as cone_mod
from .core import GammaSet, LinearMap, OperatorSet, hausdorff_distance, \
    hull_membership_residual
from .fields import make_field, make_map
from .fixtures import fixture_by_name
from .nonsmooth import bracket_flow_direction, clarke_jacobian_estimate, \
    set_lie_bracket_estimate
from .separation import (
    NOT_LOCALLY_SEPARATED,
    SurjectivityError,
    audit_z_ignoring,
    local_separation_probe,
    open_mapping_probe,
    separation_verdict,
)

PASS = "PASS"
FAIL = "FAIL"
FAILED = "FAILED"  # runtime error inside the scenario


class ConfigError(ValueError):
    """The scenario config is malformed or names an unknown catalog key."""


@dataclass
class Scenario:
    name: str
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    tolerances: dict = field(default_factory=dict)

    @staticmethod
    def from_jsonable(obj: dict) -> "Scenario":
        try:
            return Scenario(obj["name"], obj["kind"],
                            dict(obj.get("params", {})),
                            int(obj.get("seed", 0)),
                            dict(obj.get("tolerances", {})))
        except KeyError as exc:
            raise ConfigError(f"scenario entry missing key {exc}") from exc


@dataclass
class ScenarioResult:
    name: str
    kind: str
    verdict: str
    metric_name: str
    metric_value: float
    report: dict
    runtime_ms: float

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


# ---------------------------------------------------------------------------
# runners

def run_cone_duality(pairs: int = 1000, dims=(2, 3, 4, 5),
                     seed: int = 0) -> dict:
    """Random-cone corpus: duality (transversal XOR separable) and the
    trichotomy's internal consistency."""
    rng = np.random.default_rng(seed)
    xor_failures = []
    trichotomy_failures = []
    complementary_checked = 0
    counts = {}
    for i in range(pairs):
        n = int(dims[i % len(dims)])

        def random_cone():
            k = int(rng.integers(1, n + 3))
            gens = rng.normal(size=(k, n))
            if rng.uniform() < 0.25:
                # force a subspace so the complementary branch is exercised
                r = int(rng.integers(1, n))
                basis = rng.normal(size=(r, n))
                gens = np.vstack([basis, -basis])
            if rng.uniform() < 0.15:
                gens = np.vstack([gens, -gens])  # positively spanning-ish
            return cone_mod.conic_hull(gens, n)

        k1, k2 = random_cone(), random_cone()
        transversal = cone_mod.is_transversal(k1, k2)
        cert = cone_mod.separating_functional(k1, k2)
        if transversal == (cert is not None):
            xor_failures.append({"index": i, "k1": k1.to_jsonable(),
                                 "k2": k2.to_jsonable(),
                                 "transversal": transversal})
        if cert is not None and not cert.validate(k1, k2):
            xor_failures.append({"index": i, "k1": k1.to_jsonable(),
                                 "k2": k2.to_jsonable(),
                                 "invalid_certificate": True})
        try:
            verdict = cone_mod.classify_pair(k1, k2)
        except cone_mod.ConsistencyError as exc:
            trichotomy_failures.append({"index": i, "error": str(exc),
                                        "k1": k1.to_jsonable(),
                                        "k2": k2.to_jsonable()})
            continue
        counts[verdict] = counts.get(verdict, 0) + 1
        consistent = (verdict == cone_mod.LINEARLY_SEPARABLE) == (not transversal)
        if not consistent:
            trichotomy_failures.append({"index": i, "verdict": verdict,
                                        "transversal": transversal})
        if verdict == cone_mod.COMPLEMENTARY_SUBSPACES:
            complementary_checked += 1
            stacked = np.vstack([k1.generators, k2.generators])
            rank = int(np.linalg.matrix_rank(stacked, tol=1e-8))
            point = cone_mod._nontrivial_intersection_point(k1, k2)
            if rank != n or point is not None:
                trichotomy_failures.append(
                    {"index": i, "verdict": verdict, "rank": rank,
                     "nontrivial_point": None if point is None
                     else point.tolist()})
    return {
        "pairs": pairs,
        "xor_holds": pairs - len(xor_failures),
        "xor_failures": xor_failures[:10],
        "trichotomy_failures": trichotomy_failures[:10],
        "trichotomy_consistent": len(trichotomy_failures) == 0,
        "complementary_checked": complementary_checked,
        "verdict_counts": counts,
    }


def _run_cone_duality_scenario(sc: Scenario) -> tuple:
    p = sc.params
    report = run_cone_duality(int(p.get("pairs", 1000)),
                              tuple(p.get("dims", (2, 3, 4, 5))), sc.seed)
    max_fail = int(p.get("max_xor_failures", 1))
    ok = (report["pairs"] - report["xor_holds"]) <= max_fail \
        and report["trichotomy_consistent"]
    return ok, "xor_holds_fraction", report["xor_holds"] / report["pairs"], report


def _build_lambda(spec_list, convex_closure=True) -> OperatorSet:
    return OperatorSet.from_matrices(spec_list, convex_closure=convex_closure)


_CERTIFICATE_CATALOG = ("absvalue",)


def _run_certificate_verify(sc: Scenario) -> tuple:
    p = sc.params
    key = p.get("certificate", "absvalue")
    if key not in _CERTIFICATE_CATALOG:
        raise ConfigError(f"unknown certificate catalog key {key!r}")
    cert = cert_mod.absvalue_qdq()
    if "lambda_generators" in p:
        cert.lam = _build_lambda(p["lambda_generators"])
    deltas = p.get("delta_grid", list(cert_mod.DEFAULT_DELTA_GRID))
    points = int(p.get("points_per_delta", 200))
    F = make_map("abs1d")
    report = cert_mod.verify_certificate(F, cert, deltas, points, seed=sc.seed)
    out = report.to_jsonable()
    out["lambda"] = cert.lam.to_jsonable()
    return report.accepted, "violations", float(len(report.worst_violations)), out


def _run_clarke_estimate(sc: Scenario) -> tuple:
    p = sc.params
    F = make_map(p.get("map", "abs1d"))
    est = clarke_jacobian_estimate(
        F, p.get("x_bar", [0.0]), float(p.get("radius", 1e-3)),
        int(p.get("samples", 10000)), sc.seed)
    expected = _build_lambda(p["expected_generators"])
    dist = hausdorff_distance(est, expected)
    tol = float(sc.tolerances.get("hausdorff", p.get("tol", 1e-2)))
    report = {"estimate": est.to_jsonable(), "expected": expected.to_jsonable(),
              "hausdorff": dist, "tol": tol}
    return dist <= tol, "hausdorff", dist, report


def _run_bracket_convergence(sc: Scenario) -> tuple:
    p = sc.params
    mode = p.get("mode", "smooth")
    if mode == "smooth":
        A = np.asarray(p["A"], dtype=float)
        B = np.asarray(p["B"], dtype=float)
        q = np.asarray(p["q"], dtype=float)
        f = make_field("linear", {"matrix": A})
        g = make_field("linear", {"matrix": B})
        target = (B @ A - A @ B) @ q
        errors = []
        for t in p.get("t_values", (1e-1, 5e-2, 2.5e-2)):
            d = bracket_flow_direction(f, g, q, t * t)
            errors.append(float(np.linalg.norm(d - target)))
        ratios = [a / b for a, b in zip(errors, errors[1:]) if b > 0]
        lo, hi = p.get("ratio_range", (1.6, 2.4))
        ok = bool(ratios) and all(lo <= r <= hi for r in ratios)
        report = {"errors": errors, "ratios": ratios,
                  "target": target.tolist()}
        metric = min(ratios) if ratios else float("nan")
        return ok, "richardson_ratio", float(metric), report
    if mode == "nonsmooth":
        f = make_field(p["f"], p.get("f_params"))
        g = make_field(p["g"], p.get("g_params"))
        q = np.asarray(p.get("q", np.zeros(f.dimension)), dtype=float)
        eps = float(p.get("eps", 1e-4))
        est = set_lie_bracket_estimate(
            f, g, q, float(p.get("radius", 1e-3)),
            int(p.get("samples", 2000)), sc.seed)
        direction = bracket_flow_direction(f, g, q, eps)
        dist = hull_membership_residual(direction, est.flat_generators())
        report = {"direction": direction.tolist(),
                  "estimate": est.to_jsonable(), "dist_to_estimate": dist}
        ok = dist <= float(sc.tolerances.get("dist", p.get("tol", 5e-2)))
        if "expected_direction" in p:
            exp = np.asarray(p["expected_direction"], dtype=float)
            dir_err = float(np.linalg.norm(direction - exp))
            report["direction_error"] = dir_err
            ok = ok and dir_err <= float(p.get("direction_tol", 1e-3))
        if "expected_generators" in p:
            expected = OperatorSet.from_vectors(p["expected_generators"],
                                                convex_closure=True)
            hd = hausdorff_distance(est, expected)
            report["hausdorff_to_expected"] = hd
            ok = ok and hd <= float(p.get("set_tol", 1e-2))
        return ok, "dist_to_estimate", dist, report
    raise ConfigError(f"unknown bracket mode {mode!r}")


def _run_open_mapping(sc: Scenario) -> tuple:
    p = sc.params
    F = make_map(p.get("map", "fold_sum"), p.get("map_params"))
    lam = _build_lambda(p["lambda_generators"])
    gamma = GammaSet.full_space(int(p.get("domain_dimension", 2)))
    try:
        report = open_mapping_probe(
            F, p.get("x_bar", [0.0, 0.0]), p.get("y_bar", [0.0]), gamma, lam,
            float(p["a"]), float(p["beta"]),
            int(p.get("target_grid", 10)),
            int(p.get("domain_samples", 20000)), sc.seed)
    except SurjectivityError as exc:
        expected = p.get("expect", "pass") == "precondition_error"
        return expected, "covered_fraction", 0.0, {
            "precondition_error": str(exc)}
    ok = report.passed and p.get("expect", "pass") == "pass"
    return ok, "covered_fraction", report.covered_fraction, \
        report.to_jsonable()


def _run_separation_fixture(sc: Scenario) -> tuple:
    p = sc.params
    fixture = fixture_by_name(p["fixture"])
    verdict = separation_verdict(fixture.k1, fixture.k2)
    probe = local_separation_probe(
        fixture.sampler1, fixture.sampler2, fixture.z, fixture.radius,
        int(p.get("samples", 2000)), sc.seed)
    corroborated = True
    if verdict == NOT_LOCALLY_SEPARATED:
        corroborated = probe["common_point"] is not None
    audit_ok = True
    if fixture.k1.z_ignoring and fixture.z_ignoring_family is not None:
        audit_ok = audit_z_ignoring(
            fixture.z_ignoring_family, GammaSet.full_space(1), fixture.z,
            seed=sc.seed)
    report = {
        "fixture": fixture.name, "verdict": verdict,
        "separated_at_resolution": probe["separated_at_resolution"],
        "common_point": None if probe["common_point"] is None
        else probe["common_point"].tolist(),
        "z_ignoring_audit": audit_ok, "note": fixture.note,
    }
    ok = corroborated and audit_ok
    return ok, "verdict_fired", 1.0 if verdict == NOT_LOCALLY_SEPARATED else 0.0, \
        report


_RUNNERS = {
    "ConeDuality": _run_cone_duality_scenario,
    "CertificateVerify": _run_certificate_verify,
    "ClarkeEstimate": _run_clarke_estimate,
    "BracketConvergence": _run_bracket_convergence,
    "OpenMappingProbe": _run_open_mapping,
    "SeparationFixture": _run_separation_fixture,
}


def run_scenario(sc: Scenario) -> ScenarioResult:
    if sc.kind not in _RUNNERS:
        raise ConfigError(f"unknown scenario kind {sc.kind!r}")
    start = time.perf_counter()
    try:
        ok, metric_name, metric_value, report = _RUNNERS[sc.kind](sc)
        verdict = PASS if ok else FAIL
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(
            f"scenario {sc.name!r}: unknown or missing key {exc}") from exc
    except Exception as exc:  # captured: the run continues
        verdict = FAILED
        metric_name, metric_value = "error", float("nan")
        report = {"error": str(exc), "traceback": traceback.format_exc()}
    runtime_ms = (time.perf_counter() - start) * 1e3
    return ScenarioResult(sc.name, sc.kind, verdict, metric_name,
                          metric_value, report, runtime_ms)


# ---------------------------------------------------------------------------
# orchestration

def load_config(config_path) -> list:
    try:
        obj = json.loads(Path(config_path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc
    scenarios = [Scenario.from_jsonable(s) for s in obj.get("scenarios", [])]
    names = [s.name for s in scenarios]
    if len(names) != len(set(names)):
        raise ConfigError("scenario names must be unique")
    return scenarios


def _fmt(x: float) -> str:
    return "%.12g" % x


def run_scenarios(config_path, out_dir, parallel: bool = False,
                  seed_override: int | None = None,
                  name_filter: str | None = None) -> int:
    scenarios = load_config(config_path)
    if name_filter is not None:
        scenarios = [s for s in scenarios if name_filter in s.name]
    if seed_override is not None:
        for s in scenarios:
            s.seed = seed_override
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if parallel:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(run_scenario, scenarios))
    else:
        results = [run_scenario(s) for s in scenarios]
    results.sort(key=lambda r: r.name)

    for r in results:
        payload = {"name": r.name, "kind": r.kind, "verdict": r.verdict,
                   "metric_name": r.metric_name,
                   "metric_value": r.metric_value, "report": r.report}
        (out / f"{r.name}.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")

    with (out / "summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "kind", "verdict", "metric_name",
                    "metric_value"])
        for r in results:
            w.writerow([r.name, r.kind, r.verdict, r.metric_name,
                        _fmt(r.metric_value)])
    with (out / "meta.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "runtime_ms", "timestamp"])
        stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
        for r in results:
            w.writerow([r.name, _fmt(r.runtime_ms), stamp])

    return 0 if all(r.passed for r in results) else 1
