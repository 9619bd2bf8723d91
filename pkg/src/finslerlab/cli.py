"""Command-line front end: config ingestion, suite orchestration, and
deterministic artifact emission.

Exit codes: 0 all checks pass, 1 at least one inequality margin failed,
2 a hypothesis or smallness threshold was unmet somewhere (not a theorem
failure), 3 malformed configuration.

Worker threads split the run at (catalog entry x base point) granularity;
the direction axis is already batched inside the field builder, so that is
the natural task size.  Results are collected into a fixed task order
before anything is written, which makes every artifact byte-identical
regardless of the worker count.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field as _dfield

import numpy as np

from .catalog import (default_entries, eval_f, make_measure, make_metric,
                      measure_kinds, metric_families, reverse_metric,
                      reversibility_constant)
from .comparison import (FAIL, HYPOTHESIS_UNMET, INFORMATIONAL, PASS,
                         THRESHOLD_UNMET, check_doubling,
                         check_laplacian_comparison, check_norm_relation,
                         check_relative_volume, check_volume_comparison,
                         check_volume_growth, model_functions, riccati_check)
from .curvature import cartan_tensor, fundamental_tensor, ricci_scalar
from .errors import ChartExit, ConfigError, DomainError
from .measure import s_curvature, weighted_ricci
from .numerics import sci
from .polar import direction_grid, polar_field, write_field_csv
from .spectral import (check_iso_bound, coarea_consistency, iso_profile,
                       lambda1_radial, r0_and_constants)

# reference curvature bounds matched exactly by the stock catalog entries
_REFERENCE_K = {
    "euclidean-lebesgue": 0.0,
    "poincare_ball-bh": -1.0,
    "stereographic_sphere-bh": 1.0,
    "minkowski_quartic-bh": 0.0,
    "randers-bh": 0.0,
    "funk-bh": -0.25,
}

# reversibility constants valid over every ball the stock suite touches;
# overstating the constant only weakens the claimed bound, never fakes it
_REFERENCE_LAM = {
    "euclidean-lebesgue": 1.0,
    "poincare_ball-bh": 1.0,
    "stereographic_sphere-bh": 1.0,
    "minkowski_quartic-bh": 1.0,
    "randers-bh": 13.0 / 7.0,
    "funk-bh": 3.5,
}

_FAMILY_SCHEMAS = {
    "euclidean": {},
    "poincare_ball": {"K": "negative real, default -1"},
    "stereographic_sphere": {"K": "positive real, default 1"},
    "minkowski_quartic": {"eps": "quartic coefficient, default 0.1"},
    "randers": {"b": "drift covector of length n with euclidean norm < 1"},
    "funk": {},
}

_MEASURE_SCHEMAS = {
    "lebesgue": {},
    "poly_log_density": {
        "monomials": "list of [coefficient, [exponent per coordinate]]"},
    "busemann_hausdorff": {},
}


# ---------------------------------------------------------------------------
# deterministic JSON
# ---------------------------------------------------------------------------

def _json_text(obj, level: int = 0, sort: bool = False) -> str:
    """JSON with floats in the same fixed scientific format as the CSVs.
    Infinities and NaN (not representable as JSON numbers) become strings."""
    pad = "  " * level
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        keys = sorted(obj) if sort else list(obj)
        inner = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_json_text(obj[k], level + 1, sort)}"
            for k in keys)
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        items = list(obj)
        if not items:
            return "[]"
        inner = ",\n".join(f"{pad}  {_json_text(v, level + 1, sort)}"
                           for v in items)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return sci(x)
    return json.dumps(str(obj))


def _config_hash(raw: dict) -> str:
    return hashlib.sha256(
        _json_text(raw, sort=True).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# config schema
# ---------------------------------------------------------------------------

def _want(raw: dict, key: str, path: str, kind, default=None, required=False):
    if key not in raw:
        if required:
            raise ConfigError(f"{path}.{key}", "required field is missing")
        return default
    val = raw[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{path}.{key}", f"expected a number, got {val!r}")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{path}.{key}",
                              f"expected an integer, got {val!r}")
        return val
    if not isinstance(val, kind):
        raise ConfigError(f"{path}.{key}",
                          f"expected {kind.__name__}, got {type(val).__name__}")
    return val


def _point(val, n: int, path: str) -> list[float]:
    if (not isinstance(val, list) or len(val) != n
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in val)):
        raise ConfigError(path, f"expected a list of {n} numbers, got {val!r}")
    return [float(v) for v in val]


def _aligned(value: float, h: float, path: str) -> float:
    steps = value / h
    if abs(steps - round(steps)) > 1e-9 * max(1.0, abs(steps)):
        raise ConfigError(path,
                          f"radius {value!r} is not a multiple of the grid "
                          f"step {h!r}")
    return value


def _cap_for(K: float) -> float:
    return math.pi / (2.0 * math.sqrt(K)) if K > 0.0 else math.inf


@dataclass(frozen=True)
class RunConfig:
    """One validated metric-measure run: constructed objects plus the raw
    dictionaries they came from (kept for hashing and the summary)."""

    entry_id: str
    metric: object
    measure: object
    metric_raw: dict
    measure_raw: dict
    base_points: list
    grid: dict
    suite: list
    points: list
    output_dir: str
    formats: tuple


def _validate_metric(raw, path: str):
    spec = _want(raw, "metric", path, dict, required=True)
    family = _want(spec, "family", f"{path}.metric", str, required=True)
    if family not in metric_families():
        raise ConfigError(f"{path}.metric.family",
                          f"unknown family {family!r}; known: "
                          f"{metric_families()}")
    n = _want(spec, "n", f"{path}.metric", int, required=True)
    if n < 2:
        raise ConfigError(f"{path}.metric.n", f"dimension must be >= 2, got {n}")
    params = _want(spec, "params", f"{path}.metric", dict, default={})
    try:
        metric = make_metric(family, n, params)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}.metric.params", str(exc)) from exc
    return metric, {"family": family, "n": n, "params": params}


def _validate_measure(raw, path: str):
    spec = _want(raw, "measure", path, dict,
                 default={"kind": "lebesgue", "params": {}})
    kind = _want(spec, "kind", f"{path}.measure", str, required=True)
    if kind not in measure_kinds():
        raise ConfigError(f"{path}.measure.kind",
                          f"unknown kind {kind!r}; known: {measure_kinds()}")
    params = _want(spec, "params", f"{path}.measure", dict, default={})
    try:
        measure = make_measure(kind, params)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}.measure.params", str(exc)) from exc
    return measure, {"kind": kind, "params": params}


def _validate_grid(raw, path: str) -> dict:
    spec = _want(raw, "grids", path, dict, default={})
    h = _want(spec, "h", f"{path}.grids", float, default=0.01)
    r_max = _want(spec, "r_max", f"{path}.grids", float, default=2.0)
    level = _want(spec, "directions", f"{path}.grids", int, default=0)
    if not h > 0.0:
        raise ConfigError(f"{path}.grids.h", f"step must be positive, got {h}")
    if not r_max > 4.0 * h:
        raise ConfigError(f"{path}.grids.r_max",
                          f"need r_max > 4 h, got r_max={r_max}, h={h}")
    if level < 0:
        raise ConfigError(f"{path}.grids.directions",
                          f"refinement level must be >= 0, got {level}")
    return {"h": h, "r_max": r_max, "directions": level}


def _validate_common(item, n, grid, path):
    p = _want(item, "p", path, float, default=2.0)
    if not p > n / 2.0:
        raise ConfigError(f"{path}.p", f"need p > n/2 = {n / 2}, got {p}")
    K = _want(item, "K", path, float, default=0.0)
    theta = _want(item, "theta", path, float, default=0.0)
    if theta < 0.0:
        raise ConfigError(f"{path}.theta", f"need theta >= 0, got {theta}")
    return p, K, theta


def _radius(item, key, n, grid, path, *, default=None, cap=math.inf,
            required=False, top=None):
    val = _want(item, key, path, float, default=default, required=required)
    if val is None:
        return None
    limit = min(grid["r_max"], cap if top is None else top)
    if not 0.0 < val <= limit + 1e-12:
        raise ConfigError(f"{path}.{key}",
                          f"need 0 < {key} <= {limit:.6g}, got {val}")
    return _aligned(val, grid["h"], f"{path}.{key}")


def _v_riccati(item, n, grid, path):
    p, K, theta = _validate_common(item, n, grid, path)
    return {"p": p, "K": K, "theta": theta}


def _v_volume(item, n, grid, path):
    p, K, theta = _validate_common(item, n, grid, path)
    cap = _cap_for(K)
    R = _radius(item, "R", n, grid, path, default=1.0, cap=cap)
    r = _radius(item, "r", n, grid, path, default=0.5 * R, cap=cap)
    if r > R:
        raise ConfigError(f"{path}.r", f"need r <= R, got r={r}, R={R}")
    return {"p": p, "K": K, "theta": theta, "r": r, "R": R}


def _v_doubling(item, n, grid, path):
    p, K, theta = _validate_common(item, n, grid, path)
    slack = _want(item, "slack", path, float, default=2.0)
    if not slack > 1.0:
        raise ConfigError(f"{path}.slack", f"need slack > 1, got {slack}")
    cap = _cap_for(K)
    R = _radius(item, "R", n, grid, path, default=1.0, cap=cap)
    r2 = _radius(item, "r2", n, grid, path, default=R, cap=cap)
    r1 = _radius(item, "r1", n, grid, path, default=0.5 * r2, cap=cap)
    if not r1 <= r2 <= R:
        raise ConfigError(f"{path}.r1",
                          f"need r1 <= r2 <= R, got {r1}, {r2}, {R}")
    return {"p": p, "K": K, "theta": theta, "slack": slack,
            "r1": r1, "r2": r2, "R": R}


def _v_relative(item, n, grid, path):
    p, K, theta = _validate_common(item, n, grid, path)
    cap = _cap_for(K)
    R2 = _radius(item, "R2", n, grid, path, default=1.0, cap=cap)
    R1 = _radius(item, "R1", n, grid, path, default=R2, cap=cap)
    r2 = _radius(item, "r2", n, grid, path, default=0.25 * R1, cap=cap)
    r1 = _radius(item, "r1", n, grid, path, default=r2, cap=cap)
    if not (r1 <= r2 < R1 <= R2):
        raise ConfigError(f"{path}.r1", "need r1 <= r2 < R1 <= R2, got "
                          f"{r1}, {r2}, {R1}, {R2}")
    return {"p": p, "K": K, "theta": theta, "r1": r1, "r2": r2,
            "R1": R1, "R2": R2}


def _v_growth(item, n, grid, path):
    p = _want(item, "p", path, float, default=2.0)
    if not p > n / 2.0:
        raise ConfigError(f"{path}.p", f"need p > n/2 = {n / 2}, got {p}")
    R = _want(item, "R", path, float, default=1.0)
    if R < 1.0:
        raise ConfigError(f"{path}.R", f"growth estimate needs R >= 1, got {R}")
    if R + 1.0 > grid["r_max"] + 1e-12:
        raise ConfigError(f"{path}.R",
                          f"needs the field out to R+1 = {R + 1.0}, but "
                          f"r_max is {grid['r_max']}")
    _aligned(R, grid["h"], f"{path}.R")
    return {"p": p, "R": R}


def _v_norm_relation(item, n, grid, path):
    p, K, theta = _validate_common(item, n, grid, path)
    slack = _want(item, "slack", path, float, default=2.0)
    if not slack > 1.0:
        raise ConfigError(f"{path}.slack", f"need slack > 1, got {slack}")
    cap = _cap_for(K)
    r2 = _radius(item, "r2", n, grid, path, default=1.0, cap=cap)
    r1 = _radius(item, "r1", n, grid, path, default=0.5 * r2, cap=cap)
    if r1 > r2:
        raise ConfigError(f"{path}.r1", f"need r1 <= r2, got {r1}, {r2}")
    return {"p": p, "K": K, "theta": theta, "slack": slack, "r1": r1, "r2": r2}


def _v_coarea(item, n, grid, path):
    R = _radius(item, "R", n, grid, path, default=1.0, required=False)
    h = grid["h"]
    eps = item.get("epsilons")
    if eps is None:
        eps = [16.0 * h, 8.0 * h, 4.0 * h]
    else:
        if (not isinstance(eps, list) or len(eps) != 3
                or any(isinstance(e, bool) or not isinstance(e, (int, float))
                       for e in eps)):
            raise ConfigError(f"{path}.epsilons",
                              "expected three halving ramp widths")
        eps = [float(e) for e in eps]
        if not (abs(eps[0] - 2 * eps[1]) <= 1e-9 * eps[0]
                and abs(eps[1] - 2 * eps[2]) <= 1e-9 * eps[1]):
            raise ConfigError(f"{path}.epsilons",
                              f"widths must halve, got {eps}")
        for e in eps:
            _aligned(e, h, f"{path}.epsilons")
    cells = int(round(eps[0] / h))
    k = int(round(R / h))
    if cells >= k:
        raise ConfigError(f"{path}.epsilons",
                          f"largest width {eps[0]} does not fit inside "
                          f"radius {R}")
    if k + cells > int(round(grid["r_max"] / h)):
        raise ConfigError(f"{path}.epsilons",
                          f"largest width {eps[0]} exceeds the field beyond "
                          f"radius {R}")
    return {"R": R, "epsilons": tuple(eps)}


def _v_iso(item, n, grid, path):
    r = _radius(item, "r", n, grid, path, default=min(0.5, grid["r_max"]),
                top=min(1.0, grid["r_max"]))
    theta = _want(item, "theta", path, float, default=0.0)
    if theta < 0.0:
        raise ConfigError(f"{path}.theta", f"need theta >= 0, got {theta}")
    xi = _want(item, "xi", path, float, default=2.0)
    if not xi > 1.0:
        raise ConfigError(f"{path}.xi", f"need xi > 1, got {xi}")
    lam = _want(item, "lam_f", path, float, default=None)
    if lam is not None and lam < 1.0:
        raise ConfigError(f"{path}.lam_f", f"need lam_f >= 1, got {lam}")
    return {"r": r, "theta": theta, "xi": xi, "lam_f": lam}


def _v_eigen(item, n, grid, path):
    R = _radius(item, "R", n, grid, path, default=min(1.0, grid["r_max"]))
    if int(round(R / grid["h"])) < 4:
        raise ConfigError(f"{path}.R",
                          f"need at least four radial cells inside {R}")
    theta = _want(item, "theta", path, float, default=0.0)
    if theta < 0.0:
        raise ConfigError(f"{path}.theta", f"need theta >= 0, got {theta}")
    xi = _want(item, "xi", path, float, default=2.0)
    if not xi > 1.0:
        raise ConfigError(f"{path}.xi", f"need xi > 1, got {xi}")
    return {"R": R, "theta": theta, "xi": xi}


_CHECKER_SCHEMAS = {
    "riccati": _v_riccati,
    "laplacian": _v_riccati,
    "volume": _v_volume,
    "doubling": _v_doubling,
    "relative_volume": _v_relative,
    "growth": _v_growth,
    "norm_relation": _v_norm_relation,
    "coarea": _v_coarea,
    "iso_bound": _v_iso,
    "eigenvalue": _v_eigen,
}


def _validate_suite(raw, n, grid, path) -> list:
    items = _want(raw, "suite", path, list, default=None)
    if items is None:
        return None
    if not items:
        raise ConfigError(f"{path}.suite", "suite must list at least one check")
    out = []
    for i, item in enumerate(items):
        ipath = f"{path}.suite[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(ipath, f"expected an object, got {item!r}")
        cid = _want(item, "checker", ipath, str, required=True)
        if cid not in _CHECKER_SCHEMAS:
            raise ConfigError(f"{ipath}.checker",
                              f"unknown checker {cid!r}; known: "
                              f"{sorted(_CHECKER_SCHEMAS)}")
        params = _CHECKER_SCHEMAS[cid](item, n, grid, ipath)
        out.append({"checker": cid, **params})
    return out


def _validate_points(raw, n, path) -> list:
    items = _want(raw, "points", path, list, default=None)
    if items is None:
        return None
    out = []
    for i, item in enumerate(items):
        ipath = f"{path}.points[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(ipath, f"expected an object, got {item!r}")
        x = _point(item.get("x"), n, f"{ipath}.x")
        y = _point(item.get("y"), n, f"{ipath}.y")
        if all(v == 0.0 for v in y):
            raise ConfigError(f"{ipath}.y",
                              "zero vector is not an admissible direction")
        out.append({"x": x, "y": y})
    return out


def _validate_config(raw: dict, path: str = "config") -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError(path, "top level must be a JSON object")
    entry_id = _want(raw, "id", path, str, default="run")
    metric, metric_raw = _validate_metric(raw, path)
    n = metric.n
    measure, measure_raw = _validate_measure(raw, path)
    grid = _validate_grid(raw, path)
    bases_raw = _want(raw, "base_points", path, list, default=[[0.0] * n])
    if not bases_raw:
        raise ConfigError(f"{path}.base_points", "needs at least one point")
    bases = [_point(b, n, f"{path}.base_points[{i}]")
             for i, b in enumerate(bases_raw)]
    suite = _validate_suite(raw, n, grid, path)
    points = _validate_points(raw, n, path)
    out_spec = _want(raw, "output", path, dict, default={})
    out_dir = _want(out_spec, "directory", f"{path}.output", str, default=".")
    formats = _want(out_spec, "formats", f"{path}.output", list,
                    default=["csv", "json"])
    for f in formats:
        if f not in ("csv", "json"):
            raise ConfigError(f"{path}.output.formats",
                              f"unknown format {f!r}; known: ['csv', 'json']")
    return RunConfig(entry_id, metric, measure, metric_raw, measure_raw,
                     bases, grid, suite, points, out_dir, tuple(formats))


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(path, str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}",
                          exc.msg) from exc


# ---------------------------------------------------------------------------
# checker execution
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    checker: str
    report: object
    artifacts: list = _dfield(default_factory=list)
    summary: dict = _dfield(default_factory=dict)


def _reversibility_probe(metric, base) -> float:
    """Sampled reversibility constant near the base: the fiber constant at
    the base plus axis offsets.  Sampling matters because the asymmetry of
    a metric can vanish at isolated points (the Funk fiber at the chart
    center is a round ball) while the surrounding geometry stays one-way."""
    pts = [list(base)]
    guard = getattr(metric, "chart_radius", None)
    bounded = guard is not None and math.isfinite(guard)
    off = 0.1 * guard if bounded else 0.1
    for i in range(metric.n):
        for s in (off, -off):
            q = list(base)
            q[i] += s
            if bounded and np.linalg.norm(q) >= 0.85 * guard:
                continue
            pts.append(q)
    return max(reversibility_constant(metric, p) for p in pts)


def _reverse_field_with_backoff(metric, measure, base, r_target, h):
    """Polar field of the reverse metric, retreating from the chart rim.

    Non-reversible metrics can reach the chart boundary at finite reverse
    distance (the reverse Funk metric does); on a ChartExit the radius backs
    off to 90% of the reported exit, grid-aligned, at most three times.
    """
    met = reverse_metric(metric)
    r = r_target
    for _ in range(3):
        try:
            return polar_field(met, measure, base, r_max=r, h=h)
        except ChartExit as exc:
            r = math.floor(0.9 * exc.radius / h) * h
            if r < 4.0 * h:
                raise
    return polar_field(met, measure, base, r_max=r, h=h)


def _run_check(item: dict, field, tol_scale: float) -> CheckResult:
    cid = item["checker"]
    n = field.metric.n
    if cid == "riccati":
        model = model_functions(n, item["K"], item["theta"])
        rep = riccati_check(field, model, item["p"], tol_scale)
        return CheckResult(cid, rep)
    if cid == "laplacian":
        rep = check_laplacian_comparison(field, item["p"], item["K"],
                                         item["theta"], tol_scale)
        return CheckResult(cid, rep)
    if cid == "volume":
        rep = check_volume_comparison(field, item["p"], item["K"],
                                      item["theta"], item["r"], item["R"],
                                      tol_scale)
        return CheckResult(cid, rep)
    if cid == "doubling":
        rep = check_doubling(field, item["p"], item["K"], item["theta"],
                             item["slack"], item["r1"], item["r2"], item["R"],
                             tol_scale)
        return CheckResult(cid, rep)
    if cid == "relative_volume":
        rep = check_relative_volume(field, item["p"], item["K"], item["theta"],
                                    item["r1"], item["r2"], item["R1"],
                                    item["R2"], tol_scale)
        return CheckResult(cid, rep)
    if cid == "growth":
        rep = check_volume_growth(field, item["p"], item["R"], tol_scale)
        return CheckResult(cid, rep)
    if cid == "norm_relation":
        rep = check_norm_relation(field, item["p"], item["K"], item["theta"],
                                  item["slack"], item["r1"], item["r2"],
                                  tol_scale)
        return CheckResult(cid, rep)
    if cid == "coarea":
        rep = coarea_consistency(field, item["R"], item["epsilons"],
                                 tol_scale=tol_scale)
        return CheckResult(cid, rep, summary={
            "nu_plus": rep.extra["nu_plus"], "nu_minus": rep.extra["nu_minus"]})
    if cid == "iso_bound":
        prof = iso_profile(field, item["r"])
        lam = item["lam_f"]
        sampled = lam is None
        if sampled:
            lam = max(1.0, _reversibility_probe(field.metric, field.base))
        constants = r0_and_constants(n, lam, item["theta"], item["xi"])
        rep = check_iso_bound(prof, constants, item["r"], tol_scale=tol_scale)
        return CheckResult(cid, rep,
                           artifacts=[("iso_profile", prof.to_csv)],
                           summary={"infimum": prof.infimum(),
                                    "flat_limit_error":
                                        prof.euclidean_limit_error(),
                                    "Lambda_F": lam,
                                    "Lambda_F_sampled": sampled,
                                    "C_iso": constants["C_iso"]})
    if cid == "eigenvalue":
        R = item["R"]
        rev = None
        if _reversibility_probe(field.metric, field.base) > 1.0 + 1e-6:
            rev = _reverse_field_with_backoff(field.metric, field.measure,
                                              field.base, R, field.h)
            reach = float(rev.r[-1])
            if reach < R - 1e-12:
                # the reverse geometry runs out of chart first; compare both
                # eigenvalues on the largest common ball
                R = reach
        out = lambda1_radial(field, rev, R, theta=item["theta"],
                             xi=item["xi"], tol_scale=tol_scale)
        return CheckResult(cid, out["bound_check"],
                           artifacts=[("eigenprofile",
                                       out["eigenprofile"].to_csv)],
                           summary={"lambda1": out["lambda1"],
                                    "lambda1_reverse": out["lambda1_reverse"],
                                    "radius_used": R})
    raise ConfigError(f"suite checker {cid!r}", "no runner registered")


def _default_suite(entry_id: str, grid: dict, primary: bool) -> list:
    """Stock battery for one base point.  The curvature comparisons and the
    eigenvalue solve run at the primary base only: their cost is dominated
    by per-node direction searches for the Ricci infimum, and repeating
    them at the four nearby offsets of the same entry buys little coverage.
    The search-free measure-geometry checks run everywhere."""
    K = _REFERENCE_K.get(entry_id, 0.0)
    base = {"p": 2.0, "K": K, "theta": 0.0}
    r_cap = min(1.0, grid["r_max"] / 2.0)
    suite = []
    if primary:
        suite += [
            {"checker": "riccati", **base},
            {"checker": "laplacian", **base},
            {"checker": "volume", **base, "r": 0.5 * r_cap, "R": r_cap},
            {"checker": "doubling", **base, "slack": 2.0, "r1": 0.5 * r_cap,
             "r2": r_cap, "R": r_cap},
            {"checker": "norm_relation", **base, "slack": 2.0,
             "r1": 0.5 * r_cap, "r2": r_cap},
        ]
    suite += [
        {"checker": "coarea", "R": r_cap,
         "epsilons": tuple(f * grid["h"] for f in (16.0, 8.0, 4.0))},
        {"checker": "iso_bound", "r": 0.5 * r_cap, "theta": 0.0, "xi": 2.0,
         "lam_f": _REFERENCE_LAM.get(entry_id)},
    ]
    if primary:
        suite.append({"checker": "eigenvalue", "R": r_cap, "theta": 0.0,
                      "xi": 2.0})
    return suite


# ---------------------------------------------------------------------------
# verify orchestration
# ---------------------------------------------------------------------------

@dataclass
class _Task:
    entry_id: str
    metric_raw: dict
    measure_raw: dict
    grid: dict
    base_index: int
    base: list
    suite: list
    tol_scale: float = 1.0


def _task_fields(task: _Task):
    metric = make_metric(task.metric_raw["family"], task.metric_raw["n"],
                         task.metric_raw["params"])
    measure = make_measure(task.measure_raw["kind"],
                           task.measure_raw["params"])
    level = task.grid.get("directions", 0)
    dirs = direction_grid(metric.n, level) if level > 0 else None
    try:
        field = polar_field(metric, measure, task.base, grid=dirs,
                            r_max=task.grid["r_max"], h=task.grid["h"])
    except ChartExit as exc:
        raise ConfigError(
            f"entry {task.entry_id!r} base {task.base}",
            f"grids.r_max {task.grid['r_max']} leaves the chart: {exc}"
        ) from exc
    return [_run_check(item, field, task.tol_scale) for item in task.suite]


def _entry_tasks(entry_id, metric_raw, measure_raw, grid, bases, suite,
                 default_mode: bool) -> list[_Task]:
    tasks = []
    for i, base in enumerate(bases):
        g = dict(grid)
        off = grid.get("r_max_offcenter")
        if off is not None and any(v != 0.0 for v in base):
            g["r_max"] = off
        g.pop("r_max_offcenter", None)
        if default_mode:
            # the eigenvalue solve is rotational around its own base; one
            # base per entry exercises it without quintupling the cost
            items = _default_suite(entry_id, g, eigen=(i == 0))
        else:
            items = suite
        tasks.append(_Task(entry_id, metric_raw, measure_raw, g, i, base,
                           items))
    return tasks


def _status_exit_code(statuses) -> int:
    if FAIL in statuses:
        return 1
    if HYPOTHESIS_UNMET in statuses or THRESHOLD_UNMET in statuses:
        return 2
    return 0


def _filter_extra(extra: dict) -> dict:
    out = {}
    for k, v in extra.items():
        if isinstance(v, (bool, int, float, str, np.integer, np.floating)):
            out[k] = v
        elif isinstance(v, (list, tuple)) and all(
                isinstance(e, (bool, int, float, np.integer, np.floating))
                for e in v):
            out[k] = list(v)
    return out


def _emit_plot_script(path, csv_names: list[str]) -> None:
    lines = [
        "# margin plots for the emitted comparison tables",
        '# usage: gnuplot plots.gp   (writes margins.png next to the CSVs)',
        'set datafile separator ","',
        "set key outside",
        "set xlabel 'r'",
        "set ylabel 'margin'",
        "set terminal pngcairo size 1400,900",
        "set output 'margins.png'",
    ]
    if csv_names:
        plots = ", \\\n  ".join(
            f"'{name}' using 1:4 with linespoints title '{name[:-4]}'"
            for name in csv_names)
        lines.append("plot \\\n  " + plots)
    else:
        lines.append("# no comparison tables were emitted")
    lines.append("")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def _run_verify(args) -> int:
    tol_scale = args.tolerance_scale
    if args.config is not None:
        raw = load_config(args.config)
        cfg = _validate_config(raw)
        entries = [(cfg.entry_id, cfg.metric_raw, cfg.measure_raw,
                    dict(cfg.grid), cfg.base_points, cfg.suite)]
        out_dir = args.out or cfg.output_dir
        formats = cfg.formats
        hash_source = raw
    else:
        stock = default_entries()
        entries = []
        for e in stock:
            grid = {"h": e["grid"]["h"], "r_max": e["grid"]["r_max"],
                    "directions": 0}
            if "r_max_offcenter" in e["grid"]:
                grid["r_max_offcenter"] = e["grid"]["r_max_offcenter"]
            entries.append((e["id"], e["metric"], e["measure"], grid,
                            e["base_points"], None))
        out_dir = args.out or "."
        formats = ("csv", "json")
        hash_source = {"default_catalog": stock}

    tasks = []
    for entry_id, metric_raw, measure_raw, grid, bases, suite in entries:
        default_mode = suite is None
        tasks.extend(_entry_tasks(entry_id, metric_raw, measure_raw, grid,
                                  bases, suite, default_mode))
    for task in tasks:
        task.tol_scale = tol_scale

    os.makedirs(out_dir, exist_ok=True)
    if args.jobs == 1:
        results = [_task_fields(t) for t in tasks]
    else:
        # the per-row curvature searches are pure-Python loops, so real
        # speedup needs processes, not threads
        results = [None] * len(tasks)
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {pool.submit(_task_fields, t): i
                       for i, t in enumerate(tasks)}
            for fut in futures:
                results[futures[fut]] = fut.result()

    # emission happens after the join, in task order: byte-identical output
    # for any worker count
    statuses = []
    runs = []
    csv_names = []
    for task, checks in zip(tasks, results):
        check_blobs = []
        for res in checks:
            rep = res.report
            statuses.append(rep.status)
            stem = f"{task.entry_id}_b{task.base_index}_{res.checker}"
            csv_name = None
            if "csv" in formats and rep.rows:
                csv_name = f"{stem}.csv"
                rep.to_csv(os.path.join(out_dir, csv_name))
                csv_names.append(csv_name)
            if "csv" in formats:
                for suffix, writer in res.artifacts:
                    writer(os.path.join(out_dir, f"{stem}_{suffix}.csv"))
            blob = {"checker": res.checker, "theorem": rep.theorem,
                    "status": rep.status, "hypothesis_ok": rep.hypothesis_ok,
                    "worst_margin": rep.worst_margin() if rep.rows else None,
                    "rows": len(rep.rows), "tol_abs": rep.tol_abs,
                    "tol_rel": rep.tol_rel, "csv": csv_name}
            if res.summary:
                blob["values"] = dict(res.summary)
            extra = _filter_extra(rep.extra)
            if extra:
                blob["extra"] = extra
            check_blobs.append(blob)
            worst = rep.worst_margin() if rep.rows else math.inf
            print(f"[{rep.status:>16}] {task.entry_id} b{task.base_index} "
                  f"{res.checker} worst_margin={worst:.3e}")
        runs.append({"entry": task.entry_id, "base_index": task.base_index,
                     "base": task.base, "grid": task.grid,
                     "metric": task.metric_raw, "measure": task.measure_raw,
                     "checks": check_blobs})

    code = _status_exit_code(statuses)
    counts = {}
    for s in statuses:
        counts[s] = counts.get(s, 0) + 1
    summary = {"tool": "finslerlab verify",
               "config_hash": _config_hash(hash_source),
               "tolerance_scale": tol_scale,
               "formats": list(formats),
               "runs": runs,
               "status_counts": counts,
               "exit_code": code}
    with open(os.path.join(out_dir, "summary.json"), "w",
              encoding="utf-8") as fh:
        fh.write(_json_text(summary) + "\n")
    if args.emit_plot_script:
        _emit_plot_script(os.path.join(out_dir, "plots.gp"), csv_names)
    total = len(statuses)
    print(f"verify: {total} checks, exit {code} "
          f"({', '.join(f'{k}={v}' for k, v in sorted(counts.items()))})")
    return code


# ---------------------------------------------------------------------------
# compute / polar / catalog
# ---------------------------------------------------------------------------

def _run_compute(args) -> int:
    raw = load_config(args.config)
    cfg = _validate_config(raw)
    if cfg.points is None:
        raise ConfigError("config.points", "compute needs a points list")
    n = cfg.metric.n
    met, mea = cfg.metric, cfg.measure
    rows = []
    for i, pt in enumerate(cfg.points):
        x, y = pt["x"], pt["y"]
        try:
            f_val = eval_f(met, x, y)
            g = np.asarray(fundamental_tensor(met, x, y))
            c = np.asarray(cartan_tensor(met, x, y))
            ric = float(np.asarray(ricci_scalar(met, x, y)))
            s_val = float(np.asarray(s_curvature(met, mea, x, y)))
            ric_inf = float(np.asarray(weighted_ricci(met, mea, x, y)))
        except DomainError as exc:
            raise ConfigError(f"config.points[{i}]", str(exc)) from exc
        rows.append((x, y, float(f_val), g.reshape(-1), c.reshape(-1),
                     ric, s_val, ric_inf))

    out_dir = args.out or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    header = ([f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)]
              + ["F"]
              + [f"g{i}{j}" for i in range(n) for j in range(n)]
              + [f"C{i}{j}{k}" for i in range(n) for j in range(n)
                 for k in range(n)]
              + ["ric", "S", "ric_inf"])
    csv_path = os.path.join(out_dir, "compute.csv")
    if "csv" in cfg.formats:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for x, y, f_val, g, c, ric, s_val, ric_inf in rows:
                vals = ([*x, *y, f_val, *g.tolist(), *c.tolist(), ric, s_val,
                         ric_inf])
                fh.write(",".join(sci(v) for v in vals) + "\n")
    summary = {"tool": "finslerlab compute",
               "config_hash": _config_hash(raw),
               "metric": cfg.metric_raw, "measure": cfg.measure_raw,
               "n_points": len(rows),
               "csv": "compute.csv" if "csv" in cfg.formats else None,
               "exit_code": 0}
    with open(os.path.join(out_dir, "summary.json"), "w",
              encoding="utf-8") as fh:
        fh.write(_json_text(summary) + "\n")
    print(f"compute: {len(rows)} points -> "
          f"{csv_path if 'csv' in cfg.formats else 'summary.json'}")
    return 0


def _run_polar(args) -> int:
    raw = load_config(args.config)
    cfg = _validate_config(raw)
    out_dir = args.out or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)

    level = cfg.grid.get("directions", 0)
    dirs = direction_grid(cfg.metric.n, level) if level > 0 else None

    def build(index_base):
        i, base = index_base
        try:
            return polar_field(cfg.metric, cfg.measure, base, grid=dirs,
                               r_max=cfg.grid["r_max"], h=cfg.grid["h"])
        except ChartExit as exc:
            raise ConfigError(f"config.base_points[{i}]",
                              f"grids.r_max {cfg.grid['r_max']} leaves the "
                              f"chart: {exc}") from exc

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        fields = list(pool.map(build, enumerate(cfg.base_points)))

    names = []
    for i, field in enumerate(fields):
        name = f"polar_b{i}.csv"
        if "csv" in cfg.formats:
            write_field_csv(field, os.path.join(out_dir, name))
            names.append(name)
    summary = {"tool": "finslerlab polar",
               "config_hash": _config_hash(raw),
               "metric": cfg.metric_raw, "measure": cfg.measure_raw,
               "grid": cfg.grid,
               "directions": int(len(fields[0].grid)),
               "bases": cfg.base_points,
               "csv": names, "exit_code": 0}
    with open(os.path.join(out_dir, "summary.json"), "w",
              encoding="utf-8") as fh:
        fh.write(_json_text(summary) + "\n")
    print(f"polar: {len(fields)} fields -> {out_dir}")
    return 0


def _run_catalog(args) -> int:
    doc = {"metric_families": {f: {"n": "integer >= 2",
                                   "params": _FAMILY_SCHEMAS[f]}
                               for f in metric_families()},
           "measure_kinds": {k: {"params": _MEASURE_SCHEMAS[k]}
                             for k in measure_kinds()},
           "checkers": sorted(_CHECKER_SCHEMAS),
           "default_entries": default_entries()}
    text = _json_text(doc) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "catalog.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finslerlab",
        description="Finsler metric-measure geometry workbench")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required,
                       help="path to a JSON run configuration")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker threads (default: available parallelism)")
        p.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
        p.add_argument("--tolerance-scale", type=float, default=1.0,
                       dest="tolerance_scale",
                       help="multiplies every checker tolerance")

    p = sub.add_parser("compute",
                       help="pointwise F, g, Cartan, Ric, S, Ric_inf")
    common(p, True)
    p = sub.add_parser("polar", help="geodesic polar field tables")
    common(p, True)
    p = sub.add_parser("verify",
                       help="run comparison checkers (default: stock catalog)")
    common(p, False)
    p.add_argument("--emit-plot-script", action="store_true",
                   help="write a gnuplot script next to the CSV tables")
    p = sub.add_parser("catalog",
                       help="list metric/measure families and schemas")
    p.add_argument("--out", default=None,
                   help="also write catalog.json to this directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.subcommand in ("compute", "polar", "verify"):
            if args.jobs < 1:
                raise ConfigError("flags.jobs",
                                  f"need at least one worker, got {args.jobs}")
            if not args.tolerance_scale > 0.0:
                raise ConfigError("flags.tolerance-scale",
                                  f"must be positive, got "
                                  f"{args.tolerance_scale}")
        if args.subcommand == "compute":
            return _run_compute(args)
        if args.subcommand == "polar":
            return _run_polar(args)
        if args.subcommand == "verify":
            return _run_verify(args)
        return _run_catalog(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
