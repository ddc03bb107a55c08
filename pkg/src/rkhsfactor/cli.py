"""Scenario-driven command line runner.

A scenario is a JSON object::

    {
      "name": "hardy-one-zero",
      "task": "synthesize",
      "seed": 1,
      "kernels": {"k": {"variant": "szego"}, "s": {"variant": "szego"}},
      "sample": {"type": "uniform_disc", "n": 8, "radius": 0.9, "extra": [0.5]},
      "subspaces": {"M": {"zeros": [0.5]}},
      "tolerances": {"tol_psd": 1e-10, "tol_rank": 1e-10, "tol": 1e-7},
      "params": {...},
      "expect": [{"metric": "rank_f", "op": "eq", "value": 1}]
    }

Complex numbers are written either as plain numbers or as ``[re, im]`` pairs.
Every task produces a nested ``results`` dictionary; ``expect`` entries refer
to its leaves by dotted path and are the declared checks of the scenario.  A
check's ``value`` may itself be ``{"metric": path}`` to compare two results.  The
process exits with status 0 exactly when every declared check passes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import coeffmodel, kernels, samplespace, sampling
from .beurling import connecting_partial_isometry, synthesize, verify_representation
from .errors import ConfigError, RkhsError, StageError
from .kernels import KernelSpec, SampleSet
from .leech import arias_pipeline, solve
from .multcheck import blaschke_symbol

SCHEMA_VERSION = 1
TASKS = ("kernel-check", "synthesize", "leech", "pipeline", "rootfn", "counterexample")
RANDOM_SAMPLES = ("uniform_disc", "uniform_ball")
_OPS = ("eq", "le", "ge", "lt", "gt", "approx")


# --------------------------------------------------------------------------- config


@dataclass
class Scenario:
    name: str
    task: str
    seed: int | None = None
    kernels: dict = field(default_factory=dict)
    sample: dict | None = None
    subspaces: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    expect: list = field(default_factory=list)
    source: str = ""

    @property
    def tol_psd(self) -> float:
        return float(self.tolerances.get("tol_psd", kernels.DEFAULT_TOL_PSD))

    @property
    def tol_rank(self) -> float:
        return float(self.tolerances.get("tol_rank", kernels.DEFAULT_TOL_RANK))

    @property
    def tol(self) -> float:
        return float(self.tolerances.get("tol", 1e-7))


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_scenario(text: str, name_hint: str = "scenario") -> Scenario:
    """Parse and validate a scenario; errors carry line and field context."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(obj, dict):
        raise ConfigError("scenario must be a JSON object", line=1)

    def bad(key, msg):
        return ConfigError(msg, field=key, line=_line_of(text, key))

    known = {"name", "task", "seed", "kernels", "sample", "subspaces", "tolerances",
             "params", "expect", "description"}
    for key in obj:
        if key not in known:
            raise bad(key, f"unknown field {key!r}")
    task = obj.get("task")
    if task not in TASKS:
        raise bad("task", f"task must be one of {', '.join(TASKS)}")
    seed = obj.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise bad("seed", "seed must be a nonnegative integer")
    for key in ("kernels", "subspaces", "tolerances", "params"):
        if key in obj and not isinstance(obj[key], dict):
            raise bad(key, f"{key} must be an object")
    sample = obj.get("sample")
    if sample is not None:
        if not isinstance(sample, dict) or "type" not in sample:
            raise bad("sample", "sample must be an object with a 'type'")
        if sample["type"] not in ("explicit", "radial_grid") + RANDOM_SAMPLES:
            raise bad("type", f"unknown sample type {sample['type']!r}")
        if sample["type"] in RANDOM_SAMPLES and seed is None:
            raise bad("sample", "random sampling requires a seed")
    for key, spec in obj.get("kernels", {}).items():
        try:
            KernelSpec.from_json(spec)
        except (ValueError, TypeError, KeyError) as exc:
            raise bad(key, f"invalid kernel spec: {exc}") from exc
    for key, val in obj.get("tolerances", {}).items():
        if key not in ("tol_psd", "tol_rank", "tol") or not isinstance(val, (int, float)) \
                or val < 0:
            raise bad(key, "tolerances are tol_psd, tol_rank, tol (nonnegative numbers)")
    expect = obj.get("expect", [])
    if not isinstance(expect, list):
        raise bad("expect", "expect must be a list")
    for e in expect:
        if not isinstance(e, dict) or "metric" not in e or e.get("op") not in _OPS \
                or "value" not in e:
            raise bad("expect", f"each check needs metric, op in {_OPS} and value")
    if task != "counterexample" and task != "rootfn" and sample is None:
        raise bad("task", f"task {task!r} needs a sample")
    return Scenario(name=str(obj.get("name", name_hint)), task=task, seed=seed,
                    kernels=obj.get("kernels", {}), sample=sample,
                    subspaces=obj.get("subspaces", {}), tolerances=obj.get("tolerances", {}),
                    params=obj.get("params", {}), expect=expect, source=text)


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from exc
    return parse_scenario(text, p.stem)


def _cplx(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex number must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def _point(x, dim: int = 1):
    """A disc point is a number or ``[re, im]``; a ball point is a list of ``dim`` such."""
    if dim == 1:
        return _cplx(x)
    if not isinstance(x, list) or len(x) != dim:
        raise ConfigError(f"expected a point with {dim} coordinates, got {x!r}")
    return [_cplx(c) for c in x]


def build_sample(sc: Scenario) -> SampleSet:
    cfg = sc.sample
    t = cfg["type"]
    dim = int(cfg.get("d", 1))
    extra = [_point(x, dim) for x in cfg.get("extra", [])]
    if t == "explicit":
        pts = [_point(x, dim) for x in cfg["points"]] + extra
    elif t == "radial_grid":
        pts = list(sampling.radial_grid(cfg["radii"], cfg["thetas"])) + extra
    elif t == "uniform_disc":
        pts = list(sampling.uniform_disc_points(cfg["n"], sc.seed, cfg.get("radius", 1.0))) + extra
    else:
        pts = list(sampling.uniform_ball_points(cfg["n"], cfg["d"], sc.seed,
                                                cfg.get("radius", 1.0))) + extra
    return SampleSet.from_points(pts, cfg.get("base_index"))


def _kernel(sc: Scenario, key: str, sample: SampleSet):
    if key not in sc.kernels:
        raise ConfigError(f"kernel {key!r} is required for task {sc.task!r}", field=key,
                          line=_line_of(sc.source, "kernels"))
    return kernels.evaluate(KernelSpec.from_json(sc.kernels[key]), sample)


def _subspace(sc: Scenario, key: str, k):
    spec = sc.subspaces.get(key)
    if spec is None:
        raise ConfigError(f"subspace {key!r} is required for task {sc.task!r}", field=key,
                          line=_line_of(sc.source, "subspaces"))
    idx = [int(i) for i in spec.get("zero_indices", [])]
    for z in spec.get("zeros", []):
        try:
            idx.append(k.sample.index_of(_point(z, k.sample.dim)))
        except KeyError as exc:
            raise ConfigError(f"zero {z!r} is not a sample point", field=key,
                              line=_line_of(sc.source, key)) from exc
    cons = samplespace.PointwiseConstraintSpec.zeros(sorted(set(idx)), k.block_dim)
    return samplespace.subspace_from_constraints(k, cons, sc.tol_rank), sorted(set(idx))


# --------------------------------------------------------------------------- tasks


def _f(x) -> float:
    return float(x)


def _modulus_gap(sym, sample, zeros) -> float:
    """``max_i | |sym(x_i)| - |b(x_i)| |`` for a finite Blaschke product ``b``."""
    b = blaschke_symbol(sample, [_cplx(z) for z in zeros])
    got = np.linalg.norm(sym.blocks.reshape(sym.n, -1), axis=1)
    ref = np.abs(b.blocks[:, 0, 0])
    return _f(np.max(np.abs(got - ref)))


def task_kernel_check(sc: Scenario) -> dict:
    sample = build_sample(sc)
    out = {"n_points": sample.n}
    base = sc.sample.get("base_index")
    for key in sorted(sc.kernels):
        k = _kernel(sc, key, sample)
        psd = kernels.is_psd(k, sc.tol_psd)
        entry = {"variant": sc.kernels[key]["variant"], "psd": psd.verdict,
                 "min_eigenvalue": _f(psd.min_eigenvalue)}
        if base is not None:
            entry["normalized"] = kernels.is_normalized(k, base)
        try:
            cnp = kernels.is_cnp(k, base if entry.get("normalized") else None, sc.tol_psd)
            entry.update(cnp=cnp.verdict, cnp_certificate=_f(cnp.certificate))
        except RkhsError as exc:
            entry.update(cnp=False, cnp_certificate=None, cnp_error=str(exc))
        out[key] = entry
    return out


def task_synthesize(sc: Scenario) -> dict:
    sample = build_sample(sc)
    k = _kernel(sc, "k", sample)
    s = _kernel(sc, "s", sample)
    m, zeros = _subspace(sc, "M", k)
    k_m = samplespace.subspace_kernel(m)
    res = synthesize(k_m, s, sc.tol_psd, sc.tol_rank, ambient=k, tol_pi=sc.tol)
    diag = verify_representation(res, s, k, m, tol=sc.tol, tol_rank=sc.tol_rank,
                                 raise_on_failure=False)
    q = kernels.hadamard_quotient(k_m, s).entries
    lam = np.linalg.svd(q, compute_uv=False)
    out = {"n_points": sample.n, "zero_indices": zeros, "subspace_dim": m.dim,
           **res.to_json(include_phi=False),
           "quotient_rank_bruteforce": int(np.count_nonzero(lam > sc.tol_rank * lam[0]))
           if lam.size and lam[0] > 0 else 0,
           "quotient_eigenvalues": [_f(x) for x in res.quotient_eigenvalues],
           "representation": diag.to_json()}
    if "oracle_zeros" in sc.params:
        out["blaschke_modulus_gap"] = _modulus_gap(res.phi, sample, sc.params["oracle_zeros"])
    if sc.params.get("minimality", False):
        conn = connecting_partial_isometry(res.phi, res.phi.pad_columns(1), tol=1e-8,
                                           tol_rank=sc.tol_rank)
        out["minimality"] = {"isometry_defect": conn.isometry_defect,
                             "forward_residual": conn.forward_residual,
                             "backward_residual": conn.backward_residual,
                             "is_isometry": conn.is_isometry}
    if sc.params.get("include_phi", False):
        out["phi"] = res.phi.to_json()
    return out


def task_leech(sc: Scenario) -> dict:
    sample = build_sample(sc)
    k = _kernel(sc, "k", sample)
    s = _kernel(sc, "s", sample)
    m, zm = _subspace(sc, "M", k)
    n_sub, zn = _subspace(sc, "N", k)
    phi = synthesize(samplespace.subspace_kernel(m), s, sc.tol_psd, sc.tol_rank).phi
    psi = synthesize(samplespace.subspace_kernel(n_sub), s, sc.tol_psd, sc.tol_rank).phi
    res = solve(s, phi, psi, sc.tol_psd, sc.tol_rank, sc.tol)
    out = {"n_points": sample.n, "M_zero_indices": zm, "N_zero_indices": zn,
           **res.to_json(include_gamma=sc.params.get("include_gamma", False))}
    if "oracle_zeros" in sc.params:
        out["blaschke_modulus_gap"] = _modulus_gap(res.gamma, sample, sc.params["oracle_zeros"])
    return out


def task_pipeline(sc: Scenario) -> dict:
    sample = build_sample(sc)
    k = _kernel(sc, "k", sample)
    s = _kernel(sc, "s", sample)
    ell = _kernel(sc, "ell", sample) if "ell" in sc.kernels else None
    m, zm = _subspace(sc, "M", k)
    n_sub, zn = _subspace(sc, "N", k)
    res = arias_pipeline(k, s, m, n_sub, sc.tol_psd, sc.tol_rank, sc.tol, ell=ell)
    return {"n_points": sample.n, "M_zero_indices": zm, "N_zero_indices": zn,
            **res.to_json()}


def _generators(sc: Scenario) -> tuple[list[np.ndarray], str]:
    gens, labels = [], []
    for g in sc.params.get("generators", []):
        if "roots" in g:
            c = np.polynomial.polynomial.polyfromroots([_cplx(r) for r in g["roots"]])
        elif "coeffs" in g:
            c = np.array([_cplx(a) for a in g["coeffs"]])
        else:
            raise ConfigError("a generator needs 'roots' or 'coeffs'", field="generators",
                              line=_line_of(sc.source, "generators"))
        gens.append(c)
        labels.append(g.get("label") or "coeffs=" + " ".join(_num(a) for a in c))
    if not gens:
        raise ConfigError("rootfn needs at least one generator", field="generators",
                          line=_line_of(sc.source, "params"))
    return gens, ";".join(labels)


def _num(a: complex) -> str:
    a = complex(a)
    return repr(a.real) if a.imag == 0 else f"{a.real!r}{a.imag:+}j"


def _space(sc: Scenario, degree: int) -> coeffmodel.CoeffSeriesSpace:
    w = sc.params.get("weights", "bergman")
    if isinstance(w, str):
        return coeffmodel.CoeffSeriesSpace.named(w, degree, sc.params.get("alpha"))
    return coeffmodel.CoeffSeriesSpace(np.asarray(w, dtype=float)[:degree + 1])


def task_rootfn(sc: Scenario) -> dict:
    degree = int(sc.params.get("degree", 400))
    space = _space(sc, degree)
    gens, label = _generators(sc)
    thetas = [float(t) for t in sc.params.get("thetas", [0.0])]
    radii = [float(r) for r in sc.params.get("radii", [0.9])]
    sweep = coeffmodel.radial_sweep(space, gens, radii, thetas,
                                    check_stability=sc.params.get("stability", True)
                                    and space.variant != "custom")
    rows = [row for rep in sweep["reports"] for row in rep.rows(label)]
    values = [row["G_value"] for row in rows]
    return {"degree": degree, "generator_spec": label, "subspace_dim": sweep["subspace_dim"],
            "rows": rows, "G_min": min(values), "G_max": max(values),
            "stability_change": sweep["stability_change"],
            "stability_flag": sweep["stability_flag"]}


def task_counterexample(sc: Scenario) -> dict:
    degrees = [int(d) for d in sc.params.get("degrees", [0, 99, 399])]
    num = sc.params.get("weights_num", "hardy")
    den = sc.params.get("weights_den", "bergman")
    rows = []
    for d in degrees:
        sig = coeffmodel.inclusion_sigma_min(d, num, den)
        ref = 1.0 / math.sqrt(d + 1)
        rows.append({"D": d, "sigma_min": sig, "closed_form": ref, "abs_error": abs(sig - ref)})
    return {"weights_num": num, "weights_den": den, "rows": rows,
            "max_abs_error": max((r["abs_error"] for r in rows), default=0.0)}


TASK_FUNCS = {"kernel-check": task_kernel_check, "synthesize": task_synthesize,
              "leech": task_leech, "pipeline": task_pipeline, "rootfn": task_rootfn,
              "counterexample": task_counterexample}


# --------------------------------------------------------------------------- checks


def lookup(results: dict, path: str):
    cur: Any = results
    for part in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        elif isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            raise KeyError(path)
    return cur


def evaluate_check(results: dict, check: dict) -> dict:
    metric, op, target = check["metric"], check["op"], check["value"]
    out = {"metric": metric, "op": op, "value": target}
    if "tol" in check:
        out["tol"] = check["tol"]
    try:
        got = lookup(results, metric)
    except (KeyError, IndexError, ValueError):
        out.update(actual=None, passed=False, reason="metric not found")
        return out
    out["actual"] = got
    if isinstance(target, dict) and "metric" in target:
        try:
            target = lookup(results, target["metric"])
        except (KeyError, IndexError, ValueError):
            out.update(passed=False, reason="reference metric not found")
            return out
        out["resolved_value"] = target
    if got is None:
        passed = False
    elif op == "eq":
        passed = got == target
    elif op == "approx":
        passed = abs(got - target) <= float(check.get("tol", 0.0))
    else:
        passed = {"le": got <= target, "ge": got >= target,
                  "lt": got < target, "gt": got > target}[op]
    out["passed"] = bool(passed)
    return out


def _error_payload(exc: BaseException) -> dict:
    payload = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("certificate", "residual", "min_eigenvalue", "point", "index", "stage",
                 "field", "line", "failures"):
        if hasattr(exc, attr):
            val = getattr(exc, attr)
            payload[attr] = _jsonable(val)
    if isinstance(exc, StageError):
        payload["cause"] = _error_payload(exc.cause)
    return payload


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.complexfloating, complex)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x if x is None or isinstance(x, str) else str(x)


def run(sc: Scenario) -> dict:
    """Execute one scenario and return its report dictionary."""
    report = {"schema_version": SCHEMA_VERSION, "name": sc.name, "task": sc.task,
              "seed": sc.seed,
              "tolerances": {"tol_psd": sc.tol_psd, "tol_rank": sc.tol_rank, "tol": sc.tol}}
    try:
        results = TASK_FUNCS[sc.task](sc)
        error = None
    except (RkhsError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        results, error = {}, _error_payload(exc)
    except (KeyError, TypeError, IndexError) as exc:
        results, error = {}, _error_payload(ConfigError(f"missing or malformed field: {exc}"))
    results = _jsonable(results)
    checks = [evaluate_check(results, c) for c in sc.expect]
    report.update(results=results, error=error, checks=checks,
                  passed=error is None and all(c["passed"] for c in checks))
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True) + "\n"


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["r", "theta", "G_value", "D", "generator_spec"],
                       lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name) or "scenario"


def write_report(report: dict, out_dir: Path | None, fmt: str = "json") -> str:
    """Write (or return, when ``out_dir`` is None) the report in the requested format."""
    if fmt == "csv":
        if report["task"] != "rootfn":
            raise ConfigError("csv output is only available for rootfn sweeps", field="format")
        text = rows_to_csv(report["results"].get("rows", []))
    else:
        text = dumps(report)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{_safe_name(report['name'])}.{fmt}").write_text(text)
    return text


def _apply_overrides(sc: Scenario, args) -> Scenario:
    if getattr(args, "seed", None) is not None:
        sc.seed = args.seed
    if getattr(args, "tol_psd", None) is not None:
        sc.tolerances["tol_psd"] = args.tol_psd
    if getattr(args, "tol_rank", None) is not None:
        sc.tolerances["tol_rank"] = args.tol_rank
    return sc


# --------------------------------------------------------------------------- suite


def _run_file(path: Path, args) -> tuple[dict, dict]:
    try:
        sc = _apply_overrides(load_scenario(path), args)
    except ConfigError as exc:
        report = {"schema_version": SCHEMA_VERSION, "name": path.stem, "task": None,
                  "seed": None, "results": {}, "checks": [], "error": _error_payload(exc),
                  "passed": False}
        return report, {"file": path.name, "name": path.stem, "task": None, "passed": False,
                        "error": str(exc)}
    report = run(sc)
    return report, {"file": path.name, "name": sc.name, "task": sc.task,
                    "passed": report["passed"],
                    "error": report["error"]["message"] if report["error"] else None}


def run_suite(directory: str | Path, out_dir: str | Path | None = None, jobs: int = 1,
              args=None) -> dict:
    """Run every ``*.json`` scenario in ``directory``; one failing file affects only itself."""
    d = Path(directory)
    if not d.is_dir():
        raise ConfigError(f"scenario directory {d} does not exist")
    files = sorted(d.glob("*.json"))
    args = args or argparse.Namespace()
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda p: _run_file(p, args), files))
    out = Path(out_dir) if out_dir is not None else None
    rows = []
    for report, row in results:
        if out is not None:
            # file stem keeps outputs isolated even when scenario names collide
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{_safe_name(row['file'][:-5])}.json").write_text(dumps(report))
        rows.append(row)
    summary = {"schema_version": SCHEMA_VERSION, "scenarios": rows,
               "n_passed": sum(r["passed"] for r in rows), "n_total": len(rows),
               "passed": all(r["passed"] for r in rows)}
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(dumps(summary))
    return summary


def format_table(summary: dict) -> str:
    lines = [f"{'scenario':<40} {'task':<15} result"]
    for r in summary["scenarios"]:
        status = "PASS" if r["passed"] else "FAIL"
        extra = f"  ({r['error']})" if r["error"] else ""
        lines.append(f"{r['name']:<40} {str(r['task']):<15} {status}{extra}")
    lines.append(f"{summary['n_passed']}/{summary['n_total']} scenarios passed")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="directory for report files")
    common.add_argument("--tol-psd", type=float, dest="tol_psd")
    common.add_argument("--tol-rank", type=float, dest="tol_rank")
    common.add_argument("--seed", type=int, help="overrides the scenario seed")

    parser = argparse.ArgumentParser(prog="rkhsfactor",
                                     description="Run kernel factorization scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    for task in TASKS:
        p = sub.add_parser(task, parents=[common], help=f"run a {task} scenario")
        p.add_argument("--config", type=Path, required=True, help="scenario JSON file")
        p.add_argument("--format", choices=("json", "csv"), default="json")
    p = sub.add_parser("suite", parents=[common], help="run a directory of scenarios")
    p.add_argument("directory", type=Path, nargs="?")
    p.add_argument("--config", type=Path, help="scenario directory (alternative to DIR)")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "suite":
            directory = args.directory or args.config
            if directory is None:
                raise ConfigError("suite needs a scenario directory")
            summary = run_suite(directory, args.out, args.jobs, args)
            sys.stdout.write(format_table(summary))
            return 0 if summary["passed"] else 1
        sc = _apply_overrides(load_scenario(args.config), args)
        if sc.task != args.command:
            raise ConfigError(f"scenario task is {sc.task!r}, not {args.command!r}",
                              field="task", line=_line_of(sc.source, "task"))
        report = run(sc)
        text = write_report(report, args.out, args.format)
        if args.out is None:
            sys.stdout.write(text)
        else:
            sys.stdout.write(f"{sc.name}: {'PASS' if report['passed'] else 'FAIL'}\n")
        return 0 if report["passed"] else 1
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
