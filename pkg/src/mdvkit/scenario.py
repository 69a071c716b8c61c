"""Scenario and report files: schema parsing, deterministic JSON, atomic writes.

Every floating-point number in a report is serialized as a decimal string with
17 significant digits, which round-trips float64 exactly; reports carry no
timestamps, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import verify
from .displacement import DEFAULT_MAX_ITER, DEFAULT_TOL, DisplacementEstimate
from .errors import ValidationError
from .numeric import AffineSubspace, orthonormal_range_basis
from .operators import (
    AffineMap,
    Composition,
    ConvexCombination,
    GradientStep,
    MonotoneAffine,
    Operator,
    ReflectedResolvent,
    Resolvent,
    SetProjector,
    cocoercivity_modulus,
)
from .sets import AffineSet, Ball, Box, ConvexSet, Halfspace, Singleton

SCHEMA_VERSION = 1


def fmt_float(x: float) -> str:
    """17-significant-digit decimal string (exact float64 round trip)."""
    return format(float(x), ".17g")


def stringify_numbers(obj):
    """Recursively replace floats by 17-digit decimal strings (ints/bools kept)."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, np.ndarray):
        return [stringify_numbers(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): stringify_numbers(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [stringify_numbers(v) for v in obj]
    return obj


def _fail(path: str, message: str):
    raise ValidationError(f"{path}: {message}")


def _get_number(node, path) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        _fail(path, f"expected a number, got {type(node).__name__}")
    value = float(node)
    if not np.isfinite(value):
        _fail(path, "number must be finite")
    return value


def _get_vector(node, path, dim=None) -> np.ndarray:
    if not isinstance(node, list) or not node:
        _fail(path, "expected a nonempty array of numbers")
    vec = np.array([_get_number(v, f"{path}[{i}]") for i, v in enumerate(node)])
    if dim is not None and vec.size != dim:
        _fail(path, f"expected {dim} entries, got {vec.size}")
    return vec


def _get_matrix(node, path, dim=None) -> np.ndarray:
    if not isinstance(node, list) or not node:
        _fail(path, "expected a nonempty array of rows")
    rows = [_get_vector(r, f"{path}[{i}]") for i, r in enumerate(node)]
    widths = {r.size for r in rows}
    if len(widths) != 1:
        _fail(path, "rows must share one length")
    mat = np.vstack(rows)
    if dim is not None and mat.shape != (dim, dim):
        _fail(path, f"expected a {dim}x{dim} matrix, got {mat.shape[0]}x{mat.shape[1]}")
    return mat


def set_from_spec(node, dim: int, path: str) -> ConvexSet:
    """Convex-set grammar: box, ball, halfspace, affine_subspace, singleton."""
    if not isinstance(node, dict) or len(node) != 1:
        _fail(path, "expected an object with exactly one set kind")
    kind, body = next(iter(node.items()))
    if kind == "box":
        return Box(_get_vector(body.get("lo"), f"{path}.box.lo", dim),
                   _get_vector(body.get("hi"), f"{path}.box.hi", dim))
    if kind == "ball":
        return Ball(_get_vector(body.get("center"), f"{path}.ball.center", dim),
                    _get_number(body.get("radius"), f"{path}.ball.radius"))
    if kind == "halfspace":
        return Halfspace(_get_vector(body.get("normal"), f"{path}.halfspace.normal", dim),
                         _get_number(body.get("offset"), f"{path}.halfspace.offset"))
    if kind == "affine_subspace":
        base = _get_vector(body.get("base"), f"{path}.affine_subspace.base", dim)
        vectors = body.get("basis", [])
        if not isinstance(vectors, list):
            _fail(path, "affine_subspace.basis must be an array of vectors")
        if vectors:
            spanning = np.column_stack(
                [_get_vector(v, f"{path}.affine_subspace.basis[{i}]", dim)
                 for i, v in enumerate(vectors)])
            basis = orthonormal_range_basis(spanning)
        else:
            basis = None
        return AffineSet(AffineSubspace(base, basis))
    if kind == "singleton":
        return Singleton(_get_vector(body.get("point"), f"{path}.singleton.point", dim))
    _fail(path, f"unknown set kind {kind!r}")


def monotone_from_spec(node, dim: int, path: str) -> MonotoneAffine:
    if not isinstance(node, dict):
        _fail(path, "expected an object with Q and q")
    return MonotoneAffine(_get_matrix(node.get("Q"), f"{path}.Q", dim),
                          _get_vector(node.get("q"), f"{path}.q", dim))


def operator_from_spec(node, dim: int, path: str = "operator") -> Operator:
    """Operator grammar: affine, projector, compose, combo, resolvent, reflected, gradstep.

    ``compose`` lists parts innermost-first (the first entry is applied first).
    """
    if not isinstance(node, dict) or len(node) != 1:
        _fail(path, "expected an object with exactly one operator kind")
    kind, body = next(iter(node.items()))
    if kind == "affine":
        return AffineMap(_get_matrix(body.get("M"), f"{path}.affine.M", dim),
                         _get_vector(body.get("b"), f"{path}.affine.b", dim))
    if kind == "projector":
        return SetProjector(set_from_spec(body, dim, f"{path}.projector"))
    if kind == "compose":
        if not isinstance(body, list) or not body:
            _fail(path, "compose expects a nonempty array of operators")
        return Composition([operator_from_spec(part, dim, f"{path}.compose[{i}]")
                            for i, part in enumerate(body)])
    if kind == "combo":
        if not isinstance(body, dict):
            _fail(path, "combo expects an object with weights and parts")
        weights = _get_vector(body.get("weights"), f"{path}.combo.weights")
        parts = body.get("parts")
        if not isinstance(parts, list) or len(parts) != weights.size:
            _fail(path, "combo needs one part per weight")
        return ConvexCombination(weights, [operator_from_spec(p, dim, f"{path}.combo.parts[{i}]")
                                           for i, p in enumerate(parts)])
    if kind == "resolvent":
        return Resolvent(monotone_from_spec(body, dim, f"{path}.resolvent"))
    if kind == "reflected":
        return ReflectedResolvent(monotone_from_spec(body, dim, f"{path}.reflected"))
    if kind == "gradstep":
        if not isinstance(body, dict):
            _fail(path, "gradstep expects an object with Q, q, step")
        return GradientStep(_get_matrix(body.get("Q"), f"{path}.gradstep.Q", dim),
                            _get_vector(body.get("q"), f"{path}.gradstep.q", dim),
                            _get_number(body.get("step"), f"{path}.gradstep.step"))
    _fail(path, f"unknown operator kind {kind!r}")


def operator_to_spec(op: Operator) -> dict:
    """Inverse of :func:`operator_from_spec` (sets render by their parameters)."""
    if isinstance(op, AffineMap):
        return {"affine": {"M": op.M.tolist(), "b": op.b.tolist()}}
    if isinstance(op, SetProjector):
        s = op.set
        if isinstance(s, Box):
            body = {"box": {"lo": s.lo.tolist(), "hi": s.hi.tolist()}}
        elif isinstance(s, Ball):
            body = {"ball": {"center": s.center.tolist(), "radius": s.radius}}
        elif isinstance(s, Halfspace):
            body = {"halfspace": {"normal": s.normal.tolist(), "offset": s.offset}}
        elif isinstance(s, AffineSet):
            body = {"affine_subspace": {"base": s.subspace.base.tolist(),
                                        "basis": s.subspace.basis.T.tolist()}}
        elif isinstance(s, Singleton):
            body = {"singleton": {"point": s.point.tolist()}}
        else:  # pragma: no cover - exhaustive over shipped sets
            raise ValidationError(f"unknown set variant {type(s).__name__}")
        return {"projector": body}
    if isinstance(op, Composition):
        return {"compose": [operator_to_spec(p) for p in op.parts]}
    if isinstance(op, ConvexCombination):
        return {"combo": {"weights": op.weights.tolist(),
                          "parts": [operator_to_spec(p) for p in op.parts]}}
    if isinstance(op, Resolvent):
        return {"resolvent": {"Q": op.operator.Q.tolist(), "q": op.operator.q.tolist()}}
    if isinstance(op, ReflectedResolvent):
        return {"reflected": {"Q": op.operator.Q.tolist(), "q": op.operator.q.tolist()}}
    if isinstance(op, GradientStep):
        return {"gradstep": {"Q": op.Q.tolist(), "q": op.q.tolist(), "step": op.step}}
    raise ValidationError(f"unknown operator variant {type(op).__name__}")


KNOWN_CHECKS = (
    "range_formula_composition",
    "permutation_displacement",
    "norm_bound_composition",
    "cyclic_norm",
    "noncyclic_counterexample",
    "three_op_closed_form",
    "convex_combination",
    "zero_sum_corollary",
    "cocoercive_averaged_equivalence",
    "brezis_haraux_affine",
    "translation_formula",
    "range_identity_reflected",
    "projected_gradient_bound",
)


@dataclass
class Scenario:
    """A named, seeded problem instance: operators plus optional checks."""

    name: str
    dim: int
    seed: int
    operators: list[Operator]
    checks: list[dict] = field(default_factory=list)
    estimator: dict = field(default_factory=dict)


def scenario_from_dict(raw: dict, path: str = "scenario") -> Scenario:
    if not isinstance(raw, dict):
        _fail(path, "scenario file must hold a JSON object")
    name = raw.get("name", "scenario")
    if not isinstance(name, str):
        _fail(f"{path}.name", "must be a string")
    dim = raw.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        _fail(f"{path}.dim", "must be a positive integer")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        _fail(f"{path}.seed", "must be an integer")
    ops_node = raw.get("operators", [])
    if not isinstance(ops_node, list):
        _fail(f"{path}.operators", "must be an array")
    operators = [operator_from_spec(node, dim, f"{path}.operators[{i}]")
                 for i, node in enumerate(ops_node)]
    checks_node = raw.get("checks", [])
    if not isinstance(checks_node, list):
        _fail(f"{path}.checks", "must be an array")
    checks = []
    for i, node in enumerate(checks_node):
        if not isinstance(node, dict) or not isinstance(node.get("name"), str):
            _fail(f"{path}.checks[{i}]", "each check needs a string 'name'")
        if node["name"] not in KNOWN_CHECKS:
            _fail(f"{path}.checks[{i}].name",
                  f"unknown check {node['name']!r}; known: {', '.join(KNOWN_CHECKS)}")
        checks.append(dict(node))
    estimator = raw.get("estimator", {})
    if not isinstance(estimator, dict):
        _fail(f"{path}.estimator", "must be an object")
    for key in estimator:
        if key not in ("x0", "max_iter", "tol"):
            _fail(f"{path}.estimator.{key}", "unknown estimator option")
    return Scenario(name=name, dim=dim, seed=seed, operators=operators,
                    checks=checks, estimator=dict(estimator))


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return scenario_from_dict(raw)


def _ops_for_check(scn: Scenario, params: dict, path: str) -> list[Operator]:
    node = params.get("ops")
    if node is None:
        if not scn.operators:
            _fail(path, "scenario has no operators to check")
        return list(scn.operators)
    if not isinstance(node, list) or not node:
        _fail(f"{path}.ops", "must be a nonempty array of operator indices")
    ops = []
    for i, idx in enumerate(node):
        if isinstance(idx, bool) or not isinstance(idx, int) or not (0 <= idx < len(scn.operators)):
            _fail(f"{path}.ops[{i}]", f"operator index out of range 0..{len(scn.operators) - 1}")
        ops.append(scn.operators[idx])
    return ops


def run_scenario_checks(scn: Scenario, seed: int | None = None,
                        tol: float | None = None,
                        max_iter: int | None = None) -> list[verify.CheckReport]:
    """Execute the checks named in the scenario against its operators."""
    seed = scn.seed if seed is None else seed
    iter_tol = float(scn.estimator.get("tol", DEFAULT_TOL))
    iter_cap = int(scn.estimator.get("max_iter", DEFAULT_MAX_ITER))
    if max_iter is not None:
        iter_cap = max_iter
    reports = []
    for i, params in enumerate(scn.checks):
        path = f"scenario.checks[{i}]"
        name = params["name"]
        check_tol = params.get("tol", tol)
        kw = {"seed": seed}
        if check_tol is not None:
            kw["tol"] = _get_number(check_tol, f"{path}.tol")
        if name == "range_formula_composition":
            reports.append(verify.check_range_formula_composition(
                _ops_for_check(scn, params, path), **kw))
        elif name == "permutation_displacement":
            sigma = params.get("sigma")
            if not isinstance(sigma, list):
                _fail(f"{path}.sigma", "permutation required")
            reports.append(verify.check_permutation_displacement(
                _ops_for_check(scn, params, path), sigma, **kw))
        elif name == "norm_bound_composition":
            reports.append(verify.check_norm_bound_composition(
                _ops_for_check(scn, params, path), **kw))
        elif name == "cyclic_norm":
            reports.append(verify.check_cyclic_norm(
                _ops_for_check(scn, params, path),
                max_iter=iter_cap, iter_tol=iter_tol, **kw))
        elif name == "noncyclic_counterexample":
            reports.append(verify.check_noncyclic_counterexample(
                _get_vector(params.get("u"), f"{path}.u", scn.dim), **kw))
        elif name == "three_op_closed_form":
            a_node = params.get("a")
            if not isinstance(a_node, list) or len(a_node) != 3:
                _fail(f"{path}.a", "expected three vectors")
            a = [_get_vector(v, f"{path}.a[{j}]", scn.dim) for j, v in enumerate(a_node)]
            deltas = params.get("deltas")
            if not isinstance(deltas, list):
                _fail(f"{path}.deltas", "expected three values in -1/0/1")
            reports.append(verify.check_three_op_closed_form(deltas, a, **kw))
        elif name == "convex_combination":
            reports.append(verify.check_convex_combination(
                _ops_for_check(scn, params, path),
                _get_vector(params.get("weights"), f"{path}.weights"), **kw))
        elif name == "zero_sum_corollary":
            reports.append(verify.check_zero_sum_corollary(
                _ops_for_check(scn, params, path),
                _get_vector(params.get("weights"), f"{path}.weights"), **kw))
        elif name == "cocoercive_averaged_equivalence":
            A = monotone_from_spec(params.get("A"), scn.dim, f"{path}.A")
            mu = params.get("mu")
            mu = cocoercivity_modulus(A)[0] if mu is None else _get_number(mu, f"{path}.mu")
            samples = int(params.get("samples", 1000))
            reports.append(verify.check_cocoercive_averaged_equivalence(
                A, mu, samples=samples, **kw))
        elif name == "brezis_haraux_affine":
            reports.append(verify.check_brezis_haraux_affine(
                monotone_from_spec(params.get("A"), scn.dim, f"{path}.A"),
                monotone_from_spec(params.get("B"), scn.dim, f"{path}.B"), **kw))
        elif name == "translation_formula":
            reports.append(verify.check_translation_formula(
                monotone_from_spec(params.get("A"), scn.dim, f"{path}.A"),
                monotone_from_spec(params.get("B"), scn.dim, f"{path}.B"),
                _get_vector(params.get("y"), f"{path}.y", scn.dim),
                samples=int(params.get("samples", 200)), **kw))
        elif name == "range_identity_reflected":
            reports.append(verify.check_range_identity_reflected(
                monotone_from_spec(params.get("A"), scn.dim, f"{path}.A"), **kw))
        elif name == "projected_gradient_bound":
            L = params.get("L")
            reports.append(verify.check_projected_gradient_bound(
                _get_matrix(params.get("Q"), f"{path}.Q", scn.dim),
                _get_vector(params.get("q"), f"{path}.q", scn.dim),
                set_from_spec(params.get("set"), scn.dim, f"{path}.set"),
                _get_number(params.get("alpha"), f"{path}.alpha"),
                L=None if L is None else _get_number(L, f"{path}.L"),
                max_iter=iter_cap, iter_tol=iter_tol, **kw))
        else:  # pragma: no cover - names validated at load
            _fail(path, f"unknown check {name!r}")
    return reports


# ---------------------------------------------------------------------------
# Report payloads


def check_to_dict(r: verify.CheckReport) -> dict:
    return {
        "check_name": r.check_name,
        "pass": r.passed,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "discrepancy": r.discrepancy,
        "tolerance": r.tolerance,
        "witness": r.witness,
        "seed": r.seed,
        "hypothesis_met": r.hypothesis_met,
        "notes": r.notes,
    }


def estimate_to_dict(label: str, est: DisplacementEstimate) -> dict:
    return {
        "label": label,
        "method": est.method,
        "vector": est.vector.tolist(),
        "norm": est.norm,
        "residual": est.residual,
        "iterations": est.iterations,
        "converged": est.converged,
    }


def verify_payload(name: str, seed: int, reports: list[verify.CheckReport]) -> dict:
    gated = [r for r in reports if r.hypothesis_met]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "verify",
        "name": name,
        "seed": seed,
        "checks": [check_to_dict(r) for r in reports],
        "summary": {
            "total": len(reports),
            "passed": sum(1 for r in gated if r.passed),
            "failed": sum(1 for r in gated if not r.passed),
            "hypothesis_unmet": len(reports) - len(gated),
        },
    }


def estimate_payload(name: str, seed: int, entries: list[dict]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "estimate",
        "name": name,
        "seed": seed,
        "estimates": entries,
        "summary": {"total": len(entries),
                    "converged": sum(1 for e in entries if e["converged"])},
    }


def dumps_report(payload: dict) -> str:
    """Canonical report text: sorted keys, stringified floats, trailing newline."""
    return json.dumps(stringify_numbers(payload), indent=2, sort_keys=True) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a same-directory temp file and rename, so readers never see partial files."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mdvkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_report(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(payload, dict) or payload.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"{path}: not a schema_version={SCHEMA_VERSION} report")
    return payload


def _witness_summary(witness) -> str:
    if witness is None:
        return ""
    text = json.dumps(witness, sort_keys=True)
    return text if len(text) <= 60 else text[:57] + "..."


def report_to_csv(payload: dict) -> str:
    """Delimited rendering of a report (checks or estimates)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if payload.get("kind") == "verify":
        writer.writerow(["check_name", "pass", "discrepancy", "tolerance", "seed",
                         "witness_summary"])
        for row in payload.get("checks", []):
            writer.writerow([
                row.get("check_name"),
                str(bool(row.get("pass"))).lower(),
                row.get("discrepancy"),
                row.get("tolerance"),
                row.get("seed"),
                _witness_summary(row.get("witness")),
            ])
    elif payload.get("kind") == "estimate":
        writer.writerow(["label", "method", "converged", "iterations", "residual", "norm"])
        for row in payload.get("estimates", []):
            writer.writerow([
                row.get("label"),
                row.get("method"),
                str(bool(row.get("converged"))).lower(),
                row.get("iterations"),
                row.get("residual"),
                row.get("norm"),
            ])
    else:
        raise ValidationError(f"unknown report kind {payload.get('kind')!r}")
    return out.getvalue()
