"""Suite config loading: JSON ingestion, validation, and name resolution.

The config is a single JSON document (schema version 1) declaring named
patches, connections, linear connections, sections, morphisms, algebras,
and gauge potentials, plus a list of checks referencing them.  Validation
is strict: unknown keys, unresolved names, bad shapes, and expression
syntax errors all raise :class:`ConfigSchemaError` carrying the JSON path
of the offending field.  docs/config-schema.md documents the format.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .bundle import BundlePatch, ChristoffelField, FiberBundleMorphism, Section
from .errors import (
    ClosureViolation,
    ConfigSchemaError,
    ExprSyntaxError,
    IndexOutOfRange,
    IoError,
    UnknownIdentifier,
)
from .exprdsl import Expression, parse
from .lie import MatrixLieAlgebra, builtin_algebra
from .linear import LinearChristoffel
from .principal import GaugePotential

__all__ = ["CheckSpec", "SuiteConfig", "load_config", "CHECK_KINDS"]

CHECK_KINDS = (
    "curvature-coefficients",
    "nijenhuis-vs-coefficients",
    "commutator-identity",
    "theta-equivariance",
    "parallel-morphism",
    "connection-axiom",
    "cartan-cross-check",
    "bch-theta",
    "linearity",
    "linear-consistency",
)

# kind -> (default sample count, default tolerance)
_KIND_DEFAULTS = {
    "curvature-coefficients": (10, 1e-9),
    "nijenhuis-vs-coefficients": (10, 1e-9),
    "commutator-identity": (10, 1e-9),
    "theta-equivariance": (50, 1e-9),
    "parallel-morphism": (10, 1e-9),
    "connection-axiom": (100, 1e-8),
    "cartan-cross-check": (3, 1e-6),
    "bch-theta": (5, 1e-4),
    "linearity": (64, 1e-9),
    "linear-consistency": (10, 1e-9),
}

_TOP_LEVEL_KEYS = {
    "version",
    "seed",
    "patches",
    "connections",
    "linear_connections",
    "sections",
    "morphisms",
    "algebras",
    "potentials",
    "checks",
}


@dataclass(frozen=True)
class CheckSpec:
    """One validated check: resolved targets live in ``params`` alongside
    the original names (``*_name`` keys) for reporting."""

    name: str
    kind: str
    samples: int
    tolerance: float
    seed: int | None
    params: dict


@dataclass(frozen=True)
class SuiteConfig:
    version: int
    seed: int
    digest: str
    patches: dict
    connections: dict
    linear_connections: dict
    sections: dict
    morphisms: dict
    algebras: dict
    potentials: dict
    checks: tuple


def _fail(path: str, message: str):
    raise ConfigSchemaError(f"{path}: {message}")


def _expect_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected an object, got {type(value).__name__}")
    return value


def _expect_list(value, path: str) -> list:
    if not isinstance(value, list):
        _fail(path, f"expected an array, got {type(value).__name__}")
    return value


def _expect_string(value, path: str) -> str:
    if not isinstance(value, str):
        _fail(path, f"expected a string, got {type(value).__name__}")
    return value


def _expect_int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be at least {minimum}, got {value}")
    return value


def _expect_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        _fail(path, "must be finite")
    return float(value)


def _reject_unknown(obj: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        _fail(path, f"unknown key {unknown[0]!r}")


def _parse_expr(source, dims: tuple[int, int], path: str) -> Expression:
    text = _expect_string(source, path)
    try:
        return parse(text, dims)
    except (ExprSyntaxError, UnknownIdentifier, IndexOutOfRange) as exc:
        raise ConfigSchemaError(f"{path}: {exc}") from exc


def _resolve(table: dict, name, table_label: str, path: str):
    key = _expect_string(name, path)
    if key not in table:
        _fail(path, f"undeclared {table_label} {key!r}")
    return table[key]


def _load_patches(block, path: str) -> dict:
    out = {}
    for name, body in _expect_object(block, path).items():
        here = f"{path}.{name}"
        body = _expect_object(body, here)
        _reject_unknown(body, {"base_dim", "fiber_dim"}, here)
        if "base_dim" not in body or "fiber_dim" not in body:
            _fail(here, "needs base_dim and fiber_dim")
        out[name] = BundlePatch(
            _expect_int(body["base_dim"], f"{here}.base_dim", 1),
            _expect_int(body["fiber_dim"], f"{here}.fiber_dim", 1),
        )
    return out


def _load_connections(block, patches: dict, path: str) -> dict:
    out = {}
    for name, body in _expect_object(block, path).items():
        here = f"{path}.{name}"
        body = _expect_object(body, here)
        _reject_unknown(body, {"patch", "gamma"}, here)
        if "patch" not in body or "gamma" not in body:
            _fail(here, "needs patch and gamma")
        patch = _resolve(patches, body["patch"], "patch", f"{here}.patch")
        m, n = patch.dims
        rows = _expect_list(body["gamma"], f"{here}.gamma")
        if len(rows) != n:
            _fail(f"{here}.gamma", f"needs {n} rows (one per fiber index), got {len(rows)}")
        gamma = []
        for a, row in enumerate(rows):
            row = _expect_list(row, f"{here}.gamma[{a}]")
            if len(row) != m:
                _fail(f"{here}.gamma[{a}]", f"needs {m} entries, got {len(row)}")
            gamma.append(
                tuple(
                    _parse_expr(src, (m, n), f"{here}.gamma[{a}][{mu}]")
                    for mu, src in enumerate(row)
                )
            )
        try:
            out[name] = ChristoffelField(patch, tuple(gamma))
        except ValueError as exc:
            _fail(here, str(exc))
    return out


def _load_linear_connections(block, patches: dict, path: str) -> dict:
    out = {}
    for name, body in _expect_object(block, path).items():
        here = f"{path}.{name}"
        body = _expect_object(body, here)
        _reject_unknown(body, {"patch", "gamma3"}, here)
        if "patch" not in body or "gamma3" not in body:
            _fail(here, "needs patch and gamma3")
        patch = _resolve(patches, body["patch"], "patch", f"{here}.patch")
        m, n = patch.dims
        rows = _expect_list(body["gamma3"], f"{here}.gamma3")
        if len(rows) != n:
            _fail(f"{here}.gamma3", f"needs {n} rows, got {len(rows)}")
        gamma3 = []
        for alpha, row in enumerate(rows):
            row = _expect_list(row, f"{here}.gamma3[{alpha}]")
            if len(row) != m:
                _fail(f"{here}.gamma3[{alpha}]", f"needs {m} entries, got {len(row)}")
            mid = []
            for mu, inner in enumerate(row):
                inner = _expect_list(inner, f"{here}.gamma3[{alpha}][{mu}]")
                if len(inner) != n:
                    _fail(
                        f"{here}.gamma3[{alpha}][{mu}]",
                        f"needs {n} entries, got {len(inner)}",
                    )
                mid.append(
                    tuple(
                        _parse_expr(src, (m, n), f"{here}.gamma3[{alpha}][{mu}][{w}]")
                        for w, src in enumerate(inner)
                    )
                )
            gamma3.append(tuple(mid))
        try:
            out[name] = LinearChristoffel(patch, tuple(gamma3))
        except ValueError as exc:
            _fail(here, str(exc))
    return out


def _load_sections(block, patches: dict, path: str) -> dict:
    out = {}
    for name, body in _expect_object(block, path).items():
        here = f"{path}.{name}"
        body = _expect_object(body, here)
        _reject_unknown(body, {"patch", "comps"}, here)
        if "patch" not in body or "comps" not in body:
            _fail(here, "needs patch and comps")
        patch = _resolve(patches, body["patch"], "patch", f"{here}.patch")
        comps = _expect_list(body["comps"], f"{here}.comps")
        if len(comps) != patch.fiber_dim:
            _fail(f"{here}.comps", f"needs {patch.fiber_dim} entries, got {len(comps)}")
        parsed = tuple(
            _parse_expr(src, patch.dims, f"{here}.comps[{i}]")
            for i, src in enumerate(comps)
        )
        try:
            out[name] = Section(patch, parsed)
        except ValueError as exc:
            _fail(here, str(exc))
    return out


def _load_morphisms(block, patches: dict, path: str) -> dict:
    out = {}
    for name, body in _expect_object(block, path).items():
        here = f"{path}.{name}"
        body = _expect_object(body, here)
        _reject_unknown(body, {"source", "target", "comps"}, here)
        for key in ("source", "target", "comps"):
            if key not in body:
                _fail(here, f"needs {key}")
        source = _resolve(patches, body["source"], "patch", f"{here}.source")
        target = _resolve(patches, body["target"], "patch", f"{here}.target")
        comps = _expect_list(body["comps"], f"{here}.comps")
        if len(comps) != target.fiber_dim:
            _fail(f"{here}.comps", f"needs {target.fiber_dim} entries, got {len(comps)}")
        parsed = tuple(
            _parse_expr(src, source.dims, f"{here}.comps[{i}]")
            for i, src in enumerate(comps)
        )
        try:
            out[name] = FiberBundleMorphism(source, target, parsed)
        except ValueError as exc:
            _fail(here, str(exc))
    return out


def _load_algebras(block, path: str) -> dict:
    out = {}
    for name, body in _expect_object(block, path).items():
        here = f"{path}.{name}"
        body = _expect_object(body, here)
        _reject_unknown(body, {"builtin", "basis"}, here)
        if ("builtin" in body) == ("basis" in body):
            _fail(here, "needs exactly one of builtin or basis")
        if "builtin" in body:
            label = _expect_string(body["builtin"], f"{here}.builtin")
            try:
                out[name] = builtin_algebra(label)
            except ValueError as exc:
                _fail(f"{here}.builtin", str(exc))
            continue
        basis_raw = _expect_list(body["basis"], f"{here}.basis")
        if not basis_raw:
            _fail(f"{here}.basis", "needs at least one matrix")
        matrices = []
        for i, entry in enumerate(basis_raw):
            entry_path = f"{here}.basis[{i}]"
            entry = _expect_list(entry, entry_path)
            if entry and isinstance(entry[0], list):
                rows = [
                    [
                        _expect_number(v, f"{entry_path}[{r}][{c}]")
                        for c, v in enumerate(_expect_list(rowv, f"{entry_path}[{r}]"))
                    ]
                    for r, rowv in enumerate(entry)
                ]
                d = len(rows)
                if any(len(r) != d for r in rows):
                    _fail(entry_path, "matrix must be square")
                matrices.append(rows)
            else:
                flat = [
                    _expect_number(v, f"{entry_path}[{j}]") for j, v in enumerate(entry)
                ]
                d = math.isqrt(len(flat))
                if d * d != len(flat):
                    _fail(
                        entry_path,
                        f"row-major matrix needs a square length, got {len(flat)}",
                    )
                matrices.append([flat[r * d : (r + 1) * d] for r in range(d)])
        try:
            out[name] = MatrixLieAlgebra.from_basis(matrices, name=name)
        except (ValueError, ClosureViolation) as exc:
            raise ConfigSchemaError(f"{here}.basis: {exc}") from exc
    return out


def _load_potentials(block, algebras: dict, path: str) -> dict:
    out = {}
    for name, body in _expect_object(block, path).items():
        here = f"{path}.{name}"
        body = _expect_object(body, here)
        _reject_unknown(body, {"algebra", "base_dim", "a"}, here)
        for key in ("algebra", "base_dim", "a"):
            if key not in body:
                _fail(here, f"needs {key}")
        algebra = _resolve(algebras, body["algebra"], "algebra", f"{here}.algebra")
        m = _expect_int(body["base_dim"], f"{here}.base_dim", 1)
        rows = _expect_list(body["a"], f"{here}.a")
        if len(rows) != m:
            _fail(f"{here}.a", f"needs {m} rows (one per base direction), got {len(rows)}")
        parsed = []
        for mu, row in enumerate(rows):
            row = _expect_list(row, f"{here}.a[{mu}]")
            if len(row) != algebra.k:
                _fail(f"{here}.a[{mu}]", f"needs {algebra.k} entries, got {len(row)}")
            parsed.append(
                tuple(
                    _parse_expr(src, (m, 1), f"{here}.a[{mu}][{e}]")
                    for e, src in enumerate(row)
                )
            )
        try:
            out[name] = GaugePotential(algebra, m, tuple(parsed))
        except ValueError as exc:
            _fail(here, str(exc))
    return out


_CHECK_COMMON_KEYS = {"name", "kind", "samples", "tolerance", "seed"}

# extra keys allowed per check kind (required ones listed separately)
_CHECK_KIND_KEYS = {
    "curvature-coefficients": ({"connection"}, set()),
    "nijenhuis-vs-coefficients": ({"connection"}, set()),
    "commutator-identity": ({"connection"}, {"section"}),
    "theta-equivariance": (set(), {"fiber_dim", "base_dim"}),
    "parallel-morphism": (
        {"morphism", "connection", "connection_hat"},
        {"expect"},
    ),
    "connection-axiom": ({"potential"}, set()),
    "cartan-cross-check": ({"potential"}, {"group_samples", "section_samples"}),
    "bch-theta": ({"algebra"}, set()),
    "linearity": ({"connection"}, {"expect", "lambdas"}),
    "linear-consistency": ({"linear_connection"}, set()),
}


def _load_check(body, index: int, tables: dict) -> CheckSpec:
    here = f"checks[{index}]"
    body = _expect_object(body, here)
    if "name" not in body or "kind" not in body:
        _fail(here, "needs name and kind")
    name = _expect_string(body["name"], f"{here}.name")
    if not name:
        _fail(f"{here}.name", "must not be empty")
    kind = _expect_string(body["kind"], f"{here}.kind")
    if kind not in _KIND_DEFAULTS:
        known = ", ".join(CHECK_KINDS)
        _fail(f"{here}.kind", f"unknown check kind {kind!r} (known: {known})")
    required, optional = _CHECK_KIND_KEYS[kind]
    _reject_unknown(body, _CHECK_COMMON_KEYS | required | optional, here)
    for key in required:
        if key not in body:
            _fail(here, f"kind {kind!r} needs {key}")
    default_samples, default_tol = _KIND_DEFAULTS[kind]
    samples = _expect_int(body.get("samples", default_samples), f"{here}.samples", 1)
    tolerance = _expect_number(body.get("tolerance", default_tol), f"{here}.tolerance")
    if tolerance <= 0:
        _fail(f"{here}.tolerance", f"must be positive, got {tolerance}")
    seed = None
    if "seed" in body:
        seed = _expect_int(body["seed"], f"{here}.seed", 0)

    params: dict = {}
    if "connection" in body:
        params["connection"] = _resolve(
            tables["connections"], body["connection"], "connection", f"{here}.connection"
        )
        params["connection_name"] = body["connection"]
    if "connection_hat" in body:
        params["connection_hat"] = _resolve(
            tables["connections"],
            body["connection_hat"],
            "connection",
            f"{here}.connection_hat",
        )
    if "section" in body:
        params["section"] = _resolve(
            tables["sections"], body["section"], "section", f"{here}.section"
        )
        if params["section"].patch != params["connection"].patch:
            _fail(f"{here}.section", "section and connection patches differ")
    if "morphism" in body:
        params["morphism"] = _resolve(
            tables["morphisms"], body["morphism"], "morphism", f"{here}.morphism"
        )
    if "potential" in body:
        params["potential"] = _resolve(
            tables["potentials"], body["potential"], "potential", f"{here}.potential"
        )
    if "algebra" in body:
        params["algebra"] = _resolve(
            tables["algebras"], body["algebra"], "algebra", f"{here}.algebra"
        )
    if "linear_connection" in body:
        params["linear_connection"] = _resolve(
            tables["linear_connections"],
            body["linear_connection"],
            "linear connection",
            f"{here}.linear_connection",
        )
    if kind == "parallel-morphism":
        phi = params["morphism"]
        if phi.source != params["connection"].patch:
            _fail(f"{here}.morphism", "morphism source and connection patches differ")
        if phi.target != params["connection_hat"].patch:
            _fail(
                f"{here}.morphism",
                "morphism target and connection_hat patches differ",
            )
    if "expect" in body:
        expect = _expect_string(body["expect"], f"{here}.expect")
        allowed = (
            ("parallel", "not-parallel")
            if kind == "parallel-morphism"
            else ("linear", "nonlinear")
        )
        if expect not in allowed:
            _fail(f"{here}.expect", f"must be one of {allowed}, got {expect!r}")
        params["expect"] = expect
    if "lambdas" in body:
        values = _expect_list(body["lambdas"], f"{here}.lambdas")
        if not values:
            _fail(f"{here}.lambdas", "must not be empty")
        params["lambdas"] = tuple(
            _expect_number(v, f"{here}.lambdas[{i}]") for i, v in enumerate(values)
        )
    if "fiber_dim" in body:
        params["fiber_dim"] = _expect_int(body["fiber_dim"], f"{here}.fiber_dim", 1)
    if "base_dim" in body:
        params["base_dim"] = _expect_int(body["base_dim"], f"{here}.base_dim", 1)
    if "group_samples" in body:
        params["group_samples"] = _expect_int(
            body["group_samples"], f"{here}.group_samples", 1
        )
    if "section_samples" in body:
        params["section_samples"] = _expect_int(
            body["section_samples"], f"{here}.section_samples", 1
        )
    return CheckSpec(name, kind, samples, tolerance, seed, params)


def load_config(path: str) -> SuiteConfig:
    """Read, parse, and validate a suite config from a JSON file."""
    try:
        with open(path, "rb") as handle:
            raw = handle.read()
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    try:
        document = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ConfigSchemaError(f"{path}: config is not UTF-8: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigSchemaError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    document = _expect_object(document, "config")
    _reject_unknown(document, _TOP_LEVEL_KEYS, "config")
    if "version" not in document:
        _fail("config", "needs a version field (current schema version is 1)")
    version = _expect_int(document["version"], "version")
    if version != 1:
        _fail("version", f"unsupported schema version {version} (supported: 1)")
    seed = _expect_int(document.get("seed", 0), "seed", 0)

    patches = _load_patches(document.get("patches", {}), "patches")
    algebras = _load_algebras(document.get("algebras", {}), "algebras")
    connections = _load_connections(document.get("connections", {}), patches, "connections")
    linear_connections = _load_linear_connections(
        document.get("linear_connections", {}), patches, "linear_connections"
    )
    sections = _load_sections(document.get("sections", {}), patches, "sections")
    morphisms = _load_morphisms(document.get("morphisms", {}), patches, "morphisms")
    potentials = _load_potentials(document.get("potentials", {}), algebras, "potentials")

    tables = {
        "connections": connections,
        "linear_connections": linear_connections,
        "sections": sections,
        "morphisms": morphisms,
        "algebras": algebras,
        "potentials": potentials,
    }
    checks = []
    seen = set()
    for index, body in enumerate(_expect_list(document.get("checks", []), "checks")):
        spec = _load_check(body, index, tables)
        if spec.name in seen:
            _fail(f"checks[{index}].name", f"duplicate check name {spec.name!r}")
        seen.add(spec.name)
        checks.append(spec)

    return SuiteConfig(
        version=version,
        seed=seed,
        digest=hashlib.sha256(raw).hexdigest(),
        patches=patches,
        connections=connections,
        linear_connections=linear_connections,
        sections=sections,
        morphisms=morphisms,
        algebras=algebras,
        potentials=potentials,
        checks=tuple(checks),
    )
