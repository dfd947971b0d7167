"""JSON wire formats for instances, partitions, predictors and solver results.

Every document carries ``"schema": 1``. Floats are written with ``repr`` so
they round-trip exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .core import TOL, Element, Instance, Partition, Predictor, SolverResult
from .errors import InvalidInstance, ValidationError

SCHEMA_VERSION = 1
LOAD_MASS_TOL = 1e-6


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def parse_json(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _check_schema(doc, what):
    if not isinstance(doc, dict):
        raise ValidationError(f"{what}: top-level value must be an object")
    schema = doc.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ValidationError(f"{what}: unsupported schema {schema!r} (expected {SCHEMA_VERSION})")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInstance(f"{where}: expected a number, got {value!r}")
    return float(value)


def instance_to_dict(inst: Instance, metadata: dict | None = None) -> dict:
    doc: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "elements": [{"id": e.id, "mass": e.mass, "mu": e.mu, "f": e.f} for e in inst.elements],
    }
    if metadata:
        doc["metadata"] = metadata
    return doc


def instance_from_dict(doc: Any) -> Instance:
    """Build an instance, accepting masses that sum to 1 within 1e-6 and renormalizing when needed."""
    _check_schema(doc, "instance")
    elements = doc.get("elements")
    if not isinstance(elements, list) or not elements:
        raise InvalidInstance("instance: field 'elements' must be a non-empty list")
    raw = []
    for i, item in enumerate(elements):
        where = f"elements[{i}]"
        if not isinstance(item, dict):
            raise InvalidInstance(f"{where}: expected an object")
        for key in ("id", "mass", "mu", "f"):
            if key not in item:
                raise InvalidInstance(f"{where}: missing field {key!r}")
        if not isinstance(item["id"], str):
            raise InvalidInstance(f"{where}.id: expected a string")
        raw.append((item["id"], *(_number(item[k], f"{where}.{k}") for k in ("mass", "mu", "f"))))
    total = math.fsum(r[1] for r in raw)
    if abs(total - 1.0) > LOAD_MASS_TOL:
        raise InvalidInstance(f"instance: masses sum to {total!r}, expected 1 within {LOAD_MASS_TOL}")
    if abs(total - 1.0) <= TOL:
        total = 1.0  # already within the core tolerance; keep the bits so round trips are exact
    return Instance(tuple(Element(i, m / total, u, p) for i, m, u, p in raw))


def partition_to_dict(p: Partition) -> dict:
    return {"schema": SCHEMA_VERSION, "assignment": p.assignment}


def partition_from_dict(doc: Any) -> Partition:
    _check_schema(doc, "partition")
    assignment = doc.get("assignment")
    if not isinstance(assignment, dict):
        raise ValidationError("partition: field 'assignment' must be an object")
    for k, v in assignment.items():
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ValidationError(f"partition: assignment[{k!r}] must be a non-negative integer")
    return Partition.from_assignment(assignment)


def predictor_to_dict(g: Predictor) -> dict:
    return {"schema": SCHEMA_VERSION, "values": dict(zip(g.ids, g.values))}


def predictor_from_dict(doc: Any) -> Predictor:
    _check_schema(doc, "predictor")
    values = doc.get("values")
    if not isinstance(values, dict):
        raise ValidationError("predictor: field 'values' must be an object")
    return Predictor.from_mapping({k: _number(v, f"values[{k!r}]") for k, v in values.items()})


def result_to_dict(res: SolverResult, timing: bool = True) -> dict:
    doc: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "value": res.value,
        "error_budget": res.additive_error_budget,
        "solver": res.solver.value,
    }
    if res.witness is not None:
        doc["witness"] = {"assignment": res.witness.assignment}
    if timing:
        doc["wall_time_ms"] = res.wall_time * 1000.0
    if res.details:
        doc["details"] = res.details
    return doc
