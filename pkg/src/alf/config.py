"""Scenario configuration: schema validation and object builders.

Configurations are plain JSON; validation rejects unknown keys so presets
round-trip unchanged and typos fail loudly before any computation starts.
"""

from __future__ import annotations

from fractions import Fraction

import jsonschema

from .dynamics import IntegratorConfig, Perturbation, PerturbedSystem
from .errors import ConfigError
from .graph import Graph
from .precision import exact
from .prng import SplitMix64
from .response import ResponseField, ResponseFunction

_NUM = {"type": "number"}
_SEED = {"type": "integer", "minimum": 0}
_RANGE = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "graph": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type", "n"],
            "properties": {
                "type": {"enum": ["complete", "cycle", "path", "custom"]},
                "n": {"type": "integer", "minimum": 1},
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "items": _NUM,
                        "minItems": 2,
                        "maxItems": 3,
                    },
                },
            },
        },
        "response": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "properties": {
                "coeffs": {"type": "array", "items": _NUM, "minItems": 1},
                "roots": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [_NUM, {"type": "integer", "minimum": 1}],
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
                "scale": _NUM,
                "family": {"enum": ["ex3a", "ex3b"]},
                "lambda": _NUM,
            },
        },
        "perturbation": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "constant": {
                    "type": "object",
                    "additionalProperties": False,
                    "minProperties": 1,
                    "maxProperties": 1,
                    "properties": {
                        "values": {"type": "array", "items": _NUM, "minItems": 1},
                        "value": _NUM,
                    },
                },
                "random": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["seed", "lo", "hi"],
                    "properties": {"seed": _SEED, "lo": _NUM, "hi": _NUM},
                },
            },
        },
        "epsilon": {"type": "number", "minimum": 0},
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["rk4", "dp45"]},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "digits": {"enum": [16, 32, 64]},
                "stride": {"type": "integer", "minimum": 1},
                "seed": _SEED,
            },
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "explicit": {"type": "array", "items": _NUM, "minItems": 1},
                "random": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["seed", "lo", "hi"],
                    "properties": {"seed": _SEED, "lo": _NUM, "hi": _NUM},
                },
                "consensus": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["c"],
                    "properties": {"c": _NUM},
                },
                "plane": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["k0"],
                    "properties": {"x0": {"type": ["number", "null"]}, "k0": _NUM},
                },
            },
        },
        "tspan": _RANGE,
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k_range": _RANGE,
                "x_range": _RANGE,
                "grid": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 2},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "residual_tol": {"type": "number", "exclusiveMinimum": 0},
                "lambda_values": {"type": "array", "items": _NUM, "minItems": 1},
                "eliminate": {"type": "integer", "minimum": 1},
                "scan_points": {"type": "integer", "minimum": 3},
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)


def validate_config(cfg: dict) -> dict:
    """Schema-validate a scenario; raises ConfigError listing every problem."""
    errors = sorted(_VALIDATOR.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        details = []
        for err in errors:
            path = "/".join(str(p) for p in err.absolute_path) or "<root>"
            details.append(f"{path}: {err.message}")
        raise ConfigError(details)
    return cfg


def build_graph(spec: dict) -> Graph:
    kind = spec["type"]
    n = spec["n"]
    if kind == "complete":
        return Graph.complete(n)
    if kind == "cycle":
        return Graph.cycle(n)
    if kind == "path":
        return Graph.path(n)
    edges = spec.get("edges")
    if not edges:
        raise ConfigError(["graph: custom graphs need an edge list"])
    return Graph.from_edge_list(n, edges)


def build_response(spec: dict) -> ResponseFunction:
    if "family" in spec:
        if "lambda" not in spec:
            raise ConfigError(["response: family form needs a lambda value"])
        return ResponseFunction.family(spec["family"], spec["lambda"])
    if "roots" in spec:
        return ResponseFunction.from_roots(spec["roots"], spec.get("scale", 1))
    if "coeffs" in spec:
        return ResponseFunction.from_coeffs(spec["coeffs"])
    raise ConfigError(["response: need coeffs, roots, or family"])


def build_perturbation(spec: dict | None, n: int) -> Perturbation:
    if spec is None:
        return Perturbation.zero(n)
    if "constant" in spec:
        inner = spec["constant"]
        if "values" in inner:
            values = inner["values"]
            if len(values) != n:
                raise ConfigError([f"perturbation: expected {n} values, got {len(values)}"])
            return Perturbation.constant(values)
        return Perturbation.constant(inner["value"], n)
    inner = spec["random"]
    return Perturbation.random_constant(n, inner["seed"], inner["lo"], inner["hi"])


def build_integrator(spec: dict | None) -> IntegratorConfig:
    return IntegratorConfig(**(spec or {}))


def build_initial(spec: dict, n: int) -> list[Fraction]:
    """Full-system initial state; the plane form is handled by the canard path."""
    if "explicit" in spec:
        values = spec["explicit"]
        if len(values) != n:
            raise ConfigError([f"initial: expected {n} components, got {len(values)}"])
        return [exact(v) for v in values]
    if "random" in spec:
        inner = spec["random"]
        rng = SplitMix64(inner["seed"])
        return [exact(rng.uniform(inner["lo"], inner["hi"])) for _ in range(n)]
    if "consensus" in spec:
        return [exact(spec["consensus"]["c"])] * n
    raise ConfigError(["initial: plane initial conditions only apply to the canard command"])


def build_system(cfg: dict) -> PerturbedSystem:
    for section in ("graph", "response"):
        if section not in cfg:
            raise ConfigError([f"{section}: section is required for this command"])
    graph = build_graph(cfg["graph"])
    response = ResponseField(build_response(cfg["response"]))
    perturbation = build_perturbation(cfg.get("perturbation"), graph.n)
    return PerturbedSystem(graph, response, perturbation, exact(cfg.get("epsilon", 0)))
