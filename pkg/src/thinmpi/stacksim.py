"""Count-based traversal-cost simulator for stack architectures.

Three stack kinds are compared: a conventional uniform-depth stack, a
frequency-layered stack, and per-function protocol paths of depth 1 with
optional per-function attribute costs (fault tolerance, energy efficiency,
... as configured weights).  Cost is linear: ``count * (depth * layer_cost
+ attr_cost)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .docs import canonical_json, fingerprint
from .errors import SimulationError
from .layering import LayerAssignment
from .registry import Registry

KINDS = ("conventional", "layered", "per_function_protocol")

DEFAULT_CONVENTIONAL_DEPTH = 4


@dataclass(frozen=True)
class StackModel:
    kind: str
    depth: Mapping[str, int]
    layer_cost: float = 1.0
    attr_costs: Mapping[str, float] = field(default_factory=dict)
    label: str = ""


@dataclass(frozen=True)
class TraceCostReport:
    total_cost: float
    per_function_cost: Mapping[str, float]
    events: int
    mean_cost_per_call: float
    empty: bool = False


@dataclass(frozen=True)
class ComparisonReport:
    labels: tuple[str, ...]
    reports: tuple[TraceCostReport, ...]
    ratios: Mapping[str, float]


def build_stack(kind: str, registry: Optional[Registry] = None,
                depth: int = DEFAULT_CONVENTIONAL_DEPTH,
                assignment: Optional[LayerAssignment] = None,
                layer_cost: float = 1.0, label: str = "") -> StackModel:
    """Construct a stack model of the given kind.

    ``conventional`` needs a registry and a uniform depth; ``layered`` needs
    a layer assignment; ``per_function_protocol`` needs a registry, whose
    function attributes become additive per-call costs.
    """
    if kind not in KINDS:
        raise SimulationError(f"unknown stack kind {kind!r}")
    if layer_cost <= 0:
        raise SimulationError("layer_cost must be positive")
    label = label or kind

    if kind == "conventional":
        if registry is None:
            raise SimulationError("conventional stack requires a registry")
        if depth < 1:
            raise SimulationError("conventional depth must be >= 1")
        depths = {name: depth for name in registry.functions}
        attr_costs: dict[str, float] = {}
    elif kind == "layered":
        if assignment is None:
            raise SimulationError("layered stack requires a layer assignment")
        depths = dict(assignment.layers)
        attr_costs = {}
    else:
        if registry is None:
            raise SimulationError("per-function-protocol stack requires a registry")
        depths = {name: 1 for name in registry.functions}
        attr_costs = {
            rec.name: sum(rec.attributes.values())
            for rec in registry.functions.values() if rec.attributes
        }
    return StackModel(kind=kind, depth=depths, layer_cost=layer_cost,
                      attr_costs=attr_costs, label=label)


def simulate_trace(counts: Mapping[str, int], model: StackModel) -> TraceCostReport:
    """Aggregate traversal cost of a trace on one stack model."""
    per_function: dict[str, float] = {}
    events = 0
    for name in sorted(counts):
        count = counts[name]
        if count < 0:
            raise SimulationError(f"negative count for {name}")
        if name not in model.depth:
            raise SimulationError(f"function {name} is not covered by the stack model")
        per_function[name] = count * (model.depth[name] * model.layer_cost
                                      + model.attr_costs.get(name, 0.0))
        events += count
    total = sum(per_function.values())
    if events == 0:
        return TraceCostReport(total_cost=0.0, per_function_cost=per_function,
                               events=0, mean_cost_per_call=0.0, empty=True)
    return TraceCostReport(total_cost=total, per_function_cost=per_function,
                           events=events, mean_cost_per_call=total / events)


def compare_configs(counts: Mapping[str, int],
                    models: Sequence[StackModel]) -> ComparisonReport:
    """Side-by-side simulation of the same trace over several stack models."""
    if len(models) < 2:
        raise SimulationError("comparison requires at least two stack models")
    labels = []
    for i, model in enumerate(models):
        label = model.label or model.kind
        if label in labels:
            label = f"{label}#{i}"
        labels.append(label)
    reports = tuple(simulate_trace(counts, model) for model in models)
    ratios: dict[str, float] = {}
    for i in range(len(models)):
        for j in range(len(models)):
            if i == j:
                continue
            denom = reports[j].total_cost
            ratios[f"{labels[i]}/{labels[j]}"] = (
                reports[i].total_cost / denom if denom else float("inf"))
    return ComparisonReport(labels=tuple(labels), reports=reports, ratios=ratios)


def model_config_to_document(config: Mapping) -> str:
    return canonical_json(dict(config))


def load_model_config(document: str) -> dict:
    """Parse a stack model config document: {kind, D?, layer_cost?, attributes?}."""
    raw = json.loads(document)
    if not isinstance(raw, dict) or "kind" not in raw:
        raise SimulationError("model config must be an object with a 'kind' field")
    if raw["kind"] not in KINDS:
        raise SimulationError(f"unknown stack kind {raw['kind']!r}")
    return raw


def comparison_to_document(comparison: ComparisonReport,
                           counts: Mapping[str, int]) -> str:
    trace_fp = fingerprint(canonical_json(dict(sorted(counts.items()))))
    models = []
    for label, report in zip(comparison.labels, comparison.reports):
        models.append({
            "label": label,
            "total_cost": report.total_cost,
            "events": report.events,
            "mean_cost_per_call": report.mean_cost_per_call,
            "empty": report.empty,
            "per_function_cost": dict(sorted(report.per_function_cost.items())),
        })
    return canonical_json({
        "trace_fingerprint": trace_fp,
        "models": models,
        "ratios": dict(sorted(comparison.ratios.items())),
    })
