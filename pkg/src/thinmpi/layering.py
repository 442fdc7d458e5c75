"""Global invocation-frequency profiles and inverse-frequency layer assignment.

Frequently invoked functions sink to low (cheap) layers; rare ones rise to
the top of the stack.  Layer 1 is the lowest/fastest layer and ``num_layers``
the most expensive.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from .docs import canonical_json
from .errors import ProfileError
from .registry import Registry
from .scanner import UsageSet

WEIGHTINGS = ("sum", "per_app_normalized")
POLICIES = ("equal_count", "mass_quantile")

NORMALIZED_SCALE = 10 ** 6

DEFAULT_NUM_LAYERS = 4


@dataclass(frozen=True)
class Trace:
    """Per-application invocation counts, e.g. parsed from a trace file."""

    app_id: str
    counts: Mapping[str, int]


@dataclass(frozen=True)
class FrequencyProfile:
    counts: Mapping[str, int]
    sources: tuple[str, ...]
    weighting: str


@dataclass(frozen=True)
class LayerAssignment:
    layers: Mapping[str, int]
    num_layers: int
    policy: str


def parse_trace(text: str, app_id: str = "trace") -> Trace:
    """Parse a line-oriented ``function_name,count`` trace document."""
    counts: Counter[str] = Counter()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ProfileError(f"line {lineno}: expected 'function_name,count', got {raw!r}")
        name, count_text = parts[0].strip(), parts[1].strip()
        try:
            count = int(count_text)
        except ValueError:
            raise ProfileError(f"line {lineno}: count {count_text!r} is not an integer")
        if count < 0:
            raise ProfileError(f"line {lineno}: negative count for {name}")
        counts[name] += count
    return Trace(app_id=app_id, counts=dict(counts))


def _input_counts(item: Union[Trace, UsageSet], registry: Registry) -> tuple[str, dict[str, int]]:
    """Canonicalize one profile input to (app_id, counts over registry names)."""
    if isinstance(item, UsageSet):
        counts: Counter[str] = Counter(
            site.function for site in item.call_sites
            if site.function in item.invoked)
        return item.app_id, dict(counts)
    resolved: dict[str, int] = {}
    for name, count in item.counts.items():
        record = registry.lookup(name)
        if record is None:
            raise ProfileError(f"unknown function {name!r} in trace {item.app_id!r}")
        if count < 0:
            raise ProfileError(f"negative count for {name} in trace {item.app_id!r}")
        resolved[record.name] = resolved.get(record.name, 0) + count
    return item.app_id, resolved


def build_profile(inputs: Iterable[Union[Trace, UsageSet]], registry: Registry,
                  weighting: str = "sum") -> FrequencyProfile:
    """Aggregate traces and/or usage sets into one global frequency profile.

    ``sum`` adds raw counts; ``per_app_normalized`` gives each application
    equal weight by normalizing its counts to relative frequencies first,
    then averaging and rescaling to integer tallies.
    """
    if weighting not in WEIGHTINGS:
        raise ProfileError(f"unknown weighting {weighting!r}")
    items = [_input_counts(item, registry) for item in inputs]
    if not items:
        raise ProfileError("empty input list: at least one trace or usage set required")
    for app_id, counts in items:
        for name in counts:
            if name not in registry.functions:
                raise ProfileError(f"unknown function {name!r} in input {app_id!r}")

    sources = tuple(app_id for app_id, _ in items)
    if weighting == "sum":
        total: Counter[str] = Counter()
        for _, counts in items:
            total.update(counts)
        merged = {name: count for name, count in total.items()}
    else:
        shares: dict[str, float] = {}
        for app_id, counts in items:
            app_total = sum(counts.values())
            if app_total == 0:
                raise ProfileError(f"input {app_id!r} has zero total count")
            for name, count in counts.items():
                shares[name] = shares.get(name, 0.0) + count / app_total
        merged = {
            name: round(share / len(items) * NORMALIZED_SCALE)
            for name, share in shares.items()
        }
    return FrequencyProfile(counts=merged, sources=sources, weighting=weighting)


def _ranked(profile: FrequencyProfile) -> list[str]:
    return sorted(profile.counts, key=lambda name: (-profile.counts[name], name))


def assign_layers(profile: FrequencyProfile, num_layers: int = DEFAULT_NUM_LAYERS,
                  policy: str = "equal_count",
                  registry: Optional[Registry] = None) -> LayerAssignment:
    """Bin functions into contiguous layer groups, most frequent first.

    ``equal_count`` makes group sizes as equal as possible (earlier groups
    absorb remainders); ``mass_quantile`` closes each group once it holds
    roughly an equal share of the remaining count mass.  Registry functions
    absent from the profile land on the top layer.
    """
    if num_layers < 1:
        raise ProfileError("num_layers must be >= 1")
    if policy not in POLICIES:
        raise ProfileError(f"unknown policy {policy!r}")
    if not profile.counts:
        raise ProfileError("cannot assign layers for an empty profile")

    ranked = _ranked(profile)
    layers: dict[str, int] = {}
    if policy == "equal_count":
        n = len(ranked)
        base, rem = divmod(n, num_layers)
        pos = 0
        for k in range(1, num_layers + 1):
            size = base + (1 if k <= rem else 0)
            for name in ranked[pos:pos + size]:
                layers[name] = k
            pos += size
    else:
        total = sum(profile.counts.values())
        remaining_mass = total
        k = 1
        group_mass = 0
        for idx, name in enumerate(ranked):
            layers[name] = k
            group_mass += profile.counts[name]
            remaining = len(ranked) - idx - 1
            if k < num_layers and remaining > 0:
                target = remaining_mass / (num_layers - k + 1)
                if group_mass >= target:
                    remaining_mass -= group_mass
                    group_mass = 0
                    k += 1

    if registry is not None:
        for name in registry.functions:
            layers.setdefault(name, num_layers)
    return LayerAssignment(layers=layers, num_layers=num_layers, policy=policy)


def average_layer_number(assignment: LayerAssignment, profile: FrequencyProfile) -> float:
    """Frequency-weighted mean layer over the profiled functions."""
    total = sum(profile.counts.values())
    if total == 0:
        raise ProfileError("zero total count: average layer number is undefined")
    weighted = 0
    for name, count in profile.counts.items():
        if name not in assignment.layers:
            raise ProfileError(f"profiled function {name} has no layer")
        weighted += count * assignment.layers[name]
    return weighted / total


def profile_to_document(profile: FrequencyProfile) -> str:
    return canonical_json({
        "counts": dict(sorted(profile.counts.items())),
        "sources": list(profile.sources),
        "weighting": profile.weighting,
    })


def profile_from_document(document: str) -> FrequencyProfile:
    import json

    raw = json.loads(document)
    return FrequencyProfile(counts=dict(raw["counts"]),
                            sources=tuple(raw.get("sources", [])),
                            weighting=raw.get("weighting", "sum"))


def assignment_to_document(assignment: LayerAssignment,
                           profile: Optional[FrequencyProfile] = None) -> str:
    doc = {
        "num_layers": assignment.num_layers,
        "policy": assignment.policy,
        "layers": dict(sorted(assignment.layers.items())),
    }
    if profile is not None:
        doc["average_layer_number"] = round(average_layer_number(assignment, profile), 6)
    return canonical_json(doc)


def assignment_from_document(document: str) -> LayerAssignment:
    import json

    raw = json.loads(document)
    return LayerAssignment(layers=dict(raw["layers"]),
                           num_layers=raw["num_layers"],
                           policy=raw.get("policy", "equal_count"))
