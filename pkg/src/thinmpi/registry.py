"""Catalog of MPI functions partitioned (or covered) by named functional blocks.

A registry document is JSON with top-level fields ``mode``,
``case_sensitivity``, ``blocks`` and optional ``attributes``.  Registries are
immutable after load and safe to share across threads.
"""

from __future__ import annotations

import importlib.resources
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional

from .docs import canonical_json, fingerprint
from .errors import RegistryParseError, RegistryValidationError

FUNCTION_NAME_RE = re.compile(r"^MPI_[A-Za-z0-9_]+$")

MODES = ("partition", "overlap")
CASE_SENSITIVITIES = ("sensitive", "insensitive")


@dataclass(frozen=True)
class FunctionRecord:
    """One MPI function: canonical name, owning block, protocol attributes."""

    name: str
    block_id: str
    attributes: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Block:
    """One functional block: a named subset of the function catalog."""

    id: str
    label: str
    members: frozenset[str]


@dataclass(frozen=True)
class Diagnostic:
    """One invariant violation found by :func:`validate_blocks`."""

    kind: str
    function: Optional[str]
    blocks: tuple[str, ...]
    message: str


@dataclass(frozen=True)
class Registry:
    blocks: tuple[Block, ...]
    functions: Mapping[str, FunctionRecord]
    mode: str = "partition"
    case_sensitivity: str = "sensitive"

    def __post_init__(self):
        index = {}
        for name in self.functions:
            index[self._fold(name)] = name
        object.__setattr__(self, "_index", index)

    def _fold(self, identifier: str) -> str:
        if self.case_sensitivity == "insensitive":
            return identifier.lower()
        return identifier

    def lookup(self, identifier: str) -> Optional[FunctionRecord]:
        """Resolve ``identifier`` under the registry's case rule, or ``None``."""
        name = self._index.get(self._fold(identifier))
        return self.functions[name] if name is not None else None

    def block_by_id(self, block_id: str) -> Optional[Block]:
        for block in self.blocks:
            if block.id == block_id:
                return block
        return None

    def function_names(self) -> frozenset[str]:
        return frozenset(self.functions)

    def fingerprint(self) -> str:
        return fingerprint(dump_registry(self))


def lookup(registry: Registry, identifier: str) -> Optional[FunctionRecord]:
    return registry.lookup(identifier)


def validate_blocks(registry: Registry) -> list[Diagnostic]:
    """Check the block family against the registry invariants.

    Returns one diagnostic per violation; an empty list means the registry
    is legal under its declared mode and case rule.
    """
    diags: list[Diagnostic] = []
    if not registry.blocks:
        diags.append(Diagnostic("empty_registry", None, (), "empty registry: no blocks declared"))
        return diags

    seen_block_ids: set[str] = set()
    for block in registry.blocks:
        if block.id in seen_block_ids:
            diags.append(Diagnostic("duplicate_block", None, (block.id,),
                                    f"duplicate block id {block.id!r}"))
        seen_block_ids.add(block.id)
        if not block.members:
            diags.append(Diagnostic("empty_block", None, (block.id,),
                                    f"block {block.id!r} has no members"))

    owners: dict[str, list[str]] = {}
    for block in registry.blocks:
        for name in sorted(block.members):
            owners.setdefault(name, []).append(block.id)

    for name, owner_ids in sorted(owners.items()):
        if not FUNCTION_NAME_RE.match(name):
            diags.append(Diagnostic("bad_name", name, tuple(owner_ids),
                                    f"function name {name!r} does not match MPI_<identifier>"))
        if registry.mode == "partition" and len(owner_ids) > 1:
            diags.append(Diagnostic("duplicate_membership", name, tuple(sorted(owner_ids)),
                                    f"duplicate membership: {name} appears in blocks "
                                    f"{', '.join(sorted(owner_ids))}"))
        if name not in registry.functions:
            diags.append(Diagnostic("unknown_function", name, tuple(owner_ids),
                                    f"member {name} has no function record"))

    # union-coverage direction: records not owned by any block
    for name in sorted(registry.functions):
        if name not in owners:
            diags.append(Diagnostic("uncovered_function", name, (),
                                    f"function {name} belongs to no block"))

    if registry.case_sensitivity == "insensitive":
        folded: dict[str, str] = {}
        for name in sorted(owners):
            low = name.lower()
            if low in folded and folded[low] != name:
                diags.append(Diagnostic("case_collision", name, tuple(owners[name]),
                                        f"names {folded[low]!r} and {name!r} collide "
                                        "under case-insensitive matching"))
            folded.setdefault(low, name)
    return diags


def _build_registry(blocks: Iterable[Block], mode: str, case_sensitivity: str,
                    attributes: Mapping[str, Mapping[str, float]] | None = None) -> Registry:
    """Derive function records from block membership and assemble a Registry.

    In overlap mode a function's ``block_id`` is its lexicographically
    smallest owning block.
    """
    blocks = tuple(blocks)
    attributes = attributes or {}
    owners: dict[str, list[str]] = {}
    for block in blocks:
        for name in block.members:
            owners.setdefault(name, []).append(block.id)
    functions = {
        name: FunctionRecord(name=name, block_id=min(owner_ids),
                             attributes=dict(attributes.get(name, {})))
        for name, owner_ids in owners.items()
    }
    return Registry(blocks=blocks, functions=functions, mode=mode,
                    case_sensitivity=case_sensitivity)


def load_registry(document: str) -> Registry:
    """Parse and validate a registry document.

    Raises :class:`RegistryParseError` on malformed text or schema violations
    and :class:`RegistryValidationError` when the block family breaks a
    registry invariant.
    """
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise RegistryParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise RegistryParseError("top-level value must be an object")

    mode = raw.get("mode", "partition")
    if mode not in MODES:
        raise RegistryParseError(f"field 'mode': expected one of {MODES}, got {mode!r}")
    case_sensitivity = raw.get("case_sensitivity", "sensitive")
    if case_sensitivity not in CASE_SENSITIVITIES:
        raise RegistryParseError(
            f"field 'case_sensitivity': expected one of {CASE_SENSITIVITIES}, "
            f"got {case_sensitivity!r}")

    raw_blocks = raw.get("blocks")
    if not isinstance(raw_blocks, list):
        raise RegistryParseError("field 'blocks': expected a list")
    blocks = []
    for i, entry in enumerate(raw_blocks):
        if not isinstance(entry, dict):
            raise RegistryParseError(f"field 'blocks[{i}]': expected an object")
        for key in ("id", "members"):
            if key not in entry:
                raise RegistryParseError(f"field 'blocks[{i}].{key}': missing")
        members = entry["members"]
        if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
            raise RegistryParseError(f"field 'blocks[{i}].members': expected a list of strings")
        blocks.append(Block(id=str(entry["id"]), label=str(entry.get("label", entry["id"])),
                            members=frozenset(members)))

    raw_attrs = raw.get("attributes", {})
    if not isinstance(raw_attrs, dict):
        raise RegistryParseError("field 'attributes': expected an object")
    member_names = {m for b in blocks for m in b.members}
    for func, attrs in raw_attrs.items():
        if func not in member_names:
            raise RegistryParseError(
                f"field 'attributes.{func}': function not declared in any block")
        if not isinstance(attrs, dict):
            raise RegistryParseError(f"field 'attributes.{func}': expected an object")
        for attr, weight in attrs.items():
            if not isinstance(weight, (int, float)) or weight < 0:
                raise RegistryParseError(
                    f"field 'attributes.{func}.{attr}': expected a non-negative number")

    registry = _build_registry(blocks, mode, case_sensitivity, raw_attrs)
    diags = validate_blocks(registry)
    if diags:
        raise RegistryValidationError("; ".join(d.message for d in diags))
    return registry


def dump_registry(registry: Registry) -> str:
    """Serialize a registry to its canonical document form.

    ``load_registry(dump_registry(r))`` reproduces ``r``; dumping twice is
    byte-identical.
    """
    doc = {
        "mode": registry.mode,
        "case_sensitivity": registry.case_sensitivity,
        "blocks": [
            {"id": b.id, "label": b.label, "members": sorted(b.members)}
            for b in sorted(registry.blocks, key=lambda b: b.id)
        ],
    }
    attrs = {
        rec.name: dict(sorted(rec.attributes.items()))
        for rec in registry.functions.values()
        if rec.attributes
    }
    if attrs:
        doc["attributes"] = attrs
    return canonical_json(doc)


@lru_cache(maxsize=1)
def default_registry_text() -> str:
    return (importlib.resources.files("thinmpi.data") / "default_registry.json").read_text()


def default_registry() -> Registry:
    """The bundled catalog, grouped into blocks by MPI standard chapter."""
    return load_registry(default_registry_text())
