"""Minimal block cover of a usage set, plus manifest and dispatch-shim output.

The composed library is the union of the fewest blocks whose members contain
every invoked function.  In partition mode that cover is forced; in overlap
mode an exact search (or the classic greedy heuristic) picks it.
"""

from __future__ import annotations

import importlib.resources
import itertools
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional

from .docs import canonical_json, fingerprint
from .errors import CoverageError
from .registry import Registry
from .scanner import UsageSet

EXACT_BLOCK_LIMIT = 20

STRATEGIES = ("exact", "greedy")


@dataclass(frozen=True)
class ComposedLibrary:
    app_id: str
    selected_blocks: tuple[str, ...]
    m: int
    covered_functions: frozenset[str]
    usage: UsageSet
    strategy: str
    registry_fingerprint: str


@dataclass(frozen=True)
class ShimResult:
    source: str
    warnings: tuple[str, ...]


def _exact_cover(invoked: frozenset[str], candidates: list[tuple[str, frozenset[str]]]) -> list[str]:
    """Smallest covering subset of candidate blocks; lexicographically first
    among the optima.  Candidates must be sorted by id."""
    names = sorted(invoked)
    bit = {name: 1 << i for i, name in enumerate(names)}
    full = (1 << len(names)) - 1
    masks = [(block_id, sum(bit[f] for f in members if f in bit))
             for block_id, members in candidates]
    ids = [block_id for block_id, _ in masks]
    for size in range(1, len(masks) + 1):
        for combo in itertools.combinations(range(len(masks)), size):
            acc = 0
            for idx in combo:
                acc |= masks[idx][1]
            if acc == full:
                return [ids[idx] for idx in combo]
    raise CoverageError("no covering block subset exists")  # pre-checked; unreachable


def _greedy_cover(invoked: frozenset[str], candidates: list[tuple[str, frozenset[str]]]) -> list[str]:
    uncovered = set(invoked)
    chosen: list[str] = []
    remaining = dict(candidates)
    while uncovered:
        best_id = min(remaining,
                      key=lambda bid: (-len(remaining[bid] & uncovered), bid))
        gain = remaining[best_id] & uncovered
        if not gain:
            raise CoverageError("no covering block subset exists")  # pre-checked; unreachable
        chosen.append(best_id)
        uncovered -= gain
        del remaining[best_id]
    return chosen


def minimal_cover(usage: UsageSet, registry: Registry, strategy: str = "exact",
                  ignore_unknown: bool = False) -> ComposedLibrary:
    """Select the minimal family of blocks covering ``usage.invoked``.

    Partition mode has a unique, analytically minimal cover (every touched
    block is mandatory); overlap mode searches.  Exact search refuses more
    than ``EXACT_BLOCK_LIMIT`` candidate blocks.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if usage.unknown_identifiers and not ignore_unknown:
        raise CoverageError(
            "unknown identifiers in usage set: "
            + ", ".join(sorted(usage.unknown_identifiers))
            + " (resolve them in the registry or pass ignore_unknown)")
    for name in sorted(usage.invoked):
        if name not in registry.functions:
            raise CoverageError(f"invoked function {name} is not in any registry block")

    invoked = usage.invoked
    if registry.mode == "partition":
        selected = sorted({registry.functions[f].block_id for f in invoked})
    else:
        candidates = sorted(
            (b.id, b.members) for b in registry.blocks if b.members & invoked)
        if not invoked:
            selected = []
        elif strategy == "exact":
            if len(candidates) > EXACT_BLOCK_LIMIT:
                raise CoverageError(
                    f"{len(candidates)} candidate blocks exceed the exact-search "
                    f"limit of {EXACT_BLOCK_LIMIT}; use strategy='greedy'")
            selected = sorted(_exact_cover(invoked, candidates))
        else:
            selected = sorted(_greedy_cover(invoked, candidates))

    covered = frozenset(
        member for bid in selected for member in registry.block_by_id(bid).members)
    return ComposedLibrary(
        app_id=usage.app_id,
        selected_blocks=tuple(selected),
        m=len(selected),
        covered_functions=covered,
        usage=usage,
        strategy=strategy,
        registry_fingerprint=registry.fingerprint(),
    )


def emit_manifest(lib: ComposedLibrary) -> str:
    """Deterministic per-application library description."""
    return canonical_json({
        "app_id": lib.app_id,
        "strategy": lib.strategy,
        "m": lib.m,
        "selected_blocks": sorted(lib.selected_blocks),
        "covered_functions": sorted(lib.covered_functions),
        "invoked": sorted(lib.usage.invoked),
        "registry_fingerprint": lib.registry_fingerprint,
    })


_C_PRELUDE = """\
typedef int MPI_Comm;
typedef int MPI_Datatype;
typedef int MPI_Op;
typedef int MPI_Request;
typedef int MPI_Group;
typedef int MPI_Win;
typedef int MPI_File;
typedef int MPI_Info;
typedef int MPI_Errhandler;
typedef long MPI_Aint;
typedef long long MPI_Offset;
typedef struct { int MPI_SOURCE; int MPI_TAG; int MPI_ERROR; } MPI_Status;
"""

_DOUBLE_RETURNS = frozenset({"MPI_Wtime", "MPI_Wtick"})

_PARAM_NAME_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*(\[[^\]]*\])?\s*$")


@lru_cache(maxsize=1)
def bundled_signatures() -> Mapping[str, list[str]]:
    text = (importlib.resources.files("thinmpi.data") / "signatures.json").read_text()
    return json.loads(text)


def _param_name(decl: str) -> str:
    m = _PARAM_NAME_RE.search(decl)
    if not m:
        raise ValueError(f"cannot find parameter name in {decl!r}")
    return m.group(1)


def emit_shim(lib: ComposedLibrary, invoked_only: bool = False,
              signatures: Optional[Mapping[str, list[str]]] = None) -> ShimResult:
    """Generate the C dispatch shim for a composed library.

    One wrapper per covered function (or per invoked function with
    ``invoked_only``), each forwarding to the underscore-prefixed backend
    symbol.  Functions missing from the signature table degrade to an
    unprototyped (variadic-style) passthrough and raise a warning.
    """
    signatures = signatures if signatures is not None else bundled_signatures()
    names = sorted(lib.usage.invoked if invoked_only else lib.covered_functions)
    manifest_fp = fingerprint(emit_manifest(lib))

    lines = [
        "/*",
        " * thin MPI dispatch shim (generated; do not edit)",
        f" * app: {lib.app_id}",
        f" * strategy: {lib.strategy}",
        f" * blocks (m={lib.m}): {', '.join(sorted(lib.selected_blocks)) or '(none)'}",
        f" * wrappers: {len(names)}",
        f" * manifest-fingerprint: {manifest_fp}",
        f" * registry-fingerprint: {lib.registry_fingerprint}",
        " */",
        "",
        _C_PRELUDE,
    ]
    warnings: list[str] = []
    for name in names:
        args = signatures.get(name)
        ret = "double" if name in _DOUBLE_RETURNS else "int"
        if args is None:
            warnings.append(
                f"no signature for {name}; emitted unprototyped passthrough")
            lines += [
                f"/* signature unknown: unprototyped passthrough */",
                f"extern {ret} _{name}();",
                f"{ret} {name}()",
                "{",
                f"    return _{name}();",
                "}",
                "",
            ]
            continue
        params = ", ".join(args) if args else "void"
        forwarded = ", ".join(_param_name(a) for a in args)
        lines += [
            f"extern {ret} _{name}({params});",
            f"{ret} {name}({params})",
            "{",
            f"    return _{name}({forwarded});",
            "}",
            "",
        ]
    return ShimResult(source="\n".join(lines).rstrip("\n") + "\n",
                      warnings=tuple(warnings))
