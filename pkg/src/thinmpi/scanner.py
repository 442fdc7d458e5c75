"""Lexical extraction of the set of MPI functions an application invokes.

The scan is deliberately shallow: comments and string literals are stripped
first, then any ``MPI_``-prefixed identifier immediately followed by ``(`` is
treated as a call.  Preprocessing is not performed, so all conditional
branches are scanned (a safe over-approximation).
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

from .docs import canonical_json
from .registry import Registry


class CallSite(NamedTuple):
    function: str
    path: str
    line: int


@dataclass(frozen=True)
class ScanOptions:
    """Knobs for the lexical scan.

    prefixes: identifier prefixes treated as MPI names.  Add ``PMPI_`` to
    also match profiling-interface aliases.
    """

    prefixes: tuple[str, ...] = ("MPI_",)


@dataclass(frozen=True)
class UsageSet:
    """The set of registry functions one application invokes."""

    app_id: str
    invoked: frozenset[str]
    call_sites: tuple[CallSite, ...]
    unknown_identifiers: frozenset[str] = frozenset()
    diagnostics: tuple[str, ...] = ()


@dataclass
class CorpusScan:
    per_file: list[UsageSet]
    merged: UsageSet
    errors: list[tuple[str, str]] = field(default_factory=list)


_IDENT_CALL_RE = re.compile(r"\b([A-Za-z_][A-Za-z0-9_]*)\s*\(")


def strip_noise(source: str, diagnostics: Optional[list[str]] = None) -> str:
    """Blank out comments and string/character literals.

    Every stripped byte except newlines becomes a space, so line numbers and
    the total line count are preserved.  An unterminated comment or literal
    is reported via ``diagnostics`` and stripped through end of input.
    """
    out = list(source)
    i = 0
    n = len(source)

    def blank(start: int, end: int) -> None:
        for k in range(start, end):
            if out[k] != "\n":
                out[k] = " "

    while i < n:
        c = source[i]
        nxt = source[i + 1] if i + 1 < n else ""
        if c == "/" and nxt == "*":
            end = source.find("*/", i + 2)
            if end == -1:
                if diagnostics is not None:
                    diagnostics.append(
                        f"unterminated block comment starting at line "
                        f"{source.count(chr(10), 0, i) + 1}")
                blank(i, n)
                break
            blank(i, end + 2)
            i = end + 2
        elif c == "/" and nxt == "/":
            end = source.find("\n", i)
            end = n if end == -1 else end
            blank(i, end)
            i = end
        elif c in ("\"", "'"):
            quote = c
            j = i + 1
            closed = False
            while j < n:
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == quote:
                    closed = True
                    break
                if source[j] == "\n":
                    # a raw newline cannot legally appear inside a literal
                    break
                j += 1
            if not closed:
                if diagnostics is not None:
                    diagnostics.append(
                        f"unterminated {'string' if quote == chr(34) else 'character'} "
                        f"literal at line {source.count(chr(10), 0, i) + 1}")
                blank(i, n)
                break
            else:
                blank(i, j + 1)
                i = j + 1
        else:
            i += 1
    return "".join(out)


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for m in re.finditer("\n", text):
        starts.append(m.end())
    return starts


def scan_text(source: str, registry: Registry, options: Optional[ScanOptions] = None,
              app_id: str = "<text>", path: str = "<text>") -> UsageSet:
    """Extract the usage set from one source text.

    Identifiers matching a configured prefix and followed by ``(`` count as
    calls; prefixed identifiers without ``(`` (constants such as
    ``MPI_COMM_WORLD``) are ignored; prefixed call-form identifiers absent
    from the registry are reported as unknown, never dropped.
    """
    options = options or ScanOptions()
    diagnostics: list[str] = []
    clean = strip_noise(source, diagnostics)
    starts = _line_starts(clean)

    insensitive = registry.case_sensitivity == "insensitive"

    def has_prefix(ident: str) -> bool:
        probe = ident.lower() if insensitive else ident
        for prefix in options.prefixes:
            if probe.startswith(prefix.lower() if insensitive else prefix):
                return True
        return False

    invoked: set[str] = set()
    unknown: set[str] = set()
    sites: list[CallSite] = []
    for m in _IDENT_CALL_RE.finditer(clean):
        ident = m.group(1)
        if not has_prefix(ident):
            continue
        line = bisect.bisect_right(starts, m.start(1))
        record = registry.lookup(ident)
        if record is not None:
            invoked.add(record.name)
            sites.append(CallSite(record.name, path, line))
        else:
            unknown.add(ident)
            sites.append(CallSite(ident, path, line))
    return UsageSet(app_id=app_id, invoked=frozenset(invoked),
                    call_sites=tuple(sites), unknown_identifiers=frozenset(unknown),
                    diagnostics=tuple(diagnostics))


def merge_usage(app_id: str, parts: Iterable[UsageSet]) -> UsageSet:
    """Order-insensitive union of usage sets with canonically sorted sites."""
    invoked: set[str] = set()
    unknown: set[str] = set()
    sites: list[CallSite] = []
    diagnostics: list[str] = []
    for part in parts:
        invoked |= part.invoked
        unknown |= part.unknown_identifiers
        sites.extend(part.call_sites)
        diagnostics.extend(part.diagnostics)
    sites.sort(key=lambda s: (s.path, s.line, s.function))
    return UsageSet(app_id=app_id, invoked=frozenset(invoked), call_sites=tuple(sites),
                    unknown_identifiers=frozenset(unknown), diagnostics=tuple(diagnostics))


def scan_corpus(paths: Sequence[str | Path], registry: Registry,
                options: Optional[ScanOptions] = None,
                app_id: str = "corpus") -> CorpusScan:
    """Scan many files; unreadable files become error entries, not failures."""
    per_file: list[UsageSet] = []
    errors: list[tuple[str, str]] = []
    for p in paths:
        p = Path(p)
        try:
            text = p.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            errors.append((str(p), str(exc)))
            continue
        per_file.append(scan_text(text, registry, options, app_id=str(p), path=str(p)))
    merged = merge_usage(app_id, per_file)
    return CorpusScan(per_file=per_file, merged=merged, errors=errors)


def usage_to_document(usage: UsageSet) -> str:
    """Serialize a usage set to its canonical document form."""
    return canonical_json({
        "app_id": usage.app_id,
        "invoked": sorted(usage.invoked),
        "call_sites": [
            {"function": s.function, "path": s.path, "line": s.line}
            for s in usage.call_sites
        ],
        "unknown_identifiers": sorted(usage.unknown_identifiers),
    })


def usage_from_document(document: str) -> UsageSet:
    import json

    raw = json.loads(document)
    return UsageSet(
        app_id=raw["app_id"],
        invoked=frozenset(raw["invoked"]),
        call_sites=tuple(CallSite(s["function"], s["path"], s["line"])
                         for s in raw.get("call_sites", [])),
        unknown_identifiers=frozenset(raw.get("unknown_identifiers", [])),
    )
