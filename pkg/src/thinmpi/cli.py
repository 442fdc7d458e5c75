"""``thinmpi`` command-line interface.

Subcommands: scan, compose, profile, layers, simulate, pipeline.  Exit
status 0 on success, 1 on domain errors (validation, coverage, ...), 2 on
usage errors.  All structured outputs are deterministic.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import composer, layering, registry as registry_mod, scanner, stacksim
from .docs import canonical_json
from .errors import ThinMPIError

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE = 2


def _load_registry(spec: str, case_insensitive: bool) -> registry_mod.Registry:
    if spec == "default":
        spec = os.environ.get("THINMPI_REGISTRY", "default")
    if spec == "default":
        text = registry_mod.default_registry_text()
    else:
        text = Path(spec).read_text(encoding="utf-8")
    reg = registry_mod.load_registry(text)
    if case_insensitive and reg.case_sensitivity != "insensitive":
        reg = registry_mod.Registry(blocks=reg.blocks, functions=reg.functions,
                                    mode=reg.mode, case_sensitivity="insensitive")
    return reg


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--registry", default="default",
                   help="registry document path, or 'default' for the bundled catalog "
                        "(THINMPI_REGISTRY overrides the default)")
    p.add_argument("--case-insensitive", action="store_true",
                   help="match MPI identifiers case-insensitively (Fortran-style sources)")
    p.add_argument("--format", choices=("text", "json"), default="json",
                   help="report format; json is the stable structured interface")


def _cmd_scan(args: argparse.Namespace) -> int:
    reg = _load_registry(args.registry, args.case_insensitive)
    options = scanner.ScanOptions(prefixes=tuple(args.prefix))
    result = scanner.scan_corpus(args.files, reg, options, app_id=args.app_id)
    for path, message in result.errors:
        print(f"error: scan-error: {path}: {message}", file=sys.stderr)
    for usage in result.per_file:
        for diag in usage.diagnostics:
            print(f"warning: {usage.app_id}: {diag}", file=sys.stderr)
    if args.format == "json":
        _write(scanner.usage_to_document(result.merged), args.out)
    else:
        lines = [f"application: {result.merged.app_id}",
                 f"invoked ({len(result.merged.invoked)}):"]
        lines += [f"  {name}" for name in sorted(result.merged.invoked)]
        if result.merged.unknown_identifiers:
            lines.append("unknown identifiers:")
            lines += [f"  {name}" for name in sorted(result.merged.unknown_identifiers)]
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_DOMAIN_ERROR if result.errors else EXIT_OK


def _cmd_compose(args: argparse.Namespace) -> int:
    reg = _load_registry(args.registry, args.case_insensitive)
    usage = scanner.usage_from_document(Path(args.usage).read_text(encoding="utf-8"))
    lib = composer.minimal_cover(usage, reg, strategy=args.strategy,
                                 ignore_unknown=args.ignore_unknown)
    manifest = composer.emit_manifest(lib)
    if args.format == "json":
        _write(manifest, args.manifest_out)
    else:
        summary = (f"app: {lib.app_id}\nstrategy: {lib.strategy}\nm: {lib.m}\n"
                   f"blocks: {', '.join(lib.selected_blocks) or '(none)'}\n"
                   f"covered functions: {len(lib.covered_functions)}\n")
        _write(summary, args.manifest_out)
    if args.shim_out:
        shim = composer.emit_shim(lib, invoked_only=args.invoked_only)
        for warning in shim.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        Path(args.shim_out).write_text(shim.source, encoding="utf-8")
    return EXIT_OK


def _profile_inputs(args: argparse.Namespace) -> list:
    inputs: list = []
    for path in args.traces:
        inputs.append(layering.parse_trace(Path(path).read_text(encoding="utf-8"),
                                           app_id=path))
    for path in args.usage:
        inputs.append(scanner.usage_from_document(Path(path).read_text(encoding="utf-8")))
    return inputs


def _cmd_profile(args: argparse.Namespace) -> int:
    reg = _load_registry(args.registry, args.case_insensitive)
    profile = layering.build_profile(_profile_inputs(args), reg,
                                     weighting=args.weighting)
    if args.format == "json":
        _write(layering.profile_to_document(profile), args.out)
    else:
        lines = [f"weighting: {profile.weighting}",
                 f"sources: {', '.join(profile.sources)}"]
        for name, count in sorted(profile.counts.items(),
                                  key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"  {name}: {count}")
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_layers(args: argparse.Namespace) -> int:
    reg = _load_registry(args.registry, args.case_insensitive)
    profile = layering.profile_from_document(Path(args.profile).read_text(encoding="utf-8"))
    assignment = layering.assign_layers(profile, args.num_layers, policy=args.policy,
                                        registry=reg if args.include_registry else None)
    if args.format == "json":
        _write(layering.assignment_to_document(assignment, profile), args.out)
    else:
        avg = layering.average_layer_number(assignment, profile)
        lines = [f"layers: {assignment.num_layers}", f"policy: {assignment.policy}",
                 f"average layer number: {avg:.6f}"]
        for name, layer in sorted(assignment.layers.items(), key=lambda kv: (kv[1], kv[0])):
            lines.append(f"  layer {layer}: {name}")
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _build_model(config: dict, reg, assignment) -> stacksim.StackModel:
    kind = config["kind"]
    if kind == "layered" and assignment is None:
        raise stacksim.SimulationError(
            "layered model config requires --assignment")
    return stacksim.build_stack(
        kind,
        registry=reg,
        depth=int(config.get("D", stacksim.DEFAULT_CONVENTIONAL_DEPTH)),
        assignment=assignment if kind == "layered" else None,
        layer_cost=float(config.get("layer_cost", 1.0)),
        label=str(config.get("label", "")),
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    reg = _load_registry(args.registry, args.case_insensitive)
    trace = layering.parse_trace(Path(args.trace).read_text(encoding="utf-8"),
                                 app_id=args.trace)
    counts = {reg.lookup(name).name if reg.lookup(name) else name: count
              for name, count in trace.counts.items()}
    assignment = None
    if args.assignment:
        assignment = layering.assignment_from_document(
            Path(args.assignment).read_text(encoding="utf-8"))
    models = []
    for path in args.model:
        config = stacksim.load_model_config(Path(path).read_text(encoding="utf-8"))
        models.append(_build_model(config, reg, assignment))
    comparison = stacksim.compare_configs(counts, models)
    if args.format == "json":
        _write(stacksim.comparison_to_document(comparison, counts), args.out)
    else:
        lines = []
        for label, report in zip(comparison.labels, comparison.reports):
            lines.append(f"{label}: total={report.total_cost:g} events={report.events} "
                         f"mean={report.mean_cost_per_call:g}")
        for key, value in sorted(comparison.ratios.items()):
            lines.append(f"ratio {key} = {value:.6f}")
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_pipeline(args: argparse.Namespace) -> int:
    reg = _load_registry(args.registry, args.case_insensitive)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    options = scanner.ScanOptions(prefixes=tuple(args.prefix))
    corpus = scanner.scan_corpus(args.sources, reg, options, app_id=args.app_id)
    for path, message in corpus.errors:
        print(f"error: scan-error: {path}: {message}", file=sys.stderr)
    if corpus.errors:
        return EXIT_DOMAIN_ERROR
    usage = corpus.merged
    (out_dir / "usage.json").write_text(scanner.usage_to_document(usage), encoding="utf-8")

    lib = composer.minimal_cover(usage, reg, strategy=args.strategy,
                                 ignore_unknown=args.ignore_unknown)
    (out_dir / "manifest.json").write_text(composer.emit_manifest(lib), encoding="utf-8")
    shim = composer.emit_shim(lib, invoked_only=args.invoked_only)
    for warning in shim.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    (out_dir / "shim.c").write_text(shim.source, encoding="utf-8")

    inputs: list = [layering.parse_trace(Path(p).read_text(encoding="utf-8"), app_id=p)
                    for p in args.traces]
    if not inputs:
        inputs = [usage]
    profile = layering.build_profile(inputs, reg, weighting=args.weighting)
    (out_dir / "profile.json").write_text(layering.profile_to_document(profile),
                                          encoding="utf-8")

    assignment = layering.assign_layers(profile, args.num_layers, policy=args.policy)
    (out_dir / "layers.json").write_text(
        layering.assignment_to_document(assignment, profile), encoding="utf-8")

    models = [
        stacksim.build_stack("conventional", registry=reg, depth=args.conventional_depth,
                             layer_cost=args.layer_cost),
        stacksim.build_stack("layered", assignment=assignment,
                             layer_cost=args.layer_cost),
        stacksim.build_stack("per_function_protocol", registry=reg,
                             layer_cost=args.layer_cost),
    ]
    comparison = stacksim.compare_configs(profile.counts, models)
    (out_dir / "comparison.json").write_text(
        stacksim.comparison_to_document(comparison, profile.counts), encoding="utf-8")

    if args.format == "text":
        avg = layering.average_layer_number(assignment, profile)
        print(f"invoked: {len(usage.invoked)} functions; cover m={lib.m} "
              f"({', '.join(lib.selected_blocks) or 'none'})")
        print(f"average layer number: {avg:.6f}")
        for label, report in zip(comparison.labels, comparison.reports):
            print(f"{label}: total={report.total_cost:g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thinmpi",
        description="Thin MPI library composition and stack cost analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="extract the invoked-function set from sources")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--app-id", default="app")
    p.add_argument("--prefix", action="append", default=None,
                   help="identifier prefix to match (repeatable; default MPI_)")
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("compose", help="compute the minimal block cover and emit artifacts")
    p.add_argument("usage", metavar="USAGE_DOC")
    p.add_argument("--strategy", choices=composer.STRATEGIES, default="exact")
    p.add_argument("--ignore-unknown", action="store_true")
    p.add_argument("--invoked-only", action="store_true",
                   help="emit shim wrappers only for invoked functions")
    p.add_argument("--manifest-out", default=None)
    p.add_argument("--shim-out", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("profile", help="build a global invocation-frequency profile")
    p.add_argument("--traces", nargs="*", default=[], metavar="TRACE")
    p.add_argument("--usage", nargs="*", default=[], metavar="USAGE_DOC")
    p.add_argument("--weighting", choices=layering.WEIGHTINGS, default="sum")
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("layers", help="assign stack layers inversely to frequency")
    p.add_argument("profile", metavar="PROFILE_DOC")
    p.add_argument("--L", "--num-layers", dest="num_layers", type=int,
                   default=layering.DEFAULT_NUM_LAYERS)
    p.add_argument("--policy", choices=layering.POLICIES, default="equal_count")
    p.add_argument("--include-registry", action="store_true",
                   help="also place unprofiled registry functions (top layer)")
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_layers)

    p = sub.add_parser("simulate", help="compare stack configurations on a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--model", action="append", required=True,
                   help="stack model config document (repeatable, >= 2)")
    p.add_argument("--assignment", default=None,
                   help="layer assignment document for layered models")
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("pipeline", help="scan, compose, profile, layer and simulate")
    p.add_argument("sources", nargs="+", metavar="SOURCE")
    p.add_argument("--traces", nargs="*", default=[], metavar="TRACE")
    p.add_argument("--app-id", default="app")
    p.add_argument("--prefix", action="append", default=None)
    p.add_argument("--strategy", choices=composer.STRATEGIES, default="exact")
    p.add_argument("--ignore-unknown", action="store_true")
    p.add_argument("--invoked-only", action="store_true")
    p.add_argument("--weighting", choices=layering.WEIGHTINGS, default="sum")
    p.add_argument("--L", "--num-layers", dest="num_layers", type=int,
                   default=layering.DEFAULT_NUM_LAYERS)
    p.add_argument("--policy", choices=layering.POLICIES, default="equal_count")
    p.add_argument("--layer-cost", type=float, default=1.0)
    p.add_argument("--conventional-depth", type=int,
                   default=stacksim.DEFAULT_CONVENTIONAL_DEPTH)
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "prefix", None) is None and hasattr(args, "prefix"):
        args.prefix = ["MPI_"]
    try:
        return args.func(args)
    except ThinMPIError as exc:
        print(f"error: {exc.diagnostic()}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: io-error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
