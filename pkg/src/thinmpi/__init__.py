"""Thin MPI library toolchain.

Pipeline: scan application sources for invoked MPI functions, compose the
minimal block cover into a thin library (manifest + dispatch shim), build
corpus-wide invocation-frequency profiles, assign stack layers inversely to
frequency, and simulate traversal costs across stack architectures.
"""

from .composer import ComposedLibrary, emit_manifest, emit_shim, minimal_cover
from .errors import (CoverageError, ProfileError, RegistryParseError,
                     RegistryValidationError, SimulationError, ThinMPIError)
from .layering import (FrequencyProfile, LayerAssignment, Trace, assign_layers,
                       average_layer_number, build_profile, parse_trace)
from .registry import (Block, FunctionRecord, Registry, default_registry,
                       dump_registry, load_registry, lookup, validate_blocks)
from .scanner import (CallSite, ScanOptions, UsageSet, scan_corpus, scan_text,
                      strip_noise)
from .stacksim import (ComparisonReport, StackModel, TraceCostReport,
                       build_stack, compare_configs, simulate_trace)

__version__ = "0.1.0"
