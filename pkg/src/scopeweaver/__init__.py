"""Toolkit for carving self-contained neural-network blocks out of source corpora.

Pipeline: scan repositories into a content-addressed index, resolve a target
block's minimal scope-aware dependency closure, reorder definitions, emit one
self-contained module, and validate it in stages.  Duplicate filtering and a
structural gate for training-spec documents ride along on the same core.
"""

__version__ = "0.1.0"

from .assembler import AssembledModule, CycleError, NameCollision, assemble, topo_order
from .dedup import DedupStore, fingerprint, normalize
from .resolver import (
    AmbiguousTarget,
    ClosureResult,
    DependencyGraph,
    TargetNotFound,
    build_dependency_graph,
    closure,
    find_target,
    resolve_name,
)
from .scanner import BlockCandidate, CorpusIndex, ScanConfig, classify_category, scan
from .scopes import ScopeError, ScopeTable, build_scopes
from .specgate import GateOutcome, RetryLedger, TrainSpec, retry_gate, validate_spec
from .store import IndexStore, get_blob, put_blob
from .syntax import (
    EncodingError,
    SourceSyntaxError,
    SourceUnit,
    SyntaxTree,
    TokenizeError,
    emit,
    parse_lossless,
    tokenize_unit,
)
from .validation import (
    ExecutabilityStats,
    ProtocolError,
    ValidationReport,
    executability_report,
    validate_dynamic,
    validate_module,
    validate_static,
)
