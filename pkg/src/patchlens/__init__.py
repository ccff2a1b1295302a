"""patchlens: AST-level patch analysis and repair-pattern detection."""

from .differ import (
    DEFAULT_OPTIONS,
    Delete,
    DiffOptions,
    EditScript,
    Insert,
    MappingStore,
    Move,
    ScriptApplyError,
    Update,
    apply_script,
    dump_script,
    edit_script,
    match,
)
from .harness import (
    AnalysisOptions,
    EvaluationCounts,
    MetricsReport,
    OracleAnnotation,
    PatchCase,
    PatchReport,
    analyze_patch,
    apply_unified_diff,
    compare_to_oracle,
    compute_metrics,
    load_case,
    run_corpus,
)
from .parser import ParseError, parse
from .patterns import (
    Anchor,
    DetectorOptions,
    DiffContext,
    PatternGroup,
    PatternId,
    PatternInstance,
    detect_all,
    group_of,
)
from .printer import pretty_print
from .tree import AstNode, NodeKind, SourceSpan, dump_tree, isomorphic, postorder

__version__ = "0.1.0"

__all__ = [
    "AstNode",
    "NodeKind",
    "SourceSpan",
    "dump_tree",
    "isomorphic",
    "postorder",
    "parse",
    "ParseError",
    "pretty_print",
    "match",
    "edit_script",
    "apply_script",
    "dump_script",
    "MappingStore",
    "EditScript",
    "Insert",
    "Delete",
    "Update",
    "Move",
    "DiffOptions",
    "DEFAULT_OPTIONS",
    "ScriptApplyError",
    "PatternId",
    "PatternGroup",
    "PatternInstance",
    "Anchor",
    "DiffContext",
    "DetectorOptions",
    "detect_all",
    "group_of",
    "PatchCase",
    "PatchReport",
    "OracleAnnotation",
    "EvaluationCounts",
    "MetricsReport",
    "AnalysisOptions",
    "analyze_patch",
    "apply_unified_diff",
    "compare_to_oracle",
    "compute_metrics",
    "run_corpus",
    "load_case",
    "__version__",
]
