"""Library and CLI for discovering computational laws of an application.

Conjectures (irreducible extended programs) are enumerated from binding-matrix
templates, screened against empirical data, checked continuously for
soundness by experimental computation, proved by forward-chaining program
extension, and kept in a knowledge base partitioned into axioms, theorems and
underivables with full dependency tracing.
"""

__version__ = "0.1.0"

from .application import (
    Application,
    APSignature,
    MachParams,
    ParseError,
    UnknownAtomicProgram,
    enumerate_assignments,
    evaluate_ap,
    load_application,
    load_application_file,
)
from .conjecture import TemplateCandidate, enumerate_templates, screen_against_data, structural_filter
from .kernel import (
    BindingTemplate,
    ExecutionResult,
    FreshNames,
    Program,
    Statement,
    Violation,
    apply_renaming,
    binding_template,
    conc,
    execute,
    io_match,
    is_valid,
    primary_input_list,
    program,
    stmt,
    structurally_equivalent,
    sublists,
    validate_program,
)
from .knowledge import (
    DuplicateRecord,
    IEPRecord,
    Kind,
    KnowledgeBase,
    PartitionView,
    Snapshot,
    StateMetrics,
    Status,
    UnknownLabel,
    dependency_closure,
)
from .orchestrator import Event, RunConfig, RunResult, run_loop, seed_knowledge
from .prover import (
    Exhausted,
    Proof,
    ProofStep,
    ReductionResult,
    Resolved,
    Unresolvable,
    generate_extensions,
    prove,
    reduce_connections,
    replay,
    resolve_circularity,
)
from .soundness import SoundnessReport, check_ep, check_falsity, recheck_pass

__all__ = [
    "__version__",
    # kernel
    "Statement", "Program", "BindingTemplate", "ExecutionResult", "Violation",
    "FreshNames", "stmt", "program", "conc", "validate_program", "is_valid",
    "primary_input_list", "execute", "binding_template", "structurally_equivalent",
    "sublists", "io_match", "apply_renaming",
    # application
    "Application", "APSignature", "MachParams", "ParseError", "UnknownAtomicProgram",
    "load_application", "load_application_file", "evaluate_ap", "enumerate_assignments",
    # knowledge
    "KnowledgeBase", "Snapshot", "IEPRecord", "PartitionView", "StateMetrics",
    "Status", "Kind", "DuplicateRecord", "UnknownLabel", "dependency_closure",
    # conjecture
    "TemplateCandidate", "enumerate_templates", "structural_filter", "screen_against_data",
    # soundness
    "SoundnessReport", "check_ep", "check_falsity", "recheck_pass",
    # prover
    "Proof", "ProofStep", "Exhausted", "ReductionResult", "Resolved", "Unresolvable",
    "generate_extensions", "prove", "replay", "reduce_connections", "resolve_circularity",
    # orchestrator
    "RunConfig", "RunResult", "Event", "run_loop", "seed_knowledge",
]
