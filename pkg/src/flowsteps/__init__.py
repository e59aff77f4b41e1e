"""Workflow nets wired to executable Given-When-Then scenarios.

Parse a net or a feature file, translate between the two, bind step texts
to actions, and play the token game while each firing runs its tests.
"""

from .errors import (
    FeatureParseError,
    FiringError,
    FlowstepsError,
    ManifestError,
    NetStructureError,
    PnmlError,
    ScenarioLimitError,
    SutError,
    TranslationError,
)
from .gwt import (
    FeatureAst,
    Scenario,
    Step,
    StepSkeleton,
    generate_state_tag_skeletons,
    generate_step_skeletons,
    make_step,
    normalize_step_name,
    parse_feature,
    render_feature,
    render_skeletons,
)
from .mapping import (
    GwtTriple,
    ScenarioTrace,
    feature_to_pn,
    gwt_for_firing,
    pn_to_scenarios,
    scenarios_to_feature,
)
from .petri import (
    Arc,
    ConstructKind,
    Diagnostic,
    Marking,
    PetriNet,
    Place,
    ReachabilityResult,
    Transition,
    classify_constructs,
    enabled_transitions,
    fire,
    reachable_markings,
    validate_workflow_net,
)
from .pnml import parse_pnml, to_pnml
from .runtime import (
    ActionKind,
    ActionSpec,
    MockSut,
    Resolution,
    StepBinding,
    StepRegistry,
    StepResult,
    StepStatus,
    SutAdapter,
    builtin_bindings,
    execute_step,
    execute_steps,
    load_bindings_manifest,
    resolve,
    worst_status,
)
from .session import (
    BatchReport,
    EnabledEntry,
    FiringReport,
    ScenarioRun,
    Session,
    SessionPolicy,
    create_session,
    export_log_jsonl,
    fire_interactive,
    run_all_scenarios,
    session_state,
)

__version__ = "0.1.0"
