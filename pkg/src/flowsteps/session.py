"""Interactive token-game sessions and non-interactive batch runs.

Firing a transition executes its bound steps against the session's adapter,
produces the GWT-equivalent message, and moves tokens only when the steps
pass (or the policy says to advance anyway). Every firing is logged.
"""

from __future__ import annotations

import copy
import json
import uuid
from dataclasses import dataclass

from .errors import FiringError, TranslationError
from .mapping import (
    GwtTriple,
    ScenarioTrace,
    _scenario_name,
    gwt_for_firing,
    pn_to_scenarios,
)
from .petri import (
    ConstructKind,
    Marking,
    PetriNet,
    enabled_transitions,
    fire,
    validate_workflow_net,
)
from .runtime import (
    MockSut,
    StepRegistry,
    StepResult,
    StepStatus,
    SutAdapter,
    execute_steps,
    load_bindings_manifest,
    worst_status,
)

_EMPTY_SUT = {"start_page": "blank", "pages": {"blank": {}}}


@dataclass(frozen=True)
class FiringReport:
    """What one firing attempt did: message, step outcomes, token movement."""

    transition: str
    gwt: GwtTriple
    step_results: tuple[StepResult, ...]
    advanced: bool
    marking_after: Marking
    parallel_branch_reports: dict | None = None

    @property
    def status(self) -> StepStatus:
        return worst_status(r.status for r in self.step_results)

    def to_dict(self) -> dict:
        return {
            "transition": self.transition,
            "gwt": self.gwt.to_dict(),
            "step_results": [r.to_dict() for r in self.step_results],
            "status": self.status.value,
            "advanced": self.advanced,
            "marking_after": self.marking_after.to_dict(),
            "parallel_branch_reports": self.parallel_branch_reports,
        }


@dataclass(frozen=True)
class EnabledEntry:
    id: str
    label: str
    constructs: tuple[ConstructKind, ...]
    or_alternative: bool

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "construct": [k.value for k in self.constructs],
            "or_alternative": self.or_alternative,
        }


@dataclass
class SessionPolicy:
    advance_on_failure: bool = False


class Session:
    """One interactive run: net + marking + registry + adapter + log."""

    def __init__(
        self,
        net: PetriNet,
        registry: StepRegistry,
        transition_map: dict[str, list[str]],
        sut_fixture: dict | None,
        policy: SessionPolicy | None = None,
        session_id: str | None = None,
        marking: Marking | None = None,
    ):
        self.id = session_id or uuid.uuid4().hex
        self.net = net
        self.registry = registry
        self.transition_map = transition_map
        self.policy = policy or SessionPolicy()
        self._sut_fixture = copy.deepcopy(sut_fixture) if sut_fixture else None
        self._initial_marking = marking or net.initial_marking
        self.marking = self._initial_marking
        self.sut: SutAdapter = self._fresh_sut()
        self.log: list[FiringReport] = []

    def _fresh_sut(self) -> SutAdapter:
        return MockSut(copy.deepcopy(self._sut_fixture or _EMPTY_SUT))

    def reset(self, sut_fixture: dict | None = None) -> list[FiringReport]:
        """Return to the initial marking with a fresh adapter.

        Passes back the previous log for archival. A replacement sut fixture
        may be supplied (e.g. after correcting the system under test).
        """
        if sut_fixture is not None:
            self._sut_fixture = copy.deepcopy(sut_fixture)
        archived = self.log
        self.log = []
        self.marking = self._initial_marking
        self.sut = self._fresh_sut()
        return archived


def create_session(
    net: PetriNet,
    manifest: dict | str | None = None,
    sut_fixture: dict | str | None = None,
    policy: SessionPolicy | None = None,
    *,
    session_id: str | None = None,
    marking: Marking | None = None,
) -> Session:
    """Validate inputs and start a session at the net's initial marking."""
    diagnostics = validate_workflow_net(net)
    if diagnostics:
        details = "; ".join(d.message for d in diagnostics)
        raise TranslationError(f"not a workflow net: {details}")
    registry, transition_map = load_bindings_manifest(manifest)
    if isinstance(sut_fixture, str):
        sut_fixture = json.loads(sut_fixture)
    return Session(
        net,
        registry,
        transition_map,
        sut_fixture,
        policy,
        session_id=session_id,
        marking=marking,
    )


def session_state(session: Session) -> dict:
    """Marking, annotated enabled transitions, and the log so far."""
    enabled = enabled_transitions(session.net, session.marking)
    enabled_set = set(enabled)
    entries = []
    for tid in enabled:
        constructs = _transition_constructs(session.net, tid)
        or_alternative = any(
            any(t != tid and t in enabled_set for t, _ in session.net.outputs_of(pid))
            for pid, _ in session.net.inputs_of(tid)
        )
        entries.append(
            EnabledEntry(
                id=tid,
                label=session.net.label_of(tid),
                constructs=constructs,
                or_alternative=or_alternative,
            )
        )
    return {
        "marking": session.marking,
        "enabled": entries,
        "log": tuple(session.log),
    }


def _transition_constructs(net: PetriNet, tid: str) -> tuple[ConstructKind, ...]:
    kinds = []
    if len(net.outputs_of(tid)) > 1:
        kinds.append(ConstructKind.AND_SPLIT)
    if len(net.inputs_of(tid)) > 1:
        kinds.append(ConstructKind.AND_JOIN)
    if not kinds:
        kinds.append(ConstructKind.SEQUENCE)
    return tuple(kinds)


def fire_interactive(session: Session, transition: str) -> FiringReport:
    """Run the transition's bound steps, then move tokens if they passed.

    The GWT message is produced even when steps fail; a failed firing leaves
    the marking untouched (unless the policy advances on failure) and the
    report is appended to the log either way. Firing a transition that is
    not enabled raises without logging.
    """
    if transition not in set(enabled_transitions(session.net, session.marking)):
        raise FiringError(f"transition {transition!r} is not enabled")
    gwt = gwt_for_firing(session.net, session.marking, transition)
    steps = session.transition_map.get(transition, [])
    results = execute_steps(session.registry, session.sut, steps)
    outcome = worst_status(r.status for r in results)
    advanced = outcome is StepStatus.PASSED or session.policy.advance_on_failure
    if advanced:
        session.marking = fire(session.net, session.marking, transition)
    report = FiringReport(
        transition=transition,
        gwt=gwt,
        step_results=tuple(results),
        advanced=advanced,
        marking_after=session.marking,
    )
    session.log.append(report)
    return report


def export_log_jsonl(log) -> str:
    """Serialize firing reports as JSON lines, one report per line."""
    return "".join(json.dumps(report.to_dict(), sort_keys=True) + "\n" for report in log)


@dataclass(frozen=True)
class ScenarioRun:
    name: str
    trace: ScenarioTrace
    reports: tuple[FiringReport, ...]
    status: StepStatus

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status.value,
            "transitions": list(self.trace.transitions_fired),
            "parallel_groups": [sorted(g) for g in self.trace.parallel_groups],
            "truncated": self.trace.truncated,
            "reports": [r.to_dict() for r in self.reports],
        }


@dataclass(frozen=True)
class BatchReport:
    scenarios: tuple[ScenarioRun, ...]

    @property
    def summary(self) -> dict[str, int]:
        counts = {"passed": 0, "failed": 0, "pending": 0, "ambiguous": 0}
        for run in self.scenarios:
            counts[run.status.value.lower()] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "scenarios": [run.to_dict() for run in self.scenarios],
            "summary": self.summary,
        }


def run_all_scenarios(
    net: PetriNet,
    manifest: dict | str | None = None,
    sut_fixture: dict | str | None = None,
    *,
    loop_bound: int = 2,
    max_scenarios: int = 256,
) -> BatchReport:
    """Replay every enumerated scenario non-interactively.

    Each trace gets a fresh session that advances even on failure, so every
    bound step along the path is exercised; a scenario's status is the worst
    status among its firings.
    """
    traces = pn_to_scenarios(net, loop_bound=loop_bound, max_scenarios=max_scenarios)
    runs = []
    for number, trace in enumerate(traces, start=1):
        session = create_session(
            net,
            manifest,
            sut_fixture,
            SessionPolicy(advance_on_failure=True),
            session_id=f"batch-{number}",
            marking=trace.markings[0],
        )
        reports = [fire_interactive(session, tid) for tid in trace.transitions_fired]
        status = worst_status(r.status for r in reports)
        runs.append(
            ScenarioRun(
                name=_scenario_name(net, trace, number),
                trace=trace,
                reports=tuple(reports),
                status=status,
            )
        )
    return BatchReport(scenarios=tuple(runs))
