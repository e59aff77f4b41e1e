"""Translation between the graphical and textual process representations.

A workflow net unfolds into Given-When-Then scenarios (one per choice path,
with concurrent branches serialized inside a single scenario), and scenario
text folds back into a net. The per-firing triple is the message a user sees
while playing the token game.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ScenarioLimitError, TranslationError
from .gwt import FeatureAst, Scenario, Step, make_step
from .petri import (
    Arc,
    Marking,
    PetriNet,
    Place,
    Transition,
    enabled_transitions,
    fire,
    validate_workflow_net,
)

PARALLEL_MARKER = "in parallel: "


@dataclass(frozen=True)
class GwtTriple:
    """Given/When/Then labels for one firing; parallel marks an AND-split."""

    given: tuple[str, ...]
    when: str
    then: tuple[str, ...]
    parallel: bool = False

    def to_dict(self) -> dict:
        return {
            "given": list(self.given),
            "when": self.when,
            "then": list(self.then),
            "parallel": self.parallel,
        }

    def to_text(self) -> str:
        lines = [f"Given {self.given[0]}"]
        lines.extend(f"And {PARALLEL_MARKER}{label}" for label in self.given[1:])
        lines.append(f"When {self.when}")
        lines.append(f"Then {self.then[0]}")
        lines.extend(f"And {PARALLEL_MARKER}{label}" for label in self.then[1:])
        return "\n".join(lines)


@dataclass(frozen=True)
class ScenarioTrace:
    """One source-to-sink firing sequence with the markings it visited.

    parallel_groups holds index sets into transitions_fired marking firings
    that were concurrently enabled (serialized AND-split branches). truncated
    is set when the trace did not end at the sink marking.
    """

    transitions_fired: tuple[str, ...]
    parallel_groups: tuple[frozenset[int], ...]
    markings: tuple[Marking, ...]
    truncated: bool = False

    def __post_init__(self):
        if len(self.markings) != len(self.transitions_fired) + 1:
            raise ValueError("trace must record one more marking than firings")
        for group in self.parallel_groups:
            if any(i < 0 or i >= len(self.transitions_fired) for i in group):
                raise ValueError("parallel group index out of range")


def gwt_for_firing(net: PetriNet, marking: Marking, transition: str) -> GwtTriple:
    """The GWT message for firing `transition` under `marking`."""
    if transition not in set(enabled_transitions(net, marking)):
        raise TranslationError(
            f"transition {transition!r} is not enabled; no GWT message applies"
        )
    given = tuple(net.label_of(p) for p, _ in net.inputs_of(transition))
    then = tuple(net.label_of(p) for p, _ in net.outputs_of(transition))
    return GwtTriple(given=given, when=net.label_of(transition), then=then,
                     parallel=len(then) > 1)


def _conflict_clusters(net: PetriNet, enabled: list[str]) -> list[list[str]]:
    """Group enabled transitions that compete for a shared input place."""
    parent = {t: t for t in enabled}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    by_place: dict[str, str] = {}
    for t in enabled:
        for pid, _ in net.inputs_of(t):
            if pid in by_place:
                parent[find(t)] = find(by_place[pid])
            else:
                by_place[pid] = t
    clusters: dict[str, list[str]] = {}
    for t in enabled:
        clusters.setdefault(find(t), []).append(t)
    return sorted((sorted(members) for members in clusters.values()),
                  key=lambda c: c[0])


def pn_to_scenarios(
    net: PetriNet,
    *,
    loop_bound: int = 2,
    max_scenarios: int = 256,
) -> list[ScenarioTrace]:
    """Enumerate firing traces from {source:1} towards {sink:1}, depth-first.

    Each alternative at a choice place spawns its own trace; concurrently
    enabled transitions fire in lexicographic order inside one trace and are
    recorded as a parallel group, so concurrency never multiplies traces.
    A transition fired more than loop_bound times truncates its trace.
    """
    if loop_bound < 1:
        raise ValueError(f"loop_bound must be >= 1, got {loop_bound}")
    if max_scenarios < 1:
        raise ValueError(f"max_scenarios must be >= 1, got {max_scenarios}")
    diagnostics = validate_workflow_net(net)
    if diagnostics:
        details = "; ".join(d.message for d in diagnostics)
        raise TranslationError(f"not a workflow net: {details}")

    source = net.source_places()[0]
    sink = net.sink_places()[0]
    final = Marking({sink: 1})
    traces: list[ScenarioTrace] = []

    def emit(fired, groups, markings, truncated):
        if len(traces) >= max_scenarios:
            raise ScenarioLimitError(len(traces), max_scenarios)
        traces.append(
            ScenarioTrace(
                transitions_fired=tuple(fired),
                parallel_groups=tuple(frozenset(g) for g in groups),
                markings=tuple(markings),
                truncated=truncated,
            )
        )

    def walk(marking, fired, groups, markings, counts):
        while True:
            enabled = enabled_transitions(net, marking)
            if not enabled:
                emit(fired, groups, markings, truncated=marking != final)
                return
            clusters = _conflict_clusters(net, enabled)
            choice = next((c for c in clusters if len(c) > 1), None)
            if choice is None:
                # pure concurrency (or a single transition): fire everything
                if any(counts.get(t, 0) >= loop_bound for t in enabled):
                    emit(fired, groups, markings, truncated=True)
                    return
                start = len(fired)
                for t in enabled:
                    marking = fire(net, marking, t)
                    fired.append(t)
                    markings.append(marking)
                    counts[t] = counts.get(t, 0) + 1
                if len(enabled) > 1:
                    groups.append(range(start, len(fired)))
                continue
            # a choice: branch on each alternative of the first conflict cluster
            runnable = [t for t in choice if counts.get(t, 0) < loop_bound]
            if len(runnable) < len(choice):
                emit(fired, groups, markings, truncated=True)
            for t in runnable:
                branch_counts = dict(counts)
                branch_counts[t] = branch_counts.get(t, 0) + 1
                successor = fire(net, marking, t)
                walk(successor, fired + [t], list(groups),
                     markings + [successor], branch_counts)
            return

    start_marking = Marking({source: 1})
    walk(start_marking, [], [], [start_marking], {})
    return traces


def _first_choice_label(net: PetriNet, trace: ScenarioTrace) -> str | None:
    """Label of the transition chosen at the first OR-split along the trace."""
    for i, tid in enumerate(trace.transitions_fired):
        enabled = set(enabled_transitions(net, trace.markings[i]))
        for pid, _ in net.inputs_of(tid):
            rivals = [t for t, _ in net.outputs_of(pid) if t != tid and t in enabled]
            if rivals:
                return net.label_of(tid)
    return None


def _scenario_name(net: PetriNet, trace: ScenarioTrace, number: int) -> str:
    label = _first_choice_label(net, trace) or "main"
    return f"Path {number}: {label}"


def _steps_for_trace(net: PetriNet, trace: ScenarioTrace) -> list[Step]:
    steps: list[Step] = []
    for i, tid in enumerate(trace.transitions_fired):
        triple = gwt_for_firing(net, trace.markings[i], tid)
        if i == 0:
            steps.append(make_step("Given", triple.given[0]))
            steps.extend(
                make_step("And", f"{PARALLEL_MARKER}{label}", "Given")
                for label in triple.given[1:]
            )
        steps.append(make_step("When", triple.when))
        steps.append(make_step("Then", triple.then[0]))
        steps.extend(
            make_step("And", f"{PARALLEL_MARKER}{label}", "Then")
            for label in triple.then[1:]
        )
    return steps


def scenarios_to_feature(
    traces: list[ScenarioTrace],
    net: PetriNet,
    *,
    name: str,
    role: str = "",
    request: str = "",
    benefit: str = "",
) -> FeatureAst:
    """Render traces as a feature: one scenario per trace, numbered by path."""
    scenarios = []
    for number, trace in enumerate(traces, start=1):
        scenarios.append(
            Scenario(
                name=_scenario_name(net, trace, number),
                steps=tuple(_steps_for_trace(net, trace)),
            )
        )
    return FeatureAst(
        name=name,
        role=role,
        request=request,
        benefit=benefit,
        header_present=any((role, request, benefit)),
        scenarios=tuple(scenarios),
    )


# ---------------------------------------------------------------------------
# text -> net


def _clauses(scenario: Scenario) -> list[tuple[str, tuple[str, ...]]]:
    """Fold a scenario's steps into (kind, labels) clauses.

    And steps extend the current clause: with the parallel marker they open
    another label, otherwise they are appended to the last label with '; '.
    """
    clauses: list[tuple[str, list[str]]] = []
    for step in scenario.steps:
        if step.keyword == "And":
            kind, labels = clauses[-1]
            text = step.text
            if kind != "When" and text.startswith(PARALLEL_MARKER):
                labels.append(text[len(PARALLEL_MARKER):])
            else:
                labels[-1] = f"{labels[-1]}; {text}"
        else:
            clauses.append((step.keyword, [step.text]))
    if clauses[0][0] == "When":
        raise TranslationError(
            f"scenario {scenario.name!r} starts with When; "
            "a Given state is needed to anchor the first place"
        )
    for i, (kind, _) in enumerate(clauses):
        expected = "Given" if i == 0 else ("When" if i % 2 else "Then")
        if kind != expected:
            raise TranslationError(
                f"scenario {scenario.name!r}: expected a {expected} clause "
                f"at position {i + 1}, found {kind}"
            )
    if len(clauses) < 3 or len(clauses) % 2 == 0:
        raise TranslationError(
            f"scenario {scenario.name!r} must alternate When/Then clauses "
            "after the opening Given"
        )
    return [(kind, tuple(labels)) for kind, labels in clauses]


class _NetBuilder:
    def __init__(self):
        self.places: dict[str, Place] = {}
        self.transitions: dict[str, Transition] = {}
        self.arcs: list[tuple[str, str]] = []

    def new_place(self, label: str) -> str:
        pid = f"p{len(self.places) + 1}"
        self.places[pid] = Place(pid, label)
        return pid

    def new_transition(self, label: str) -> str:
        tid = f"t{len(self.transitions) + 1}"
        self.transitions[tid] = Transition(tid, label)
        return tid

    def connect(self, source: str, target: str) -> None:
        self.arcs.append((source, target))

    def finish(self, net_id: str) -> PetriNet:
        self._merge_terminals()
        source = self._unify(self._sources(), "start", forward=True)
        sink = self._unify(self._sinks(), "end", forward=False)
        arcs = [
            Arc(f"a{i + 1}", src, tgt) for i, (src, tgt) in enumerate(self.arcs)
        ]
        return PetriNet(
            id=net_id,
            places=list(self.places.values()),
            transitions=list(self.transitions.values()),
            arcs=arcs,
            initial_marking=Marking({source: 1}),
        )

    def _sources(self) -> list[str]:
        targets = {tgt for _, tgt in self.arcs}
        return [pid for pid in self.places if pid not in targets]

    def _sinks(self) -> list[str]:
        sources = {src for src, _ in self.arcs}
        return [pid for pid in self.places if pid not in sources]

    def _merge_terminals(self) -> None:
        # identical labels among terminal places collapse into one shared sink
        by_label: dict[str, str] = {}
        replace: dict[str, str] = {}
        for pid in self._sinks():
            label = self.places[pid].label
            if label in by_label:
                replace[pid] = by_label[label]
            else:
                by_label[label] = pid
        if not replace:
            return
        self.arcs = [(src, replace.get(tgt, tgt)) for src, tgt in self.arcs]
        for pid in replace:
            del self.places[pid]

    def _unify(self, endpoints: list[str], label: str, *, forward: bool) -> str:
        if len(endpoints) == 1:
            return endpoints[0]
        hub = self.new_place(label)
        for pid in endpoints:
            tid = self.new_transition(f"{label}: {self.places[pid].label}")
            if forward:
                self.connect(hub, tid)
                self.connect(tid, pid)
            else:
                self.connect(pid, tid)
                self.connect(tid, hub)
        return hub


def _slug(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return slug or "net"


def feature_to_pn(ast: FeatureAst) -> PetriNet:
    """Fold scenarios back into a workflow net.

    Scenarios are merged on their longest common clause prefix; divergence
    after a shared place becomes a choice (OR-split), identical final Then
    labels share one sink, and a synthetic source/sink is added if merging
    still leaves several.
    """
    builder = _NetBuilder()
    # prefix-tree node: clause key -> (child node, frontier after the clause,
    # transition id when the clause was a When)
    root: dict = {}

    for scenario in ast.scenarios:
        clauses = _clauses(scenario)
        node = root
        frontier: list[str] = []
        pending_transition: str | None = None
        index = 0
        while index < len(clauses) and clauses[index] in node:
            child = node[clauses[index]]
            frontier = child["frontier"]
            pending_transition = child["transition"]
            node = child["children"]
            index += 1
        if index < len(clauses) and pending_transition is not None and index % 2 == 0:
            # the When matched an existing transition but the Then differs:
            # a transition cannot have alternative outcomes
            kind, labels = clauses[index]
            raise TranslationError(
                f"scenario {scenario.name!r} shares an action with an earlier "
                f"scenario but diverges on its outcome {labels!r}"
            )
        for clause in clauses[index:]:
            kind, labels = clause
            if kind == "Given":
                frontier = [builder.new_place(label) for label in labels]
                transition = None
            elif kind == "When":
                transition = builder.new_transition("; ".join(labels))
                for pid in frontier:
                    builder.connect(pid, transition)
            else:
                new_frontier = [builder.new_place(label) for label in labels]
                for pid in new_frontier:
                    builder.connect(transition, pid)
                frontier = new_frontier
            child = {"children": {}, "frontier": frontier,
                     "transition": transition if kind == "When" else None}
            node[clause] = child
            node = child["children"]
            pending_transition = child["transition"]

    if not builder.places:
        raise TranslationError("feature has no scenarios to build a net from")
    return builder.finish(_slug(ast.name))
