"""Workflow Petri net model: structure, marking, firing rule, and classification.

Everything here is a pure function of its inputs; nets and markings are
immutable once constructed, so values can be shared freely between sessions.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import FiringError, NetStructureError


@dataclass(frozen=True)
class Place:
    """A state of the business process; its label is used as Given/Then text."""

    id: str
    label: str = ""

    def __post_init__(self):
        label = self.label.strip() if self.label else ""
        object.__setattr__(self, "label", label or self.id)


@dataclass(frozen=True)
class Transition:
    """An event or user action; its label is used as When text."""

    id: str
    label: str = ""

    def __post_init__(self):
        label = self.label.strip() if self.label else ""
        object.__setattr__(self, "label", label or self.id)


@dataclass(frozen=True)
class Arc:
    id: str
    source: str
    target: str
    weight: int = 1

    def __post_init__(self):
        if self.weight < 1:
            raise NetStructureError(f"arc {self.id!r}: weight must be >= 1, got {self.weight}")


class Marking:
    """Token counts per place. Sparse: absent places hold zero tokens.

    Equality and hashing ignore explicit zeros, so two markings are equal
    iff all nonzero counts agree.
    """

    __slots__ = ("_tokens",)

    def __init__(self, tokens: Mapping[str, int] | None = None):
        cleaned: dict[str, int] = {}
        for pid, count in (tokens or {}).items():
            if count < 0:
                raise ValueError(f"negative token count for place {pid!r}: {count}")
            if count:
                cleaned[pid] = count
        self._tokens = cleaned

    def count(self, place_id: str) -> int:
        return self._tokens.get(place_id, 0)

    def place_ids(self) -> list[str]:
        return sorted(self._tokens)

    def to_dict(self) -> dict[str, int]:
        return dict(sorted(self._tokens.items()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Marking):
            return NotImplemented
        return self._tokens == other._tokens

    def __hash__(self) -> int:
        return hash(frozenset(self._tokens.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{p}:{n}" for p, n in sorted(self._tokens.items()))
        return f"Marking({{{inner}}})"


class ConstructKind(Enum):
    SEQUENCE = "Sequence"
    AND_SPLIT = "AndSplit"
    OR_SPLIT = "OrSplit"
    AND_JOIN = "AndJoin"
    OR_JOIN = "OrJoin"


@dataclass(frozen=True)
class Diagnostic:
    """One workflow-net violation; node_ids are the offending nodes."""

    code: str
    message: str
    node_ids: tuple[str, ...]


class PetriNet:
    """A bipartite place/transition net with an initial marking.

    Structural invariants are checked at construction time: unique node ids,
    arcs connecting only place<->transition, and arc endpoints that exist.
    """

    def __init__(
        self,
        id: str,
        places: Iterable[Place],
        transitions: Iterable[Transition],
        arcs: Iterable[Arc],
        initial_marking: Marking | None = None,
    ):
        self.id = id
        self.places: tuple[Place, ...] = tuple(places)
        self.transitions: tuple[Transition, ...] = tuple(transitions)
        self.arcs: tuple[Arc, ...] = tuple(arcs)
        self.initial_marking = initial_marking or Marking()
        self._validate()
        self._index()

    def _validate(self) -> None:
        seen: set[str] = set()
        for node in (*self.places, *self.transitions):
            if node.id in seen:
                raise NetStructureError(f"duplicate node id {node.id!r}")
            seen.add(node.id)
        place_ids = {p.id for p in self.places}
        transition_ids = {t.id for t in self.transitions}

        arc_ids: set[str] = set()
        for arc in self.arcs:
            if arc.id in arc_ids:
                raise NetStructureError(f"duplicate arc id {arc.id!r}")
            arc_ids.add(arc.id)
            for endpoint in (arc.source, arc.target):
                if endpoint not in place_ids and endpoint not in transition_ids:
                    raise NetStructureError(
                        f"arc {arc.id!r} references nonexistent node {endpoint!r}"
                    )
            src_is_place = arc.source in place_ids
            tgt_is_place = arc.target in place_ids
            if src_is_place == tgt_is_place:
                kind = "place" if src_is_place else "transition"
                raise NetStructureError(
                    f"arc {arc.id!r} connects {kind} to {kind}; nets are bipartite"
                )

        for pid in self.initial_marking.place_ids():
            if pid not in place_ids:
                raise NetStructureError(f"initial marking references unknown place {pid!r}")

    def _index(self) -> None:
        self._place_ids = {p.id for p in self.places}
        self._transition_ids = {t.id for t in self.transitions}
        self._labels = {n.id: n.label for n in (*self.places, *self.transitions)}
        # preset/postset with weights, keyed by node id
        self._inputs: dict[str, dict[str, int]] = {n: {} for n in self._labels}
        self._outputs: dict[str, dict[str, int]] = {n: {} for n in self._labels}
        for arc in self.arcs:
            out = self._outputs[arc.source]
            out[arc.target] = out.get(arc.target, 0) + arc.weight
            inp = self._inputs[arc.target]
            inp[arc.source] = inp.get(arc.source, 0) + arc.weight

    @property
    def place_ids(self) -> set[str]:
        return self._place_ids

    @property
    def transition_ids(self) -> set[str]:
        return self._transition_ids

    def label_of(self, node_id: str) -> str:
        return self._labels[node_id]

    def inputs_of(self, node_id: str) -> list[tuple[str, int]]:
        """Incoming (node id, weight) pairs, sorted by node id."""
        return sorted(self._inputs[node_id].items())

    def outputs_of(self, node_id: str) -> list[tuple[str, int]]:
        """Outgoing (node id, weight) pairs, sorted by node id."""
        return sorted(self._outputs[node_id].items())

    def source_places(self) -> list[str]:
        return sorted(p.id for p in self.places if not self._inputs[p.id])

    def sink_places(self) -> list[str]:
        return sorted(p.id for p in self.places if not self._outputs[p.id])

    def __repr__(self) -> str:
        return (
            f"PetriNet(id={self.id!r}, places={len(self.places)}, "
            f"transitions={len(self.transitions)}, arcs={len(self.arcs)})"
        )


def validate_workflow_net(net: PetriNet) -> list[Diagnostic]:
    """Check workflow-net shape: one source, one sink, all nodes on a source-to-sink path.

    Returns an empty list iff the net is a well-formed workflow net; each kind
    of violation yields one diagnostic listing the offending node ids.
    """
    diagnostics: list[Diagnostic] = []
    sources = net.source_places()
    sinks = net.sink_places()
    if len(sources) != 1:
        diagnostics.append(
            Diagnostic(
                code="source-count",
                message=f"expected exactly one source place, found {len(sources)}",
                node_ids=tuple(sources),
            )
        )
    if len(sinks) != 1:
        diagnostics.append(
            Diagnostic(
                code="sink-count",
                message=f"expected exactly one sink place, found {len(sinks)}",
                node_ids=tuple(sinks),
            )
        )
    if len(sources) == 1 and len(sinks) == 1:
        forward = _closure(net, sources[0], net.outputs_of)
        backward = _closure(net, sinks[0], net.inputs_of)
        stranded = sorted((net.place_ids | net.transition_ids) - (forward & backward))
        if stranded:
            diagnostics.append(
                Diagnostic(
                    code="disconnected",
                    message="nodes not on any path from source to sink",
                    node_ids=tuple(stranded),
                )
            )
    return diagnostics


def _closure(net: PetriNet, start: str, neighbours) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for nxt, _ in neighbours(node):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _check_marking_places(net: PetriNet, marking: Marking) -> None:
    for pid in marking.place_ids():
        if pid not in net.place_ids:
            raise FiringError(f"marking references unknown place {pid!r}")


def enabled_transitions(net: PetriNet, marking: Marking) -> list[str]:
    """Transition ids fireable under the marking, sorted lexicographically."""
    _check_marking_places(net, marking)
    enabled = []
    for t in net.transitions:
        if all(marking.count(pid) >= w for pid, w in net.inputs_of(t.id)):
            enabled.append(t.id)
    return sorted(enabled)


def fire(net: PetriNet, marking: Marking, transition: str) -> Marking:
    """Fire one enabled transition, returning the successor marking.

    The input marking is never mutated. Firing a disabled transition raises
    a FiringError naming the token-deficient places.
    """
    if transition not in net.transition_ids:
        raise FiringError(f"unknown transition {transition!r}")
    _check_marking_places(net, marking)
    deficient = [
        pid for pid, w in net.inputs_of(transition) if marking.count(pid) < w
    ]
    if deficient:
        raise FiringError(
            f"transition {transition!r} is not enabled; "
            f"insufficient tokens in {', '.join(repr(p) for p in deficient)}"
        )
    tokens = {pid: marking.count(pid) for pid in marking.place_ids()}
    for pid, w in net.inputs_of(transition):
        tokens[pid] = tokens.get(pid, 0) - w
    for pid, w in net.outputs_of(transition):
        tokens[pid] = tokens.get(pid, 0) + w
    return Marking(tokens)


def classify_constructs(net: PetriNet) -> list[tuple[str, ConstructKind]]:
    """Classify split/join structure from arc degrees alone.

    Transitions with several outputs are AND-splits, several inputs AND-joins;
    places with several consumers are OR-splits, several producers OR-joins.
    Remaining non-source/sink nodes are Sequence. A node may carry two kinds.
    """
    entries: list[tuple[str, ConstructKind]] = []
    for place in net.places:
        n_in = len(net.inputs_of(place.id))
        n_out = len(net.outputs_of(place.id))
        kinds = []
        if n_out > 1:
            kinds.append(ConstructKind.OR_SPLIT)
        if n_in > 1:
            kinds.append(ConstructKind.OR_JOIN)
        if not kinds and n_in == 1 and n_out == 1:
            kinds.append(ConstructKind.SEQUENCE)
        entries.extend((place.id, kind) for kind in kinds)
    for transition in net.transitions:
        n_in = len(net.inputs_of(transition.id))
        n_out = len(net.outputs_of(transition.id))
        kinds = []
        if n_out > 1:
            kinds.append(ConstructKind.AND_SPLIT)
        if n_in > 1:
            kinds.append(ConstructKind.AND_JOIN)
        if not kinds and n_in <= 1 and n_out <= 1:
            kinds.append(ConstructKind.SEQUENCE)
        entries.extend((transition.id, kind) for kind in kinds)
    return sorted(entries, key=lambda e: (e[0], e[1].value))


@dataclass(frozen=True)
class ReachabilityResult:
    markings: tuple[Marking, ...]
    bound_exceeded: bool


def reachable_markings(net: PetriNet, start: Marking, bound: int) -> ReachabilityResult:
    """Breadth-first closure of `start` under firing, up to `bound` distinct markings.

    If more than `bound` markings exist the search aborts and the result is
    flagged, so truncation is never silent.
    """
    if bound < 1:
        raise ValueError(f"bound must be >= 1, got {bound}")
    _check_marking_places(net, start)
    seen = {start}
    order = [start]
    queue: deque[Marking] = deque([start])
    while queue:
        marking = queue.popleft()
        for tid in enabled_transitions(net, marking):
            successor = fire(net, marking, tid)
            if successor in seen:
                continue
            if len(seen) >= bound:
                return ReachabilityResult(tuple(order), True)
            seen.add(successor)
            order.append(successor)
            queue.append(successor)
    return ReachabilityResult(tuple(order), False)
