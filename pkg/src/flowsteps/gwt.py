"""The textual half of the shared requirement language.

Parses feature files made of a requirement header plus Given-When-Then
scenarios, renders them back canonically, and generates step skeletons and
state-tag blocks for test authors to fill in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import FeatureParseError
from .petri import PetriNet

STEP_KEYWORDS = ("Given", "When", "Then", "And")
PENDING_BODY = "# code goes here"

_QUOTED = re.compile(r'"([^"]*)"')


@dataclass(frozen=True)
class Step:
    keyword: str
    text: str
    resolved_keyword: str
    params: tuple[str, ...] = ()

    def __post_init__(self):
        if self.keyword not in STEP_KEYWORDS:
            raise ValueError(f"bad step keyword {self.keyword!r}")
        if self.resolved_keyword not in ("Given", "When", "Then"):
            raise ValueError(f"bad resolved keyword {self.resolved_keyword!r}")
        if self.keyword != "And" and self.resolved_keyword != self.keyword:
            raise ValueError("resolved_keyword must equal keyword for non-And steps")
        if not self.text.strip():
            raise ValueError("step text must be non-empty")
        object.__setattr__(self, "params", tuple(_QUOTED.findall(self.text)))


def make_step(keyword: str, text: str, previous_resolved: str | None = None) -> Step:
    """Build a step, resolving And against the preceding non-And keyword."""
    if keyword == "And":
        if previous_resolved is None:
            raise ValueError("And step has no preceding step to inherit from")
        return Step(keyword, text, previous_resolved)
    return Step(keyword, text, keyword)


@dataclass(frozen=True)
class Scenario:
    name: str
    steps: tuple[Step, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError(f"scenario {self.name!r} has no steps")
        if self.steps[0].keyword not in ("Given", "When"):
            raise ValueError(f"scenario {self.name!r} must open with Given or When")
        resolved = None
        for step in self.steps:
            expected = resolved if step.keyword == "And" else step.keyword
            if step.resolved_keyword != expected:
                raise ValueError(
                    f"scenario {self.name!r}: step {step.text!r} has inconsistent "
                    f"resolved keyword {step.resolved_keyword!r}"
                )
            resolved = step.resolved_keyword


@dataclass(frozen=True)
class FeatureAst:
    name: str
    role: str = ""
    request: str = ""
    benefit: str = ""
    header_present: bool = False
    scenarios: tuple[Scenario, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        if not self.name.strip():
            raise ValueError("feature name must be non-empty")
        has_fields = any((self.role, self.request, self.benefit))
        if has_fields:
            object.__setattr__(self, "header_present", True)
        elif self.header_present:
            raise ValueError("header_present requires role, request, or benefit text")


# Header phrasings accepted at parse time: the conventional feature-file form
# and the role/feature/benefit template form.
_HEADER_PREFIXES = (
    ("In order to ", "benefit"),
    ("To gain ", "benefit"),
    ("As a ", "role"),
    ("I want to ", "request"),
    ("I request ", "request"),
)


def parse_feature(text: str) -> FeatureAst:
    """Parse feature text into an AST.

    Keyword matching is case-sensitive at line start after indentation; blank
    lines and '#' comments are skipped. Errors carry the offending line number.
    """
    name: str | None = None
    header: dict[str, str] = {"role": "", "request": "", "benefit": ""}
    header_present = False
    scenarios: list[Scenario] = []
    current_name: str | None = None
    current_steps: list[Step] = []
    last_resolved: str | None = None
    in_scenario = False

    def close_scenario(line_no: int) -> None:
        nonlocal current_name, current_steps
        if not in_scenario:
            return
        if not current_steps:
            raise FeatureParseError(
                f"scenario {current_name!r} has no steps", line=line_no
            )
        scenarios.append(Scenario(current_name or "", tuple(current_steps)))
        current_name = None
        current_steps = []

    lines = text.splitlines()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        if line.startswith("Feature:"):
            if name is not None:
                raise FeatureParseError("duplicate Feature header", line=line_no)
            if in_scenario:
                raise FeatureParseError("Feature header after scenarios", line=line_no)
            name = line[len("Feature:"):].strip()
            if not name:
                raise FeatureParseError("Feature header has no name", line=line_no)
            continue

        header_hit = next(
            ((p, f) for p, f in _HEADER_PREFIXES if line.startswith(p)), None
        )
        if header_hit is not None and not in_scenario:
            prefix, fld = header_hit
            if name is None:
                raise FeatureParseError("header line before Feature header", line=line_no)
            value = line[len(prefix):].strip()
            if not value:
                raise FeatureParseError(f"{prefix.strip()!r} line has no text", line=line_no)
            if header[fld]:
                raise FeatureParseError(f"duplicate {fld} line", line=line_no)
            header[fld] = value
            header_present = True
            continue

        if line.startswith("Scenario:"):
            if name is None:
                raise FeatureParseError("Scenario before Feature header", line=line_no)
            close_scenario(line_no)
            current_name = line[len("Scenario:"):].strip()
            current_steps = []
            last_resolved = None
            in_scenario = True
            continue

        keyword_hit = next(
            (kw for kw in STEP_KEYWORDS if line.startswith(kw + " ")), None
        )
        if keyword_hit is not None:
            if not in_scenario:
                raise FeatureParseError(
                    f"step before any Scenario: {line!r}", line=line_no
                )
            step_text = line[len(keyword_hit) + 1:].strip()
            if not step_text:
                raise FeatureParseError("step has no text", line=line_no)
            if not current_steps:
                if keyword_hit == "And":
                    raise FeatureParseError(
                        "And cannot open a scenario", line=line_no
                    )
                if keyword_hit == "Then":
                    raise FeatureParseError(
                        "scenario must open with Given or When", line=line_no
                    )
            step = make_step(keyword_hit, step_text, last_resolved)
            last_resolved = step.resolved_keyword
            current_steps.append(step)
            continue

        raise FeatureParseError(f"unrecognized line: {line!r}", line=line_no)

    if name is None:
        raise FeatureParseError("no Feature header")
    close_scenario(len(lines))

    return FeatureAst(
        name=name,
        role=header["role"],
        request=header["request"],
        benefit=header["benefit"],
        header_present=header_present,
        scenarios=tuple(scenarios),
    )


def render_feature(ast: FeatureAst) -> str:
    """Render an AST to canonical feature text; parse_feature inverts this."""
    lines = [f"Feature: {ast.name}"]
    if ast.benefit:
        lines.append(f"In order to {ast.benefit}")
    if ast.role:
        lines.append(f"As a {ast.role}")
    if ast.request:
        lines.append(f"I want to {ast.request}")
    for scenario in ast.scenarios:
        lines.append("")
        lines.append(f"  Scenario: {scenario.name}".rstrip())
        for step in scenario.steps:
            lines.append(f"    {step.keyword} {step.text}")
    return "\n".join(lines) + "\n"


def normalize_step_name(step: Step) -> str:
    """Derive a snake_case identifier from a step, prefixed with its resolved keyword."""
    collapsed = re.sub(r"[^a-z0-9]+", "_", step.text.lower()).strip("_")
    if not collapsed:
        raise ValueError(f"step text {step.text!r} normalizes to an empty identifier")
    prefix = step.resolved_keyword.lower()
    if collapsed == prefix or collapsed.startswith(prefix + "_"):
        return collapsed
    return f"{prefix}_{collapsed}"


@dataclass(frozen=True)
class StepSkeleton:
    pattern: str
    identifier: str
    body: str = PENDING_BODY


_REGEX_SPECIALS = re.compile(r"[.^$*+?{}\[\]()\\|]")


def _escape_literal(text: str) -> str:
    # unlike re.escape, leaves spaces readable; patterns are never compiled
    # in verbose mode so only true metacharacters need escaping
    return _REGEX_SPECIALS.sub(lambda m: "\\" + m.group(0), text)


def _generalize(text: str) -> str:
    """Escape literal text, turning each quoted parameter into a capture group."""
    parts = []
    last = 0
    for match in _QUOTED.finditer(text):
        parts.append(_escape_literal(text[last:match.start()]))
        parts.append('"(.+)"')
        last = match.end()
    parts.append(_escape_literal(text[last:]))
    return "".join(parts)


def generate_step_skeletons(ast: FeatureAst) -> list[StepSkeleton]:
    """One skeleton per distinct (resolved keyword, text) pair, in first-occurrence order.

    The match pattern keeps the step's own keyword when it had one (And steps
    match on bare text), with quoted parameters generalized to capture groups.
    """
    first_seen: dict[tuple[str, str], Step] = {}
    for scenario in ast.scenarios:
        for step in scenario.steps:
            first_seen.setdefault((step.resolved_keyword, step.text), step)
    skeletons = []
    for step in first_seen.values():
        literal = step.text if step.keyword == "And" else f"{step.keyword} {step.text}"
        skeletons.append(
            StepSkeleton(pattern=_generalize(literal), identifier=normalize_step_name(step))
        )
    return skeletons


def _pattern_literal(pattern: str) -> str:
    if "'" not in pattern:
        return f"r'{pattern}'"
    if '"' not in pattern:
        return f'r"{pattern}"'
    return repr(pattern)


def render_skeletons(skeletons: list[StepSkeleton]) -> str:
    """Render skeletons as decorated stub functions ready to paste into a steps file."""
    blocks = []
    for sk in skeletons:
        blocks.append(
            f"@step({_pattern_literal(sk.pattern)})\n"
            f"def {sk.identifier}(step):\n"
            f"    {sk.body}\n"
        )
    return "\n".join(blocks)


def generate_state_tag_skeletons(net: PetriNet, transition: str) -> str:
    """Emit the state-tag stub block for one transition of a state-based process.

    Tags name the source state(s), the event, the expected outcome, and the
    destination state(s), each followed by a placeholder body line.
    """
    if transition not in net.transition_ids:
        raise ValueError(f"unknown transition {transition!r}")
    sources = ", ".join(repr(net.label_of(p)) for p, _ in net.inputs_of(transition))
    targets = ", ".join(repr(net.label_of(p)) for p, _ in net.outputs_of(transition))
    event = repr(net.label_of(transition))
    return (
        f"@SourceState({sources})\n"
        f"{PENDING_BODY}\n"
        f"@Event({event})\n"
        f"{PENDING_BODY}\n"
        f"@Transition('produces some outcome')\n"
        f"{PENDING_BODY}\n"
        f"@DestinationState({targets})\n"
        f"{PENDING_BODY}\n"
    )
