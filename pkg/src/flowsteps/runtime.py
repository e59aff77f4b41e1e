"""Step bindings and execution against a system-under-test adapter.

A registry maps step text to actions through anchored regular expressions.
Executing a step yields a result value (passed/failed/pending/ambiguous);
nothing in here raises on a failing test, outcomes are always values.
"""

from __future__ import annotations

import json
import re
import subprocess
import time
from dataclasses import dataclass
from enum import Enum

from .errors import ManifestError, SutError

PENDING_MESSAGE = (
    "no step definition matches; the test needs to be implemented "
    "and its acceptance criterion defined"
)


class StepStatus(Enum):
    PASSED = "Passed"
    FAILED = "Failed"
    PENDING = "Pending"
    AMBIGUOUS = "Ambiguous"


_SEVERITY = {
    StepStatus.PASSED: 0,
    StepStatus.PENDING: 1,
    StepStatus.AMBIGUOUS: 2,
    StepStatus.FAILED: 3,
}


def worst_status(statuses) -> StepStatus:
    """The overall status of a batch: Failed > Ambiguous > Pending > Passed."""
    worst = StepStatus.PASSED
    for status in statuses:
        if _SEVERITY[status] > _SEVERITY[worst]:
            worst = status
    return worst


class ActionKind(Enum):
    VISIT = "Visit"
    FILL = "Fill"
    PRESS = "Press"
    ASSERT_ON_PAGE = "AssertOnPage"
    ASSERT_SEE = "AssertSee"
    COMMAND = "Command"


# number of argument slots each UI action consumes
_ARITY = {
    ActionKind.VISIT: 1,
    ActionKind.FILL: 2,
    ActionKind.PRESS: 1,
    ActionKind.ASSERT_ON_PAGE: 1,
    ActionKind.ASSERT_SEE: 1,
    ActionKind.COMMAND: 0,
}

_CAPTURE_REF = re.compile(r"^\$(\d+)$")


@dataclass(frozen=True)
class ActionSpec:
    """What a binding does. args slots are literals or $N capture references.

    Command actions carry their own command line (with $N substitution), an
    expected exit code, an optional output substring, and a wall-clock cap.
    """

    kind: ActionKind
    args: tuple[str, ...] = ()
    command: str = ""
    expected_exit: int = 0
    expect_output: str = ""
    timeout_s: float = 30.0


@dataclass(frozen=True)
class StepBinding:
    pattern: str
    action: ActionSpec
    source: str = "builtin"

    def __post_init__(self):
        try:
            regex = re.compile(self.pattern)
        except re.error as exc:
            raise ManifestError(f"pattern {self.pattern!r} does not compile: {exc}")
        object.__setattr__(self, "_regex", regex)
        groups = regex.groups
        arity = _ARITY[self.action.kind]
        if self.action.kind is ActionKind.COMMAND:
            if self.action.args:
                raise ManifestError(
                    f"pattern {self.pattern!r}: Command actions take no args"
                )
            if not self.action.command:
                raise ManifestError(
                    f"pattern {self.pattern!r}: Command action needs a command line"
                )
            self._check_refs(self.action.command, groups)
            return
        args = self.action.args
        if not args:
            if groups != arity:
                raise ManifestError(
                    f"pattern {self.pattern!r} has {groups} capture group(s) but "
                    f"{self.action.kind.value} takes {arity} argument(s)"
                )
            return
        if len(args) != arity:
            raise ManifestError(
                f"pattern {self.pattern!r}: {self.action.kind.value} takes "
                f"{arity} argument(s), got {len(args)}"
            )
        for arg in args:
            self._check_refs(arg, groups, whole=True)

    def _check_refs(self, text: str, groups: int, whole: bool = False) -> None:
        refs = [_CAPTURE_REF.match(text)] if whole else [
            re.match(r"\$(\d+)", m.group(0))
            for m in re.finditer(r"\$\d+", text)
        ]
        for ref in refs:
            if ref is None:
                continue
            n = int(ref.group(1))
            if n < 1 or n > groups:
                raise ManifestError(
                    f"pattern {self.pattern!r}: capture reference ${n} is out of "
                    f"range (pattern has {groups} group(s))"
                )

    @property
    def regex(self) -> re.Pattern:
        return self._regex  # type: ignore[attr-defined]


class StepRegistry:
    """Ordered step bindings with patterns unique as written."""

    def __init__(self, bindings=()):
        self.bindings: list[StepBinding] = []
        self._by_pattern: dict[str, int] = {}
        for binding in bindings:
            self.add(binding)

    def add(self, binding: StepBinding, *, replace: bool = False) -> None:
        index = self._by_pattern.get(binding.pattern)
        if index is not None:
            if not replace:
                raise ManifestError(f"duplicate pattern {binding.pattern!r}")
            self.bindings[index] = binding
            return
        self._by_pattern[binding.pattern] = len(self.bindings)
        self.bindings.append(binding)

    def __len__(self) -> int:
        return len(self.bindings)


def builtin_bindings() -> StepRegistry:
    """The five step shapes every registry understands out of the box."""
    specs = [
        (r"I go to the (.+) page", ActionKind.VISIT),
        (r'I fill in "(.+)" with "(.+)"', ActionKind.FILL),
        (r'I press "(.+)"', ActionKind.PRESS),
        (r"I should be on the (.+) page", ActionKind.ASSERT_ON_PAGE),
        (r'I should see "(.+)"', ActionKind.ASSERT_SEE),
    ]
    return StepRegistry(
        StepBinding(pattern, ActionSpec(kind), source="builtin")
        for pattern, kind in specs
    )


@dataclass(frozen=True)
class Resolution:
    """Outcome of matching one step text against a registry."""

    binding: StepBinding | None = None
    captures: tuple[str, ...] = ()
    ambiguous: tuple[StepBinding, ...] = ()

    @property
    def is_pending(self) -> bool:
        return self.binding is None and not self.ambiguous

    @property
    def is_ambiguous(self) -> bool:
        return bool(self.ambiguous)


def resolve(registry: StepRegistry, step_text: str) -> Resolution:
    """Find the unique binding whose anchored pattern matches the text.

    No match resolves to pending; several matches resolve to ambiguous with
    every matching binding listed.
    """
    matches = [
        (binding, m)
        for binding in registry.bindings
        if (m := binding.regex.fullmatch(step_text)) is not None
    ]
    if not matches:
        return Resolution()
    if len(matches) > 1:
        return Resolution(ambiguous=tuple(b for b, _ in matches))
    binding, match = matches[0]
    return Resolution(binding=binding, captures=tuple(match.groups()))


@dataclass(frozen=True)
class StepResult:
    step_text: str
    status: StepStatus
    message: str = ""
    duration_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "step_text": self.step_text,
            "status": self.status.value,
            "message": self.message,
            "duration_ms": self.duration_ms,
        }


class SutAdapter:
    """Contract every system-under-test adapter fulfils.

    One adapter instance belongs to one session; callers serialize access.
    """

    def visit(self, page: str) -> None:
        raise NotImplementedError

    def fill(self, field: str, value: str) -> None:
        raise NotImplementedError

    def press(self, button: str) -> str:
        raise NotImplementedError

    def current_page(self) -> str:
        raise NotImplementedError

    def visible_texts(self) -> list[str]:
        raise NotImplementedError


class MockSut(SutAdapter):
    """In-memory stand-in for an enterprise app, scripted by a fixture file.

    Pages declare fields, buttons (with a target page and texts they flash),
    and permanent texts. Pressing a button moves pages and replaces the
    flashed texts; visiting a page clears them.
    """

    def __init__(self, fixture: dict | str):
        if isinstance(fixture, str):
            try:
                fixture = json.loads(fixture)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"sut fixture is not valid JSON: {exc}")
        self._pages = _validate_sut_fixture(fixture)
        self._current = fixture["start_page"]
        self._shown: list[str] = []
        self._filled: dict[tuple[str, str], str] = {}

    def visit(self, page: str) -> None:
        if page not in self._pages:
            raise SutError(f"no page named {page!r}")
        self._current = page
        self._shown = []

    def fill(self, field: str, value: str) -> None:
        page = self._pages[self._current]
        if field not in page.get("fields", []):
            raise SutError(f"no field {field!r} on page {self._current!r}")
        self._filled[(self._current, field)] = value

    def press(self, button: str) -> str:
        page = self._pages[self._current]
        buttons = page.get("buttons", {})
        if button not in buttons:
            raise SutError(f"no button {button!r} on page {self._current!r}")
        spec = buttons[button]
        self._current = spec.get("goto", self._current)
        self._shown = list(spec.get("show", []))
        return self._current

    def current_page(self) -> str:
        return self._current

    def visible_texts(self) -> list[str]:
        return list(self._pages[self._current].get("texts", [])) + list(self._shown)

    def filled_value(self, page: str, field: str) -> str | None:
        return self._filled.get((page, field))


def _validate_sut_fixture(fixture: dict) -> dict:
    if not isinstance(fixture, dict):
        raise ManifestError("sut fixture: root must be an object")
    for key in fixture:
        if key not in ("start_page", "pages"):
            raise ManifestError(f"sut fixture: unknown key {key!r}")
    pages = fixture.get("pages")
    if not isinstance(pages, dict) or not pages:
        raise ManifestError("sut fixture: 'pages' must be a non-empty object")
    start = fixture.get("start_page")
    if start not in pages:
        raise ManifestError(f"sut fixture: start_page {start!r} is not in pages")
    for name, page in pages.items():
        path = f"pages[{name!r}]"
        if not isinstance(page, dict):
            raise ManifestError(f"sut fixture: {path} must be an object")
        for key in page:
            if key not in ("fields", "buttons", "texts"):
                raise ManifestError(f"sut fixture: unknown key {key!r} in {path}")
        for key in ("fields", "texts"):
            values = page.get(key, [])
            if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
                raise ManifestError(f"sut fixture: {path}.{key} must be a list of strings")
        buttons = page.get("buttons", {})
        if not isinstance(buttons, dict):
            raise ManifestError(f"sut fixture: {path}.buttons must be an object")
        for label, spec in buttons.items():
            bpath = f"{path}.buttons[{label!r}]"
            if not isinstance(spec, dict):
                raise ManifestError(f"sut fixture: {bpath} must be an object")
            for key in spec:
                if key not in ("goto", "show"):
                    raise ManifestError(f"sut fixture: unknown key {key!r} in {bpath}")
            goto = spec.get("goto")
            if goto is not None and goto not in pages:
                raise ManifestError(f"sut fixture: {bpath}.goto names unknown page {goto!r}")
            show = spec.get("show", [])
            if not isinstance(show, list) or not all(isinstance(v, str) for v in show):
                raise ManifestError(f"sut fixture: {bpath}.show must be a list of strings")
    return pages


def load_bindings_manifest(
    document: dict | str | None,
    *,
    source_name: str = "manifest",
) -> tuple[StepRegistry, dict[str, list[str]]]:
    """Load a bindings manifest on top of the built-ins.

    Returns the combined registry and the transition map (transition id to
    the step texts run when it fires). A manifest pattern identical to a
    built-in replaces that built-in; duplicates within the manifest are
    an error. Schema violations name the offending JSON path.
    """
    registry = builtin_bindings()
    if document is None:
        return registry, {}
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{source_name}: not valid JSON: {exc}")
    if not isinstance(document, dict):
        raise ManifestError(f"{source_name}: root must be an object")
    for key in document:
        if key not in ("bindings", "transitions"):
            raise ManifestError(f"{source_name}: unknown key {key!r}")

    builtin_patterns = {b.pattern for b in registry.bindings}
    seen: set[str] = set()
    bindings = document.get("bindings", [])
    if not isinstance(bindings, list):
        raise ManifestError(f"{source_name}: 'bindings' must be a list")
    for i, entry in enumerate(bindings):
        path = f"bindings[{i}]"
        if not isinstance(entry, dict):
            raise ManifestError(f"{source_name}: {path} must be an object")
        for key in entry:
            if key not in ("pattern", "action"):
                raise ManifestError(f"{source_name}: unknown key {key!r} in {path}")
        pattern = entry.get("pattern")
        if not isinstance(pattern, str) or not pattern:
            raise ManifestError(f"{source_name}: {path}.pattern must be a non-empty string")
        if pattern in seen:
            raise ManifestError(f"{source_name}: {path}.pattern duplicates an earlier pattern")
        seen.add(pattern)
        action = _parse_action(entry.get("action"), f"{source_name}: {path}.action")
        try:
            binding = StepBinding(pattern, action, source=f"{source_name}#{path}")
        except ManifestError as exc:
            raise ManifestError(f"{source_name}: {path}: {exc}")
        registry.add(binding, replace=pattern in builtin_patterns)

    transition_map: dict[str, list[str]] = {}
    transitions = document.get("transitions", {})
    if not isinstance(transitions, dict):
        raise ManifestError(f"{source_name}: 'transitions' must be an object")
    for tid, steps in transitions.items():
        path = f"transitions[{tid!r}]"
        if not isinstance(steps, list) or not all(isinstance(s, str) for s in steps):
            raise ManifestError(f"{source_name}: {path} must be a list of step texts")
        transition_map[tid] = list(steps)
    return registry, transition_map


def _parse_action(raw, path: str) -> ActionSpec:
    if not isinstance(raw, dict):
        raise ManifestError(f"{path} must be an object")
    allowed = {"kind", "args", "command", "expected_exit", "expect_output", "timeout_s"}
    for key in raw:
        if key not in allowed:
            raise ManifestError(f"unknown key {key!r} in {path}")
    kind_name = raw.get("kind")
    try:
        kind = ActionKind(kind_name)
    except ValueError:
        raise ManifestError(f"{path}.kind: unknown action kind {kind_name!r}")
    args = raw.get("args", [])
    if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
        raise ManifestError(f"{path}.args must be a list of strings")
    command = raw.get("command", "")
    if not isinstance(command, str):
        raise ManifestError(f"{path}.command must be a string")
    expected_exit = raw.get("expected_exit", 0)
    if not isinstance(expected_exit, int) or isinstance(expected_exit, bool):
        raise ManifestError(f"{path}.expected_exit must be an integer")
    expect_output = raw.get("expect_output", "")
    if not isinstance(expect_output, str):
        raise ManifestError(f"{path}.expect_output must be a string")
    timeout_s = raw.get("timeout_s", 30.0)
    if not isinstance(timeout_s, (int, float)) or isinstance(timeout_s, bool) or timeout_s <= 0:
        raise ManifestError(f"{path}.timeout_s must be a positive number")
    return ActionSpec(
        kind=kind,
        args=tuple(args),
        command=command,
        expected_exit=expected_exit,
        expect_output=expect_output,
        timeout_s=float(timeout_s),
    )


def _substitute(template: str, captures: tuple[str, ...]) -> str:
    def repl(match: re.Match) -> str:
        return captures[int(match.group(1)) - 1]

    return re.sub(r"\$(\d+)", repl, template)


def _resolve_args(action: ActionSpec, captures: tuple[str, ...]) -> list[str]:
    if not action.args:
        return list(captures)
    values = []
    for arg in action.args:
        ref = _CAPTURE_REF.match(arg)
        values.append(captures[int(ref.group(1)) - 1] if ref else arg)
    return values


def execute_step(binding: StepBinding, sut: SutAdapter, step_text: str) -> StepResult:
    """Run one bound step against the adapter; failures come back as values."""
    started = time.perf_counter()

    def done(status: StepStatus, message: str = "") -> StepResult:
        elapsed = (time.perf_counter() - started) * 1000.0
        return StepResult(step_text, status, message, round(elapsed, 3))

    match = binding.regex.fullmatch(step_text)
    if match is None:
        return done(StepStatus.FAILED,
                    f"binding {binding.pattern!r} does not match this step")
    captures = tuple(match.groups())
    action = binding.action
    try:
        if action.kind is ActionKind.COMMAND:
            return done(*_run_command(action, captures))
        values = _resolve_args(action, captures)
        if action.kind is ActionKind.VISIT:
            sut.visit(values[0])
        elif action.kind is ActionKind.FILL:
            sut.fill(values[0], values[1])
        elif action.kind is ActionKind.PRESS:
            sut.press(values[0])
        elif action.kind is ActionKind.ASSERT_ON_PAGE:
            page = sut.current_page()
            if page != values[0]:
                return done(
                    StepStatus.FAILED,
                    f"expected to be on the {values[0]!r} page, "
                    f"but the current page is {page!r}",
                )
        elif action.kind is ActionKind.ASSERT_SEE:
            texts = sut.visible_texts()
            if not any(values[0] in text for text in texts):
                shown = "; ".join(repr(t) for t in texts) or "nothing"
                return done(
                    StepStatus.FAILED,
                    f"expected to see {values[0]!r}, but the page shows {shown}",
                )
        return done(StepStatus.PASSED)
    except Exception as exc:  # adapter errors surface as failures, never raise
        return done(StepStatus.FAILED, str(exc) or type(exc).__name__)


def _run_command(action: ActionSpec, captures: tuple[str, ...]) -> tuple[StepStatus, str]:
    command = _substitute(action.command, captures)
    try:
        proc = subprocess.run(
            command, shell=True, capture_output=True, text=True,
            timeout=action.timeout_s,
        )
    except subprocess.TimeoutExpired:
        return StepStatus.FAILED, f"command {command!r} timed out after {action.timeout_s}s"
    if proc.returncode != action.expected_exit:
        return (
            StepStatus.FAILED,
            f"command {command!r} exited with {proc.returncode}, "
            f"expected {action.expected_exit}",
        )
    output = proc.stdout + proc.stderr
    if action.expect_output and action.expect_output not in output:
        return (
            StepStatus.FAILED,
            f"command {command!r} output does not contain {action.expect_output!r}",
        )
    return StepStatus.PASSED, ""


def execute_steps(
    registry: StepRegistry,
    sut: SutAdapter,
    steps,
    *,
    stop_on_failure: bool = True,
) -> list[StepResult]:
    """Resolve and run steps in order.

    With stop_on_failure, steps after the first non-passing one are reported
    as skipped (pending, zero duration) rather than silently dropped.
    """
    results: list[StepResult] = []
    halted = False
    for text in steps:
        if halted:
            results.append(
                StepResult(text, StepStatus.PENDING,
                           "skipped: an earlier step did not pass", 0.0)
            )
            continue
        resolution = resolve(registry, text)
        if resolution.is_pending:
            result = StepResult(text, StepStatus.PENDING, PENDING_MESSAGE, 0.0)
        elif resolution.is_ambiguous:
            listing = "; ".join(
                f"{b.pattern!r} ({b.source})" for b in resolution.ambiguous
            )
            result = StepResult(
                text, StepStatus.AMBIGUOUS,
                f"step matches {len(resolution.ambiguous)} patterns: {listing}", 0.0,
            )
        else:
            result = execute_step(resolution.binding, sut, text)
        results.append(result)
        if stop_on_failure and result.status is not StepStatus.PASSED:
            halted = True
    return results
