"""Exception types shared across the package."""


class FlowstepsError(Exception):
    """Base class for all errors raised by this package."""


class PnmlError(FlowstepsError):
    """Malformed PNML document (XML syntax errors carry line/column)."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class NetStructureError(FlowstepsError):
    """Net violates structural invariants: dangling arcs, duplicate ids, non-bipartite arcs."""


class FiringError(FlowstepsError):
    """Transition cannot fire, or marking/transition references are unknown."""


class FeatureParseError(FlowstepsError):
    """Feature text does not match the grammar; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ManifestError(FlowstepsError):
    """Bindings manifest violates its schema; message names the JSON path."""


class SutError(FlowstepsError):
    """Raised by a system-under-test adapter when an action cannot be performed."""


class TranslationError(FlowstepsError):
    """Net/scenario translation failed (invalid workflow net, malformed scenario shape)."""


class ScenarioLimitError(TranslationError):
    """Scenario enumeration exceeded the configured cap."""

    def __init__(self, partial_count, limit):
        super().__init__(
            f"scenario enumeration exceeded max_scenarios={limit} "
            f"({partial_count} scenarios found before aborting)"
        )
        self.partial_count = partial_count
        self.limit = limit
