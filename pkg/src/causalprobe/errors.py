"""Exception hierarchy shared by every subsystem."""


class CausalProbeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CausalProbeError, ValueError):
    """A caller supplied an argument outside the operation's contract."""


class StructuralError(CausalProbeError):
    """A model or graph violates a structural invariant (e.g. a cycle)."""

    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = cycle


class CapacityError(CausalProbeError):
    """An exact enumeration would exceed its configured cap."""


class UndefinedConditionalError(CausalProbeError):
    """Conditioning on an event of probability zero."""


class UnsupportedGraphError(CausalProbeError):
    pass


class DatasetError(CausalProbeError, ValueError):
    pass


class ConfigurationError(CausalProbeError):
    pass


class TransportError(CausalProbeError):
    """A provider request failed after all retries."""


class ThrottledError(CausalProbeError):
    def __init__(self, message, retry_after):
        super().__init__(message)
        self.retry_after = retry_after


class UnmatchedPromptError(CausalProbeError):
    def __init__(self, prompt):
        super().__init__(f"strict mock has no rule for prompt: {prompt!r}")
        self.prompt = prompt


class CacheCorruptionError(CausalProbeError):
    pass


class LabelValidationError(CausalProbeError, ValueError):
    pass


class ProbeError(CausalProbeError):
    """A single query of a pairwise probe failed; carries the pair and template."""

    def __init__(self, message, pair=None, template=None):
        super().__init__(message)
        self.pair = pair
        self.template = template
