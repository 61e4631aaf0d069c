"""Exception types raised by the library.

Everything derives from :class:`ParamNetError` so callers (and the CLI) can
catch domain failures in one place.
"""


class ParamNetError(ValueError):
    pass


class NetworkValidationError(ParamNetError):
    """A ModeNetwork violated one of its structural invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NearSingular(ParamNetError):
    """A linear solve was too ill-conditioned to trust (condition > limit)."""

    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class InconsistentSymmetry(ParamNetError):
    pass


class UnsolvableLimit(ParamNetError):
    pass


class DomainError(ParamNetError):
    pass


class DegenerateGain(ParamNetError):
    pass


class ConditionFailsAtResonance(ParamNetError):
    pass


class UnstableLoop(ParamNetError):
    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class SignatureMismatch(ParamNetError):
    pass
