"""Exception types shared across the toolkit."""


class FancloseError(Exception):
    """Base class for every error raised by this package."""


class PrecisionExhausted(FancloseError):
    """An interval was too wide to decide a quantity; retry with more digits."""


class InvalidD(FancloseError, ValueError):
    pass


class NotATriple(FancloseError, ValueError):
    pass


class NonIntegerPoint(FancloseError, ArithmeticError):
    pass


class PreconditionTooSmall(FancloseError, ValueError):
    pass


class SideConditionFailed(FancloseError):
    pass


class RegimeAmbiguous(FancloseError, ValueError):
    pass


class DomainViolation(FancloseError, ValueError):
    pass


class CapMissing(FancloseError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NoConvergentWorks(FancloseError):
    pass


class CheckpointCorrupt(FancloseError):
    pass


class LevelMismatch(CheckpointCorrupt):
    """A checkpoint written for one sieve level was offered to another."""


class UnresolvedCandidate(FancloseError):
    """A sieve survivor could not be excluded."""
