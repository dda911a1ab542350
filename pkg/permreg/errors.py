"""Exception types raised by permreg.

All of them derive from ValueError so callers that only care about bad input
can keep catching ValueError.
"""


class PermregError(ValueError):
    """Base class for permreg errors."""


class InvalidArgumentError(PermregError):
    pass


class UnsupportedSizeError(PermregError):
    pass


class DegenerateDesignError(PermregError):
    """The design (or permuted design) is rank deficient."""


class OutOfValidityError(PermregError):
    """A bound was evaluated outside the range where it holds."""


class OutOfScopeError(PermregError):
    """A result was evaluated outside its stated hypotheses."""


class SearchRefusedError(PermregError):
    """An exhaustive search would enumerate too many candidates."""


class ConfigError(PermregError):
    pass


class LemmaViolationError(PermregError):
    """A Monte Carlo or numerical lemma check found a violation."""
