"""Error taxonomy shared by all hmodlab modules.

Two families matter for callers: *verified failures* (a check ran to
completion and the claim is false, e.g. :class:`CertificateViolation`) and
*resource or parameter problems* (the computation could not be carried out,
e.g. :class:`BudgetExhausted`). The CLI maps the first family to exit code 1
and the second to exit code 2.
"""

from __future__ import annotations


class HmodlabError(Exception):
    """Base class for all package errors."""


class DomainError(HmodlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation
    (evaluation point outside [0,1], negative square-root radicand, ...)."""


class ParameterError(HmodlabError, ValueError):
    """An argument violates a precondition (q outside (0,1], m < 0, bad
    tolerance, malformed config value, ...)."""


class BudgetExhausted(HmodlabError, RuntimeError):
    """An adaptive computation ran out of its evaluation budget before
    reaching the requested tolerance.

    Carries the best enclosure obtained so far in :attr:`best`.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class CertificateViolation(HmodlabError, AssertionError):
    """A stored bound certificate failed on a concrete finite subset."""

    def __init__(self, message: str, subset=None, enclosure=None, bound=None):
        super().__init__(message)
        self.subset = subset
        self.enclosure = enclosure
        self.bound = bound


class ConstructionError(HmodlabError, AssertionError):
    """An identity that must hold exactly by construction failed; carries the
    nonzero residual for debugging."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


class WindowSearchError(HmodlabError, RuntimeError):
    """The witness-window search exhausted its depth without certifying a
    window. This does NOT assert that no window exists."""


class NotApplicableError(HmodlabError, ValueError):
    """The requested certificate does not apply to the given input (e.g. a
    non-membership refutation for the zero function)."""
