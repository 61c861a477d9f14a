"""Semantic exception hierarchy shared across the package.

Every error the engine can raise maps onto one of three client-facing
classes: configuration/domain problems, numerical failures, and designs
that are infeasible as stated. The CLI and the HTTP service translate
these into exit codes and status codes respectively.
"""

from __future__ import annotations


class Choose4Error(Exception):
    """Base class for all engine errors."""

    code = "error"


class DomainError(Choose4Error, ValueError):
    """A parameter value lies outside its admissible domain."""

    code = "domain"


class ArityError(DomainError):
    """The set of chosen parameters does not contain exactly four names."""

    code = "arity"


class InvalidPattern(Choose4Error, ValueError):
    """The two unknowns leave one equation underdetermined and the other overdetermined."""

    code = "invalid_pattern"


class Infeasible(Choose4Error):
    """No admissible solution exists (e.g. theta0 <= theta1 while solving for deaths)."""

    code = "infeasible"


class PatternMismatch(Choose4Error, ValueError):
    """A stage's chosen parameters violate the strategy's stage template."""

    code = "pattern_mismatch"


class NonmonotoneDeaths(Choose4Error, ValueError):
    """Stage death counts are not strictly increasing."""

    code = "nonmonotone_deaths"


class CholeskyFailure(Choose4Error, ValueError):
    """The correlation matrix is not positive definite."""

    code = "cholesky"


class MonotoneLikelihood(Choose4Error):
    """Cox partial likelihood has no finite maximum (all events in one arm)."""

    code = "monotone_likelihood"


class InsufficientEvents(Choose4Error):
    """A snapshot was requested at more deaths than the trial can ever observe."""

    code = "insufficient_events"
