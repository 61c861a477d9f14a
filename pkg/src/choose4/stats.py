"""Standard-normal primitives and the log hazard-ratio standard error.

These are the only probability kernels the design equations need. The
CDF/quantile pair is backed by the erf-based routines in scipy.special,
which are accurate to full double precision; the module adds domain
checking and the package-wide contract (absolute CDF error <= 1e-10,
quantile/CDF round-trip within 1e-8).
"""

from __future__ import annotations

import math

from scipy.special import ndtr, ndtri

from .errors import DomainError


def normal_cdf(x: float) -> float:
    """Standard normal cumulative distribution function.

    Args:
        x: Finite real.

    Returns:
        P(Z <= x) for Z standard normal.
    """
    if not math.isfinite(x):
        raise DomainError(f"normal_cdf requires finite x, got {x!r}")
    return float(ndtr(x))


def normal_quantile(p: float) -> float:
    """Inverse of the standard normal CDF.

    Args:
        p: Probability strictly inside (0, 1).

    Returns:
        x such that normal_cdf(x) == p.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"normal_quantile requires p in (0,1), got {p!r}")
    return float(ndtri(p))


def log_hr_std_error(d: float, pi: float = 0.5) -> float:
    """Standard error of the observed log hazard ratio at d pooled deaths.

    Uses the event-count approximation: Var(log HR-hat) = 1/(pi*(1-pi)*d)
    for allocation fraction pi.

    Args:
        d: Pooled death count, > 0 (real-valued).
        pi: Experimental-arm allocation fraction in (0, 1).

    Returns:
        1 / sqrt(pi * (1 - pi) * d).
    """
    if not (d > 0.0 and math.isfinite(d)):
        raise DomainError(f"death count must be positive and finite, got {d!r}")
    if not (0.0 < pi < 1.0):
        raise DomainError(f"allocation fraction must be in (0,1), got {pi!r}")
    return 1.0 / math.sqrt(pi * (1.0 - pi) * d)
