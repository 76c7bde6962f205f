"""Shared standard-normal helpers.

Every closed form in this package routes through these two functions so
that cross-formula agreement checks compare algebra, not CDF
implementations.  `ndtr` is erfc-based with relative error below 1e-14;
`ndtri` is its high-precision inverse.

Identity worth remembering when reading call sites: -Phi^{-1}(1-p) equals
Phi^{-1}(p), and the latter stays accurate when p is tiny.
"""

from __future__ import annotations

from scipy.special import ndtr, ndtri


def phi(x: float) -> float:
    """Standard normal CDF."""
    return float(ndtr(x))


def phi_inv(p: float) -> float:
    """Standard normal quantile function."""
    return float(ndtri(p))
