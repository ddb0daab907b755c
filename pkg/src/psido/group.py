"""Pointwise arithmetic on the tanh group G = (-1, 1)^n.

The group law is x +_G y = (x + y) / (1 + x y), applied componentwise. The
maps ``map_x(t) = -tanh(t)`` and ``map_t(x) = 0.5 * log((1 - x) / (1 + x))``
are mutually inverse isomorphisms between (R^n, +) and (G, +_G).
"""
import warnings

import numpy as np

#: points closer than this to the boundary are accepted but flagged
BOUNDARY_FLAG = 1e-8


class GroupDomainError(ValueError):
    """A coordinate lies outside the open interval (-1, 1)."""


class BoundaryWarning(UserWarning):
    pass


def _as_gpoint(a):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if not np.all(np.isfinite(a)) or np.any(np.abs(a) >= 1.0):
        raise GroupDomainError(f"coordinates must lie in (-1, 1), got {a}")
    if np.any(np.abs(a) > 1.0 - BOUNDARY_FLAG):
        warnings.warn("point within 1e-8 of the boundary of G; use t-coordinates",
                      BoundaryWarning, stacklevel=3)
    return a


def _same_dim(a, b):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def gop_add(a, b):
    """Group sum a +_G b."""
    a, b = _as_gpoint(a), _as_gpoint(b)
    _same_dim(a, b)
    return (a + b) / (1.0 + a * b)


def gop_neg(a):
    """Group inverse, which is plain negation."""
    return -_as_gpoint(a)


def map_t(a):
    """G -> R^n, t(x) = 0.5 * log((1 - x) / (1 + x))."""
    a = _as_gpoint(a)
    # equals -artanh(x); log1p keeps accuracy near 0
    return 0.5 * (np.log1p(-a) - np.log1p(a))


def map_x(t):
    """R^n -> G, x(t) = -tanh(t)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(t)):
        raise ValueError("t-coordinates must be finite")
    return -np.tanh(t)


def distance_G(a, b):
    """Natural distance |t(a) - t(b)|."""
    ta, tb = map_t(a), map_t(b)
    _same_dim(ta, tb)
    return float(np.linalg.norm(ta - tb))


def haar_weight(a):
    """Haar density 1 / prod(1 - a_j^2) relative to Lebesgue measure.

    Returns ``inf`` (with a warning) when the product underflows near the
    boundary rather than a silently wrong finite value.
    """
    a = _as_gpoint(a)
    denom = np.prod((1.0 - a) * (1.0 + a))
    if denom == 0.0 or not np.isfinite(1.0 / denom):
        warnings.warn("Haar weight overflow near the boundary", BoundaryWarning, stacklevel=2)
        return float("inf")
    return float(1.0 / denom)


def log_weight_shubin(t):
    """1 + |ln(1 - x^2)| at x = map_x(t), computed stably in t.

    With x = -tanh t one has 1 - x^2 = sech^2 t, so |ln(1 - x^2)| = 2 ln cosh t.
    """
    at = np.abs(np.asarray(t, dtype=float))
    return 1.0 + 2.0 * (at + np.log1p(np.exp(-2.0 * at)) - np.log(2.0))
