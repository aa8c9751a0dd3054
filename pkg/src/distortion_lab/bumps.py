"""Smooth step and bump primitives used throughout the map engines.

Everything here is built from the classic non-analytic mollifier kernel
``phi(x) = exp(-1/x)`` for ``x > 0``.  The derived step ``s01`` satisfies
``s01(x) + s01(1 - x) = 1`` by construction, which propagates to the exact
complement identity of the radial step `bump_B`.
"""

from __future__ import annotations

import numpy as np

__all__ = ["phi_kernel", "s01", "bump_B", "bump_B_log2", "window_step", "hat01"]


def phi_kernel(x):
    """exp(-1/x) for x > 0, exactly 0 otherwise.  Vectorized."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)
    return out


def s01(x):
    """Smooth monotone step: 0 for x <= 0, 1 for x >= 1, symmetric about 1/2.

    The symmetry s01(x) + s01(1-x) = 1 holds with the same denominator on
    both sides, so paired evaluations sum to 1.0 in floating point.
    """
    x = np.asarray(x, dtype=float)
    a = phi_kernel(x)
    b = phi_kernel(1.0 - x)
    with np.errstate(invalid="ignore"):
        mid = a / (a + b)
    return np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, mid))


def bump_B_log2(x):
    """The radial step in base-2 log coordinates: B(2^x).

    Satisfies bump_B_log2(x) + bump_B_log2(-x) == 1.0 exactly (float
    negation is exact and both branches share one s01 evaluation path).
    Vanishes for x <= -1 (t <= 1/2), equals 1 for x >= 1 (t >= 2).
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    s = s01((ax + 1.0) / 2.0)
    return np.where(x >= 0.0, s, 1.0 - s)


def bump_B(t):
    """Smooth step on radii: 0 for t <= 1/2, 1 for t >= 2, increasing between.

    ``bump_B(t) + bump_B(1/t) = 1``; the sum is exactly 1.0 in floating
    point whenever the pair (t, 1/t) round-trips under division, because
    both calls canonicalize through the same side of the pair.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        big = np.where(t >= 1.0, t, 1.0 / np.where(t > 0.0, t, 1.0))
    big = np.where(t > 0.0, big, np.inf)  # t == 0 sits on the vanishing side
    x = 0.5 * (np.log2(big) + 1.0)
    s = s01(x)
    return np.where(t >= 1.0, s, 1.0 - s)


def window_step(r, lo0, lo1, hi1, hi0):
    """Smooth plateau: 0 outside (lo0, hi0), 1 on [lo1, hi1].

    Product of two s01 ramps; exact 0/1 off the shoulders.
    """
    r = np.asarray(r, dtype=float)
    up = s01((r - lo0) / (lo1 - lo0))
    down = s01((hi0 - r) / (hi0 - hi1))
    return up * down


def hat01(u):
    """Smooth hat supported in (0, 1), exact 0 outside, peak value 1 at 1/2."""
    u = np.asarray(u, dtype=float)
    return s01(2.0 * u) * s01(2.0 - 2.0 * u)
