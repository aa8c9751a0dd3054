"""Numeric engine for circle homeomorphisms.

Points are angles in [0, 2*pi).  Maps evaluate vectorized on angle arrays
and know their inverses.  The module provides rigid rotations, piecewise
affine circle maps, interval-supported displacement bumps, harmonic tilings
with tile-transport maps, interval model families in logit charts, and lazy
suspension products (infinitely many disjointly supported conjugated
factors, evaluated by tile lookup in closed form).

Composition convention matches the sphere engine: ``Compose1([g, h])``
applies ``h`` first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bumps import s01

TWO_PI = 2.0 * math.pi

__all__ = [
    "CircleMap",
    "Identity1",
    "Rotation1",
    "Compose1",
    "Inverse1",
    "BumpDisplacement",
    "IntervalModelMap",
    "SegmentedCircleMap",
    "HarmonicTiling",
    "TransportMap",
    "SuspensionProduct",
    "circle_grid",
    "circle_distance",
    "sup_displacement_circle",
    "map_distance_circle",
    "derivative_sup_circle",
    "c1_distance_circle",
    "compose_word_circle",
    "rotation_number",
    "logit",
    "expit",
]


def wrap(x):
    return np.mod(x, TWO_PI)


def wrap_pm_pi(x):
    return np.mod(np.asarray(x) + math.pi, TWO_PI) - math.pi


def logit(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(u) - np.log1p(-u)


def expit(y):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    pos = y >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-y[pos]))
    e = np.exp(y[~pos])
    out[~pos] = e / (1.0 + e)
    return out


# ---------------------------------------------------------------------------
# Base classes
# ---------------------------------------------------------------------------


class CircleMap:
    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_inverse(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def power(self, k: int) -> "CircleMap | None":
        return None

    def __call__(self, x: float) -> float:
        return float(self.apply(np.array([x], dtype=float))[0])

    def inverse(self) -> "CircleMap":
        return Inverse1(self)


class Identity1(CircleMap):
    def apply(self, x):
        return np.asarray(x, dtype=float).copy()

    def apply_inverse(self, x):
        return np.asarray(x, dtype=float).copy()

    def power(self, k):
        return self


class Rotation1(CircleMap):
    def __init__(self, angle: float):
        self.angle = float(angle)

    def apply(self, x):
        return wrap(np.asarray(x, dtype=float) + self.angle)

    def apply_inverse(self, x):
        return wrap(np.asarray(x, dtype=float) - self.angle)

    def power(self, k):
        return Rotation1(k * self.angle)


class Compose1(CircleMap):
    """Compose1([g, h]) applies h first."""

    def __init__(self, maps: Sequence[CircleMap]):
        self.maps = list(maps)

    def apply(self, x):
        out = np.asarray(x, dtype=float).copy()
        for m in reversed(self.maps):
            out = m.apply(out)
        return out

    def apply_inverse(self, x):
        out = np.asarray(x, dtype=float).copy()
        for m in self.maps:
            out = m.apply_inverse(out)
        return out


class Inverse1(CircleMap):
    def __init__(self, inner: CircleMap):
        self.inner = inner

    def apply(self, x):
        return self.inner.apply_inverse(x)

    def apply_inverse(self, x):
        return self.inner.apply(x)

    def power(self, k):
        return self.inner.power(-k) if k else Identity1()


# ---------------------------------------------------------------------------
# Elementary interval-supported maps
# ---------------------------------------------------------------------------


class BumpDisplacement(CircleMap):
    """x -> x + t * ramp(x - base) with a smooth plateau ramp.

    The ramp rises on [0, r1], equals 1 exactly on [r1, r2], falls on
    [r2, r3]; the support of the map is exactly (base, base + r3).
    """

    def __init__(self, t: float, base: float, r1: float, r2: float, r3: float):
        if not (0.0 < r1 < r2 < r3 < TWO_PI):
            raise ValueError("ramp breakpoints must satisfy 0 < r1 < r2 < r3 < 2*pi")
        self.t = float(t)
        self.base = float(base)
        self.r1, self.r2, self.r3 = float(r1), float(r2), float(r3)

    def _ramp(self, u):
        return s01(u / self.r1) * s01((self.r3 - u) / (self.r3 - self.r2))

    def displacement(self, x):
        u = np.mod(np.asarray(x, dtype=float) - self.base, TWO_PI)
        return self.t * self._ramp(u)

    def apply(self, x):
        return wrap(np.asarray(x, dtype=float) + self.displacement(x))

    def apply_inverse(self, x):
        # y = x + d(x); |d'| < 1, so bisection on x in [y - |t|, y + |t|]
        y = np.asarray(x, dtype=float)
        lo = y - abs(self.t) - 1e-12
        hi = y + abs(self.t) + 1e-12
        for _ in range(70):
            mid = 0.5 * (lo + hi)
            val = mid + self.displacement(mid)
            too_low = val < y
            lo = np.where(too_low, mid, lo)
            hi = np.where(too_low, hi, mid)
        return wrap(0.5 * (lo + hi))


class IntervalModelMap(CircleMap):
    """Logit-chart translation supported exactly on one interval.

    On (a, b) the map is conjugate (by the affine chart onto (0,1) and the
    logit) to the translation by ``shift``; it is the identity elsewhere.
    These maps form a one-parameter group for fixed interval.
    """

    def __init__(self, a: float, b: float, shift: float):
        if not b > a:
            raise ValueError("interval must be nondegenerate")
        self.a, self.b, self.shift = float(a), float(b), float(shift)

    def _move(self, x, shift):
        x = np.asarray(x, dtype=float)
        inside = (x > self.a) & (x < self.b)
        if not np.any(inside):
            return x.copy()
        u = (x[inside] - self.a) / (self.b - self.a)
        e = math.exp(shift)
        v = u * e / (1.0 + u * (e - 1.0))
        out = x.copy()
        out[inside] = self.a + (self.b - self.a) * v
        return out

    def apply(self, x):
        return self._move(x, self.shift)

    def apply_inverse(self, x):
        return self._move(x, -self.shift)

    def power(self, k):
        return IntervalModelMap(self.a, self.b, k * self.shift)


@dataclass(frozen=True)
class _Affine1D:
    x0: float
    x1: float
    y0: float
    y1: float

    def fwd(self, x):
        return self.y0 + (x - self.x0) * (self.y1 - self.y0) / (self.x1 - self.x0)

    def inv(self, y):
        return self.x0 + (y - self.y0) * (self.x1 - self.x0) / (self.y1 - self.y0)


@dataclass(frozen=True)
class _LogitAffine1D:
    """x -> a + (b - a) * expit(slope * x + offset) on [x0, x1]."""

    x0: float
    x1: float
    a: float
    b: float
    slope: float
    offset: float

    def fwd(self, x):
        return self.a + (self.b - self.a) * expit(self.slope * np.asarray(x) + self.offset)

    def inv(self, y):
        u = (np.asarray(y) - self.a) / (self.b - self.a)
        return (logit(u) - self.offset) / self.slope

    @property
    def y0(self):
        return float(self.fwd(np.array(self.x0)))

    @property
    def y1(self):
        return float(self.fwd(np.array(self.x1)))


class SegmentedCircleMap(CircleMap):
    """Orientation-preserving circle map given by monotone segments.

    Segments must tile one full turn in both source and image; endpoints of
    consecutive segments must agree to 1e-9 (checked).  Segment maps are
    affine or logit-affine pieces with closed-form inverses.
    """

    def __init__(self, segments: Sequence):
        self.segments = list(segments)
        xs = [s.x0 for s in self.segments]
        if any(b.x0 - a.x1 > 1e-12 or a.x1 - b.x0 > 1e-12
               for a, b in zip(self.segments, self.segments[1:])):
            raise ValueError("segments must be contiguous in the source")
        span = self.segments[-1].x1 - self.segments[0].x0
        if abs(span - TWO_PI) > 1e-9:
            raise ValueError("segments must cover one full turn")
        for a, b in zip(self.segments, self.segments[1:]):
            ya = a.y1 if isinstance(a, _Affine1D) else a.fwd(np.array(a.x1))
            yb = b.y0 if isinstance(b, _Affine1D) else b.fwd(np.array(b.x0))
            if abs(float(ya) - float(yb)) > 1e-9:
                raise ValueError("segment images must be contiguous")
        self._x_base = self.segments[0].x0
        self._x_edges = np.array([s.x1 for s in self.segments])
        self._y_edges = np.array(
            [float(s.y1 if isinstance(s, _Affine1D) else s.fwd(np.array(s.x1))) for s in self.segments]
        )
        self._y_base = float(
            self.segments[0].y0
            if isinstance(self.segments[0], _Affine1D)
            else self.segments[0].fwd(np.array(self.segments[0].x0))
        )

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        t = self._x_base + np.mod(x - self._x_base, TWO_PI)
        idx = np.searchsorted(self._x_edges, t, side="left")
        idx = np.clip(idx, 0, len(self.segments) - 1)
        out = np.empty_like(t)
        for k, seg in enumerate(self.segments):
            m = idx == k
            if np.any(m):
                out[m] = seg.fwd(t[m])
        return wrap(out)

    def apply_inverse(self, y):
        y = np.asarray(y, dtype=float)
        t = self._y_base + np.mod(y - self._y_base, TWO_PI)
        idx = np.searchsorted(self._y_edges, t, side="left")
        idx = np.clip(idx, 0, len(self.segments) - 1)
        out = np.empty_like(t)
        for k, seg in enumerate(self.segments):
            m = idx == k
            if np.any(m):
                out[m] = seg.inv(t[m])
        return wrap(out)


# ---------------------------------------------------------------------------
# Harmonic tilings and transports
# ---------------------------------------------------------------------------

# tiles beyond this index are thinner than float spacing near the carrier
# ends; points there are treated as fixed (their true displacement is below
# double resolution anyway)
_INDEX_CAP = 1 << 24


@dataclass(frozen=True)
class HarmonicTiling:
    """Tiling of (center - halfwidth, center + halfwidth) by tiles
    [e(i), e(i+1)) with e(i) = center + halfwidth * i / (|i| + 2).

    Tile lengths decay like 1/i^2 and the ratio of consecutive lengths
    tends to 1, the chart convention used throughout for carriers of
    translation-like interval maps.
    """

    center: float
    halfwidth: float

    @property
    def lo(self):
        return self.center - self.halfwidth

    @property
    def hi(self):
        return self.center + self.halfwidth

    def edge(self, i):
        i = np.asarray(i, dtype=float)
        return self.center + self.halfwidth * i / (np.abs(i) + 2.0)

    def inside(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.lo) & (x < self.hi)

    def locate(self, x):
        """Tile index i with edge(i) <= x < edge(i+1); only valid inside."""
        x = np.asarray(x, dtype=float)
        u = (x - self.center) / self.halfwidth
        u = np.clip(u, -1.0 + 1e-18, 1.0 - 1e-18)
        pos = u >= 0
        with np.errstate(over="ignore", invalid="ignore"):
            i_pos = np.floor(2.0 * u / (1.0 - u))
            v = -u
            m = np.ceil(2.0 * v / (1.0 - v))
        i = np.where(pos, i_pos, -m)
        return np.clip(i, -_INDEX_CAP, _INDEX_CAP).astype(np.int64)

    def chart(self, i, x):
        """Affine coordinate of x within tile i, in [0, 1)."""
        e0 = self.edge(i)
        e1 = self.edge(np.asarray(i) + 1)
        return (np.asarray(x, dtype=float) - e0) / (e1 - e0)

    def unchart(self, i, u):
        e0 = self.edge(i)
        e1 = self.edge(np.asarray(i) + 1)
        return e0 + np.asarray(u, dtype=float) * (e1 - e0)


class TransportMap(CircleMap):
    """Homeomorphism supported on a tiled interval, sending tile i to i+1.

    On tile i the map is chart_out^-1 o model_i o chart_in with affine tile
    charts; models are [0,1]-homeomorphisms fixing the endpoints, supplied
    per tile.  With identity models this is the piecewise affine transport.
    """

    def __init__(self, tiling: HarmonicTiling, model_fwd=None, model_inv=None):
        self.tiling = tiling
        # model_fwd(i, u) applies tile i's model; defaults to the identity
        self.model_fwd = model_fwd or (lambda i, u: u)
        self.model_inv = model_inv or (lambda i, u: u)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        out = x.copy()
        m = self.tiling.inside(x)
        if np.any(m):
            xi = x[m]
            i = self.tiling.locate(xi)
            live = np.abs(i) < _INDEX_CAP
            u = self.tiling.chart(i, xi)
            v = self.model_fwd(i, np.clip(u, 0.0, 1.0))
            res = self.tiling.unchart(i + 1, v)
            out[m] = np.where(live & np.isfinite(res), res, xi)
        return out

    def apply_inverse(self, y):
        y = np.asarray(y, dtype=float)
        out = y.copy()
        m = self.tiling.inside(y)
        if np.any(m):
            yi = y[m]
            j = self.tiling.locate(yi)
            live = np.abs(j) < _INDEX_CAP
            u = self.tiling.chart(j, yi)
            v = self.model_inv(j - 1, np.clip(u, 0.0, 1.0))
            res = self.tiling.unchart(j - 1, v)
            out[m] = np.where(live & np.isfinite(res), res, yi)
        return out


# ---------------------------------------------------------------------------
# Suspension products
# ---------------------------------------------------------------------------


class LogitColumnModel:
    """Column factor described by its displacement in the logit chart.

    ``disp(W)`` is the displacement of the conjugated model at logit
    coordinate W; it must vanish exactly for |W| >= guard.  Conjugating into
    sub-tile j of a tiling whose chart scales logit coordinates by scale(j)
    turns the displacement into scale(j) * disp(W / scale(j)), still closed.

    The guard must stay well inside the depth where absolute circle
    coordinates can still resolve the chart tails (|W| ~ 30 for doubles);
    the factor families used here are exactly the identity beyond |W| ~ 5.
    """

    guard = 14.0

    def disp(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def disp_inv(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class TranslationColumn(LogitColumnModel):
    """Pure logit translation; the model family of the twisted products."""

    def __init__(self, shift: float):
        self.shift = float(shift)

    def disp(self, w):
        return np.full_like(np.asarray(w, dtype=float), self.shift)

    def disp_inv(self, w):
        return np.full_like(np.asarray(w, dtype=float), -self.shift)


class WrappedColumn(LogitColumnModel):
    """A circle map supported in a reference interval, read in logit charts."""

    def __init__(self, circle_map: CircleMap, a: float, b: float):
        self.map = circle_map
        self.a, self.b = float(a), float(b)

    def _disp(self, w, inverse: bool):
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        live = np.abs(w) < self.guard
        if np.any(live):
            u = expit(w[live])
            x = self.a + (self.b - self.a) * u
            y = self.map.apply_inverse(x) if inverse else self.map.apply(x)
            v = (y - self.a) / (self.b - self.a)
            out[live] = logit(np.clip(v, 1e-300, 1.0 - 1e-16)) - w[live]
        return out

    def disp(self, w):
        return self._disp(w, inverse=False)

    def disp_inv(self, w):
        return self._disp(w, inverse=True)


class SuspensionProduct(CircleMap):
    """Lazy double product of disjointly supported conjugated factors.

    Factor (i, j) lives on V^i(F^j(K)) where K is sub-tile 0 of the inner
    tiling of tile 0; V is the outer transport (affine, or warped for the
    twisted variant) and F scales inner-tile logit charts by scale(j).
    Each evaluation touches exactly one factor, located by tile lookup and
    applied in closed form in the inner tile's logit chart.
    """

    def __init__(
        self,
        outer: HarmonicTiling,
        inner: HarmonicTiling,
        column_for: Callable[[int], LogitColumnModel],
        scale_of: Callable[[np.ndarray], np.ndarray],
        i_max: int,
        outer_transport: TransportMap | None = None,
    ):
        self.outer = outer
        self.inner = inner
        self.column_for = column_for
        self.scale_of = scale_of
        self.i_max = int(i_max)
        self.outer_transport = outer_transport  # None: plain affine transport

    def _to_column(self, x, i):
        """V^-i applied pointwise (exponent i varies per point)."""
        if self.outer_transport is None:
            u = self.outer.chart(i, x)
            return self.outer.unchart(np.zeros_like(i), u)
        out = x.copy()
        kmax = int(i.max()) if i.size else 0
        for step in range(kmax):
            move = i > step
            if np.any(move):
                out[move] = self.outer_transport.apply_inverse(out[move])
        return out

    def _from_column(self, y, i):
        if self.outer_transport is None:
            u = self.outer.chart(np.zeros_like(i), y)
            return self.outer.unchart(i, u)
        out = y.copy()
        kmax = int(i.max()) if i.size else 0
        for step in range(kmax):
            move = i > step
            if np.any(move):
                out[move] = self.outer_transport.apply(out[move])
        return out

    def _factor(self, x, inverse: bool):
        x = np.asarray(x, dtype=float)
        out = x.copy()
        idx = np.flatnonzero(self.outer.inside(x))
        if idx.size == 0:
            return out
        xi = x[idx]
        i = self.outer.locate(xi)
        keep = (i >= 0) & (i <= self.i_max)
        idx, xi, i = idx[keep], xi[keep], i[keep]
        if idx.size == 0:
            return out
        y = self._to_column(xi, i)
        j = self.inner.locate(y)
        keep = (j >= 0) & (j < _INDEX_CAP) & self.inner.inside(y)
        idx, i, y, j = idx[keep], i[keep], y[keep], j[keep]
        if idx.size == 0:
            return out
        u = self.inner.chart(j, y)
        u = np.where(np.isfinite(u), u, 0.5)
        u = np.clip(u, 1e-300, 1.0 - 1e-16)
        w = logit(u)
        scale = self.scale_of(j)
        res = np.empty_like(w)
        for i_val in np.unique(i):
            col = self.column_for(int(i_val))
            sel = i == i_val
            wv = w[sel]
            sc = scale[sel]
            d = col.disp_inv(wv / sc) if inverse else col.disp(wv / sc)
            res[sel] = wv + sc * d
        ynew = self.inner.unchart(j, expit(res))
        out[idx] = self._from_column(ynew, i)
        return out

    def apply(self, x):
        return self._factor(x, inverse=False)

    def apply_inverse(self, x):
        return self._factor(x, inverse=True)


# ---------------------------------------------------------------------------
# Grids, metrics, words
# ---------------------------------------------------------------------------


def circle_grid(count: int, seed: int = 0) -> np.ndarray:
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    k = np.arange(count, dtype=float)
    return wrap(TWO_PI * ((k + 0.5) / count + seed / golden))


def circle_distance(x, y) -> np.ndarray:
    return np.abs(wrap_pm_pi(np.asarray(x) - np.asarray(y)))


def sup_displacement_circle(m: CircleMap, grid: np.ndarray) -> float:
    return float(np.max(circle_distance(grid, m.apply(grid))))


def map_distance_circle(m1: CircleMap, m2: CircleMap, grid: np.ndarray) -> float:
    return float(np.max(circle_distance(m1.apply(grid), m2.apply(grid))))


def _lift_derivative(m: CircleMap, x: np.ndarray, h: float) -> np.ndarray:
    dp = m.apply(wrap(x + h))
    dm = m.apply(wrap(x - h))
    return wrap_pm_pi(dp - dm) / (2.0 * h)


def derivative_sup_circle(m: CircleMap, grid: np.ndarray, step: float = 1e-7) -> float:
    """log of the sampled sup of |dm| and |d(m^-1)|."""
    d1 = np.abs(_lift_derivative(m, grid, step))
    d2 = np.abs(_lift_derivative(Inverse1(m), grid, step))
    return math.log(max(float(np.max(d1)), float(np.max(d2)), 1.0))


def c1_distance_circle(m1: CircleMap, m2: CircleMap, grid: np.ndarray, step: float = 1e-6) -> float:
    """C0 distance plus sup distance of first derivatives (sampled)."""
    c0 = map_distance_circle(m1, m2, grid)
    d1 = _lift_derivative(m1, grid, step)
    d2 = _lift_derivative(m2, grid, step)
    return float(c0 + np.max(np.abs(d1 - d2)))


def compose_word_circle(letters: Sequence[int], table: dict[int, CircleMap]) -> CircleMap:
    """Word to map; runs of a letter collapse to exact powers when available."""
    parts: list[CircleMap] = []
    i = 0
    while i < len(letters):
        j = i
        while j < len(letters) and letters[j] == letters[i]:
            j += 1
        run = j - i
        letter = letters[i]
        base = table[abs(letter)]
        k = run if letter > 0 else -run
        powered = base.power(k)
        if powered is not None:
            parts.append(powered)
        else:
            single = base if letter > 0 else Inverse1(base)
            parts.extend([single] * run)
        i = j
    if not parts:
        return Identity1()
    return Compose1(parts)


def rotation_number(m: CircleMap, x0: float = 0.1, iters: int = 2000) -> float:
    """Translation number of the natural lift, estimated over an orbit."""
    x = np.array([x0], dtype=float)
    total = 0.0
    for _ in range(iters):
        y = m.apply(x)
        total += float(wrap_pm_pi(y - x)[0])
        x = y
    return total / iters / TWO_PI
