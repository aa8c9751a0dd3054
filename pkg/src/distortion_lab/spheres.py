"""Numeric engine for homeomorphisms of the 2-sphere.

The sphere is modelled as the extended complex plane with two charts: chart 0
stores z directly, chart 1 stores 1/z, and every stored value has modulus at
most 1 (plus rounding).  All maps evaluate vectorized on arrays of points and
every primitive knows its inverse, so expression trees built from Compose and
Inverse evaluate exactly (up to roundoff) in both directions.

Composition convention: ``Compose([g, h])`` applies ``h`` first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bumps import bump_B_log2, s01, window_step
from .errors import ChartOverflow

__all__ = [
    "SpherePoint",
    "MapExpr",
    "Identity",
    "Rotation",
    "RotPlus",
    "RotMinus",
    "Scale",
    "FMap",
    "Inversion",
    "LatMap",
    "LongMap",
    "Mobius",
    "Compose",
    "Inverse",
    "AngleProfile",
    "RadialProfile",
    "rot_factor",
    "lat_compose",
    "long_conjugate",
    "fibonacci_sphere_grid",
    "sphere_distance",
    "sup_displacement",
    "map_distance",
    "derivative_norm",
    "compose_word",
]

_F_INNER = (0.99, 1.01, 1.99, 2.01)  # support collars of the half-turn plug


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpherePoint:
    """One point; chart 0 stores z, chart 1 stores 1/z."""

    value: complex
    chart: int = 0

    @classmethod
    def from_complex(cls, z: complex) -> "SpherePoint":
        z = complex(z)
        if abs(z) > 1.0:
            return cls(1.0 / z, 1)
        return cls(z, 0)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(0j, 1)

    def to_complex(self) -> complex:
        """The chart-0 value; raises OverflowError-free inf for the far pole."""
        if self.chart == 0:
            return self.value
        if self.value == 0:
            return complex(math.inf, 0.0)
        return 1.0 / self.value


def _normalize(values: np.ndarray, charts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Switch charts wherever the stored modulus exceeds 1."""
    big = np.abs(values) > 1.0
    if np.any(big):
        values = np.where(big, 1.0 / np.where(big, values, 1.0), values)
        charts = charts ^ big
    if not np.all(np.isfinite(values)):
        raise ChartOverflow("non-finite chart value")
    return values, charts


def _log_radius(values: np.ndarray, charts: np.ndarray) -> np.ndarray:
    """log2 |z| of the underlying point (chart-aware; +-inf at the poles)."""
    with np.errstate(divide="ignore"):
        x = np.log2(np.abs(values))
    return np.where(charts, -x, x)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _AngleTerm:
    coeff: float
    log2_scale: float  # bump argument is r / 2^log2_scale
    radial: "RadialProfile | None" = None  # optional precomposition


@dataclass(frozen=True)
class AngleProfile:
    """A function of the radius: constant + sum of coeff * B(m(r) / scale).

    These profiles drive latitude-preserving maps; composition with a radial
    reparameterization and pointwise addition stay inside the family.
    """

    constant: float = 0.0
    terms: tuple[_AngleTerm, ...] = ()

    @classmethod
    def const(cls, c: float) -> "AngleProfile":
        return cls(constant=float(c))

    @classmethod
    def bump(cls, coeff: float, scale: float = 1.0) -> "AngleProfile":
        """coeff * B(r / scale)."""
        return cls(terms=(_AngleTerm(float(coeff), math.log2(scale)),))

    def __add__(self, other: "AngleProfile") -> "AngleProfile":
        return AngleProfile(self.constant + other.constant, self.terms + other.terms)

    def __rmul__(self, c: float) -> "AngleProfile":
        return AngleProfile(
            c * self.constant,
            tuple(_AngleTerm(c * t.coeff, t.log2_scale, t.radial) for t in self.terms),
        )

    def precompose(self, radial: "RadialProfile") -> "AngleProfile":
        terms = []
        for t in self.terms:
            if t.radial is not None:
                raise ValueError("profiles support one radial precomposition")
            terms.append(_AngleTerm(t.coeff, t.log2_scale, radial))
        return AngleProfile(self.constant, tuple(terms))

    def eval_log2(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at radius 2^x (x may be +-inf at the poles)."""
        out = np.full_like(np.asarray(x, dtype=float), self.constant)
        for t in self.terms:
            arg = x if t.radial is None else t.radial.log_apply(x)
            out = out + t.coeff * bump_B_log2(arg - t.log2_scale)
        return out

    def __call__(self, r) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.eval_log2(np.log2(np.asarray(r, dtype=float)))


@dataclass(frozen=True)
class _Segment:
    x0: float
    x1: float
    off0: float
    off1: float
    kind: str  # "const" | "smooth" | "linear"

    def offset(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "const":
            return np.full_like(x, self.off0)
        u = (x - self.x0) / (self.x1 - self.x0)
        if self.kind == "linear":
            w = np.clip(u, 0.0, 1.0)
        else:
            w = s01(u)
        return self.off0 + (self.off1 - self.off0) * w


@dataclass(frozen=True)
class RadialProfile:
    """A strictly increasing reparameterization of the radius.

    Stored in base-2 log coordinates as y(x) = x + offset(x) with a piecewise
    offset: constant plateaus (exact scaling windows) joined by monotone
    blends.  The offset vanishes off the breakpoint range, so the map is the
    identity near 0 and infinity.
    """

    segments: tuple[_Segment, ...] = ()
    pure_scale_log2: float | None = None  # escape hatch: global scaling

    @classmethod
    def identity(cls) -> "RadialProfile":
        return cls()

    @classmethod
    def pure_scale(cls, factor: float) -> "RadialProfile":
        """Global r -> factor * r; not identity at the ends (test helper)."""
        return cls(pure_scale_log2=math.log2(factor))

    @classmethod
    def from_plateaus(
        cls,
        plateaus: Sequence[tuple[float, float, float]],
        blend: str = "smooth",
        validate: bool = True,
    ) -> "RadialProfile":
        """Build from (x_lo, x_hi, offset) plateaus in log2 coordinates.

        Consecutive plateaus are joined by monotone blends; the profile is
        the identity left of the first and right of the last plateau edge.
        Blends may be 'smooth' or 'linear' per construction site; strict
        monotonicity is checked on a fine grid.
        """
        blends = [blend] * (len(plateaus) + 1) if isinstance(blend, str) else list(blend)
        segs: list[_Segment] = []
        prev_x, prev_off = None, 0.0
        for idx, (x0, x1, off) in enumerate(plateaus):
            if x1 < x0:
                raise ValueError("plateau must have x_lo <= x_hi")
            if prev_x is not None:
                segs.append(_Segment(prev_x, x0, prev_off, off, blends[idx]))
            elif off != 0.0:
                # lead-in blend from the identity over a window chosen wide
                # enough for the smooth step's slope bound (max s01' = 2)
                lead = max(3.0 * abs(off), 1.0)
                segs.append(_Segment(x0 - lead, x0, 0.0, off, blends[0]))
            segs.append(_Segment(x0, x1, off, off, "const"))
            prev_x, prev_off = x1, off
        if prev_off != 0.0:
            lead = max(3.0 * abs(prev_off), 1.0)
            segs.append(_Segment(prev_x, prev_x + lead, prev_off, 0.0, blends[-1]))
        prof = cls(segments=tuple(segs))
        if validate:
            prof._check_monotone()
        return prof

    def _check_monotone(self, samples: int = 4096):
        if not self.segments:
            return
        lo = self.segments[0].x0 - 2.0
        hi = self.segments[-1].x1 + 2.0
        x = np.linspace(lo, hi, samples)
        y = self.log_apply(x)
        if np.any(np.diff(y) <= 0):
            raise ValueError("radial profile is not strictly increasing")

    def log_apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.pure_scale_log2 is not None:
            return x + self.pure_scale_log2
        out = x.astype(float).copy()
        for seg in self.segments:
            mask = (x >= seg.x0) & (x < seg.x1)
            if np.any(mask):
                out[mask] = x[mask] + seg.offset(x[mask])
        return out

    def log_invert(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.pure_scale_log2 is not None:
            return y - self.pure_scale_log2
        if not self.segments:
            return y.astype(float).copy()
        lo = np.full_like(y, self.segments[0].x0 - 1.0)
        hi = np.full_like(y, self.segments[-1].x1 + 1.0)
        out = y.astype(float).copy()
        inside = (y > self.log_apply(lo)) & (y < self.log_apply(hi))
        if np.any(inside):
            a, b = lo[inside], hi[inside]
            target = y[inside]
            for _ in range(64):
                mid = 0.5 * (a + b)
                too_low = self.log_apply(mid) < target
                a = np.where(too_low, mid, a)
                b = np.where(too_low, b, mid)
            out[inside] = 0.5 * (a + b)
        return out

    def __call__(self, r) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.exp2(self.log_apply(np.log2(np.asarray(r, dtype=float))))


# ---------------------------------------------------------------------------
# Map expressions
# ---------------------------------------------------------------------------


class MapExpr:
    """Base class; subclasses implement chart-aware forward/inverse passes."""

    def apply(self, values: np.ndarray, charts: np.ndarray):
        raise NotImplementedError

    def apply_inverse(self, values: np.ndarray, charts: np.ndarray):
        raise NotImplementedError

    def power(self, k: int) -> "MapExpr | None":
        """An exact k-th power node, when one exists (else None)."""
        return None

    def __call__(self, p) -> SpherePoint:
        pt = p if isinstance(p, SpherePoint) else SpherePoint.from_complex(p)
        v = np.array([pt.value], dtype=complex)
        c = np.array([bool(pt.chart)])
        v, c = self.apply(v, c)
        return SpherePoint(complex(v[0]), int(c[0]))

    def inverse(self) -> "MapExpr":
        return Inverse(self)


class Identity(MapExpr):
    def apply(self, values, charts):
        return values, charts

    def apply_inverse(self, values, charts):
        return values, charts

    def power(self, k):
        return self


class Rotation(MapExpr):
    """z -> e^(i theta) z; fixes both poles."""

    def __init__(self, theta: float):
        self.theta = float(theta)

    def apply(self, values, charts):
        w = np.exp(1j * self.theta)
        return np.where(charts, values * np.conj(w), values * w), charts

    def apply_inverse(self, values, charts):
        w = np.exp(-1j * self.theta)
        return np.where(charts, values * np.conj(w), values * w), charts

    def power(self, k):
        return Rotation(k * self.theta)


class _RadialAngleMap(MapExpr):
    """Shared machinery: z -> z * exp(i * alpha(|z|)) for a radius profile."""

    def _angle(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply(self, values, charts):
        x = _log_radius(values, charts)
        ang = self._angle(x)
        phase = np.exp(1j * np.where(charts, -ang, ang))
        return values * phase, charts

    def apply_inverse(self, values, charts):
        # the radius is preserved, so the angle field inverts sign-wise
        x = _log_radius(values, charts)
        ang = self._angle(x)
        phase = np.exp(-1j * np.where(charts, -ang, ang))
        return values * phase, charts


class RotPlus(_RadialAngleMap):
    """z -> e^(i B(|z|) theta) z, supported where |z| >= 1/2."""

    def __init__(self, theta: float):
        self.theta = float(theta)

    def _angle(self, x):
        return self.theta * bump_B_log2(x)

    def power(self, k):
        return RotPlus(k * self.theta)


class RotMinus(_RadialAngleMap):
    """z -> e^(i (1 - B(|z|)) theta) z, supported where |z| <= 2."""

    def __init__(self, theta: float):
        self.theta = float(theta)

    def _angle(self, x):
        return self.theta * (1.0 - bump_B_log2(x))

    def power(self, k):
        return RotMinus(k * self.theta)


class LatMap(_RadialAngleMap):
    """Latitude-preserving map driven by an angle profile."""

    def __init__(self, profile: AngleProfile):
        self.profile = profile

    def _angle(self, x):
        return self.profile.eval_log2(x)


class Scale(MapExpr):
    """z -> factor * z for a positive real factor."""

    def __init__(self, factor: float):
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        self.factor = float(factor)

    def apply(self, values, charts):
        out = np.where(charts, values / self.factor, values * self.factor)
        return _normalize(out, charts)

    def apply_inverse(self, values, charts):
        out = np.where(charts, values * self.factor, values / self.factor)
        return _normalize(out, charts)

    def power(self, k):
        return Scale(self.factor ** k)


class Inversion(MapExpr):
    """z -> 1/z; exact chart swap."""

    def apply(self, values, charts):
        return values, ~charts

    def apply_inverse(self, values, charts):
        return values, ~charts

    def power(self, k):
        return Identity() if k % 2 == 0 else self


class FMap(_RadialAngleMap):
    """Half-turn plug: rotation by pi on 1.01 <= |z| <= 1.99, identity
    outside 0.99 <= |z| <= 2.01, smooth collars between."""

    def _angle(self, x):
        lo0, lo1, hi1, hi0 = _F_INNER
        with np.errstate(over="ignore"):
            r = np.exp2(np.clip(x, -100.0, 100.0))
        return math.pi * window_step(r, lo0, lo1, hi1, hi0)


class LongMap(MapExpr):
    """Longitude-preserving radial reparameterization."""

    def __init__(self, profile: RadialProfile):
        self.profile = profile

    def _radial(self, values, charts, invert: bool):
        x = _log_radius(values, charts)
        finite = np.isfinite(x)
        y = np.where(finite, x, 0.0)
        y = self.profile.log_invert(y) if invert else self.profile.log_apply(y)
        shift = np.where(finite, y - np.where(finite, x, 0.0), 0.0)
        ratio = np.exp2(np.where(charts, -shift, shift))
        return _normalize(values * ratio, charts)

    def apply(self, values, charts):
        return self._radial(values, charts, invert=False)

    def apply_inverse(self, values, charts):
        return self._radial(values, charts, invert=True)


class Mobius(MapExpr):
    """z -> (a z + b) / (c z + d); exact on both charts, closed inverse."""

    def __init__(self, a: complex, b: complex, c: complex, d: complex):
        det = a * d - b * c
        if det == 0:
            raise ValueError("Mobius matrix must be invertible")
        self.a, self.b, self.c, self.d = (complex(a), complex(b), complex(c), complex(d))

    def _apply_matrix(self, values, charts, a, b, c, d):
        # chart 0 stores z: image (a z + b)/(c z + d)
        # chart 1 stores v = 1/z: image (a + b v)/(c + d v)
        num = np.where(charts, a + b * values, a * values + b)
        den = np.where(charts, c + d * values, c * values + d)
        take_flip = np.abs(num) > np.abs(den)
        safe_num = np.where(take_flip, num, 1.0)
        safe_den = np.where(take_flip, 1.0, den)
        out = np.where(take_flip, den / safe_num, num / safe_den)
        return out, take_flip

    def apply(self, values, charts):
        return self._apply_matrix(values, charts, self.a, self.b, self.c, self.d)

    def apply_inverse(self, values, charts):
        return self._apply_matrix(values, charts, self.d, -self.b, -self.c, self.a)


class Compose(MapExpr):
    """Compose([g, h]) applies h first, matching product notation g*h."""

    def __init__(self, maps: Sequence[MapExpr]):
        self.maps = list(maps)

    def apply(self, values, charts):
        for m in reversed(self.maps):
            values, charts = m.apply(values, charts)
        return values, charts

    def apply_inverse(self, values, charts):
        for m in self.maps:
            values, charts = m.apply_inverse(values, charts)
        return values, charts


class Inverse(MapExpr):
    def __init__(self, inner: MapExpr):
        self.inner = inner

    def apply(self, values, charts):
        return self.inner.apply_inverse(values, charts)

    def apply_inverse(self, values, charts):
        return self.inner.apply(values, charts)

    def power(self, k):
        p = self.inner.power(-k) if k else Identity()
        return p


# ---------------------------------------------------------------------------
# Rotation factoring and profile algebra
# ---------------------------------------------------------------------------


def rot_factor(theta: float) -> tuple[RotPlus, RotMinus]:
    """Factor the rotation by theta into disk-supported halves.

    The plus factor lives on |z| >= 1/2, the minus factor on |z| <= 2, and
    plus(minus(z)) equals the rotation exactly (the bump and its complement
    share one evaluation).  Inversion conjugates the (-theta)-plus factor to
    the theta-minus factor.
    """
    return RotPlus(theta), RotMinus(theta)


def lat_compose(a: AngleProfile, b: AngleProfile) -> AngleProfile:
    """Profiles add pointwise: latitude maps commute and compose additively."""
    return a + b


def long_conjugate(a: AngleProfile, m: RadialProfile) -> AngleProfile:
    """Conjugating a latitude map by a longitude map reparameterizes the base."""
    return a.precompose(m)


# ---------------------------------------------------------------------------
# Grids and metrics
# ---------------------------------------------------------------------------


def fibonacci_sphere_grid(count: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Quasi-uniform sphere sample (golden-angle lattice), chart-normalized.

    Deterministic for a given (count, seed); the seed offsets the lattice
    phase so independent grids can be drawn reproducibly.
    """
    k = np.arange(count, dtype=float)
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    cos_theta = 1.0 - 2.0 * (k + 0.5) / count
    phi = 2.0 * math.pi * ((k / golden + seed * golden) % 1.0)
    # radius in the chart: tan(theta/2) = sqrt((1 - c) / (1 + c))
    r = np.sqrt((1.0 - cos_theta) / (1.0 + cos_theta))
    values = r * np.exp(1j * phi)
    charts = np.zeros(count, dtype=bool)
    return _normalize(values, charts)


def sphere_distance(v1, c1, v2, c2) -> np.ndarray:
    """Geodesic distance in the round metric (conformal factor 2/(1+|z|^2))."""
    v1 = np.asarray(v1, dtype=complex)
    v2 = np.asarray(v2, dtype=complex)
    c1 = np.asarray(c1, dtype=bool)
    c2 = np.asarray(c2, dtype=bool)
    same = c1 == c2
    # same chart: 2 |a - b| / sqrt((1+|a|^2)(1+|b|^2)); inversion is an isometry
    num_same = 2.0 * np.abs(v1 - v2)
    # mixed charts (points z and 1/w): 2 |z w - 1| / sqrt((1+|z|^2)(1+|w|^2))
    num_mixed = 2.0 * np.abs(v1 * v2 - 1.0)
    num = np.where(same, num_same, num_mixed)
    den = np.sqrt((1.0 + np.abs(v1) ** 2) * (1.0 + np.abs(v2) ** 2))
    chordal = num / den
    return 2.0 * np.arcsin(np.clip(chordal / 2.0, 0.0, 1.0))


def sup_displacement(m: MapExpr, grid) -> float:
    """Max over the grid of the distance a point is moved."""
    values, charts = grid
    w, d = m.apply(values.copy(), charts.copy())
    return float(np.max(sphere_distance(values, charts, w, d)))


def map_distance(m1: MapExpr, m2: MapExpr, grid) -> float:
    """Sup over the grid of the pointwise distance between two maps."""
    values, charts = grid
    w1, d1 = m1.apply(values.copy(), charts.copy())
    w2, d2 = m2.apply(values.copy(), charts.copy())
    return float(np.max(sphere_distance(w1, d1, w2, d2)))


def _conformal_factor(values: np.ndarray) -> np.ndarray:
    return 2.0 / (1.0 + np.abs(values) ** 2)


def _max_singular_value(m: MapExpr, values, charts, step) -> np.ndarray:
    """Largest singular value of the chart Jacobian, metric-corrected."""
    w0, d0 = m.apply(values.copy(), charts.copy())
    out_sv = np.zeros(values.shape, dtype=float)
    # central differences along the two chart axes
    cols = []
    for h in (step, 1j * step):
        wp, dp = m.apply(values + h, charts.copy())
        wm, dm = m.apply(values - h, charts.copy())
        # align output charts with d0 (flip back where they differ)
        flip_p = dp ^ d0
        wp = np.where(flip_p & (wp != 0), 1.0 / np.where(wp == 0, 1.0, wp), wp)
        flip_m = dm ^ d0
        wm = np.where(flip_m & (wm != 0), 1.0 / np.where(wm == 0, 1.0, wm), wm)
        cols.append((wp - wm) / (2.0 * step))
    a, b = cols  # d/dx and d/dy of the chart map, as complex numbers
    # real 2x2 Jacobian [[ar, br], [ai, bi]]; singular values via the
    # standard closed form
    ar, ai, br, bi = a.real, a.imag, b.real, b.imag
    e = 0.5 * (ar + bi)
    f = 0.5 * (ar - bi)
    g = 0.5 * (ai + br)
    h2 = 0.5 * (ai - br)
    q = np.hypot(e, h2)
    r = np.hypot(f, g)
    smax = q + r
    # metric correction: conformal factors at source and image
    lam_src = _conformal_factor(values)
    lam_img = _conformal_factor(w0)
    out = smax * lam_img / lam_src
    # differencing across a pole can produce non-finite columns; such points
    # carry no usable sample and must not poison the grid maximum
    return np.where(np.isfinite(out), out, 1.0)


def derivative_norm(m: MapExpr, grid, step: float = 1e-6, refine: bool = False) -> float:
    """Sampled sup of log of the larger singular value of dm and d(m^-1).

    A grid lower bound for the true sup; ``refine`` halves the step and
    takes the stabler of the two estimates.
    """
    values, charts = grid

    def one(step_):
        s_fwd = _max_singular_value(m, values, charts, step_)
        s_bwd = _max_singular_value(Inverse(m), values, charts, step_)
        smax = max(float(np.max(s_fwd)), float(np.max(s_bwd)))
        return math.log(max(smax, 1.0))

    est = one(step)
    if refine:
        est = min(est, one(step / 2.0))
    return est


# ---------------------------------------------------------------------------
# Words as maps
# ---------------------------------------------------------------------------


def compose_word(letters: Sequence[int], table: dict[int, MapExpr]) -> MapExpr:
    """Build the map of a word; runs of one letter use exact power nodes.

    ``table`` maps positive letter indices to their map expressions; negative
    letters use inverses.  The rightmost letter applies first.
    """
    parts: list[MapExpr] = []
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
            single = base if letter > 0 else Inverse(base)
            parts.extend([single] * run)
        i = j
    if not parts:
        return Identity()
    return Compose(parts)
