"""Exact symbolic layer for the lamplighter-style construction on the sphere.

The group generated by the doubling map T: z -> 2z and the annulus half-turn
F acts on a family of disjoint disks labelled (n, eps): the disk
T^n F^eps (D) with D = { |z - 3/2| <= 1/4 }.  Coefficient maps assign a real
parameter to each label; a wreath element is a pair (word in T, F; coefficient
map).  Realization turns an element into a sphere map by placing a conjugated
copy of a one-parameter family of disk-supported maps on each labelled disk.

The label action is computed from the transformation group itself (the image
disk of a label under a word); the wreath axioms and the realization
homomorphism are validated numerically in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bumps import s01
from .errors import IncompatibleTails, ShapeViolation
from .spheres import Compose, FMap, Identity, MapExpr, Scale, compose_word
from .words import GeneratorAlphabet, GroupWord

__all__ = [
    "DISK_CENTER",
    "DISK_RADIUS",
    "CosetLabel",
    "coset_action",
    "TailDescriptor",
    "CoeffMap",
    "WreathElement",
    "wreath_mul",
    "wreath_inv",
    "build_f_i",
    "RealizationParams",
    "WreathCoeffNode",
    "realize",
    "default_zeta_factory",
    "regularity_estimate",
    "RegularityClass",
    "tf_alphabet",
]

DISK_CENTER = 1.5
DISK_RADIUS = 0.25

T_LETTER = 1
F_LETTER = 2


def tf_alphabet() -> GeneratorAlphabet:
    return GeneratorAlphabet(("T", "F"))


CosetLabel = tuple[int, int]  # (n, eps): the disk T^n F^eps (D)


def _letter_action(letter: int, label: CosetLabel) -> CosetLabel:
    n, eps = label
    if abs(letter) == T_LETTER:
        return (n + (1 if letter > 0 else -1), eps)
    if abs(letter) == F_LETTER:
        # the half-turn moves only the disks in its annulus (column n = 0)
        return (n, 1 - eps) if n == 0 else (n, eps)
    raise ValueError(f"unknown letter {letter}")


def coset_action(w: GroupWord, label: CosetLabel) -> CosetLabel:
    """Image label of the disk under the word (rightmost letter first)."""
    out = label
    for letter in reversed(w.letters):
        out = _letter_action(letter, out)
    return out


# ---------------------------------------------------------------------------
# Coefficient maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailDescriptor:
    """Closed-form values on labels (n, 0) for n >= start.

    ``base(k)`` is the raw sequence; the stored value at label (n, 0) is
    base(n + shift), so conjugation by powers of T stays closed-form.
    """

    kind: str  # constant | harmonic | geometric | gauss2 | callable | sum
    params: tuple = ()
    start: int = 1
    shift: int = 0

    def base(self, k: int) -> float:
        if self.kind == "constant":
            return float(self.params[0])
        if self.kind == "harmonic":
            return float(self.params[0]) / max(k, 1)
        if self.kind == "geometric":
            c, ratio = self.params
            return float(c) * float(ratio) ** k
        if self.kind == "gauss2":
            return float(self.params[0]) * 2.0 ** (-(k * k))
        if self.kind == "callable":
            return float(self.params[0](k))
        if self.kind == "sum":
            a, b = self.params
            return a.value(k) + b.value(k)
        raise ValueError(f"unknown tail kind {self.kind}")

    def value(self, n: int) -> float:
        if n < self.start:
            return 0.0
        return self.base(n + self.shift)


def _tail_depth(t: TailDescriptor) -> int:
    if t.kind == "sum":
        return 1 + max(_tail_depth(t.params[0]), _tail_depth(t.params[1]))
    return 1


@dataclass(frozen=True)
class CoeffMap:
    """Finitely described function from disk labels to the reals."""

    finite: tuple[tuple[CosetLabel, float], ...] = ()
    tail: TailDescriptor | None = None

    @classmethod
    def from_dict(cls, d: dict[CosetLabel, float], tail: TailDescriptor | None = None) -> "CoeffMap":
        items = tuple(sorted((k, float(v)) for k, v in d.items() if v != 0.0))
        return cls(items, tail)

    def as_dict(self) -> dict[CosetLabel, float]:
        return dict(self.finite)

    def value(self, label: CosetLabel) -> float:
        n, eps = label
        v = dict(self.finite).get(label, 0.0)
        if self.tail is not None and eps == 0:
            v += self.tail.value(n)
        return v

    @property
    def is_zero(self) -> bool:
        return not self.finite and self.tail is None

    def negate(self) -> "CoeffMap":
        tail = None
        if self.tail is not None:
            t = self.tail
            tail = TailDescriptor("callable", (lambda k, t=t: -t.base(k),), t.start, t.shift)
        return CoeffMap(tuple((k, -v) for k, v in self.finite), tail)

    def add(self, other: "CoeffMap") -> "CoeffMap":
        d = dict(self.finite)
        for k, v in other.finite:
            d[k] = d.get(k, 0.0) + v
        if self.tail is None:
            tail = other.tail
        elif other.tail is None:
            tail = self.tail
        else:
            if _tail_depth(self.tail) + _tail_depth(other.tail) > 8:
                raise IncompatibleTails("tail sums nested too deeply to stay closed-form")
            lo = min(self.tail.start, other.tail.start)
            tail = TailDescriptor("sum", (self.tail, other.tail), lo, 0)
        return CoeffMap.from_dict(d, tail)

    def pullback(self, w: GroupWord) -> "CoeffMap":
        """The twisted action (f^w)(s) = f(w . s).

        Finite keys move by the inverse label action.  On the far tail the
        word acts by its net T-shift; tail indices that any intermediate
        letter could drag into the F-sensitive column are materialized into
        the finite part first.
        """
        if self.is_zero:
            return self
        sums = [0]
        for letter in reversed(w.letters):
            d = 1 if letter == T_LETTER else -1 if letter == -T_LETTER else 0
            sums.append(sums[-1] + d)
        net = sums[-1]
        min_prefix = min(sums)
        finite = dict(self.finite)
        tail = self.tail
        if tail is not None:
            safe_start = max(1 - min_prefix, 1)
            new_start = max(safe_start, tail.start - net)
            for n in range(tail.start, new_start + net):
                v = tail.value(n)
                if v:
                    finite[(n, 0)] = finite.get((n, 0), 0.0) + v
            tail = TailDescriptor(tail.kind, tail.params, new_start, tail.shift + net)
        winv = w.inverse()
        moved: dict[CosetLabel, float] = {}
        for label, v in finite.items():
            nl = coset_action(winv, label)
            moved[nl] = moved.get(nl, 0.0) + v
        return CoeffMap.from_dict(moved, tail)

    def support_bound(self) -> int | None:
        if self.tail is not None:
            return None
        if not self.finite:
            return 0
        return max(abs(n) for (n, _), _ in self.finite)


# ---------------------------------------------------------------------------
# Wreath elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WreathElement:
    g: GroupWord = GroupWord()
    coeff: CoeffMap = CoeffMap()

    @classmethod
    def from_coeff(cls, coeff: CoeffMap) -> "WreathElement":
        return cls(GroupWord(), coeff)

    @classmethod
    def from_word(cls, g: GroupWord) -> "WreathElement":
        return cls(g, CoeffMap())

    @property
    def is_identity_symbolic(self) -> bool:
        return self.g.is_identity and self.coeff.is_zero


def wreath_mul(x: WreathElement, y: WreathElement) -> WreathElement:
    """(g1, f1) (g2, f2) = (g1 g2, f1^{g2} + f2)."""
    return WreathElement(x.g * y.g, x.coeff.pullback(y.g).add(y.coeff))


def wreath_inv(x: WreathElement) -> WreathElement:
    ginv = x.g.inverse()
    return WreathElement(ginv, x.coeff.pullback(ginv).negate())


def build_f_i(f: CoeffMap, i: int) -> WreathElement:
    """The difference element f^{T^i} (f^{T^i F})^{-1}.

    Requires the one-sided shape (values only on labels (n, 0) with n >= 0).
    The result is supported on the two disks of column zero, with the source
    value at index i and its negative.
    """
    for (n, eps), v in f.finite:
        if v != 0.0 and (eps != 0 or n < 0):
            raise ShapeViolation(f"nonzero value at label ({n},{eps})")
    if f.tail is not None and f.tail.start < 0:
        raise ShapeViolation("tail must live on nonnegative indices")
    ti = GroupWord((T_LETTER,) * i)
    tif = ti * GroupWord((F_LETTER,))
    a = WreathElement.from_coeff(f.pullback(ti))
    b = WreathElement.from_coeff(f.pullback(tif))
    return wreath_mul(a, wreath_inv(b))


# ---------------------------------------------------------------------------
# Realization
# ---------------------------------------------------------------------------


class _DiskTwist(MapExpr):
    """One-parameter family supported in the reference disk: rotation about
    the disk center by an angle profile that dies smoothly at the boundary."""

    def __init__(self, t: float):
        self.t = float(t)

    def _twist(self, values, charts, sign):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            z = np.where(charts, 1.0 / np.where(values == 0, np.nan, values), values)
            u = (z - DISK_CENTER) / DISK_RADIUS
            r = np.abs(u)
        inside = np.isfinite(r) & (r < 1.0)
        if not np.any(inside):
            return values.copy(), charts.copy()
        prof = s01(2.0 * (1.0 - r[inside]))
        w = u[inside] * np.exp(1j * sign * self.t * prof)
        znew = DISK_CENTER + DISK_RADIUS * w
        out_v = values.copy()
        out_c = charts.copy()
        small = np.abs(znew) <= 1.0
        out_v[inside] = np.where(small, znew, 1.0 / np.where(small, 1.0, znew))
        out_c[inside] = ~small
        return out_v, out_c

    def apply(self, values, charts):
        return self._twist(values, charts, +1.0)

    def apply_inverse(self, values, charts):
        return self._twist(values, charts, -1.0)

    def power(self, k):
        return _DiskTwist(k * self.t)


def default_zeta_factory(t: float) -> MapExpr:
    """Disk-supported one-parameter group used when no conjugated family is
    supplied (the pipeline passes its own, built from the bookkeeping map)."""
    return _DiskTwist(t)


@dataclass
class RealizationParams:
    """How coefficient values become disk-supported maps."""

    zeta_factory: Callable[[float], MapExpr] = default_zeta_factory
    max_column: int = 64  # labels beyond this never match a query point


class WreathCoeffNode(MapExpr):
    """Lazy product of the conjugated factors of a coefficient map.

    The factor for label (n, eps) is supported on the disk of radius
    2^n / 4 centered at (-1)^eps * 1.5 * 2^n on the real axis; a query point
    meets at most one disk, found from its modulus and real-axis side.
    """

    def __init__(self, coeff: CoeffMap, params: RealizationParams | None = None):
        self.coeff = coeff
        self.params = params or RealizationParams()
        self._zeta_cache: dict[float, MapExpr] = {}

    def _zeta(self, t: float) -> MapExpr:
        if t not in self._zeta_cache:
            self._zeta_cache[t] = self.params.zeta_factory(t)
        return self._zeta_cache[t]

    def _apply_pointwise(self, values, charts, inverse: bool):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = np.where(charts, 1.0 / np.where(values == 0, np.nan, values), values)
            r = np.abs(v)
            ok = np.isfinite(r) & (r > 0)
            n = np.zeros(values.shape, dtype=np.int64)
            n[ok] = np.round(np.log2(r[ok] / DISK_CENTER)).astype(np.int64)
            n = np.clip(n, -self.params.max_column, self.params.max_column)
            center = DISK_CENTER * np.exp2(n.astype(float))
            radius = DISK_RADIUS * np.exp2(n.astype(float))
            plus = ok & (np.abs(v - center) <= radius)
            minus = ok & (np.abs(v + center) <= radius)
        eps = np.where(minus, 1, 0)
        hit = plus | minus
        out_v = values.copy()
        out_c = charts.copy()
        if not np.any(hit):
            return out_v, out_c
        idx = np.flatnonzero(hit)
        nn, ee, vv = n[idx], eps[idx], v[idx]
        for col in np.unique(nn):
            for e in (0, 1):
                sel = (nn == col) & (ee == e)
                if not np.any(sel):
                    continue
                t = self.coeff.value((int(col), int(e)))
                if t == 0.0:
                    continue
                scale = 2.0 ** float(col)
                y = vv[sel] / scale
                if e == 1:
                    y = -y  # the half-turn is exactly -z on the disk orbit
                yv = np.asarray(y, dtype=complex)
                yc = np.zeros(yv.shape, dtype=bool)
                zeta = self._zeta(t)
                yv, yc = zeta.apply_inverse(yv, yc) if inverse else zeta.apply(yv, yc)
                # the disk factor may store its result in either chart;
                # unpack (the reference disk stays away from 0 and infinity)
                yv = np.where(yc, 1.0 / np.where(yv == 0, np.nan, yv), yv)
                if e == 1:
                    yv = -yv
                znew = yv * scale
                sub = idx[sel]
                small = np.abs(znew) <= 1.0
                out_v[sub] = np.where(small, znew, 1.0 / np.where(small, 1.0, znew))
                out_c[sub] = ~small
        return out_v, out_c

    def apply(self, values, charts):
        return self._apply_pointwise(values, charts, inverse=False)

    def apply_inverse(self, values, charts):
        return self._apply_pointwise(values, charts, inverse=True)


def realize(x: WreathElement, params: RealizationParams | None = None) -> MapExpr:
    """The sphere map of a wreath element: coefficient part, then word part."""
    params = params or RealizationParams()
    table = {T_LETTER: Scale(2.0), F_LETTER: FMap()}
    parts: list[MapExpr] = []
    if not x.g.is_identity:
        parts.append(compose_word(x.g.letters, table))
    if not x.coeff.is_zero:
        parts.append(WreathCoeffNode(x.coeff, params))
    if not parts:
        return Identity()
    return parts[0] if len(parts) == 1 else Compose(parts)


# ---------------------------------------------------------------------------
# Regularity of coefficient maps
# ---------------------------------------------------------------------------


class RegularityClass:
    NONE = "none"
    LIPSCHITZ = "lipschitz"
    C1 = "c1"
    C_INFINITY_CANDIDATE = "c_infinity_candidate"


def regularity_estimate(coeff: CoeffMap, window: int = 40, r_max: int = 10) -> str:
    """Classify the decay of the coefficient tail.

    Bounded values give a Lipschitz realization; values tending to zero a
    continuously differentiable one; decay beating 2^(n(r-1)) for every
    r <= r_max marks a smooth candidate.  Sampled over ``window`` indices.
    """
    if coeff.tail is None:
        return RegularityClass.C_INFINITY_CANDIDATE  # finite support
    start = max(coeff.tail.start, 1)
    ns = list(range(start, start + window))
    vals = [abs(coeff.value((n, 0))) + abs(coeff.value((n, 1))) for n in ns]
    if max(vals) == 0.0:
        return RegularityClass.C_INFINITY_CANDIDATE
    half = window // 2
    early, late = max(vals[:half]), max(vals[half:])
    if late > 4.0 * max(early, 1e-300):
        return RegularityClass.NONE
    smooth = True
    for r in range(1, r_max + 1):
        weighted = [v * 2.0 ** (n * (r - 1)) for n, v in zip(ns, vals)]
        section = weighted[half:]
        decreasing = all(b <= a * (1.0 + 1e-12) for a, b in zip(section, section[1:]))
        if not (decreasing and section[-1] <= max(weighted[:half]) + 1e-300):
            smooth = False
            break
    if smooth:
        return RegularityClass.C_INFINITY_CANDIDATE
    if vals[-1] < 0.25 * max(vals[:half]) and late <= early:
        return RegularityClass.C1
    return RegularityClass.LIPSCHITZ
