"""Exponent schedules for rotation certificates.

Given an angle (rational multiple of a full turn, or a continued-fraction
stream for the turn fraction), the schedule picks exponents n_i among the
continued-fraction convergent denominators so that the residues
t_i = n_i * theta (mod 2 pi) decay faster than any exponential, while the
n_i dominate a requested growth function.  Residues are enclosed by exact
rational intervals built from deeper convergents, then rounded outward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import PrecisionExhausted
from .words import GrowthFunction

__all__ = [
    "ThetaDescription",
    "parse_theta",
    "ScheduleEntry",
    "RotationSchedule",
    "make_schedule",
    "explicit_schedule",
    "decay_table",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ThetaDescription:
    """Angle as a fraction of the full turn.

    kind 'rational': turn fraction p/q exactly.
    kind 'cf': continued fraction [a0; a1, a2, ...] of the turn fraction,
    with an optional periodic block extending it indefinitely.
    """

    kind: str
    p: int = 0
    q: int = 1
    cf_head: tuple[int, ...] = ()
    cf_period: tuple[int, ...] = ()

    def cf_term(self, k: int) -> int:
        if k < len(self.cf_head):
            return self.cf_head[k]
        if not self.cf_period:
            raise PrecisionExhausted(f"continued fraction exhausted at index {k}")
        return self.cf_period[(k - len(self.cf_head)) % len(self.cf_period)]

    def angle_float(self) -> float:
        if self.kind == "rational":
            return TWO_PI * self.p / self.q
        num, den = _convergent(self, 40)
        return TWO_PI * num / den

    def label(self) -> str:
        if self.kind == "rational":
            return f"rat:{self.p}/{self.q}"
        head = ",".join(map(str, self.cf_head))
        if self.cf_period:
            return f"cf:{head},({','.join(map(str, self.cf_period))})"
        return f"cf:{head}"


def parse_theta(text: str) -> ThetaDescription:
    """Parse 'rat:p/q', 'cf:golden', or 'cf:a0,a1,...[,(b1,...,bk)]'."""
    t = text.strip()
    if t.startswith("rat:"):
        body = t[4:]
        if "/" in body:
            p, q = body.split("/", 1)
        else:
            p, q = body, "1"
        frac = Fraction(int(p), int(q))
        return ThetaDescription("rational", p=frac.numerator, q=frac.denominator)
    if t.startswith("cf:"):
        body = t[3:]
        if body == "golden":
            return ThetaDescription("cf", cf_head=(0,), cf_period=(1,))
        period: tuple[int, ...] = ()
        if "(" in body:
            head_part, per_part = body.split("(", 1)
            per_part = per_part.rstrip(")")
            period = tuple(int(x) for x in per_part.split(",") if x)
            head = tuple(int(x) for x in head_part.rstrip(",").split(",") if x != "")
        else:
            head = tuple(int(x) for x in body.split(",") if x != "")
        if not head:
            raise ValueError("continued fraction needs at least one term")
        if not period:
            # a finite continued fraction is an exact rational turn fraction
            frac = _finite_cf_value(head)
            return ThetaDescription("rational", p=frac.numerator, q=frac.denominator)
        return ThetaDescription("cf", cf_head=head, cf_period=period)
    raise ValueError(f"cannot parse angle description {text!r}")


def _finite_cf_value(terms: tuple[int, ...]) -> Fraction:
    val = Fraction(terms[-1])
    for a in reversed(terms[:-1]):
        val = a + 1 / val
    return val


def _convergent(theta: ThetaDescription, k: int) -> tuple[int, int]:
    """(p_k, q_k) of the turn fraction's continued fraction."""
    p_prev, p = 1, theta.cf_term(0)
    q_prev, q = 0, 1
    for j in range(1, k + 1):
        a = theta.cf_term(j)
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q


@dataclass(frozen=True)
class ScheduleEntry:
    index: int
    exponent: int           # n_i (exact integer, possibly huge)
    angle: float            # t_i = n_i * theta mod 2 pi, in (-pi, pi]
    error_bound: float      # |recorded angle - true residue| bound
    cf_index: int | None    # convergent index used, None for rational angles


@dataclass
class RotationSchedule:
    theta: ThetaDescription
    entries: list[ScheduleEntry]
    growth: str
    metadata: dict = field(default_factory=dict)

    def angles(self) -> list[float]:
        return [e.angle for e in self.entries]

    def exponents(self) -> list[int]:
        return [e.exponent for e in self.entries]


def _outward(x: float, ulps: int = 4) -> float:
    out = x
    for _ in range(ulps):
        out = math.nextafter(out, math.inf)
    return out


def _residue_interval(theta: ThetaDescription, k: int, depth: int = 60):
    """Exact rational enclosure of q_k * x - p_k for the turn fraction x."""
    p_k, q_k = _convergent(theta, k)
    try:
        p_m, q_m = _convergent(theta, k + depth)
        p_m1, q_m1 = _convergent(theta, k + depth + 1)
    except PrecisionExhausted:
        raise
    lo = Fraction(q_k * p_m, q_m) - p_k
    hi = Fraction(q_k * p_m1, q_m1) - p_k
    if lo > hi:
        lo, hi = hi, lo
    return q_k, lo, hi


def make_schedule(
    theta: ThetaDescription,
    growth: GrowthFunction,
    count: int,
    k_min: int = 0,
    min_step: int = 19,
    quad_factor: float = 1.5,
    enclosure_depth: int = 60,
) -> RotationSchedule:
    """Build the exponent schedule.

    Irrational turn fractions: the i-th exponent is the convergent
    denominator q_{k(i)} with k(i) at least quad_factor * i^2, at least
    min_step beyond k(i-1), and deep enough that q_{k(i)} dominates the
    growth target at i.  Then |t_i| <= 2 pi / q_{k(i)+1}, recorded
    with a rigorous rational-interval bound rounded outward.

    Rational turn fractions p/q: exponents are multiples of q and every
    residue is exactly zero (the torsion case).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    entries: list[ScheduleEntry] = []
    if theta.kind == "rational":
        prev = 0
        for i in range(count):
            n = theta.q * max(growth(i), i, 1)
            if n <= prev:
                n = prev + theta.q
            prev = n
            entries.append(ScheduleEntry(i, n, 0.0, 0.0, None))
        return RotationSchedule(theta, entries, growth.description,
                                {"kind": "rational", "q": theta.q})

    prev_k = None
    for i in range(count):
        k = max(int(math.ceil(quad_factor * i * i)), k_min)
        if prev_k is not None:
            k = max(k, prev_k + min_step)
        target = growth(i)
        while _convergent(theta, k)[1] < target:
            k += 1
        prev_k = k
        depth = enclosure_depth
        q_k, lo, hi = _residue_interval(theta, k, depth)
        while (hi - lo) * 10 ** 12 > abs(lo + hi) / 2:
            depth += 60
            if depth > enclosure_depth + 600:
                raise PrecisionExhausted("residue enclosure failed to tighten")
            q_k, lo, hi = _residue_interval(theta, k, depth)
        width = hi - lo
        mid = (lo + hi) / 2
        t = TWO_PI * float(mid)
        err = _outward(TWO_PI * float(width / 2) + 4.0 * abs(t) * 2.0 ** -52)
        entries.append(ScheduleEntry(i, q_k, t, err, k))
    return RotationSchedule(theta, entries, growth.description,
                            {"kind": "cf", "min_step": min_step, "k_min": k_min,
                             "quad_factor": quad_factor})


def explicit_schedule(
    theta: ThetaDescription,
    exponents: Sequence[int],
    enclosure_depth: int = 60,
) -> RotationSchedule:
    """Schedule from explicitly chosen exponents.

    Residues are still enclosed exactly: rationally for rational turn
    fractions, by deep convergent brackets otherwise.  Exponents must be
    strictly increasing positive integers.
    """
    exps = [int(n) for n in exponents]
    if not exps or any(b <= a for a, b in zip(exps, exps[1:])) or exps[0] < 1:
        raise ValueError("exponents must be strictly increasing positive integers")
    entries = []
    if theta.kind == "rational":
        for i, n in enumerate(exps):
            num = (n * theta.p) % theta.q
            if 2 * num > theta.q:
                num -= theta.q
            entries.append(ScheduleEntry(i, n, TWO_PI * num / theta.q, 0.0, None))
        return RotationSchedule(theta, entries, "explicit", {"kind": "rational"})
    for i, n in enumerate(exps):
        depth = enclosure_depth
        while True:
            p_m, q_m = _convergent(theta, depth)
            p_m1, q_m1 = _convergent(theta, depth + 1)
            lo = Fraction(n * p_m, q_m)
            hi = Fraction(n * p_m1, q_m1)
            if lo > hi:
                lo, hi = hi, lo
            if (hi - lo) * 10 ** 13 <= 1:
                break
            depth += 60
            if depth > enclosure_depth + 600:
                raise PrecisionExhausted("explicit residue enclosure failed")
        nearest = round((lo + hi) / 2)
        lo, hi = lo - nearest, hi - nearest
        mid = (lo + hi) / 2
        t = TWO_PI * float(mid)
        err = _outward(TWO_PI * float((hi - lo) / 2) + 4.0 * abs(t) * 2.0 ** -52)
        entries.append(ScheduleEntry(i, n, t, err, None))
    return RotationSchedule(theta, entries, "explicit", {"kind": "cf"})


def decay_table(schedule: RotationSchedule, r_max: int = 10) -> dict[int, list[float]]:
    """|t_i| * 2^(i r) for each r <= r_max; the smoothness diagnostic."""
    out = {}
    for r in range(1, r_max + 1):
        out[r] = [abs(e.angle) * 2.0 ** (e.index * r) for e in schedule.entries]
    return out
