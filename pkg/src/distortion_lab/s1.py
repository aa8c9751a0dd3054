"""Certificate pipeline for rigid rotations of the circle.

Small rotations factor into two arc-supported homeomorphisms; a suspension
of the factor families over a tiled interval packs every factor into one
generator, and short words extract each factor back.  Two generator
families are built: a Lipschitz one (affine tile transports) and a tangency
-improved one in which an extra twist generator X aligns every factor with
a single interval model family, so the suspension flattens toward the tile
accumulation points (the classical C1 suspension picture).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circles import (
    BumpDisplacement,
    CircleMap,
    Compose1,
    HarmonicTiling,
    Identity1,
    IntervalModelMap,
    Inverse1,
    Rotation1,
    SegmentedCircleMap,
    SuspensionProduct,
    TransportMap,
    TranslationColumn,
    WrappedColumn,
    _Affine1D,
    _LogitAffine1D,
    circle_grid,
    compose_word_circle,
    expit,
    logit,
    map_distance_circle,
    _lift_derivative,
    wrap,
    TWO_PI,
)
from .bumps import hat01
from .errors import AngleTooLarge, VerificationFailed
from .schedule import RotationSchedule
from .words import CertificateEntry, DistortionCertificate, GeneratorAlphabet, GroupWord

__all__ = [
    "I_PLUS",
    "I_MINUS",
    "CircleFactorization",
    "factorize_rotation",
    "S1Generators",
    "build_s1_generators",
    "build_s1_c1_generators",
    "s1_word_letters",
    "emit_s1_certificate",
    "emit_s1_certificates",
    "verify_s1_certificate",
    "extraction_map",
    "PixtonSystem",
    "pixton_coordinates",
    "commutator_c1_report",
    "S1_ALPHABET",
    "S1_C1_ALPHABET",
]

# the two covering arcs (overlaps of length 0.6 at both ends)
I_PLUS = (math.pi, TWO_PI + 0.6)
I_MINUS = (0.0, math.pi + 0.6)

# carrier interval for the suspensions, away from nothing in particular
J_CENTER = 4.0
J_HALFWIDTH = 1.0

S1_ALPHABET = GeneratorAlphabet(("f+", "f-", "F", "T", "Z+", "Z-"))
S1_C1_ALPHABET = GeneratorAlphabet(("f+", "f-", "F", "T", "Z+", "Z-", "X+", "X-"))
_FP, _FM, _F, _T, _ZP, _ZM, _XP, _XM = 1, 2, 3, 4, 5, 6, 7, 8

_RAMP = (0.5, math.pi + 0.05, math.pi + 0.6)  # rise end, plateau end, support end
_T_MAX = 0.05  # factorization smallness bound for these arcs


# ---------------------------------------------------------------------------
# Rotation factorization
# ---------------------------------------------------------------------------


@dataclass
class CircleFactorization:
    t: float
    xi: CircleMap       # supported in I_PLUS
    zeta: CircleMap     # supported in I_MINUS
    mode: str = "lipschitz"

    def product(self) -> CircleMap:
        return Compose1([self.xi, self.zeta])


def factorize_rotation(t: float, mode: str = "lipschitz", gens: "S1Generators | None" = None) -> CircleFactorization:
    """Split the rotation by t into arc-supported factors.

    Lipschitz mode: zeta moves points by a plateau bump supported exactly on
    the minus arc and agrees with the rotation on the plateau; xi is the
    correction rotation o zeta^-1, supported inside the plus arc.  The
    tangency mode instead takes xi from the interval model family read
    through the plus-side bookkeeping map (so all factors are conjugate into
    one one-parameter family) and solves zeta = xi^-1 o rotation.
    """
    if abs(t) > _T_MAX:
        raise AngleTooLarge(f"|t| = {abs(t):.4f} exceeds {_T_MAX} for these arcs")
    if t == 0.0:
        return CircleFactorization(0.0, Identity1(), Identity1(), mode)
    if mode == "lipschitz":
        zeta = BumpDisplacement(t, I_MINUS[0], *_RAMP)
        xi = Compose1([Rotation1(t), Inverse1(zeta)])
        return CircleFactorization(t, xi, zeta, mode)
    if mode == "c1":
        if gens is None:
            raise ValueError("tangency-mode factorization needs the generator set")
        xi = gens.model_xi(t)
        zeta = Compose1([Inverse1(xi), Rotation1(t)])
        return CircleFactorization(t, xi, zeta, mode)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Generator sets
# ---------------------------------------------------------------------------


def _rho(j: np.ndarray) -> np.ndarray:
    """Harmonic chart weights: the tangency-mode tile scale of sub-tile j."""
    return 1.0 / (np.abs(np.asarray(j, dtype=float)) + 2.0)


class _LogitScaleModels:
    """Per-tile logit scalings Lambda_{rho(j+1)/rho(j)}; identity when flat."""

    def __init__(self, flat: bool):
        self.flat = flat

    def fwd(self, j, u):
        if self.flat:
            return u
        lam = _rho(np.asarray(j) + 1) / _rho(j)
        return expit(lam * logit(np.clip(u, 1e-300, 1.0 - 1e-16)))

    def inv(self, j, u):
        if self.flat:
            return u
        lam = _rho(np.asarray(j) + 1) / _rho(j)
        return expit(logit(np.clip(u, 1e-300, 1.0 - 1e-16)) / lam)


class _WarpModels:
    """Tile models for the twist generator: transport plus a small in-tile
    bump supported away from sub-tile 0 (so the twist commutes with the
    column models); magnitudes shrink with the tile index."""

    def __init__(self, lo: float, hi: float, eta0: float):
        self.lo, self.hi, self.eta0 = lo, hi, eta0

    def _eta(self, i):
        return self.eta0 * 2.0 ** (-np.clip(np.asarray(i, dtype=float), 0.0, 60.0))

    def fwd(self, i, u):
        win = (u - self.lo) / (self.hi - self.lo)
        return u + self._eta(i) * hat01(win)

    def inv(self, i, u):
        u = np.asarray(u, dtype=float)
        lo = u - self._eta(i) - 1e-18
        hi = u + 1e-18
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            low = self.fwd(i, mid) < u
            lo = np.where(low, mid, lo)
            hi = np.where(low, hi, mid)
        return 0.5 * (lo + hi)


@dataclass
class S1Generators:
    mode: str
    schedule: RotationSchedule
    outer: HarmonicTiling          # tiles J_i of the carrier J
    inner: HarmonicTiling          # sub-tiles of J_0 (in circle coordinates)
    T: TransportMap
    F: TransportMap
    Zp: SegmentedCircleMap
    Zm: SegmentedCircleMap
    f_plus: CircleMap
    f_minus: CircleMap
    Xp: TransportMap | None = None
    Xm: TransportMap | None = None
    factorizations: list[CircleFactorization] = field(default_factory=list)
    table: dict[int, CircleMap] = field(default_factory=dict)
    theta_slope: float = 1.0       # logit units per radian of the plus chart

    @property
    def alphabet(self) -> GeneratorAlphabet:
        return S1_C1_ALPHABET if self.mode == "c1" else S1_ALPHABET

    def model_xi(self, t: float) -> CircleMap:
        """The plus factor with parameter t: the interval model conjugated
        back through the plus bookkeeping map (tangency mode only)."""
        model = IntervalModelMap(self.inner.edge(0), self.inner.edge(1), self.theta_slope * t)
        return Compose1([Inverse1(self.Zp), model, self.Zp])


def _sub_tiling() -> tuple[HarmonicTiling, HarmonicTiling]:
    outer = HarmonicTiling(J_CENTER, J_HALFWIDTH)
    j0_lo = outer.edge(np.array(0.0))
    j0_hi = outer.edge(np.array(1.0))
    inner = HarmonicTiling(0.5 * float(j0_lo + j0_hi), 0.5 * float(j0_hi - j0_lo))
    return outer, inner


def _plus_chart_segments(inner: HarmonicTiling, c1_mode: bool):
    """Segments of the plus bookkeeping map (plus arc onto sub-tile 0).

    Note the orientation: these bookkeeping maps carry the covering arcs
    onto the sub-tile, so suspension columns conjugate factors as
    Z o factor o Z^-1 (the ladder pipeline's bookkeeping maps point the
    other way and conjugate with the inverse on the left).
    """
    a = float(inner.edge(np.array(0.0)))
    b = float(inner.edge(np.array(1.0)))
    x0, x1 = I_PLUS
    if not c1_mode:
        return [
            _Affine1D(x0, x1, a, b),
            _Affine1D(x1, x0 + TWO_PI, b, a + TWO_PI),
        ], 1.0
    # tangency mode: the middle of the plus arc reads linearly in the logit
    # chart of the target sub-tile, so rotations become model translations
    xm0, xm1 = math.pi + 0.55, TWO_PI + 0.05
    slope = 1.0
    offset = -0.5 * (xm0 + xm1) * slope
    mid = _LogitAffine1D(xm0, xm1, a, b, slope, offset)
    ya, yb = mid.y0, mid.y1
    return [
        _Affine1D(x0, xm0, a, ya),
        mid,
        _Affine1D(xm1, x1, yb, b),
        _Affine1D(x1, x0 + TWO_PI, b, a + TWO_PI),
    ], slope


def _minus_chart_segments(inner: HarmonicTiling):
    a = float(inner.edge(np.array(0.0)))
    b = float(inner.edge(np.array(1.0)))
    x0, x1 = I_MINUS
    return [
        _Affine1D(x0, x1, a, b),
        _Affine1D(x1, x0 + TWO_PI, b, a + TWO_PI),
    ]


def _build(mode: str, schedule: RotationSchedule) -> S1Generators:
    outer, inner = _sub_tiling()
    c1 = mode == "c1"
    T = TransportMap(outer)  # affine transports on the harmonic tiles
    fmodels = _LogitScaleModels(flat=not c1)
    F = TransportMap(inner, model_fwd=fmodels.fwd, model_inv=fmodels.inv)
    plus_segments, slope = _plus_chart_segments(inner, c1)
    Zp = SegmentedCircleMap(plus_segments)
    Zm = SegmentedCircleMap(_minus_chart_segments(inner))

    gens = S1Generators(mode, schedule, outer, inner, T, F, Zp, Zm,
                        Identity1(), Identity1(), theta_slope=slope)

    factorizations = []
    for e in schedule.entries:
        factorizations.append(factorize_rotation(e.angle, mode if not c1 else "c1",
                                                 gens if c1 else None))
    gens.factorizations = factorizations

    i_max = len(schedule.entries) - 1
    a = float(inner.edge(np.array(0.0)))
    b = float(inner.edge(np.array(1.0)))

    if c1:
        scale_of = lambda j: _rho(j) / _rho(0)
        plus_cols = {
            i: TranslationColumn(slope * schedule.entries[i].angle) for i in range(i_max + 1)
        }
        minus_cols = {
            i: WrappedColumn(Compose1([Zm, factorizations[i].zeta, Inverse1(Zm)]), a, b)
            for i in range(i_max + 1)
        }
        warp_lo, warp_hi = 2.0 / 3.0 + 0.004, 0.75 - 0.004
        xp_models = _WarpModels(warp_lo, warp_hi, 0.0001)
        xm_models = _WarpModels(warp_lo, warp_hi, 0.00007)
        Xp = TransportMap(outer, model_fwd=xp_models.fwd, model_inv=xp_models.inv)
        Xm = TransportMap(outer, model_fwd=xm_models.fwd, model_inv=xm_models.inv)
        f_plus = SuspensionProduct(outer, inner, lambda i: plus_cols[i], scale_of,
                                   i_max, outer_transport=Xp)
        f_minus = SuspensionProduct(outer, inner, lambda i: minus_cols[i], scale_of,
                                    i_max, outer_transport=Xm)
        gens.Xp, gens.Xm = Xp, Xm
    else:
        scale_of = lambda j: np.ones_like(np.asarray(j, dtype=float))
        plus_cols = {
            i: WrappedColumn(Compose1([Zp, factorizations[i].xi, Inverse1(Zp)]), a, b)
            for i in range(i_max + 1)
        }
        minus_cols = {
            i: WrappedColumn(Compose1([Zm, factorizations[i].zeta, Inverse1(Zm)]), a, b)
            for i in range(i_max + 1)
        }
        f_plus = SuspensionProduct(outer, inner, lambda i: plus_cols[i], scale_of, i_max)
        f_minus = SuspensionProduct(outer, inner, lambda i: minus_cols[i], scale_of, i_max)

    gens.f_plus, gens.f_minus = f_plus, f_minus
    table = {_FP: f_plus, _FM: f_minus, _F: F, _T: T, _ZP: Zp, _ZM: Zm}
    if c1:
        table[_XP] = gens.Xp
        table[_XM] = gens.Xm
    gens.table = table
    return gens


def build_s1_generators(schedule: RotationSchedule) -> S1Generators:
    return _build("lipschitz", schedule)


def build_s1_c1_generators(schedule: RotationSchedule) -> S1Generators:
    return _build("c1", schedule)


# ---------------------------------------------------------------------------
# Words and certificates
# ---------------------------------------------------------------------------


def _extract_letters(f_idx: int, z_idx: int, i: int, mode: str, x_idx: int | None = None):
    """Letters of the factor-extraction word for column i.

    Lipschitz: ((f)^{T^i} ((f)^{T^i F^-1})^-1)^{Z}.
    Tangency:  (((f)^{X^i} ((f)^{X^i F^-1})^-1)^{X^-i T^i})^{Z}.
    """
    if mode == "lipschitz":
        v = _T
    else:
        v = x_idx
    vi, vni = (v,) * i, (-v,) * i
    a = vni + (f_idx,) + vi
    b = (_F,) + vni + (-f_idx,) + vi + (-_F,)
    core = a + b
    if mode != "lipschitz":
        core = (-_T,) * i + (v,) * i + core + (-v,) * i + (_T,) * i
    return (-z_idx,) + core + (z_idx,)


def s1_word_letters(gens: S1Generators, i: int) -> tuple[int, ...]:
    """Word for the rotation by t_i: plus extraction times minus extraction."""
    if gens.mode == "lipschitz":
        plus = _extract_letters(_FP, _ZP, i, "lipschitz")
        minus = _extract_letters(_FM, _ZM, i, "lipschitz")
    else:
        plus = _extract_letters(_FP, _ZP, i, "c1", _XP)
        minus = _extract_letters(_FM, _ZM, i, "c1", _XM)
    return plus + minus


def extraction_map(gens: S1Generators, i: int, side: str) -> CircleMap:
    """The evaluated extraction word for one side (test hook)."""
    if gens.mode == "lipschitz":
        letters = _extract_letters(_FP if side == "+" else _FM,
                                   _ZP if side == "+" else _ZM, i, "lipschitz")
    else:
        letters = _extract_letters(_FP if side == "+" else _FM,
                                   _ZP if side == "+" else _ZM, i, "c1",
                                   _XP if side == "+" else _XM)
    return compose_word_circle(letters, gens.table)


def emit_s1_certificate(gens: S1Generators, i: int) -> CertificateEntry:
    e = gens.schedule.entries[i]
    word = GroupWord(s1_word_letters(gens, i))
    return CertificateEntry(
        index=i,
        length_bound=len(word),
        exponent=e.exponent,
        word=word,
        target={"rotation_angle": e.angle, "angle_error_bound": e.error_bound},
    )


def emit_s1_certificates(gens: S1Generators, indices=None) -> DistortionCertificate:
    if indices is None:
        indices = range(len(gens.schedule.entries))
    entries = [emit_s1_certificate(gens, i) for i in indices]
    slope = 8 if gens.mode == "lipschitz" else 16
    return DistortionCertificate(
        alphabet=gens.alphabet,
        base=f"rotation({gens.schedule.theta.label()})",
        entries=entries,
        growth={"description": gens.schedule.growth, "threshold": None},
        metadata={
            "mode": gens.mode,
            "letter_slope": slope,
            "schedule": {
                "theta": gens.schedule.theta.label(),
                "entries": [
                    {"i": e.index, "n_i": str(e.exponent), "t_i": e.angle,
                     "err_bound": e.error_bound, "cf_index": e.cf_index}
                    for e in gens.schedule.entries
                ],
            },
            "convention": "conjugator sides fixed by the end-to-end identity",
        },
    )


def verify_s1_certificate(
    gens: S1Generators,
    cert: DistortionCertificate,
    samples: int = 10_000,
    tol: float = 1e-8,
    seed: int = 0,
) -> dict:
    grid = circle_grid(samples, seed)
    per_entry = []
    sup_all = 0.0
    passed = True
    for e in cert.entries:
        word_map = compose_word_circle(e.word.letters, gens.table)
        target = Rotation1(e.target["rotation_angle"])
        err = map_distance_circle(word_map, target, grid)
        ok = err <= tol * (1.0 + len(e.word))
        per_entry.append({"i": e.index, "sup_error": err, "passed": ok})
        sup_all = max(sup_all, err)
        passed = passed and ok
    cert.verification = {
        "samples": samples, "sup_error": sup_all,
        "passed": passed, "tolerance": tol, "entries": per_entry,
    }
    if not passed:
        worst = max(per_entry, key=lambda d: d["sup_error"])
        raise VerificationFailed(worst["i"], worst["sup_error"])
    return cert.verification


# ---------------------------------------------------------------------------
# Suspension tangency diagnostics
# ---------------------------------------------------------------------------


@dataclass
class PixtonSystem:
    """A commuting pair on an interval: tile transport Y and suspension Phi.

    Tiles are harmonic; Phi restricted to tile j is the logit-chart
    translation by c0 * rho(j) / rho(0), and Y is the per-tile logit scaling
    by rho(j+1)/rho(j).  The pair commutes exactly and Phi is the suspension
    of its tile-0 piece under Y.
    """

    tiling: HarmonicTiling
    c0: float

    def Y(self) -> TransportMap:
        models = _LogitScaleModels(flat=False)
        return TransportMap(self.tiling, model_fwd=models.fwd, model_inv=models.inv)

    def Phi(self) -> CircleMap:
        tiling, c0 = self.tiling, self.c0

        class _Phi(CircleMap):
            def _move(self, x, sign):
                x = np.asarray(x, dtype=float)
                out = x.copy()
                m = tiling.inside(x)
                if np.any(m):
                    xi = x[m]
                    j = tiling.locate(xi)
                    u = np.clip(tiling.chart(j, xi), 1e-300, 1.0 - 1e-16)
                    shift = sign * c0 * _rho(j) / _rho(0)
                    out[m] = tiling.unchart(j, expit(logit(u) + shift))
                return out

            def apply(self, x):
                return self._move(x, +1.0)

            def apply_inverse(self, x):
                return self._move(x, -1.0)

        return _Phi()

    def chart_endpoints(self, count: int = 12) -> list[float]:
        return [float(self.tiling.edge(np.array(float(j)))) for j in range(count)]


def pixton_coordinates(
    interval: tuple[float, float],
    c0: float = 0.2,
    depth: int = 9,
    fd_step_frac: float = 1e-4,
) -> dict:
    """Harmonic chart plus tangency diagnostics for the suspension pair.

    Reports |dY - 1| and |dPhi - 1| at dyadic points marching toward the
    right endpoint; both columns decrease when the suspension parameters
    decay along the tiles (identically-zero parameters give a zero Phi
    column).
    """
    lo, hi = interval
    system = PixtonSystem(HarmonicTiling(0.5 * (lo + hi), 0.5 * (hi - lo)), c0)
    Y, Phi = system.Y(), system.Phi()
    rows = []
    span = hi - lo
    for k in range(1, depth + 1):
        # dyadic midpoints: the plain dyadic sequence lands exactly on the
        # harmonic tile edges, where the scaling model's one-sided slopes
        # are not comparable row to row
        x = hi - span * 0.375 * 2.0 ** (-k)
        h = span * 2.0 ** (-k) * fd_step_frac
        dy = float(_lift_derivative(Y, np.array([x]), h)[0])
        dphi = float(_lift_derivative(Phi, np.array([x]), h)[0])
        rows.append({"k": k, "x": x, "dY_err": abs(dy - 1.0), "dPhi_err": abs(dphi - 1.0)})
    ratios = [(r["dY_err"], r["dPhi_err"]) for r in rows]
    decreasing = all(
        b[0] <= a[0] * 1.05 + 1e-15 and b[1] <= a[1] * 1.05 + 1e-15
        for a, b in zip(ratios, ratios[1:])
    )
    return {
        "chart_endpoints": system.chart_endpoints(),
        "rows": rows,
        "decreasing": decreasing,
    }


def suspension_derivative_table(
    gens: S1Generators,
    points_per_tile: int = 64,
    fd_step_frac: float = 1e-2,
) -> list[dict]:
    """Per-tile sup of |d f_plus - 1| marching toward the carrier's right end.

    Beyond the last populated column the suspension is the identity and the
    rows sit at the finite-difference noise floor, which is reported.
    """
    rows = []
    i_max = gens.f_plus.i_max if isinstance(gens.f_plus, SuspensionProduct) else 0
    for i in range(0, i_max + 2):
        e0 = float(gens.outer.edge(np.array(float(i))))
        e1 = float(gens.outer.edge(np.array(float(i + 1))))
        width = e1 - e0
        x = np.linspace(e0 + 0.02 * width, e1 - 0.02 * width, points_per_tile)
        h = width * fd_step_frac
        d = _lift_derivative(gens.f_plus, x, h)
        rows.append({"tile": i, "df_err": float(np.max(np.abs(d - 1.0))),
                     "noise_floor": 4.0 * 2.0 ** -52 / h})
    return rows


def commutator_c1_report(eps: float, samples: int = 2000, seed: int = 3) -> dict:
    """Empirical check that commutators of near-identity maps are
    quadratically near the identity in the C1 distance.

    Uses the angle-displacement maps x -> x + g(x) with smooth g of C1 size
    eps; reports the sampled C1 distance of the commutator to the identity
    and the ratio against eps^2.
    """
    from .circles import c1_distance_circle

    class _Disp(CircleMap):
        def __init__(self, amp, freq, phase):
            self.amp, self.freq, self.phase = amp, freq, phase

        def apply(self, x):
            x = np.asarray(x, dtype=float)
            return wrap(x + self.amp * np.sin(self.freq * x + self.phase))

        def apply_inverse(self, x):
            y = np.asarray(x, dtype=float)
            lo, hi = y - abs(self.amp) - 1e-12, y + abs(self.amp) + 1e-12
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                low = mid + self.amp * np.sin(self.freq * mid + self.phase) < y
                lo = np.where(low, mid, lo)
                hi = np.where(low, hi, mid)
            return wrap(0.5 * (lo + hi))

    g1 = _Disp(eps / 2.0, 1.0, 0.0)
    g2 = _Disp(eps / 2.0, 1.0, math.pi / 2.0)
    comm = Compose1([g1, g2, Inverse1(g1), Inverse1(g2)])
    grid = circle_grid(samples, seed)
    dist = c1_distance_circle(comm, Identity1(), grid)
    return {"eps": eps, "c1_distance": dist, "ratio": dist / (eps * eps)}
