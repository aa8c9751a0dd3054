"""Simultaneous distortion certificates for sphere homeomorphisms (n = 1, 2).

Any orientation-preserving sphere homeomorphism that arrives pre-factored as
a product of two pieces with poles-avoiding supports can be rewritten as a
product of six homeomorphisms supported in two fixed covering disks.  A
ladder of disjoint regions indexed by a half-grid, together with transports
T, F and two global bookkeeping maps Z1, Z2, packs countably many such
six-factor lists into six generators; commutator words of length 4 i + 6
extract each factor and assembled words of length 24 i + 36 reproduce each
input power.  The same machinery drives the bounded-length stress tests and
the displacement-ball diameter experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import circles as c1m
from . import spheres as s2m
from .bumps import s01
from .circles import (
    CircleMap,
    Compose1,
    HarmonicTiling,
    Inverse1,
    Rotation1,
    SegmentedCircleMap,
    SuspensionProduct,
    TransportMap,
    WrappedColumn,
    _Affine1D,
    compose_word_circle,
)
from .errors import CoverTooTight, SupportViolation, VerificationFailed
from .s1 import I_MINUS, I_PLUS, factorize_rotation
from .schedule import RotationSchedule
from .spheres import (
    Compose,
    Inverse,
    MapExpr,
    Mobius,
    RadialProfile,
    Rotation,
    LatMap,
    LongMap,
    AngleProfile,
    Scale,
    compose_word,
    fibonacci_sphere_grid,
    map_distance,
    sup_displacement,
)
from .words import CertificateEntry, DistortionCertificate, GeneratorAlphabet, GroupWord

__all__ = [
    "PreFactoredHomeo",
    "SixFactorDecomposition",
    "factor_as_six",
    "interleave",
    "InterleavedElement",
    "SnStructure",
    "build_sn_structure",
    "emit_sn_certificates",
    "verify_sn_certificates",
    "rotation_inputs",
    "direct_inputs",
    "prefactored_from_json",
    "lookup_position",
    "factor_word_letters",
    "assembled_word_letters",
    "strong_boundedness_stress",
    "cayley_diameter_experiment",
    "random_small_map",
    "SN_ALPHABET",
]

SN_ALPHABET = GeneratorAlphabet(("f1", "f2", "f3", "f4", "f5", "f6", "T", "F", "Z1", "Z2"))
_T_IDX, _F_IDX, _Z1, _Z2 = 7, 8, 9, 10
_SUPPORT_TAGS = (2, 1, 2, 1, 2, 1)  # which covering disk each factor lives in


# ---------------------------------------------------------------------------
# Six-factor decomposition
# ---------------------------------------------------------------------------


@dataclass
class PreFactoredHomeo:
    """h = h1 h2 with h1 avoiding the south pole and h2 the north pole.

    Support bounds are declared (radii for n = 2, arcs for n = 1) and spot
    verified by sampling; producing the two pieces for a general input is
    outside this engine (only rotation-type inputs are factored here).
    """

    dim: int
    h1: object
    h2: object
    h1_bound: object
    h2_bound: object
    label: str = ""

    def product(self):
        if self.dim == 2:
            return Compose([self.h1, self.h2])
        return Compose1([self.h1, self.h2])


@dataclass
class SixFactorDecomposition:
    factors: list
    tags: tuple[int, ...]
    e1: object
    e2: object

    def product(self, dim: int):
        return Compose(self.factors) if dim == 2 else Compose1(self.factors)


# covering disks, 2-sphere: E1 = {|z| <= R1}, E2 = {|z| >= R2}
E1_RADIUS = 1.8
E2_RADIUS = 0.55

# covering arcs, circle
E1_ARC = (math.pi + 0.06, c1m.TWO_PI + 0.45)
E2_ARC = (0.06, math.pi + 0.45)


def _check_support_s2(m: MapExpr, inside: bool, bound: float, samples: int = 400):
    """Verify that m fixes sampled points outside its declared radial bound."""
    rng = np.random.default_rng(7)
    if inside:  # support in {r <= bound}: test points beyond
        r = bound * np.exp(rng.uniform(0.02, 2.0, samples))
    else:       # support in {r >= bound}: test points below
        r = bound * np.exp(-rng.uniform(0.02, 2.0, samples))
    ang = rng.uniform(0.0, c1m.TWO_PI, samples)
    values = r * np.exp(1j * ang)
    charts = np.zeros(samples, dtype=bool)
    values, charts = s2m._normalize(values, charts)
    w, d = m.apply(values.copy(), charts.copy())
    err = float(np.max(s2m.sphere_distance(values, charts, w, d)))
    if err > 1e-9:
        raise SupportViolation(f"declared support violated by {err:.3e}")


def _arc_contains(arc, x):
    lo, hi = arc
    span = hi - lo
    return np.mod(np.asarray(x) - lo, c1m.TWO_PI) < span


def _check_support_s1(m: CircleMap, arc, samples: int = 400):
    lo, hi = arc
    gap = c1m.TWO_PI - (hi - lo)
    if gap <= 0:
        raise CoverTooTight("declared arc covers the whole circle")
    x = np.mod(hi + np.linspace(1e-3, gap - 1e-3, samples), c1m.TWO_PI)
    err = float(np.max(np.abs(c1m.wrap_pm_pi(m.apply(x) - x))))
    if err > 1e-9:
        raise SupportViolation(f"declared arc support violated by {err:.3e}")


def _arc_adjust(pairs: Sequence[tuple[float, float]]) -> SegmentedCircleMap:
    """Monotone circle map from (source, image) breakpoints, identity at the
    first listed point; breakpoints must be given in increasing source order
    spanning less than a full turn."""
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    segs = [
        _Affine1D(xs[k], xs[k + 1], ys[k], ys[k + 1]) for k in range(len(xs) - 1)
    ]
    segs.append(_Affine1D(xs[-1], xs[0] + c1m.TWO_PI, ys[-1], ys[0] + c1m.TWO_PI))
    return SegmentedCircleMap(segs)


def factor_as_six(p: PreFactoredHomeo) -> SixFactorDecomposition:
    """h = e2^-1 (e2 h1 e2^-1) e2 e1^-1 (e1 h2 e1^-1) e1.

    e2 is a radial (or arc) compression supported in E2 moving the part of
    supp(h1) inside E2 into the overlap E1 cap E2; e1 symmetrically.  The
    factors alternate supports (E2, E1, E2, E1, E2, E1) and multiply back to
    h exactly; the conjugators depend on the declared support bounds.
    """
    if p.dim == 2:
        _check_support_s2(p.h1, inside=True, bound=float(p.h1_bound))
        _check_support_s2(p.h2, inside=False, bound=float(p.h2_bound))
        if float(p.h1_bound) >= 2.0 * E1_RADIUS or float(p.h2_bound) <= E2_RADIUS / 2.0:
            raise CoverTooTight("support bounds leave no room for the expansions")
        # compress [~E2_RADIUS, h1_bound] under E1_RADIUS; log2 plateaus
        top = math.log2(float(p.h1_bound))
        e2_prof = RadialProfile.from_plateaus(
            [(top - 0.5, top, math.log2((E1_RADIUS - 0.06) / float(p.h1_bound)))]
        )
        bot = math.log2(float(p.h2_bound))
        e1_prof = RadialProfile.from_plateaus(
            [(bot - 0.5, bot, math.log2((E2_RADIUS + 0.01) / float(p.h2_bound)))]
        )
        e2: object = LongMap(e2_prof)
        e1: object = LongMap(e1_prof)
        conj = lambda a, b: Compose([b, a, Inverse(b)])  # b a b^-1
        f2 = conj(p.h1, e2)
        f5 = conj(p.h2, e1)
        factors = [Inverse(e2), f2, e2, Inverse(e1), f5, e1]
    else:
        _check_support_s1(p.h1, p.h1_bound)
        _check_support_s1(p.h2, p.h2_bound)
        pi = math.pi
        e2 = _arc_adjust([
            (0.065, 0.065), (0.5, 0.40), (0.52, 0.42),
            (pi + 0.03, pi + 0.03), (pi + 0.04, pi + 0.08), (pi + 0.44, pi + 0.44),
        ])
        e1 = _arc_adjust([
            (pi + 0.07, pi + 0.07), (pi + 0.6, pi + 0.43), (pi + 0.8, pi + 0.8),
            (c1m.TWO_PI - 0.1, c1m.TWO_PI - 0.1), (c1m.TWO_PI, c1m.TWO_PI + 0.065),
            (c1m.TWO_PI + 0.44, c1m.TWO_PI + 0.44),
        ])
        conj1 = lambda a, b: Compose1([b, a, Inverse1(b)])
        f2 = conj1(p.h1, e2)
        f5 = conj1(p.h2, e1)
        factors = [Inverse1(e2), f2, e2, Inverse1(e1), f5, e1]
    return SixFactorDecomposition(factors, _SUPPORT_TAGS, e1, e2)


# ---------------------------------------------------------------------------
# Interleaving
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterleavedElement:
    position: int      # index in the relabelled sequence H_0, H_1, ...
    input_index: int   # which input homeomorphism (1-based)
    block: int         # which exponent block (1-based)
    exponent: int


def interleave(num_inputs: int, exponents: Sequence[int]) -> list[InterleavedElement]:
    """Triangular relabelling: block b contributes inputs 1..min(b, count).

    The position of (input j, block b) is recoverable from the returned
    list; exponents must be strictly increasing.
    """
    out = []
    pos = 0
    for b, n in enumerate(exponents, start=1):
        if b > 1 and exponents[b - 1] <= exponents[b - 2]:
            raise ValueError("exponents must be strictly increasing")
        for j in range(1, min(b, num_inputs) + 1):
            out.append(InterleavedElement(pos, j, b, n))
            pos += 1
    return out


def lookup_position(sequence: list[InterleavedElement], input_index: int, block: int) -> int:
    for e in sequence:
        if e.input_index == input_index and e.block == block:
            return e.position
    raise KeyError((input_index, block))


# ---------------------------------------------------------------------------
# The ladder structure
# ---------------------------------------------------------------------------

# 2-sphere ladder constants: the region family lives in an annulus sector
_ANN_LO, _ANN_HI = 1.1, 1.9
_SECTOR_CORE, _SECTOR_EDGE = 0.1, 0.2
_BALL_CENTER, _BALL_RADIUS = 1.45, 0.02
_SHIFT = 0.5  # logit translation per rung


def _u_of_r(r):
    return (np.log(r) - math.log(_ANN_LO)) / (math.log(_ANN_HI) - math.log(_ANN_LO))


def _r_of_u(u):
    return np.exp(math.log(_ANN_LO) + u * (math.log(_ANN_HI) - math.log(_ANN_LO)))


def _damping(theta):
    a = np.abs(c1m.wrap_pm_pi(theta))
    return s01((_SECTOR_EDGE - a) / (_SECTOR_EDGE - _SECTOR_CORE))


class SectorShift(MapExpr):
    """Radial logit translation inside an annulus, damped outside a sector.

    Exactly the identity off {r in (lo, hi), |arg z| < edge}; on the sector
    core the translation is undamped, so the marked ball's orbit moves by
    pure radial steps in closed form.
    """

    def __init__(self, steps: float = 1.0):
        self.steps = float(steps)

    def _move(self, values, charts, sign):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            z = np.where(charts, 1.0 / np.where(values == 0, np.nan, values), values)
            r = np.abs(z)
        live = np.isfinite(r) & (r > _ANN_LO) & (r < _ANN_HI)
        if not np.any(live):
            return values.copy(), charts.copy()
        zz = z[live]
        theta = np.angle(zz)
        shift = sign * self.steps * _SHIFT * _damping(theta)
        u = _u_of_r(np.abs(zz))
        w = c1m.logit(np.clip(u, 1e-300, 1.0 - 1e-16))
        rr = _r_of_u(c1m.expit(w + shift))
        znew = rr * np.exp(1j * theta)
        out_v = values.copy()
        out_c = charts.copy()
        small = np.abs(znew) <= 1.0
        out_v[live] = np.where(small, znew, 1.0 / np.where(small, 1.0, znew))
        out_c[live] = ~small
        return out_v, out_c

    def apply(self, values, charts):
        return self._move(values, charts, +1.0)

    def apply_inverse(self, values, charts):
        return self._move(values, charts, -1.0)

    def power(self, k):
        return SectorShift(self.steps * k)


def _ball_pullback_radial(z: np.ndarray, j: np.ndarray) -> np.ndarray:
    """F^-j on points, exact closed form (theta is preserved by F)."""
    r = np.abs(z)
    theta = np.angle(z)
    shift = -np.asarray(j, dtype=float) * _SHIFT * _damping(theta)
    u = _u_of_r(r)
    w = c1m.logit(np.clip(u, 1e-300, 1.0 - 1e-16))
    return _r_of_u(c1m.expit(w + shift)) * np.exp(1j * theta)


class SnCoeffNodeS2(MapExpr):
    """Lazy product of conjugated factors on the 2-sphere ladder.

    The factor for rung (i, j) is b^-1 H b with b = Z_k o F^-j o T^-i,
    supported in T^i F^j (ball); evaluation locates the rung from the
    modulus (annulus index) and the radial logit window (rung index), then
    applies the closed-form chain.
    """

    def __init__(self, factors: dict[int, MapExpr], zmap: Mobius, i_max: int):
        self.factors = factors  # position -> disk-supported map (in E_k)
        self.zmap = zmap
        self.i_max = int(i_max)

    def _apply_pointwise(self, values, charts, inverse: bool):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            z = np.where(charts, 1.0 / np.where(values == 0, np.nan, values), values)
            r = np.abs(z)
            ok = np.isfinite(r) & (r > 0)
            i = np.zeros(values.shape, dtype=np.int64)
            i[ok] = np.round(np.log2(r[ok] / _BALL_CENTER)).astype(np.int64)
        i = np.clip(i, -60, 60)
        zi = z * np.exp2(-i.astype(float))
        ri = np.abs(np.where(ok, zi, 2.0))
        in_band = ok & (ri > _ANN_LO) & (ri < _ANN_HI)
        out_v, out_c = values.copy(), charts.copy()
        if not np.any(in_band):
            return out_v, out_c
        idx = np.flatnonzero(in_band)
        zz = zi[idx]
        ii = i[idx]
        v = c1m.logit(np.clip(_u_of_r(np.abs(zz)), 1e-300, 1.0 - 1e-16))
        v0 = float(c1m.logit(np.array(_u_of_r(_BALL_CENTER))))
        j = np.round((v - v0) / _SHIFT).astype(np.int64)
        hit = np.zeros(idx.shape, dtype=bool)
        jj = np.zeros(idx.shape, dtype=np.int64)
        for dj in (-1, 0, 1):
            cand = j + dj
            pulled = _ball_pullback_radial(zz, cand)
            member = (np.abs(pulled - _BALL_CENTER) <= _BALL_RADIUS) & (cand >= 0) & ~hit
            jj = np.where(member, cand, jj)
            hit |= member
        keep = hit & (ii >= 0) & (ii <= self.i_max)
        if not np.any(keep):
            return out_v, out_c
        idx, zz, ii, jj = idx[keep], zz[keep], ii[keep], jj[keep]
        for pos in np.unique(ii):
            factor = self.factors.get(int(pos))
            if factor is None:
                continue
            sel = ii == pos
            z_sel = zz[sel]
            j_sel = jj[sel]
            # b: T^-i is already applied (zz), then F^-j, then Z_k
            y = _ball_pullback_radial(z_sel, j_sel)
            yv = np.asarray(y, dtype=complex)
            yc = np.zeros(yv.shape, dtype=bool)
            yv, yc = self.zmap.apply(yv, yc)
            yv, yc = factor.apply_inverse(yv, yc) if inverse else factor.apply(yv, yc)
            yv, yc = self.zmap.apply_inverse(yv, yc)
            # the ball sits at modulus ~1.45, stored in chart 1 after the
            # Moebius round trip; unpack to plain coordinates
            ball = np.where(yc, 1.0 / np.where(yv == 0, np.nan, yv), yv)
            back = _ball_pullback_radial(ball.astype(complex), -j_sel)
            znew = back * np.exp2(ii[sel].astype(float))
            sub = idx[sel]
            small = np.abs(znew) <= 1.0
            out_v[sub] = np.where(small, znew, 1.0 / np.where(small, 1.0, znew))
            out_c[sub] = ~small
        return out_v, out_c

    def apply(self, values, charts):
        return self._apply_pointwise(values, charts, inverse=False)

    def apply_inverse(self, values, charts):
        return self._apply_pointwise(values, charts, inverse=True)


@dataclass
class SnStructure:
    dim: int
    sequence: list[InterleavedElement]
    decompositions: list[SixFactorDecomposition]
    targets: list  # the maps H_m
    table: dict[int, object]
    metadata: dict = field(default_factory=dict)

    @property
    def alphabet(self) -> GeneratorAlphabet:
        return SN_ALPHABET


def rotation_inputs(dim: int, schedule: RotationSchedule, num_inputs: int = 2,
                    multiples: Sequence[float] | None = None):
    """Pre-factored powers of rotation inputs along the exponent schedule.

    Input j is the rotation by multiples[j-1] * theta (default j * theta),
    so every scheduled power has a small residue and factors through the
    standard covers.
    """
    if multiples is None:
        multiples = list(range(1, num_inputs + 1))
    sequence = interleave(len(multiples), [e.exponent for e in schedule.entries])
    prefactored = []
    targets = []
    for el in sequence:
        t = schedule.entries[el.block - 1].angle * multiples[el.input_index - 1]
        if dim == 2:
            rp, rm = s2m.rot_factor(t)
            pre = PreFactoredHomeo(2, rm, rp, 2.0, 0.5, label=f"rot({t:.3e})")
            targets.append(Rotation(t))
        else:
            fac = factorize_rotation(t)
            pre = PreFactoredHomeo(1, fac.xi, fac.zeta, I_PLUS, I_MINUS,
                                   label=f"rot({t:.3e})")
            targets.append(Rotation1(t))
        prefactored.append(pre)
    return sequence, prefactored, targets


def direct_inputs(prefactored: list[PreFactoredHomeo]):
    """Sequence entries for explicitly supplied pre-factored inputs.

    Each input enters at its list position with ordinal bookkeeping (no
    power structure is claimed); targets are the products h1 h2.
    """
    sequence = [InterleavedElement(m, m + 1, m + 1, m + 1)
                for m in range(len(prefactored))]
    targets = [p.product() for p in prefactored]
    return sequence, prefactored, targets


def prefactored_from_json(data: dict) -> PreFactoredHomeo:
    """A 2-sphere pre-factored input from serialized map trees."""
    from .mapjson import map_from_json

    return PreFactoredHomeo(
        2,
        map_from_json(data["h1"]),
        map_from_json(data["h2"]),
        float(data.get("h1_bound", 2.0)),
        float(data.get("h2_bound", 0.5)),
        label=data.get("label", "prefactored"),
    )


def build_sn_structure(
    dim: int,
    sequence: list[InterleavedElement],
    prefactored: list[PreFactoredHomeo],
    targets: list,
) -> SnStructure:
    decomps = [factor_as_six(p) for p in prefactored]
    i_max = len(sequence) - 1
    if dim == 2:
        T: object = Scale(2.0)
        F: object = SectorShift()
        z1 = Mobius(E1_RADIUS / _BALL_RADIUS, -E1_RADIUS / _BALL_RADIUS * _BALL_CENTER, 0.0, 1.0)
        z2 = Mobius(0.0, _BALL_RADIUS * E2_RADIUS, 1.0, -_BALL_CENTER)
        zmaps = {1: z1, 2: z2}
        table: dict[int, object] = {_T_IDX: T, _F_IDX: F, _Z1: z1, _Z2: z2}
        for ell in range(6):
            k = _SUPPORT_TAGS[ell]
            factors = {m: decomps[m].factors[ell] for m in range(len(decomps))}
            table[ell + 1] = SnCoeffNodeS2(factors, zmaps[k], i_max)
    else:
        outer = HarmonicTiling(4.0, 1.0)
        j0_lo = float(outer.edge(np.array(0.0)))
        j0_hi = float(outer.edge(np.array(1.0)))
        inner = HarmonicTiling(0.5 * (j0_lo + j0_hi), 0.5 * (j0_hi - j0_lo))
        a = float(inner.edge(np.array(0.0)))
        b = float(inner.edge(np.array(1.0)))
        T = TransportMap(outer)
        F = TransportMap(inner)
        arcs = {1: E1_ARC, 2: E2_ARC}
        zmaps = {}
        for k in (1, 2):
            lo, hi = arcs[k]
            # Z_k carries sub-tile 0 onto the covering arc E_k
            zmaps[k] = SegmentedCircleMap([
                _Affine1D(a, b, lo, hi),
                _Affine1D(b, a + c1m.TWO_PI, hi, lo + c1m.TWO_PI),
            ])
        table = {_T_IDX: T, _F_IDX: F, _Z1: zmaps[1], _Z2: zmaps[2]}
        ones = lambda j: np.ones_like(np.asarray(j, dtype=float))
        for ell in range(6):
            k = _SUPPORT_TAGS[ell]
            # the column model is Z_k^-1 o H o Z_k, supported in sub-tile 0
            cols = {
                m: WrappedColumn(
                    Compose1([Inverse1(zmaps[k]), decomps[m].factors[ell], zmaps[k]]), a, b)
                for m in range(len(decomps))
            }
            table[ell + 1] = SuspensionProduct(outer, inner, lambda i, c=cols: c[i],
                                               ones, i_max)
    return SnStructure(dim, sequence, decomps, targets, table,
                       metadata={"coprime_exponents": _pairwise_coprime(
                           [el.exponent for el in sequence])})


def _pairwise_coprime(nums: list[int]) -> bool:
    distinct = sorted(set(nums))
    for i in range(len(distinct)):
        for j in range(i + 1, len(distinct)):
            if math.gcd(distinct[i], distinct[j]) != 1:
                return False
    return True


# ---------------------------------------------------------------------------
# Words and verification
# ---------------------------------------------------------------------------


def factor_word_letters(m: int, ell: int) -> tuple[int, ...]:
    """Z_k (T^-m f_ell T^m) F (T^-m f_ell^-1 T^m) F^-1 Z_k^-1: 4 m + 6 letters."""
    k_idx = _Z1 if _SUPPORT_TAGS[ell] == 1 else _Z2
    f = ell + 1
    tm, tm_inv = (_T_IDX,) * m, (-_T_IDX,) * m
    return ((k_idx,)
            + tm_inv + (f,) + tm
            + (_F_IDX,)
            + tm_inv + (-f,) + tm
            + (-_F_IDX, -k_idx))


def assembled_word_letters(m: int) -> tuple[int, ...]:
    out: tuple[int, ...] = ()
    for ell in range(6):
        out += factor_word_letters(m, ell)
    return out


def emit_sn_certificates(structure: SnStructure) -> DistortionCertificate:
    entries = []
    for el in structure.sequence:
        word = GroupWord(assembled_word_letters(el.position))
        entries.append(CertificateEntry(
            index=el.position,
            length_bound=len(word),
            exponent=el.exponent,
            word=word,
            target={"input_index": el.input_index, "block": el.block,
                    "dim": structure.dim},
        ))
    return DistortionCertificate(
        alphabet=SN_ALPHABET,
        base="interleaved rotation powers",
        entries=entries,
        growth=None,
        metadata={
            "dim": structure.dim,
            "letter_slope": 24,
            "letter_offset": 36,
            "factor_slope": 4,
            "factor_offset": 6,
            "coprime_exponents": structure.metadata.get("coprime_exponents"),
            "membership_note": "coprimality recorded, not exploited",
        },
    )


def verify_sn_certificates(
    structure: SnStructure,
    cert: DistortionCertificate,
    samples: int = 10_000,
    tol: float = 1e-8,
    seed: int = 0,
) -> dict:
    """Check factor words against the decomposition factors and assembled
    words against the target maps, pointwise on a reproducible grid."""
    dim = structure.dim
    if dim == 2:
        grid = fibonacci_sphere_grid(samples, seed)
        dist = lambda a, b: map_distance(a, b, grid)
        word_map = lambda letters: compose_word(letters, structure.table)
    else:
        grid = c1m.circle_grid(samples, seed)
        dist = lambda a, b: c1m.map_distance_circle(a, b, grid)
        word_map = lambda letters: compose_word_circle(letters, structure.table)

    per_entry = []
    sup_all = 0.0
    passed = True
    for el in structure.sequence:
        m = el.position
        factor_errs = []
        for ell in range(6):
            wm = word_map(factor_word_letters(m, ell))
            err = dist(wm, structure.decompositions[m].factors[ell])
            factor_errs.append(err)
        wm = word_map(assembled_word_letters(m))
        err_assembled = dist(wm, structure.targets[m])
        length = 24 * m + 36
        ok = err_assembled <= tol * (1.0 + length) and max(factor_errs) <= tol * (1.0 + length)
        per_entry.append({
            "position": m, "input": el.input_index, "exponent_block": el.block,
            "factor_sup_error": max(factor_errs), "assembled_error": err_assembled,
            "passed": ok,
        })
        sup_all = max(sup_all, err_assembled, max(factor_errs))
        passed = passed and ok
    cert.verification = {
        "samples": samples, "sup_error": sup_all, "passed": passed,
        "tolerance": tol, "entries": per_entry,
    }
    if not passed:
        worst = max(per_entry, key=lambda d: d["assembled_error"])
        raise VerificationFailed(worst["position"], worst["assembled_error"])
    return cert.verification


# ---------------------------------------------------------------------------
# Length-function stress and diameter experiments
# ---------------------------------------------------------------------------


def strong_boundedness_stress(structure: SnStructure, cert: DistortionCertificate,
                              samples: int = 2000, seed: int = 1,
                              length_fns: dict | None = None) -> dict:
    """Compare admissible length functions against certified word lengths.

    For each certified element, any symmetric subadditive function L obeys
    L(H_m) <= word_length * max L(generator).  The default functions are the
    sampled displacement and derivative-growth norms; callers may supply
    their own map -> value functions.  The tabulated ratios stay bounded
    while word lengths grow linearly, which is what rules out any admissible
    L growing like the square of the position along the certified sequence.
    """
    dim = structure.dim
    if dim == 2:
        grid = fibonacci_sphere_grid(samples, seed)
        default_fns = {
            "disp": lambda m: sup_displacement(m, grid),
            "dnorm": lambda m: s2m.derivative_norm(m, grid),
        }
    else:
        grid = c1m.circle_grid(samples, seed)
        default_fns = {
            "disp": lambda m: c1m.sup_displacement_circle(m, grid),
            "dnorm": lambda m: c1m.derivative_sup_circle(m, grid),
        }
    fns = length_fns or default_fns

    gen_max = {name: max(fn(g) for g in structure.table.values())
               for name, fn in fns.items()}
    rows = []
    for el, entry in zip(structure.sequence, cert.entries):
        h = structure.targets[el.position]
        length = len(entry.word)
        row = {"position": el.position, "word_length": length}
        for name, fn in fns.items():
            row[name] = fn(h)
            row[name + "_bound"] = length * gen_max[name]
        rows.append(row)
    slack = {"disp": 1e-9, "dnorm": 1e-6}
    ok = all(
        r[name] <= r[name + "_bound"] + slack.get(name, 1e-9)
        for r in rows for name in fns
    )
    return {"rows": rows, "dominated": ok, "generator_max": gen_max}


def random_small_map(rng: np.random.Generator, bound: float, grid) -> MapExpr:
    """A random latitude/longitude composite with displacement below bound."""
    kind = rng.integers(0, 3)
    amp = float(rng.uniform(0.2, 1.0)) * bound
    if kind == 0:
        m: MapExpr = Rotation(amp * 0.5)
    elif kind == 1:
        scale = float(np.exp2(rng.uniform(-1.5, 1.5)))
        m = LatMap(AngleProfile.bump(amp * 0.5, scale))
    else:
        center = float(rng.uniform(-2.0, 2.0))
        m = LongMap(RadialProfile.from_plateaus(
            [(center, center + 1.0, amp * 0.2)], validate=False))
    d = sup_displacement(m, grid)
    if d > 0.8 * bound:
        # linear rescale of the driving parameter, then re-measure once
        factor = 0.7 * bound / d
        if kind == 0:
            m = Rotation(amp * 0.5 * factor)
        elif kind == 1:
            m = LatMap(AngleProfile.bump(amp * 0.5 * factor, scale))
        else:
            m = LongMap(RadialProfile.from_plateaus(
                [(center, center + 1.0, amp * 0.2 * factor)], validate=False))
    return m


def cayley_diameter_experiment(r: float, k: int, trials: int, seed: int = 0,
                               grid_size: int = 600) -> dict:
    """Compositions of k random maps, each moving no point farther than r.

    By the triangle inequality the composite moves no point farther than
    k r; with r <= 2/k no composite can realize the antipodal displacement,
    so the displacement balls generate with unbounded Cayley diameter.
    """
    rng = np.random.default_rng(seed)
    grid = fibonacci_sphere_grid(grid_size, seed)
    max_ratio = 0.0
    max_disp = 0.0
    for _ in range(trials):
        maps = []
        for _ in range(k):
            m = random_small_map(rng, r, grid)
            d = sup_displacement(m, grid)
            if d >= r:
                raise AssertionError("component displacement reached the bound")
            maps.append(m)
        comp = Compose(maps)
        d = sup_displacement(comp, grid)
        max_disp = max(max_disp, d)
        max_ratio = max(max_ratio, d / (k * r))
    return {
        "r": r, "k": k, "trials": trials,
        "max_composite_displacement": max_disp,
        "max_ratio": max_ratio,
        "all_below_kr": max_disp < k * r,
        "antipodal_unreachable": (r <= 2.0 / k) and (max_disp < 2.0),
    }
