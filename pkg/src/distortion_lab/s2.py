"""Certificate pipeline for rigid rotations of the 2-sphere.

Builds an explicit finitely generated set of sphere maps in which high
powers of a chosen rotation are expressible by short words: the doubling
map T, the annulus half-turn F, a realized coefficient map f carrying the
residue schedule, a bookkeeping homeomorphism Z exchanging the labelled
disks with the two rotation-factor disks, and three radial elements
M1, M2, M3 whose conjugates telescope a latitude profile into a rigid
rotation.  Words of length 16 i + 30 evaluate to the rotation by 2 t_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuityGap, IdentityResidualExceeded, VerificationFailed
from .schedule import RotationSchedule
from .spheres import (
    AngleProfile,
    Compose,
    FMap,
    Inverse,
    LatMap,
    LongMap,
    MapExpr,
    RadialProfile,
    Rotation,
    RotMinus,
    Scale,
    _normalize,
    compose_word,
    fibonacci_sphere_grid,
    map_distance,
    sphere_distance,
)
from .words import (
    CertificateEntry,
    DistortionCertificate,
    GeneratorAlphabet,
    GroupWord,
    GrowthFunction,
)
from .wreath import (
    DISK_CENTER,
    DISK_RADIUS,
    CoeffMap,
    RealizationParams,
    WreathCoeffNode,
)

__all__ = [
    "build_profiles",
    "S2Profiles",
    "ZMap",
    "build_Z",
    "S2GeneratorSet",
    "build_s2_generators",
    "emit_s2_certificate",
    "emit_s2_certificates",
    "verify_s2_certificate",
    "h_direct",
    "h_via_wreath",
    "S2_ALPHABET",
]

S2_ALPHABET = GeneratorAlphabet(("f", "T", "F", "Z", "M1", "M2", "M3"))
_F_IDX, _T_IDX, _FF_IDX, _Z_IDX, _M1, _M2, _M3 = 1, 2, 3, 4, 5, 6, 7


# ---------------------------------------------------------------------------
# Profiles: the dip, its complement, and the three radial elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class S2Profiles:
    chi: AngleProfile      # the normalized dip: B(r) - B(r/8)
    alpha: AngleProfile    # 1 - chi: the angle shape of the local pieces
    m1: RadialProfile
    m2: RadialProfile
    m3: RadialProfile


def build_profiles(check_points: int = 100_000, residual_bound: float = 1e-10) -> S2Profiles:
    """The dip profile and the radial triple with the telescoping identity.

    chi(r) = B(r) - B(r/8) rises on [1/2, 2], plateaus at 1 on [2, 4], and
    falls on [4, 16].  m1 divides by 8 exactly on [4, 128], m2 by 64 on
    [32, 1024], m3 is the identity on [1/2, 2] and divides by 64 on
    [256, 1024]; each extends monotonically and equals the identity near 0
    and infinity.  Then chi + chi o m1 + chi o m2 telescopes to chi o m3
    pointwise; the residual is checked on a log grid before returning.
    """
    chi = AngleProfile.bump(1.0, 1.0) + AngleProfile.bump(-1.0, 8.0)
    alpha = AngleProfile.const(1.0) + AngleProfile.bump(-1.0, 1.0) + AngleProfile.bump(1.0, 8.0)
    # log2 plateaus: m1: offset -3 on [2, 7]; m2: -6 on [5, 10];
    # m3: 0 on [-1, 1] and -6 on [8, 10] (linear blend between: the smooth
    # step's slope would break monotonicity across that drop)
    m1 = RadialProfile.from_plateaus([(2.0, 7.0, -3.0)])
    m2 = RadialProfile.from_plateaus([(5.0, 10.0, -6.0)])
    m3 = RadialProfile.from_plateaus(
        [(-1.0, 1.0, 0.0), (8.0, 10.0, -6.0)],
        blend=("smooth", "linear", "smooth"),
    )
    profiles = S2Profiles(chi, alpha, m1, m2, m3)
    x = np.linspace(-12.0, 14.0, check_points)
    residual = profile_identity_residual(profiles, x)
    if residual > residual_bound:
        raise IdentityResidualExceeded(residual, residual_bound)
    return profiles


def profile_identity_residual(profiles: S2Profiles, x: np.ndarray) -> float:
    """sup |chi + chi o m1 + chi o m2 - chi o m3| over log2 radii x."""
    chi = profiles.chi
    total = (
        chi.eval_log2(x)
        + chi.eval_log2(profiles.m1.log_apply(x))
        + chi.eval_log2(profiles.m2.log_apply(x))
        - chi.eval_log2(profiles.m3.log_apply(x))
    )
    return float(np.max(np.abs(total)))


# ---------------------------------------------------------------------------
# The bookkeeping map Z
# ---------------------------------------------------------------------------

_P = math.sqrt(35.0) / 4.0          # limit points +-P of the coaxial pencil
_C1 = 6.0 - math.sqrt(35.0)         # pencil level of the disk boundary
TWO_PI_Z = 2.0 * math.pi


def _mobius_m(z: np.ndarray) -> np.ndarray:
    """(z - P)/(z + P): sends the disk pair to a round annulus pair."""
    return (z - _P) / (z + _P)


def _mobius_m_inv(w: np.ndarray) -> np.ndarray:
    return _P * (1.0 + w) / (1.0 - w)


class ZMap(MapExpr):
    """Piecewise homeomorphism carrying the labelled disk pair to the two
    rotation-factor disks.

    On D = {|z - 3/2| <= 1/4}:  z -> 8 (z - 3/2)           (onto |w| <= 2)
    On -D:                      z -> -1 / (z + 3/2)         (onto |w| >= 4)
    Between: a log-polar interpolation through the coaxial pencil of the two
    disk boundaries, matching both boundary maps exactly.
    """

    def __init__(self, angle_table: int = 4096):
        self._phi_grid = np.linspace(-math.pi - 1.0, math.pi + 1.0, angle_table)
        self._psi1_lift = self._lift_table(inner=True)
        self._psi2_lift = self._lift_table(inner=False)
        # align the two lifts so their interpolation never sweeps extra turns
        offset = np.mean(self._psi2_lift - self._psi1_lift)
        self._psi2_lift = self._psi2_lift - TWO_PI_Z * round(float(offset) / TWO_PI_Z)
        if np.any(np.diff(self._psi1_lift) <= 0) or np.any(np.diff(self._psi2_lift) <= 0):
            raise ContinuityGap(0.0, 0.0)  # boundary maps must be increasing

    # boundary circle maps, parameterized by the pencil angle phi
    def _psi_raw(self, phi: np.ndarray, inner: bool) -> np.ndarray:
        w = (_C1 if inner else 1.0 / _C1) * np.exp(1j * phi)
        z = _mobius_m_inv(w)
        if inner:
            img = 8.0 * (z - 1.5)
        else:
            img = -1.0 / (z + 1.5)
        return np.angle(img)

    def _lift_table(self, inner: bool) -> np.ndarray:
        raw = self._psi_raw(self._phi_grid, inner)
        return np.unwrap(raw)

    def _psi(self, phi: np.ndarray, inner: bool) -> np.ndarray:
        """Continuous lift of the boundary angle map at arbitrary phi."""
        raw = self._psi_raw(phi, inner)
        table = self._psi1_lift if inner else self._psi2_lift
        approx = np.interp(phi, self._phi_grid, table)
        k = np.round((approx - raw) / (2.0 * math.pi))
        return raw + 2.0 * math.pi * k

    # ---- region tests in chart-0 coordinates -----------------------------

    @staticmethod
    def _in_disk(z):
        return np.abs(z - DISK_CENTER) <= DISK_RADIUS

    @staticmethod
    def _in_mirror(z):
        return np.abs(z + DISK_CENTER) <= DISK_RADIUS

    def _middle_from_pencil(self, w: np.ndarray) -> np.ndarray:
        """Image of a middle-region point given its pencil coordinate w."""
        rho = np.log(np.abs(w))
        lam = np.clip((rho - math.log(_C1)) / (-2.0 * math.log(_C1)), 0.0, 1.0)
        phi = np.angle(w)
        psi = (1.0 - lam) * self._psi(phi, True) + lam * self._psi(phi, False)
        return np.exp(math.log(2.0) * (1.0 + lam)) * np.exp(1j * psi)

    def _inverse_middle(self, u: np.ndarray) -> np.ndarray:
        lam = (np.log(np.abs(u)) - math.log(2.0)) / math.log(2.0)
        lam = np.clip(lam, 0.0, 1.0)
        psi = np.angle(u)
        rho = (1.0 - 2.0 * lam) * math.log(_C1)
        # solve (1-lam) psi1(phi) + lam psi2(phi) = psi (mod 2 pi), monotone
        lo = np.full_like(psi, -math.pi - 0.5)
        hi = np.full_like(psi, math.pi + 0.5)

        def g(phi):
            return (1.0 - lam) * self._psi(phi, True) + lam * self._psi(phi, False)

        glo, ghi = g(lo), g(hi)
        # shift the target into the branch covered by [lo, hi]
        k = np.floor((psi - glo) / (2.0 * math.pi))
        target = psi - 2.0 * math.pi * k
        target = np.where(target > ghi, target - 2.0 * math.pi, target)
        target = np.where(target < glo, target + 2.0 * math.pi, target)
        a, b = lo, hi
        for _ in range(60):
            mid = 0.5 * (a + b)
            low = g(mid) < target
            a = np.where(low, mid, a)
            b = np.where(low, b, mid)
        phi = 0.5 * (a + b)
        w = np.exp(rho + 1j * phi)
        return _mobius_m_inv(w)

    # ---- MapExpr interface ------------------------------------------------

    def _chart0(self, values, charts):
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(charts, 1.0 / np.where(values == 0, np.nan, values), values)
        return z

    def apply(self, values, charts):
        z = self._chart0(values, charts)
        finite = np.isfinite(z)
        out = np.empty_like(values)
        in_d = finite & self._in_disk(np.where(finite, z, 0.0))
        in_fd = finite & self._in_mirror(np.where(finite, z, 0.0))
        mid = ~(in_d | in_fd)
        if np.any(in_d):
            out[in_d] = 8.0 * (z[in_d] - 1.5)
        if np.any(in_fd):
            zz = z[in_fd]
            at_center = zz == -1.5
            safe = np.where(at_center, 1.0, zz + 1.5)
            w = np.where(at_center, np.inf, -1.0 / safe)
            out[in_fd] = w
        if np.any(mid):
            zmid = np.where(finite, z, 0.0)[mid]
            # the point at infinity belongs to the middle region, w = 1
            w_in = np.where(finite[mid], _mobius_m(zmid), 1.0)
            out[mid] = self._middle_from_pencil(w_in)
        # pack into charts (infinity came out of the mirror-disk center)
        inf_mask = ~np.isfinite(out)
        res_v = np.where(inf_mask, 0.0, out)
        res_c = np.zeros(values.shape, dtype=bool) | inf_mask
        big = np.abs(res_v) > 1.0
        res_v = np.where(big & ~inf_mask, 1.0 / np.where(big, res_v, 1.0), res_v)
        res_c = res_c | big
        return res_v, res_c

    def apply_inverse(self, values, charts):
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(charts, 1.0 / np.where(values == 0, np.nan, values), values)
        is_inf = ~np.isfinite(u)
        r = np.abs(np.where(is_inf, 0.0, u))
        out = np.empty_like(values)
        inner = ~is_inf & (r <= 2.0)
        outer = is_inf | (r >= 4.0)
        mid = ~(inner | outer)
        if np.any(inner):
            out[inner] = u[inner] / 8.0 + 1.5
        if np.any(outer):
            uu = np.where(is_inf, np.inf, u)[outer]
            with np.errstate(divide="ignore"):
                out[outer] = np.where(np.isfinite(uu), -1.0 / uu - 1.5, -1.5)
        if np.any(mid):
            out[mid] = self._inverse_middle(u[mid])
        big = np.abs(out) > 1.0
        res_v = np.where(big, 1.0 / np.where(big, out, 1.0), out)
        return _normalize(res_v, big)

    def continuity_gap(self, samples: int = 720) -> float:
        """Largest seam mismatch between the region formulas (self-check)."""
        phis = np.linspace(-math.pi, math.pi, samples, endpoint=False)
        gap = 0.0
        for inner, center, radius in ((True, 1.5, 0.25), (False, -1.5, 0.25)):
            ring = center + radius * np.exp(1j * phis)
            # nudge outward into the middle region along the pencil
            w = _mobius_m(ring)
            scale = math.exp(1e-9) if inner else math.exp(-1e-9)
            z_mid = _mobius_m_inv(w * scale)
            a_v, a_c = self.apply(ring.astype(complex), np.zeros(samples, dtype=bool))
            b_v, b_c = self.apply(z_mid.astype(complex), np.zeros(samples, dtype=bool))
            gap = max(gap, float(np.max(sphere_distance(a_v, a_c, b_v, b_c))))
        return gap


def build_Z(gap_bound: float = 1e-6) -> ZMap:
    z = ZMap()
    gap = z.continuity_gap()
    if gap > gap_bound:
        raise ContinuityGap(gap, gap_bound)
    return z


# ---------------------------------------------------------------------------
# Generators and certificates
# ---------------------------------------------------------------------------


def zeta_factory_from_Z(zmap: ZMap):
    """The disk family used by the wreath layer: the minus rotation factor
    conjugated through Z, supported in the reference disk."""

    def factory(t: float) -> MapExpr:
        return Compose([Inverse(zmap), RotMinus(t), zmap])

    return factory


@dataclass
class S2GeneratorSet:
    schedule: RotationSchedule
    profiles: S2Profiles
    zmap: ZMap
    f_coeff: CoeffMap
    table: dict[int, MapExpr] = field(default_factory=dict)

    @property
    def alphabet(self) -> GeneratorAlphabet:
        return S2_ALPHABET


def build_s2_generators(schedule: RotationSchedule) -> S2GeneratorSet:
    profiles = build_profiles()
    zmap = build_Z()
    f_coeff = CoeffMap.from_dict({(i, 0): e.angle for i, e in enumerate(schedule.entries)})
    params = RealizationParams(zeta_factory=zeta_factory_from_Z(zmap))
    table = {
        _F_IDX: WreathCoeffNode(f_coeff, params),
        _T_IDX: Scale(2.0),
        _FF_IDX: FMap(),
        _Z_IDX: zmap,
        _M1: LongMap(profiles.m1),
        _M2: LongMap(profiles.m2),
        _M3: LongMap(profiles.m3),
    }
    return S2GeneratorSet(schedule, profiles, zmap, f_coeff, table)


def _h_letters(i: int) -> tuple[int, ...]:
    """Word for the column-i piece: Z T^-i f T^i F^-1 T^-i f^-1 T^i F Z^-1."""
    t_pow = (_T_IDX,) * i
    t_neg = (-_T_IDX,) * i
    return (
        (_Z_IDX,)
        + t_neg + (_F_IDX,) + t_pow
        + (-_FF_IDX,)
        + t_neg + (-_F_IDX,) + t_pow
        + (_FF_IDX, -_Z_IDX)
    )


def s2_word_letters(i: int) -> tuple[int, ...]:
    """h_i  (h_i)^{M1}  (h_i)^{M2}  ((h_i)^{M3})^{-1}: 16 i + 30 letters."""
    h = _h_letters(i)
    h_inv = tuple(-l for l in reversed(h))
    out = h
    out += (-_M1,) + h + (_M1,)
    out += (-_M2,) + h + (_M2,)
    out += (-_M3,) + h_inv + (_M3,)
    return out


def emit_s2_certificate(gens: S2GeneratorSet, i: int) -> CertificateEntry:
    entry = gens.schedule.entries[i]
    word = GroupWord(s2_word_letters(i))
    return CertificateEntry(
        index=i,
        length_bound=len(word),
        exponent=2 * entry.exponent,
        word=word,
        target={"rotation_angle": 2.0 * entry.angle,
                "angle_error_bound": 2.0 * entry.error_bound},
    )


def emit_s2_certificates(gens: S2GeneratorSet, indices=None, growth: GrowthFunction | None = None) -> DistortionCertificate:
    if indices is None:
        indices = range(len(gens.schedule.entries))
    entries = [emit_s2_certificate(gens, i) for i in indices]
    threshold = None
    if growth is not None:
        threshold = 0
        for e in entries:
            if e.exponent <= growth(e.length_bound):
                threshold = e.index + 1
    return DistortionCertificate(
        alphabet=S2_ALPHABET,
        base=f"rotation({gens.schedule.theta.label()})",
        entries=entries,
        growth={"description": gens.schedule.growth, "threshold": threshold},
        metadata={
            "schedule": {
                "theta": gens.schedule.theta.label(),
                "entries": [
                    {"i": e.index, "n_i": str(e.exponent), "t_i": e.angle,
                     "err_bound": e.error_bound, "cf_index": e.cf_index}
                    for e in gens.schedule.entries
                ],
            },
            "letter_slope": 16,
            "letter_offset": 30,
        },
    )


def verify_s2_certificate(
    gens: S2GeneratorSet,
    cert: DistortionCertificate,
    samples: int = 10_000,
    tol: float = 1e-8,
    seed: int = 0,
    growth: GrowthFunction | None = None,
) -> dict:
    """Evaluate every certified word against its target rotation.

    Passes when the sup spherical error is at most tol * (1 + word length)
    for each entry; records the growth-domination check when a target is
    supplied.  The verification block is written back into the certificate.
    """
    grid = fibonacci_sphere_grid(samples, seed)
    per_entry = []
    sup_all = 0.0
    passed = True
    for e in cert.entries:
        word_map = compose_word(e.word.letters, gens.table)
        target = Rotation(e.target["rotation_angle"])
        err = map_distance(word_map, target, grid)
        bound = tol * (1.0 + len(e.word))
        ok = err <= bound
        growth_ok = None
        if growth is not None:
            growth_ok = e.exponent > growth(len(e.word))
        per_entry.append({"i": e.index, "sup_error": err, "bound": bound,
                          "passed": ok, "growth_dominates": growth_ok})
        sup_all = max(sup_all, err)
        passed = passed and ok
    cert.verification = {
        "samples": samples,
        "sup_error": sup_all,
        "passed": passed,
        "tolerance": tol,
        "entries": per_entry,
    }
    if not passed:
        worst = max(per_entry, key=lambda d: d["sup_error"])
        raise VerificationFailed(worst["i"], worst["sup_error"],
                                 f"entry {worst['i']} exceeded tolerance")
    return cert.verification


# ---------------------------------------------------------------------------
# Cross-checks
# ---------------------------------------------------------------------------


def h_direct(gens: S2GeneratorSet, i: int) -> MapExpr:
    """The column-i piece as a latitude map: profile t_i * (1 - dip)."""
    t = gens.schedule.entries[i].angle
    return LatMap(t * gens.profiles.alpha)


def h_via_wreath(gens: S2GeneratorSet, i: int) -> MapExpr:
    """The same piece through the word expansion (wreath + bookkeeping)."""
    return compose_word(_h_letters(i), gens.table)
