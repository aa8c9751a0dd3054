"""Concrete matrix groups: certified operator-norm length functions, the
root-of-unity compressibility criterion for integer matrices, and the exact
affine-map oracle for the group with presentation <a, b | a b a^-1 = b^2>.

All the correctness-critical arithmetic is exact: matrices carry Fraction
entries, operator norms come from Sturm-sequence bisection on the exact
characteristic polynomial of the Gram matrix, and the cyclotomic test is
exact integer polynomial division.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import AxiomViolated, NotUnimodular, SingularMatrix
from .words import GeneratorAlphabet, GroupOracle, GroupWord

__all__ = [
    "RationalMatrix",
    "op_norm_length",
    "distorted_in_GL",
    "AffineDyadicMap",
    "bs_oracle",
    "bs_alphabet",
    "bs_power_certificate",
    "length_function_bound",
    "doubling_tower_certificate",
    "verify_doubling_tower_entry",
    "cyclotomic_polynomial",
]


# ---------------------------------------------------------------------------
# Exact matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalMatrix:
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        return cls(tuple(tuple(Fraction(x) for x in r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __mul__(self, other: "RationalMatrix") -> "RationalMatrix":
        n = self.n
        return RationalMatrix(
            tuple(
                tuple(sum(self.rows[i][k] * other.rows[k][j] for k in range(n)) for j in range(n))
                for i in range(n)
            )
        )

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(tuple(zip(*self.rows)))

    def det(self) -> Fraction:
        # fraction-free Gaussian elimination is overkill at these sizes
        n = self.n
        rows = [list(r) for r in self.rows]
        det = Fraction(1)
        for col in range(n):
            pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != col:
                rows[col], rows[pivot] = rows[pivot], rows[col]
                det = -det
            det *= rows[col][col]
            inv = 1 / rows[col][col]
            for r in range(col + 1, n):
                factor = rows[r][col] * inv
                if factor:
                    rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
        return det

    def inverse(self) -> "RationalMatrix":
        n = self.n
        aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
            if pivot is None:
                raise SingularMatrix("matrix is singular")
            aug[col], aug[pivot] = aug[pivot], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [a * inv for a in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    factor = aug[r][col]
                    aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
        return RationalMatrix(tuple(tuple(row[n:]) for row in aug))

    def __pow__(self, k: int) -> "RationalMatrix":
        if k < 0:
            return self.inverse() ** (-k)
        out = RationalMatrix.identity(self.n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def char_poly(self) -> list[Fraction]:
        """Coefficients of det(xI - A), ascending, by Faddeev-LeVerrier."""
        n = self.n
        coeffs = [Fraction(0)] * (n + 1)
        coeffs[n] = Fraction(1)
        m = RationalMatrix.identity(n)
        c = Fraction(1)
        for k in range(1, n + 1):
            m = self * m
            tr = sum(m.rows[i][i] for i in range(n))
            c = -tr / k
            coeffs[n - k] = c
            m = RationalMatrix(
                tuple(
                    tuple(m.rows[i][j] + (c if i == j else 0) for j in range(n))
                    for i in range(n)
                )
            )
        return coeffs


# ---------------------------------------------------------------------------
# Sturm-sequence root isolation (exact)
# ---------------------------------------------------------------------------


def _poly_eval(p: list[Fraction], x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in reversed(p):
        out = out * x + c
    return out


def _poly_deriv(p: list[Fraction]) -> list[Fraction]:
    return [c * k for k, c in enumerate(p)][1:] or [Fraction(0)]


def _poly_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = a[:]
    while len(a) >= len(b) and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        factor = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= factor * c
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return a or [Fraction(0)]


def _sturm_chain(p: list[Fraction]) -> list[list[Fraction]]:
    chain = [p, _poly_deriv(p)]
    while len(chain[-1]) > 1 or chain[-1][0] != 0:
        rem = _poly_rem(chain[-2], chain[-1])
        if rem == [Fraction(0)]:
            break
        chain.append([-c for c in rem])
    return chain


def _sign_changes(chain: list[list[Fraction]], x: Fraction) -> int:
    signs = []
    for p in chain:
        v = _poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _roots_in(chain, lo: Fraction, hi: Fraction) -> int:
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


def _extreme_root(p: list[Fraction], largest: bool, rel_tol: Fraction) -> Fraction:
    """Largest (or smallest) real root of p, certified by Sturm bisection.

    The bracket is narrowed until its width is small relative to the root
    itself, so logarithms of the result carry the advertised accuracy.
    """
    chain = _sturm_chain(p)
    bound = Fraction(1) + max(abs(c) / abs(p[-1]) for c in p[:-1])  # Cauchy bound
    lo, hi = -bound, bound
    total = _roots_in(chain, lo, hi)
    if total == 0:
        raise SingularMatrix("polynomial has no real roots in the Cauchy bound")

    def step(lo, hi):
        mid = (lo + hi) / 2
        if largest:
            return (mid, hi) if _roots_in(chain, mid, hi) >= 1 else (lo, mid)
        return (lo, mid) if _roots_in(chain, lo, mid) >= 1 else (mid, hi)

    for _ in range(300):
        mid = (lo + hi) / 2
        if hi - lo <= rel_tol * max(abs(lo), abs(hi)):
            break
        lo, hi = step(lo, hi)
    return (lo + hi) / 2


def op_norm_length(a: RationalMatrix, tol: float = 1e-12) -> float:
    """log of the larger of the operator norms of A and A^-1.

    The two extreme eigenvalues of the exact Gram matrix A^T A are isolated
    by Sturm bisection to relative width ``tol``; the operator norms are
    their square roots.  Symmetric, subadditive, and 0 on the identity.
    """
    if a.det() == 0:
        raise SingularMatrix("op_norm_length needs an invertible matrix")
    gram = a.transpose() * a
    p = gram.char_poly()
    rel = Fraction(tol).limit_denominator(10 ** 18)
    lam_max = _extreme_root(p, largest=True, rel_tol=rel)
    lam_min = _extreme_root(p, largest=False, rel_tol=rel)
    if lam_min <= 0:
        # eigenvalues of a positive definite Gram matrix are positive; a
        # nonpositive enclosure can only be bisection width around zero
        raise SingularMatrix("Gram matrix enclosure touched zero")
    norm_a = 0.5 * math.log(float(lam_max))
    norm_ainv = -0.5 * math.log(float(lam_min))
    return max(norm_a, norm_ainv, 0.0)


# ---------------------------------------------------------------------------
# Cyclotomic criterion
# ---------------------------------------------------------------------------

_cyclotomic_cache: dict[int, list[int]] = {}


def _int_poly_divmod(a: list[int], b: list[int]) -> tuple[list[int], list[int]] | None:
    """Exact division of integer polynomials; None if any step is inexact."""
    a = a[:]
    q = [0] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        if a[-1] % b[-1] != 0:
            return None
        factor = a[-1] // b[-1]
        shift = len(a) - len(b)
        q[shift] = factor
        for i, c in enumerate(b):
            a[shift + i] -= factor * c
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return q, (a or [0])


def cyclotomic_polynomial(k: int) -> list[int]:
    """Integer coefficients of the k-th cyclotomic polynomial, ascending."""
    if k in _cyclotomic_cache:
        return _cyclotomic_cache[k]
    # divide x^k - 1 by the cyclotomic polynomials of the proper divisors
    poly = [0] * (k + 1)
    poly[0], poly[k] = -1, 1
    for d in range(1, k):
        if k % d == 0:
            q, r = _int_poly_divmod(poly, cyclotomic_polynomial(d))
            assert r == [0], "cyclotomic recursion must divide exactly"
            poly = q
    _cyclotomic_cache[k] = poly
    return poly


def _totient(k: int) -> int:
    out, n, p = 1, k, 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out *= (p - 1) * p ** (e - 1)
        p += 1
    if n > 1:
        out *= n - 1
    return out


def distorted_in_GL(a: RationalMatrix) -> bool:
    """True iff the integer unimodular matrix is compressible in GL(n, C),
    i.e. its characteristic polynomial is a product of cyclotomic polynomials
    (equivalently: every eigenvalue is a root of unity).

    Exact: repeated integer polynomial division against all cyclotomic
    polynomials of degree at most n.
    """
    n = a.n
    ints = []
    for row in a.rows:
        for x in row:
            if x.denominator != 1:
                raise NotUnimodular("matrix entries must be integers")
            ints.append(int(x))
    d = a.det()
    if abs(d) != 1:
        raise NotUnimodular(f"determinant {d} is not +-1")
    poly = [int(c) for c in a.char_poly()]
    candidates = [k for k in range(1, 4 * n * n + 10) if _totient(k) <= n]
    remaining = poly
    while len(remaining) > 1:
        for k in candidates:
            cyc = cyclotomic_polynomial(k)
            if len(cyc) > len(remaining):
                continue
            res = _int_poly_divmod(remaining, cyc)
            if res is not None and res[1] == [0]:
                remaining = res[0]
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# The affine-map oracle for <a, b | a b a^-1 = b^2>
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineDyadicMap:
    """x -> 2^scale_exp * x + offset with a dyadic rational offset."""

    scale_exp: int
    offset: Fraction

    def __post_init__(self):
        den = self.offset.denominator
        if den & (den - 1):
            raise ValueError("offset must be dyadic")

    @classmethod
    def identity(cls) -> "AffineDyadicMap":
        return cls(0, Fraction(0))

    def compose(self, other: "AffineDyadicMap") -> "AffineDyadicMap":
        """self o other: apply ``other`` first."""
        scale = Fraction(2) ** self.scale_exp
        return AffineDyadicMap(self.scale_exp + other.scale_exp, scale * other.offset + self.offset)

    def inverse(self) -> "AffineDyadicMap":
        scale = Fraction(2) ** (-self.scale_exp)
        return AffineDyadicMap(-self.scale_exp, -scale * self.offset)

    @property
    def key(self):
        return (self.scale_exp, self.offset)


_BS_GENS = {
    1: AffineDyadicMap(1, Fraction(0)),   # a: x -> 2x
    -1: AffineDyadicMap(-1, Fraction(0)),
    2: AffineDyadicMap(0, Fraction(1)),   # b: x -> x + 1
    -2: AffineDyadicMap(0, Fraction(-1)),
}


def bs_alphabet() -> GeneratorAlphabet:
    return GeneratorAlphabet(("a", "b"))


def _bs_canonical(w: GroupWord):
    m = AffineDyadicMap.identity()
    for letter in w.letters:
        m = m.compose(_BS_GENS[letter])
    return m.key


def bs_oracle() -> GroupOracle:
    """Exact oracle for <a, b | a b a^-1 = b^2> via its affine representation."""
    return GroupOracle(bs_alphabet(), name="bs(1,2)", canonical=_bs_canonical)


def bs_power_certificate(k_max: int):
    """Certificate words a^k b a^-k for b^(2^k), k = 0..k_max."""
    from .words import CertificateEntry, DistortionCertificate

    entries = []
    for k in range(0, k_max + 1):
        letters = (1,) * k + (2,) + (-1,) * k
        entries.append(
            CertificateEntry(
                index=k,
                length_bound=2 * k + 1,
                exponent=2 ** k,
                word=GroupWord(letters),
            )
        )
    return DistortionCertificate(
        alphabet=bs_alphabet(),
        base="b",
        entries=entries,
        growth={"description": "2^((n-1)/2)", "threshold": 0},
        metadata={"relation": "a b a^-1 = b^2"},
    )


# ---------------------------------------------------------------------------
# Length-function bounds
# ---------------------------------------------------------------------------


def length_function_bound(
    length_fn,
    generators: Sequence[RationalMatrix],
    h: RationalMatrix,
    n: int,
    validation_samples: int = 24,
    seed: int = 0,
    tol: float = 1e-9,
) -> float:
    """Word-length lower bound length(h^n) >= L(h^n) / max_s L(s).

    Validates the length-function axioms (identity, symmetry, subadditivity)
    on sampled products of the generators before trusting the bound.
    """
    ident = RationalMatrix.identity(h.n)
    if abs(length_fn(ident)) > tol:
        raise AxiomViolated("L(1) = 0", ident)
    rng = random.Random(seed)
    pool = list(generators) + [g.inverse() for g in generators]
    for _ in range(validation_samples):
        u = ident
        for _ in range(rng.randrange(1, 4)):
            u = u * rng.choice(pool)
        v = ident
        for _ in range(rng.randrange(1, 4)):
            v = v * rng.choice(pool)
        if abs(length_fn(u) - length_fn(u.inverse())) > tol:
            raise AxiomViolated("symmetry", u)
        if length_fn(u * v) > length_fn(u) + length_fn(v) + tol:
            raise AxiomViolated("subadditivity", (u, v))
    m = max(length_fn(g) for g in generators)
    if m == 0:
        return 0.0
    return length_fn(h ** n) / m


# ---------------------------------------------------------------------------
# Nested doubling tower (certificate emitter only)
# ---------------------------------------------------------------------------


def doubling_tower_certificate(k_max: int):
    """Words of length 4k+3 in <a, b, c> reaching the (2^(2^k))-th power of c.

    In the group with relations a b a^-1 = b^2 and b c b^-1 = c^2, the word
    (a^k b a^-k) c (a^k b^-1 a^-k) equals c^(2^(2^k)).  The group has no
    faithful exact matrix model here, so equality is certified by rewriting
    (see verify_doubling_tower_entry), not by an oracle.
    """
    from .words import CertificateEntry, DistortionCertificate

    entries = []
    for k in range(0, k_max + 1):
        letters = (1,) * k + (2,) + (-1,) * k + (3,) + (1,) * k + (-2,) + (-1,) * k
        entries.append(
            CertificateEntry(
                index=k,
                length_bound=4 * k + 3,
                exponent=2 ** (2 ** k),
                word=GroupWord(letters),
            )
        )
    return DistortionCertificate(
        alphabet=GeneratorAlphabet(("a", "b", "c")),
        base="c",
        entries=entries,
        growth={"description": "2^2^((n-3)/4)", "threshold": 0},
        metadata={"relations": ["a b a^-1 = b^2", "b c b^-1 = c^2"]},
    )


def verify_doubling_tower_entry(entry) -> dict:
    """Verify one tower word by exact big-integer rewriting.

    Steps: (i) the word has the shape W c W' with W = a^k b a^-k and
    W' = a^k b^-1 a^-k; (ii) by the first relation a^k b^e a^-k = b^(e 2^k);
    (iii) by the second, b^m c b^-m = c^(2^m).  Exponents are exact ints.
    """
    letters = entry.word.letters
    k = 0
    while k < len(letters) and letters[k] == 1:
        k += 1
    expected = (1,) * k + (2,) + (-1,) * k + (3,) + (1,) * k + (-2,) + (-1,) * k
    if letters != expected:
        return {"ok": False, "reason": "word shape mismatch", "k": k}
    m = 2 ** k            # a^k b a^-k  ->  b^(2^k)
    exponent = 2 ** m     # b^m c b^-m  ->  c^(2^m)
    ok = exponent == entry.exponent and len(letters) == 4 * k + 3
    return {
        "ok": ok,
        "k": k,
        "inner_exponent": m,
        "exponent": exponent,
        "rewrites": [f"a^{k} b a^-{k} -> b^{m}", f"b^{m} c b^-{m} -> c^{exponent}"],
    }
