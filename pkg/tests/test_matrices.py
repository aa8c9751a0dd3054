"""Exact matrix groups: certified norms, the cyclotomic criterion, the
affine model of the doubling relation, and the nested doubling tower."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from distortion_lab.errors import AxiomViolated, NotUnimodular, SingularMatrix
from distortion_lab.matrices import (
    AffineDyadicMap,
    RationalMatrix,
    bs_oracle,
    bs_power_certificate,
    cyclotomic_polynomial,
    distorted_in_GL,
    doubling_tower_certificate,
    length_function_bound,
    op_norm_length,
    verify_doubling_tower_entry,
)
from distortion_lab.words import certificate_check, oracle_checker, word


def mat(*rows):
    return RationalMatrix.from_rows(rows)


# ---------------------------------------------------------------------------
# operator-norm length function
# ---------------------------------------------------------------------------


def test_op_norm_identity_zero():
    assert op_norm_length(RationalMatrix.identity(2)) == pytest.approx(0.0, abs=1e-11)
    assert op_norm_length(RationalMatrix.identity(3)) == pytest.approx(0.0, abs=1e-11)


def test_op_norm_diagonal():
    a = mat([2, 0], [0, Fraction(1, 2)])
    assert op_norm_length(a) == pytest.approx(math.log(2.0), abs=1e-11)


def test_op_norm_rotation_like_is_zero():
    # an orthogonal integer matrix: the quarter turn
    a = mat([0, -1], [1, 0])
    assert op_norm_length(a) == pytest.approx(0.0, abs=1e-11)


def test_op_norm_symmetric_in_inverse():
    rng = random.Random(0)
    for _ in range(25):
        a = _random_unimodular(rng, 2)
        assert op_norm_length(a) == pytest.approx(op_norm_length(a.inverse()), abs=1e-9)


def test_op_norm_singular_rejected():
    with pytest.raises(SingularMatrix):
        op_norm_length(mat([1, 1], [1, 1]))


def _random_unimodular(rng, n):
    """Random products of elementary shears: determinant exactly one."""
    m = RationalMatrix.identity(n)
    for _ in range(rng.randrange(2, 6)):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = rng.randrange(-2, 3)
        shear = [[Fraction(int(r == s) + (c if (r, s) == (i, j) else 0))
                  for s in range(n)] for r in range(n)]
        m = m * RationalMatrix(tuple(tuple(row) for row in shear))
    return m


@pytest.mark.parametrize("n,pairs", [(2, 400), (3, 60)])
def test_op_norm_axioms_on_random_pairs(n, pairs):
    """Identity, symmetry, and subadditivity of the certified norm."""
    rng = random.Random(42 + n)
    for _ in range(pairs):
        a = _random_unimodular(rng, n)
        b = _random_unimodular(rng, n)
        la, lb, lab = op_norm_length(a), op_norm_length(b), op_norm_length(a * b)
        assert lab <= la + lb + 1e-9
        assert la >= -1e-12


# ---------------------------------------------------------------------------
# cyclotomic criterion
# ---------------------------------------------------------------------------


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(1) == [-1, 1]
    assert cyclotomic_polynomial(2) == [1, 1]
    assert cyclotomic_polynomial(4) == [1, 0, 1]
    assert cyclotomic_polynomial(6) == [1, -1, 1]
    assert cyclotomic_polynomial(12) == [1, 0, -1, 0, 1]


def test_distorted_identity_and_quarter_turn():
    assert distorted_in_GL(RationalMatrix.identity(2)) is True
    assert distorted_in_GL(mat([0, -1], [1, 0])) is True


def test_undistorted_hyperbolic():
    assert distorted_in_GL(mat([2, 1], [1, 1])) is False


def test_unipotent_is_undistorted_by_criterion():
    # eigenvalue 1 with a nontrivial Jordan block: the characteristic
    # polynomial is cyclotomic even though the element has infinite order
    assert distorted_in_GL(mat([1, 1], [0, 1])) is True


def test_not_unimodular_rejected():
    with pytest.raises(NotUnimodular):
        distorted_in_GL(mat([2, 0], [0, 1]))
    with pytest.raises(NotUnimodular):
        distorted_in_GL(mat([Fraction(1, 2), 0], [0, 2]))


def _random_int_matrix(rng, n):
    while True:
        rows = [[rng.randrange(-3, 4) for _ in range(n)] for _ in range(n)]
        m = RationalMatrix.from_rows(rows)
        if abs(m.det()) == 1:
            return m


def _square_free_int_poly(coeffs):
    """p / gcd(p, p'): repeated roots would wreck the float root finder."""
    from distortion_lab.matrices import _poly_rem

    a = [Fraction(c) for c in coeffs]
    b = [c * k for k, c in enumerate(a)][1:]
    while b and any(b):
        a, b = b, _poly_rem(a, b)
        if b == [Fraction(0)]:
            break
    gcd = a
    if len(gcd) <= 1:
        return [Fraction(c) for c in coeffs]
    # divide out the gcd
    num = [Fraction(c) for c in coeffs]
    q = [Fraction(0)] * (len(num) - len(gcd) + 1)
    while len(num) >= len(gcd) and any(num):
        if num[-1] == 0:
            num.pop()
            continue
        f = num[-1] / gcd[-1]
        q[len(num) - len(gcd)] = f
        for i, c in enumerate(gcd):
            num[len(num) - len(gcd) + i] -= f * c
        num.pop()
    return q


@pytest.mark.parametrize("n,count", [(2, 300), (3, 120)])
def test_criterion_agrees_with_float_spectrum(n, count):
    """The exact division test against the high-precision eigenvalue oracle.

    The oracle takes roots of the square-free part (repeated roots degrade
    float eigenvalue accuracy far past the decision threshold).
    """
    rng = random.Random(5 + n)
    for _ in range(count):
        m = _random_int_matrix(rng, n)
        sq = _square_free_int_poly(m.char_poly())
        roots = np.roots([float(c) for c in sq[::-1]])
        moduli = np.abs(roots)
        on_circle = bool(np.all(np.abs(moduli - 1.0) < 1e-10))
        decisive_off = bool(np.any(np.abs(moduli - 1.0) > 1e-10))
        verdict = distorted_in_GL(m)
        if on_circle:
            # integer monic polynomials with all roots on the unit circle
            # must be cyclotomic products, so the verdicts must agree
            assert verdict is True
        if decisive_off:
            assert verdict is False


# ---------------------------------------------------------------------------
# affine model of the doubling relation
# ---------------------------------------------------------------------------


def test_affine_dyadic_composition():
    a = AffineDyadicMap(1, Fraction(0))
    b = AffineDyadicMap(0, Fraction(1))
    ainv = a.inverse()
    rel = a.compose(b).compose(ainv)
    assert rel.key == b.compose(b).key  # the defining relation


def test_affine_dyadic_rejects_non_dyadic():
    with pytest.raises(ValueError):
        AffineDyadicMap(0, Fraction(1, 3))


def test_bs_oracle_relation_and_powers():
    oracle = bs_oracle()
    assert oracle.equal(word(1, 2, -1), word(2) ** 2)
    assert not oracle.equal(word(1), word(2))
    k = 10
    lhs = _conjugated_power_word(k)
    assert oracle.equal(lhs, word(2) ** (2 ** k))


def _conjugated_power_word(k):
    from distortion_lab.words import GroupWord

    return GroupWord((1,) * k + (2,) + (-1,) * k)


def test_bs_certificate_lengths_and_check():
    cert = bs_power_certificate(10)
    assert [len(e.word) for e in cert.entries] == [2 * k + 1 for k in range(11)]
    assert [e.exponent for e in cert.entries] == [2 ** k for k in range(11)]
    report = certificate_check(cert, oracle_checker(bs_oracle(), word(2)))
    assert report.passed


# ---------------------------------------------------------------------------
# length-function bound
# ---------------------------------------------------------------------------


def test_length_bound_expanding_matrix_linear():
    h = mat([2, 0], [0, Fraction(1, 2)])
    gens = [h, mat([1, 1], [0, 1])]
    bound = length_function_bound(op_norm_length, gens, h, 6)
    # the norm of the 6th power is 6 log 2; the largest generator norm is log 2
    assert bound == pytest.approx(6.0, rel=1e-6)


def test_length_bound_orthogonal_is_zero():
    h = mat([0, -1], [1, 0])
    gens = [mat([2, 0], [0, Fraction(1, 2)])]
    assert length_function_bound(op_norm_length, gens, h, 5) == pytest.approx(0.0, abs=1e-9)


def test_length_bound_unipotent_sublinear():
    h = mat([1, 1], [0, 1])
    gens = [h, mat([2, 0], [0, Fraction(1, 2)])]
    b20 = length_function_bound(op_norm_length, gens, h, 20)
    b200 = length_function_bound(op_norm_length, gens, h, 200)
    assert b200 / 200 < b20 / 20  # per-power cost decays: sublinear growth
    assert b200 < 0.2 * 200


def test_length_bound_validates_axioms():
    bogus = lambda m: -1.0 if m.rows != RationalMatrix.identity(2).rows else 0.0
    with pytest.raises(AxiomViolated):
        length_function_bound(bogus, [mat([2, 0], [0, Fraction(1, 2)])],
                              mat([2, 0], [0, Fraction(1, 2)]), 3)


# ---------------------------------------------------------------------------
# nested doubling tower
# ---------------------------------------------------------------------------


def test_tower_certificate_lengths():
    cert = doubling_tower_certificate(6)
    assert [len(e.word) for e in cert.entries] == [4 * k + 3 for k in range(7)]
    assert [e.exponent for e in cert.entries] == [2 ** (2 ** k) for k in range(7)]


def test_tower_rewriting_verification():
    cert = doubling_tower_certificate(8)
    for e in cert.entries:
        rec = verify_doubling_tower_entry(e)
        assert rec["ok"], rec
        assert rec["inner_exponent"] == 2 ** rec["k"]


def test_tower_detects_mutation():
    cert = doubling_tower_certificate(3)
    e = cert.entries[2]
    from distortion_lab.words import CertificateEntry, GroupWord

    mutated = CertificateEntry(e.index, e.length_bound, e.exponent,
                               GroupWord(e.word.letters[:-1]))
    assert not verify_doubling_tower_entry(mutated)["ok"]
