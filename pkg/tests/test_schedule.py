"""Exponent schedules: convergent arithmetic, residue enclosures, decay."""

import math

import pytest

from distortion_lab.schedule import (
    decay_table,
    make_schedule,
    parse_theta,
    _convergent,
)
from distortion_lab.words import GrowthFunction

GOLDEN = parse_theta("cf:golden")
QUAD = GrowthFunction.parse("quadratic")


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def test_parse_forms():
    assert parse_theta("rat:3/4").p == 3
    assert parse_theta("rat:3/4").q == 4
    assert GOLDEN.cf_head == (0,)
    assert GOLDEN.cf_period == (1,)
    sqrt2ish = parse_theta("cf:0,(2)")
    assert sqrt2ish.cf_term(5) == 2
    # a finite continued fraction collapses to the exact rational
    fin = parse_theta("cf:0,2,3")
    assert fin.kind == "rational"
    assert (fin.p, fin.q) == (3, 7)
    with pytest.raises(ValueError):
        parse_theta("nonsense")


def test_golden_convergents_are_consecutive_fibonacci():
    for k in range(1, 20):
        p, q = _convergent(GOLDEN, k)
        assert q == fib(k + 1)
        assert p == fib(k)


def test_schedule_exponents_fibonacci_and_dominating():
    sch = make_schedule(GOLDEN, QUAD, 9)
    fibs = {fib(n) for n in range(1, 400)}
    for e in sch.entries:
        assert e.exponent in fibs
        assert e.exponent >= QUAD(e.index)
    exps = sch.exponents()
    assert all(b > a for a, b in zip(exps, exps[1:]))


def test_schedule_residues_match_angle():
    sch = make_schedule(GOLDEN, QUAD, 6)
    phi_conj = (math.sqrt(5.0) - 1.0) / 2.0
    two_pi = 2.0 * math.pi
    for e in sch.entries:
        direct = math.remainder(e.exponent * phi_conj, 1.0) * two_pi
        # float reference loses accuracy for huge exponents; compare loosely,
        # and only modulo a full turn (the first residue exceeds a half turn)
        if e.exponent < 10 ** 12:
            gap = abs(math.remainder(direct - e.angle, two_pi))
            # the float reference itself drifts by ~ exponent * ulp
            assert gap <= 8.0 * e.exponent * 2.0 ** -52 + 1e-12
        assert abs(e.angle) <= two_pi / fib(e.cf_index + 2) * 1.0000001


def test_schedule_error_bounds_positive_and_tiny():
    sch = make_schedule(GOLDEN, QUAD, 6)
    for e in sch.entries:
        assert 0.0 < e.error_bound < 1e-12 * max(1.0, abs(e.angle) * 1e6) + 1e-15


def test_schedule_sign_alternates_for_golden():
    sch = make_schedule(GOLDEN, QUAD, 6)
    signs = [math.copysign(1.0, e.angle) for e in sch.entries]
    assert all(a * b < 0 for a, b in zip(signs, signs[1:]))


def test_schedule_decay_dominates_every_exponential():
    sch = make_schedule(GOLDEN, QUAD, 9)
    table = decay_table(sch, r_max=10)
    for r, vals in table.items():
        for a, b in zip(vals[2:], vals[3:]):
            assert b < a, f"r={r}"


def test_schedule_gauss_domination():
    # |t_i| <= 2^(-i^2) once the index passes the startup rows
    sch = make_schedule(GOLDEN, QUAD, 9)
    for e in sch.entries[1:]:
        assert abs(e.angle) <= 2.0 ** (-(e.index ** 2))


def test_rational_schedule_torsion():
    sch = make_schedule(parse_theta("rat:1/2"), QUAD, 6)
    assert all(e.angle == 0.0 for e in sch.entries)
    assert all(e.exponent % 2 == 0 for e in sch.entries)
    exps = sch.exponents()
    assert all(b > a for a, b in zip(exps, exps[1:]))


def test_k_min_offset_shrinks_first_residue():
    sch = make_schedule(GOLDEN, QUAD, 3, k_min=19)
    assert abs(sch.entries[0].angle) < 1e-3


def test_growth_target_respected_for_steep_growth():
    sch = make_schedule(GOLDEN, GrowthFunction.parse("exp"), 5)
    for e in sch.entries:
        assert e.exponent >= 2 ** e.index
