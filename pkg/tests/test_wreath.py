"""Symbolic wreath layer: label action, group axioms, realization."""

import random

import numpy as np
import pytest

from distortion_lab.errors import ShapeViolation
from distortion_lab.spheres import (
    Compose,
    FMap,
    Scale,
    fibonacci_sphere_grid,
    map_distance,
    sphere_distance,
)
from distortion_lab.words import GroupWord
from distortion_lab.wreath import (
    DISK_CENTER,
    CoeffMap,
    RegularityClass,
    TailDescriptor,
    WreathElement,
    build_f_i,
    coset_action,
    realize,
    regularity_estimate,
    wreath_inv,
    wreath_mul,
)

GRID = fibonacci_sphere_grid(3000, 2)
T, F = 1, 2


def rand_word(rng, max_len=8):
    return GroupWord(tuple(rng.choice([T, -T, F, -F]) for _ in range(rng.randrange(0, max_len))))


# ---------------------------------------------------------------------------
# label action
# ---------------------------------------------------------------------------


def test_basic_label_moves():
    assert coset_action(GroupWord((T,)), (0, 0)) == (1, 0)
    assert coset_action(GroupWord((F,)), (1, 0)) == (1, 0)
    assert coset_action(GroupWord((F,)), (0, 0)) == (0, 1)
    assert coset_action(GroupWord((F, F)), (0, 0)) == (0, 0)


def test_label_action_is_an_action():
    rng = random.Random(0)
    for _ in range(60):
        u, v = rand_word(rng), rand_word(rng)
        label = (rng.randrange(-3, 4), rng.randrange(0, 2))
        assert coset_action(u * v, label) == coset_action(u, coset_action(v, label))


def _center_of(label):
    n, eps = label
    return DISK_CENTER * (2.0 ** n) * (-1.0 if eps else 1.0)


def test_label_action_matches_numeric_center_tracking():
    from distortion_lab.spheres import compose_word

    rng = random.Random(1)
    table = {T: Scale(2.0), F: FMap()}
    for _ in range(40):
        w = rand_word(rng, 20)
        label = (rng.randrange(-2, 3), rng.randrange(0, 2))
        predicted = coset_action(w, label)
        m = compose_word(w.letters, table)
        p = m(_center_of(label))
        assert abs(p.to_complex() - _center_of(predicted)) < 1e-9


# ---------------------------------------------------------------------------
# wreath algebra
# ---------------------------------------------------------------------------


def rand_coeff(rng):
    d = {}
    for _ in range(rng.randrange(0, 4)):
        d[(rng.randrange(-2, 3), rng.randrange(0, 2))] = rng.uniform(-1, 1)
    return CoeffMap.from_dict(d)


def rand_element(rng):
    return WreathElement(rand_word(rng, 5), rand_coeff(rng))


def test_identity_and_inverse():
    rng = random.Random(2)
    ident = WreathElement()
    for _ in range(40):
        x = rand_element(rng)
        assert wreath_mul(ident, x) == x
        assert wreath_mul(x, ident).coeff.as_dict() == pytest.approx(x.coeff.as_dict())
        xi = wreath_inv(x)
        prod = wreath_mul(x, xi)
        assert prod.g.is_identity
        assert all(abs(v) < 1e-12 for v in prod.coeff.as_dict().values())


def test_associativity_exact():
    rng = random.Random(3)
    for _ in range(300):
        x, y, z = rand_element(rng), rand_element(rng), rand_element(rng)
        a = wreath_mul(wreath_mul(x, y), z)
        b = wreath_mul(x, wreath_mul(y, z))
        assert a.g == b.g
        da, db = a.coeff.as_dict(), b.coeff.as_dict()
        assert set(da) == set(db)
        assert all(abs(da[k] - db[k]) < 1e-12 for k in da)


def test_pure_flip_conjugates_delta():
    delta = CoeffMap.from_dict({(0, 0): 1.0})
    x = WreathElement.from_coeff(delta)
    f = WreathElement.from_word(GroupWord((F,)))
    conj = wreath_mul(wreath_mul(wreath_inv(f), x), f)
    assert conj.g.is_identity
    assert conj.coeff.as_dict() == {(0, 1): 1.0}


def test_tail_pullback_consistency():
    tail = TailDescriptor("geometric", (1.0, 0.5), start=1)
    f = CoeffMap.from_dict({}, tail)
    shifted = f.pullback(GroupWord((T, T)))
    # (f^{T^2})(n, 0) = f(n + 2, 0)
    for n in range(-1, 6):
        assert shifted.value((n, 0)) == pytest.approx(f.value((n + 2, 0)))


# ---------------------------------------------------------------------------
# the difference element
# ---------------------------------------------------------------------------


def test_difference_element_formula():
    f = CoeffMap.from_dict({(i, 0): 0.1 * (i + 1) for i in range(6)})
    for i in (0, 2, 5):
        fi = build_f_i(f, i)
        t = 0.1 * (i + 1)
        assert fi.g.is_identity
        assert fi.coeff.as_dict() == pytest.approx({(0, 0): t, (0, 1): -t})


def test_difference_element_zero_value():
    f = CoeffMap.from_dict({(3, 0): 0.0, (1, 0): 0.5})
    fi = build_f_i(f, 3)
    assert fi.coeff.is_zero or all(v == 0.0 for v in fi.coeff.as_dict().values())


def test_difference_element_shape_checked():
    with pytest.raises(ShapeViolation):
        build_f_i(CoeffMap.from_dict({(-1, 0): 1.0}), 2)
    with pytest.raises(ShapeViolation):
        build_f_i(CoeffMap.from_dict({(1, 1): 1.0}), 2)


# ---------------------------------------------------------------------------
# realization
# ---------------------------------------------------------------------------


def test_realize_zero_is_identity():
    m = realize(WreathElement())
    values, charts = GRID
    w, d = m.apply(values.copy(), charts.copy())
    assert np.max(sphere_distance(values, charts, w, d)) == 0.0


def test_realize_delta_supported_in_disk():
    m = realize(WreathElement.from_coeff(CoeffMap.from_dict({(0, 0): 0.8})))
    values, charts = GRID
    w, d = m.apply(values.copy(), charts.copy())
    moved = sphere_distance(values, charts, w, d) > 1e-12
    with np.errstate(divide="ignore"):
        z = np.where(charts, 1.0 / values, values)
    inside = np.abs(z - 1.5) <= 0.25
    assert np.all(inside[moved])


def test_realize_homomorphism_numeric():
    rng = random.Random(4)
    for trial in range(12):
        x, y = rand_element(rng), rand_element(rng)
        lhs = realize(wreath_mul(x, y))
        rhs = Compose([realize(x), realize(y)])
        assert map_distance(lhs, rhs, GRID) <= 1e-9, trial


def test_realize_support_soundness():
    rng = random.Random(5)
    for _ in range(8):
        x = rand_element(rng)
        m = realize(x)
        values, charts = GRID
        w, d = m.apply(values.copy(), charts.copy())
        moved = sphere_distance(values, charts, w, d) > 1e-10
        with np.errstate(divide="ignore"):
            z = np.where(charts, 1.0 / values, values)
        in_some_disk = np.zeros(values.shape, dtype=bool)
        for (n, eps), v in x.coeff.finite:
            if v == 0.0:
                continue
            center = _center_of((n, eps))
            in_some_disk |= np.abs(z - center) <= 0.25 * 2.0 ** n + 1e-12
        g_support = ~x.g.is_identity
        if not g_support:
            assert np.all(in_some_disk[moved])


def test_realize_homomorphism_with_pipeline_family():
    # the same homomorphism check with the pipeline's conjugated disk family
    from distortion_lab.s2 import build_Z, zeta_factory_from_Z
    from distortion_lab.wreath import RealizationParams

    params = RealizationParams(zeta_factory=zeta_factory_from_Z(build_Z()))
    rng = random.Random(9)
    for _ in range(4):
        x, y = rand_element(rng), rand_element(rng)
        lhs = realize(wreath_mul(x, y), params)
        rhs = Compose([realize(x, params), realize(y, params)])
        assert map_distance(lhs, rhs, GRID) <= 1e-9


def test_realize_faithful_spot_check():
    x = WreathElement.from_coeff(CoeffMap.from_dict({(1, 0): 0.3}))
    m = realize(x)
    assert map_distance(m, realize(WreathElement()), GRID) > 1e-4


# ---------------------------------------------------------------------------
# regularity
# ---------------------------------------------------------------------------


def test_regularity_bounded_is_lipschitz():
    f = CoeffMap.from_dict({}, TailDescriptor("constant", (1.0,), start=1))
    assert regularity_estimate(f) == RegularityClass.LIPSCHITZ


def test_regularity_decaying_is_c1():
    f = CoeffMap.from_dict({}, TailDescriptor("harmonic", (1.0,), start=1))
    assert regularity_estimate(f) == RegularityClass.C1


def test_regularity_superexponential_is_smooth_candidate():
    f = CoeffMap.from_dict({}, TailDescriptor("gauss2", (1.0,), start=1))
    assert regularity_estimate(f) == RegularityClass.C_INFINITY_CANDIDATE


def test_regularity_growing_is_none():
    f = CoeffMap.from_dict({}, TailDescriptor("callable", (lambda k: 2.0 ** k,), start=1))
    assert regularity_estimate(f) == RegularityClass.NONE


def test_regularity_finite_support_smooth():
    f = CoeffMap.from_dict({(0, 0): 1.0, (3, 0): 2.0})
    assert regularity_estimate(f) == RegularityClass.C_INFINITY_CANDIDATE
