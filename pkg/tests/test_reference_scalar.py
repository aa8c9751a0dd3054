"""Independent scalar references for the chart-aware engine.

The reference implementations below rebuild the primitive maps from their
defining formulas in plain complex arithmetic, without the chart machinery
or the shared bump helpers, and compare against the vectorized engine at
random points in both charts.  They guard the engine against silent
chart-bookkeeping regressions.
"""

import cmath
import math

import numpy as np

from distortion_lab.spheres import (
    FMap,
    Rotation,
    RotMinus,
    RotPlus,
    Scale,
    SpherePoint,
    sphere_distance,
)


def ref_mollifier(x: float) -> float:
    return math.exp(-1.0 / x) if x > 0 else 0.0


def ref_step(x: float) -> float:
    a, b = ref_mollifier(x), ref_mollifier(1.0 - x)
    return a / (a + b) if (a + b) else (0.0 if x <= 0 else 1.0)


def ref_bump(t: float) -> float:
    if t <= 0.0:
        return 0.0
    return ref_step((math.log2(t) + 1.0) / 2.0)


def ref_plug_angle(r: float) -> float:
    up = ref_step((r - 0.99) / 0.02)
    down = ref_step((2.01 - r) / 0.02)
    return math.pi * up * down


def ref_apply(kind: str, theta: float, z: complex) -> complex:
    r = abs(z)
    if kind == "rotation":
        return z * cmath.exp(1j * theta)
    if kind == "plus":
        return z * cmath.exp(1j * theta * ref_bump(r))
    if kind == "minus":
        return z * cmath.exp(1j * theta * (1.0 - ref_bump(r)))
    if kind == "scale":
        return z * theta
    if kind == "plug":
        return z * cmath.exp(1j * ref_plug_angle(r))
    raise ValueError(kind)


def engine_map(kind: str, theta: float):
    builders = {
        "rotation": Rotation,
        "plus": RotPlus,
        "minus": RotMinus,
        "scale": Scale,
        "plug": lambda _: FMap(),
    }
    return builders[kind](theta)


def test_primitives_match_scalar_reference():
    rng = np.random.default_rng(17)
    cases = [("rotation", 0.7), ("plus", 1.3), ("minus", -0.4),
             ("scale", 2.0), ("plug", 0.0)]
    for kind, theta in cases:
        m = engine_map(kind, theta)
        for _ in range(300):
            # points spread across both charts, including deep ones
            z = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
            if abs(z) < 1e-3:
                continue
            expected = ref_apply(kind, theta, z)
            got = m(SpherePoint.from_complex(z))
            ev, ec = np.array([expected if abs(expected) <= 1 else 1 / expected]), \
                np.array([abs(expected) > 1])
            d = sphere_distance(np.array([got.value]), np.array([bool(got.chart)]), ev, ec)
            assert d[0] <= 1e-12, (kind, z)


def test_reference_bump_complement():
    rng = np.random.default_rng(18)
    for _ in range(200):
        t = float(np.exp2(rng.uniform(-3, 3)))
        assert abs(ref_bump(t) + ref_bump(1.0 / t) - 1.0) <= 5e-16
