"""JSON serialization for sphere map expressions and wreath elements.

Map expression trees serialize with one tag per node kind; profiles carry
their structural data (bump terms, plateau segments), so a deserialized
tree evaluates identically.  Only closed-form nodes round-trip; the lazy
pipeline nodes (suspensions, coefficient products) are reconstructed from
their own inputs instead.
"""

from __future__ import annotations

from .errors import ConfigError
from .spheres import (
    AngleProfile,
    Compose,
    FMap,
    Identity,
    Inverse,
    Inversion,
    LatMap,
    LongMap,
    MapExpr,
    Mobius,
    RadialProfile,
    Rotation,
    RotMinus,
    RotPlus,
    Scale,
    _AngleTerm,
    _Segment,
)
from .wreath import CoeffMap, TailDescriptor, WreathElement
from .words import GroupWord

__all__ = [
    "map_to_json",
    "map_from_json",
    "wreath_to_json",
    "wreath_from_json",
]


def _radial_to_json(p: RadialProfile) -> dict:
    if p.pure_scale_log2 is not None:
        return {"pure_scale_log2": p.pure_scale_log2}
    return {"segments": [
        {"x0": s.x0, "x1": s.x1, "off0": s.off0, "off1": s.off1, "kind": s.kind}
        for s in p.segments
    ]}


def _radial_from_json(data: dict) -> RadialProfile:
    if "pure_scale_log2" in data:
        return RadialProfile(pure_scale_log2=float(data["pure_scale_log2"]))
    segs = tuple(
        _Segment(float(s["x0"]), float(s["x1"]), float(s["off0"]),
                 float(s["off1"]), s["kind"])
        for s in data["segments"]
    )
    return RadialProfile(segments=segs)


def _angle_to_json(p: AngleProfile) -> dict:
    return {
        "constant": p.constant,
        "terms": [
            {"coeff": t.coeff, "log2_scale": t.log2_scale,
             **({"radial": _radial_to_json(t.radial)} if t.radial is not None else {})}
            for t in p.terms
        ],
    }


def _angle_from_json(data: dict) -> AngleProfile:
    terms = tuple(
        _AngleTerm(float(t["coeff"]), float(t["log2_scale"]),
                   _radial_from_json(t["radial"]) if "radial" in t else None)
        for t in data.get("terms", [])
    )
    return AngleProfile(float(data.get("constant", 0.0)), terms)


def map_to_json(m: MapExpr) -> dict:
    if isinstance(m, Identity):
        return {"kind": "identity"}
    if isinstance(m, Rotation):
        return {"kind": "rotation", "angle": m.theta}
    if isinstance(m, RotPlus):
        return {"kind": "rot_plus", "angle": m.theta}
    if isinstance(m, RotMinus):
        return {"kind": "rot_minus", "angle": m.theta}
    if isinstance(m, Scale):
        return {"kind": "scale", "factor": m.factor}
    if isinstance(m, FMap):
        return {"kind": "half_turn_plug"}
    if isinstance(m, Inversion):
        return {"kind": "inversion"}
    if isinstance(m, LatMap):
        return {"kind": "lat_map", "profile": _angle_to_json(m.profile)}
    if isinstance(m, LongMap):
        return {"kind": "long_map", "profile": _radial_to_json(m.profile)}
    if isinstance(m, Mobius):
        return {"kind": "mobius",
                "matrix": [[m.a.real, m.a.imag], [m.b.real, m.b.imag],
                           [m.c.real, m.c.imag], [m.d.real, m.d.imag]]}
    if isinstance(m, Compose):
        return {"kind": "compose", "maps": [map_to_json(x) for x in m.maps]}
    if isinstance(m, Inverse):
        return {"kind": "inverse", "map": map_to_json(m.inner)}
    raise ConfigError(f"map node {type(m).__name__} has no JSON form")


def map_from_json(data: dict) -> MapExpr:
    kind = data.get("kind")
    if kind == "identity":
        return Identity()
    if kind == "rotation":
        return Rotation(float(data["angle"]))
    if kind == "rot_plus":
        return RotPlus(float(data["angle"]))
    if kind == "rot_minus":
        return RotMinus(float(data["angle"]))
    if kind == "scale":
        return Scale(float(data["factor"]))
    if kind == "half_turn_plug":
        return FMap()
    if kind == "inversion":
        return Inversion()
    if kind == "lat_map":
        return LatMap(_angle_from_json(data["profile"]))
    if kind == "long_map":
        return LongMap(_radial_from_json(data["profile"]))
    if kind == "mobius":
        (ar, ai), (br, bi), (cr, ci), (dr, di) = data["matrix"]
        return Mobius(complex(ar, ai), complex(br, bi), complex(cr, ci), complex(dr, di))
    if kind == "compose":
        return Compose([map_from_json(x) for x in data["maps"]])
    if kind == "inverse":
        return Inverse(map_from_json(data["map"]))
    raise ConfigError(f"unknown map node kind {kind!r}")


# ---------------------------------------------------------------------------
# wreath elements
# ---------------------------------------------------------------------------

_TAIL_KINDS = ("constant", "harmonic", "geometric", "gauss2")


def wreath_to_json(x: WreathElement) -> dict:
    out = {
        "g": list(x.g.letters),
        "coeff": {"finite": [[n, eps, v] for (n, eps), v in x.coeff.finite]},
    }
    tail = x.coeff.tail
    if tail is not None:
        if tail.kind not in _TAIL_KINDS:
            raise ConfigError(f"tail kind {tail.kind!r} has no JSON form")
        out["coeff"]["tail"] = {
            "kind": tail.kind,
            "params": list(tail.params),
            "start": tail.start,
            "shift": tail.shift,
        }
    return out


def wreath_from_json(data: dict) -> WreathElement:
    g = GroupWord(tuple(int(l) for l in data.get("g", [])))
    coeff_data = data.get("coeff", {})
    finite = {(int(n), int(eps)): float(v) for n, eps, v in coeff_data.get("finite", [])}
    tail = None
    if "tail" in coeff_data:
        t = coeff_data["tail"]
        if t["kind"] not in _TAIL_KINDS:
            raise ConfigError(f"unknown tail kind {t['kind']!r}")
        tail = TailDescriptor(t["kind"], tuple(t.get("params", ())),
                              int(t.get("start", 1)), int(t.get("shift", 0)))
    return WreathElement(g, CoeffMap.from_dict(finite, tail))
