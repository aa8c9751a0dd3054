"""Serialization round-trips for map trees and wreath elements."""

import numpy as np
import pytest

from distortion_lab.errors import ConfigError
from distortion_lab.mapjson import (
    map_from_json,
    map_to_json,
    wreath_from_json,
    wreath_to_json,
)
from distortion_lab.spheres import (
    AngleProfile,
    Compose,
    FMap,
    Inverse,
    LatMap,
    LongMap,
    Mobius,
    RadialProfile,
    Rotation,
    RotMinus,
    RotPlus,
    Scale,
    fibonacci_sphere_grid,
    map_distance,
)
from distortion_lab.wreath import CoeffMap, TailDescriptor, WreathElement, realize
from distortion_lab.words import GroupWord

GRID = fibonacci_sphere_grid(1500, 0)


def test_map_tree_round_trip():
    tree = Compose([
        Rotation(0.3),
        Inverse(Scale(2.0)),
        RotPlus(0.2),
        RotMinus(-0.1),
        FMap(),
        LatMap(AngleProfile.const(0.1) + AngleProfile.bump(0.4, 2.0)),
        LongMap(RadialProfile.from_plateaus([(1.0, 2.0, -1.0)])),
        Mobius(90.0, -130.5, 0.0, 1.0),
    ])
    data = map_to_json(tree)
    back = map_from_json(data)
    assert map_distance(tree, back, GRID) == 0.0
    # json-compatible (plain types only)
    import json

    json.dumps(data)


def test_map_tree_with_precomposed_profile():
    prof = AngleProfile.bump(0.5, 1.0).precompose(
        RadialProfile.from_plateaus([(2.0, 7.0, -3.0)]))
    tree = LatMap(prof)
    back = map_from_json(map_to_json(tree))
    assert map_distance(tree, back, GRID) == 0.0


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        map_from_json({"kind": "teleporter"})


def test_wreath_round_trip():
    x = WreathElement(
        GroupWord((1, 1, 2, -1)),
        CoeffMap.from_dict({(0, 0): 0.25, (2, 1): -0.5},
                           TailDescriptor("geometric", (1.0, 0.5), start=3)),
    )
    data = wreath_to_json(x)
    assert data["g"] == [1, 1, 2, -1]
    assert [0, 0, 0.25] in data["coeff"]["finite"]
    back = wreath_from_json(data)
    assert back.g == x.g
    for n in range(-2, 8):
        for eps in (0, 1):
            assert back.coeff.value((n, eps)) == x.coeff.value((n, eps))
    assert map_distance(realize(x), realize(back), GRID) == 0.0


def test_wreath_callable_tail_not_serializable():
    x = WreathElement(GroupWord(), CoeffMap.from_dict(
        {}, TailDescriptor("callable", (lambda k: 0.0,))))
    with pytest.raises(ConfigError):
        wreath_to_json(x)


def test_sn_accepts_serialized_prefactored_inputs(tmp_path):
    import json

    from distortion_lab.reports import ExperimentConfig, run
    from distortion_lab.spheres import rot_factor

    rp, rm = rot_factor(0.25)
    maps = [{"h1": map_to_json(rm), "h2": map_to_json(rp),
             "h1_bound": 2.0, "h2_bound": 0.5}]
    cfg = ExperimentConfig.from_dict({
        "pipeline": "sn", "dim": 2, "samples": 600, "count": 2,
        "inputs": {"maps": maps},
        "out": str(tmp_path / "sn.json"), "figures": False,
    })
    report = run(cfg)
    assert report.passed
