import pytest

from distortion_lab.schedule import make_schedule, parse_theta
from distortion_lab.words import GrowthFunction


@pytest.fixture(scope="session")
def golden_schedule():
    return make_schedule(parse_theta("cf:golden"), GrowthFunction.parse("quadratic"), 9)


@pytest.fixture(scope="session")
def golden_schedule_offset():
    # shifted start so every residue is small enough for arc factorization
    return make_schedule(parse_theta("cf:golden"), GrowthFunction.parse("quadratic"),
                         7, k_min=19)


@pytest.fixture(scope="session")
def rational_schedule():
    return make_schedule(parse_theta("rat:1/2"), GrowthFunction.parse("quadratic"), 6)
