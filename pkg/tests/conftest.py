import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thinlayer import (BackgroundField, MaterialTriple, ThicknessProfile, kite, make_circle,
                       make_smooth_curve, solve_two_phase)

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


CONTRAST = ((1.0, 1.0), (3.0, 2.0), (5.0, 4.0))


@pytest.fixture(scope="session")
def materials():
    return MaterialTriple.from_pairs(*CONTRAST)


@functools.lru_cache(maxsize=None)
def circle(n=128, radius=1.0):
    return make_circle(radius, n)


@functools.lru_cache(maxsize=None)
def kite_curve(n=128):
    return make_smooth_curve(kite(), n, arclength=False)


@functools.lru_cache(maxsize=None)
def zeroth_solution(shape="circle", n=128):
    mats = MaterialTriple.from_pairs(*CONTRAST)
    curve = circle(n) if shape == "circle" else kite_curve(n)
    H = BackgroundField.linear([[1.0, 0.5], [0.5, -0.3]])
    return solve_two_phase(mats.background, mats.core, curve, H)


def cosine_profile(curve, amplitude=0.3):
    return ThicknessProfile(curve, 1.0, cos=(amplitude,))


def smooth_density(curve):
    t = curve.param
    return np.column_stack([np.cos(t) + 0.3 * np.sin(2 * t), 0.5 + np.sin(3 * t)])
