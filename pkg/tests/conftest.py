import math

import numpy as np
import pytest

import splitwave as sw
from splitwave.registry import initial_fn

TWO_PI = 2.0 * math.pi


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_field(grid, rng):
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return sw.SpectralField(grid, values=vals)


@pytest.fixture
def grid16():
    return sw.make_grid((0.0, TWO_PI, 16))


@pytest.fixture
def grid128():
    return sw.make_grid((0.0, TWO_PI, 128))


def case1_problem(n=128, eps=1.0):
    """[0,1], V = 5cos(2 pi x), psi0 = 5x^2(1-x)^2."""
    grid = sw.make_grid((0.0, 1.0, n))
    return sw.linear_problem(
        grid,
        sw.PotentialSpec.closed_form("5cos2pix"),
        eps,
        initial_fn("poly-bump"),
        label="case1",
    )


def case2_problem(n=128, eps=1.0):
    """[0,2 pi], V = sin x, psi0 = 2/(2+sin^2 x)."""
    grid = sw.make_grid((0.0, TWO_PI, n))
    return sw.linear_problem(
        grid,
        sw.PotentialSpec.closed_form("sinx"),
        eps,
        initial_fn("inv-sin2"),
        label="case2",
    )


def nlse_problem_1d(n=128, eps=0.5, sign=+1):
    grid = sw.make_grid((0.0, TWO_PI, n))
    return sw.nlse_problem(
        grid,
        sw.NonlinearitySpec(sign=sign),
        eps,
        initial_fn("inv-sin2"),
        label="nlse1d",
    )


def nlse_problem_2d(nx=16, ny=8, eps=0.5):
    grid = sw.make_grid([(0.0, math.pi, nx), (0.0, 1.0, ny)])
    return sw.nlse_problem(
        grid,
        sw.NonlinearitySpec(sign=+1),
        eps,
        initial_fn("inv-sin2-2d"),
        label="nlse2d",
    )
