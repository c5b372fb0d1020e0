"""Named potentials and initial data usable from configs and code.

Every entry is a callable taking the grid's coordinate meshes (x in 1D,
x, y in 2D) and returning an array of matching shape. Entries accept
numpy arrays of any float dtype and preserve it, so potentials can be
evaluated in extended precision.
"""

import numpy as np

from .errors import ConfigError


def _poly_bump(x):
    return 5.0 * x ** 2 * (1.0 - x) ** 2


def _inv_sin2(x):
    return 2.0 / (2.0 + np.sin(x) ** 2)


def _inv_sin2_2d(x, y):
    return 1.0 / (1.0 + np.sin(2.0 * x) ** 2) + np.sin(2.0 * np.pi * y)


POTENTIALS = {
    "5cos2pix": lambda x: 5.0 * np.cos(2.0 * np.pi * x),
    "sinx": lambda x: np.sin(x),
    "zero": lambda *xs: np.zeros_like(xs[0]),
}

INITIAL_DATA = {
    "poly-bump": _poly_bump,
    "inv-sin2": _inv_sin2,
    "inv-sin2-2d": _inv_sin2_2d,
}


def potential_fn(name):
    try:
        return POTENTIALS[name]
    except KeyError:
        raise ConfigError(
            f"unknown potential {name!r}; known: {sorted(POTENTIALS)}"
        ) from None


def initial_fn(name):
    try:
        return INITIAL_DATA[name]
    except KeyError:
        raise ConfigError(
            f"unknown initial data {name!r}; known: {sorted(INITIAL_DATA)}"
        ) from None
