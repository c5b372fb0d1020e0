"""Periodic grids, discrete Fourier transforms, and Sobolev norms.

Conventions used throughout the package:

* a grid stores N values per axis (nodes x_j = a + j*h for j = 0..N-1);
  the periodic duplicate x_N = x_0 is implicit,
* forward transform coefficients carry a 1/N normalization per axis and
  are stored in FFT layout, i.e. frequency index l runs through
  [0, 1, ..., N/2-1, -N/2, ..., -1],
* the Sobolev norm of index s includes the domain-volume factor so that
  s = 0 agrees with the continuous L2 norm of the trigonometric
  interpolant.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInterval,
    OddPointCount,
    ShapeMismatch,
    UnsupportedDimension,
)


@dataclass(frozen=True)
class SobolevIndex:
    """Sobolev exponent; s = 0 is L2, s = 1 is H1."""

    s: float

    def __post_init__(self):
        if not (self.s >= 0.0):
            raise ValueError(f"Sobolev index must be >= 0, got {self.s}")


class Grid:
    """Uniform periodic grid on a product of intervals (1D or 2D).

    Attributes:
        axes: tuple of (a, b, n) per axis
        shape: point counts per axis
        h: mesh sizes per axis
        mu1: fundamental frequencies 2*pi/(b-a) per axis
        volume: product of interval lengths
        cell: product of mesh sizes
        mu2: |frequency|^2 array over the full coefficient layout
    """

    __slots__ = (
        "axes",
        "shape",
        "ndim",
        "h",
        "lengths",
        "volume",
        "cell",
        "mu1",
        "nodes_1d",
        "mu_1d",
        "freq_index_1d",
        "mu2",
        "size",
    )

    def __init__(self, axes):
        axes = tuple((float(a), float(b), int(n)) for a, b, n in axes)
        if not 1 <= len(axes) <= 2:
            raise UnsupportedDimension(
                f"got {len(axes)} axes, only 1D and 2D grids are supported"
            )
        for a, b, n in axes:
            if not b > a:
                raise DegenerateInterval(f"axis needs b > a, got [{a}, {b}]")
            if n % 2 != 0 or n < 4:
                raise OddPointCount(
                    f"point count must be an even integer >= 4, got {n}"
                )
        self.axes = axes
        self.ndim = len(axes)
        self.shape = tuple(n for _, _, n in axes)
        self.lengths = tuple(b - a for a, b, _ in axes)
        self.h = tuple((b - a) / n for a, b, n in axes)
        self.volume = float(np.prod(self.lengths))
        self.cell = float(np.prod(self.h))
        self.mu1 = tuple(2.0 * np.pi / length for length in self.lengths)
        self.size = int(np.prod(self.shape))
        self.nodes_1d = tuple(
            a + h * np.arange(n) for (a, _, n), h in zip(axes, self.h)
        )
        self.mu_1d = tuple(
            2.0 * np.pi * np.fft.fftfreq(n, d=h) for (_, _, n), h in zip(axes, self.h)
        )
        self.freq_index_1d = tuple(
            (np.fft.fftfreq(n) * n).astype(np.int64) for n in self.shape
        )
        mu2 = np.zeros(self.shape)
        for axis, mu in enumerate(self.mu_1d):
            expand = [None] * self.ndim
            expand[axis] = slice(None)
            mu2 = mu2 + (mu ** 2)[tuple(expand)]
        self.mu2 = mu2

    def meshes(self, dtype=np.float64):
        """Node coordinate arrays (one per axis), broadcast to the grid shape."""
        nodes = [
            (np.asarray(a, dtype=dtype) + np.asarray(h, dtype=dtype) * np.arange(n, dtype=dtype))
            for (a, _, n), h in zip(self.axes, self.h)
        ]
        return np.meshgrid(*nodes, indexing="ij")

    def sobolev_weight(self, s):
        return (1.0 + self.mu2) ** float(s)

    def refined(self, shape):
        """Same domain with new per-axis point counts."""
        if np.isscalar(shape):
            shape = (int(shape),) * self.ndim
        if len(shape) != self.ndim:
            raise UnsupportedDimension(
                f"refinement needs {self.ndim} point counts, got {len(shape)}"
            )
        return Grid([(a, b, n) for (a, b, _), n in zip(self.axes, shape)])

    def __eq__(self, other):
        return isinstance(other, Grid) and self.axes == other.axes

    def __hash__(self):
        return hash(self.axes)

    def __repr__(self):
        spec = ", ".join(f"[{a:g}, {b:g}] n={n}" for a, b, n in self.axes)
        return f"Grid({spec})"


def make_grid(axes):
    """Build a Grid from [(a, b, n), ...] or a single (a, b, n) triple."""
    if len(axes) == 3 and np.isscalar(axes[0]):
        axes = [axes]
    return Grid(axes)


def _check_shape(grid, arr, what):
    arr = np.asarray(arr)
    if arr.shape != grid.shape:
        raise ShapeMismatch(
            f"{what} shape {arr.shape} does not match grid shape {grid.shape}"
        )
    return arr


def dft_forward(grid, values):
    """Nodal values -> coefficients with the 1/N-per-axis normalization."""
    values = _check_shape(grid, values, "values")
    return np.fft.fftn(values) / grid.size


def dft_inverse(grid, coeffs):
    """Coefficients -> nodal values (exact inverse of dft_forward)."""
    coeffs = _check_shape(grid, coeffs, "coefficients")
    return np.fft.ifftn(coeffs) * grid.size


def projection_mask(grid, n0):
    """Boolean mask keeping frequency indices inside T_{n0} = [-n0/2, n0/2)."""
    n0 = int(n0)
    if n0 % 2 != 0 or n0 <= 0:
        raise OddPointCount(f"cutoff must be a positive even integer, got {n0}")
    mask = np.ones(grid.shape, dtype=bool)
    for axis, idx in enumerate(grid.freq_index_1d):
        keep = (idx >= -(n0 // 2)) & (idx <= n0 // 2 - 1)
        expand = [None] * grid.ndim
        expand[axis] = slice(None)
        mask &= keep[tuple(expand)]
    return mask


def project(grid, coeffs, n0):
    """Zero all coefficients with any frequency index outside T_{n0}."""
    coeffs = _check_shape(grid, coeffs, "coefficients")
    out = np.array(coeffs, copy=True)
    out[~projection_mask(grid, n0)] = 0.0
    return out


class SpectralField:
    """Complex field on a Grid with lazily linked nodal/spectral views.

    At least one representation must be supplied; the other is computed
    on demand and cached. Fields are treated as immutable: all flows and
    steps return new instances, which keeps the two views consistent.
    """

    __slots__ = ("grid", "_values", "_coeffs")

    def __init__(self, grid, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ValueError("SpectralField needs values or coeffs")
        self.grid = grid
        self._values = None
        self._coeffs = None
        if values is not None:
            self._values = _check_shape(grid, values, "values").astype(
                np.complex128, copy=False
            )
        if coeffs is not None:
            self._coeffs = _check_shape(grid, coeffs, "coefficients").astype(
                np.complex128, copy=False
            )

    @property
    def values(self):
        if self._values is None:
            self._values = dft_inverse(self.grid, self._coeffs)
        return self._values

    @property
    def coeffs(self):
        if self._coeffs is None:
            self._coeffs = dft_forward(self.grid, self._values)
        return self._coeffs

    @property
    def has_values(self):
        return self._values is not None

    @property
    def has_coeffs(self):
        return self._coeffs is not None

    def copy(self):
        return SpectralField(
            self.grid,
            values=None if self._values is None else self._values.copy(),
            coeffs=None if self._coeffs is None else self._coeffs.copy(),
        )

    def norm(self, s=0.0):
        return sobolev_norm(self, s)

    def __repr__(self):
        reps = [r for r, ok in (("values", self.has_values), ("coeffs", self.has_coeffs)) if ok]
        return f"SpectralField({self.grid!r}, {'+'.join(reps)})"


def sample_field(grid, fn):
    """Sample a callable at the grid nodes: values_j = fn(x_j[, y_j])."""
    values = np.asarray(fn(*grid.meshes()), dtype=np.complex128)
    return SpectralField(grid, values=_check_shape(grid, values, "sampled values"))


def sobolev_norm(field, s=0.0):
    """Equivalent H^s norm: sqrt(volume * sum (1+|mu|^2)^s |c_l|^2)."""
    if isinstance(s, SobolevIndex):
        s = s.s
    if not (s >= 0.0):
        raise ValueError(f"Sobolev index must be >= 0, got {s}")
    grid = field.grid
    c2 = np.abs(field.coeffs) ** 2
    if s != 0.0:
        c2 = c2 * grid.sobolev_weight(s)
    return float(np.sqrt(grid.volume * c2.sum()))


def l2_discrete_norm(field):
    """Discrete L2 norm sqrt(cell * sum |u_j|^2); equals sobolev_norm(u, 0)."""
    grid = field.grid
    return float(np.sqrt(grid.cell * (np.abs(field.values) ** 2).sum()))
