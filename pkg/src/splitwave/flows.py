"""Exact sub-flows of the split equations and the dense linear oracle.

The three sub-flows (free Schroedinger, potential phase, nonlinear
phase) are each exact solutions of their sub-problem and multiply the
field by unit-modulus factors, so every one of them conserves the
discrete L2 norm.
"""

from dataclasses import dataclass

import numpy as np

from . import registry
from .errors import (
    EigendecompositionFailure,
    OracleScaleExceeded,
    ShapeMismatch,
    UnsupportedDimension,
)
from .grid import SpectralField

DENSE_ORACLE_MAX_N = 64


def phase_table(theta, dtype=np.complex128):
    """exp(i*theta) elementwise, computed in extended precision.

    The cos/sin pair is evaluated in long double before narrowing, so a
    table entry deviates from unit modulus only by the final rounding.
    """
    th = np.asarray(theta, dtype=np.longdouble)
    tab = np.cos(th) + 1j * np.sin(th)
    return tab.astype(dtype, copy=False)


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Real potential, either a named closed form or tabulated nodal values."""

    kind: str  # "closed-form" | "tabulated"
    name: str = ""
    params: tuple = ()
    table: object = None

    def __post_init__(self):
        if self.kind not in ("closed-form", "tabulated"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "closed-form":
            registry.potential_fn(self.name)  # fail early on unknown names
        elif self.table is None:
            raise ValueError("tabulated potential needs nodal values")

    @classmethod
    def closed_form(cls, name, **params):
        return cls(kind="closed-form", name=name, params=tuple(sorted(params.items())))

    @classmethod
    def tabulated(cls, values):
        values = np.asarray(values)
        if np.iscomplexobj(values):
            raise ValueError("potential values must be real")
        return cls(kind="tabulated", table=values)

    @classmethod
    def zero(cls):
        return cls.closed_form("zero")

    def sample(self, grid, dtype=np.float64):
        """Nodal values V(x_j) on the grid."""
        if self.kind == "tabulated":
            table = np.asarray(self.table)
            if table.shape != grid.shape:
                raise ShapeMismatch(
                    f"potential table shape {table.shape} does not match grid {grid.shape}"
                )
            return table.astype(dtype, copy=False)
        fn = registry.potential_fn(self.name)
        meshes = grid.meshes(dtype=np.longdouble)
        vals = np.asarray(fn(*meshes, **dict(self.params)))
        return vals.astype(dtype, copy=False)

    def describe(self):
        if self.kind == "closed-form":
            return {"kind": self.kind, "name": self.name, "params": dict(self.params)}
        return {"kind": self.kind, "shape": list(np.asarray(self.table).shape)}


@dataclass(frozen=True)
class NonlinearitySpec:
    """Cubic nonlinearity: sign +1 defocusing, -1 focusing; strength > 0."""

    sign: int = +1
    strength: float = 1.0

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValueError(f"nonlinearity sign must be +1 or -1, got {self.sign}")
        if not self.strength > 0:
            raise ValueError(f"nonlinearity strength must be > 0, got {self.strength}")

    def phase_coef(self, eps, tau):
        """c such that the sub-flow multiplies by exp(i*c*|psi|^2)."""
        return -self.sign * eps * eps * tau * self.strength


def free_flow(field, t):
    """e^{i t Laplacian}: multiply coefficient l by exp(-i*t*|mu_l|^2)."""
    grid = field.grid
    coeffs = field.coeffs * phase_table(-t * grid.mu2)
    return SpectralField(grid, coeffs=coeffs)


def potential_flow(field, potential, eps, tau):
    """Phase flow of the potential term: multiply by exp(-i*eps*tau*V(x_j))."""
    grid = field.grid
    v_ld = potential.sample(grid, dtype=np.longdouble)
    values = field.values * phase_table(-(np.longdouble(eps) * np.longdouble(tau)) * v_ld)
    return SpectralField(grid, values=values)


def nonlinear_flow(field, eps, tau, nl):
    """Exact cubic phase flow: multiply by exp(i*coef*|psi_j|^2)."""
    values = field.values
    coef = nl.phase_coef(eps, tau)
    m2 = values.real ** 2 + values.imag ** 2
    return SpectralField(field.grid, values=values * phase_table(coef * m2))


def _dft_matrices(grid):
    (a, _, n), = grid.axes
    x = grid.nodes_1d[0]
    mu = grid.mu_1d[0]
    fwd = np.exp(-1j * np.outer(mu, x - a)) / n
    inv = np.exp(1j * np.outer(x - a, mu))
    return fwd, inv


def dense_hamiltonian(grid, potential, eps):
    """Dense matrix of -Laplacian + eps*V in the coefficient basis (1D).

    The potential block is the discrete multiplication operator
    F diag(V) F^{-1}, i.e. the circulant convolution with the DFT
    coefficients of the sampled potential; this is exactly the generator
    whose sub-flows the split-step scheme composes. Rows and columns use
    the grid's coefficient layout.
    """
    if grid.ndim != 1:
        raise UnsupportedDimension("dense oracle is 1D only")
    n = grid.shape[0]
    if n > DENSE_ORACLE_MAX_N:
        raise OracleScaleExceeded(
            f"dense oracle limited to N <= {DENSE_ORACLE_MAX_N}, got {n}"
        )
    v = potential.sample(grid)
    fwd, inv = _dft_matrices(grid)
    h = np.diag(grid.mu_1d[0] ** 2).astype(np.complex128)
    h += eps * (fwd @ np.diag(v) @ inv)
    return h


def exact_linear_evolve(hmat, field, t):
    """Apply e^{-i t H} to the field through a Hermitian eigendecomposition."""
    hmat = np.asarray(hmat)
    grid = field.grid
    if grid.ndim != 1 or hmat.shape != (grid.shape[0], grid.shape[0]):
        raise ShapeMismatch(
            f"matrix shape {hmat.shape} does not match grid {grid.shape}"
        )
    try:
        w, u = np.linalg.eigh(hmat)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionFailure(str(exc)) from exc
    c = field.coeffs
    out = u @ (np.exp(-1j * t * w) * (u.conj().T @ c))
    return SpectralField(grid, coeffs=out)
