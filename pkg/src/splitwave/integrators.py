"""Splitting schemes and the time-marching driver.

A scheme is an ordered list of stages, each either a kinetic stage
(Fourier multiplier exp(-i*c*tau*|mu|^2)) or a phase stage (pointwise
multiplier from the potential or the nonlinearity, over c*tau). The
driver keeps the state as raw FFT coefficients and converts to physical
space only around phase stages, so a Strang step costs two transforms.

By default the state is carried in extended precision (clongdouble on
platforms where that is wider than double). The phase multipliers are
exactly unit modulus up to one rounding, which keeps the discrete L2
norm drift of very long runs at the accumulated-rounding level.
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as _fft

from . import backend
from .errors import NonFiniteField, ShapeMismatch
from .flows import NonlinearitySpec, PotentialSpec, phase_table
from .grid import Grid, SpectralField, sample_field

KINETIC = "kinetic"
PHASE = "phase"

# triple-jump composition weights; w0 is negative
W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
W0 = 1.0 - 2.0 * W1

_STRANG_PATTERN = ((KINETIC, 0.5), (PHASE, 1.0), (KINETIC, 0.5))


@dataclass(frozen=True)
class SchemeSpec:
    """Ordered splitting stages with their sub-step coefficients."""

    name: str
    order: int
    stages: tuple

    def __post_init__(self):
        if self.order not in (1, 2, 4):
            raise ValueError(f"order must be 1, 2 or 4, got {self.order}")
        kin = sum(c for k, c in self.stages if k == KINETIC)
        pha = sum(c for k, c in self.stages if k == PHASE)
        if not (abs(kin - 1.0) < 1e-14 and abs(pha - 1.0) < 1e-14):
            raise ValueError(
                f"stage coefficients must each sum to 1, got kinetic={kin}, phase={pha}"
            )
        if self.order == 2 and self.stages != _STRANG_PATTERN:
            raise ValueError("order-2 scheme must be the Strang pattern")
        if self.order == 4 and self.stages != _triple_jump_stages():
            raise ValueError("order-4 scheme must be the triple-jump composition")

    @classmethod
    def lie(cls):
        return cls("lie", 1, ((KINETIC, 1.0), (PHASE, 1.0)))

    @classmethod
    def strang(cls):
        return cls("strang", 2, _STRANG_PATTERN)

    @classmethod
    def order4(cls):
        return cls("order4", 4, _triple_jump_stages())

    @classmethod
    def from_order(cls, order):
        return {1: cls.lie, 2: cls.strang, 4: cls.order4}[int(order)]()

    def reversed(self):
        """Stages in reverse application order (the adjoint composition)."""
        return replace(self, name=self.name + "-adjoint", stages=tuple(reversed(self.stages)))

    def __str__(self):
        return self.name


def _triple_jump_stages():
    stages = []
    for w in (W1, W0, W1):
        stages += [(KINETIC, 0.5 * w), (PHASE, w), (KINETIC, 0.5 * w)]
    return tuple(stages)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Equation kind, scaling parameter, domain and data."""

    kind: str  # "linear" | "nlse"
    eps: float
    grid: Grid
    initial: object  # callable over grid meshes
    potential: PotentialSpec = None
    nonlinearity: NonlinearitySpec = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("linear", "nlse"):
            raise ValueError(f"kind must be linear or nlse, got {self.kind!r}")
        if not (0.0 < self.eps <= 1.0):
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if self.kind == "linear":
            if self.potential is None or self.nonlinearity is not None:
                raise ValueError("linear problems take a potential and no nonlinearity")
        else:
            if self.nonlinearity is None or self.potential is not None:
                raise ValueError("nlse problems take a nonlinearity and no potential")

    def with_eps(self, eps):
        return replace(self, eps=float(eps))

    def with_grid(self, grid):
        return replace(self, grid=grid)

    def sample_initial(self):
        return sample_field(self.grid, self.initial)

    def describe(self):
        d = {
            "kind": self.kind,
            "eps": self.eps,
            "axes": [list(ax) for ax in self.grid.axes],
            "label": self.label,
        }
        if self.potential is not None:
            d["potential"] = self.potential.describe()
        if self.nonlinearity is not None:
            d["nonlinearity"] = {
                "sign": self.nonlinearity.sign,
                "strength": self.nonlinearity.strength,
            }
        return d

    def fingerprint(self):
        import hashlib
        import json

        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def linear_problem(grid, potential, eps, initial, label=""):
    return ProblemSpec("linear", eps, grid, initial, potential=potential, label=label)


def nlse_problem(grid, nonlinearity, eps, initial, label=""):
    return ProblemSpec("nlse", eps, grid, initial, nonlinearity=nonlinearity, label=label)


def _state_dtype(precision):
    if precision == "double":
        return np.complex128
    if precision == "extended":
        # falls back to complex128 where long double is not wider
        return np.clongdouble if np.finfo(np.longdouble).eps < np.finfo(np.float64).eps else np.complex128
    raise ValueError(f"precision must be extended or double, got {precision!r}")


class _StepPlan:
    """Precomputed multiplier tables for one (problem, scheme, tau) triple."""

    def __init__(self, problem, scheme, tau, dtype, kernels, fuse=True):
        self.grid = problem.grid
        self.dtype = dtype
        self.kernels = kernels
        stages = [[kind, coeff] for kind, coeff in scheme.stages]
        if fuse:
            fused = []
            for kind, coeff in stages:
                if fused and kind == KINETIC and fused[-1][0] == KINETIC:
                    fused[-1][1] += coeff
                else:
                    fused.append([kind, coeff])
            stages = fused
        tau_ld = np.longdouble(tau)
        mu2 = self.grid.mu2
        ops = []
        if problem.kind == "linear":
            v_ld = problem.potential.sample(self.grid, dtype=np.longdouble)
        for kind, coeff in stages:
            if coeff == 0.0:
                continue
            c_ld = np.longdouble(coeff)
            if kind == KINETIC:
                tab = phase_table(-(c_ld * tau_ld) * mu2, dtype).reshape(-1)
                ops.append(("k", tab))
            elif problem.kind == "linear":
                theta = -(np.longdouble(problem.eps) * c_ld * tau_ld) * v_ld
                ops.append(("p", phase_table(theta, dtype).reshape(-1)))
            else:
                coef = problem.nonlinearity.phase_coef(
                    np.longdouble(problem.eps), c_ld * tau_ld
                )
                ops.append(("nl", np.longdouble(coef)))
        self.ops = ops

    def run_step(self, c):
        """Advance raw (unnormalized) spectral state by one step, in place-ish."""
        kernels = self.kernels
        for kind, arg in self.ops:
            if kind == "k":
                kernels.mul_inplace(c.reshape(-1), arg)
            else:
                v = _fft.ifftn(c)
                if kind == "p":
                    kernels.mul_inplace(v.reshape(-1), arg)
                else:
                    kernels.nonlinear_phase_inplace(v.reshape(-1), arg)
                c = _fft.fftn(v)
        return c


def _locate_nonfinite(grid, c, step):
    values = _fft.ifftn(c)
    flat = values.reshape(-1)
    bad = np.flatnonzero(~np.isfinite(flat))
    node = int(bad[0]) if bad.size else int(np.flatnonzero(~np.isfinite(c.reshape(-1)))[0])
    raise NonFiniteField(
        f"non-finite field value at step {step}, node {node}", step=step, node=node
    )


def evolve(
    problem,
    scheme,
    tau,
    n_steps,
    recorder=None,
    *,
    precision="extended",
    fuse=True,
    check_finite=True,
    kernels=None,
):
    """March n_steps of the scheme from the sampled initial data.

    The recorder, when given, is called as recorder(n, t_n, field) with
    n = 0 for the initial state and after every step; the field carries
    fresh complex128 coefficients. Identical inputs produce bit-identical
    outputs on one platform. Any NaN/Inf aborts with NonFiniteField.
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")
    if tau == 0.0 and n_steps > 0:
        raise ValueError("tau must be nonzero")
    kernels = kernels if kernels is not None else backend.kernels
    dtype = _state_dtype(precision)
    grid = problem.grid
    field0 = problem.sample_initial()
    values0 = field0.values
    if not np.isfinite(values0).all():
        node = int(np.flatnonzero(~np.isfinite(values0.reshape(-1)))[0])
        raise NonFiniteField(
            f"non-finite field value at step 0, node {node}", step=0, node=node
        )
    if recorder is not None:
        recorder(0, 0.0, field0)
    if n_steps == 0:
        return field0

    plan = _StepPlan(problem, scheme, tau, dtype, kernels, fuse=fuse)
    scale = grid.size
    c = _fft.fftn(values0.astype(dtype))
    for n in range(1, n_steps + 1):
        c = plan.run_step(c)
        if check_finite and kernels.first_nonfinite(c.reshape(-1)) >= 0:
            _locate_nonfinite(grid, c, n)
        if recorder is not None:
            coeffs = (c / scale).astype(np.complex128)
            recorder(n, n * tau, SpectralField(grid, coeffs=coeffs))
    coeffs = (c / scale).astype(np.complex128)
    return SpectralField(grid, coeffs=coeffs)


def _single_step(field, problem, tau, scheme, precision="double"):
    if field.grid != problem.grid:
        raise ShapeMismatch("field grid does not match problem grid")
    dtype = _state_dtype(precision)
    plan = _StepPlan(problem, scheme, tau, dtype, backend.kernels)
    c = _fft.fftn(field.values.astype(dtype))
    c = plan.run_step(c)
    coeffs = (c / problem.grid.size).astype(np.complex128)
    return SpectralField(problem.grid, coeffs=coeffs)


def strang_step(field, problem, tau):
    """One step of the symmetric second-order composition."""
    return _single_step(field, problem, tau, SchemeSpec.strang())


def lie_step(field, problem, tau):
    """One step of the first-order composition: kinetic then phase."""
    return _single_step(field, problem, tau, SchemeSpec.lie())


def lie_step_adjoint(field, problem, tau):
    """Adjoint first-order composition: phase first, kinetic second."""
    return _single_step(field, problem, tau, SchemeSpec.lie().reversed())


def order4_step(field, problem, tau):
    """One step of the fourth-order triple-jump composition."""
    return _single_step(field, problem, tau, SchemeSpec.order4())
