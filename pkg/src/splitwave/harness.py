"""Reference solutions, error metrics and the experiment drivers.

Errors are always measured against a fine reference run: the coarse
solution is spectrally extended (zero-padded coefficients) onto the
reference grid and the difference taken in the continuous L2/H1 norms,
so the comparison carries no interpolation error. Long-time scaling
experiments report the running maximum of the error, the quantity the
uniform-in-time bounds control.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateFit,
    GridIncompatible,
    OracleScaleExceeded,
    TimeAlignmentError,
    TimeMismatch,
    UnsupportedDimension,
)
from .flows import dense_hamiltonian, exact_linear_evolve, phase_table
from .grid import SpectralField
from .integrators import SchemeSpec, evolve, linear_problem, strang_step
from .registry import initial_fn

_ALIGN_RTOL = 1e-12
_TIME_KEY_DECIMALS = 9


def _time_key(t):
    return round(float(t), _TIME_KEY_DECIMALS)


def _steps_for(t, tau, what="time"):
    n = t / tau
    n_int = int(round(n))
    if n_int == 0 and t != 0.0:
        raise TimeAlignmentError(f"{what} {t} is below one step of {tau}")
    if abs(n - n_int) > _ALIGN_RTOL * max(1.0, abs(n)):
        raise TimeAlignmentError(
            f"{what} {t} is not an integer multiple of step {tau}"
        )
    return n_int


@dataclass
class ErrorSeries:
    """Per-time L2/H1 errors against a reference, with running maxima."""

    times: np.ndarray
    eL2: np.ndarray
    eH1: np.ndarray
    eL2max: np.ndarray
    eH1max: np.ndarray

    def validate(self):
        n = len(self.times)
        for arr in (self.eL2, self.eH1, self.eL2max, self.eH1max):
            if len(arr) != n:
                raise ValueError("error series arrays must share a length")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError("error series entries must be finite and >= 0")
        for arr in (self.eL2max, self.eH1max):
            if np.any(np.diff(arr) < 0):
                raise ValueError("running maxima must be nondecreasing")
        return self


class SnapshotRecorder:
    """Recorder keeping (t, coeffs) every `stride` steps, or at set times."""

    def __init__(self, stride=1, times=None):
        self.stride = int(stride)
        self.wanted = None if times is None else {_time_key(t) for t in times}
        self.grid = None
        self.times = []
        self.coeffs = []

    def __call__(self, n, t, field):
        if self.grid is None:
            self.grid = field.grid
        keep = n % self.stride == 0
        if self.wanted is not None:
            keep = _time_key(t) in self.wanted
        if keep:
            self.times.append(float(t))
            self.coeffs.append(field.coeffs.copy())

    def items(self):
        return list(zip(self.times, self.coeffs))


@dataclass
class ReferenceSolution:
    """Fine-run snapshots at preplanned times."""

    grid: object
    tau_e: float
    times: np.ndarray
    coeffs: list
    scheme_name: str
    fingerprint: str

    def coeffs_at(self, t):
        key = _time_key(t)
        for ti, ci in zip(self.times, self.coeffs):
            if _time_key(ti) == key:
                return ci
        raise TimeMismatch(f"reference holds no snapshot at t = {t}")


def reference_run(problem, n_e, tau_e, snapshot_times, scheme=None):
    """Fine-grid run storing snapshots at the requested times.

    Every requested time must be an integer multiple of tau_e; the fine
    point count must refine the problem's grid (same domain, per-axis
    multiple).
    """
    scheme = scheme if scheme is not None else SchemeSpec.strang()
    snapshot_times = sorted(set(float(t) for t in snapshot_times))
    steps = [_steps_for(t, tau_e, "snapshot time") for t in snapshot_times]
    grid_e = problem.grid.refined(n_e) if n_e is not None else problem.grid
    for n_fine, n_coarse in zip(grid_e.shape, problem.grid.shape):
        if n_fine % n_coarse != 0:
            raise GridIncompatible(
                f"reference points {grid_e.shape} must be a per-axis multiple "
                f"of {problem.grid.shape}"
            )
    fine = problem.with_grid(grid_e)
    recorder = SnapshotRecorder(times=snapshot_times)
    evolve(fine, scheme, tau_e, max(steps) if steps else 0, recorder)
    missing = set(map(_time_key, snapshot_times)) - set(map(_time_key, recorder.times))
    if missing:
        raise TimeAlignmentError(f"reference missed snapshot times {sorted(missing)}")
    return ReferenceSolution(
        grid=grid_e,
        tau_e=tau_e,
        times=np.asarray(recorder.times),
        coeffs=recorder.coeffs,
        scheme_name=scheme.name,
        fingerprint=problem.fingerprint(),
    )


def _freq_slots(src_grid, dst_grid):
    slots = []
    for axis in range(src_grid.ndim):
        idx = src_grid.freq_index_1d[axis]
        n_dst = dst_grid.shape[axis]
        slots.append(np.mod(idx, n_dst))
    return slots


def extend_coeffs(src_grid, coeffs, dst_grid):
    """Zero-padded spectral extension onto a finer grid (norm preserving)."""
    if src_grid.ndim != dst_grid.ndim:
        raise GridIncompatible("grids must share a dimension")
    for (a1, b1, n1), (a2, b2, n2) in zip(src_grid.axes, dst_grid.axes):
        if (a1, b1) != (a2, b2):
            raise GridIncompatible("grids must share the domain")
        if n2 < n1 or n2 % n1 != 0:
            raise GridIncompatible(
                f"destination points {n2} must be a multiple of source points {n1}"
            )
    out = np.zeros(dst_grid.shape, dtype=np.complex128)
    out[np.ix_(*_freq_slots(src_grid, dst_grid))] = coeffs
    return out


def restrict_coeffs(src_grid, coeffs, dst_grid):
    """Keep only the destination grid's frequency window (adjoint of extend)."""
    for (a1, b1, n1), (a2, b2, n2) in zip(src_grid.axes, dst_grid.axes):
        if (a1, b1) != (a2, b2):
            raise GridIncompatible("grids must share the domain")
        if n1 < n2 or n1 % n2 != 0:
            raise GridIncompatible(
                f"source points {n1} must be a multiple of destination points {n2}"
            )
    return coeffs[np.ix_(*_freq_slots(dst_grid, src_grid))].copy()


def error_series(snapshots, reference, grid=None):
    """L2/H1 error curves of a coarse run against a reference.

    `snapshots` is a SnapshotRecorder or an iterable of (t, field-or-
    coeffs) pairs; in the latter case pass the coarse grid for raw
    coefficient arrays.
    """
    if isinstance(snapshots, SnapshotRecorder):
        grid = snapshots.grid
        items = snapshots.items()
    else:
        items = []
        for t, entry in snapshots:
            if isinstance(entry, SpectralField):
                grid = entry.grid
                items.append((t, entry.coeffs))
            else:
                items.append((t, np.asarray(entry)))
        if grid is None:
            raise ValueError("pass grid= when snapshots are raw coefficient arrays")
    fine = reference.grid
    weight = fine.sobolev_weight(1.0)
    times, e2, e1 = [], [], []
    for t, coeffs in items:
        ref = reference.coeffs_at(t)
        diff = extend_coeffs(grid, coeffs, fine) - ref
        d2 = np.abs(diff) ** 2
        times.append(float(t))
        e2.append(math.sqrt(fine.volume * d2.sum()))
        e1.append(math.sqrt(fine.volume * (weight * d2).sum()))
    order = np.argsort(times)
    times = np.asarray(times)[order]
    e2 = np.asarray(e2)[order]
    e1 = np.asarray(e1)[order]
    return ErrorSeries(
        times=times,
        eL2=e2,
        eH1=e1,
        eL2max=np.maximum.accumulate(e2),
        eH1max=np.maximum.accumulate(e1),
    ).validate()


@dataclass
class SlopeFit:
    """Least-squares fit of log y against log x."""

    log_x: np.ndarray
    log_y: np.ndarray
    slope: float
    intercept: float
    r2: float


@dataclass
class LineFit:
    slope: float
    intercept: float
    r2: float


def _r2(x, y, slope, intercept):
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return max(0.0, min(1.0, 1.0 - ss_res / ss_tot))


def fit_line(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or np.ptp(x) == 0.0:
        raise DegenerateFit("need >= 2 points with spread in x")
    slope, intercept = np.polyfit(x, y, 1)
    return LineFit(float(slope), float(intercept), _r2(x, y, slope, intercept))


def fit_slope(points):
    """Log-log slope of (x, y) pairs; x and y must be strictly positive."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise DegenerateFit("need at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise DegenerateFit("points must be strictly positive for a log-log fit")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    if np.ptp(lx) == 0.0:
        raise DegenerateFit("zero variance in x")
    slope, intercept = np.polyfit(lx, ly, 1)
    return SlopeFit(lx, ly, float(slope), float(intercept), _r2(lx, ly, slope, intercept))


def _map_ordered(fn, args, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, args))
    return [fn(a) for a in args]


def _ensure_final(recorder, final_field, t_final):
    # a stride that does not divide n_steps would drop the end state
    if not recorder.times or _time_key(recorder.times[-1]) != _time_key(t_final):
        recorder.times.append(float(t_final))
        recorder.coeffs.append(final_field.coeffs.copy())


def _coarse_snapshots(problem, scheme, tau, n_steps, every):
    recorder = SnapshotRecorder(stride=every)
    final = evolve(problem, scheme, tau, n_steps, recorder)
    _ensure_final(recorder, final, n_steps * tau)
    return recorder


def experiment_error_growth(
    problem, scheme, taus, t_end, stride=1, *, tau_e=1e-4, n_e=None, threads=1
):
    """Error-growth curves e_max(t) per tau plus linear fits of eL2max vs t.

    `stride` thins the comparison times (in units of the coarsest tau's
    steps) to bound reference memory.
    """
    taus = list(taus)
    base = max(taus) * stride
    sample_times = None
    per_tau_steps = {}
    for tau in taus:
        n_steps = _steps_for(t_end, tau, "t_end")
        every = max(1, int(round(base / tau)))
        per_tau_steps[tau] = (n_steps, every)
    all_times = set()
    for tau, (n_steps, every) in per_tau_steps.items():
        ks = np.arange(0, n_steps + 1, every)
        all_times.update(_time_key(k * tau) for k in ks)
        all_times.add(_time_key(n_steps * tau))
    snapshot_times = sorted(all_times)
    for t in snapshot_times:
        _steps_for(t, tau_e, "snapshot time")
    reference = reference_run(problem, n_e, tau_e, snapshot_times)

    def one(tau):
        n_steps, every = per_tau_steps[tau]
        rec = _coarse_snapshots(problem, scheme, tau, n_steps, every)
        series = error_series(rec, reference)
        fit = fit_line(series.times, series.eL2max)
        return tau, (series, fit)

    return dict(_map_ordered(one, taus, threads))


class EpsRow(NamedTuple):
    eps: float
    t_final: float
    eH1: float
    ratio: float


def experiment_eps_scaling(
    problem,
    scheme,
    tau,
    eps_list,
    *,
    horizon_power=1,
    horizon_T=2.0,
    tau_e=1e-4,
    n_e=None,
    snap_points=64,
    threads=1,
):
    """Uniform H1 error up to t = T/eps^q per eps, with successive ratios.

    The reported eH1 is the running maximum over the sampled times up to
    the horizon, the quantity the improved long-time bounds control.
    """
    eps_list = list(eps_list)

    def one(eps):
        prob = problem.with_eps(eps)
        t_final = horizon_T / eps ** horizon_power
        n_steps = _steps_for(t_final, tau, "horizon")
        every = max(1, n_steps // snap_points)
        rec = SnapshotRecorder(stride=every)
        final = evolve(prob, scheme, tau, n_steps, rec)
        _ensure_final(rec, final, t_final)
        times = sorted({_time_key(t) for t in rec.times})
        reference = reference_run(prob, n_e, tau_e, times)
        series = error_series(rec, reference)
        return eps, t_final, float(series.eH1max[-1])

    results = _map_ordered(one, eps_list, threads)
    rows = []
    for i, (eps, t_final, err) in enumerate(results):
        ratio = results[i - 1][2] / err if i > 0 else float("nan")
        rows.append(EpsRow(eps, t_final, err, ratio))
    return rows


class ConvergenceRow(NamedTuple):
    param: float
    eL2: float
    eH1: float


@dataclass
class ConvergenceResult:
    rows: list
    fit: SlopeFit
    stagnation_n: int = None


def experiment_convergence(
    problem, scheme, axis, params, t_eval, *, tau_e=1e-4, n_e=None, threads=1
):
    """Error at t_eval versus tau (time axis) or versus N (space axis).

    Time axis: fixed grid, reference on the same grid with step tau_e
    (same composition for the fourth-order scheme so its own error floor
    stays far below the measurements). Space axis: fixed step tau_e on
    both sides so the comparison isolates the spatial truncation;
    stagnation_n reports the first N whose error is within 10x of the
    floor across the sweep.
    """
    params = list(params)
    if axis == "time":
        ref_scheme = scheme if scheme.order == 4 else SchemeSpec.strang()
        reference = reference_run(problem, n_e, tau_e, [t_eval], scheme=ref_scheme)

        def one(tau):
            n_steps = _steps_for(t_eval, tau, "t_eval")
            rec = SnapshotRecorder(times=[t_eval])
            evolve(problem, scheme, tau, n_steps, rec)
            series = error_series(rec, reference)
            return ConvergenceRow(tau, float(series.eL2[-1]), float(series.eH1[-1]))

        rows = _map_ordered(one, params, threads)
        fit = fit_slope([(r.param, r.eH1) for r in rows])
        return ConvergenceResult(rows, fit)
    if axis != "space":
        raise ValueError(f"axis must be time or space, got {axis!r}")

    n_steps = _steps_for(t_eval, tau_e, "t_eval")
    fine_n = n_e if n_e is not None else 2 * max(params)
    reference = reference_run(problem, fine_n, tau_e, [t_eval])

    def one(n):
        prob = problem.with_grid(problem.grid.refined(n))
        rec = SnapshotRecorder(times=[t_eval])
        evolve(prob, SchemeSpec.strang() if scheme is None else scheme, tau_e, n_steps, rec)
        series = error_series(rec, reference)
        return ConvergenceRow(n, float(series.eL2[-1]), float(series.eH1[-1]))

    rows = _map_ordered(one, params, threads)
    hs = [problem.grid.lengths[0] / r.param for r in rows]
    fit = fit_slope(list(zip(hs, [r.eH1 for r in rows])))
    floor = min(r.eH1 for r in rows)
    stagnation = None
    for r in sorted(rows, key=lambda r: r.param):
        if r.eH1 <= 10.0 * floor:
            stagnation = int(r.param)
            break
    return ConvergenceResult(rows, fit, stagnation)


class ProbeRow(NamedTuple):
    tau: float
    onestep_err: float
    f_norm: float
    ratio: float


def _default_probe_datum(grid):
    (a, b, _), = grid.axes
    scale = 2.0 * math.pi / (b - a)
    return lambda x: initial_fn("inv-sin2")(scale * (x - a))


def local_error_probe(
    grid, potential, eps, taus, *, psi0=None, quad_points=32, work_factor=4
):
    """One-step error against the dense oracle and the midpoint defect.

    For each tau this reports the H1 error of a single symmetric step
    versus e^{-i tau H}, and the H1 size of the midpoint-rule defect
    F = -i*eps*(tau*f(tau/2) - int_0^tau f(s) ds),
    f(s) = e^{i(tau-s)Delta} V e^{is Delta} psi,
    evaluated by Gauss-Legendre quadrature on a refined working grid so
    the potential product is alias-free. F scales as eps*tau^3.
    """
    if grid.ndim != 1:
        raise UnsupportedDimension("local probe is 1D only")
    if grid.shape[0] > 64:
        raise OracleScaleExceeded(f"probe limited to N <= 64, got {grid.shape[0]}")
    if quad_points < 32:
        raise ValueError("quadrature needs at least 32 points")
    datum = psi0 if psi0 is not None else _default_probe_datum(grid)
    problem = linear_problem(grid, potential, eps, datum)
    field0 = problem.sample_initial()
    hmat = dense_hamiltonian(grid, potential, eps)

    work = grid.refined(work_factor * grid.shape[0])
    v_work = potential.sample(work)
    mu2w = work.mu2
    c0w = extend_coeffs(grid, field0.coeffs, work)

    def f_of_s(s, tau):
        cw = c0w * phase_table(-s * mu2w)
        vw = np.fft.ifft(cw) * work.size
        vw = vw * v_work
        cw = np.fft.fft(vw) / work.size
        return cw * phase_table(-(tau - s) * mu2w)

    nodes, wts = np.polynomial.legendre.leggauss(quad_points)
    rows = []
    prev = None
    for tau in taus:
        stepped = strang_step(field0, problem, tau)
        exact = exact_linear_evolve(hmat, field0, tau)
        err = SpectralField(grid, coeffs=stepped.coeffs - exact.coeffs).norm(1.0)

        s_nodes = 0.5 * tau * (nodes + 1.0)
        s_wts = 0.5 * tau * wts
        integral = np.zeros(work.shape, dtype=np.complex128)
        for s, w in zip(s_nodes, s_wts):
            integral += w * f_of_s(s, tau)
        f_big = -1j * eps * tau * f_of_s(0.5 * tau, tau) + 1j * eps * integral
        f_norm = SpectralField(grid, coeffs=restrict_coeffs(work, f_big, grid)).norm(1.0)

        ratio = prev / err if prev is not None else float("nan")
        rows.append(ProbeRow(float(tau), float(err), float(f_norm), ratio))
        prev = err
    return rows


def twist_diagnostic(snapshots, eps=None):
    """Max discrete time derivative of the twisted variable in H1.

    The twist removes the free flow: phi(t) = e^{-it Delta} psi(t); the
    diagnostic max_n ||phi(t_{n+1}) - phi(t_n)||_{H1} / tau is O(eps)
    for the linear equation and O(eps^2) for the cubic one. `eps` is
    carried for reporting only.
    """
    if isinstance(snapshots, SnapshotRecorder):
        grid = snapshots.grid
        items = snapshots.items()
    else:
        items = [(t, f.coeffs) for t, f in snapshots]
        grid = snapshots[0][1].grid
    if len(items) < 2:
        raise ValueError("need at least two consecutive snapshots")
    weight = grid.sobolev_weight(1.0)
    best = 0.0
    prev_t, prev_c = items[0]
    prev_phi = prev_c * phase_table(prev_t * grid.mu2)
    for t, c in items[1:]:
        phi = c * phase_table(t * grid.mu2)
        diff2 = np.abs(phi - prev_phi) ** 2
        rate = math.sqrt(grid.volume * (weight * diff2).sum()) / (t - prev_t)
        best = max(best, rate)
        prev_t, prev_phi = t, phi
    return best


def experiment_twist(problem, scheme, tau, eps_list, t_end, *, threads=1):
    """Twist diagnostic per eps on the same problem family."""

    def one(eps):
        prob = problem.with_eps(eps)
        n_steps = _steps_for(t_end, tau, "t_end")
        rec = SnapshotRecorder(stride=1)
        evolve(prob, scheme, tau, n_steps, rec)
        return eps, twist_diagnostic(rec, eps)

    return _map_ordered(one, list(eps_list), threads)
