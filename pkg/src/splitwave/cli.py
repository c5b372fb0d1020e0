"""Command-line front end: simulate | experiment | reference | check-step.

Exit codes: 0 success (check-step: admissible), 1 check-step not
admissible, 2 bad flags or config, 3 inadmissible step under a step
rule, 4 non-finite field during stepping.

Field snapshots are one JSON header line followed by the raw nodal
values as little-endian interleaved real/imag 64-bit floats in C order.
Experiment results are CSV with LF line endings and 17-significant-digit
decimals; re-running an identical config reproduces the CSV bodies byte
for byte.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import load_config
from .errors import ConfigError, NoAdmissibleStepInRadius, NonFiniteField, SplitwaveError
from .grid import SpectralField, make_grid
from .harness import (
    SnapshotRecorder,
    experiment_convergence,
    experiment_eps_scaling,
    experiment_error_growth,
    experiment_twist,
    local_error_probe,
)
from .integrators import evolve
from .stepsize import (
    StepRule,
    check_small_step,
    k_max_for,
    lambda_const,
    min_gap,
    small_step_bound,
    small_step_certificate,
    suggest_step,
)

EXIT_OK = 0
EXIT_INADMISSIBLE_VERDICT = 1
EXIT_CONFIG = 2
EXIT_INADMISSIBLE_STEP = 3
EXIT_NONFINITE = 4


def _fmt(value):
    if isinstance(value, float) and value != value:  # NaN -> empty cell
        return ""
    return format(value, ".17g")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    body = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)
    return len(rows)


def write_manifest(path, payload):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def write_snapshot(path, field, t, step, fingerprint):
    header = {
        "format": "splitwave-field",
        "version": 1,
        "axes": [list(ax) for ax in field.grid.axes],
        "time": float(t),
        "step": int(step),
        "problem": fingerprint,
        "dtype": "<c16",
        "order": "C",
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        fh.write(np.ascontiguousarray(field.values.astype("<c16")).tobytes())


def read_snapshot(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    grid = make_grid([tuple(ax) for ax in header["axes"]])
    values = np.frombuffer(raw, dtype="<c16").reshape(grid.shape)
    return SpectralField(grid, values=values.astype(np.complex128)), header


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("SPLITWAVE_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SPLITWAVE_THREADS must be an integer, got {env!r}")
    return 1


def _mu1_effective(grid):
    # per-axis frequency squares add in the kinetic phase, so the
    # admissibility bounds in 2D use the combined fundamental frequency
    return math.sqrt(sum(m ** 2 for m in grid.mu1))


def _admissibility(tau, rule, mu1):
    info = {
        "tau": tau,
        "small_step": check_small_step(
            tau,
            rule.alpha if rule else 0.5,
            rule.tau0 if rule else 0.5,
            mu1,
            rule.equation if rule else "linear",
        ),
    }
    dio_rule = rule if rule and rule.variant == "diophantine" else StepRule(
        "diophantine",
        alpha=rule.alpha if rule else 0.5,
        tau0=rule.tau0 if rule else 0.5,
        nu3=rule.nu3 if rule else 1.0,
        equation=rule.equation if rule else "linear",
    )
    info["diophantine"] = dio_rule.check(tau, mu1)
    return info


def _check_rule_dimension(rule, problem):
    # resonance distances are per-axis; with an irrational aspect ratio
    # the distance test is not meaningful, so 2D runs take the
    # small-step rule only
    if rule is not None and rule.variant == "diophantine" and problem.grid.ndim > 1:
        raise ConfigError("the diophantine rule is 1D-only; use small-step in 2D")


def _gate_taus(taus, rule, mu1):
    """Raise SystemExit(3) when a configured rule rejects any tau."""
    if rule is None:
        return
    for tau in taus:
        if not rule.check(tau, mu1):
            print(
                f"error: tau = {tau:.17g} inadmissible under {rule.variant} rule",
                file=sys.stderr,
            )
            raise SystemExit(EXIT_INADMISSIBLE_STEP)


def _derived_block(problem, rule, tau=None):
    grid = problem.grid
    derived = {
        "h": list(grid.h),
        "mu1": list(grid.mu1),
        "fingerprint": problem.fingerprint(),
    }
    if rule is not None:
        derived["k_max"] = rule.k_max
        if rule.variant == "diophantine":
            derived["lambda"] = rule.lam(_mu1_effective(grid))
    if tau is not None:
        derived["admissibility"] = _admissibility(tau, rule, _mu1_effective(grid))
    return derived


def cmd_simulate(args):
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    scheme = cfg.build_scheme()
    tau = cfg.build_tau()
    rule = cfg.build_rule(problem.kind)
    _check_rule_dimension(rule, problem)
    n_steps = cfg.build_steps(tau)
    out = cfg.output_options()
    outdir = args.out or out["directory"]
    os.makedirs(outdir, exist_ok=True)
    _gate_taus([tau], rule, _mu1_effective(problem.grid))

    times = out["snapshot_times"]
    if times is not None:
        from .harness import _steps_for

        for t in times:
            n = _steps_for(t, tau, "snapshot time")
            if n > n_steps:
                raise ConfigError(f"snapshot time {t} lies beyond the run end")
        recorder = SnapshotRecorder(times=times)
    elif out["stride"] is not None:
        recorder = SnapshotRecorder(stride=out["stride"])
    else:
        recorder = SnapshotRecorder(times=[n_steps * tau])
    t0 = time.perf_counter()
    evolve(problem, scheme, tau, n_steps, recorder)
    elapsed = time.perf_counter() - t0

    files = []
    fingerprint = problem.fingerprint()
    for idx, (t, coeffs) in enumerate(recorder.items()):
        name = f"snapshot_{idx:04d}.bin"
        field = SpectralField(problem.grid, coeffs=coeffs)
        write_snapshot(os.path.join(outdir, name), field, t, round(t / tau) if tau else 0, fingerprint)
        files.append({"file": name, "rows": field.grid.size})
    write_manifest(
        os.path.join(outdir, "manifest.json"),
        {
            "artifact": "splitwave",
            "version": __version__,
            "command": "simulate",
            "config": cfg.echo(),
            "derived": _derived_block(problem, rule, tau),
            "outputs": files,
            "timing_seconds": elapsed,
        },
    )
    return EXIT_OK


def _experiment_rows(kind, cfg, problem, scheme, tau, rule, threads):
    mu1 = _mu1_effective(problem.grid)
    opts = cfg.experiment_options()

    def need(key):
        if key not in opts:
            raise ConfigError(f"experiment {kind} needs {key!r} in [experiment]")
        return opts[key]

    if kind in ("eps-scaling", "twist") and tau is None:
        raise ConfigError(f"experiment {kind} needs a [stepping] tau")

    if kind == "err-growth":
        taus = need("taus")
        _gate_taus(taus, rule, mu1)
        results = experiment_error_growth(
            problem,
            scheme,
            taus,
            need("t_end"),
            stride=opts.get("stride", 1),
            tau_e=opts.get("tau_e", 1e-4),
            n_e=opts.get("n_e"),
            threads=threads,
        )
        rows = []
        for tau_i in taus:
            series, _fit = results[tau_i]
            for i in range(len(series.times)):
                rows.append(
                    (
                        tau_i,
                        series.times[i],
                        series.eL2[i],
                        series.eH1[i],
                        series.eL2max[i],
                        series.eH1max[i],
                    )
                )
        return ("tau", "t", "eL2", "eH1", "eL2max", "eH1max"), rows

    if kind in ("converge-time", "converge-space"):
        axis = "time" if kind == "converge-time" else "space"
        params = need("taus") if axis == "time" else need("ns")
        if axis == "time":
            _gate_taus(params, rule, mu1)
        result = experiment_convergence(
            problem,
            scheme,
            axis,
            params,
            need("t_eval"),
            tau_e=opts.get("tau_e", 1e-4),
            n_e=opts.get("n_e"),
            threads=threads,
        )
        return ("param", "eL2", "eH1"), [tuple(r) for r in result.rows]

    if kind == "eps-scaling":
        _gate_taus([tau], rule, mu1)
        rows = experiment_eps_scaling(
            problem,
            scheme,
            tau,
            need("eps_list"),
            horizon_power=opts.get("horizon_power", 1),
            horizon_T=opts.get("horizon_t", 2.0),
            tau_e=opts.get("tau_e", 1e-4),
            n_e=opts.get("n_e"),
            snap_points=opts.get("snap_points", 64),
            threads=threads,
        )
        return ("eps", "t_final", "eH1", "ratio"), [tuple(r) for r in rows]

    if kind == "local-probe":
        rows = local_error_probe(problem.grid, problem.potential, problem.eps, need("taus"))
        return ("tau", "onestep_err", "F_norm", "ratio"), [tuple(r) for r in rows]

    if kind == "twist":
        _gate_taus([tau], rule, mu1)
        rows = experiment_twist(
            problem, scheme, tau, need("eps_list"), need("t_end"), threads=threads
        )
        return ("eps", "diagnostic"), rows

    raise ConfigError(f"unknown experiment kind {kind!r}")


def cmd_experiment(args):
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    scheme = cfg.build_scheme()
    opts = cfg.experiment_options()
    kind = opts["kind"]
    tau = cfg.build_tau() if "stepping" in cfg.sections else None
    rule = cfg.build_rule(problem.kind)
    _check_rule_dimension(rule, problem)
    out = cfg.output_options()
    outdir = args.out or out["directory"]
    os.makedirs(outdir, exist_ok=True)
    threads = _threads(args)

    t0 = time.perf_counter()
    header, rows = _experiment_rows(kind, cfg, problem, scheme, tau, rule, threads)
    elapsed = time.perf_counter() - t0
    csv_name = f"{kind}.csv"
    n_rows = write_csv(os.path.join(outdir, csv_name), header, rows)
    write_manifest(
        os.path.join(outdir, "manifest.json"),
        {
            "artifact": "splitwave",
            "version": __version__,
            "command": "experiment",
            "config": cfg.echo(),
            "derived": _derived_block(problem, rule, tau),
            "outputs": [{"file": csv_name, "rows": n_rows}],
            "timing_seconds": elapsed,
        },
    )
    return EXIT_OK


def cmd_reference(args):
    from .harness import reference_run

    cfg = load_config(args.config)
    problem = cfg.build_problem()
    scheme = cfg.build_scheme()
    ref_opts = cfg.reference_options()
    out = cfg.output_options()
    outdir = args.out or out["directory"]
    os.makedirs(outdir, exist_ok=True)

    t0 = time.perf_counter()
    ref = reference_run(
        problem,
        ref_opts["n_e"],
        ref_opts["tau_e"],
        ref_opts["snapshot_times"],
        scheme=scheme,
    )
    elapsed = time.perf_counter() - t0
    files = []
    for idx, (t, coeffs) in enumerate(zip(ref.times, ref.coeffs)):
        name = f"reference_{idx:04d}.bin"
        field = SpectralField(ref.grid, coeffs=coeffs)
        write_snapshot(
            os.path.join(outdir, name), field, t, round(t / ref.tau_e), ref.fingerprint
        )
        files.append({"file": name, "rows": ref.grid.size})
    write_manifest(
        os.path.join(outdir, "manifest.json"),
        {
            "artifact": "splitwave",
            "version": __version__,
            "command": "reference",
            "config": cfg.echo(),
            "derived": {"tau_e": ref.tau_e, "scheme": ref.scheme_name},
            "outputs": files,
            "timing_seconds": elapsed,
        },
    )
    return EXIT_OK


def cmd_check_step(args):
    tau = args.tau
    if tau <= 0:
        print("error: tau must be > 0", file=sys.stderr)
        return EXIT_CONFIG
    mu1 = args.mu1
    rule = StepRule(
        "diophantine",
        alpha=args.alpha,
        tau0=args.tau0,
        nu3=args.nu3,
        equation=args.equation,
    )
    k_max = k_max_for(args.tau0, args.equation)
    lam = lambda_const(args.alpha, args.nu3, mu1)
    bound = small_step_bound(args.alpha, args.tau0, mu1, args.equation)
    small_ok = check_small_step(tau, args.alpha, args.tau0, mu1, args.equation)
    dio_ok = rule.check(tau, mu1)
    gap, k_at = min_gap(tau, k_max, mu1)
    c0, nu1, nu2 = small_step_certificate(args.alpha)

    print(f"tau = {tau:.17g}   mu1 = {mu1:.17g}   equation = {args.equation}")
    print(f"K_max = {k_max}   lambda = {lam:.17g}")
    print(
        f"small-step: {'admissible' if small_ok else 'not admissible'} "
        f"(bound {bound:.17g})"
    )
    if small_ok:
        print(f"  certifies C0 = {c0:.17g}, nu1 = {nu1:g}, nu2 = {nu2:g}")
    print(f"diophantine: {'admissible' if dio_ok else 'not admissible'}")
    if dio_ok:
        print(f"  certifies C0 ~ alpha-scaled, nu1 = 0, nu2 = {1.0 + args.nu3:g}")
    print(f"min gap over 0 < K <= {k_max}: {gap:.17g} at K = {k_at}")
    if args.suggest:
        try:
            better = suggest_step(tau, rule, mu1, args.radius)
            print(f"suggested admissible tau: {better:.17g}")
        except NoAdmissibleStepInRadius as exc:
            print(f"no suggestion: {exc}")
    verdict = small_ok or dio_ok
    print(f"verdict: {'admissible' if verdict else 'not admissible'}")
    return EXIT_OK if verdict else EXIT_INADMISSIBLE_VERDICT


def build_parser():
    parser = argparse.ArgumentParser(
        prog="splitwave",
        description="Split-step Fourier runs, experiments and step-size checks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (
        ("simulate", cmd_simulate),
        ("experiment", cmd_experiment),
        ("reference", cmd_reference),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=None)
        p.set_defaults(fn=fn)

    p = sub.add_parser("check-step")
    p.add_argument("tau", type=float)
    p.add_argument("--mu1", type=float, default=1.0)
    p.add_argument("--equation", choices=("linear", "nlse"), default="linear")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--tau0", type=float, default=0.5)
    p.add_argument("--nu3", type=float, default=1.0)
    p.add_argument("--suggest", action="store_true")
    p.add_argument("--radius", type=float, default=1.0)
    p.set_defaults(fn=cmd_check_step)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except SystemExit as exc:
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteField as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_NONFINITE
    except SplitwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
