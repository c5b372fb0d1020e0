"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines as they complete. Tolerances are fixed here and nowhere else.
"""

import math

import numpy as np

import splitwave as sw
from splitwave.stepsize import k_max_for

from conftest import TWO_PI, case1_problem, case2_problem, nlse_problem_1d


def _report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {num:>2} {name}: {status}{suffix}")
    assert ok, f"criterion {num} {name} failed: {detail}"


def test_c01_mass_conservation():
    # 1e5 Strang steps, linear case 2 and 1D NLSE: relative drift <= 1e-12
    drifts = {}
    for tag, prob in (("linear", case2_problem()), ("nlse", nlse_problem_1d(eps=0.5))):
        f0 = prob.sample_initial()
        f = sw.evolve(prob, sw.SchemeSpec.strang(), 1e-3, 100_000)
        m0 = sw.l2_discrete_norm(f0)
        drifts[tag] = abs(sw.l2_discrete_norm(f) - m0) / m0
    ok = all(d <= 1e-12 for d in drifts.values())
    _report(1, "mass-conservation", ok, f"drifts {drifts}")


def test_c02_linear_error_growth():
    # case 1, eps = 1, tau in {4e-3, 2e-3}, T_end = 30: linear fit of
    # eL2max vs t with r^2 >= 0.9; slope ratio 4 +/- 25%
    prob = case1_problem()
    results = sw.experiment_error_growth(
        prob, sw.SchemeSpec.strang(), [4e-3, 2e-3], 30.0, stride=5, tau_e=1e-4
    )
    (_, fit_a), (_, fit_b) = results[4e-3], results[2e-3]
    ratio = fit_a.slope / fit_b.slope
    ok = fit_a.r2 >= 0.9 and fit_b.r2 >= 0.9 and 3.0 <= ratio <= 5.0
    _report(
        2,
        "linear-error-growth",
        ok,
        f"r2 = ({fit_a.r2:.4f}, {fit_b.r2:.4f}), slope ratio = {ratio:.3f}",
    )


def test_c03_temporal_orders():
    # case 2 at t = 1, eps = 1, tau halving from 1e-2 to 1.25e-3
    prob = case2_problem()
    taus = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    windows = {"lie": (0.85, 1.15), "strang": (1.9, 2.1), "order4": (3.8, 4.2)}
    slopes = {}
    for scheme in (sw.SchemeSpec.lie(), sw.SchemeSpec.strang(), sw.SchemeSpec.order4()):
        result = sw.experiment_convergence(prob, scheme, "time", taus, 1.0, tau_e=1e-4)
        slopes[scheme.name] = result.fit.slope
    ok = all(lo <= slopes[name] <= hi for name, (lo, hi) in windows.items())
    _report(3, "temporal-orders", ok, f"slopes {slopes}")


def test_c04_spectral_spatial_accuracy():
    # case 2, N in {8,16,32,64}, tau = 1e-4, t = 1: super-algebraic decay
    # and error at N = 64 below 1e-9
    prob = case2_problem()
    result = sw.experiment_convergence(
        prob, sw.SchemeSpec.strang(), "space", [8, 16, 32, 64], 1.0, tau_e=1e-4, n_e=128
    )
    errs = {r.param: r.eH1 for r in result.rows}
    dyadic = [8, 16, 32, 64]
    local_orders = [
        math.log2(errs[a] / errs[b]) for a, b in zip(dyadic, dyadic[1:])
    ]
    super_algebraic = all(p2 > p1 for p1, p2 in zip(local_orders, local_orders[1:]))
    ok = super_algebraic and errs[64] <= 1e-9
    _report(
        4,
        "spectral-spatial-accuracy",
        ok,
        f"local orders {['%.2f' % p for p in local_orders]}, eH1(64) = {errs[64]:.3e}",
    )


def test_c05_linear_eps_scaling():
    # fixed admissible tau = 0.01, eps in {1/2, 1/4, 1/8}, uniform H1
    # error up to t = 2/eps: successive ratios in [1.5, 2.5]
    assert sw.check_small_step(0.01, 0.5, 0.5, 1.0, "linear")
    prob = case2_problem()
    rows = sw.experiment_eps_scaling(
        prob,
        sw.SchemeSpec.strang(),
        0.01,
        [0.5, 0.25, 0.125],
        horizon_power=1,
        horizon_T=2.0,
        tau_e=1e-4,
    )
    ratios = [r.ratio for r in rows[1:]]
    ok = all(1.5 <= r <= 2.5 for r in ratios)
    _report(5, "linear-eps-scaling", ok, f"ratios {['%.3f' % r for r in ratios]}")


def test_c06_nlse_eps_scaling():
    # fixed admissible tau, eps in {1/2, 1/4}, uniform H1 error up to
    # t = 2/eps^2: ratio in [2.8, 5.2] (target 4)
    assert sw.check_small_step(0.01, 0.5, 0.5, 1.0, "nlse")
    prob = nlse_problem_1d()
    rows = sw.experiment_eps_scaling(
        prob,
        sw.SchemeSpec.strang(),
        0.01,
        [0.5, 0.25],
        horizon_power=2,
        horizon_T=2.0,
        tau_e=1e-4,
    )
    ratio = rows[1].ratio
    ok = 2.8 <= ratio <= 5.2
    _report(6, "nlse-eps-scaling", ok, f"ratio {ratio:.3f}")


def test_c07_local_error_order():
    # dense-oracle probe at N = 8: one-step ratios in [6.8, 9.2];
    # halving eps scales the error by [0.4, 0.6]; the midpoint defect
    # obeys |F| / (eps tau^3) constant within 30% over a decade of tau
    grid = sw.make_grid((0.0, TWO_PI, 8))
    pot = sw.PotentialSpec.closed_form("sinx")
    taus = [0.08, 0.04, 0.02, 0.01, 0.008]
    rows = sw.local_error_probe(grid, pot, 1.0, taus)

    halving = [r.ratio for r, t_prev, t in zip(rows[1:], taus, taus[1:]) if t_prev / t == 2.0]
    ratios_ok = all(6.8 <= r <= 9.2 for r in halving)

    rows_half = sw.local_error_probe(grid, pot, 0.5, [0.01])
    rows_quarter = sw.local_error_probe(grid, pot, 0.25, [0.01])
    eps_ratio = rows_quarter[0].onestep_err / rows_half[0].onestep_err
    eps_ok = 0.4 <= eps_ratio <= 0.6

    scaled = [r.f_norm / (1.0 * t ** 3) for r, t in zip(rows, taus)]
    f_ok = max(scaled) / min(scaled) <= 1.3

    ok = ratios_ok and eps_ok and f_ok
    _report(
        7,
        "local-error-order",
        ok,
        f"step ratios {['%.2f' % r for r in halving]}, eps ratio {eps_ratio:.3f}, "
        f"F spread {max(scaled) / min(scaled):.3f}",
    )


def test_c08_stepsize_set_properties():
    mu1 = 1.0
    alpha, tau0 = 0.5, 0.5
    rng = np.random.default_rng(2024)

    # (a) small-step admissibility certifies the gap bound with
    # C0 = sin(alpha pi)/(pi alpha), nu1 = 1, nu2 = -1
    c0, nu1, nu2 = sw.small_step_certificate(alpha)
    bound = sw.small_step_bound(alpha, tau0, mu1, "linear")
    k_max = k_max_for(tau0, "linear")
    taus_a = rng.uniform(1e-8, bound, size=1000)
    cert_ok = all(
        sw.certify_nonres(tau, c0, nu1, nu2, k_max, mu1)
        for tau in taus_a
        if sw.check_small_step(tau, alpha, tau0, mu1)
    )

    # (b) admissible fraction of (0, 2 pi] at defaults >= 0.75
    rule = sw.StepRule("diophantine", alpha=alpha, tau0=tau0, nu3=1.0)
    taus_b = rng.uniform(0.0, 2.0 * math.pi / mu1 ** 2, size=100_000)
    mask = sw.diophantine_mask(taus_b, rule, mu1)
    frac = float(mask.mean())
    frac_ok = frac >= 0.75

    # (c) translation by one resonance period preserves admissibility
    period = 2.0 * math.pi / mu1 ** 2
    translated = sw.diophantine_mask(taus_b[mask] + period, rule, mu1)
    translation_ok = bool(translated.all())

    ok = cert_ok and frac_ok and translation_ok
    _report(
        8,
        "stepsize-set-properties",
        ok,
        f"certified all = {cert_ok}, admissible fraction = {frac:.4f}, "
        f"translation = {translation_ok}",
    )


def test_c09_twist_scaling():
    # twisted-variable diagnostic: halves with eps (linear, +/-25%),
    # quarters with eps (nlse, +/-30%)
    lin = dict(
        sw.experiment_twist(case2_problem(), sw.SchemeSpec.strang(), 1e-3, [0.5, 0.25], 1.0)
    )
    lin_ratio = lin[0.5] / lin[0.25]
    nl = dict(
        sw.experiment_twist(
            nlse_problem_1d(), sw.SchemeSpec.strang(), 1e-3, [0.5, 0.25], 1.0
        )
    )
    nl_ratio = nl[0.5] / nl[0.25]
    ok = (2.0 * 0.75 <= lin_ratio <= 2.0 * 1.25) and (4.0 * 0.70 <= nl_ratio <= 4.0 * 1.30)
    _report(9, "twist-scaling", ok, f"linear {lin_ratio:.3f}, nlse {nl_ratio:.3f}")


def test_c10_oracle_equivalences(rng):
    problems = []

    # DFT vs direct summation at N <= 32
    dft_ok = True
    for n in (4, 8, 16, 32):
        g = sw.make_grid((0.0, TWO_PI, n))
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x, (a, _, _) = g.nodes_1d[0], g.axes[0]
        direct = np.array(
            [np.sum(u * np.exp(-1j * mu * (x - a))) / n for mu in g.mu_1d[0]]
        )
        dft_ok &= bool(np.abs(sw.dft_forward(g, u) - direct).max() <= 1e-12)

    # Strang n-step converges to the dense flow at rate 2
    prob = case2_problem(n=8)
    hmat = sw.dense_hamiltonian(prob.grid, prob.potential, prob.eps)
    exact = sw.exact_linear_evolve(hmat, prob.sample_initial(), 1.0)
    errs = []
    for tau in (1e-2, 5e-3, 2.5e-3):
        out = sw.evolve(prob, sw.SchemeSpec.strang(), tau, round(1.0 / tau))
        errs.append(
            sw.SpectralField(prob.grid, coeffs=out.coeffs - exact.coeffs).norm(1.0)
        )
    rate_ok = all(3.2 <= e1 / e2 <= 4.8 for e1, e2 in zip(errs, errs[1:]))

    # reversibility: forward then backward returns the initial data
    prob32 = case2_problem(n=32, eps=0.25)
    fwd = sw.evolve(prob32, sw.SchemeSpec.strang(), 0.01, 50)
    back = fwd
    for _ in range(50):
        back = sw.strang_step(back, prob32, -0.01)
    f0 = prob32.sample_initial()
    rev_ok = (
        sw.SpectralField(prob32.grid, coeffs=back.coeffs - f0.coeffs).norm(0.0)
        <= 1e-10
    )

    # plane-wave exactness for V = 0 under all three schemes
    gpw = sw.make_grid((0.0, TWO_PI, 16))
    xs = gpw.nodes_1d[0]
    pw_prob = sw.linear_problem(
        gpw, sw.PotentialSpec.zero(), 1.0, lambda x: np.exp(2j * x)
    )
    pw_ok = True
    for scheme in (sw.SchemeSpec.lie(), sw.SchemeSpec.strang(), sw.SchemeSpec.order4()):
        out = sw.evolve(pw_prob, scheme, 0.02, 25)
        expect = np.exp(2j * xs) * np.exp(-4j * 0.5)
        pw_ok &= bool(np.abs(out.values - expect).max() <= 1e-12)

    ok = dft_ok and rate_ok and rev_ok and pw_ok
    _report(
        10,
        "oracle-equivalences",
        ok,
        f"dft = {dft_ok}, strang rate-2 = {rate_ok}, reversibility = {rev_ok}, "
        f"plane-wave = {pw_ok}",
    )
