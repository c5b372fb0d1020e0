"""Non-resonance step-size toolkit.

Two admissibility rules gate the time step tau against resonances of
the free flow, whose periods are 2*pi/(mu1^2 K) for integer K up to a
mode-interaction bound K_max:

* small-step: tau < alpha * 2*pi * tau0^2 / (mu1^2 (1+tau0)^2)
  (the nlse variant replaces 2*pi by pi), which keeps every phase
  tau*mu1^2*K/2 below alpha*pi,
* diophantine: tau keeps a distance lam / (mu1^2 K)^(2+nu3) from every
  resonant point 2*l*pi/(mu1^2 K), l >= 0, 0 < K <= K_max, where
  lam = alpha*pi*mu1^(2+2 nu3) / (4 zeta(1+nu3)).

K_max is ceil(1/tau0)^2 for the linear equation and twice that for the
cubic interaction. Membership tests use exact IEEE comparisons on the
computed bounds; the sets are open/closed exactly as defined.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NoAdmissibleStepInRadius, NonconvergentSeries

_ZETA_TERMS = 10 ** 6


@lru_cache(maxsize=64)
def zeta_series(s, terms=_ZETA_TERMS):
    """Riemann zeta via partial sum plus Euler-Maclaurin tail.

    Absolute error well below 1e-12 for s >= 1.01 with the default term
    count; raises for s <= 1 where the series diverges.
    """
    s = float(s)
    if s <= 1.0:
        raise NonconvergentSeries(f"zeta series diverges for exponent {s} <= 1")
    k = np.arange(1, terms + 1, dtype=np.float64)
    partial = float(np.sum(k ** (-s)))
    m = float(terms) + 1.0
    tail = m ** (1.0 - s) / (s - 1.0) + 0.5 * m ** (-s) + s * m ** (-s - 1.0) / 12.0
    tail -= s * (s + 1.0) * (s + 2.0) * m ** (-s - 3.0) / 720.0
    return partial + tail


def lambda_const(alpha, nu3, mu1):
    """Exclusion-width constant lam = alpha*pi*mu1^(2+2*nu3) / (4*zeta(1+nu3))."""
    if not nu3 > 0.0:
        raise NonconvergentSeries(f"nu3 must be > 0, got {nu3}")
    return alpha * math.pi * mu1 ** (2.0 + 2.0 * nu3) / (4.0 * zeta_series(1.0 + nu3))


def k_max_for(tau0, equation):
    k0 = math.ceil(1.0 / tau0) ** 2
    if equation == "linear":
        return k0
    if equation == "nlse":
        return 2 * k0
    raise ValueError(f"equation must be linear or nlse, got {equation!r}")


def small_step_bound(alpha, tau0, mu1, equation="linear"):
    """Upper end of the admissible small-step interval (exclusive)."""
    if equation not in ("linear", "nlse"):
        raise ValueError(f"equation must be linear or nlse, got {equation!r}")
    factor = 2.0 * math.pi if equation == "linear" else math.pi
    return alpha * factor * tau0 ** 2 / (mu1 ** 2 * (1.0 + tau0) ** 2)


def check_small_step(tau, alpha=0.5, tau0=0.5, mu1=1.0, equation="linear"):
    """Strict membership tau in (0, bound)."""
    _validate_params(alpha, tau0)
    return 0.0 < tau < small_step_bound(alpha, tau0, mu1, equation)


def _validate_params(alpha, tau0, nu3=None):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < tau0 < 1.0:
        raise ValueError(f"tau0 must lie in (0, 1), got {tau0}")
    if nu3 is not None and not nu3 > 0.0:
        raise ValueError(f"nu3 must be > 0, got {nu3}")


@dataclass(frozen=True)
class StepRule:
    """Admissibility rule with its parameters."""

    variant: str  # "small-step" | "diophantine"
    alpha: float = 0.5
    tau0: float = 0.5
    nu3: float = 1.0
    equation: str = "linear"

    def __post_init__(self):
        if self.variant not in ("small-step", "diophantine"):
            raise ValueError(f"unknown rule variant {self.variant!r}")
        _validate_params(self.alpha, self.tau0, self.nu3 if self.variant == "diophantine" else None)
        if self.equation not in ("linear", "nlse"):
            raise ValueError(f"equation must be linear or nlse, got {self.equation!r}")

    @property
    def k_max(self):
        return k_max_for(self.tau0, self.equation)

    def lam(self, mu1):
        return lambda_const(self.alpha, self.nu3, mu1)

    def check(self, tau, mu1):
        if self.variant == "small-step":
            return check_small_step(tau, self.alpha, self.tau0, mu1, self.equation)
        return check_diophantine(tau, self, mu1)


def check_diophantine(tau, rule, mu1):
    """Distance-from-resonance membership test.

    For each K only the two integers l nearest to tau*mu1^2*K/(2*pi)
    can violate the bound; all other l sit strictly farther away, and
    resonances with K < 0 reduce to the l = 0 case at |K|.
    """
    if tau <= 0.0:
        return False
    lam = rule.lam(mu1)
    two_pi = 2.0 * math.pi
    for k in range(1, rule.k_max + 1):
        denom = mu1 ** 2 * k
        width = lam / denom ** (2.0 + rule.nu3)
        g = tau * denom / two_pi
        for l in (math.floor(g), math.floor(g) + 1):
            if l < 0:
                continue
            if abs(tau - two_pi * l / denom) < width:
                return False
    return True


def diophantine_mask(taus, rule, mu1):
    """Vectorized check_diophantine over an array of candidate steps."""
    taus = np.asarray(taus, dtype=np.float64)
    ok = taus > 0.0
    lam = rule.lam(mu1)
    two_pi = 2.0 * math.pi
    for k in range(1, rule.k_max + 1):
        denom = mu1 ** 2 * k
        width = lam / denom ** (2.0 + rule.nu3)
        g = taus * (denom / two_pi)
        lo = np.floor(g)
        for l in (lo, lo + 1.0):
            l = np.maximum(l, 0.0)
            ok &= np.abs(taus - two_pi * l / denom) >= width
    return ok


def min_gap(tau, k_max, mu1=1.0):
    """Smallest |1 - exp(i tau mu1^2 K)| over 0 < K <= k_max and its argmin."""
    if tau <= 0.0 or k_max < 1:
        raise ValueError("need tau > 0 and k_max >= 1")
    ks = np.arange(1, int(k_max) + 1)
    gaps = np.abs(1.0 - np.exp(1j * tau * mu1 ** 2 * ks))
    i = int(np.argmin(gaps))
    return float(gaps[i]), int(ks[i])


def certify_nonres(tau, c0, nu1, nu2, k_max, mu1=1.0):
    """Does tau satisfy |1-e^{i tau mu1^2 K}| >= c0 tau^nu1 / (mu1^2 K)^nu2 for all K?"""
    ks = np.arange(1, int(k_max) + 1, dtype=np.float64)
    gaps = np.abs(1.0 - np.exp(1j * tau * mu1 ** 2 * ks))
    bounds = c0 * tau ** nu1 / (mu1 ** 2 * ks) ** nu2
    return bool(np.all(gaps >= bounds))


def small_step_certificate(alpha):
    """(C0, nu1, nu2) certified by the small-step rule."""
    return math.sin(alpha * math.pi) / (math.pi * alpha), 1.0, -1.0


def excluded_intervals(rule, mu1, lo, hi):
    """Merged open intervals excluded by the diophantine rule within [lo, hi]."""
    lam = rule.lam(mu1)
    two_pi = 2.0 * math.pi
    raw = []
    for k in range(1, rule.k_max + 1):
        denom = mu1 ** 2 * k
        width = lam / denom ** (2.0 + rule.nu3)
        l_lo = max(0, math.floor((lo - width) * denom / two_pi))
        l_hi = math.ceil((hi + width) * denom / two_pi)
        for l in range(l_lo, l_hi + 1):
            center = two_pi * l / denom
            if center + width >= lo and center - width <= hi:
                raw.append((center - width, center + width))
    raw.sort()
    merged = []
    for left, right in raw:
        if merged and left <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], right))
        else:
            merged.append((left, right))
    return merged


def _nudge_admissible(value, direction, rule, mu1, tries=64):
    for _ in range(tries):
        if value > 0.0 and rule.check(value, mu1):
            return value
        value = np.nextafter(value, direction)
    return None


def suggest_step(target, rule, mu1, radius):
    """Admissible step nearest to target within the search radius."""
    if target <= 0.0:
        raise ValueError(f"target step must be > 0, got {target}")
    if rule.check(target, mu1):
        return target
    candidates = []
    if rule.variant == "small-step":
        bound = small_step_bound(rule.alpha, rule.tau0, mu1, rule.equation)
        cand = _nudge_admissible(np.nextafter(bound, 0.0), 0.0, rule, mu1)
        if cand is not None:
            candidates.append(cand)
    else:
        lo = max(np.nextafter(0.0, 1.0), target - radius)
        hi = target + radius
        for left, right in excluded_intervals(rule, mu1, lo, hi):
            if left < target < right:
                down = _nudge_admissible(left, 0.0, rule, mu1)
                up = _nudge_admissible(right, np.inf, rule, mu1)
                for cand in (down, up):
                    if cand is not None:
                        candidates.append(cand)
                break
    best = None
    for cand in candidates:
        if abs(cand - target) <= radius and cand > 0.0:
            if best is None or abs(cand - target) < abs(best - target):
                best = cand
    if best is None:
        raise NoAdmissibleStepInRadius(
            f"no admissible step within {radius} of {target} under {rule.variant}"
        )
    return best
