"""Run-configuration files: sectioned key-value text, strictly validated.

Unknown sections or keys are hard errors so a typo cannot silently
change a scaling study. Numeric values accept plain floats plus the
tokens `pi` / `<number>pi`.
"""

import configparser
import io
import math
import re
from dataclasses import dataclass

from .errors import ConfigError
from .flows import NonlinearitySpec, PotentialSpec
from .grid import make_grid
from .integrators import ProblemSpec, SchemeSpec
from .registry import initial_fn
from .stepsize import StepRule

_PI_RE = re.compile(r"^(-?\d*\.?\d*(?:[eE][+-]?\d+)?)\s*pi$")

_SCHEMA = {
    "problem": {
        "kind",
        "eps",
        "domain",
        "n",
        "potential",
        "initial",
        "nl_sign",
        "nl_strength",
    },
    "scheme": {"order"},
    "stepping": {"tau", "rule", "alpha", "tau0", "nu3"},
    "run": {"n_steps", "t_end"},
    "output": {"directory", "stride", "snapshot_times"},
    "experiment": {
        "kind",
        "taus",
        "ns",
        "eps_list",
        "t_end",
        "t_eval",
        "horizon_power",
        "horizon_t",
        "tau_e",
        "n_e",
        "stride",
        "snap_points",
    },
    "reference": {"tau_e", "n_e", "snapshot_times"},
}

EXPERIMENT_KINDS = (
    "err-growth",
    "converge-space",
    "converge-time",
    "eps-scaling",
    "local-probe",
    "twist",
)


def parse_number(text):
    text = text.strip()
    m = _PI_RE.match(text)
    if m:
        factor = m.group(1)
        if factor in ("", "-"):
            factor += "1"
        return float(factor) * math.pi
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse number {text!r}") from None


def _parse_int(text, what):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{what} must be an integer, got {text!r}") from None


def _number_list(text, what):
    items = [tok for tok in text.split(",") if tok.strip()]
    if not items:
        raise ConfigError(f"{what} must not be empty")
    return [parse_number(tok) for tok in items]


def _int_list(text, what):
    return [_parse_int(tok.strip(), what) for tok in text.split(",") if tok.strip()]


@dataclass
class RunConfig:
    """Validated configuration with lazily built domain objects."""

    sections: dict
    path: str = ""

    def echo(self):
        return {name: dict(body) for name, body in self.sections.items()}

    # -- section access helpers -------------------------------------------

    def _section(self, name, required=True):
        if name not in self.sections:
            if required:
                raise ConfigError(f"missing [{name}] section")
            return {}
        return self.sections[name]

    def _get(self, section, key, default=None, required=False):
        body = self._section(section, required=required)
        if key in body:
            return body[key]
        if required and default is None:
            raise ConfigError(f"missing key {key!r} in [{section}]")
        return default

    # -- builders ----------------------------------------------------------

    def build_grid(self):
        sec = self._section("problem")
        if "domain" not in sec or "n" not in sec:
            raise ConfigError("[problem] needs domain and n")
        pairs = [p for p in sec["domain"].split(";") if p.strip()]
        ns = _int_list(sec["n"], "n")
        if len(pairs) != len(ns):
            raise ConfigError("domain and n must list the same number of axes")
        axes = []
        for pair, n in zip(pairs, ns):
            ab = _number_list(pair, "domain")
            if len(ab) != 2:
                raise ConfigError(f"each domain axis needs 'a, b', got {pair!r}")
            axes.append((ab[0], ab[1], n))
        return make_grid(axes)

    def build_problem(self):
        sec = self._section("problem")
        kind = sec.get("kind")
        if kind not in ("linear", "nlse"):
            raise ConfigError(f"[problem] kind must be linear or nlse, got {kind!r}")
        eps = parse_number(self._get("problem", "eps", required=True))
        grid = self.build_grid()
        initial_name = self._get("problem", "initial", required=True)
        initial = initial_fn(initial_name)
        label = f"{kind}:{initial_name}"
        try:
            if kind == "linear":
                pot_name = self._get("problem", "potential", required=True)
                if "nl_sign" in sec or "nl_strength" in sec:
                    raise ConfigError("linear problems take no nl_* keys")
                potential = PotentialSpec.closed_form(pot_name)
                label += f":{pot_name}"
                return ProblemSpec(
                    "linear", eps, grid, initial, potential=potential, label=label
                )
            if "potential" in sec:
                raise ConfigError("nlse problems take no potential key")
            sign_text = sec.get("nl_sign", "+1").lstrip("+")
            sign = _parse_int(sign_text, "nl_sign")
            strength = parse_number(sec.get("nl_strength", "1.0"))
            nl = NonlinearitySpec(sign=sign, strength=strength)
            return ProblemSpec("nlse", eps, grid, initial, nonlinearity=nl, label=label)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def build_scheme(self):
        order = _parse_int(self._get("scheme", "order", default="2"), "order")
        if order not in (1, 2, 4):
            raise ConfigError(f"scheme order must be 1, 2 or 4, got {order}")
        return SchemeSpec.from_order(order)

    def build_tau(self):
        tau = parse_number(self._get("stepping", "tau", required=True))
        if not tau > 0.0:
            raise ConfigError(f"stepping tau must be > 0, got {tau}")
        return tau

    def build_rule(self, equation):
        sec = self._section("stepping", required=False)
        if "rule" not in sec:
            return None
        variant = sec["rule"]
        if variant not in ("small-step", "diophantine"):
            raise ConfigError(f"stepping rule must be small-step or diophantine, got {variant!r}")
        try:
            return StepRule(
                variant=variant,
                alpha=parse_number(sec.get("alpha", "0.5")),
                tau0=parse_number(sec.get("tau0", "0.5")),
                nu3=parse_number(sec.get("nu3", "1.0")),
                equation=equation,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def build_steps(self, tau):
        sec = self._section("run")
        if ("n_steps" in sec) == ("t_end" in sec):
            raise ConfigError("[run] needs exactly one of n_steps / t_end")
        if "n_steps" in sec:
            n = _parse_int(sec["n_steps"], "n_steps")
            if n < 0:
                raise ConfigError("n_steps must be >= 0")
            return n
        t_end = parse_number(sec["t_end"])
        n = t_end / tau
        if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
            raise ConfigError(f"t_end {t_end} is not a multiple of tau {tau}")
        return int(round(n))

    def output_options(self):
        sec = self._section("output", required=False)
        times = None
        if "snapshot_times" in sec:
            times = _number_list(sec["snapshot_times"], "snapshot_times")
        stride = _parse_int(sec["stride"], "stride") if "stride" in sec else None
        if stride is not None and stride < 1:
            raise ConfigError("output stride must be >= 1")
        if stride is not None and times is not None:
            raise ConfigError("[output] takes stride or snapshot_times, not both")
        return {
            "directory": sec.get("directory", "out"),
            "stride": stride,
            "snapshot_times": times,
        }

    def experiment_options(self):
        sec = self._section("experiment")
        kind = sec.get("kind")
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError(
                f"experiment kind must be one of {EXPERIMENT_KINDS}, got {kind!r}"
            )
        opts = {"kind": kind}
        if "taus" in sec:
            opts["taus"] = _number_list(sec["taus"], "taus")
        if "ns" in sec:
            opts["ns"] = _int_list(sec["ns"], "ns")
        if "eps_list" in sec:
            opts["eps_list"] = _number_list(sec["eps_list"], "eps_list")
        for key, conv in (
            ("t_end", parse_number),
            ("t_eval", parse_number),
            ("horizon_t", parse_number),
            ("tau_e", parse_number),
        ):
            if key in sec:
                opts[key] = conv(sec[key])
        for key in ("horizon_power", "n_e", "stride", "snap_points"):
            if key in sec:
                opts[key] = _parse_int(sec[key], key)
        return opts

    def reference_options(self):
        sec = self._section("reference")
        if "snapshot_times" not in sec:
            raise ConfigError("[reference] needs snapshot_times")
        return {
            "tau_e": parse_number(sec.get("tau_e", "1e-4")),
            "n_e": _parse_int(sec["n_e"], "n_e") if "n_e" in sec else None,
            "snapshot_times": _number_list(sec["snapshot_times"], "snapshot_times"),
        }


def loads_config(text, path=""):
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    parser.optionxform = str
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    sections = {}
    for name in parser.sections():
        if name not in _SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        body = {}
        for key, value in parser.items(name):
            if key not in _SCHEMA[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            body[key] = value.strip()
        sections[name] = body
    return RunConfig(sections=sections, path=str(path))


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text, path=path)
