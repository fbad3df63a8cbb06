"""Command-line experiment runner.

Every computation module is exposed as a subcommand with the same
plumbing: flags override a flat key=value config file, the fully
resolved configuration is echoed to <out>.manifest, results go to
<out>.csv and <out>.summary.json, and a PNG figure lands next to them
unless --no-figures is passed.  `smallball run saved.manifest`
re-executes a manifest and reproduces its CSV byte for byte.

Exit codes: 0 on success, 1 on usage or configuration errors (including
module preconditions), 2 when an experiment runs to completion but its
acceptance check fails (dominance violated, floor bound broken, oracle
self-check missed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

from . import __version__

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    """Configuration or flag problem; exit 1."""


class CheckFailure(Exception):
    """The experiment ran but its acceptance check failed; exit 2."""


@dataclass(frozen=True)
class Knob:
    key: str
    kind: str  # int | float | str | bool | floats
    default: object = None
    help: str = ""
    required: bool = False


_GLOBAL_KNOBS = (
    Knob("seed", "int", 0, "base seed (env SMALLBALL_SEED overrides)"),
    Knob("out", "str", None, "output basename for .csv/.summary.json/.manifest"),
    Knob("figures", "bool", True, "render a PNG next to the CSV"),
    Knob("threads", "int", 0, "cap BLAS worker threads (0 = library default)"),
)

_PROCESS_KNOBS = (
    Knob(
        "process",
        "str",
        None,
        "ou | bridge | fbm | fou | tempered | sawtooth",
        required=True,
    ),
    Knob("theta", "float", None, "mean-reversion rate where applicable"),
    Knob("hurst", "float", None, "roughness index for fbm / fou"),
    Knob("alpha", "float", None, "kernel power for the tempered process"),
)

_FUNCTION_HELP = (
    "builtin name (one of the registered functions) or poly:c0,c1,... | "
    "trig:sin,cos,lin,const | abspow:p | rational:n0,n1,../d0,d1,.."
)


def _knobs(*extra: Knob) -> tuple:
    return tuple(extra)


_COMMANDS: dict[str, dict] = {
    "simulate": {
        "help": "sample one path and write it as CSV",
        "knobs": _knobs(
            *_PROCESS_KNOBS,
            Knob("t0", "float", 0.0, "grid start"),
            Knob("dt", "float", 2.0**-6, "grid step"),
            Knob("n", "int", 512, "number of steps (n+1 points)"),
        ),
    },
    "smallball": {
        "help": "empirical small-ball probabilities against derived bounds",
        "knobs": _knobs(
            *_PROCESS_KNOBS,
            Knob("s", "float", 0.0, "window anchor time"),
            Knob("replicates", "int", 10_000, "Monte Carlo replicates per pair"),
            Knob("dt_divisor", "int", 64, "grid step = delta / dt_divisor"),
            Knob("pairs", "int", 20, "number of derived (eta, delta) pairs"),
            Knob("refine", "bool", True, "re-run each pair at dt/2"),
            Knob("etas", "floats", None, "explicit eta list (with deltas)"),
            Knob("deltas", "floats", None, "explicit delta list (with etas)"),
        ),
    },
    "check-a1": {
        "help": "window floor, consistency, and derivative checks for f",
        "knobs": _knobs(
            Knob("function", "str", None, _FUNCTION_HELP, required=True),
        ),
    },
    "diverge": {
        "help": "growth rate of I_T across dyadic horizons",
        "knobs": _knobs(
            *_PROCESS_KNOBS,
            Knob("function", "str", None, _FUNCTION_HELP, required=True),
            Knob("epsilon", "float", None, "normalization T**(eps-1)", required=True),
            Knob("replicates", "int", 100, "independent paths"),
            Knob("dt", "float", None, "grid step (default by process kind)"),
            Knob("horizons", "floats", None, "horizon ladder (default dyadic)"),
        ),
    },
    "selfsim": {
        "help": "scaling lower-bound experiment for fbm",
        "knobs": _knobs(
            Knob("hurst", "float", 0.5, "fbm roughness"),
            Knob("p", "float", 2.0, "integrand power |X|**p"),
            Knob("epsilon", "float", 0.5, "normalization exponent"),
            Knob("beta", "float", None, "subsequence exponent (default 1.05x critical)"),
            Knob("k_max", "int", 8, "largest subsequence index"),
            Knob("replicates", "int", 100, "independent paths"),
            Knob("dt", "float", 2.0**-2, "grid step"),
        ),
    },
    "ergodic": {
        "help": "time averages I_T / T of a stationary process",
        "knobs": _knobs(
            *_PROCESS_KNOBS,
            Knob("function", "str", None, _FUNCTION_HELP, required=True),
            Knob("t", "float", 500.0, "horizon"),
            Knob("replicates", "int", 200, "independent paths"),
            Knob("dt", "float", None, "grid step (default by process kind)"),
        ),
    },
    "estimate-ou": {
        "help": "drift estimator sweep for the mean-reverting model",
        "knobs": _knobs(
            Knob("theta", "float", 1.0, "true drift"),
            Knob("diffusion", "str", "one", "time diffusion g, " + _FUNCTION_HELP),
            Knob("g_lower", "float", 0.0, "declared lower bound of |g|"),
            Knob("g_upper", "float", None, "declared upper bound of |g|"),
            Knob("y0", "float", 0.0, "initial state"),
            Knob("t", "float", 500.0, "horizon"),
            Knob("dt", "float", 0.01, "Euler step"),
            Knob("seeds", "int", 100, "number of seeds (base .. base+n-1)"),
        ),
    },
    "estimate-frac": {
        "help": "ratio estimator sweep for the fractional additive model",
        "knobs": _knobs(
            Knob("theta", "float", 2.0, "true drift"),
            Knob("hurst", "float", 0.7, "fractional noise roughness"),
            Knob("function", "str", "identity", _FUNCTION_HELP),
            Knob("driver", "str", "ou", "driver process: ou | bridge | fou"),
            Knob("driver_theta", "float", 1.0, "driver mean-reversion"),
            Knob("driver_hurst", "float", 0.7, "driver roughness (fou)"),
            Knob("x0", "float", 0.0, "initial state"),
            Knob("t", "float", 500.0, "horizon"),
            Knob("dt", "float", 0.01, "grid step"),
            Knob("epsilon", "float", None, "diagnostic exponent (default (1-H)/2)"),
            Knob("seeds", "int", 100, "number of seeds (base .. base+n-1)"),
        ),
    },
    "oracle": {
        "help": "quadrature oracles for the singular-kernel integrals",
        "knobs": _knobs(
            Knob("lemma", "str", None, "a1 | a2 | a3 | gamma", required=True),
            Knob("hurst", "float", 0.75, "kernel roughness"),
            Knob("x", "float", 1.0, "a1 upper limit"),
            Knob("y", "float", 0.0, "a1 shift"),
            Knob("p", "float", 1.0, "a2 shift"),
            Knob("z", "float", 0.5, "gamma argument"),
        ),
    },
}


# ---------------------------------------------------------------- parsing


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smallball", description=__doc__.split("\n\n")[0])
    parser.add_argument(
        "--version", action="version", version=f"smallball {__version__}"
    )
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for name, spec in _COMMANDS.items():
        p = sub.add_parser(name, help=spec["help"], description=spec["help"])
        for knob in spec["knobs"] + _GLOBAL_KNOBS:
            if knob.key == "figures":
                continue
            p.add_argument(
                "--" + knob.key.replace("_", "-"),
                dest=knob.key,
                metavar=knob.kind.upper(),
                help=knob.help,
            )
        p.add_argument(
            "--no-figures",
            action="store_true",
            help="skip the PNG figure",
        )
        p.add_argument(
            "--config", metavar="FILE", help="flat key=value config file"
        )
        p.add_argument(
            "--dry-run",
            action="store_true",
            help="validate and print the resolved plan, compute nothing",
        )
    runp = sub.add_parser(
        "run",
        help="re-execute a saved manifest or config file",
        description="Re-execute a manifest/config file; flags stay minimal "
        "so the stored configuration drives the run.",
    )
    runp.add_argument("config_file", metavar="FILE")
    runp.add_argument("--out", metavar="STR", help="redirect the output basename")
    runp.add_argument("--no-figures", action="store_true")
    runp.add_argument("--dry-run", action="store_true")
    return parser


def _parse_value(knob: Knob, text: str):
    text = text.strip()
    if text == "":
        return None
    try:
        if knob.kind == "int":
            return int(text)
        if knob.kind == "float":
            return float(text)
        if knob.kind == "floats":
            return tuple(float(tok) for tok in text.split(",") if tok.strip())
        if knob.kind == "bool":
            low = text.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError("expected true/false")
    except ValueError as exc:
        raise UsageError(f"bad value for {knob.key}: {text!r} ({exc})") from None
    return text


def _value_text(knob: Knob, value) -> str:
    if value is None:
        return ""
    if knob.kind == "float":
        return repr(float(value))
    if knob.kind == "floats":
        return ",".join(repr(float(v)) for v in value)
    if knob.kind == "bool":
        return "true" if value else "false"
    return str(value)


def _read_config(path: str) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    data: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        data[key.strip()] = value.strip()
    if not data:
        raise UsageError(f"config file {path} is empty")
    return data


def _resolve(command: str, args, config: dict[str, str]) -> dict:
    """Merge flags over config over defaults into a typed mapping."""
    knobs = _COMMANDS[command]["knobs"] + _GLOBAL_KNOBS
    known = {k.key for k in knobs}
    unknown = set(config) - known - {"command", "version"}
    if unknown:
        raise UsageError(
            f"unknown config keys for {command}: " + ", ".join(sorted(unknown))
        )
    typed: dict = {"command": command}
    for knob in knobs:
        flag = getattr(args, knob.key, None)
        if knob.key == "figures" and getattr(args, "no_figures", False):
            flag = "false"
        if flag is not None:
            value = _parse_value(knob, str(flag))
        elif knob.key in config:
            value = _parse_value(knob, config[knob.key])
        else:
            value = knob.default
        if value is None and knob.required:
            raise UsageError(f"{command} requires --{knob.key.replace('_', '-')}")
        typed[knob.key] = value
    env_seed = os.environ.get("SMALLBALL_SEED")
    if env_seed is not None:
        try:
            typed["seed"] = int(env_seed)
        except ValueError:
            raise UsageError(f"SMALLBALL_SEED must be an integer, got {env_seed!r}")
    if typed["out"] is None:
        typed["out"] = command
    if typed["threads"] < 0:
        raise UsageError("threads must be 0 or more")
    return typed


def _manifest_text(command: str, typed: dict) -> str:
    knobs = _COMMANDS[command]["knobs"] + _GLOBAL_KNOBS
    entries = {"command": command, "version": __version__}
    for knob in knobs:
        entries[knob.key] = _value_text(knob, typed.get(knob.key))
    return "".join(f"{key}={entries[key]}\n" for key in sorted(entries))


# ------------------------------------------------------------- builders


def _build_process(typed: dict):
    from .kernels import ProcessSpec

    name = (typed.get("process") or "").lower()
    theta = typed.get("theta")
    hurst = typed.get("hurst")
    alpha = typed.get("alpha")
    if name == "ou":
        spec = ProcessSpec.stationary_ou(theta=theta if theta is not None else 1.0)
    elif name == "bridge":
        spec = ProcessSpec.periodic_bridge()
    elif name == "fbm":
        if hurst is None:
            raise UsageError("fbm needs --hurst")
        spec = ProcessSpec.fbm(hurst=hurst)
    elif name == "fou":
        if hurst is None:
            raise UsageError("fou needs --hurst")
        spec = ProcessSpec.fractional_ou(
            hurst=hurst, theta=theta if theta is not None else 1.0
        )
    elif name == "tempered":
        spec = ProcessSpec.tempered(
            theta=theta if theta is not None else 1.0,
            alpha=alpha if alpha is not None else 0.5,
        )
    elif name == "sawtooth":
        spec = ProcessSpec.random_sawtooth()
    else:
        raise UsageError(
            f"unknown process {name!r} "
            "(choose ou, bridge, fbm, fou, tempered, sawtooth)"
        )
    # echo the constants the spec actually carries into the manifest
    typed["theta"] = getattr(spec, "theta", None)
    typed["hurst"] = getattr(spec, "hurst", None)
    typed["alpha"] = getattr(spec, "alpha", None)
    return spec


def _build_function(token: str):
    from .testfuncs import (
        BUILTIN_FUNCTIONS,
        FunctionKind,
        FunctionSpec,
        builtin_function,
    )

    token = token.strip()
    if token in BUILTIN_FUNCTIONS:
        return builtin_function(token)
    kind, sep, payload = token.partition(":")
    if not sep:
        raise UsageError(
            f"unknown function {token!r}; use a builtin name "
            f"({', '.join(sorted(BUILTIN_FUNCTIONS))}) or a family spec "
            "poly:c0,c1,... | trig:sin,cos,lin,const | abspow:p | "
            "rational:n0,n1,../d0,d1,.."
        )
    try:
        if kind == "poly":
            return FunctionSpec(
                FunctionKind.POLY, tuple(float(c) for c in payload.split(","))
            )
        if kind == "trig":
            return FunctionSpec(
                FunctionKind.TRIG_COMBO,
                tuple(float(c) for c in payload.split(",")),
            )
        if kind == "abspow":
            return FunctionSpec(FunctionKind.ABS_POW, (float(payload),))
        if kind == "rational":
            num_text, _, den_text = payload.partition("/")
            num = tuple(float(c) for c in num_text.split(","))
            den = tuple(float(c) for c in den_text.split(","))
            return FunctionSpec(FunctionKind.RATIONAL, (num, den))
    except ValueError as exc:
        raise UsageError(f"bad function spec {token!r}: {exc}") from None
    raise UsageError(f"unknown function family {kind!r} in {token!r}")


# ------------------------------------------------------------- handlers


def _cmd_simulate(typed, paths):
    from .simulate import sample_path, write_path_csv

    spec = _build_process(typed)
    path = sample_path(spec, typed["t0"], typed["dt"], typed["n"], typed["seed"])
    write_path_csv(path, paths["csv"])
    if typed["figures"]:
        from .report import path_figure

        path_figure(path, paths["png"])
    summary = {
        "process": spec.label(),
        "t0": typed["t0"],
        "dt": typed["dt"],
        "n": typed["n"],
        "seed": typed["seed"],
        "value_min": float(path.values.min()),
        "value_max": float(path.values.max()),
        "value_final": float(path.values[-1]),
    }
    print(f"{spec.label()}: {typed['n']} steps, dt {typed['dt']:g}")
    return summary, None


def _cmd_smallball(typed, paths):
    from .probability import (
        default_grid_pairs,
        default_small_ball_params,
        small_ball_grid,
        write_small_ball_csv,
    )

    spec = _build_process(typed)
    params = default_small_ball_params(spec)
    if typed["etas"] is not None or typed["deltas"] is not None:
        if typed["etas"] is None or typed["deltas"] is None:
            raise UsageError("pass --etas and --deltas together")
        if len(typed["etas"]) != len(typed["deltas"]):
            raise UsageError("--etas and --deltas must have equal length")
        pairs = list(zip(typed["etas"], typed["deltas"]))
    else:
        if params is None:
            raise UsageError(
                f"no derived small-ball constants for {spec.label()}; "
                "pass --etas and --deltas"
            )
        pairs = default_grid_pairs(params, n_pairs=typed["pairs"])
        typed["etas"] = tuple(eta for eta, _ in pairs)
        typed["deltas"] = tuple(delta for _, delta in pairs)
    rows = small_ball_grid(
        spec,
        base_seed=typed["seed"],
        pairs=pairs,
        s=typed["s"],
        replicates=typed["replicates"],
        dt_divisor=typed["dt_divisor"],
        refine=typed["refine"],
    )
    write_small_ball_csv([row.result for row in rows], paths["csv"])
    if typed["figures"]:
        from .report import small_ball_figure

        small_ball_figure(rows, paths["png"])
    admissible = [row for row in rows if row.result.admissible]
    violations = [row for row in admissible if not row.dominated]
    unstable = [
        row for row in admissible if row.refined is not None and not row.stable
    ]
    summary = {
        "process": spec.label(),
        "anchor": typed["s"],
        "replicates": typed["replicates"],
        "pairs": len(rows),
        "admissible_pairs": len(admissible),
        "dominated_pairs": len(admissible) - len(violations),
        "unstable_pairs": len(unstable),
        "all_dominated": not violations,
        "derived_delta_star": None if params is None else params.delta_star,
        "derived_k2": None if params is None else params.k2,
    }
    print(
        f"{spec.label()}: {len(admissible)}/{len(rows)} admissible pairs, "
        f"{len(violations)} dominance violations"
    )
    failure = None
    if violations:
        worst = violations[0].result
        failure = (
            "small-ball dominance violated at "
            f"eta={worst.eta:g}, delta={worst.delta:g}: "
            f"p_hat - 2*half_width = {worst.p_hat - 2 * worst.half_width:g} "
            f"> bound {worst.analytic_bound:g}"
        )
    return summary, failure


def _cmd_check_a1(typed, paths):
    from .testfuncs import (
        check_floor_consistency,
        check_floor_power_bound,
        derivative_bound_holds,
    )

    f = _build_function(typed["function"])
    floor = check_floor_power_bound(f)
    consistency = check_floor_consistency(f)
    derivative = derivative_bound_holds(f)
    with open(paths["csv"], "w", newline="") as fh:
        fh.write("eta,floor,threshold,witness_x\n")
        for eta, val, thr, wit in zip(
            floor.eta_grid, floor.floor_values, floor.thresholds, floor.witness_x
        ):
            fh.write(f"{float(eta)!r},{float(val)!r},{float(thr)!r},{float(wit)!r}\n")
    if typed["figures"]:
        from .report import floor_figure

        floor_figure(floor, f.label(), paths["png"])
    passes = floor.passes and consistency and derivative
    summary = {
        "function": f.label(),
        "floor_passes": floor.passes,
        "consistency_passes": consistency,
        "derivative_passes": derivative,
        "passes": passes,
    }
    print(
        f"{f.label()}: floor {'ok' if floor.passes else 'FAIL'}, "
        f"consistency {'ok' if consistency else 'FAIL'}, "
        f"derivative {'ok' if derivative else 'FAIL'}"
    )
    failure = None
    if not passes:
        worst = (floor.floor_values / floor.thresholds).min()
        failure = (
            f"{f.label()} fails the window checks "
            f"(floor/threshold ratio down to {worst:g})"
        )
    return summary, failure


def _cmd_diverge(typed, paths):
    from .functionals import _default_dt, divergence_experiment, write_divergence_csv

    spec = _build_process(typed)
    f = _build_function(typed["function"])
    if typed["dt"] is None:
        typed["dt"] = _default_dt(spec)
    report = divergence_experiment(
        spec,
        f,
        epsilon=typed["epsilon"],
        horizons=typed["horizons"],
        replicates=typed["replicates"],
        seed=typed["seed"],
        dt=typed["dt"],
    )
    typed["horizons"] = tuple(float(t) for t in report.t_grid)
    write_divergence_csv(report, paths["csv"])
    if typed["figures"]:
        from .report import divergence_figure

        divergence_figure(report, paths["png"])
    summary = report.summary()
    print(
        f"slope {summary['slope']:.4f}  r_squared {summary['r_squared']:.4f}  "
        f"fraction {summary['fraction_final_above_median']:.3f}  "
        f"{'pass' if summary['pass_divergence'] else 'FAIL'}"
    )
    failure = None
    if not summary["pass_divergence"]:
        failure = (
            "divergence check failed: fraction final-above-median "
            f"{summary['fraction_final_above_median']:.3f}, min normalized "
            f"integral {summary['min_normalized_integral']:g}"
        )
    return summary, failure


def _cmd_selfsim(typed, paths):
    from .functionals import (
        selfsimilar_lowerbound_experiment,
        write_selfsimilar_csv,
    )
    from .kernels import ProcessSpec

    spec = ProcessSpec.fbm(hurst=typed["hurst"])
    report = selfsimilar_lowerbound_experiment(
        spec,
        p=typed["p"],
        epsilon=typed["epsilon"],
        beta=typed["beta"],
        k_max=typed["k_max"],
        replicates=typed["replicates"],
        seed=typed["seed"],
        dt=typed["dt"],
    )
    typed["beta"] = report.beta
    write_selfsimilar_csv(report, paths["csv"])
    if typed["figures"]:
        from .report import selfsimilar_figure

        selfsimilar_figure(report, paths["png"])
    summary = report.summary()
    print(
        f"beta {report.beta:.4f}  min normalized {summary['min_normalized']:g}  "
        f"{'pass' if summary['pass_lower_bound'] else 'FAIL'}"
    )
    failure = None
    if not summary["pass_lower_bound"]:
        failure = (
            "scaling lower bound failed: min normalized integral "
            f"{summary['min_normalized']:g}, median nondecreasing "
            f"{summary['median_nondecreasing']}"
        )
    return summary, failure


def _cmd_ergodic(typed, paths):
    from .functionals import _default_dt, ergodic_limit, write_ergodic_csv

    spec = _build_process(typed)
    f = _build_function(typed["function"])
    if typed["dt"] is None:
        typed["dt"] = _default_dt(spec)
    report = ergodic_limit(
        spec,
        f,
        t_horizon=typed["t"],
        replicates=typed["replicates"],
        seed=typed["seed"],
        dt=typed["dt"],
    )
    typed["t"] = report.t_horizon
    write_ergodic_csv(report, paths["csv"])
    if typed["figures"]:
        from .report import ergodic_figure

        ergodic_figure(report, paths["png"])
    summary = report.summary()
    print(
        f"mean {report.mean:.5f}  variance {report.variance:.5f}  "
        f"min {report.minimum:.5f}"
    )
    return summary, None


def _cmd_estimate_ou(typed, paths):
    from .estimators import (
        OuModelConfig,
        ou_estimator_sweep,
        write_ou_estimates_csv,
    )

    g = _build_function(typed["diffusion"])
    cfg = OuModelConfig(
        theta=typed["theta"],
        g=g,
        g_lower=typed["g_lower"],
        g_upper=math.inf if typed["g_upper"] is None else typed["g_upper"],
        y0=typed["y0"],
        t_horizon=typed["t"],
        dt=typed["dt"],
    )
    seeds = range(typed["seed"], typed["seed"] + typed["seeds"])
    sweep = ou_estimator_sweep(cfg, seeds)
    write_ou_estimates_csv(sweep, paths["csv"])
    if typed["figures"]:
        from .report import estimate_figure

        estimate_figure(
            cfg.theta,
            sweep.theta_hats,
            paths["png"],
            f"mean-reverting drift, g = {g.label()}, T = {cfg.t_horizon:g}",
        )
    summary = sweep.summary()
    print(
        f"median theta_hat {summary['median_theta_hat']:.4f}  "
        f"median |error| {summary['median_abs_error']:.4f}"
    )
    return summary, None


def _cmd_estimate_frac(typed, paths):
    from .estimators import (
        FracModelConfig,
        frac_estimator_sweep,
        write_frac_estimates_csv,
    )
    from .kernels import ProcessSpec

    driver_name = (typed["driver"] or "").lower()
    if driver_name == "ou":
        driver = ProcessSpec.stationary_ou(theta=typed["driver_theta"])
    elif driver_name == "bridge":
        driver = ProcessSpec.periodic_bridge()
    elif driver_name == "fou":
        driver = ProcessSpec.fractional_ou(
            hurst=typed["driver_hurst"], theta=typed["driver_theta"]
        )
    else:
        raise UsageError(
            f"unknown driver {driver_name!r} (choose ou, bridge, fou)"
        )
    cfg = FracModelConfig(
        theta=typed["theta"],
        hurst=typed["hurst"],
        f=_build_function(typed["function"]),
        driver_spec=driver,
        x0=typed["x0"],
        t_horizon=typed["t"],
        dt=typed["dt"],
        epsilon=typed["epsilon"],
    )
    typed["epsilon"] = cfg.epsilon
    seeds = range(typed["seed"], typed["seed"] + typed["seeds"])
    sweep = frac_estimator_sweep(cfg, seeds)
    write_frac_estimates_csv(sweep, paths["csv"])
    if typed["figures"]:
        from .report import estimate_figure

        estimate_figure(
            cfg.theta,
            sweep.theta_hats,
            paths["png"],
            f"fractional ratio estimator, H = {cfg.hurst:g}, "
            f"T = {cfg.t_horizon:g}",
        )
    summary = sweep.summary()
    print(
        f"median theta_hat {summary['median_theta_hat']:.4f}  "
        f"median |error| {summary['median_abs_error']:.4f}"
    )
    return summary, None


def _cmd_oracle(typed, paths):
    from .quadrature import (
        gamma_function,
        shifted_exp_kernel_integral,
        singular_kernel_bound,
        singular_kernel_integral,
        singular_kernel_quadrature,
        small_window_kernel_limit,
    )

    lemma = (typed["lemma"] or "").lower()
    hurst = typed["hurst"]
    rows: list[tuple[str, float, float]] = []
    failure = None
    if lemma == "a1":
        closed = singular_kernel_integral(hurst, typed["x"], typed["y"])
        quad = singular_kernel_quadrature(hurst, typed["x"], typed["y"])
        bound = singular_kernel_bound(hurst, typed["x"])
        rows = [
            ("closed_form", closed, 0.0),
            ("quadrature", quad.value, quad.abs_error_estimate),
            ("upper_bound", bound, 0.0),
        ]
        gap = abs(closed - quad.value)
        print(
            f"closed form {closed:.10f}  quadrature {quad.value:.10f} "
            f"(+/- {quad.abs_error_estimate:.2e})"
        )
        if gap > 1e-8 + 10.0 * quad.abs_error_estimate:
            failure = (
                f"closed form and quadrature disagree by {gap:.3e} at "
                f"hurst={hurst:g}, x={typed['x']:g}, y={typed['y']:g}"
            )
    elif lemma == "a2":
        result = shifted_exp_kernel_integral(hurst, typed["p"])
        rows = [("shifted_integral", result.value, result.abs_error_estimate)]
        print(
            f"I5({typed['p']:g}) = {result.value:.10f} "
            f"(+/- {result.abs_error_estimate:.2e})"
        )
    elif lemma == "a3":
        limit = small_window_kernel_limit(hurst)
        reference = gamma_function(2.0 * hurst - 1.0)
        gap = abs(limit.value - reference)
        rows = [
            ("window_limit", limit.value, limit.abs_error_estimate),
            ("gamma_reference", reference, 0.0),
        ]
        print(
            f"limit {limit.value:.6f}  gamma reference {reference:.6f}  "
            f"gap {gap:.2e}"
        )
        if gap > 1e-3:
            failure = (
                f"window limit misses the gamma reference by {gap:.3e} "
                f"at hurst={hurst:g}"
            )
    elif lemma == "gamma":
        value = gamma_function(typed["z"])
        reference = math.gamma(typed["z"])
        rows = [("gamma", value, 0.0), ("stdlib_reference", reference, 0.0)]
        print(f"gamma({typed['z']:g}) = {value:.12f}")
        if abs(value - reference) > 1e-10 * max(1.0, abs(reference)):
            failure = (
                f"gamma evaluation differs from the library reference by "
                f"{abs(value - reference):.3e}"
            )
    else:
        raise UsageError(f"unknown lemma {lemma!r} (choose a1, a2, a3, gamma)")
    with open(paths["csv"], "w", newline="") as fh:
        fh.write("quantity,value,abs_error\n")
        for name, value, err in rows:
            fh.write(f"{name},{float(value)!r},{float(err)!r}\n")
    summary = {
        "lemma": lemma,
        "hurst": hurst,
        "values": {name: value for name, value, _ in rows},
    }
    return summary, failure


_HANDLERS = {
    "simulate": _cmd_simulate,
    "smallball": _cmd_smallball,
    "check-a1": _cmd_check_a1,
    "diverge": _cmd_diverge,
    "selfsim": _cmd_selfsim,
    "ergodic": _cmd_ergodic,
    "estimate-ou": _cmd_estimate_ou,
    "estimate-frac": _cmd_estimate_frac,
    "oracle": _cmd_oracle,
}

# oracle output is a handful of scalars; no figure to draw
_NO_FIGURE_COMMANDS = {"oracle"}


# ------------------------------------------------------------- dispatch


def _output_paths(out: str) -> dict:
    directory = os.path.dirname(out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return {
        "csv": out + ".csv",
        "json": out + ".summary.json",
        "manifest": out + ".manifest",
        "png": out + ".png",
    }


def _execute(command: str, args, config: dict[str, str]) -> int:
    typed = _resolve(command, args, config)
    if command in _NO_FIGURE_COMMANDS:
        typed["figures"] = False
    if getattr(args, "dry_run", False):
        sys.stdout.write(_manifest_text(command, typed))
        return 0
    paths = _output_paths(typed["out"])
    handler = _HANDLERS[command]
    if typed["threads"] > 0:
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=typed["threads"]):
            summary, failure = handler(typed, paths)
    else:
        summary, failure = handler(typed, paths)
    with open(paths["manifest"], "w", newline="") as fh:
        fh.write(_manifest_text(command, typed))
    with open(paths["json"], "w", newline="") as fh:
        fh.write(json.dumps(summary, indent=2, sort_keys=True))
        fh.write("\n")
    written = [paths["csv"], paths["json"], paths["manifest"]]
    if typed["figures"]:
        written.append(paths["png"])
    print("wrote " + " ".join(written))
    if failure is not None:
        raise CheckFailure(failure)
    return 0


def _dispatch(args) -> int:
    if args.command == "run":
        config = _read_config(args.config_file)
        command = config.pop("command", None)
        if command is None:
            raise UsageError(
                f"{args.config_file} does not set command=<subcommand>"
            )
        if command == "run" or command not in _COMMANDS:
            raise UsageError(f"config names unknown command {command!r}")
        config.pop("version", None)
        inner = argparse.Namespace(
            dry_run=args.dry_run,
            no_figures=args.no_figures,
            out=args.out,
        )
        return _execute(command, inner, config)
    config = _read_config(args.config) if getattr(args, "config", None) else {}
    config.pop("command", None)
    config.pop("version", None)
    return _execute(args.command, args, config)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required", file=sys.stderr)
            return 1
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
