import os
import sys
from functools import wraps

import click

from . import asymptotics, flow, kernels, saddles
from .errors import ConfigError, NumericalError, QuadratureError

here = os.path.dirname(os.path.realpath(__file__))
sys.path.append(os.path.join(here, "../.."))

import config
from utils.general_utils import (
    THIMBLE_CONFIG,
    merge_settings,
    read_config_file,
    report,
    rows_to_frame,
    write_output,
)

FLOAT_KEYS = {"xi", "xf", "T", "hbar", "theta", "phi"}
INT_KEYS = {"n", "m", "nmax", "mmax", "samples", "grid_n", "n_jobs", "w_max"}
TEXT_KEYS = {"time", "system", "format", "out"}
TOLERANCE_KEYS = {f"tol_{name}" for name in config.TOLERANCES}

FLOW_SYSTEMS = ("free", "harmonic", "doublewell")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# CONFIGURATION


def default_settings():
    defaults = dict(config.FIGURE_DEFAULTS)
    defaults.update({f"tol_{name}": value for name, value in config.TOLERANCES.items()})
    defaults["system"] = None
    defaults["n_jobs"] = config.SOLVER_SETTINGS["n_jobs"]
    return defaults


def _coerce(key, value):
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
        return None
    try:
        if key in FLOAT_KEYS or key in TOLERANCE_KEYS:
            return float(value)
        if key in INT_KEYS:
            return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"Invalid value for {key}: {value!r}.")
    return str(value)


def load_config_file(path):
    if path is None:
        return {}
    try:
        values = read_config_file(path)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")
    except ValueError as e:
        raise ConfigError(str(e))
    known = FLOAT_KEYS | INT_KEYS | TEXT_KEYS | TOLERANCE_KEYS
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"Unknown keys in {path}: {', '.join(unknown)}.")
    return {key: _coerce(key, value) for key, value in values.items()}


def resolve_settings(command, flags):
    """Flags > config file (--config or THIMBLE_CONFIG) > config.py defaults."""
    flags = dict(flags)
    path = flags.pop("config_path", None) or THIMBLE_CONFIG
    flags.pop("verbose", None)
    settings = merge_settings(default_settings(), load_config_file(path), flags)
    if settings["format"] not in ("json", "csv"):
        raise ConfigError(f"Unknown output format: {settings['format']}.")
    if settings["hbar"] is None or not settings["hbar"] > 0:
        raise ConfigError(f"hbar must be positive, got {settings['hbar']}.")
    settings["command"] = command
    return settings


def tolerances(settings):
    return {name: settings[f"tol_{name}"] for name in config.TOLERANCES}


def boundary_data(settings):
    return saddles.BoundaryData.from_duration(
        settings["xi"], settings["xf"], settings["T"], settings["time"]
    )


def label(settings):
    return saddles.SaddleLabel(settings["n"], settings["m"])


def meta(settings):
    return {"version": config.VERSION, "schema": config.OUTPUT_SETTINGS["schema_version"], "config": settings}


# OPTIONS


def run_options(function):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="key = value config file."),
        click.option("--verbose", is_flag=True, default=None, help="Progress banners on stderr."),
        click.option("--xi", type=float),
        click.option("--xf", type=float),
        click.option("--T", "T", type=float, help="Duration tf - ti."),
        click.option("--time", type=str, help="real, imag or wick:<phi>."),
        click.option("--n", type=int),
        click.option("--m", type=int),
        click.option("--nmax", type=int),
        click.option("--mmax", type=int),
        click.option("--hbar", type=float),
        click.option("--theta", type=float),
        click.option("--phi", type=float, help="Wick angle for kernels."),
        click.option("--w-max", "w_max", type=int, help="Winding truncation."),
        click.option("--system", type=click.Choice(list(kernels.SYSTEMS) + ["doublewell"])),
        click.option("--samples", type=int),
        click.option("--grid-n", "grid_n", type=int),
        click.option("--n-jobs", "n_jobs", type=int),
        click.option("--out", type=str, help="Output path, - for stdout."),
        click.option("--format", "format", type=click.Choice(["json", "csv"])),
    ]
    options += [
        click.option(f"--tol-{name}", f"tol_{name}", type=float) for name in sorted(config.TOLERANCES)
    ]
    for option in reversed(options):
        function = option(function)
    return function


def command_runner(name):
    """Resolve settings, run the body and map failures to exit codes."""

    def decorator(body):
        @wraps(body)
        def wrapper(**flags):
            ctx = click.get_current_context()
            verbose = bool(flags.get("verbose"))
            try:
                settings = resolve_settings(name, flags)
                rows, columns = body(settings, verbose)
                frame = rows_to_frame(rows, columns)
                write_output(frame, meta(settings), settings["format"], settings["out"])
            except ConfigError as e:
                click.echo(f"*** Error in configuration: {e}", err=True)
                ctx.exit(EXIT_CONFIG)
            except NumericalError as e:
                click.echo(f"*** Error in {name}: {type(e).__name__}: {e}", err=True)
                ctx.exit(EXIT_NUMERICAL)
            except (ArithmeticError, ValueError) as e:
                # stray failures from numpy and scipy
                click.echo(f"*** Error in {name}: unexpected {type(e).__name__}: {e}", err=True)
                ctx.exit(EXIT_NUMERICAL)
            report(f"+++ {name} complete", verbose)

        return wrapper

    return decorator


@click.group()
@click.version_option(config.VERSION)
def cli():
    """Real-time path integrals on Lefschetz thimbles."""


# COMMANDS

SADDLE_COLUMNS = [
    "n", "m", "re_ksq", "im_ksq", "re_p", "im_p", "re_action", "im_action",
    "class", "n_sigma", "status", "message",
]


def _saddle_row(solution, settings):
    row = {
        "n": solution.label.n,
        "m": solution.label.m,
        "ksq": solution.ksq,
        "p": solution.p,
        "status": "solved",
    }
    try:
        value = saddles.action(solution, settings["tol_quadrature"]).value
    except QuadratureError as e:
        row.update(status="quadrature", message=str(e))
        return row
    saddle_class = saddles.classify(
        solution,
        settings["hbar"],
        action_value=value,
        samples=settings["samples"],
        tolerances=tolerances(settings),
    )
    row.update(action=value, **{"class": saddle_class.kind, "n_sigma": saddle_class.nSigma})
    return row


@cli.command("saddle-atlas")
@run_options
@command_runner("saddle-atlas")
def saddle_atlas(settings, verbose):
    """Every label up to (nmax, mmax) with k^2, p, action and class."""
    bc = boundary_data(settings)
    solutions, errors = saddles.enumerateSaddles(
        bc,
        settings["nmax"],
        settings["mmax"],
        n_jobs=settings["n_jobs"],
        tolerances=tolerances(settings),
        verbose=verbose,
    )
    rows = [_saddle_row(solution, settings) for solution in solutions]
    for kind, failures in errors.items():
        for failed, message in failures:
            rows.append({"n": failed.n, "m": failed.m, "status": kind, "message": message})
    rows.sort(key=lambda row: (row["n"], row["m"]))
    return rows, SADDLE_COLUMNS


@cli.command("trajectory")
@run_options
@command_runner("trajectory")
def trajectory(settings, verbose):
    """z(t) of one label at --samples times."""
    solution = saddles.solveModulus(
        label(settings), boundary_data(settings), tolerances=tolerances(settings), verbose=verbose
    )
    times = saddles.sample_times(solution, settings["samples"])
    values = saddles.trajectory(solution, times)
    rows = [{"t": t, "z": z} for t, z in zip(times, values)]
    return rows, ["t", "re_z", "im_z"]


@cli.command("action")
@run_options
@command_runner("action")
def action(settings, verbose):
    """Complex action and class of one label."""
    solution = saddles.solveModulus(
        label(settings), boundary_data(settings), tolerances=tolerances(settings), verbose=verbose
    )
    result = saddles.action(solution, settings["tol_quadrature"])
    saddle_class = saddles.classify(
        solution,
        settings["hbar"],
        action_value=result.value,
        samples=settings["samples"],
        tolerances=tolerances(settings),
    )
    row = {
        "n": solution.label.n,
        "m": solution.label.m,
        "ksq": solution.ksq,
        "p": solution.p,
        "action": result.value,
        "action_error": result.error,
        "class": saddle_class.kind,
        "n_sigma": saddle_class.nSigma,
    }
    columns = [
        "n", "m", "re_ksq", "im_ksq", "re_p", "im_p", "re_action", "im_action",
        "action_error", "class", "n_sigma",
    ]
    return [row], columns


@cli.command("kernel")
@run_options
@command_runner("kernel")
def kernel(settings, verbose):
    """Kernel of the free, circle, harmonic or Wick-rotated free system."""
    system = settings["system"] or kernels.FREE
    if system not in kernels.SYSTEMS:
        raise ConfigError(f"No kernel for system {system}.")
    phi = kernels.REAL_TIME_PHI
    if system == kernels.WICK:
        phi = settings["phi"] or 0.0
    elif system == kernels.CIRCLE and settings["phi"] is not None:
        phi = settings["phi"]
    params = kernels.KernelParams(
        xi=settings["xi"],
        xf=settings["xf"],
        T=settings["T"],
        hbar=settings["hbar"],
        theta=settings["theta"],
        w_max=settings["w_max"],
        phi=phi,
    )
    value = kernels.kernel(system, params)
    row = {
        "system": system,
        "amplitude": value.amplitude,
        "classical_action": value.classicalAction,
        "maslov": value.maslov,
        "truncation_error": value.truncation_error,
    }
    columns = [
        "system", "re_amplitude", "im_amplitude", "re_classical_action",
        "im_classical_action", "maslov", "truncation_error",
    ]
    return [row], columns


@cli.command("flow-spectrum")
@run_options
@command_runner("flow-spectrum")
def flow_spectrum(settings, verbose):
    """Sorted linearized-flow eigenvalues and their pairing residuals."""
    system = settings["system"] or "doublewell"
    if system not in FLOW_SYSTEMS:
        raise ConfigError(f"No flow spectrum for system {system}.")
    bc = boundary_data(settings)
    if system == "doublewell":
        solution = saddles.solveModulus(
            label(settings), bc, tolerances=tolerances(settings), verbose=verbose
        )
        spectrum = flow.linearizedSpectrum(
            solution, settings["grid_n"], eigen_tolerance=settings["tol_eigen"]
        )
    else:
        state = flow.saddleState(
            system, bc, settings["grid_n"], eigen_tolerance=settings["tol_eigen"]
        )
        spectrum = flow.linearizedSpectrum(
            state, potential=system, eigen_tolerance=settings["tol_eigen"]
        )
    residuals = flow.pairingResiduals(spectrum)
    rows = [
        {"index": index, "lambda": pair.lambda_, "pairing_residual": residual}
        for index, (pair, residual) in enumerate(zip(spectrum, residuals))
    ]
    return rows, ["index", "lambda", "pairing_residual"]


REPORT_COLUMNS = [
    "regime", "n", "m", "T", "time", "re_p_asymptotic", "im_p_asymptotic",
    "re_p_solver", "im_p_solver", "p_relative_error", "re_action_asymptotic",
    "im_action_asymptotic", "re_action_solver", "im_action_solver",
    "action_relative_error", "validity_hint", "error",
]


@cli.command("asymptotics")
@run_options
@command_runner("asymptotics")
def asymptotics_report(settings, verbose):
    """Solver values next to the short-time, instanton, sphaleron and oscillatory references."""
    return asymptotics.asymptoticsReport(verbose=verbose), REPORT_COLUMNS


def main():
    cli(prog_name="thimble")
