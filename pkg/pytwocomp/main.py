"""
Command line interface
"""

import pytwocomp
from pytwocomp.functions import build_function, indicator, poisson_correlation
from pytwocomp.generators import apply_L, apply_Lhat, apply_Lhat_star
from pytwocomp.gillespie import ESTIMATORS, SimConfig, simulate as run_simulation
from pytwocomp.hierarchy import SIDES, evolve_truncated
from pytwocomp.lpmeasure import lp_integrate
from pytwocomp.rundir import RunDir, parse_config
from pytwocomp.suites import SUITES, run_suite
from pytwocomp.util import SettingsError, TwoCompException

import sys
import csv
import json
import math
import textwrap
import functools

import yaml
import click

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

OVERRIDE_KEYS = ("dim", "region", "orders", "samples", "seed", "C", "alpha", "nu", "rates", "threads", "quadrature")

FORMATS = ("csv", "json")

IDENTITIES = ("exponential",)


def common_options(command):
    """Options shared by all commands; each one overrides the setting of the same name."""
    options = [
        click.option("-d", "--directory", default=".", show_default=True,
                     help="Run directory with the settings files; outputs and logs are written there."),
        click.option("--dim", type=int, default=None, help="Spatial dimension."),
        click.option("--region", default=None, help="Box lo:hi[,lo:hi...]."),
        click.option("--orders", default=None, help="Truncation orders N+,N-."),
        click.option("--samples", type=int, default=None, help="Monte Carlo samples per order pair."),
        click.option("--seed", type=int, default=None, help="Seed of the random streams."),
        click.option("--C", "C", type=float, default=None, help="Weight constant of the function spaces."),
        click.option("--alpha", type=float, default=None, help="Contraction of the dual space constant."),
        click.option("--nu", type=float, default=None, help="Exponential growth base of the N-function."),
        click.option("--rates", default=None, help="Rate suite name, or a yml/json/py file."),
        click.option("--threads", type=int, default=None, help="Worker threads; results do not depend on it."),
        click.option("--quadrature/--no-quadrature", default=None, help="Gauss-Legendre quadrature in 1D."),
        click.option("-o", "--out", default=None, help="Output file, relative to the run directory."),
        click.option("--format", "fmt", type=click.Choice(FORMATS), default=None, help="Output format."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def run_command(name, body):
    """
    Wrap a command body: read the settings, open the run directory, map errors to exit codes,
    and write the manifest.

    The body gets the RunDir, the output path and format, and returns ``(passed, outputs)``.
    """
    @functools.wraps(body)
    def command(directory, out, fmt, **kwargs):
        flags = {key: kwargs.pop(key) for key in list(kwargs) if key in OVERRIDE_KEYS}
        ctx = click.get_current_context()
        try:
            rundir = RunDir(directory, overrides=flags)
            if name != "show":
                rundir.settings.setdefault("seed", 0)
            with rundir:
                passed, outputs = body(rundir, out, fmt, **kwargs)
                if name != "show":
                    rundir.write_manifest(name, outputs)
        except (TwoCompException, ValueError) as e:
            click.echo(f"Error: {e}", err=True)
            ctx.exit(EXIT_ERROR)
        ctx.exit(EXIT_PASS if passed else EXIT_FAIL)
    return command


def write_output(data, path, fmt="json"):
    """Write a flat dictionary as JSON, or as a CSV header and one row."""
    with open(path, "w", newline="") as f:
        if fmt == "csv":
            writer = csv.writer(f)
            writer.writerow(list(data))
            writer.writerow([repr(v) if isinstance(v, float) else v for v in data.values()])
        else:
            json.dump(data, f, indent=2)


def estimate_dict(estimate):
    return {"value": estimate.value, "stderr": estimate.stderr, "orders": list(estimate.orders),
            "method": estimate.method, "provenance": estimate.provenance}


def echo_estimate(estimate):
    click.echo(f"value {estimate.value!r}")
    click.echo(f"stderr {estimate.stderr!r}")
    click.echo(f"orders {estimate.orders[0]},{estimate.orders[1]}")


def _point(text):
    return tuple(float(c) for c in text.split(","))


def _format(params):
    fmt = params.get("format")
    if fmt not in FORMATS:
        raise SettingsError(f"Unknown output format {fmt!r}, choose from {FORMATS}")
    return fmt


def _rates_for_suites(rundir):
    spec = rundir.get("rates")
    if spec is None or spec == "all":
        return None
    name = spec if isinstance(spec, str) else spec.get("name", "custom")
    return {str(name): rundir.rates()}


# Commands
# ========


@click.option("--suite", type=click.Choice(sorted(SUITES) + ["all"]), default=None,
              help="Suite to run [default: all].")
@click.option("--n-max", type=int, default=None, help="Largest configuration in the algebra suite [default: 8].")
@click.option("--trials", type=int, default=None, help="Random trials per check.")
def verify(rundir, out, fmt, suite=None, n_max=None, trials=None):
    """Run verification suites and write a JSON report."""
    params = rundir.resolve("verify", {"suite": "all", "n_max": 8, "trials": None, "out": "report.json"},
                            suite=suite, n_max=n_max, trials=trials, out=out)
    suite_params = dict(rates=_rates_for_suites(rundir), seed=int(rundir.get("seed", 0)), n_max=int(params["n_max"]),
                        C=float(rundir.get("C", 1.0)), alpha=rundir.get("alpha"), nu=rundir.get("nu"), dim=rundir.dim)
    if params["trials"] is not None:
        suite_params["trials"] = int(params["trials"])
    if rundir.get("samples") is not None:
        suite_params["samples"] = int(rundir.get("samples"))
    report = run_suite(params["suite"], rundir.integrator(), **suite_params)
    path = rundir / params["out"]
    report.to_json(path)
    click.echo(report.summary())
    rundir.log(f"Report written to {path}")
    return report.passed, [path]


@click.argument("target", type=click.Choice(["l", "lhat", "lhat-star"]))
@click.option("--function", "function", default=None, help="Built-in function name (G or F).")
@click.option("--correlation", default=None, help="Built-in correlation function name (lhat-star).")
@click.option("--plus", multiple=True, help="A plus point x[,y,...]; repeat for more points.")
@click.option("--minus", multiple=True, help="A minus point x[,y,...]; repeat for more points.")
def apply(rundir, out, fmt, target, function=None, correlation=None, plus=(), minus=()):
    """Apply L, the hierarchical generator, or its dual at one configuration."""
    rundir.override("function", function)
    rundir.override("correlation", correlation)
    if plus or minus:
        rundir.override("eta", {"plus": [list(_point(p)) for p in plus], "minus": [list(_point(m)) for m in minus]})
    params = rundir.resolve("apply", {"out": None, "format": "json"}, target=target, out=out, format=fmt)
    rates = rundir.rates()
    I = rundir.integrator()
    eta = parse_config(rundir.get("eta"))
    if target == "lhat-star":
        k = build_function(rundir.get("correlation", "constant"), correlation=True)
        estimate = apply_Lhat_star(rates, k, eta, I)
    else:
        F = build_function(rundir.get("function", "unit"))
        estimate = (apply_L if target == "l" else apply_Lhat)(rates, F, eta, I)
    result = estimate_dict(estimate)
    result.update(target=target, eta=repr(eta))
    echo_estimate(estimate)
    outputs = []
    if params["out"]:
        path = rundir / params["out"]
        write_output(result, path, _format(params))
        outputs.append(path)
    return True, outputs


@click.option("--function", "function", default=None, help="Built-in function name.")
@click.option("--identity", type=click.Choice(IDENTITIES), default=None,
              help="Integrate the product of plus-point region indicators, which tends to e^(z|region|).")
@click.option("--z", type=float, default=None, help="Intensity of the Lebesgue-Poisson measure.")
def integrate(rundir, out, fmt, function=None, identity=None, z=None):
    """Lebesgue-Poisson integral of a function."""
    rundir.override("z", z)
    rundir.override("function", function)
    params = rundir.resolve("integrate", {"identity": None, "out": None, "format": "json"},
                            identity=identity, out=out, format=fmt)
    if params["identity"] is not None and params["identity"] not in IDENTITIES:
        raise SettingsError(f"Unknown identity {params['identity']!r}, choose from {IDENTITIES}")
    I = rundir.integrator()
    result = {}
    if params["identity"] == "exponential":
        I = I.replace(orders=(I.orders[0], 0))
        F = indicator(I.region, I.orders[0], 0)
        mass = I.z * I.region.volume
        result["expected"] = math.fsum(mass ** n / math.factorial(n) for n in range(I.orders[0] + 1))
    else:
        F = build_function(rundir.get("function", "unit"))
    estimate = lp_integrate(F, I)
    result.update(estimate_dict(estimate))
    echo_estimate(estimate)
    if "expected" in result:
        click.echo(f"expected {result['expected']!r}")
    outputs = []
    if params["out"]:
        path = rundir / params["out"]
        write_output(result, path, _format(params))
        outputs.append(path)
    return True, outputs


@click.option("--side", type=click.Choice(SIDES), default=None, help="Evolve G (quasi_observable) or k (correlation).")
@click.option("--t-end", type=float, default=None, help="Final time.")
@click.option("--dt", type=float, default=None, help="Runge-Kutta step.")
@click.option("--grid-points", type=int, default=None, help="Grid nodes per axis.")
def evolve(rundir, out, fmt, side=None, t_end=None, dt=None, grid_points=None):
    """Evolve the truncated hierarchy and write the spatial means of all components."""
    params = rundir.resolve(
        "evolution",
        {"side": "correlation", "t_end": 1.0, "dt": 1e-3, "grid_points": 32, "times": None, "out": None,
         "format": "csv"},
        side=side, t_end=t_end, dt=dt, grid_points=grid_points, out=out, format=fmt)
    fmt = _format(params)
    if params["side"] == "correlation":
        spec = rundir.get("correlation")
        initial = build_function(spec, correlation=True) if spec else poisson_correlation(1.0, 1.0)
    else:
        initial = build_function(rundir.get("function", "unit"))
    series = evolve_truncated(rundir.rates(), initial, params["side"], float(params["t_end"]), float(params["dt"]),
                              rundir.integrator(), int(params["grid_points"]), params["times"])
    path = rundir / (params["out"] or f"evolution.{fmt}")
    if fmt == "csv":
        series.to_csv(path)
    else:
        components = sorted(set(series.states.sizes))
        write_output({"side": series.side, "times": [float(t) for t in series.times],
                      "means": {f"{n},{m}": [float(v) for v in series.spatial_mean(n, m)] for n, m in components}},
                     path, "json")
    rundir.log(f"Evolution written to {path}")
    return True, [path]


@click.option("--t-end", type=float, default=None, help="Final time.")
@click.option("--replicas", type=int, default=None, help="Number of independent replicas.")
@click.option("--density", default=None, help="Poisson initial densities rho+,rho- (instead of a fixed eta).")
@click.option("--estimator", "estimators", multiple=True, type=click.Choice(ESTIMATORS), help="Estimators to record.")
@click.option("--pair-radius", type=float, default=None, help="Radius of the pair-count estimators.")
def simulate(rundir, out, fmt, t_end=None, replicas=None, density=None, estimators=(), pair_radius=None):
    """Gillespie simulation on the periodic box; writes replica means and standard errors."""
    params = rundir.resolve(
        "simulation",
        {"t_end": 1.0, "replicas": 1000, "density": None, "times": None,
         "estimators": ["n_plus", "n_minus", "n_total"], "pair_radius": 0.1, "out": None, "format": "csv"},
        t_end=t_end, replicas=replicas, density=density, estimators=list(estimators) or None,
        pair_radius=pair_radius, out=out, format=fmt)
    fmt = _format(params)
    if params["density"] is not None:
        density = params["density"]
        try:
            initial = tuple(float(v) for v in (density.split(",") if isinstance(density, str) else density))
        except (TypeError, ValueError):
            raise SettingsError(f"Invalid densities {density!r}")
        if len(initial) != 2:
            raise SettingsError(f"Two densities rho+,rho- are needed, got {density!r}")
        params["density"] = list(initial)
    else:
        initial = parse_config(rundir.get("eta"))
    cfg = SimConfig(
        rundir.region, rundir.rates(torus=True), initial,
        t_end=float(params["t_end"]),
        replicas=int(params["replicas"]),
        seed=int(rundir.get("seed", 0)),
        times=params["times"],
        estimators=tuple(params["estimators"]),
        pair_radius=float(params["pair_radius"]),
        threads=int(rundir.get("threads", 1)),
    )
    series = run_simulation(cfg)
    path = rundir / (params["out"] or f"moments.{fmt}")
    if fmt == "csv":
        series.to_csv(path)
    else:
        write_output({"times": [float(t) for t in series.times],
                      "mean": {name: [float(v) for v in series.mean(name)] for name in series.estimators},
                      "stderr": {name: [float(v) for v in series.stderr(name)] for name in series.estimators}},
                     path, "json")
    rundir.log(f"Moments written to {path}")
    return True, [path]


@click.option("-s", "--sources", count=True, help="Print the file each setting was read from.")
def show(rundir, out, fmt, sources=False, stream=None):
    """Print the merged settings of the run directory in yaml format."""
    dictionary = {"directory": str(rundir), "settings": rundir.settings}
    if sources:
        dictionary["sources"] = rundir.sources
    yaml.dump(dictionary, stream=stream or sys.stdout)
    return True, []


COMMANDS = [verify, apply, integrate, evolve, simulate]


def _decorated(body, name):
    params = getattr(body, "__click_params__", [])
    command = run_command(name, body)
    command.__click_params__ = list(params)
    return common_options(command)


def forge_command_line_interface():
    """
    Forge the click.Group that holds all commands.

    Returns
    -------
    A click.Group with the commands verify, apply, integrate, evolve, simulate and show.
    """
    main = click.Group(
        name="twocomp",
        help=textwrap.dedent(
            """
            Harmonic analysis of two-component particle systems.
            Settings are read from twocomp.yml or twocomp.json in the run directory and its parents;
            command-line options override them.
            """)
    )
    main = click.version_option(version=pytwocomp.__version__, prog_name="twocomp")(main)
    for body in COMMANDS + [show]:
        name = body.__name__
        main.command(name=name, help=body.__doc__)(_decorated(body, name))
    return main


def entrypoint():
    """
    Entrypoint for the twocomp command.
    """
    command_group = forge_command_line_interface()
    command_group()
