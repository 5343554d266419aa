#!/usr/bin/env python3

'''
This script is the entry point for the twoline command line tool, which
solves the joint dividend, excess-of-loss reinsurance and capital injection
problem of a two-line insurer and checks the solution.

Additional packages are necessary to use this script. These can be found in the
requirements.txt file at the root of the repository. If you do not wish to
have these packages installed globally, the use of a virtual environment is
encouraged. Either way, to install, use the command:

    pip install -r requirements.txt
'''

# core libraries
import logging
import os
from textwrap import fill

# third-party libraries
import click
import numpy as np
import pkg_resources

# twoline libraries
from . exceptions import TwoLineError
from . model import RuinRule, SimConfig
from . solver import SolvedPolicy, normalize, solve
from . simulate import compare_policies, event_rows, standard_perturbations, simulate_value
from . strategy import strategy_table
from . verify import default_grid, relax, run_all
from . import util

# exit code of a run whose checks did not all pass
CHECK_FAILED = 2

class MutuallyExclusiveOption(click.Option):
    '''
    A custom Click option for handling mutually exclusive arguments given on the
    command line.
    '''
    def __init__(self, *args, **kwargs):
        '''
        During construction grab out our new mutually_exclusive parameter and
        store it.
        '''
        # kwargs should have an entry for the listing the option(s) this option
        # is mutually exclusive with.
        self.mutually_exclusive = set(kwargs.pop("mutually_exclusive", []))
        super().__init__(*args, **kwargs)

    def handle_parse_result(self, ctx, opts, args):
        '''
        Check for the mutually exclusive options
        '''
        # if both this option's value and the option(s) from mutually
        # exclusive's value evaluate to True, raise an error
        if self.name in opts and opts[self.name]:
            for other in self.mutually_exclusive:
                if other in opts and opts[other]:
                    raise click.UsageError("Options '{}' and '{}' are mutually exclusive".format(self.name, other))

        return super().handle_parse_result(ctx, opts, args)

def get_version():
    '''
    Retrieves the version of this package
    '''
    try:
        return pkg_resources.get_distribution("twoline-dividends").version
    except pkg_resources.DistributionNotFound:
        return "unknown"

def validate_grid(ctx, param, value): # pylint: disable=unused-argument
    '''
    Validate a grid given as x_min:x_max:points.
    '''
    if value is None:
        return None
    parts = value.split(":")
    try:
        if len(parts) != 3:
            raise ValueError(value)
        x_min, x_max, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        logging.error("Grid '%s' is not of the form x_min:x_max:points", value)
        raise click.BadParameter("the grid must look like x_min:x_max:points, for example 0:3:301")
    if points < 2 or not 0.0 <= x_min < x_max:
        logging.error("Grid '%s' needs 0 <= x_min < x_max and at least two points", value)
        raise click.BadParameter("the grid needs 0 <= x_min < x_max and at least two points")
    return np.linspace(x_min, x_max, points)

def problem_options(func):
    '''
    The --config / --problem / --out options shared by every command.
    '''
    func = click.option('-o', '--out', 'out_dir', default=util.RUNS_DIR, envvar="TWOLINE_OUT",
                        type=click.Path(file_okay=False),
                        help="Directory the output files are written to")(func)
    func = click.option('-p', '--problem', 'problem_name', envvar="TWOLINE_PROBLEM",
                        type=click.Choice(util.PACKAGED_PROBLEMS),
                        help="A packaged problem [mutually exclusive with --config]",
                        cls=MutuallyExclusiveOption, mutually_exclusive=["config_path"])(func)
    func = click.option('-c', '--config', 'config_path', envvar="TWOLINE_CONFIG",
                        type=click.Path(exists=True, dir_okay=False),
                        help="A problem file [mutually exclusive with --problem]",
                        cls=MutuallyExclusiveOption, mutually_exclusive=["problem_name"])(func)
    return func

def simulation_options(func):
    '''
    The Monte Carlo options shared by simulate and compare.
    '''
    defaults = SimConfig()
    options = [
        click.option('--x1', default=0.5, show_default=True, envvar="TWOLINE_X1",
                     help="Line 1's starting reserve (problem labelling)"),
        click.option('--x2', default=0.5, show_default=True, envvar="TWOLINE_X2",
                     help="Line 2's starting reserve (problem labelling)"),
        click.option('--paths', default=defaults.paths, show_default=True, envvar="TWOLINE_PATHS",
                     help="Number of simulated paths"),
        click.option('--dt', default=defaults.dt, show_default=True, envvar="TWOLINE_DT", help="Time step"),
        click.option('--horizon', default=defaults.horizon, show_default=True, envvar="TWOLINE_HORIZON",
                     help="Simulated time horizon"),
        click.option('--seed', default=defaults.seed, show_default=True, envvar="TWOLINE_SEED",
                     help="Seed of the random streams"),
        click.option('--workers', default=defaults.workers, show_default=True, envvar="TWOLINE_WORKERS",
                     help="Number of threads running batches"),
        click.option('--antithetic/--no-antithetic', default=False, envvar="TWOLINE_ANTITHETIC",
                     help="Pair every path with its mirrored noise"),
        click.option('--ruin-rule', default=defaults.ruin_rule.value, show_default=True,
                     envvar="TWOLINE_RUIN_RULE", type=click.Choice([rule.value for rule in RuinRule]),
                     help="What happens when a line at zero is offered no transfer"),
    ]
    for option in reversed(options):
        func = option(func)
    return func

def _problem(config_path, problem_name):
    '''
    Load the problem named on the command line.
    '''
    if not config_path and not problem_name:
        raise click.UsageError("One of --config or --problem is required")
    path = config_path or util.packaged_problem(problem_name)
    return util.load_problem(path)

def _fail(err):
    '''
    Report a library error and abort.
    '''
    click.echo(fill(str(err)))
    raise click.Abort()

def _swap(pair, swapped):
    '''
    Translate a pair between the problem's labelling and the solver's.
    '''
    return (pair[1], pair[0]) if swapped else pair

def _summary(policy, swapped):
    '''
    The case tag and thresholds on one line, constants below.
    '''
    thresholds = ", ".join("{}={:.6g}".format(key, value) for key, value in policy.thresholds.items()
                           if value is not None)
    lines = ["{}, {}".format(policy.case_tag.value, thresholds)]
    if swapped:
        lines.append("lines swapped: Line 1 above is the problem's [line2] (a = {:.6g})".format(policy.model.a))
    for key, value in policy.constants.items():
        if value is None:
            continue
        lines.append("  {} = {:.12g}".format(key, value))
    return "\n".join(lines)

def _annotations(xs, policy):
    '''
    Name the thresholds that fall in (x_{i-1}, x_i] next to row i.
    '''
    notes = [""] * len(xs)
    for key, level in policy.thresholds.items():
        if key == "m0" or level is None or np.isinf(level):
            continue
        index = int(np.searchsorted(xs, level, side="left"))
        if index < len(xs):
            notes[index] = (notes[index] + " " + key).strip()
    return notes

def _sim_config(paths, dt, horizon, seed, workers, antithetic, ruin_rule, log_paths=0):
    batch_size = SimConfig().batch_size
    return SimConfig(dt=dt, horizon=horizon, paths=paths, seed=seed, antithetic=antithetic,
                     batch_size=batch_size, workers=workers, ruin_rule=RuinRule(ruin_rule), log_paths=log_paths)

@click.group()
@click.version_option(version=get_version(), message="twoline\nversion %(version)s")
@click.option('-v', '--verbosity', count=True,
              help="Set the level of verbosity. Multiple options increase the verbosity")
def cli(verbosity):
    '''
    Command Line Utility for solving the optimal dividend, reinsurance and
    capital injection policy of a two-line insurer, simulating it, and
    checking it.
    '''
    # set the logging based on the verbosity
    if verbosity > 4:
        verbosity = 4
    logging.basicConfig(level=util.LOGGING_LEVELS[str(verbosity)], format='%(asctime)s - %(levelname)s: %(message)s')

@cli.command()
def problems():
    '''
    List the packaged problem files.
    '''
    for name in util.available_problems():
        click.echo("{:<6} {}".format(name, util.packaged_problem(name)))

@cli.command(name="solve")
@problem_options
@click.option('--closure', default="smooth", show_default=True, type=click.Choice(["smooth", "gap"]),
              envvar="TWOLINE_CLOSURE", help="How the middle case is closed")
def solve_command(config_path, problem_name, out_dir, closure):
    '''
    Solve a problem, print its case and thresholds, and save the policy.
    '''
    try:
        problem = _problem(config_path, problem_name)
        model, swapped = normalize(problem)
        policy = solve(model, closure)
        util.create_directory(out_dir)
        policy_path = os.path.join(out_dir, "{}.policy".format(problem.name))
        with open(policy_path, "w") as policy_ref:
            policy_ref.write(policy.to_text())
    except TwoLineError as err:
        _fail(err)
    click.echo(_summary(policy, swapped))
    click.echo("policy written to {}".format(policy_path))

@cli.command()
@problem_options
@click.option('-s', '--policy', 'policy_path', envvar="TWOLINE_POLICY", type=click.Path(exists=True, dir_okay=False),
              help="A policy saved by solve [mutually exclusive with --config and --problem]",
              cls=MutuallyExclusiveOption, mutually_exclusive=["config_path", "problem_name"])
@click.option('-g', '--grid', envvar="TWOLINE_GRID", callback=validate_grid,
              help="Reserve grid as x_min:x_max:points [default: 0 to the top threshold plus 3, 601 points]")
def curve(config_path, problem_name, out_dir, policy_path, grid):
    '''
    Write the value curve (x, g, g1, g2) and the strategy curve
    (x, pi1, pi2, c1, c2) as CSV files.
    '''
    try:
        if policy_path:
            with open(policy_path, "r") as policy_ref:
                policy = SolvedPolicy.from_text(policy_ref.read())
            name = os.path.splitext(os.path.basename(policy_path))[0]
        else:
            problem = _problem(config_path, problem_name)
            policy = solve(normalize(problem)[0])
            name = problem.name
        swapped = policy.model.swapped
        xs = grid if grid is not None else np.linspace(0.0, policy.top + 3.0, 601)
        g, g1, g2 = policy.value_array(xs)
        notes = _annotations(xs, policy)
        value_rows = [[x, value, slope, curvature, note]
                      for x, value, slope, curvature, note in zip(xs.tolist(), g.tolist(), g1.tolist(),
                                                                  g2.tolist(), notes)]
        strategy_rows = []
        for (x, pi1, pi2, c1, c2), note in zip(strategy_table(policy, xs), notes):
            pi1, pi2 = _swap((pi1, pi2), swapped)
            c1, c2 = _swap((c1, c2), swapped)
            strategy_rows.append([x, pi1, pi2, c1, c2, note])
        util.create_directory(out_dir)
        value_path = os.path.join(out_dir, "{}-value.csv".format(name))
        strategy_path = os.path.join(out_dir, "{}-strategy.csv".format(name))
        util.write_csv(value_path, ["x", "g", "g1", "g2", "threshold"], value_rows)
        util.write_csv(strategy_path, ["x", "pi1", "pi2", "c1", "c2", "threshold"], strategy_rows)
    except TwoLineError as err:
        _fail(err)
    except OSError as err:
        _fail("The policy could not be read: {}".format(err))
    click.echo("value curve written to {}".format(value_path))
    click.echo("strategy curve written to {}".format(strategy_path))

@cli.command()
@problem_options
@simulation_options
@click.option('--events', 'log_paths', default=0, envvar="TWOLINE_EVENTS",
              help="Log injections, lumps and ruin for the first N paths")
def simulate(config_path, problem_name, out_dir, x1, x2, paths, dt, horizon, seed, workers, antithetic, ruin_rule,
             log_paths):
    '''
    Estimate the value of the optimal policy from (x1, x2) by Monte Carlo and
    compare it with the closed form.
    '''
    try:
        problem = _problem(config_path, problem_name)
        model, swapped = normalize(problem)
        config = _sim_config(paths, dt, horizon, seed, workers, antithetic, ruin_rule, log_paths)
        policy = solve(model)
        start = _swap((x1, x2), swapped)
        estimate = simulate_value(policy, start[0], start[1], config)
        closed_form = policy.value(x1 + x2)[0]
        util.create_directory(out_dir)
        csv_path = os.path.join(out_dir, "{}-simulate.csv".format(problem.name))
        util.write_csv(csv_path, ["x1", "x2", "mean", "stderr", "paths", "paths_ruined", "truncation_bound", "g",
                                  "ruin_rule"],
                       [[x1, x2, estimate.mean, estimate.stderr, estimate.paths, estimate.paths_ruined,
                         estimate.truncation_bound, closed_form, config.ruin_rule.value]])
        if log_paths:
            util.write_csv(os.path.join(out_dir, "{}-events.csv".format(problem.name)),
                           ["path", "t", "x1", "x2", "event"], event_rows(estimate))
    except TwoLineError as err:
        _fail(err)
    click.echo("{}: J({:g}, {:g}) = {:.6f} +/- {:.6f} over {} paths ({:.1f}% ruined)".format(
        policy.case_tag.value, x1, x2, estimate.mean, estimate.stderr, estimate.paths,
        100.0 * estimate.paths_ruined))
    click.echo("closed form g({:g}) = {:.6f}, difference {:.6f}, truncation bound {:.2e}".format(
        x1 + x2, closed_form, estimate.mean - closed_form, estimate.truncation_bound))
    if config.ruin_rule is RuinRule.REGIONS:
        click.echo("regions rule: paths end when a line at zero gets no transfer while x1 + x2 > 0, "
                   "so J falls below g; --ruin-rule aggregate ends them at the sum ruin time of g")
    click.echo("results written to {}".format(csv_path))

@cli.command()
@problem_options
@click.option('-n', '--points', default=2001, show_default=True, envvar="TWOLINE_POINTS",
              type=click.IntRange(2, None), help="Number of reserve grid points")
@click.option('-t', '--check-tol', default=1.0, show_default=True, envvar="TWOLINE_CHECK_TOL",
              help="Factor applied to every check's tolerance")
@click.option('-d', '--dominance', default=0, show_default=True, envvar="TWOLINE_DOMINANCE",
              help="Number of random mixed treaties to test against pure excess-of-loss")
def verify(config_path, problem_name, out_dir, points, check_tol, dominance):
    '''
    Run the HJB, smooth fit, finite difference, shape and dominance checks.
    Exits with status 2 when a check fails.
    '''
    try:
        problem = _problem(config_path, problem_name)
        policy = solve(normalize(problem)[0])
        report = relax(run_all(policy, default_grid(policy, points), dominance), check_tol)
        util.create_directory(out_dir)
        csv_path = os.path.join(out_dir, "{}-verify.csv".format(problem.name))
        util.write_csv(csv_path, ["check", "points", "max_residual", "location", "tolerance", "status"],
                       report.to_rows())
        with open(os.path.join(out_dir, "{}-verify.txt".format(problem.name)), "w") as summary_ref:
            summary_ref.write(report.summary() + "\n")
    except TwoLineError as err:
        _fail(err)
    click.echo(report.summary())
    if not report.passed:
        logging.error("%d checks failed for %s", len(report.failures()), problem.name)
        click.get_current_context().exit(CHECK_FAILED)

@cli.command()
@problem_options
@simulation_options
def compare(config_path, problem_name, out_dir, x1, x2, paths, dt, horizon, seed, workers, antithetic, ruin_rule):
    '''
    Simulate the optimal policy against the standard perturbations on common
    random numbers. Exits with status 2 when a perturbation does better by
    more than 2.5 paired standard errors.
    '''
    try:
        problem = _problem(config_path, problem_name)
        model, swapped = normalize(problem)
        config = _sim_config(paths, dt, horizon, seed, workers, antithetic, ruin_rule)
        policy = solve(model)
        start = _swap((x1, x2), swapped)
        comparisons = compare_policies(policy, standard_perturbations(policy), start[0], start[1], config)
        util.create_directory(out_dir)
        csv_path = os.path.join(out_dir, "{}-compare.csv".format(problem.name))
        util.write_csv(csv_path, ["policy", "optimal", "perturbed", "difference", "paired_stderr", "status"],
                       [[comparison.name, comparison.optimal_mean, comparison.perturbed_mean, comparison.difference,
                         comparison.paired_stderr, "pass" if comparison.dominated() else "FAIL"]
                        for comparison in comparisons])
    except TwoLineError as err:
        _fail(err)
    for comparison in comparisons:
        click.echo("{:<24} {:>4}  optimal - perturbed = {:.6f} +/- {:.6f}".format(
            comparison.name, "pass" if comparison.dominated() else "FAIL", comparison.difference,
            comparison.paired_stderr))
    click.echo("results written to {}".format(csv_path))
    if not all(comparison.dominated() for comparison in comparisons):
        logging.error("A perturbation beat the solved policy for %s", problem.name)
        click.get_current_context().exit(CHECK_FAILED)
