"""Command line: ``bench autologit ...`` or the ``network-autologit`` console script.

Options can also come from a JSON file given with ``--config``; its keys are option names
with underscores (``lambda_grid``, ``max_sweeps``, ...). Flags on the command line win.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

import click
from joblib import cpu_count

from network_autologit import pipeline
from network_autologit.exceptions import AutologitError, ConfigError
from network_autologit.model.optimizer import FitConfig
from network_autologit.model.selection import LambdaGrid
from network_autologit.model.simulate import SimDesign

FIT_FIELDS = (
    "max_sweeps",
    "objective_tolerance",
    "kkt_tolerance",
    "coefficient_cap",
    "min_curvature",
)


def handle_errors(func):
    """Map engine errors to their exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except AutologitError as exc:
            click.echo(f"Error: {exc}", err=True)
            raise SystemExit(exc.exit_code) from exc

    return wrapper


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise click.BadParameter(f"cannot read config file: {exc}", param_hint="--config")
    if not isinstance(data, dict):
        raise click.BadParameter("config file must hold a JSON object", param_hint="--config")
    return data


@click.group("autologit")
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="JSON file of option defaults.",
)
@click.pass_context
def autologit(ctx: click.Context, config_file: Path | None) -> None:
    """Sparse autologistic models for dynamic directed networks."""
    data = _load_config(config_file)
    if data:
        ctx.default_map = {name: data for name in autologit.commands}


def fit_options(func):
    options = [
        click.option("--input", "input_path", required=True, type=click.Path(path_type=Path)),
        click.option("--output", required=True, type=click.Path(path_type=Path)),
        click.option("--lambda-grid", help='Comma separated penalties, e.g. "2.5,5,10".'),
        click.option("--lam", type=float, help="Single penalty instead of a grid."),
        click.option("--max-sweeps", type=int, default=FitConfig.max_sweeps, show_default=True),
        click.option(
            "--objective-tolerance", type=float, default=FitConfig.objective_tolerance
        ),
        click.option("--kkt-tolerance", type=float, default=FitConfig.kkt_tolerance),
        click.option("--coefficient-cap", type=float, default=FitConfig.coefficient_cap),
        click.option("--min-curvature", type=float, default=FitConfig.min_curvature),
        click.option("--significance-tolerance", type=float, default=1e-8),
        click.option("--workers", type=int, default=cpu_count, show_default="all cores"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run_config(options: dict, **extra) -> pipeline.RunConfig:
    grid = None
    if options.get("lambda_grid"):
        grid = LambdaGrid.parse(options["lambda_grid"])
    elif options.get("lam") is None:
        grid = LambdaGrid.log_spaced()
    values = {name: options[name] for name in FIT_FIELDS}
    values["lam"] = 1.0 if options.get("lam") is None else options["lam"]
    fit = FitConfig.from_mapping(values)
    return pipeline.RunConfig(
        output=options["output"],
        input=options["input_path"],
        grid=grid,
        fit=fit,
        workers=options["workers"],
        significance_tolerance=options["significance_tolerance"],
        **extra,
    )


@autologit.command("simulate")
@click.option("--n", "n", required=True, type=int, help="Number of nodes.")
@click.option("--t", "T", required=True, type=int, help="Number of slices.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--groups", type=int, default=4, show_default=True)
@click.option("--xi-magnitude", type=float, default=1.0, show_default=True)
@click.option("--alpha-mean", type=float, default=0.0, show_default=True)
@click.option("--alpha-sd", type=float, default=0.5, show_default=True)
@click.option("--beta-mean", type=float, default=1.0, show_default=True)
@click.option("--beta-sd", type=float, default=0.5, show_default=True)
@click.option("--gamma-mean", type=float, default=1.0, show_default=True)
@click.option("--gamma-sd", type=float, default=0.5, show_default=True)
@click.option("--output", required=True, type=click.Path(path_type=Path))
@handle_errors
def simulate(output: Path, **options) -> None:
    """Simulate a series with the six-nonzero-per-class design."""
    design = SimDesign.from_mapping(options)
    pipeline.run_simulate(design, output)
    click.echo(f"Simulated n={design.n}, T={design.T} into {output}")


@autologit.command("fit")
@fit_options
@handle_errors
def fit(**options) -> None:
    """Fit the lambda path, select by BIC and screen effects."""
    outcome = pipeline.run_fit(_run_config(options))
    click.echo(
        f"Selected lambda {outcome.path.selected_lambda!r} (BIC {outcome.best_bic!r}); "
        f"{outcome.table.qualifying_pairs} of {outcome.table.total_pairs} pairs qualify"
    )
    if outcome.path.invalid_lambdas:
        click.echo(f"Invalid grid points: {outcome.path.invalid_lambdas}", err=True)


@autologit.command("predict")
@click.option("--input", "input_path", required=True, type=click.Path(path_type=Path))
@click.option(
    "--coefficients", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
@click.option("--output", required=True, type=click.Path(path_type=Path))
@handle_errors
def predict(input_path: Path, coefficients: Path, output: Path) -> None:
    """Link probabilities for the slice after the last observed one."""
    config = pipeline.RunConfig(output=output, input=input_path)
    prediction = pipeline.run_predict(config, coefficients)
    click.echo(f"Predicted slice {prediction.horizon} into {output}")


@autologit.command("evaluate")
@fit_options
@click.option("--holdout", type=int, required=True, help="Number of final slices held out.")
@click.option("--truth", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@handle_errors
def evaluate(holdout: int, truth: Path | None, **options) -> None:
    """Rolling one-step-ahead evaluation with ROC curves and AUC."""
    if holdout < 1:
        raise ConfigError(f"holdout must be >= 1, got {holdout}")
    result = pipeline.run_evaluate(_run_config(options, holdout=holdout, truth=truth))
    for origin in result.origins:
        auc = "undefined" if origin.auc is None else f"{origin.auc:.4f}"
        click.echo(f"slice {origin.origin + 1}: AUC {auc}")


@autologit.command("report")
@click.option("--output", required=True, type=click.Path(path_type=Path))
@handle_errors
def report(output: Path) -> None:
    """Print the summaries written by earlier runs in a directory."""
    click.echo(json.dumps(pipeline.run_report(output), indent=1, sort_keys=True, default=str))


commands = [autologit]


def main() -> None:
    autologit(prog_name="network-autologit")
