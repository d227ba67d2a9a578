"""Run stages shared by the command line and the Network Fit Run doctype.

Every stage writes its files into an existing output directory together with a
``manifest.json`` holding the configuration, package versions and input hashes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any

from network_autologit import __version__
from network_autologit.exceptions import ConfigError, DataError
from network_autologit.logger import get_logger
from network_autologit.model import storage
from network_autologit.model.analysis import (
    DEFAULT_TOLERANCE,
    SignificanceTable,
    aggregate_table,
    classify_effects,
)
from network_autologit.model.design import build_design
from network_autologit.model.network import summary
from network_autologit.model.optimizer import FitConfig, global_lambda_max
from network_autologit.model.prediction import (
    EvaluationResult,
    PredictionSet,
    predict_next,
    rolling_evaluation,
)
from network_autologit.model.selection import LambdaGrid, PathResult, bic_path
from network_autologit.model.simulate import SimDesign, simulate

VERSIONED_PACKAGES = ("numpy", "scipy", "scikit-learn", "joblib", "networkx", "pandas")


@dataclass(frozen=True)
class RunConfig:
    output: Path
    input: Path | None = None
    grid: LambdaGrid | None = None
    fit: FitConfig = field(default_factory=FitConfig)
    holdout: int = 0
    workers: int = 1
    significance_tolerance: float = DEFAULT_TOLERANCE
    truth: Path | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "output", Path(self.output))
        if self.workers < 1:
            raise ConfigError(f"worker count must be >= 1, got {self.workers}")
        if self.holdout < 0:
            raise ConfigError(f"holdout must be >= 0, got {self.holdout}")
        if self.input is not None and Path(self.input).resolve() == self.output.resolve():
            raise ConfigError("input and output paths must differ")

    @property
    def lambda_grid(self) -> LambdaGrid:
        """The configured grid, or the single penalty of the fit configuration."""
        return self.grid if self.grid is not None else LambdaGrid((self.fit.lam,))

    def as_dict(self) -> dict[str, Any]:
        return {
            "input": str(self.input) if self.input else None,
            "grid": list(self.lambda_grid.values),
            "fit": self.fit.as_dict(),
            "holdout": self.holdout,
            "significance_tolerance": self.significance_tolerance,
            "truth": str(self.truth) if self.truth else None,
        }


@dataclass
class FitOutcome:
    path: PathResult
    table: SignificanceTable
    lambda_max: float

    @property
    def best_bic(self) -> float:
        return self.path.selected.bic


def require_directory(output: Path) -> Path:
    output = Path(output)
    if not output.is_dir():
        raise ConfigError(f"output directory {output} does not exist")
    return output


def file_digest(path: Path) -> str:
    path = Path(path)
    digest = hashlib.sha256()
    files = sorted(p for p in path.iterdir() if p.is_file()) if path.is_dir() else [path]
    for item in files:
        digest.update(item.name.encode())
        digest.update(item.read_bytes())
    return digest.hexdigest()


def package_versions() -> dict[str, str]:
    versions = {"network_autologit": __version__}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "missing"
    return versions


def write_manifest(
    output: Path, command: str, config: dict[str, Any], inputs: list[Path] | None = None
) -> None:
    """Worker count and wall-clock time stay out so reruns are byte-identical."""
    storage.write_json(
        Path(output) / "manifest.json",
        {
            "command": command,
            "config": config,
            "versions": package_versions(),
            "inputs": {str(p): file_digest(p) for p in inputs or []},
        },
    )


def run_simulate(design: SimDesign, output: Path) -> None:
    output = require_directory(output)
    series, truth = simulate(design)
    storage.save_edge_list(series, output / "series.csv")
    storage.write_ground_truth(output / "ground_truth.json", truth)
    storage.write_json(output / "network_summary.json", summary(series))
    write_manifest(output, "simulate", design.as_dict())
    get_logger().info(
        "Series simulated", extra={"n": design.n, "T": design.T, "seed": design.seed}
    )


def _read_input(config: RunConfig):
    if config.input is None:
        raise ConfigError("an input series is required")
    return storage.read_series(config.input)


def run_fit(config: RunConfig) -> FitOutcome:
    """Fit the lambda path, select by BIC and screen effects at the selected penalty."""
    output = require_directory(config.output)
    series = _read_input(config)
    if series.T < 2:
        raise DataError("fitting needs at least two slices")
    logger = get_logger()

    result = bic_path(series, config.lambda_grid, config.fit, workers=config.workers)
    selected = result.selected
    reports = [
        classify_effects(build_design(series, *pair), fit, config.significance_tolerance)
        for pair, fit in sorted(selected.batch.fits.items())
    ]
    table = aggregate_table(reports, series.n)
    lam_max = global_lambda_max(series, config.fit, workers=config.workers)

    storage.write_frame(storage.path_frame(result), output / "path.csv")
    storage.write_path_fits(output / "path_fits.json", series.n, result)
    storage.write_coefficients(
        output / "coefficients.json",
        series.n,
        selected.lam,
        {pair: fit.coef for pair, fit in selected.batch.fits.items()},
    )
    storage.write_frame(storage.table_frame(table), output / "effects.csv")
    storage.write_pair_reports(output / "pairs.json", reports)
    storage.write_diagnostics(
        output / "diagnostics.jsonl",
        (
            fit.diagnostics()
            for point in result.points
            for _, fit in sorted(point.batch.fits.items())
        ),
    )
    storage.write_json(
        output / "summary.json",
        {
            "selected_lambda": selected.lam,
            "best_bic": selected.bic,
            "global_lambda_max": lam_max,
            "invalid_lambdas": result.invalid_lambdas,
            "pairs": table.total_pairs,
            "qualifying_pairs": table.qualifying_pairs,
            "rank_histogram": {str(k): v for k, v in table.rank_histogram.items()},
            "no_evidence_percent": table.no_evidence_percent,
            "network": summary(series),
        },
    )
    write_manifest(output, "fit", config.as_dict(), [config.input])
    logger.info(
        "Lambda selected",
        extra={"lambda": selected.lam, "bic": selected.bic, "invalid": len(result.invalid_lambdas)},
    )
    return FitOutcome(path=result, table=table, lambda_max=lam_max)


def run_predict(config: RunConfig, coefficients: Path) -> PredictionSet:
    output = require_directory(config.output)
    series = _read_input(config)
    n, _, blocks = storage.read_coefficients(coefficients)
    if n != series.n:
        raise DataError(f"coefficients are for n={n}, series has n={series.n}")
    prediction = predict_next(series, blocks)
    storage.write_frame(storage.prediction_frame(prediction), output / "predictions.csv")
    write_manifest(output, "predict", config.as_dict(), [config.input, Path(coefficients)])
    return prediction


def run_evaluate(config: RunConfig) -> EvaluationResult:
    """Rolling one-step-ahead evaluation over the last ``holdout`` slices."""
    output = require_directory(config.output)
    series = _read_input(config)
    if config.holdout < 1:
        raise ConfigError("evaluation needs a holdout of at least 1 slice")
    truth = storage.read_ground_truth(config.truth) if config.truth else None
    result = rolling_evaluation(
        series,
        config.fit,
        config.holdout,
        grid=config.grid,
        workers=config.workers,
        true_blocks=truth.blocks if truth else None,
    )
    for origin in result.origins:
        if origin.roc is not None:
            name = f"roc_{origin.origin + 1}.csv"
            storage.write_frame(storage.roc_frame(origin.roc), output / name)
    storage.write_frame(storage.auc_frame(result), output / "auc.csv")
    inputs = [config.input] + ([config.truth] if config.truth else [])
    write_manifest(output, "evaluate", config.as_dict(), inputs)
    return result


def run_report(directory: Path) -> dict[str, Any]:
    """Collect the summaries of earlier stages found in ``directory``."""
    directory = require_directory(directory)
    report: dict[str, Any] = {}
    if (directory / "summary.json").exists():
        report["fit"] = storage.read_json(directory / "summary.json")
    if (directory / "effects.csv").exists():
        report["effects"] = storage.read_table(directory / "effects.csv").to_dict("records")
    if (directory / "auc.csv").exists():
        report["auc"] = storage.read_table(directory / "auc.csv").to_dict("records")
    if (directory / "network_summary.json").exists():
        report["network"] = storage.read_json(directory / "network_summary.json")
    if not report:
        raise DataError(f"no run outputs found in {directory}")
    return report
