"""Penalty selection by BIC along a lambda path.

BIC_lam = sum_{i<j} [2 V_ij - K_ij(lam) log(T - 1)], where K_ij is the numerical rank of the
design columns active in at least one class. The path runs from the largest penalty to the
smallest so each pair's fit warm-starts from its previous one.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from joblib import delayed

from network_autologit.exceptions import AutologitError, ConfigError, DataError, NumericalError
from network_autologit.logger import get_logger
from network_autologit.model.design import CoefficientBlock, DyadDesign, build_design
from network_autologit.model.likelihood import pair_loglik
from network_autologit.model.network import NetworkSeries
from network_autologit.model.optimizer import FitBatch, FitConfig, PairFit, fit_pair, worker_pool


@dataclass(frozen=True)
class LambdaGrid:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigError("lambda grid is empty")
        if any(not (v > 0 and math.isfinite(v)) for v in values):
            raise ConfigError("lambda grid values must be finite and positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("lambda grid must be strictly increasing")
        object.__setattr__(self, "values", values)

    @classmethod
    def parse(cls, text: str | Sequence[float]) -> LambdaGrid:
        """Accept "1.5, 2, 4" or a sequence; values are sorted and de-duplicated."""
        if isinstance(text, str):
            try:
                raw = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"invalid lambda grid {text!r}") from exc
        else:
            raw = [float(v) for v in text]
        return cls(tuple(sorted(set(raw))))

    @classmethod
    def log_spaced(cls, low: float = 2.5, high: float = 18.0, count: int = 24) -> LambdaGrid:
        if count < 1 or not 0 < low <= high:
            raise ConfigError(f"invalid grid bounds low={low}, high={high}, count={count}")
        if count == 1:
            return cls((float(low),))
        return cls(tuple(float(v) for v in np.geomspace(low, high, count)))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


@dataclass
class PathPoint:
    lam: float
    batch: FitBatch
    ranks: dict[tuple[int, int], int] = field(default_factory=dict)
    bic: float | None = None

    @property
    def valid(self) -> bool:
        return self.bic is not None

    @property
    def total_active(self) -> int:
        return sum(fit.coef.nonzero_count() for fit in self.batch.fits.values())

    @property
    def total_rank(self) -> int:
        return sum(self.ranks.values())


@dataclass
class PathResult:
    grid: LambdaGrid
    points: list[PathPoint]
    selected_lambda: float
    m: int

    @property
    def selected(self) -> PathPoint:
        return self.point(self.selected_lambda)

    def point(self, lam: float) -> PathPoint:
        for point in self.points:
            if point.lam == lam:
                return point
        raise KeyError(lam)

    @property
    def invalid_lambdas(self) -> list[float]:
        return [p.lam for p in self.points if not p.valid]


def active_submatrix(design: DyadDesign, fit: PairFit | CoefficientBlock) -> np.ndarray:
    """Columns of X active in at least one class (each column once)."""
    coef = fit.coef if isinstance(fit, PairFit) else fit
    if isinstance(fit, PairFit) and tuple(fit.pair) != tuple(design.pair):
        raise DataError(f"fit for {fit.pair} does not belong to pair {design.pair}")
    return design.X[:, coef.active_columns()]


def numeric_rank(M: np.ndarray) -> int:
    """Rank from the SVD; singular values below max(M.shape) * eps * s_max count as zero."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    return int(np.linalg.matrix_rank(M))


def bic_term(loglik: float, rank: int, m: int) -> float:
    return 2.0 * loglik - rank * math.log(m)


def bic_value(
    logliks: Mapping[tuple[int, int], float], ranks: Mapping[tuple[int, int], int], m: int
) -> float:
    """Sum of per-pair BIC terms in sorted pair order."""
    total = 0.0
    for pair in sorted(logliks):
        total += bic_term(logliks[pair], ranks[pair], m)
    return total


def select_lambda(points: Sequence[PathPoint]) -> float:
    """Argmax of BIC over valid points; ties go to the larger penalty."""
    best: PathPoint | None = None
    for point in sorted(points, key=lambda p: p.lam, reverse=True):
        if point.valid and (best is None or point.bic > best.bic):
            best = point
    if best is None:
        raise NumericalError("no valid lambda grid point: every grid point had failed pair fits")
    return best.lam


def _pair_path(
    series: NetworkSeries, pair: tuple[int, int], lambdas: Sequence[float], config: FitConfig
) -> list[tuple[PairFit | str, int]]:
    """Fits of one pair from the largest lambda down, each warm-started from the last."""
    design = build_design(series, *pair)
    warm: CoefficientBlock | None = None
    results: list[tuple[PairFit | str, int]] = []
    for lam in lambdas:
        try:
            fit = fit_pair(design, config.with_lambda(lam), warm)
        except AutologitError as exc:
            results.append((str(exc), 0))
            continue
        warm = fit.coef
        results.append((fit, numeric_rank(active_submatrix(design, fit))))
    return results


def bic_path(
    series: NetworkSeries, grid: LambdaGrid, config: FitConfig, workers: int = 1
) -> PathResult:
    logger = get_logger()
    if series.T < 2:
        raise DataError("BIC selection needs at least two slices")
    m = series.T - 1
    if m < 2:
        logger.warning("log(T - 1) is zero with T = 2; BIC reduces to twice the likelihood")

    lambdas = sorted(grid.values, reverse=True)
    pairs = series.pairs()
    per_pair = worker_pool(workers)(
        delayed(_pair_path)(series, pair, lambdas, config) for pair in pairs
    )

    points: list[PathPoint] = []
    for index, lam in enumerate(lambdas):
        point = PathPoint(lam=lam, batch=FitBatch(lam=lam, fits={}))
        for pair, results in zip(pairs, per_pair):
            result, rank = results[index]
            if isinstance(result, PairFit):
                point.batch.fits[pair] = result
                point.ranks[pair] = rank
            else:
                point.batch.failures[pair] = result
        if point.batch.ok:
            logliks = {pair: fit.loglik for pair, fit in point.batch.fits.items()}
            point.bic = bic_value(logliks, point.ranks, m)
        else:
            logger.error(
                "Lambda grid point invalidated by failed pair fits",
                extra={"lambda": lam, "failures": len(point.batch.failures)},
            )
        points.append(point)

    points.sort(key=lambda p: p.lam)
    _check_sparsity_monotone(points)
    selected = select_lambda(points)
    logger.info(
        "Lambda path fitted",
        extra={"grid": len(points), "selected_lambda": selected, "pairs": len(pairs)},
    )
    return PathResult(grid=grid, points=points, selected_lambda=selected, m=m)


def _check_sparsity_monotone(points: Sequence[PathPoint]) -> None:
    counts = [p.total_active for p in points if p.batch.ok]
    lams = [p.lam for p in points if p.batch.ok]
    for (lam_a, a), (lam_b, b) in zip(zip(lams, counts), zip(lams[1:], counts[1:])):
        if b > a:
            get_logger().warning(
                "Active coefficient count grew with the penalty",
                extra={"lambda_low": lam_a, "lambda_high": lam_b, "low": a, "high": b},
            )


def recompute_bic(
    series: NetworkSeries, blocks: Mapping[tuple[int, int], CoefficientBlock]
) -> float:
    """BIC of one grid point from serialized coefficient blocks."""
    logliks: dict[tuple[int, int], float] = {}
    ranks: dict[tuple[int, int], int] = {}
    for pair in series.pairs():
        if pair not in blocks:
            raise DataError(f"no coefficients for pair {pair}")
        design = build_design(series, *pair)
        logliks[pair] = pair_loglik(design, blocks[pair])
        ranks[pair] = numeric_rank(active_submatrix(design, blocks[pair]))
    return bic_value(logliks, ranks, series.T - 1)
