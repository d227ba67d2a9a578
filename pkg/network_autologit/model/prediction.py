"""One-step-ahead link probabilities, rolling-origin evaluation, ROC curves and AUC."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata
from sklearn import metrics

from network_autologit.exceptions import ConfigError, DataError, MissingFitError
from network_autologit.logger import get_logger
from network_autologit.model.design import CoefficientBlock, covariate_row
from network_autologit.model.likelihood import NaturalParams, marginal_link_probs
from network_autologit.model.network import NetworkSeries
from network_autologit.model.optimizer import FitConfig, PairFit, fit_all_pairs
from network_autologit.model.selection import LambdaGrid, bic_path

Blocks = Mapping[tuple[int, int], CoefficientBlock | PairFit]


@dataclass
class PredictionSet:
    """Probabilities of every directed link i -> j (i != j) at slice ``horizon``."""

    horizon: int
    probs: np.ndarray
    truth: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.probs.shape[0]
        if self.probs.shape != (n, n):
            raise DataError(f"prediction matrix must be square, got {self.probs.shape}")
        off = ~np.eye(n, dtype=bool)
        if not np.all((self.probs[off] >= 0) & (self.probs[off] <= 1)):
            raise DataError("link probabilities must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def scores(self) -> np.ndarray:
        """Probabilities of the n(n - 1) directed edges in row-major order."""
        return self.probs[~np.eye(self.n, dtype=bool)]

    def labels(self) -> np.ndarray:
        if self.truth is None:
            raise DataError(f"no observed slice {self.horizon} to score against")
        return np.asarray(self.truth)[~np.eye(self.n, dtype=bool)].astype(int)

    def edges(self) -> list[tuple[int, int, float]]:
        return [
            (i + 1, j + 1, float(self.probs[i, j]))
            for i in range(self.n)
            for j in range(self.n)
            if i != j
        ]


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


@dataclass
class OriginResult:
    origin: int
    lam: float
    roc: RocCurve | None = None
    auc: float | None = None
    true_auc: float | None = None
    degenerate: bool = False
    error: str | None = None


@dataclass
class EvaluationResult:
    holdout: int
    lam: float
    origins: list[OriginResult] = field(default_factory=list)

    def aucs(self) -> list[float | None]:
        return [o.auc for o in self.origins]


def _block(fit: CoefficientBlock | PairFit) -> CoefficientBlock:
    return fit.coef if isinstance(fit, PairFit) else fit


def score_coefficients(series: NetworkSeries, blocks: Blocks, t: int) -> PredictionSet:
    """Predict slice t + 1 from Y_t with any coefficient blocks (fitted or true)."""
    adjacency = series.slice(t)
    probs = np.zeros((series.n, series.n))
    for i, j in series.pairs():
        if (i, j) not in blocks:
            raise MissingFitError(f"no fit for pair ({i}, {j})")
        coef = _block(blocks[(i, j)])
        eta = NaturalParams(*(coef.intercepts + coef.theta @ covariate_row(adjacency, i, j)))
        probs[i - 1, j - 1], probs[j - 1, i - 1] = marginal_link_probs(eta)
    truth = series.slice(t + 1) if t < series.T else None
    return PredictionSet(horizon=t + 1, probs=probs, truth=truth)


def predict_next(series: NetworkSeries, fits: Blocks) -> PredictionSet:
    """Link probabilities for slice T + 1 given Y_T."""
    return score_coefficients(series, fits, series.T)


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney probability that a positive outranks a negative, ties counted 1/2."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape:
        raise DataError("scores and labels differ in length")
    positives = int(labels.sum())
    negatives = labels.size - positives
    if positives == 0 or negatives == 0:
        raise DataError("AUC needs at least one positive and one negative label")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - positives * (positives + 1) / 2.0
    return float(u / (positives * negatives))


def roc(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Exact ROC curve with a threshold at every distinct score."""
    labels = np.asarray(labels).astype(int)
    if labels.min(initial=0) == labels.max(initial=0):
        raise DataError("ROC needs at least one positive and one negative label")
    fpr, tpr, thresholds = metrics.roc_curve(labels, scores, drop_intermediate=False)
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=float(metrics.auc(fpr, tpr)))


def _score(prediction: PredictionSet) -> tuple[RocCurve | None, float | None]:
    labels = prediction.labels()
    if labels.min() == labels.max():
        return None, None
    return roc(prediction.scores(), labels), auc(prediction.scores(), labels)


def rolling_evaluation(
    series: NetworkSeries,
    config: FitConfig,
    holdout: int,
    grid: LambdaGrid | None = None,
    workers: int = 1,
    true_blocks: Blocks | None = None,
) -> EvaluationResult:
    """Refit on Y_1..Y_t and score the prediction of Y_{t+1} for the last ``holdout`` slices.

    With a grid, lambda is selected by BIC on the first training prefix and then held
    fixed; otherwise ``config.lam`` is used throughout. Later origins warm-start from the
    previous origin's fits.
    """
    logger = get_logger()
    if holdout < 1:
        raise ConfigError(f"holdout must be >= 1, got {holdout}")
    if series.T - holdout < 2:
        raise ConfigError(f"holdout {holdout} leaves fewer than 2 training slices of {series.T}")

    first = series.T - holdout
    warm: dict[tuple[int, int], CoefficientBlock] = {}
    if grid is not None:
        path = bic_path(series.prefix(first), grid, config, workers=workers)
        lam = path.selected_lambda
        first_batch = path.selected.batch
    else:
        lam = config.lam
        first_batch = None
    result = EvaluationResult(holdout=holdout, lam=lam)

    for t in range(first, series.T):
        origin = OriginResult(origin=t, lam=lam)
        batch = first_batch if t == first and first_batch is not None else None
        if batch is None:
            batch = fit_all_pairs(
                series.prefix(t), config.with_lambda(lam), workers=workers, warm_starts=warm
            )
        if not batch.ok:
            origin.error = f"{len(batch.failures)} pair fits failed"
            logger.error(
                "Origin skipped after failed pair fits", extra={"origin": t, "lambda": lam}
            )
            result.origins.append(origin)
            continue
        warm = {pair: fit.coef for pair, fit in batch.fits.items()}

        prediction = score_coefficients(series, batch.fits, t)
        origin.roc, origin.auc = _score(prediction)
        origin.degenerate = origin.auc is None
        if origin.degenerate:
            logger.warning("Held-out slice has a single class; AUC undefined", extra={"slice": t + 1})
        elif true_blocks is not None:
            origin.true_auc = _score(score_coefficients(series, true_blocks, t))[1]
        logger.info("Origin evaluated", extra={"origin": t, "lambda": lam, "auc": origin.auc})
        result.origins.append(origin)
    return result
