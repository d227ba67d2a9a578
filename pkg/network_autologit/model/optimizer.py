"""Per-pair L1-penalized fits by cyclic componentwise Newton steps.

Each pair maximizes V(alpha, Theta) - lam * ||Theta||_1. A sweep updates the three
intercepts with plain Newton steps and then every (class, column) coefficient with the
soft-thresholded Newton proposal ``soft(theta + g / G, lam / G)``, where g and G are the
gradient and the information of V in that direction. Proposals that lower the penalized
objective are halved until they do not.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from joblib import Parallel, delayed

from network_autologit.exceptions import AutologitError, ConfigError, NumericalError
from network_autologit.logger import get_logger
from network_autologit.model.design import (
    N_CLASSES,
    CoefficientBlock,
    DyadDesign,
    build_design,
)
from network_autologit.model.likelihood import (
    class_means,
    gradients,
    kkt_violation,
    log_normalizer,
    outcome_logits,
    outcome_probs_batch,
    pair_loglik,
)
from network_autologit.model.network import NetworkSeries

MAX_HALVINGS = 30
ASCENT_SLACK = 1e-10


@dataclass(frozen=True)
class FitConfig:
    lam: float = 1.0
    max_sweeps: int = 500
    objective_tolerance: float = 1e-7
    kkt_tolerance: float = 1e-4
    coefficient_cap: float = 30.0
    min_curvature: float = 1e-10

    def __post_init__(self) -> None:
        if not self.lam >= 0 or not np.isfinite(self.lam):
            raise ConfigError(f"penalty must be a finite value >= 0, got {self.lam}")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be at least 1")
        for name in ("objective_tolerance", "kkt_tolerance", "coefficient_cap", "min_curvature"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")

    def with_lambda(self, lam: float) -> FitConfig:
        return dataclasses.replace(self, lam=float(lam))

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> FitConfig:
        """Build from settings or a config file, ignoring unrelated and empty keys."""
        kwargs: dict[str, Any] = {}
        for f in dataclasses.fields(cls):
            value = values.get(f.name)
            if value is None or value == "":
                continue
            kwargs[f.name] = int(value) if f.type in ("int", int) else float(value)
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class PairFit:
    pair: tuple[int, int]
    lam: float
    coef: CoefficientBlock
    loglik: float
    objective: float
    sweeps: int
    converged: bool
    kkt: float
    cap_hit: bool = False
    constant_columns: int = 0
    active_set: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.active_set:
            self.active_set = [(int(r), int(k)) for r, k in zip(*np.nonzero(self.coef.theta))]

    def diagnostics(self) -> dict[str, Any]:
        return {
            "pair": list(self.pair),
            "lambda": self.lam,
            "sweeps": self.sweeps,
            "converged": self.converged,
            "objective": self.objective,
            "loglik": self.loglik,
            "active": len(self.active_set),
            "cap_hit": self.cap_hit,
            "kkt": self.kkt,
            "constant_columns": self.constant_columns,
        }


@dataclass
class FitBatch:
    """Fits of every pair at one penalty; failed pairs are listed, not raised."""

    lam: float
    fits: dict[tuple[int, int], PairFit]
    failures: dict[tuple[int, int], str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def soft_threshold(w, tau):
    """sign(w) * max(0, |w| - tau)."""
    if np.any(np.asarray(tau) < 0):
        raise ConfigError(f"threshold must be >= 0, got {tau}")
    value = np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)
    return float(value) if np.ndim(value) == 0 else value


class _PairState:
    """Coordinate-descent state of one pair with per-row probability caches.

    Column-major copies of X and of the class means keep every gradient a single dot
    product; zero coefficients whose gradient is within the penalty are skipped before
    any rows are gathered.
    """

    def __init__(self, design: DyadDesign, config: FitConfig, start: CoefficientBlock):
        self.design = design
        self.config = config
        self.lam = config.lam
        self.S = design.targets
        self.s_totals = self.S.sum(axis=0)
        self.columns = np.ascontiguousarray(design.X.T)
        self.s_sums = self.columns @ self.S
        self.rows = [np.flatnonzero(column) for column in self.columns]
        self.all_rows = np.arange(design.m)
        self.alpha = np.clip(start.intercepts, -config.coefficient_cap, config.coefficient_cap)
        self.theta = np.clip(start.theta, -config.coefficient_cap, config.coefficient_cap)
        self.capped = np.zeros_like(self.theta, dtype=bool)
        self.cap_hit = False
        self.eta = self.alpha + design.X @ self.theta.T
        self.C = np.asarray(log_normalizer(self.eta), dtype=float).reshape(-1)
        self.mu = np.ascontiguousarray(class_means(outcome_probs_batch(self.eta)).T)
        self.loglik = float(np.sum(self.S * self.eta) - np.sum(self.C))

    @property
    def objective(self) -> float:
        return self.loglik - self.lam * float(np.abs(self.theta).sum())

    def gradient(self, r: int, k: int | None) -> float:
        """dV/d alpha_r (k is None) or dV/d theta_{r,k} at the current state."""
        if k is None:
            return float(self.s_totals[r] - self.mu[r].sum())
        return float(self.s_sums[k, r] - self.columns[k] @ self.mu[r])

    def update(self, r: int, k: int | None) -> None:
        """One Newton step on alpha_r (k is None) or theta_{r,k}."""
        cfg = self.config
        g = self.gradient(r, k)
        if k is None:
            idx, s_total = self.all_rows, self.s_totals[r]
            old = self.alpha[r]
        else:
            idx = self.rows[k]
            if idx.size == 0:
                return
            old = self.theta[r, k]
            if old == 0.0 and abs(g) <= self.lam:
                return
            s_total = self.s_sums[k, r]
        mu = self.mu[r, idx]
        G = float((mu * (1.0 - mu)).sum())
        if G < cfg.min_curvature:
            return
        if k is None:
            proposal = old + g / G
        else:
            proposal = soft_threshold(old + g / G, self.lam / G)
        proposal = float(np.clip(proposal, -cfg.coefficient_cap, cfg.coefficient_cap))
        delta = proposal - old
        if delta == 0.0:
            return

        C_old = self.C[idx]
        eta_rows = self.eta[idx]
        for _ in range(MAX_HALVINGS):
            eta_new = eta_rows.copy()
            eta_new[:, r] += delta
            C_new = np.asarray(log_normalizer(eta_new), dtype=float).reshape(-1)
            gain = delta * s_total - float((C_new - C_old).sum())
            if k is not None:
                gain -= self.lam * (abs(old + delta) - abs(old))
            if gain >= -ASCENT_SLACK:
                break
            delta *= 0.5
        else:
            return

        new = old + delta
        if k is None:
            self.alpha[r] = new
        else:
            self.theta[r, k] = new
            self.capped[r, k] = abs(new) >= cfg.coefficient_cap
        if abs(new) >= cfg.coefficient_cap:
            self.cap_hit = True
        self.eta[idx, r] = eta_new[:, r]
        self.loglik += delta * s_total - float((C_new - C_old).sum())
        self.C[idx] = C_new
        self.mu[:, idx] = class_means(np.exp(outcome_logits(eta_new) - C_new[:, None])).T

    def sweep_intercepts(self) -> None:
        for r in range(N_CLASSES):
            self.update(r, None)

    def sweep(self, full: bool) -> None:
        self.sweep_intercepts()
        if full:
            for r in range(N_CLASSES):
                for k in range(self.design.d):
                    self.update(r, k)
        else:
            for r, k in zip(*np.nonzero(self.theta)):
                self.update(int(r), int(k))

    def block(self) -> CoefficientBlock:
        return CoefficientBlock(self.alpha.copy(), self.theta.copy())


def _relative(new: float, old: float) -> float:
    return (new - old) / max(1.0, abs(old))


def _check_finite(value: float, pair: tuple[int, int]) -> None:
    if not np.isfinite(value):
        raise NumericalError("non-finite penalized objective", pair=pair)


def fit_pair(
    design: DyadDesign,
    config: FitConfig,
    warm_start: CoefficientBlock | None = None,
    intercepts_only: bool = False,
) -> PairFit:
    """Maximize the penalized likelihood of one pair.

    Full sweeps alternate with sweeps restricted to the active set; the fit is converged
    when a full sweep improves the objective by less than ``objective_tolerance``
    (relative) and the optimality conditions hold within ``kkt_tolerance * (T - 1)``.
    """

    logger = get_logger()
    start = warm_start.copy() if warm_start is not None else CoefficientBlock.zeros(design.d)
    if intercepts_only:
        start.theta[:] = 0.0
    state = _PairState(design, config, start)
    _check_finite(state.objective, design.pair)
    initial = state.objective

    if warm_start is None or intercepts_only:
        for _ in range(config.max_sweeps):
            before = state.objective
            state.sweep_intercepts()
            if _relative(state.objective, before) < config.objective_tolerance:
                break

    kkt_limit = config.kkt_tolerance * max(design.m, 1)
    lam = config.lam
    converged = False
    full = True
    sweeps = 0
    kkt = float("inf")
    for sweeps in range(1, config.max_sweeps + 1):
        before = state.objective
        if intercepts_only:
            state.sweep_intercepts()
        else:
            state.sweep(full)
        after = state.objective
        _check_finite(after, design.pair)
        if after < before - ASCENT_SLACK * max(1.0, abs(before)):
            logger.warning(
                "Penalized objective decreased during a sweep",
                extra={"pair": design.pair, "lambda": lam, "drop": before - after},
            )
        if _relative(after, before) >= config.objective_tolerance:
            full = intercepts_only or not state.theta.any()
            continue
        if not full:
            full = True
            continue
        frozen = state.capped
        if intercepts_only:
            frozen = np.ones_like(state.theta, dtype=bool)
        kkt = kkt_violation(design, state.block(), lam, frozen=frozen)
        if kkt <= kkt_limit:
            converged = True
            break

    coef = state.block()
    loglik = pair_loglik(design, coef)
    objective = loglik - lam * float(np.abs(coef.theta).sum())
    _check_finite(objective, design.pair)
    if not np.isfinite(kkt):
        frozen = np.ones_like(coef.theta, dtype=bool) if intercepts_only else state.capped
        kkt = kkt_violation(design, coef, lam, frozen=frozen)
    if objective < initial - ASCENT_SLACK * max(1.0, abs(initial)):
        logger.warning(
            "Final objective below the starting objective",
            extra={"pair": design.pair, "lambda": lam},
        )
    if not converged:
        logger.warning(
            "Pair fit did not converge",
            extra={"pair": design.pair, "lambda": lam, "sweeps": sweeps, "kkt": kkt},
        )
    if state.cap_hit:
        logger.warning(
            "Coefficient cap reached", extra={"pair": design.pair, "lambda": lam}
        )
    fit = PairFit(
        pair=design.pair,
        lam=lam,
        coef=coef,
        loglik=loglik,
        objective=objective,
        sweeps=sweeps,
        converged=converged,
        kkt=kkt,
        cap_hit=state.cap_hit,
        constant_columns=int(design.constant_columns.sum()),
    )
    logger.debug("Pair fitted", extra=fit.diagnostics())
    return fit


def null_fit(design: DyadDesign, config: FitConfig) -> PairFit:
    """Intercept-only optimum (every penalized coefficient held at zero)."""
    return fit_pair(design, config, intercepts_only=True)


def lambda_max(design: DyadDesign, config: FitConfig) -> float:
    """Smallest penalty at which the null fit satisfies the optimality conditions."""
    null = null_fit(design, config)
    _, g_theta = gradients(design, null.coef)
    return float(np.abs(g_theta).max()) if g_theta.size else 0.0


def global_lambda_max(series: NetworkSeries, config: FitConfig, workers: int = 1) -> float:
    values = worker_pool(workers)(
        delayed(_pair_lambda_max)(series, pair, config) for pair in series.pairs()
    )
    return max(values) if values else 0.0


def _pair_lambda_max(series: NetworkSeries, pair: tuple[int, int], config: FitConfig) -> float:
    return lambda_max(build_design(series, *pair), config)


def _fit_one(
    series: NetworkSeries,
    pair: tuple[int, int],
    config: FitConfig,
    warm_start: CoefficientBlock | None,
) -> PairFit | str:
    try:
        return fit_pair(build_design(series, *pair), config, warm_start)
    except AutologitError as exc:
        return str(exc)


def worker_pool(workers: int) -> Parallel:
    if workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {workers}")
    return Parallel(n_jobs=workers)


def fit_all_pairs(
    series: NetworkSeries,
    config: FitConfig,
    workers: int = 1,
    warm_starts: Mapping[tuple[int, int], CoefficientBlock] | None = None,
) -> FitBatch:
    """Fit every pair i < j; results come back in pair order whatever the worker count."""

    pairs = series.pairs()
    warm_starts = warm_starts or {}
    results = worker_pool(workers)(
        delayed(_fit_one)(series, pair, config, warm_starts.get(pair)) for pair in pairs
    )
    batch = FitBatch(lam=config.lam, fits={})
    for pair, result in zip(pairs, results):
        if isinstance(result, PairFit):
            batch.fits[pair] = result
        else:
            batch.failures[pair] = result
            get_logger().error(
                "Pair fit failed", extra={"pair": pair, "lambda": config.lam, "error": result}
            )
    return batch
