"""Dyad multinomial likelihood: normalizer, outcome probabilities, gradient and curvature.

Outcome order everywhere is (NN, SR, RS, BB); the class-r sufficient statistic is
s_1 = y_ij, s_2 = y_ji, s_3 = y_ij * y_ji with mean mu_r.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from network_autologit.exceptions import DataError
from network_autologit.model.design import CoefficientBlock, DyadDesign


class NaturalParams(NamedTuple):
    eta1: float
    eta2: float
    eta3: float


class OutcomeDistribution(NamedTuple):
    p_NN: float
    p_SR: float
    p_RS: float
    p_BB: float


def outcome_logits(eta: np.ndarray) -> np.ndarray:
    """Unnormalized log weights of the four outcomes, shape (..., 4)."""
    eta = np.asarray(eta, dtype=float)
    return np.stack(
        [
            np.zeros(eta.shape[:-1]),
            eta[..., 0],
            eta[..., 1],
            eta[..., 0] + eta[..., 1] + eta[..., 2],
        ],
        axis=-1,
    )


def log_normalizer(eta: NaturalParams | np.ndarray) -> float | np.ndarray:
    """C(eta) = log[1 + e^eta1 + e^eta2 + e^(eta1 + eta2 + eta3)], overflow safe."""
    value = logsumexp(outcome_logits(eta), axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def outcome_probs_batch(eta: np.ndarray) -> np.ndarray:
    """Outcome probabilities for every row of eta, shape (..., 4)."""
    logits = outcome_logits(eta)
    return np.exp(logits - logsumexp(logits, axis=-1, keepdims=True))


def outcome_probs(eta: NaturalParams | np.ndarray) -> OutcomeDistribution:
    return OutcomeDistribution(*(float(p) for p in outcome_probs_batch(np.asarray(eta))))


def class_means(probs: np.ndarray) -> np.ndarray:
    """mu = (p_SR + p_BB, p_RS + p_BB, p_BB) from outcome probabilities (..., 4)."""
    return np.stack(
        [probs[..., 1] + probs[..., 3], probs[..., 2] + probs[..., 3], probs[..., 3]], axis=-1
    )


def marginal_link_probs(
    eta: NaturalParams | np.ndarray,
) -> tuple[float, float] | tuple[np.ndarray, np.ndarray]:
    """(p(i -> j), p(j -> i)): each link marginalised over the partner's value."""
    mu = class_means(outcome_probs_batch(np.asarray(eta)))
    if mu.ndim == 1:
        return float(mu[0]), float(mu[1])
    return mu[..., 0], mu[..., 1]


def linear_predictors(design: DyadDesign, coef: CoefficientBlock) -> np.ndarray:
    """eta_{t,r} = alpha_r + x_t . theta_r, shape (m, 3)."""
    if coef.d != design.d:
        raise DataError(
            f"coefficient width {coef.d} does not match design width {design.d} "
            f"for pair {design.pair}"
        )
    return coef.intercepts + design.X @ coef.theta.T


def pair_loglik(design: DyadDesign, coef: CoefficientBlock) -> float:
    """Unpenalized log-likelihood V of one pair."""
    eta = linear_predictors(design, coef)
    return float(np.sum(design.targets * eta) - np.sum(log_normalizer(eta)))


def gradients(design: DyadDesign, coef: CoefficientBlock) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of V for the intercepts (3,) and for Theta (3, d)."""
    residual = design.targets - class_means(outcome_probs_batch(linear_predictors(design, coef)))
    return residual.sum(axis=0), residual.T @ design.X


def gradient_and_curvature(
    design: DyadDesign, coef: CoefficientBlock, r: int, k: int | None
) -> tuple[float, float]:
    """(g, G) for theta_{r,k}, or for the intercept alpha_r when k is None.

    r is the 0-based class index and k the 0-based design column.
    """
    mu = class_means(outcome_probs_batch(linear_predictors(design, coef)))[:, r]
    s = design.targets[:, r]
    x = np.ones(design.m) if k is None else design.X[:, k]
    return float(x @ (s - mu)), float((x * x) @ (mu * (1.0 - mu)))


def kkt_violation(
    design: DyadDesign,
    coef: CoefficientBlock,
    lam: float,
    frozen: np.ndarray | None = None,
) -> float:
    """Largest violation of the optimality conditions of the penalized problem.

    Zero coefficients need |g| <= lam, nonzero ones g = lam * sign(theta) and intercepts
    g = 0. Entries flagged in ``frozen`` (capped coordinates, shape (3, d)) are ignored.
    """
    g_alpha, g_theta = gradients(design, coef)
    zero = coef.theta == 0
    violation = np.where(
        zero,
        np.maximum(np.abs(g_theta) - lam, 0.0),
        np.abs(g_theta - lam * np.sign(coef.theta)),
    )
    if frozen is not None:
        violation = np.where(frozen, 0.0, violation)
    worst = float(violation.max()) if violation.size else 0.0
    return max(worst, float(np.abs(g_alpha).max()))
