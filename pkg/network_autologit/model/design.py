"""Lagged covariates for each dyad and the effect annotation of every design column.

Column order for pair (i, j), with k ascending over 1..n excluding i and j::

    [y_ij, y_ji, {y_ik}, {y_kj}, {y_jk}, {y_ki}, y_ij*y_ji, {y_ik*y_kj}, {y_jk*y_ki}]

so that d = 3 + 6(n - 2). This order is the stable contract of coefficient exports.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from network_autologit.exceptions import ConfigError, DataError
from network_autologit.model.network import NetworkSeries, _check_pair, dyad_outcomes

N_CLASSES = 3


class EffectFamily(Enum):
    INTERCEPT = "alpha"
    PERSISTENCE_SELF = "beta"
    PERSISTENCE_OTHER = "gamma"
    DIVERSIFY_OUT = "delta"
    DIVERSIFY_IN = "phi"
    DIVERSIFY_OUT_OTHER = "psi"
    DIVERSIFY_IN_OTHER = "omega"
    INTER_RECIPROCITY = "rho"
    DISINTERMEDIATION_FWD = "xi"
    DISINTERMEDIATION_REV = "zeta"

    @property
    def has_third_node(self) -> bool:
        return self in _THIRD_NODE_FAMILIES

    @property
    def category(self) -> str | None:
        return _CATEGORY.get(self)


_THIRD_NODE_FAMILIES = frozenset(
    {
        EffectFamily.DIVERSIFY_OUT,
        EffectFamily.DIVERSIFY_IN,
        EffectFamily.DIVERSIFY_OUT_OTHER,
        EffectFamily.DIVERSIFY_IN_OTHER,
        EffectFamily.DISINTERMEDIATION_FWD,
        EffectFamily.DISINTERMEDIATION_REV,
    }
)

PERSISTENCE = "persistence"
RECIPROCITY = "reciprocity"
DIVERSIFICATION = "diversification"
DISINTERMEDIATION = "disintermediation"
CATEGORIES = (PERSISTENCE, RECIPROCITY, DIVERSIFICATION, DISINTERMEDIATION)

_CATEGORY = {
    EffectFamily.PERSISTENCE_SELF: PERSISTENCE,
    EffectFamily.PERSISTENCE_OTHER: PERSISTENCE,
    EffectFamily.DIVERSIFY_OUT: DIVERSIFICATION,
    EffectFamily.DIVERSIFY_IN: DIVERSIFICATION,
    EffectFamily.DIVERSIFY_OUT_OTHER: DIVERSIFICATION,
    EffectFamily.DIVERSIFY_IN_OTHER: DIVERSIFICATION,
    EffectFamily.INTER_RECIPROCITY: RECIPROCITY,
    EffectFamily.DISINTERMEDIATION_FWD: DISINTERMEDIATION,
    EffectFamily.DISINTERMEDIATION_REV: DISINTERMEDIATION,
}


@dataclass(frozen=True)
class Column:
    family: EffectFamily
    third_node: int | None = None

    def __post_init__(self) -> None:
        if self.family.has_third_node != (self.third_node is not None):
            raise ConfigError(f"{self.family.value} column with third_node={self.third_node}")

    @property
    def category(self) -> str:
        return self.family.category


@dataclass(frozen=True, eq=False)
class DyadDesign:
    """Design of pair (i, j): row t of X is built on Y_t and models the outcome at t + 1."""

    pair: tuple[int, int]
    X: np.ndarray
    columns: tuple[Column, ...]
    responses: np.ndarray

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        """Number of modelled transitions, T - 1."""
        return self.X.shape[0]

    @property
    def targets(self) -> np.ndarray:
        """Sufficient statistics s = (y_ij, y_ji, y_ij * y_ji) per row, shape (m, 3)."""
        y_ij = (self.responses & 1).astype(float)
        y_ji = (self.responses >> 1).astype(float)
        return np.column_stack([y_ij, y_ji, y_ij * y_ji])

    @property
    def constant_columns(self) -> np.ndarray:
        """Mask of columns that are all-zero or all-one over the rows."""
        if self.m == 0:
            return np.ones(self.d, dtype=bool)
        return np.all(self.X == self.X[:1], axis=0)


@dataclass
class CoefficientBlock:
    """Intercepts alpha_{1..3} and the 3 x d matrix Theta, rows ordered as the design columns."""

    intercepts: np.ndarray
    theta: np.ndarray

    def __post_init__(self) -> None:
        self.intercepts = np.asarray(self.intercepts, dtype=float).reshape(N_CLASSES)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.ndim != 2 or self.theta.shape[0] != N_CLASSES:
            raise DataError(f"theta must have shape (3, d), got {self.theta.shape}")
        if not (np.isfinite(self.intercepts).all() and np.isfinite(self.theta).all()):
            raise DataError("coefficients must be finite")

    @classmethod
    def zeros(cls, d: int) -> CoefficientBlock:
        return cls(np.zeros(N_CLASSES), np.zeros((N_CLASSES, d)))

    @property
    def d(self) -> int:
        return self.theta.shape[1]

    def copy(self) -> CoefficientBlock:
        return CoefficientBlock(self.intercepts.copy(), self.theta.copy())

    def active_columns(self) -> np.ndarray:
        """Indices of columns nonzero in at least one class."""
        return np.flatnonzero(np.any(self.theta != 0, axis=0))

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.theta))


class EffectCounts(NamedTuple):
    persistence: int
    reciprocity: int
    diversification: int
    disintermediation: int
    degenerate: bool = False

    @property
    def total(self) -> int:
        return self.persistence + self.reciprocity + self.diversification + self.disintermediation


def third_nodes(n: int, i: int, j: int) -> list[int]:
    return [k for k in range(1, n + 1) if k != i and k != j]


def column_labels(n: int, i: int, j: int) -> tuple[Column, ...]:
    ks = third_nodes(n, i, j)

    def block(family: EffectFamily) -> list[Column]:
        return [Column(family, k) for k in ks]

    return tuple(
        [Column(EffectFamily.PERSISTENCE_SELF), Column(EffectFamily.PERSISTENCE_OTHER)]
        + block(EffectFamily.DIVERSIFY_OUT)
        + block(EffectFamily.DIVERSIFY_IN)
        + block(EffectFamily.DIVERSIFY_OUT_OTHER)
        + block(EffectFamily.DIVERSIFY_IN_OTHER)
        + [Column(EffectFamily.INTER_RECIPROCITY)]
        + block(EffectFamily.DISINTERMEDIATION_FWD)
        + block(EffectFamily.DISINTERMEDIATION_REV)
    )


def design_width(n: int) -> int:
    return 3 + 6 * (n - 2)


def _covariates(y: np.ndarray, i: int, j: int) -> np.ndarray:
    """Covariates from a stack of slices y of shape (..., n, n); i, j are 0-based."""
    n = y.shape[-1]
    ks = [k for k in range(n) if k != i and k != j]
    y = y.astype(float)
    y_ij = y[..., i, j][..., None]
    y_ji = y[..., j, i][..., None]
    y_ik = y[..., i, ks]
    y_kj = y[..., ks, j]
    y_jk = y[..., j, ks]
    y_ki = y[..., ks, i]
    return np.concatenate(
        [y_ij, y_ji, y_ik, y_kj, y_jk, y_ki, y_ij * y_ji, y_ik * y_kj, y_jk * y_ki], axis=-1
    )


def covariate_row(adjacency: np.ndarray, i: int, j: int) -> np.ndarray:
    """Covariate vector x_{i,j} evaluated on a single slice (1-based i < j)."""
    adjacency = np.asarray(adjacency)
    _check_pair(adjacency.shape[0], i, j)
    return _covariates(adjacency, i - 1, j - 1)


def build_design(series: NetworkSeries, i: int, j: int) -> DyadDesign:
    _check_pair(series.n, i, j)
    if series.T < 2:
        raise DataError("a design needs at least two slices")
    X = _covariates(series.y[:-1], i - 1, j - 1)
    X.setflags(write=False)
    responses = dyad_outcomes(series, i, j)[1:]
    return DyadDesign((i, j), X, column_labels(series.n, i, j), responses)


def effect_counts(n: int) -> EffectCounts:
    """Penalized effects per category, summed over the three classes."""
    if n < 2:
        raise ConfigError(f"effect counts need n >= 2, got {n}")
    if n < 3:
        return EffectCounts(2 * N_CLASSES, N_CLASSES, 0, 0, degenerate=True)
    third = n - 2
    return EffectCounts(
        persistence=2 * N_CLASSES,
        reciprocity=N_CLASSES,
        diversification=4 * third * N_CLASSES,
        disintermediation=2 * third * N_CLASSES,
    )


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def total_parameter_count(n: int) -> int:
    """n(n - 1)/2 * (9 + 18(n - 2)), the count quoted for the full model."""
    if n < 2:
        raise ConfigError(f"parameter count needs n >= 2, got {n}")
    return pair_count(n) * (9 + 18 * (n - 2))
