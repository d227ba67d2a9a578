"""Synthetic network sequences drawn from the model, with recorded ground truth.

The structured-sparsity design gives every pair and class six nonzero coefficients: the
intercept, the two persistence effects and three disintermediation (xi) effects at a
triple of third-party nodes shared by the pair's group.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import orth

from network_autologit.exceptions import ConfigError, DataError, MissingFitError
from network_autologit.model.design import (
    N_CLASSES,
    CoefficientBlock,
    Column,
    EffectFamily,
    _covariates,
    build_design,
    column_labels,
    design_width,
    pair_count,
)
from network_autologit.model.likelihood import outcome_probs_batch
from network_autologit.model.network import NetworkSeries, ordered_pairs

Triple = tuple[int, int, int]
Vector = tuple[float, float, float]


def _vector(value) -> Vector:
    values = np.broadcast_to(np.asarray(value, dtype=float), (N_CLASSES,))
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class SimDesign:
    """Hyperparameters of a simulation; scalars are broadcast to the three classes.

    Standard deviations are the square roots of the variances tau^2.
    """

    n: int
    T: int
    seed: int = 0
    alpha_mean: Vector = (0.0, 0.0, 0.0)
    alpha_sd: Vector = (0.5, 0.5, 0.5)
    beta_mean: Vector = (1.0, 1.0, 1.0)
    beta_sd: Vector = (0.5, 0.5, 0.5)
    gamma_mean: Vector = (1.0, 1.0, 1.0)
    gamma_sd: Vector = (0.5, 0.5, 0.5)
    xi_magnitude: float = 1.0
    groups: int = 4
    triples: tuple[Triple, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("alpha_mean", "alpha_sd", "beta_mean", "beta_sd", "gamma_mean", "gamma_sd"):
            try:
                object.__setattr__(self, name, _vector(getattr(self, name)))
            except ValueError as exc:
                raise ConfigError(f"{name} needs one value or one per class") from exc
        if self.n < 2 or self.T < 1:
            raise ConfigError(f"invalid simulation size n={self.n}, T={self.T}")
        if any(sd < 0 for sd in self.alpha_sd + self.beta_sd + self.gamma_sd):
            raise ConfigError("standard deviations must be >= 0")
        if not self.xi_magnitude >= 0:
            raise ConfigError("xi_magnitude must be >= 0")
        if self.groups < 1:
            raise ConfigError("at least one group is required")
        if self.n - 2 < 3:
            raise ConfigError(f"n={self.n} leaves fewer than 3 third-party nodes per pair")
        if pair_count(self.n) < self.groups:
            raise ConfigError(f"{pair_count(self.n)} pairs cannot fill {self.groups} groups")
        if self.triples is not None:
            triples = tuple(tuple(int(k) for k in triple) for triple in self.triples)
            if len(triples) != self.groups:
                raise ConfigError(f"{len(triples)} triples given for {self.groups} groups")
            for triple in triples:
                if len(triple) != 3 or len(set(triple)) != 3:
                    raise ConfigError(f"triple {triple} must name three distinct nodes")
                if not all(1 <= k <= self.n for k in triple):
                    raise ConfigError(f"triple {triple} outside 1..{self.n}")
            object.__setattr__(self, "triples", triples)

    @classmethod
    def from_mapping(cls, values: Mapping) -> SimDesign:
        known = {k: v for k, v in values.items() if k in cls.__dataclass_fields__ and v is not None}
        if "triples" in known:
            known["triples"] = tuple(tuple(t) for t in known["triples"])
        try:
            return cls(**known)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class GroundTruth:
    """True coefficient blocks per pair and their support masks."""

    n: int
    blocks: dict[tuple[int, int], CoefficientBlock]
    groups: dict[tuple[int, int], int] = field(default_factory=dict)
    triples: dict[tuple[int, int], Triple] = field(default_factory=dict)

    def __post_init__(self) -> None:
        d = design_width(self.n)
        for pair, block in self.blocks.items():
            if block.d != d:
                raise DataError(f"block for {pair} has width {block.d}, expected {d}")

    @property
    def support(self) -> dict[tuple[int, int], np.ndarray]:
        return {pair: block.theta != 0 for pair, block in self.blocks.items()}

    def support_sizes(self) -> dict[tuple[int, int], list[int]]:
        """Nonzero coefficients per class, intercepts included."""
        return {
            pair: [int(np.count_nonzero(b.theta[r])) + int(b.intercepts[r] != 0) for r in range(3)]
            for pair, b in self.blocks.items()
        }


def pair_groups(n: int, groups: int) -> dict[tuple[int, int], int]:
    """Contiguous blocks of the ordered pair list with sizes differing by at most one."""
    pairs = ordered_pairs(n)
    chunks = np.array_split(np.arange(len(pairs)), groups)
    return {pairs[p]: g for g, chunk in enumerate(chunks) for p in chunk}


def _walk(n: int, start: int, skip: set[int], count: int) -> list[int]:
    nodes, k = [], start
    while len(nodes) < count:
        if k not in skip:
            nodes.append(k)
            skip.add(k)
        k = k % n + 1
    return nodes


def pair_triple(design: SimDesign, group: int, i: int, j: int) -> Triple:
    """Third-party nodes of the pair's xi effects; collisions with i or j are skipped."""
    if design.triples is None:
        return tuple(sorted(_walk(design.n, (3 * group) % design.n + 1, {i, j}, 3)))
    base = design.triples[group]
    kept = [k for k in base if k not in (i, j)]
    missing = 3 - len(kept)
    if missing:
        kept += _walk(design.n, max(base) % design.n + 1, {i, j, *kept}, missing)
    return tuple(sorted(kept))


def generate_coefficients(design: SimDesign) -> GroundTruth:
    rng = np.random.default_rng(np.random.SeedSequence(design.seed).spawn(2)[0])
    pairs = ordered_pairs(design.n)
    size = (len(pairs), N_CLASSES)
    alpha = rng.normal(design.alpha_mean, design.alpha_sd, size=size)
    beta = rng.normal(design.beta_mean, design.beta_sd, size=size)
    gamma = rng.normal(design.gamma_mean, design.gamma_sd, size=size)

    sign = -np.sign(np.concatenate([beta, gamma]).mean(axis=0))
    sign[sign == 0] = -1.0
    xi = sign * design.xi_magnitude

    groups = pair_groups(design.n, design.groups)
    blocks, triples = {}, {}
    for p, (i, j) in enumerate(pairs):
        columns = column_labels(design.n, i, j)
        triple = pair_triple(design, groups[(i, j)], i, j)
        theta = np.zeros((N_CLASSES, len(columns)))
        theta[:, 0] = beta[p]
        theta[:, 1] = gamma[p]
        for k in triple:
            theta[:, columns.index(Column(EffectFamily.DISINTERMEDIATION_FWD, k))] = xi
        blocks[(i, j)] = CoefficientBlock(alpha[p], theta)
        triples[(i, j)] = triple
    return GroundTruth(n=design.n, blocks=blocks, groups=groups, triples=triples)


def slice_covariates(adjacency: np.ndarray, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Covariates of every listed pair on one slice, shape (pairs, d)."""
    return np.stack([_covariates(adjacency, i - 1, j - 1) for i, j in pairs])


def forward_sample(
    truth: GroundTruth, design: SimDesign
) -> tuple[NetworkSeries, GroundTruth]:
    """Draw Y_1..Y_T; Y_1 from the intercept-only law, later slices given the previous one.

    Every pair draws from its own substream of the design seed so the output does not
    depend on how pairs are processed.
    """
    if truth.n != design.n:
        raise ConfigError(f"ground truth has n={truth.n}, design has n={design.n}")
    pairs = ordered_pairs(design.n)
    missing = [pair for pair in pairs if pair not in truth.blocks]
    if missing:
        raise DataError(f"ground truth lacks pairs {missing[:3]}")
    streams = np.random.SeedSequence(design.seed).spawn(2)[1].spawn(len(pairs))
    rngs = [np.random.default_rng(s) for s in streams]
    alpha = np.stack([truth.blocks[p].intercepts for p in pairs])
    theta = np.stack([truth.blocks[p].theta for p in pairs])
    rows = np.array([i - 1 for i, _ in pairs])
    cols = np.array([j - 1 for _, j in pairs])

    y = np.zeros((design.T, design.n, design.n), dtype=np.uint8)
    eta = alpha
    for t in range(design.T):
        if t > 0:
            X = slice_covariates(y[t - 1], pairs)
            eta = alpha + np.einsum("prd,pd->pr", theta, X)
        cumulative = np.cumsum(outcome_probs_batch(eta), axis=1)
        u = np.array([rng.random() for rng in rngs])
        outcome = (u[:, None] >= cumulative[:, :3]).sum(axis=1)
        y[t, rows, cols] = outcome & 1
        y[t, cols, rows] = outcome >> 1
    return NetworkSeries(y), truth


def simulate(design: SimDesign) -> tuple[NetworkSeries, GroundTruth]:
    return forward_sample(generate_coefficients(design), design)


@dataclass
class RecoveryReport:
    recall: float
    false_selection: float
    true_positions: int
    selected: int


def support_recovery(
    truth: GroundTruth,
    fits: Mapping[tuple[int, int], CoefficientBlock],
    series: NetworkSeries,
    tol: float = 1e-8,
) -> RecoveryReport:
    """Recall of the true nonzero theta positions and the share of selected positions
    outside the true support and its column-space confounders.

    A selected column is a confounder when it lies in the span of the pair's true support
    columns on the training design, so the data cannot tell the two apart.
    """
    hits = true_total = selected = stray = 0
    for pair, block in truth.blocks.items():
        if pair not in fits:
            raise MissingFitError(f"no fit for pair {pair}")
        estimate = getattr(fits[pair], "coef", fits[pair])
        X = build_design(series, *pair).X
        support = block.active_columns()
        basis = orth(X[:, support]) if support.size else np.zeros((X.shape[0], 0))
        for r in range(N_CLASSES):
            true_cols = np.flatnonzero(block.theta[r])
            chosen = np.flatnonzero(estimate.theta[r])
            true_total += true_cols.size
            hits += np.intersect1d(true_cols, chosen).size
            selected += chosen.size
            for k in np.setdiff1d(chosen, true_cols):
                x = X[:, k]
                if np.linalg.norm(x - basis @ (basis.T @ x)) > tol * max(np.linalg.norm(x), 1.0):
                    stray += 1
    return RecoveryReport(
        recall=hits / true_total if true_total else 1.0,
        false_selection=stray / selected if selected else 0.0,
        true_positions=true_total,
        selected=selected,
    )
