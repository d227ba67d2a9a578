"""Effect significance screening and the per-category summary table.

A design column shows no evidence of significance when it lies in the orthogonal
complement of the span of the active columns X(A). Columns in the active set are always
potentially significant.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy.linalg import orth

from network_autologit.exceptions import DataError
from network_autologit.model.design import (
    CATEGORIES,
    DISINTERMEDIATION,
    DIVERSIFICATION,
    N_CLASSES,
    Column,
    DyadDesign,
    effect_counts,
)
from network_autologit.model.optimizer import PairFit

DEFAULT_TOLERANCE = 1e-8


class EffectStatus(str, Enum):
    POTENTIALLY_SIGNIFICANT = "potentially-significant"
    NO_EVIDENCE = "no-evidence"


@dataclass
class PairSignificance:
    pair: tuple[int, int]
    statuses: list[tuple[int, Column, EffectStatus]]
    rank: int
    active_columns: tuple[int, ...]
    nonzero: int

    @property
    def qualifies(self) -> bool:
        """At least one penalized coefficient is nonzero."""
        return self.nonzero > 0

    def significant_by_category(self) -> dict[str, int]:
        counts = dict.fromkeys(CATEGORIES, 0)
        for _, column, status in self.statuses:
            if status is EffectStatus.POTENTIALLY_SIGNIFICANT:
                counts[column.category] += 1
        return counts

    def columns_by_category(self) -> dict[str, int]:
        counts = dict.fromkeys(CATEGORIES, 0)
        for _, column, _ in self.statuses:
            counts[column.category] += 1
        return counts

    def no_evidence_share(self, category: str) -> Fraction | None:
        total = self.columns_by_category()[category]
        if total == 0:
            return None
        return Fraction(total - self.significant_by_category()[category], total)

    def as_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "rank": self.rank,
            "nonzero": self.nonzero,
            "active_columns": list(self.active_columns),
            "potentially_significant": self.significant_by_category(),
            "effects": [
                {
                    "column": index,
                    "effect": column.family.value,
                    "third_node": column.third_node,
                    "status": status.value,
                }
                for index, column, status in self.statuses
            ],
        }


def classify_effects(
    design: DyadDesign, fit: PairFit, tol: float = DEFAULT_TOLERANCE
) -> PairSignificance:
    """Classify every design column of one pair by its projection on span X(A)."""
    if tuple(fit.pair) != tuple(design.pair):
        raise DataError(f"fit for {fit.pair} does not belong to pair {design.pair}")
    active = fit.coef.active_columns()
    X = design.X
    basis = orth(X[:, active]) if active.size else np.zeros((design.m, 0))
    norms = np.linalg.norm(X, axis=0)
    projections = np.linalg.norm(basis.T @ X, axis=0)
    active_set = set(int(k) for k in active)

    statuses = []
    for index, column in enumerate(design.columns):
        if index in active_set:
            status = EffectStatus.POTENTIALLY_SIGNIFICANT
        elif norms[index] == 0 or projections[index] <= tol * norms[index]:
            status = EffectStatus.NO_EVIDENCE
        else:
            status = EffectStatus.POTENTIALLY_SIGNIFICANT
        statuses.append((index, column, status))
    return PairSignificance(
        pair=design.pair,
        statuses=statuses,
        rank=basis.shape[1],
        active_columns=tuple(sorted(active_set)),
        nonzero=fit.coef.nonzero_count(),
    )


@dataclass
class CategoryRow:
    category: str
    effects: int
    non_present_pairs: int
    qualifying_pairs: int

    @property
    def non_present(self) -> Fraction | None:
        """Share of qualifying pairs with no potentially significant effect of this kind."""
        if self.qualifying_pairs == 0:
            return None
        return Fraction(self.non_present_pairs, self.qualifying_pairs)

    @property
    def percent(self) -> float | None:
        share = self.non_present
        return None if share is None else float(100 * share)


@dataclass
class SignificanceTable:
    rows: list[CategoryRow]
    total_pairs: int
    qualifying_pairs: int
    rank_histogram: dict[int, int] = field(default_factory=dict)
    no_evidence_percent: dict[str, list[float]] = field(default_factory=dict)

    def row(self, category: str) -> CategoryRow:
        return next(r for r in self.rows if r.category == category)


def aggregate_table(reports: Iterable[PairSignificance], n: int) -> SignificanceTable:
    """Category table over the pairs with at least one nonzero penalized coefficient."""
    reports = list(reports)
    if not reports:
        raise DataError("no significance reports to aggregate")
    qualifying = [r for r in reports if r.qualifies]
    counts = effect_counts(n)
    effects = {
        "persistence": counts.persistence,
        "reciprocity": counts.reciprocity,
        "diversification": counts.diversification,
        "disintermediation": counts.disintermediation,
    }
    rows = []
    for category in CATEGORIES:
        absent = sum(1 for r in qualifying if r.significant_by_category()[category] == 0)
        rows.append(CategoryRow(category, effects[category], absent, len(qualifying)))

    second_order = {}
    for category in (DIVERSIFICATION, DISINTERMEDIATION):
        shares = [r.no_evidence_share(category) for r in qualifying]
        second_order[category] = [float(100 * s) for s in shares if s is not None]

    return SignificanceTable(
        rows=rows,
        total_pairs=len(reports),
        qualifying_pairs=len(qualifying),
        rank_histogram=dict(sorted(Counter(r.rank for r in qualifying).items())),
        no_evidence_percent=second_order,
    )


def columns_per_class(n: int) -> int:
    return effect_counts(n).total // N_CLASSES
