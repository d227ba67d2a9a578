"""Dynamic directed binary networks and dyad views.

Nodes and time slices are 1-based in every public function; arrays are 0-based internally.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import IntEnum

import networkx as nx
import numpy as np

from network_autologit.exceptions import (
    ConfigError,
    DataError,
    IndexRangeError,
    PairOrderError,
    SelfLoopError,
)


class DyadOutcome(IntEnum):
    """State of the ordered bit pair (y_ij, y_ji) for a pair i < j."""

    NN = 0  # (0, 0)
    SR = 1  # (1, 0)
    RS = 2  # (0, 1)
    BB = 3  # (1, 1)

    @classmethod
    def from_bits(cls, y_ij: int, y_ji: int) -> DyadOutcome:
        return cls(int(y_ij) + 2 * int(y_ji))

    @property
    def bits(self) -> tuple[int, int]:
        return int(self) & 1, int(self) >> 1


@dataclass(frozen=True)
class NetworkSeries:
    """T x n x n binary tensor Y_1..Y_T without self-loops. Immutable once built."""

    y: np.ndarray
    node_labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        y = np.asarray(self.y)
        if y.ndim != 3 or y.shape[1] != y.shape[2]:
            raise DataError(f"expected a (T, n, n) tensor, got shape {y.shape}")
        if y.shape[1] < 2:
            raise DataError("a network series needs at least 2 nodes")
        if y.shape[0] < 1:
            raise DataError("a network series needs at least 1 slice")
        if not np.isin(y, (0, 1)).all():
            raise DataError("network entries must be 0 or 1")
        if np.any(np.einsum("tii->ti", y)):
            raise SelfLoopError("self-loops are not allowed (y[t, i, i] must be 0)")
        if self.node_labels is not None and len(self.node_labels) != y.shape[1]:
            raise DataError(
                f"{len(self.node_labels)} node labels given for {y.shape[1]} nodes"
            )
        frozen = np.array(y, dtype=np.uint8, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "y", frozen)
        if self.node_labels is not None:
            object.__setattr__(self, "node_labels", tuple(str(x) for x in self.node_labels))

    @property
    def n(self) -> int:
        return int(self.y.shape[1])

    @property
    def T(self) -> int:
        return int(self.y.shape[0])

    def slice(self, t: int) -> np.ndarray:
        """Adjacency matrix Y_t (1-based t)."""
        if not 1 <= t <= self.T:
            raise IndexRangeError(f"time {t} outside 1..{self.T}")
        return self.y[t - 1]

    def prefix(self, t: int) -> NetworkSeries:
        """Series restricted to Y_1..Y_t."""
        if not 1 <= t <= self.T:
            raise IndexRangeError(f"time {t} outside 1..{self.T}")
        return NetworkSeries(self.y[:t], self.node_labels)

    def pairs(self) -> list[tuple[int, int]]:
        return ordered_pairs(self.n)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NetworkSeries):
            return NotImplemented
        return np.array_equal(self.y, other.y) and self.node_labels == other.node_labels

    def __hash__(self) -> int:
        return hash((self.y.shape, self.y.tobytes()))


def ordered_pairs(n: int) -> list[tuple[int, int]]:
    """All pairs (i, j) with 1 <= i < j <= n in lexicographic order."""
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def load_series(
    records: Iterable[Sequence[int]],
    n: int,
    T: int,
    node_labels: Sequence[str] | None = None,
) -> NetworkSeries:
    """Build a series from edge records (t, i, j); duplicates collapse to a single link."""

    if n < 2 or T < 1:
        raise ConfigError(f"invalid series size n={n}, T={T}")
    y = np.zeros((T, n, n), dtype=np.uint8)
    for record in records:
        if len(record) != 3:
            raise DataError(f"edge record must be (t, i, j), got {tuple(record)!r}")
        t, i, j = (int(v) for v in record)
        if not (1 <= t <= T and 1 <= i <= n and 1 <= j <= n):
            raise IndexRangeError(f"edge record {(t, i, j)} outside n={n}, T={T}")
        if i == j:
            raise SelfLoopError(f"edge record {(t, i, j)} is a self-loop")
        y[t - 1, i - 1, j - 1] = 1
    return NetworkSeries(y, tuple(node_labels) if node_labels is not None else None)


def load_dense(
    slices: Sequence[np.ndarray], node_labels: Sequence[str] | None = None
) -> NetworkSeries:
    """Build a series from dense 0/1 slices (rows = source i, columns = target j)."""

    if not slices:
        raise DataError("no slices given")
    arrays = [np.asarray(s) for s in slices]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise DataError(f"slices have differing shapes: {sorted(shapes)}")
    stacked = np.stack(arrays)
    if not np.isin(stacked, (0, 1)).all():
        raise DataError("dense slices must contain only 0 and 1")
    return NetworkSeries(stacked.astype(np.uint8), tuple(node_labels) if node_labels else None)


def edge_records(series: NetworkSeries) -> list[tuple[int, int, int]]:
    """The (t, i, j) records of every link, 1-based, sorted."""
    t, i, j = np.nonzero(series.y)
    return [(int(a) + 1, int(b) + 1, int(c) + 1) for a, b, c in zip(t, i, j)]


def dyad_outcomes(series: NetworkSeries, i: int, j: int) -> np.ndarray:
    """Outcome codes (DyadOutcome values) of pair (i, j) for t = 1..T."""
    _check_pair(series.n, i, j)
    return series.y[:, i - 1, j - 1].astype(np.int8) + 2 * series.y[:, j - 1, i - 1].astype(
        np.int8
    )


def density(series: NetworkSeries) -> float:
    """Mean number of directed links per slice."""
    return float(series.y.sum(dtype=np.int64)) / series.T


def max_links(n: int) -> int:
    return n * (n - 1)


def reciprocity(series: NetworkSeries) -> float:
    """Mean over slices of the fraction of links that are reciprocated (empty slices skipped)."""
    values = [nx.overall_reciprocity(_digraph(a)) for a in series.y if a.any()]
    return float(np.mean(values)) if values else 0.0


def transitivity(series: NetworkSeries) -> float:
    """Mean over slices of the directed average clustering coefficient."""
    return float(np.mean([nx.average_clustering(_digraph(a)) for a in series.y]))


def summary(series: NetworkSeries) -> dict[str, float | int]:
    return {
        "nodes": series.n,
        "slices": series.T,
        "density": density(series),
        "max_links": max_links(series.n),
        "reciprocity": reciprocity(series),
        "transitivity": transitivity(series),
    }


def _digraph(adjacency: np.ndarray) -> nx.DiGraph:
    return nx.from_numpy_array(adjacency, create_using=nx.DiGraph)


def _check_pair(n: int, i: int, j: int) -> None:
    if i >= j:
        raise PairOrderError(f"pair ({i}, {j}) must satisfy i < j")
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexRangeError(f"pair ({i}, {j}) outside 1..{n}")
