"""File formats: edge-list and dense CSV series, coefficient and ground-truth JSON,
path and evaluation reports.

Floats are written with ``repr`` precision so that reloaded values are bit-identical.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from network_autologit.exceptions import DataError
from network_autologit.model.analysis import PairSignificance, SignificanceTable
from network_autologit.model.design import N_CLASSES, CoefficientBlock, column_labels
from network_autologit.model.network import NetworkSeries, edge_records, load_dense, load_series
from network_autologit.model.prediction import EvaluationResult, PredictionSet, RocCurve
from network_autologit.model.selection import PathResult
from network_autologit.model.simulate import GroundTruth

FLOAT_FORMAT = "%.17g"
_SLICE_FILE = re.compile(r"slice_(\d+)\.csv$")


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def _pair_key(pair: tuple[int, int]) -> str:
    return f"{pair[0]}-{pair[1]}"


def _parse_pair(key: str) -> tuple[int, int]:
    i, j = key.split("-")
    return int(i), int(j)


def write_json(path: Path, payload: Any) -> None:
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def read_table(path: Path, **kwargs: Any) -> pd.DataFrame:
    """``pd.read_csv`` with unreadable, undecodable or malformed files raised as DataError."""
    try:
        return pd.read_csv(path, **kwargs)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def save_edge_list(series: NetworkSeries, path: Path) -> None:
    """Edge-list CSV with header ``t,i,j`` plus a sidecar holding n, T and node labels."""
    path = Path(path)
    frame = pd.DataFrame(edge_records(series), columns=["t", "i", "j"])
    frame.to_csv(path, index=False)
    write_json(
        _meta_path(path),
        {"n": series.n, "T": series.T, "node_labels": list(series.node_labels or []) or None},
    )


def read_edge_list(path: Path, n: int | None = None, T: int | None = None) -> NetworkSeries:
    """Read an edge list; sizes come from arguments, else the sidecar, else the records."""
    path = Path(path)
    frame = read_table(path)
    if list(frame.columns) != ["t", "i", "j"]:
        raise DataError(f"edge list {path} must have header t,i,j, got {list(frame.columns)}")
    if not all(pd.api.types.is_integer_dtype(frame[c]) for c in frame.columns) and len(frame):
        raise DataError(f"edge list {path} has non-integer entries")
    meta = read_json(_meta_path(path)) if _meta_path(path).exists() else {}
    labels = meta.get("node_labels")
    n = n or meta.get("n") or int(frame[["i", "j"]].to_numpy().max(initial=0))
    T = T or meta.get("T") or int(frame["t"].max() if len(frame) else 0)
    return load_series(frame.itertuples(index=False, name=None), n, T, labels)


def save_dense(series: NetworkSeries, directory: Path) -> None:
    """One ``slice_<t>.csv`` of 0/1 per slice; rows are sources i, columns targets j."""
    directory = Path(directory)
    width = len(str(series.T))
    labels = list(series.node_labels) if series.node_labels else range(1, series.n + 1)
    for t in range(1, series.T + 1):
        frame = pd.DataFrame(series.slice(t), index=labels, columns=labels)
        frame.to_csv(directory / f"slice_{t:0{width}d}.csv")


def read_dense(directory: Path) -> NetworkSeries:
    directory = Path(directory)
    files = sorted(
        (int(m.group(1)), p) for p in directory.iterdir() if (m := _SLICE_FILE.search(p.name))
    )
    if not files:
        raise DataError(f"no slice_<t>.csv files in {directory}")
    if [t for t, _ in files] != list(range(1, len(files) + 1)):
        raise DataError(f"slice files in {directory} are not numbered 1..{len(files)}")
    frames = [read_table(p, index_col=0) for _, p in files]
    labels = [str(c) for c in frames[0].columns]
    node_labels = None if labels == [str(k) for k in range(1, len(labels) + 1)] else labels
    return load_dense([f.to_numpy() for f in frames], node_labels)


def read_series(path: Path) -> NetworkSeries:
    """Dense directory or edge-list file, chosen by what ``path`` is."""
    path = Path(path)
    if path.is_dir():
        return read_dense(path)
    if not path.exists():
        raise DataError(f"series file {path} does not exist")
    return read_edge_list(path)


def coefficient_entries(n: int, blocks: Mapping[tuple[int, int], CoefficientBlock]) -> list[dict]:
    """Sparse records: every intercept and every nonzero theta entry."""
    entries = []
    for pair in sorted(blocks):
        block = blocks[pair]
        columns = column_labels(n, *pair)
        for r in range(N_CLASSES):
            entries.append(
                {
                    "pair": list(pair),
                    "class": r + 1,
                    "effect": "alpha",
                    "third_node": None,
                    "value": float(block.intercepts[r]),
                }
            )
            for k in np.flatnonzero(block.theta[r]):
                entries.append(
                    {
                        "pair": list(pair),
                        "class": r + 1,
                        "effect": columns[k].family.value,
                        "third_node": columns[k].third_node,
                        "column": int(k),
                        "value": float(block.theta[r, k]),
                    }
                )
    return entries


def blocks_from_entries(n: int, entries: Iterable[Mapping]) -> dict[tuple[int, int], CoefficientBlock]:
    d = len(column_labels(n, 1, 2))
    blocks: dict[tuple[int, int], CoefficientBlock] = {}
    for entry in entries:
        pair = tuple(int(v) for v in entry["pair"])
        block = blocks.setdefault(pair, CoefficientBlock.zeros(d))
        r = int(entry["class"]) - 1
        if entry["effect"] == "alpha":
            block.intercepts[r] = float(entry["value"])
        else:
            block.theta[r, int(entry["column"])] = float(entry["value"])
    return blocks


def write_coefficients(
    path: Path, n: int, lam: float, blocks: Mapping[tuple[int, int], CoefficientBlock]
) -> None:
    write_json(path, {"n": n, "lambda": lam, "entries": coefficient_entries(n, blocks)})


def read_coefficients(path: Path) -> tuple[int, float, dict[tuple[int, int], CoefficientBlock]]:
    payload = read_json(path)
    try:
        n = int(payload["n"])
        return n, float(payload["lambda"]), blocks_from_entries(n, payload["entries"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed coefficient file {path}: {exc}") from exc


def write_path_fits(path: Path, n: int, result: PathResult) -> None:
    """Coefficients of every valid grid point, enough to recompute each BIC."""
    write_json(
        path,
        {
            "n": n,
            "points": [
                {
                    "lambda": point.lam,
                    "bic": point.bic,
                    "entries": coefficient_entries(
                        n, {pair: fit.coef for pair, fit in point.batch.fits.items()}
                    ),
                }
                for point in result.points
                if point.valid
            ],
        },
    )


def read_path_fits(path: Path) -> tuple[int, list[tuple[float, float, dict]]]:
    payload = read_json(path)
    n = int(payload["n"])
    return n, [
        (float(p["lambda"]), float(p["bic"]), blocks_from_entries(n, p["entries"]))
        for p in payload["points"]
    ]


def path_frame(result: PathResult) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "lambda": point.lam,
                "bic": point.bic,
                "active": point.total_active,
                "rank": point.total_rank,
                "valid": point.valid,
                "failures": len(point.batch.failures),
            }
            for point in result.points
        ]
    )


def write_frame(frame: pd.DataFrame, path: Path) -> None:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def table_frame(table: SignificanceTable) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "category": row.category,
                "effects": row.effects,
                "non_present_pairs": row.non_present_pairs,
                "qualifying_pairs": row.qualifying_pairs,
                "non_present_percent": row.percent,
            }
            for row in table.rows
        ]
    )


def write_pair_reports(path: Path, reports: Iterable[PairSignificance]) -> None:
    write_json(path, [report.as_dict() for report in reports])


def write_diagnostics(path: Path, records: Iterable[Mapping]) -> None:
    """One JSON object per line."""
    with Path(path).open("w") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def roc_frame(curve: RocCurve) -> pd.DataFrame:
    return pd.DataFrame({"fpr": curve.fpr, "tpr": curve.tpr})


def auc_frame(result: EvaluationResult) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "origin": o.origin,
                "lambda": o.lam,
                "auc": o.auc,
                "true_auc": o.true_auc,
                "degenerate": o.degenerate,
                "error": o.error,
            }
            for o in result.origins
        ]
    )


def prediction_frame(prediction: PredictionSet) -> pd.DataFrame:
    frame = pd.DataFrame(prediction.edges(), columns=["i", "j", "probability"])
    frame.insert(0, "t", prediction.horizon)
    return frame


def write_ground_truth(path: Path, truth: GroundTruth) -> None:
    write_json(
        path,
        {
            "n": truth.n,
            "entries": coefficient_entries(truth.n, truth.blocks),
            "groups": {_pair_key(p): g for p, g in sorted(truth.groups.items())},
            "triples": {_pair_key(p): list(t) for p, t in sorted(truth.triples.items())},
            "support": {
                _pair_key(p): np.argwhere(mask).tolist() for p, mask in sorted(truth.support.items())
            },
        },
    )


def read_ground_truth(path: Path) -> GroundTruth:
    payload = read_json(path)
    n = int(payload["n"])
    truth = GroundTruth(
        n=n,
        blocks=blocks_from_entries(n, payload["entries"]),
        groups={_parse_pair(k): int(g) for k, g in payload.get("groups", {}).items()},
        triples={_parse_pair(k): tuple(t) for k, t in payload.get("triples", {}).items()},
    )
    for key, positions in payload.get("support", {}).items():
        recorded = sorted(tuple(p) for p in positions)
        actual = sorted(map(tuple, np.argwhere(truth.support[_parse_pair(key)]).tolist()))
        if recorded != actual:
            raise DataError(f"support mask of pair {key} does not match its coefficients")
    return truth
