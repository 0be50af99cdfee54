"""On-disk formats: dataset CSV, margin-matrix text, ensemble JSON, reports.

Floats are written with repr(), which round-trips doubles bit-exactly, so
save/load pairs reproduce arrays byte-for-byte.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .boosting import Dataset, DecisionStump, Ensemble
from .margins import L1_TOL, MarginMatrix, WeightVector


class FileFormatError(ValueError):
    """Malformed input file; the message names the offending line."""


def load_dataset(path) -> Dataset:
    """Parse a label-first CSV: first column -1/+1 (0/1 accepted, 0 mapped
    to -1), remaining columns real features. An optional header row is
    detected by a non-numeric first cell."""
    labels: list[float] = []
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if width is None:
                try:
                    float(row[0])
                except ValueError:
                    continue  # header row
            if len(row) < 2:
                raise FileFormatError(
                    f"{path}: line {line_no}: need a label and at least one feature"
                )
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise FileFormatError(
                    f"{path}: line {line_no}: expected {width} fields, got {len(row)}"
                )
            labels.append(_parse_label(row[0], path, line_no))
            try:
                rows.append([float(cell) for cell in row[1:]])
            except ValueError:
                raise FileFormatError(
                    f"{path}: line {line_no}: non-numeric feature value"
                ) from None
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    return Dataset(np.array(rows), np.array(labels))


def _parse_label(cell: str, path, line_no: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise FileFormatError(
            f"{path}: line {line_no}: label {cell!r} is not numeric"
        ) from None
    if value in (1.0, -1.0):
        return value
    if value == 0.0:
        return -1.0
    raise FileFormatError(
        f"{path}: line {line_no}: label must be -1, 0, or +1, got {cell!r}"
    )


def save_dataset(path, dataset: Dataset) -> None:
    with open(path, "w", newline="") as handle:
        for label, row in zip(dataset.labels, dataset.features):
            cells = [str(int(label))] + [repr(float(v)) for v in row]
            handle.write(",".join(cells) + "\n")


def load_margin_matrix(path) -> tuple[MarginMatrix, WeightVector]:
    """Parse the margin-matrix text format.

    Line 1: "n m". Line 2: m weights, renormalized to unit l1 norm on load
    unless already within tolerance (so round-trips are bit-exact). Then n
    rows of m entries, each within [-1, 1] up to 1e-9.
    """
    with open(path) as handle:
        lines = [line.split() for line in handle if line.strip()]
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    header = lines[0]
    if len(header) != 2:
        raise FileFormatError(f"{path}: line 1: expected 'n m'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise FileFormatError(f"{path}: line 1: expected two integers") from None
    if n < 1 or m < 1:
        raise FileFormatError(f"{path}: line 1: dimensions must be positive")
    if len(lines) != n + 2:
        raise FileFormatError(
            f"{path}: expected {n + 2} nonempty lines for a {n} x {m} matrix, "
            f"got {len(lines)}"
        )
    weights = _parse_row(lines[1], m, path, line_no=2)
    total = float(np.sum(np.abs(weights)))
    if total == 0.0:
        raise FileFormatError(f"{path}: line 2: weights are all zero")
    if abs(total - 1.0) > L1_TOL:
        weights = weights / total
    entries = np.empty((n, m))
    for i in range(n):
        row = _parse_row(lines[2 + i], m, path, line_no=3 + i)
        if np.max(np.abs(row)) > 1.0 + 1e-9:
            raise FileFormatError(
                f"{path}: line {3 + i}: matrix entry out of [-1, 1]"
            )
        entries[i] = row
    return MarginMatrix(entries), WeightVector(weights)


def _parse_row(cells: list[str], m: int, path, line_no: int) -> np.ndarray:
    if len(cells) != m:
        raise FileFormatError(
            f"{path}: line {line_no}: expected {m} values, got {len(cells)}"
        )
    try:
        return np.array([float(cell) for cell in cells])
    except ValueError:
        raise FileFormatError(
            f"{path}: line {line_no}: non-numeric value"
        ) from None


def save_margin_matrix(path, U: MarginMatrix, w: WeightVector) -> None:
    with open(path, "w") as handle:
        handle.write(f"{U.n_points} {U.n_hypotheses}\n")
        handle.write(" ".join(repr(float(v)) for v in w.values) + "\n")
        for row in U.values:
            handle.write(" ".join(repr(float(v)) for v in row) + "\n")


def save_ensemble(path, ensemble: Ensemble) -> None:
    payload = {
        "weights": [float(v) for v in ensemble.weights.values],
        "stumps": [
            {
                "feature": stump.feature,
                "threshold": stump.threshold,
                "polarity": stump.polarity,
            }
            for stump in ensemble.hypotheses
        ],
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def load_ensemble(path) -> Ensemble:
    with open(path) as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: invalid JSON: {exc}") from None
    try:
        weights = WeightVector(np.array(payload["weights"], dtype=np.float64))
        stumps = tuple(
            DecisionStump(
                feature=int(item["feature"]),
                threshold=float(item["threshold"]),
                polarity=int(item["polarity"]),
            )
            for item in payload["stumps"]
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: missing or malformed field: {exc}") from None
    return Ensemble(stumps, weights)


def write_json_report(path, payload: dict) -> None:
    with open(path, "w") as handle:
        handle.write(json.dumps(payload, indent=2, sort_keys=True))
        handle.write("\n")


def write_curve_csv(path, curve) -> None:
    with open(path, "w", newline="") as handle:
        handle.write("margin,cumulative_fraction\n")
        for margin_value, fraction in curve:
            handle.write(f"{repr(float(margin_value))},{repr(float(fraction))}\n")


def ensure_parent(path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
