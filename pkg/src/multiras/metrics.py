"""Comparison metrics and deviation reports between table estimates.

Two kinds of comparison recur when judging balanced estimates: the
Frobenius distance between same-shaped tables (including pairwise
distance matrices over several estimates), and elementwise relative
deviations of an aggregated estimate against a reference table, the
quantity heatmaps are drawn from. Relative deviations are signed
((estimate - reference) / reference, so overestimation is positive) and
therefore reported as plain float arrays, not nonnegative tensors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ShapeMismatchError
from .tensor import Tensor

ZERO_POLICIES = ("flag", "zero-if-both-zero")

DEFAULT_THRESHOLDS = (0.01, 0.05, 0.1, 0.5, 1.0)


def frobenius_distance(x: Tensor, y: Tensor) -> float:
    """Square root of the summed squared elementwise differences."""
    if x.shape != y.shape:
        raise ShapeMismatchError(f"shape mismatch: {x.shape} vs {y.shape}")
    diff = x.values - y.values
    return math.sqrt(float((diff * diff).sum()))


def aggregate_slices(x: Tensor, d: int) -> Tensor:
    """Sum the slices of ``x`` along dimension ``d`` (its margin over ``d``)."""
    return x.margin(d)


@dataclass
class DeviationReport:
    """Elementwise relative deviations of an estimate vs. a reference.

    ``relative_deviation`` is signed and NaN at flagged cells (zero
    reference where the policy cannot assign a value); ``flagged`` marks
    those cells, and they are excluded from the summary statistics but
    counted in ``summary["flagged_cells"]``.
    """

    reference_name: str
    estimate_name: str
    dim_names: tuple[str, ...]
    labels: tuple[tuple[str, ...], ...]
    relative_deviation: np.ndarray
    flagged: np.ndarray
    zero_policy: str
    thresholds: tuple[float, ...]
    frobenius_of_difference: float
    summary: dict

    def recompute_summary(self) -> dict:
        """Summary statistics recomputed from the stored grids."""
        valid = ~self.flagged
        abs_dev = np.abs(self.relative_deviation[valid])
        return {
            "max_abs_relative": float(abs_dev.max()) if abs_dev.size else None,
            "mean_abs_relative": float(abs_dev.mean()) if abs_dev.size else None,
            "frobenius_of_difference": self.frobenius_of_difference,
            "cells_exceeding": {
                thr: int((abs_dev > thr).sum()) for thr in self.thresholds
            },
            "flagged_cells": int(self.flagged.sum()),
        }


def relative_deviation(
    reference: Tensor,
    estimate: Tensor,
    zero_policy: str = "flag",
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    reference_name: str = "reference",
    estimate_name: str = "estimate",
) -> DeviationReport:
    """Per-cell (estimate - reference) / reference with zero-cell policy.

    ``zero_policy`` controls cells whose reference is zero: ``"flag"``
    marks every such cell NaN and excludes it from the summary;
    ``"zero-if-both-zero"`` scores agreeing zeros as deviation 0 and flags
    only zero-reference cells with a nonzero estimate.
    """
    if reference.shape != estimate.shape:
        raise ShapeMismatchError(
            f"shape mismatch: {reference.shape} vs {estimate.shape}"
        )
    if zero_policy not in ZERO_POLICIES:
        raise ValueError(f"zero_policy must be one of {ZERO_POLICIES}")

    ref = reference.values
    est = estimate.values
    dev = np.full(ref.shape, np.nan)
    positive = ref > 0.0
    np.divide(est - ref, ref, out=dev, where=positive)
    flagged = ~positive
    if zero_policy == "zero-if-both-zero":
        agree = (~positive) & (est == 0.0)
        dev[agree] = 0.0
        flagged = (~positive) & (est != 0.0)

    report = DeviationReport(
        reference_name=reference_name,
        estimate_name=estimate_name,
        dim_names=reference.dim_names,
        labels=reference.labels,
        relative_deviation=dev,
        flagged=flagged,
        zero_policy=zero_policy,
        thresholds=tuple(float(t) for t in thresholds),
        frobenius_of_difference=frobenius_distance(estimate, reference),
        summary={},
    )
    report.summary = report.recompute_summary()
    return report


@dataclass
class DistanceMatrix:
    """Pairwise Frobenius distances between same-shaped tables."""

    names: tuple[str, ...]
    values: np.ndarray

    def __getitem__(self, pair):
        i, j = pair
        return float(self.values[i, j])


def distance_matrix(tables) -> DistanceMatrix:
    """Symmetric zero-diagonal matrix of pairwise Frobenius distances.

    ``tables`` is a name -> Tensor mapping or a sequence of (name, Tensor)
    pairs; all tables must share one shape.
    """
    if isinstance(tables, Mapping):
        items = list(tables.items())
    else:
        items = list(tables)
    if not items:
        raise ValueError("distance_matrix needs at least one table")
    names = tuple(str(name) for name, _ in items)
    tensors = [t for _, t in items]
    n = len(tensors)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = frobenius_distance(tensors[i], tensors[j])
    return DistanceMatrix(names, out)
