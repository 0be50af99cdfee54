"""Support halving of ensemble weight vectors, plus sampling baselines.

One halving round protects the top third of the support by absolute value,
rescales the remaining free columns of the margin matrix by the largest free
weight, and twice colors the scaled columns (with an extra row carrying the
l1 mass) to decide which half of the free support to zero and which to
double. The minority-sign choice keeps row sums, hence every margin, within
omega times the coloring discrepancy of their pre-halving values. Repeating
rounds until the support reaches the target T yields a T-sparse weight vector
whose margin perturbation is dominated by the final round.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discrepancy import (
    DEFAULT_CONFIG,
    ColoringConfig,
    DiscrepancyBoundError,
    full_coloring,
    minority_sign,
)
from .margins import MarginMatrix, WeightVector, require_normalized, sup_norm_diff
from .seeding import rng_from, split_seed

MIN_HALVING_SUPPORT = 6


@dataclass(frozen=True)
class SparsifyReport:
    """Diagnostics for one sparsify call."""

    initial_support: int
    final_support: int
    halving_rounds: int
    achieved_error: float
    per_round_errors: tuple[float, ...]
    seed: object
    truncated_fallback: bool = False


def _check_dims(U: MarginMatrix, w: WeightVector) -> None:
    if len(w) != U.n_hypotheses:
        raise ValueError(
            f"dimension mismatch: matrix has {U.n_hypotheses} columns, "
            f"weight vector has {len(w)} entries"
        )


def _split_support(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Partition the support into the protected top third (by |value|) and
    the free remainder, deterministically (ties resolved by lower index)."""
    support = np.flatnonzero(values)
    protected_count = -(-support.size // 3)
    order = np.argsort(-np.abs(values[support]), kind="stable")
    protected = support[order[:protected_count]]
    free = np.sort(support[order[protected_count:]])
    return protected, free


def _build_halving_matrix(
    U_values: np.ndarray, values: np.ndarray, columns: np.ndarray, omega: float
) -> np.ndarray:
    """The (n+1) x k coloring input: margin columns scaled by w_j/omega, plus
    an l1 row |w_j|/omega that makes the coloring preserve total mass too."""
    scaled = U_values[:, columns] * (values[columns] / omega)[None, :]
    l1_row = np.abs(values[columns]) / omega
    return np.vstack([scaled, l1_row])


def halve(
    U: MarginMatrix,
    w: WeightVector,
    seed=None,
    config: ColoringConfig = DEFAULT_CONFIG,
) -> WeightVector:
    """One halving round: support drops to at most ceil(|support|/2) while
    every margin moves by at most O(omega * coloring discrepancy).

    The scaling weight omega is fixed once per call. After the first of the
    two color-and-zero passes the surviving weights have doubled, so the
    second pass's matrix can reach magnitude 2; the coloring input is
    rescaled into [-1, 1] (a positive rescaling changes no coloring
    decision), keeping omega's role in the update untouched.
    """
    require_normalized(w)
    _check_dims(U, w)
    support = w.support_size
    if support < MIN_HALVING_SUPPORT:
        raise ValueError(
            f"halving needs support >= {MIN_HALVING_SUPPORT}, got {support}"
        )

    values = w.values.copy()
    _, free = _split_support(values)
    omega = float(np.max(np.abs(values[free]))) if free.size else 0.0
    if omega == 0.0:
        # Unreachable for valid inputs (the free set is drawn from the
        # support), kept as a defensive no-op so callers can fall back.
        return w

    for iteration in (0, 1):
        columns = free[values[free] != 0.0]
        if columns.size == 0:
            break
        A = _build_halving_matrix(U.values, values, columns, omega)
        peak = float(np.max(np.abs(A)))
        if peak > 1.0:
            A = A / peak
        x = full_coloring(A, split_seed(seed, iteration), config)
        sigma = minority_sign(x)
        kept = x == sigma
        values[columns[kept]] *= 2.0
        values[columns[~kept]] = 0.0

    total = float(np.sum(np.abs(values)))
    values /= total
    result = WeightVector(values)
    if result.support_size > -(-support // 2):
        raise RuntimeError(
            f"halving kept {result.support_size} of {support} entries; "
            "minority-sign bookkeeping is broken"
        )
    return result


def sparsify(
    U: MarginMatrix,
    w: WeightVector,
    T: int,
    seed=None,
    config: ColoringConfig = DEFAULT_CONFIG,
) -> tuple[WeightVector, SparsifyReport]:
    """Repeated halving until the support is at most T.

    Rounds that fail to shrink the support (possible only through coloring
    retry exhaustion) are retried with fresh derived seeds up to 8 times;
    if the support is still above T when halving can no longer run, the
    remainder is truncated to the top T weights and the report is flagged.
    """
    require_normalized(w)
    _check_dims(U, w)
    if not 1 <= T <= len(w):
        raise ValueError(f"target support T={T} must be in [1, {len(w)}]")

    current = w
    per_round: list[float] = []
    fallback = False
    while current.support_size > max(T, MIN_HALVING_SUPPORT - 1):
        before = current.support_size
        candidate = None
        for retry in range(8):
            try:
                candidate = halve(
                    U, current, split_seed(seed, len(per_round), retry), config
                )
                break
            except DiscrepancyBoundError:
                continue
        if candidate is None or candidate.support_size >= before:
            fallback = True
            break
        per_round.append(sup_norm_diff(U, current, candidate))
        current = candidate

    if current.support_size > T:
        current = truncate_top(current, T)
        fallback = True

    report = SparsifyReport(
        initial_support=w.support_size,
        final_support=current.support_size,
        halving_rounds=len(per_round),
        achieved_error=sup_norm_diff(U, w, current),
        per_round_errors=tuple(per_round),
        seed=seed,
        truncated_fallback=fallback,
    )
    return current, report


def importance_sample(w: WeightVector, T: int, seed=None) -> WeightVector:
    """Baseline sparsifier: T draws with replacement, P(i) = |w_i|, output
    entry sign(w_i) * n_i / T. The l1 norm is 1 by the identity sum(n_i) = T."""
    require_normalized(w)
    if T < 1:
        raise ValueError("need at least one draw")
    probabilities = np.abs(w.values)
    probabilities = probabilities / probabilities.sum()
    counts = rng_from(seed).multinomial(T, probabilities)
    return WeightVector(np.sign(w.values) * counts / T)


def truncate_top(w: WeightVector, T: int) -> WeightVector:
    """Keep the T largest-|value| entries (ties to the lower index) and
    renormalize to unit l1 norm."""
    require_normalized(w)
    if T < 1:
        raise ValueError("need at least one kept entry")
    if w.support_size <= T:
        return w
    order = np.argsort(-np.abs(w.values), kind="stable")
    values = np.zeros_like(w.values)
    keep = order[:T]
    values[keep] = w.values[keep]
    values /= np.sum(np.abs(values))
    return WeightVector(values)


def halving_error_bound(n: int, support: int, constant: float) -> float:
    """Reference scale K*sqrt(log(2+n/s)/s) for one halving round at support s."""
    return constant * math.sqrt(math.log(2.0 + n / support) / support)
