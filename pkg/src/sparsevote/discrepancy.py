"""Constructive combinatorial discrepancy minimization.

Produces sign colorings x of the columns of a matrix A with entries in
[-1, 1] such that the discrepancy max_i |(Ax)_i| meets a Spencer-type bound,
plus the minority-sign column subset that inherits a row-sum sandwich from
the coloring. The constructive engine is a Lovett-Meka-style partial-coloring
random walk: a discretized Gaussian walk inside the cube [-1,1]^k, projected
orthogonal to coordinates already frozen at +-1 and to rows whose running
discrepancy has hit a per-phase cap. Each phase freezes at least half of the
remaining free coordinates; phases repeat until the coloring is complete.

Small instances bypass the walk entirely: an exhaustive search over all sign
vectors is exact, fast, and deterministic up to k = 16 columns. Phases whose
free count has shrunk to at most ``endgame_max`` coordinates are likewise
finished by enumeration instead of the walk, and completed colorings are
polished by deterministic single-coordinate (and, for narrow matrices,
opposite-pair) flips that strictly reduce the discrepancy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeding import rng_from, split_seed

ENTRY_TOL = 1e-9


class DiscrepancyBoundError(RuntimeError):
    """Raised when no attempt met the discrepancy bound within the retry budget."""

    def __init__(self, achieved: float, bound: float, attempts: int):
        self.achieved = achieved
        self.bound = bound
        self.attempts = attempts
        super().__init__(
            f"no coloring met the bound {bound:.6g} after {attempts} attempts; "
            f"best discrepancy achieved was {achieved:.6g}"
        )


class PhaseFailureError(RuntimeError):
    """Raised when one walk phase cannot freeze half its free coordinates."""


@dataclass(frozen=True)
class ColoringConfig:
    """Tuning knobs for the coloring machinery.

    spencer_constant is the K_S of the output bound; phase_cap_scale,
    step_size, max_iteration_factor and freeze_tolerance parameterize the
    walk; bruteforce_max and endgame_max are the exhaustive-search cutoffs;
    retry_budget caps full restarts; refine_sweeps and pair_refine_max
    control the flip polish on completed colorings.
    """

    spencer_constant: float = 12.0
    phase_cap_scale: float = 8.0
    step_size: float = 0.1
    max_iteration_factor: int = 64
    freeze_tolerance: float = 1e-6
    bruteforce_max: int = 16
    endgame_max: int = 12
    retry_budget: int = 16
    refine_sweeps: int = 32
    pair_refine_max: int = 64
    cap_activation: float = 0.9

    def __post_init__(self):
        if not (0 < self.step_size < 1):
            raise ValueError("step_size must be in (0, 1)")
        if self.bruteforce_max > 20 or self.endgame_max > 20:
            raise ValueError("exhaustive-search cutoffs beyond 20 are not supported")
        if self.retry_budget < 1:
            raise ValueError("retry_budget must be at least 1")


DEFAULT_CONFIG = ColoringConfig()


@dataclass(frozen=True)
class PartialColoring:
    """Walk state: fractional values in the cube plus a frozen mask.

    Frozen coordinates sit exactly at +-1 and never move again; a completed
    state (everything frozen) is a valid coloring.
    """

    values: np.ndarray
    frozen: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).copy()
        frozen = np.asarray(self.frozen, dtype=bool).copy()
        if values.ndim != 1 or frozen.shape != values.shape:
            raise ValueError("values and frozen mask must be 1-D with equal length")
        if values.size == 0:
            raise ValueError("empty partial coloring")
        if np.max(np.abs(values)) > 1.0 + ENTRY_TOL:
            raise ValueError("partial coloring values must lie in [-1, 1]")
        if frozen.any() and not np.all(np.abs(values[frozen]) == 1.0):
            raise ValueError("frozen coordinates must sit exactly at +-1")
        values.setflags(write=False)
        frozen.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "frozen", frozen)

    @classmethod
    def initial(cls, k: int) -> "PartialColoring":
        return cls(np.zeros(k), np.zeros(k, dtype=bool))

    @property
    def free_count(self) -> int:
        return int(np.count_nonzero(~self.frozen))

    @property
    def is_complete(self) -> bool:
        return bool(self.frozen.all())


def _validate_matrix(A) -> np.ndarray:
    arr = np.asarray(A, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains non-finite entries")
    peak = float(np.max(np.abs(arr)))
    if peak > 1.0 + ENTRY_TOL:
        raise ValueError(f"matrix entry out of [-1, 1]: magnitude {peak}")
    return np.clip(arr, -1.0, 1.0)


def spencer_bound(n_rows: int, k: int, constant: float) -> float:
    """Target discrepancy bound: c*sqrt(k*ln(e*n/k)) for k <= n, c*sqrt(n) beyond."""
    if k <= n_rows:
        return constant * math.sqrt(k * math.log(math.e * n_rows / k))
    return constant * math.sqrt(n_rows)


def discrepancy(A: np.ndarray, x: np.ndarray) -> float:
    return float(np.max(np.abs(A @ x)))


def _sign_patterns(bits: int) -> np.ndarray:
    """All 2^bits sign vectors as a (2^bits, bits) float matrix."""
    codes = np.arange(1 << bits, dtype=np.uint32)
    cols = [(codes >> j) & 1 for j in range(bits)]
    return 2.0 * np.stack(cols, axis=1).astype(np.float64) - 1.0


def bruteforce_min_discrepancy(A) -> tuple[float, np.ndarray]:
    """Exact minimum of max_i |(Ax)_i| over all sign vectors, with a minimizer.

    Negating x leaves the discrepancy unchanged, so the last coordinate is
    pinned at +1 and only 2^(k-1) candidates are scanned, in chunks sized to
    keep the row-sum block in cache.
    """
    arr = np.asarray(A, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    n, k = arr.shape
    if k > 20:
        raise ValueError(f"exhaustive search over 2^{k} colorings refused (k > 20)")
    if k == 1:
        x = np.ones(1)
        return discrepancy(arr, x), x
    last_col = arr[:, k - 1]
    patterns = _sign_patterns(k - 1)
    chunk = max(1, (1 << 22) // max(n, 1))
    best_val = math.inf
    best_x = None
    for start in range(0, patterns.shape[0], chunk):
        block = patterns[start : start + chunk]
        sums = block @ arr[:, : k - 1].T + last_col
        vals = np.max(np.abs(sums), axis=1)
        idx = int(np.argmin(vals))
        if vals[idx] < best_val:
            best_val = float(vals[idx])
            best_x = np.concatenate([block[idx], [1.0]])
    return best_val, best_x


def minority_sign(x) -> int:
    """The sign occurring at most floor(k/2) times in x; ties return -1."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("coloring must be a nonempty 1-D sign vector")
    if not np.all(np.abs(arr) == 1.0):
        raise ValueError("coloring entries must be exactly +-1")
    minus = int(np.count_nonzero(arr < 0))
    plus = arr.size - minus
    return -1 if minus <= plus else +1


def _orthonormal_rows(M: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as rows) of the row space of M."""
    if M.shape[0] == 0:
        return np.zeros((0, M.shape[1]))
    u, s, vt = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 0.0)))
    return vt[:rank]


def _phase_cap(n_rows: int, k_free: int, config: ColoringConfig) -> float:
    raw = k_free * math.log(math.e * (n_rows + 1) / k_free)
    raw = max(raw, float(min(k_free, n_rows + 1)))
    return config.phase_cap_scale * math.sqrt(raw)


def _enumerate_completion(
    A: np.ndarray, values: np.ndarray, frozen: np.ndarray
) -> np.ndarray:
    """Freeze every remaining coordinate at the sign pattern minimizing the
    discrepancy of the completed coloring (exhaustive over the free set)."""
    free_idx = np.flatnonzero(~frozen)
    base = A @ np.where(frozen, values, 0.0)
    patterns = _sign_patterns(free_idx.size)
    sums = patterns @ A[:, free_idx].T + base
    best = int(np.argmin(np.max(np.abs(sums), axis=1)))
    out = np.where(frozen, values, 0.0)
    out[free_idx] = patterns[best]
    return out


def _walk_phase(
    A: np.ndarray,
    values: np.ndarray,
    frozen: np.ndarray,
    seed,
    config: ColoringConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """One partial-coloring phase of the Gaussian walk.

    Returns updated (values, frozen). The walk direction is resampled each
    step, zeroed on frozen coordinates, and projected orthogonal to every
    row whose discrepancy increment within this phase has reached the cap.
    Coordinates reaching 1 - freeze_tolerance in absolute value snap to +-1.
    """
    rng = rng_from(seed)
    n_rows, k = A.shape
    x = values.copy()
    free = ~frozen
    free_start = int(free.sum())
    target = (free_start + 1) // 2
    cap = _phase_cap(n_rows, free_start, config)
    activation = config.cap_activation * cap

    row_shift = np.zeros(n_rows)
    capped = np.zeros(n_rows, dtype=bool)
    basis = np.zeros((0, k))
    basis_stale = False
    frozen_count = 0
    max_steps = config.max_iteration_factor * free_start

    for _ in range(max_steps):
        if frozen_count >= target:
            break
        g = rng.standard_normal(k)
        g[~free] = 0.0
        if basis.shape[0]:
            g -= basis.T @ (basis @ g)
        step = config.step_size * g
        x_new = x + step
        hit = free & (np.abs(x_new) >= 1.0 - config.freeze_tolerance)
        if hit.any():
            x_new[hit] = np.where(x_new[hit] >= 0.0, 1.0, -1.0)
            free &= ~hit
            frozen_count += int(hit.sum())
            if capped.any():
                basis_stale = True
        row_shift += A @ (x_new - x)
        x = x_new
        newly_capped = ~capped & (np.abs(row_shift) >= activation)
        if newly_capped.any():
            capped |= newly_capped
            basis_stale = True
        if basis_stale:
            rows = A[capped].copy()
            rows[:, ~free] = 0.0
            basis = _orthonormal_rows(rows)
            basis_stale = False
            if basis.shape[0] >= int(free.sum()):
                # The projection leaves no direction to move in.
                break

    if frozen_count < target:
        raise PhaseFailureError(
            f"froze {frozen_count} of {free_start} free coordinates "
            f"(needed {target})"
        )
    return x, ~free


def partial_coloring(
    A,
    state: PartialColoring,
    seed=None,
    config: ColoringConfig = DEFAULT_CONFIG,
) -> PartialColoring:
    """Advance one phase: freeze at least half of the currently free entries.

    Small tails (at most ``config.endgame_max`` free coordinates) are finished
    exactly by enumeration; larger phases run the projected Gaussian walk and
    raise PhaseFailureError if the iteration budget expires early.
    """
    arr = _validate_matrix(A)
    if arr.shape[1] != state.values.shape[0]:
        raise ValueError(
            f"matrix has {arr.shape[1]} columns but state has "
            f"{state.values.shape[0]} coordinates"
        )
    if state.free_count == 0:
        raise ValueError("no free coordinates left to color")

    if state.free_count <= config.endgame_max:
        completed = _enumerate_completion(arr, state.values, state.frozen)
        return PartialColoring(completed, np.ones_like(state.frozen))

    values, frozen = _walk_phase(arr, state.values, state.frozen, seed, config)
    return PartialColoring(values, frozen)


def _refine_flips(A: np.ndarray, x: np.ndarray, config: ColoringConfig) -> np.ndarray:
    """Deterministic local search: accept single-coordinate flips (and, for
    narrow matrices, opposite-sign pair flips) that strictly reduce the
    discrepancy. Each accepted move recomputes exact row sums, so the result
    never degrades the coloring."""
    x = x.copy()
    sums = A @ x
    current = float(np.max(np.abs(sums)))
    k = x.size
    for _ in range(config.refine_sweeps):
        improved = False
        for j in range(k):
            cand = sums - 2.0 * x[j] * A[:, j]
            val = float(np.max(np.abs(cand)))
            if val < current - 1e-12:
                x[j] = -x[j]
                sums = cand
                current = val
                improved = True
        if k <= config.pair_refine_max:
            while True:
                plus = np.flatnonzero(x > 0)
                minus = np.flatnonzero(x < 0)
                if plus.size == 0 or minus.size == 0:
                    break
                cand = (
                    sums[None, None, :]
                    - 2.0 * A[:, plus].T[:, None, :]
                    + 2.0 * A[:, minus].T[None, :, :]
                )
                vals = np.max(np.abs(cand), axis=2)
                a, b = np.unravel_index(int(np.argmin(vals)), vals.shape)
                if vals[a, b] >= current - 1e-12:
                    break
                x[plus[a]] = -1.0
                x[minus[b]] = 1.0
                sums = cand[a, b].copy()
                current = float(vals[a, b])
                improved = True
        if not improved:
            break
    return x


def full_coloring(
    A,
    seed=None,
    config: ColoringConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Complete sign coloring with discrepancy within the Spencer-type bound.

    For k <= config.bruteforce_max columns the exact exhaustive optimum is
    returned (deterministic, seed unused). Otherwise the partial-coloring walk
    runs phase by phase, the completed coloring is polished by local flips,
    and the whole attempt restarts with a fresh derived seed until the bound
    K_S*sqrt(k*ln(e*n/k)) (k <= n; K_S*sqrt(n) otherwise) is met or the retry
    budget is exhausted.
    """
    arr = _validate_matrix(A)
    n_rows, k = arr.shape
    bound = spencer_bound(n_rows, k, config.spencer_constant)

    if k <= config.bruteforce_max:
        achieved, x = bruteforce_min_discrepancy(arr)
        if achieved > bound:
            raise DiscrepancyBoundError(achieved, bound, attempts=1)
        return x

    best_val = math.inf
    best_x = None
    for attempt in range(config.retry_budget):
        attempt_seed = split_seed(seed, attempt)
        state = PartialColoring.initial(k)
        phase = 0
        try:
            while not state.is_complete:
                state = partial_coloring(
                    arr, state, split_seed(attempt_seed, phase), config
                )
                phase += 1
        except PhaseFailureError:
            continue
        x = _refine_flips(arr, state.values, config)
        val = discrepancy(arr, x)
        if val < best_val:
            best_val = val
            best_x = x
        if val <= bound:
            return x
    raise DiscrepancyBoundError(best_val, bound, attempts=config.retry_budget)


def halve_columns(
    A,
    seed=None,
    config: ColoringConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Indices of at most ceil(T/2) columns whose row sums track half the
    full row sums to within K_S*sqrt(T*log(2+n/T)) per row.

    Colors the columns and keeps the minority sign: the kept subset's row sum
    is (full sum + sigma*(Ax)_i)/2, so the coloring bound transfers directly.
    """
    arr = _validate_matrix(A)
    x = full_coloring(arr, seed, config)
    sigma = minority_sign(x)
    return np.flatnonzero(x == sigma)
