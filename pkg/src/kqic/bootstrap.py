"""Wild-bootstrap calibration of the quasi-independence statistic.

Each replicate reweights the statistic's matrix form with random signs,
evaluating w' M w where M is the Hadamard-form matrix whose total sum is the
observed statistic.  Replicate b draws its signs from the sub-stream
(seed, b), so replicates can be evaluated in any order, or in parallel, and
still match the serial sequence exactly.

The p-value carries the standard +1 finite-sample correction, which keeps it
valid (and positive) at any bootstrap size; the paper-style decision itself
compares the statistic against the empirical (1 - alpha)-quantile of the
replicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import TruncatedDataset
from .kernels import KernelSpec
from .rng import stream
from .statistic import BootstrapMatrix, build_M, quad_form


@dataclass(frozen=True)
class TestOutcome:
    """Complete result of one calibrated test run."""

    statistic: float
    replicates: np.ndarray
    p_value: float
    threshold: float
    reject: bool
    alpha: float
    draws: int
    seed: int
    kernels: tuple[KernelSpec, KernelSpec]

    def __post_init__(self):
        reps = np.ascontiguousarray(self.replicates, dtype=np.float64)
        reps.setflags(write=False)
        object.__setattr__(self, "replicates", reps)


def rademacher_weights(seed: int, stream_id: int, n: int) -> np.ndarray:
    """n independent random signs (+1/-1) from the sub-stream (seed, stream_id)."""
    rng = stream(seed, stream_id)
    return rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0


def bootstrap_distribution(
    M: BootstrapMatrix | np.ndarray,
    draws: int,
    seed: int,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """Replicate values w_b' M w_b for b = 0..draws-1.

    ``weights`` (a draws x n array) overrides the seeded Rademacher draws;
    it exists so tests can force specific sign vectors through the exact
    replicate path.  Each replicate costs O(n^2).
    """
    values = M.values if isinstance(M, BootstrapMatrix) else np.asarray(M, dtype=np.float64)
    if draws < 1:
        raise ValueError("draws must be >= 1")
    n = values.shape[0]
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (draws, n):
            raise ValueError(f"weights must have shape ({draws}, {n})")
    out = np.empty(draws)
    for b in range(draws):
        w = weights[b] if weights is not None else rademacher_weights(seed, b, n)
        out[b] = quad_form(values, w)
    return out


def empirical_threshold(replicates: np.ndarray, alpha: float) -> float:
    """Ascending order statistic at rank ceil((1 - alpha) * B), 1-based."""
    b = replicates.size
    rank = math.ceil((1.0 - alpha) * b)
    rank = min(max(rank, 1), b)
    return float(np.sort(replicates)[rank - 1])


def run_test(
    dataset: TruncatedDataset,
    kx: KernelSpec,
    ky: KernelSpec,
    draws: int = 500,
    alpha: float = 0.05,
    seed: int = 0,
) -> TestOutcome:
    """Statistic, wild-bootstrap replicates, threshold, p-value and decision.

    Deterministic: identical inputs give a bitwise-identical outcome.
    """
    if dataset.n < 2:
        raise ValueError("the test needs at least two samples")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    M = build_M(dataset, kx, ky)
    statistic = quad_form(M.values, np.ones(dataset.n))
    replicates = bootstrap_distribution(M, draws, seed)
    threshold = empirical_threshold(replicates, alpha)
    p_value = (1.0 + int(np.count_nonzero(replicates >= statistic))) / (draws + 1.0)
    return TestOutcome(
        statistic=statistic,
        replicates=replicates,
        p_value=p_value,
        threshold=threshold,
        reject=bool(statistic > threshold),
        alpha=float(alpha),
        draws=int(draws),
        seed=int(seed),
        kernels=(kx, ky),
    )
