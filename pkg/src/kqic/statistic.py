"""The kernel quasi-independence statistic and its building blocks.

The statistic is the squared RKHS norm of an empirical contrast between two
risk-set measures built from the triples (entry X, observed time T, event
flag).  With factorized kernels K (over entries) and L (over times) it
reduces to three trace terms over n x n matrices:

    psi2 = (1/n^2) trace(K P Lt P - 2 K P Lt B' + K B Lt B')

where P is the diagonal of empirical risk-set proportions, Lt is the time
Gram matrix masked by the event flags of both subjects, and B collects the
nested-window indicators 1{X_k <= X_i < T_k <= T_i} / n.  The event mask
appears in all three terms, matching the defining double sum in which every
summand carries the event flag of the subject contributing its time.

The statistic is zero under quasi-independence (factorization of the joint
law on the observable region) and positive under quasi-dependence when the
product kernel is rich enough.  For uncensored data (all events) the same
formula is the uncensored statistic; there is no separate code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TruncatedDataset
from .kernels import KernelSpec, gram_matrix

ORACLE_MAX_N = 200


@dataclass(frozen=True)
class StatisticMatrices:
    """Building blocks of the statistic for one dataset and kernel pair.

    ``B`` carries the 1/n factor; ``pi_diag[i]`` is the fraction of subjects
    with entry <= X_i and observed time >= T_i (each subject covers itself,
    so entries lie in [1/n, 1]).  Rows and columns of ``Ltilde`` belonging to
    censored subjects are identically zero.
    """

    K: np.ndarray
    Ltilde: np.ndarray
    B: np.ndarray
    pi_diag: np.ndarray


@dataclass(frozen=True)
class BootstrapMatrix:
    """Matrix M with sum(M) equal to the statistic; used by the wild bootstrap."""

    values: np.ndarray


def quad_form(M: np.ndarray, w: np.ndarray) -> float:
    """w' M w with a fixed reduction order.

    Evaluated as w . (M @ w); sign flips of ``w`` and the all-ones vector
    therefore reproduce exact identities (w'Mw == (-w)'M(-w) bitwise, and
    the all-ones form defines the statistic itself).
    """
    return float(np.dot(w, M @ w))


def pi_hat(dataset: TruncatedDataset, x: float, y: float) -> float:
    """Empirical risk-set proportion at (x, y): mean of 1{X_m <= x, T_m >= y}."""
    return float(np.mean((dataset.entry <= x) & (dataset.observed >= y)))


def _pi_diag(X: np.ndarray, T: np.ndarray) -> np.ndarray:
    return ((X[None, :] <= X[:, None]) & (T[None, :] >= T[:, None])).mean(axis=1)


def _indicator(X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """ind[i, k] = 1{X_k <= X_i < T_k <= T_i}, literal inequalities."""
    return (
        (X[None, :] <= X[:, None]) & (X[:, None] < T[None, :]) & (T[None, :] <= T[:, None])
    ).astype(np.float64)


def build_matrices(dataset: TruncatedDataset, kx: KernelSpec, ky: KernelSpec) -> StatisticMatrices:
    """Gram matrices, masked time matrix, window matrix B and risk diagonal."""
    X, T = dataset.entry, dataset.observed
    delta = dataset.event.astype(np.float64)
    K = gram_matrix(kx, X)
    Ltilde = gram_matrix(ky, T) * np.outer(delta, delta)
    B = _indicator(X, T) / dataset.n
    return StatisticMatrices(K=K, Ltilde=Ltilde, B=B, pi_diag=_pi_diag(X, T))


def build_M(dataset: TruncatedDataset, kx: KernelSpec, ky: KernelSpec) -> BootstrapMatrix:
    """Hadamard form of the statistic: M = (1/n^2) K o (P Lt P - 2 P Lt B' + B Lt B')."""
    mats = build_matrices(dataset, kx, ky)
    K, Lt, B, pi = mats.K, mats.Ltilde, mats.B, mats.pi_diag
    inner = pi[:, None] * Lt * pi[None, :]
    inner -= 2.0 * (pi[:, None] * Lt) @ B.T
    inner += B @ Lt @ B.T
    M = K * inner / dataset.n**2
    return BootstrapMatrix(values=M)


def kqic_statistic(dataset: TruncatedDataset, kx: KernelSpec, ky: KernelSpec) -> float:
    """The squared-norm statistic; nonnegative up to float rounding (>= -1e-12)."""
    if dataset.n < 2:
        raise ValueError("the statistic needs at least two samples")
    M = build_M(dataset, kx, ky).values
    return quad_form(M, np.ones(dataset.n))


def kqic_statistic_oracle(dataset: TruncatedDataset, kx: KernelSpec, ky: KernelSpec) -> float:
    """Same quantity by explicit index summation; independent O(n^4) oracle.

    Limited to n <= 200 by cost.  No matrix products are used: the three
    expanded terms are accumulated element by element.
    """
    if dataset.n > ORACLE_MAX_N:
        raise ValueError(f"oracle limited to n <= {ORACLE_MAX_N} (O(n^4) cost), got n={dataset.n}")
    from ._oracle import quadratic_terms

    X, T = dataset.entry, dataset.observed
    delta = dataset.event.astype(np.float64)
    K = gram_matrix(kx, X)
    L = gram_matrix(ky, T)
    pi = _pi_diag(X, T)
    ind = _indicator(X, T)
    t1, t2, t3 = quadratic_terms(K, L, pi, delta, ind)
    return float(t1 - 2.0 * t2 + t3)


def unit_weight_contrast(dataset: TruncatedDataset) -> float:
    """Signed empirical contrast at the unit weight function.

    This is the linear functional whose square is the constant-kernel
    statistic: mean_i of delta_i * pi_i minus (1/n^2) sum over (i, k) of
    delta_k * 1{X_k <= X_i < T_k <= T_i}.
    """
    X, T = dataset.entry, dataset.observed
    delta = dataset.event.astype(np.float64)
    pi = _pi_diag(X, T)
    ind = _indicator(X, T)
    return float(np.mean(delta * pi) - np.sum(ind * delta[None, :]) / dataset.n**2)


def kendall_ka(dataset: TruncatedDataset) -> int:
    """Concordance count over comparable pairs for uncensored data.

    A pair is comparable when max(X_i, X_k) <= min(Y_i, Y_k); each comparable
    pair contributes the sign of (X_i - X_k)(Y_i - Y_k).  Censored samples
    are rejected (use the censoring-aware test in ``baselines`` instead).
    """
    if not bool(np.all(dataset.event)):
        raise ValueError(
            "kendall_ka needs an uncensored dataset (all events); "
            "use baselines.mb_test for censored data"
        )
    X, Y = dataset.entry, dataset.observed
    comparable = np.maximum(X[:, None], X[None, :]) <= np.minimum(Y[:, None], Y[None, :])
    signs = np.sign((X[:, None] - X[None, :]) * (Y[:, None] - Y[None, :]))
    total = np.sum(np.triu(comparable * signs, k=1))
    return int(round(total))
