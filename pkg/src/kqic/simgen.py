"""Synthetic generators for truncated, censored event-time pairs.

Five recipes: a monotone copula model, a V-shaped copula model, a model with
periodic dependence of the time on the entry, an independent pair with
entry-dependent censoring, and a fully independent null.  Generation
proposes (entry, time, censor) triples, forms the observed pair, and keeps
it only when entry < observed time, repeating until the requested count is
reached; datasets therefore always satisfy the container invariants.

Exponential notation: Exp(theta) is read as rate theta by default (mean
1/theta), the hazard convention; set ``exp_convention="scale"`` on the model
to read theta as the mean instead.  Weibull(a, b) is shape a, scale b.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .data import TruncatedDataset
from .errors import ConfigError, FeasibilityError
from .rng import stream

MONOTONE = "monotone"
VSHAPE = "vshape"
PERIODIC = "periodic"
DEPENDENT_CENSORING = "depcens"
NULL_INDEPENDENT = "null"

KINDS = (MONOTONE, VSHAPE, PERIODIC, DEPENDENT_CENSORING, NULL_INDEPENDENT)
_COPULA_KINDS = (MONOTONE, VSHAPE)

_MIN_RATE, _MAX_RATE = 1e-6, 1e6
_BATCH = 2048
_MIN_ACCEPT_PROB = 1e-4
_FEASIBILITY_PROPOSALS = 1_000_000


@dataclass(frozen=True)
class GeneratorModel:
    """A synthetic-data recipe.

    ``dependence`` is the copula correlation for the monotone and V-shape
    kinds, the frequency coefficient for the periodic kind, the censoring
    frequency for the dependent-censoring kind, and is ignored for the null.
    ``censor_target`` is the desired censoring fraction among accepted
    samples; the matching exponential rate must be resolved into
    ``censor_rate`` first (see :func:`tune_censoring_rate`), except for the
    dependent-censoring kind whose censoring law is part of the recipe.
    """

    kind: str
    dependence: float = 0.0
    censor_target: float = 0.0
    censor_rate: float | None = None
    exp_convention: str = "rate"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown generator kind {self.kind!r}; choose from {KINDS}")
        if self.kind in _COPULA_KINDS and not abs(self.dependence) < 1:
            raise ConfigError("copula correlation must satisfy |rho| < 1")
        if self.kind in (PERIODIC, DEPENDENT_CENSORING) and self.dependence < 0:
            raise ConfigError("frequency coefficients must be nonnegative")
        if not 0.0 <= self.censor_target < 1.0:
            raise ConfigError("censor_target must lie in [0, 1)")
        if self.exp_convention not in ("rate", "scale"):
            raise ConfigError("exp_convention must be 'rate' or 'scale'")
        if self.censor_rate is not None and self.censor_rate < 0:
            raise ConfigError("censor_rate must be nonnegative")


def _exp_mean(theta: float, convention: str) -> float:
    """Mean of Exp(theta) under the chosen reading of the notation."""
    return 1.0 / theta if convention == "rate" else theta


def gaussian_copula_pair(rho: float, inv_cdf_u, inv_cdf_v, rng: np.random.Generator, size=None):
    """Draw (u, v) coupled through a bivariate Gaussian copula.

    Z2 = rho Z1 + sqrt(1 - rho^2) Z with independent standard normals, then
    each coordinate is pushed through the standard normal CDF and the given
    inverse CDF.  ``size=None`` gives scalars.
    """
    if not abs(rho) < 1:
        raise ConfigError("copula correlation must satisfy |rho| < 1")
    z1 = rng.standard_normal(size)
    z2 = rho * z1 + np.sqrt(1.0 - rho * rho) * rng.standard_normal(size)
    return inv_cdf_u(ndtr(z1)), inv_cdf_v(ndtr(z2))


def _draw_pairs(model: GeneratorModel, size: int, rng: np.random.Generator):
    """One batch of raw (entry, time) proposals, before censoring/truncation."""
    conv = model.exp_convention
    if model.kind == MONOTONE:
        mean_x = _exp_mean(5.0, conv)

        def inv_x(u):
            return -mean_x * np.log1p(-u)

        def inv_y(u):
            return 8.5 * (-np.log1p(-u)) ** (1.0 / 3.0)

        return gaussian_copula_pair(model.dependence, inv_x, inv_y, rng, size)
    if model.kind == VSHAPE:

        def inv_x(u):
            return 4.0 * (-np.log1p(-u)) ** 2.0

        def inv_v(u):
            return 0.5 * u

        x, v = gaussian_copula_pair(model.dependence, inv_x, inv_v, rng, size)
        signs = rng.integers(0, 2, size=size) * 2.0 - 1.0
        return x, 0.5 + signs * v
    if model.kind == PERIODIC:
        x = rng.exponential(_exp_mean(1.0, conv), size=size)
        theta = np.exp(np.cos(2.0 * np.pi * model.dependence * x))
        scale = 1.0 / theta if conv == "rate" else theta
        return x, rng.exponential(1.0, size=size) * scale
    # dependent censoring and the independent null share independent Exp(1) pairs
    x = rng.exponential(_exp_mean(1.0, conv), size=size)
    y = rng.exponential(_exp_mean(1.0, conv), size=size)
    return x, y


def _draw_censor(model: GeneratorModel, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One batch of censoring times aligned with the proposals in ``x``."""
    if model.kind == DEPENDENT_CENSORING:
        theta = np.exp(np.cos(2.0 * np.pi * model.dependence * x))
        scale = 1.0 / theta if model.exp_convention == "rate" else theta
        return rng.exponential(1.0, size=x.size) * scale
    if not model.censor_rate:
        return np.full(x.size, np.inf)
    return rng.exponential(1.0 / model.censor_rate, size=x.size)


def gen_dataset(model: GeneratorModel, n: int, seed: int) -> TruncatedDataset:
    """First ``n`` accepted samples of the recipe under ``seed``.

    Proposals are drawn in fixed-size batches and filtered by the truncation
    rule entry < min(time, censor); the accepted sequence is the same as
    one-at-a-time sampling, so the result is deterministic in (model, n,
    seed).  Raises :class:`FeasibilityError` when the acceptance probability
    estimated over a million proposals falls below 1e-4.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if model.censor_target > 0.0 and model.censor_rate is None and model.kind != DEPENDENT_CENSORING:
        raise ConfigError(
            "censor_target > 0 needs a resolved censor_rate; call tune_censoring_rate first"
        )
    rng = stream(seed)
    entry_parts, observed_parts, event_parts = [], [], []
    accepted = 0
    proposed = 0
    while accepted < n:
        x, y = _draw_pairs(model, _BATCH, rng)
        c = _draw_censor(model, x, rng)
        t = np.minimum(y, c)
        delta = y <= c
        keep = x < t
        proposed += _BATCH
        if np.any(keep):
            entry_parts.append(x[keep])
            observed_parts.append(t[keep])
            event_parts.append(delta[keep])
            accepted += int(np.count_nonzero(keep))
        if proposed >= _FEASIBILITY_PROPOSALS and accepted < _MIN_ACCEPT_PROB * proposed:
            raise FeasibilityError(
                f"acceptance probability ~{accepted / proposed:.2e} after {proposed} proposals; "
                "the truncation/censoring configuration is infeasible"
            )
    entry = np.concatenate(entry_parts)[:n]
    observed = np.concatenate(observed_parts)[:n]
    event = np.concatenate(event_parts)[:n]
    return TruncatedDataset(entry, observed, event)


def censoring_fraction(model: GeneratorModel, mc_size: int, seed: int) -> float:
    """Monte Carlo censoring fraction among accepted samples."""
    ds = gen_dataset(model, mc_size, seed)
    return 1.0 - float(np.count_nonzero(ds.event)) / ds.n


def tune_censoring_rate(
    model: GeneratorModel, target: float, seed: int, mc_size: int = 20_000
) -> float:
    """Exponential censoring rate whose accepted-sample censoring fraction hits ``target``.

    Geometric bisection over rate in [1e-6, 1e6], evaluated with common
    random numbers (the same seed at every candidate rate) so the estimated
    fraction is monotone in the rate; stops within +-0.01 of the target.
    Target zero returns the sentinel rate 0.0, meaning no censoring.
    """
    if not 0.0 <= target < 1.0:
        raise ConfigError("target censoring fraction must lie in [0, 1)")
    if target == 0.0:
        return 0.0
    if model.kind == DEPENDENT_CENSORING:
        raise ConfigError("the dependent-censoring recipe fixes its own censoring law")

    def frac(rate: float) -> float:
        # A rate so aggressive that truncation acceptance collapses censors
        # essentially everything; treat it as fraction 1 for bracketing.
        try:
            return censoring_fraction(replace(model, censor_rate=rate), mc_size, seed)
        except FeasibilityError:
            return 1.0

    lo = hi = 1.0
    f_mid = frac(1.0)
    if f_mid < target:
        while frac(hi) < target:
            hi *= 8.0
            if hi > _MAX_RATE:
                raise FeasibilityError(
                    f"censoring target {target} unreachable with rates up to {_MAX_RATE}"
                )
        lo = hi / 8.0
    elif f_mid > target:
        while frac(lo) > target:
            lo /= 8.0
            if lo < _MIN_RATE:
                raise FeasibilityError(
                    f"censoring target {target} unreachable with rates down to {_MIN_RATE}"
                )
        hi = lo * 8.0
    else:
        return 1.0
    for _ in range(80):
        mid = np.sqrt(lo * hi)
        f_mid = frac(mid)
        if abs(f_mid - target) <= 0.01:
            return float(mid)
        if f_mid < target:
            lo = mid
        else:
            hi = mid
    raise FeasibilityError(f"censoring-rate bisection did not converge for target {target}")
