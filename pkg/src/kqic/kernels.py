"""Scalar positive-definite kernels on time values.

Three families are supported: the Gaussian kernel exp(-(a-b)^2 / (2 sigma^2)),
the inverse multiquadric (IMQ) kernel (c^2 + (a-b)^2)^(-1/2), and the constant
kernel that is identically one.  All are bounded and symmetric, so Gram
matrices have finite entries and are positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateScaleError

GAUSSIAN = "gaussian"
IMQ = "imq"
CONSTANT = "constant"

_FAMILIES = (GAUSSIAN, IMQ, CONSTANT)
_IMQ_EXPONENT = -0.5


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family with its scale parameter.

    ``scale`` is the Gaussian bandwidth sigma or the IMQ offset c and must be
    positive; it is ignored for the constant kernel.  The IMQ exponent is
    fixed at -1/2 and not user-configurable, which keeps the kernel bounded
    by max(1, 1/c).
    """

    family: str
    scale: float | None = None
    imq_exponent: float = _IMQ_EXPONENT

    def __post_init__(self):
        family = str(self.family).lower()
        if family not in _FAMILIES:
            raise ConfigError(f"unknown kernel family {self.family!r}; choose from {_FAMILIES}")
        object.__setattr__(self, "family", family)
        if family in (GAUSSIAN, IMQ):
            if self.scale is None or not np.isfinite(self.scale) or self.scale <= 0:
                raise ConfigError(f"{family} kernel needs a positive finite scale, got {self.scale!r}")
            object.__setattr__(self, "scale", float(self.scale))
        if self.imq_exponent != _IMQ_EXPONENT:
            raise ConfigError("the IMQ exponent is fixed at -1/2")

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls(GAUSSIAN, sigma)

    @classmethod
    def imq(cls, c: float) -> "KernelSpec":
        return cls(IMQ, c)

    @classmethod
    def constant(cls) -> "KernelSpec":
        return cls(CONSTANT)


def eval_kernel(spec: KernelSpec, a, b):
    """Kernel value k(a, b); symmetric in its arguments.

    Accepts scalars or broadcastable arrays.
    """
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if spec.family == GAUSSIAN:
        out = np.exp(-(diff * diff) / (2.0 * spec.scale * spec.scale))
    elif spec.family == IMQ:
        out = (spec.scale * spec.scale + diff * diff) ** _IMQ_EXPONENT
    else:
        out = np.ones_like(diff)
    if out.ndim == 0:
        return float(out)
    return out


def gram_matrix(spec: KernelSpec, values) -> np.ndarray:
    """Symmetric n x n matrix of kernel evaluations over ``values``."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("values must be a non-empty 1-d array")
    return eval_kernel(spec, v[:, None], v[None, :])


def median_heuristic(values) -> float:
    """Median of the pairwise absolute differences over i < j.

    For an even number of pairs the lower median (sorted element at index
    floor((m - 1) / 2)) is used, which keeps the choice deterministic.
    Raises :class:`DegenerateScaleError` when the median distance is zero
    (in particular when all values coincide).
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("median heuristic needs at least two values")
    iu = np.triu_indices(v.size, k=1)
    dists = np.abs(v[iu[0]] - v[iu[1]])
    dists.sort()
    med = float(dists[(dists.size - 1) // 2])
    if med <= 0.0:
        raise DegenerateScaleError(
            "median pairwise distance is zero; the values are (mostly) identical"
        )
    return med
