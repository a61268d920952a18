"""Brute-force reference evaluation of the quasi-independence statistic.

The three terms are accumulated by explicit double/triple/quadruple index
loops with no matrix products, so this path is an independent oracle for the
fast matrix implementation.  The loops are JIT-compiled; cost is O(n^4).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def quadratic_terms(K, L, pi, delta, ind):
    """(term1, term2, term3) of the statistic by direct index summation.

    ``ind[a, b]`` is 1.0 when entry_b <= entry_a < observed_b <= observed_a,
    without the 1/n factor.
    """
    n = K.shape[0]
    t1 = 0.0
    for i in range(n):
        for j in range(n):
            t1 += K[i, j] * L[i, j] * delta[i] * delta[j] * pi[i] * pi[j]
    t2 = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                t2 += K[i, j] * L[i, k] * delta[i] * delta[k] * pi[i] * ind[j, k]
    t3 = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    t3 += K[i, j] * L[l, k] * delta[k] * delta[l] * ind[i, l] * ind[j, k]
    return t1 / n**2, t2 / n**3, t3 / n**4
