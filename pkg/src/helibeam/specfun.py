"""Associated Laguerre polynomials and the Landau normalization coefficient.

The polynomial evaluator uses the three-term upward recurrence in n, which is
the stable direction on the Gaussian-weighted support used throughout this
package.  L_{-1}^l is identically zero by convention, so expressions of the
form L_{n-1}^{l+1} need no special casing at n = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuantumNumbers:
    """Radial (n) and angular (l) quantum numbers, both nonnegative."""

    n: int
    l: int

    def __post_init__(self) -> None:
        if self.n < 0 or self.l < 0:
            raise ValueError(f"quantum numbers must be nonnegative, got n={self.n}, l={self.l}")


def laguerre(n: int, l: int, x):
    """Associated Laguerre polynomial L_n^l(x).

    Upward recurrence (k+1) L_{k+1} = (2k+l+1-x) L_k - (k+l) L_{k-1},
    seeded with L_{-1} = 0, L_0 = 1.  n = -1 is allowed and returns zero.
    Accepts scalar or array x.
    """
    if l < 0:
        raise ValueError(f"l must be nonnegative, got {l}")
    if n < -1:
        raise ValueError(f"n must be >= -1, got {n}")
    x = np.asarray(x, dtype=float)
    if n == -1:
        return np.zeros_like(x)
    prev = np.zeros_like(x)       # L_{-1}
    cur = np.ones_like(x)         # L_0
    for k in range(n):
        prev, cur = cur, ((2 * k + l + 1 - x) * cur - (k + l) * prev) / (k + 1)
    return cur


def laguerre_derivative(n: int, l: int, x):
    """d/dx L_n^l(x) = -L_{n-1}^{l+1}(x)."""
    return -laguerre(n - 1, l + 1, x)


def landau_norm(n: int, l: int, B: float) -> float:
    """Normalization sqrt(B^{l+1} n! / (2 pi 2^l (n+l)!)) of the transverse
    Landau profile, computed in the log domain so large n+l do not overflow."""
    if n < 0 or l < 0:
        raise ValueError(f"quantum numbers must be nonnegative, got n={n}, l={l}")
    if B <= 0.0 or not math.isfinite(B):
        raise ValueError(f"B must be positive, got {B}")
    log_sq = (
        (l + 1) * math.log(B)
        + math.lgamma(n + 1)
        - math.log(2.0 * math.pi)
        - l * math.log(2.0)
        - math.lgamma(n + l + 1)
    )
    return math.exp(0.5 * log_sq)
