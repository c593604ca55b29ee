"""Monte-Carlo total Sobol' indices of the composition function.

At a fixed input point the component responses are independent Gaussians
(surrogate posterior mean/std); total indices of h with respect to those
responses are estimated with Jansen's pick-freeze formula and used to route
an enrichment point to one limit state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .composition import Node, eval_composition


class DegenerateVarianceError(RuntimeError):
    """Total variance of h vanished; Sobol' routing is meaningless here."""


class RoutingError(RuntimeError):
    """No limit state could be selected (all indices zero)."""


@dataclass(frozen=True)
class ResponseGaussians:
    """Independent Gaussian component responses at one input point."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        stds = np.asarray(self.stds, dtype=float)
        if means.shape != stds.shape or means.ndim != 1:
            raise ValueError("means and stds must be equal-length vectors")
        if np.any(stds < 0.0):
            raise ValueError("stds must be non-negative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def m(self) -> int:
        return self.means.shape[0]


def total_sobol(expr: Node, z: ResponseGaussians, n: int, seed) -> np.ndarray:
    """Jansen total-index estimates S^T over the m component responses.

    Components with zero std return exactly 0 (a frozen coordinate cannot
    contribute). Negative estimates are clamped to 0.
    """
    if n < 256:
        raise ValueError("total_sobol needs n >= 256 base samples")
    active = z.stds > 0.0
    if not np.any(active):
        raise DegenerateVarianceError("all component responses are deterministic")
    rng = np.random.default_rng(seed)
    A = z.means + z.stds * rng.standard_normal((n, z.m))
    B = z.means + z.stds * rng.standard_normal((n, z.m))
    fA = eval_composition(expr, A)
    fB = eval_composition(expr, B)
    V = float(np.var(np.concatenate([fA, fB]), ddof=1))
    scale = max(1.0, float(np.max(np.abs(np.concatenate([fA, fB])))))
    if V < 1e-14 * scale * scale:
        raise DegenerateVarianceError("variance of h below numerical floor")
    S = np.zeros(z.m)
    for j in np.flatnonzero(active):
        AB = A.copy()
        AB[:, j] = B[:, j]
        fAB = eval_composition(expr, AB)
        S[j] = np.mean((fA - fAB) ** 2) / (2.0 * V)
    return np.clip(S, 0.0, None)


def select_limit_state(S: np.ndarray) -> int:
    """Index of the largest total index; ties broken by smallest index."""
    S = np.asarray(S, dtype=float)
    if S.size == 0 or not np.all(np.isfinite(S)):
        raise ValueError("Sobol' vector must be non-empty and finite")
    if np.all(S == 0.0):
        raise RoutingError("all total Sobol' indices are zero")
    return int(np.argmax(S))
