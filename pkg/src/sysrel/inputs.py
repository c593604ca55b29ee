"""Probabilistic input model: marginal distributions, isoprobabilistic
transforms and space-filling designs.

All marginals are independent. Location-scale families (gaussian, lognormal,
gumbel) are parameterized by (mean, CoV) or (mean, std); uniform by its
bounds. Natural parameters are converted once at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

EULER_GAMMA = 0.5772156649015329

KINDS = ("gaussian", "lognormal", "gumbel", "uniform")


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class Marginal:
    """One-dimensional marginal distribution.

    Parameters
    ----------
    kind : str
        One of ``gaussian``, ``lognormal``, ``gumbel``, ``uniform``.
    param1 : float
        Mean, or lower bound for ``uniform``.
    param2 : float
        Coefficient of variation (or std when ``param2_is_std``), or upper
        bound for ``uniform``.
    param2_is_std : bool
        Interpret ``param2`` as a standard deviation instead of a CoV.
        Required for zero-mean gaussians where the CoV is undefined.
    """

    kind: str
    param1: float
    param2: float
    param2_is_std: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown marginal kind {self.kind!r}")
        if self.kind == "uniform":
            if not self.param1 < self.param2:
                raise ValueError("uniform marginal requires lower < upper")
            return
        if self.param2 <= 0.0:
            raise ValueError(f"{self.kind} marginal requires param2 > 0")
        if self.kind in ("lognormal", "gumbel") and self.param1 <= 0.0:
            if not self.param2_is_std:
                raise ValueError(
                    f"CoV-parameterized {self.kind} requires mean > 0"
                )
        if self.kind == "gaussian" and self.param1 == 0.0 and not self.param2_is_std:
            raise ValueError("zero-mean gaussian must be std-parameterized")

    # -- moments and natural parameters ------------------------------------

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.param1 + self.param2)
        return self.param1

    @property
    def std(self) -> float:
        if self.kind == "uniform":
            return (self.param2 - self.param1) / math.sqrt(12.0)
        if self.param2_is_std:
            return self.param2
        return abs(self.param1) * self.param2

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return (self.param1, self.param2)
        if self.kind == "lognormal":
            return (0.0, math.inf)
        return (-math.inf, math.inf)

    def _lognormal_params(self) -> tuple[float, float]:
        # moment matching: sigma_ln^2 = ln(1 + cov^2), mu_ln = ln(mean) - sigma_ln^2/2
        m, s = self.mean, self.std
        sig2 = math.log1p((s / m) ** 2)
        mu = math.log(m) - 0.5 * sig2
        return mu, math.sqrt(sig2)

    def _gumbel_params(self) -> tuple[float, float]:
        # Gumbel (max): mean = loc + gamma*scale, std = scale*pi/sqrt(6)
        scale = self.std * math.sqrt(6.0) / math.pi
        loc = self.mean - EULER_GAMMA * scale
        return loc, scale

    # -- distribution functions --------------------------------------------

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite argument to cdf")
        if self.kind == "gaussian":
            return ndtr((x - self.mean) / self.std)
        if self.kind == "lognormal":
            mu, sig = self._lognormal_params()
            out = np.zeros_like(x)
            pos = x > 0
            out[pos] = ndtr((np.log(x[pos]) - mu) / sig)
            return out if out.ndim else float(out)
        if self.kind == "gumbel":
            loc, scale = self._gumbel_params()
            return np.exp(-np.exp(-(x - loc) / scale))
        lo, hi = self.param1, self.param2
        return np.clip((x - lo) / (hi - lo), 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite argument to pdf")
        if self.kind == "gaussian":
            z = (x - self.mean) / self.std
            return np.exp(-0.5 * z * z) / (self.std * math.sqrt(2 * math.pi))
        if self.kind == "lognormal":
            mu, sig = self._lognormal_params()
            out = np.zeros_like(x)
            pos = x > 0
            z = (np.log(x[pos]) - mu) / sig
            out[pos] = np.exp(-0.5 * z * z) / (x[pos] * sig * math.sqrt(2 * math.pi))
            return out if out.ndim else float(out)
        if self.kind == "gumbel":
            loc, scale = self._gumbel_params()
            z = (x - loc) / scale
            return np.exp(-z - np.exp(-z)) / scale
        lo, hi = self.param1, self.param2
        inside = (x >= lo) & (x <= hi)
        return np.where(inside, 1.0 / (hi - lo), 0.0)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p <= 0.0) or np.any(p >= 1.0):
            raise DomainError("quantile level must lie strictly inside (0, 1)")
        if self.kind == "gaussian":
            return self.mean + self.std * ndtri(p)
        if self.kind == "lognormal":
            mu, sig = self._lognormal_params()
            return np.exp(mu + sig * ndtri(p))
        if self.kind == "gumbel":
            loc, scale = self._gumbel_params()
            return loc - scale * np.log(-np.log(p))
        lo, hi = self.param1, self.param2
        return lo + (hi - lo) * p

    # -- standard-normal mapping -------------------------------------------

    def to_u(self, x):
        """Map physical coordinates to standard-normal space, u = Phi^-1(F(x))."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        if self.kind == "lognormal":
            if np.any(x <= 0.0):
                raise DomainError("value outside lognormal support")
        elif np.any(x < lo) or np.any(x > hi):
            raise DomainError(f"value outside {self.kind} support")
        if self.kind == "gaussian":
            return (x - self.mean) / self.std
        if self.kind == "lognormal":
            mu, sig = self._lognormal_params()
            return (np.log(x) - mu) / sig
        # CDF route; fine at the precision needed for gumbel/uniform
        return ndtri(self.cdf(x))

    def from_u(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "gaussian":
            return self.mean + self.std * u
        if self.kind == "lognormal":
            mu, sig = self._lognormal_params()
            return np.exp(mu + sig * u)
        if self.kind == "gumbel":
            loc, scale = self._gumbel_params()
            return loc - scale * np.log(-np.log(ndtr(u)))
        lo, hi = self.param1, self.param2
        return lo + (hi - lo) * ndtr(u)


@dataclass(frozen=True)
class InputModel:
    """Independent joint input with per-component variable selections.

    ``component_maps[j]`` lists the global dimensions feeding limit state j.
    """

    marginals: tuple[Marginal, ...]
    component_maps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        object.__setattr__(
            self, "component_maps", tuple(tuple(m) for m in self.component_maps)
        )
        M = len(self.marginals)
        for j, cmap in enumerate(self.component_maps):
            if len(cmap) == 0:
                raise ValueError(f"component map {j} is empty")
            if len(set(cmap)) != len(cmap):
                raise ValueError(f"component map {j} has duplicate indices")
            if any(i < 0 or i >= M for i in cmap):
                raise ValueError(f"component map {j} has an index outside [0, {M})")

    @property
    def dim(self) -> int:
        return len(self.marginals)

    @property
    def n_components(self) -> int:
        return len(self.component_maps)

    def to_standard(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError("dimension mismatch")
        u = np.empty_like(x)
        for i, m in enumerate(self.marginals):
            u[..., i] = m.to_u(x[..., i])
        return u

    def from_standard(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.dim:
            raise ValueError("dimension mismatch")
        x = np.empty_like(u)
        for i, m in enumerate(self.marginals):
            x[..., i] = m.from_u(u[..., i])
        return x

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n independent physical-space points."""
        return self.from_standard(rng.standard_normal((n, self.dim)))


def initial_design_bounds(
    model: InputModel,
    mode: str = "auto",
    p_lo: float = 1e-5,
    p_hi: float = 1.0 - 1e-5,
) -> np.ndarray:
    """Per-dimension hypercube bounds for the initial design, shape (M, 2).

    ``five_sigma`` uses mean +- 5 std, clipped to the marginal support;
    ``quantile`` uses the (p_lo, p_hi) quantiles. ``auto`` picks five_sigma
    for M <= 15 and quantile bounds otherwise.
    """
    if mode == "auto":
        mode = "five_sigma" if model.dim <= 15 else "quantile"
    if mode == "quantile" and not (0.0 < p_lo < p_hi < 1.0):
        raise DomainError("quantile bounds require 0 < p_lo < p_hi < 1")
    bounds = np.empty((model.dim, 2))
    for i, m in enumerate(model.marginals):
        if mode == "five_sigma":
            lo = m.mean - 5.0 * m.std
            hi = m.mean + 5.0 * m.std
            s_lo, s_hi = m.support
            if np.isfinite(s_lo):
                med = float(m.quantile(0.5))
                lo = max(lo, s_lo + 1e-6 * (med - s_lo))
            if np.isfinite(s_hi):
                hi = min(hi, s_hi)
        elif mode == "quantile":
            lo = float(m.quantile(p_lo))
            hi = float(m.quantile(p_hi))
        else:
            raise ValueError(f"unknown bounds mode {mode!r}")
        bounds[i] = (lo, hi)
    return bounds


def lhs_sample(bounds: np.ndarray, n: int, seed) -> np.ndarray:
    """Latin hypercube sample of n points inside the given hypercube.

    One point falls in each of the n equal-width strata of every dimension.
    Deterministic given the seed.
    """
    if n < 1:
        raise ValueError("lhs_sample requires n >= 1")
    bounds = np.asarray(bounds, dtype=float)
    rng = np.random.default_rng(seed)
    dim = bounds.shape[0]
    pts = np.empty((n, dim))
    for i in range(dim):
        strata = (rng.permutation(n) + rng.uniform(size=n)) / n
        pts[:, i] = bounds[i, 0] + (bounds[i, 1] - bounds[i, 0]) * strata
    return pts
