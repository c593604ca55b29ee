"""Subset simulation in standard-normal space.

Estimates P[g(U) <= 0] as a product of conditional level probabilities.
Intermediate thresholds are nearest-rank p0-quantiles; conditional levels
are sampled by component-wise conditional MCMC (u' = rho*u + sqrt(1-rho^2)*xi
with accept/reject on the level indicator), all chains advanced in lockstep.
Every point whose limit state was evaluated is recorded, together with the
value actually used, and exposed as the enrichment candidate pool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .inputs import DomainError


@dataclass(frozen=True)
class SusConfig:
    samples_per_level: int = 10_000
    p0: float = 0.1
    max_levels: int = 10
    rho: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            raise ValueError("p0 must lie in (0, 1)")
        if self.samples_per_level * self.p0 < 10:
            raise ValueError("samples_per_level * p0 must be at least 10")
        if self.max_levels < 1:
            raise ValueError("max_levels must be >= 1")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("chain correlation rho must lie in (0, 1)")


@dataclass
class SusLevelStats:
    threshold: float
    p_level: float
    accept_rate: float
    gamma: float  # chain-correlation inflation of the level estimator


@dataclass
class SusResult:
    pf: float
    cov: float
    levels: list[SusLevelStats]
    samples: np.ndarray  # all evaluated standard-space points (n, M)
    lsf_values: np.ndarray  # matching limit-state values (n,)
    converged: bool
    n_eval: int

    @property
    def beta(self) -> float:
        return reliability_index(self.pf)


def reliability_index(pf: float) -> float:
    """beta = -Phi^-1(pf), monotone decreasing in pf."""
    if not 0.0 < pf < 1.0:
        raise DomainError("failure probability must lie strictly inside (0, 1)")
    return float(-ndtri(pf))


def _check_finite(g: np.ndarray, u: np.ndarray):
    bad = ~np.isfinite(g)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise RuntimeError(f"limit state returned non-finite value at u = {u[i]}")


def _level_gamma(indicator: np.ndarray) -> float:
    """Au & Beck correlation factor from the (n_chains, n_steps) indicator."""
    n_chains, n_steps = indicator.shape
    if n_steps < 2:
        return 0.0
    p = indicator.mean()
    var = p * (1.0 - p)
    if var <= 0.0:
        return 0.0
    gamma = 0.0
    centered = indicator - p
    for k in range(1, n_steps):
        rk = np.mean(centered[:, :-k] * centered[:, k:]) / var
        gamma += 2.0 * (1.0 - k / n_steps) * rk
    return max(gamma, 0.0)


def subset_simulation(lsf, dim: int, cfg: SusConfig) -> SusResult:
    """Estimate pf for a batched limit state lsf(U: (n, dim)) -> (n,).

    Deterministic given cfg.seed. When no failure level is reached within
    max_levels, the returned pf is the product of level probabilities times
    the (possibly zero-guarded) final fraction and ``converged`` is False.
    """
    rng = np.random.default_rng(cfg.seed)
    N = cfg.samples_per_level
    n_seed = int(round(N * cfg.p0))
    n_steps = N // n_seed  # states per chain, seed included

    pool_u: list[np.ndarray] = []
    pool_g: list[np.ndarray] = []
    levels: list[SusLevelStats] = []

    U = rng.standard_normal((N, dim))
    G = np.asarray(lsf(U), dtype=float)
    _check_finite(G, U)
    pool_u.append(U)
    pool_g.append(G)
    n_eval = N

    pf = 1.0
    cov2 = 0.0
    converged = False
    for level in range(cfg.max_levels):
        order = np.argsort(G, kind="stable")
        threshold = float(G[order[n_seed - 1]])
        if threshold <= 0.0 or level == cfg.max_levels - 1:
            # final level: count actual failures
            p_fail = float(np.mean(G <= 0.0))
            gamma = _level_gamma(_chain_indicator(G, 0.0, n_seed, n_steps)) \
                if level > 0 else 0.0
            if p_fail > 0.0:
                cov2 += (1.0 - p_fail) / (p_fail * N) * (1.0 + gamma)
                pf *= p_fail
                converged = threshold <= 0.0
            else:
                pf *= 1.0 / N  # upper bound when no failure sample was found
                cov2 += 1.0
            levels.append(SusLevelStats(min(threshold, 0.0), p_fail, 1.0, gamma))
            break
        p_level = float(np.mean(G <= threshold))
        gamma = _level_gamma(_chain_indicator(G, threshold, n_seed, n_steps)) \
            if level > 0 else 0.0
        cov2 += (1.0 - p_level) / (p_level * N) * (1.0 + gamma)
        pf *= p_level

        seeds_u = U[order[:n_seed]]
        seeds_g = G[order[:n_seed]]
        chain_u = [seeds_u]
        chain_g = [seeds_g]
        accepted = 0
        sq = math.sqrt(1.0 - cfg.rho * cfg.rho)
        cur_u, cur_g = seeds_u.copy(), seeds_g.copy()
        for _ in range(n_steps - 1):
            cand = cfg.rho * cur_u + sq * rng.standard_normal(cur_u.shape)
            cand_g = np.asarray(lsf(cand), dtype=float)
            _check_finite(cand_g, cand)
            pool_u.append(cand)
            pool_g.append(cand_g)
            n_eval += cand.shape[0]
            acc = cand_g <= threshold
            accepted += int(acc.sum())
            cur_u = np.where(acc[:, None], cand, cur_u)
            cur_g = np.where(acc, cand_g, cur_g)
            chain_u.append(cur_u.copy())
            chain_g.append(cur_g.copy())
        U = np.concatenate(chain_u, axis=0)
        G = np.concatenate(chain_g, axis=0)
        accept_rate = accepted / max((n_steps - 1) * n_seed, 1)
        levels.append(SusLevelStats(threshold, p_level, accept_rate, gamma))

    return SusResult(
        pf=pf,
        cov=math.sqrt(cov2),
        levels=levels,
        samples=np.concatenate(pool_u, axis=0),
        lsf_values=np.concatenate(pool_g, axis=0),
        converged=converged,
        n_eval=n_eval,
    )


def _chain_indicator(G: np.ndarray, threshold: float, n_seed: int, n_steps: int):
    """Reshape the level population into (chains, steps) indicator samples."""
    ind = (G <= threshold).astype(float)
    return ind.reshape(n_steps, n_seed).T
