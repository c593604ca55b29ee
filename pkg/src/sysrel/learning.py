"""Active-learning driver: initialize designs, loop {fit, estimate, check,
learn, filter, cluster, select, route, enrich}, then final estimate.

Surrogates are trained in standard-normal coordinates (the space subset
simulation samples); physical points are recovered through the input model
only when the true limit states are evaluated. The subset-simulation seed is
held fixed across iterations (common random numbers) so the convergence
indicator reflects surrogate change only; the final estimate uses a fresh
seed and the fine configuration.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import clustering
from .composition import Node, eval_composition, parse_composition, pretty, system_mean_lsf
from .inputs import InputModel, initial_design_bounds, lhs_sample
from .sensitivity import (
    DegenerateVarianceError,
    ResponseGaussians,
    select_limit_state,
    total_sobol,
)
from .subset import SusConfig, SusResult, reliability_index, subset_simulation
from .surrogate import ExperimentalDesign, FitOptions, fit_kriging, fit_pck


@dataclass(frozen=True)
class Seeds:
    global_: int
    sus: int
    usys: int
    sobol: int

    @staticmethod
    def derive(seed: int) -> "Seeds":
        """Split one user seed into the four named streams."""
        state = np.random.SeedSequence(seed).generate_state(4)
        return Seeds(*(int(s) for s in state))


@dataclass
class LearnConfig:
    surrogate: str = "pck"  # "pck" | "kriging"
    pce_degree: int = 3
    kriging_trend: str = "linear"
    kernel: str = "matern52"
    alpha: float = 0.01
    n_usys: int = 256
    eps_bar: float = 5e-3
    streak_required: int = 3
    n_max: int | None = None  # default: input dimension M
    max_iterations: int = 50
    initial_sizes: tuple[int, ...] | None = None  # default: 2*M_j + 1
    duplicate_tol: float = 1e-8
    bounds_mode: str = "auto"
    n_sobol: int = 4096

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.n_usys < 16:
            raise ValueError("n_usys must be >= 16")
        if self.eps_bar <= 0.0 or self.streak_required < 1:
            raise ValueError("invalid convergence parameters")
        if self.surrogate not in ("pck", "kriging"):
            raise ValueError("surrogate must be 'pck' or 'kriging'")


@dataclass
class ConvergenceTracker:
    betas: list[float] = field(default_factory=list)
    eps: list[float] = field(default_factory=list)

    def update(self, beta: float) -> float | None:
        """Record a new reliability index; return the new epsilon, if any."""
        e = None
        if self.betas:
            prev = self.betas[-1]
            if prev != 0.0:
                e = abs(beta - prev) / abs(prev)
            else:
                e = abs(beta - prev)
            self.eps.append(e)
        self.betas.append(beta)
        return e


def check_convergence(tracker: ConvergenceTracker, eps_bar: float, streak_required: int) -> bool:
    """True iff the last streak_required epsilons are all below eps_bar."""
    if len(tracker.eps) < streak_required:
        return False
    return all(e < eps_bar for e in tracker.eps[-streak_required:])


# ---------------------------------------------------------------------------
# learning function


def usys_pool(means: np.ndarray, stds: np.ndarray, expr: Node, n: int, seed,
              chunk: int = 4096) -> np.ndarray:
    """System deviation number |mu_sys|/sigma_sys for a pool of points.

    means/stds have shape (P, m). For each point, n vectors are drawn from
    the independent component Gaussians, pushed through h, and the sample
    mean and standard deviation form the ratio. Deterministic in pool order
    for a given seed. Points whose response is (numerically) deterministic
    get +inf: their sign is certain and they are never selected.
    """
    means = np.atleast_2d(means)
    stds = np.atleast_2d(stds)
    P, m = means.shape
    rng = np.random.default_rng(seed)
    out = np.empty(P)
    for start in range(0, P, chunk):
        sl = slice(start, min(start + chunk, P))
        mu_c = means[sl][:, None, :]
        sd_c = stds[sl][:, None, :]
        z = mu_c + sd_c * rng.standard_normal((mu_c.shape[0], n, m))
        hv = eval_composition(expr, z)
        if not np.all(np.isfinite(hv)):
            bad = np.argwhere(~np.isfinite(hv))[0]
            raise RuntimeError(
                f"composition returned non-finite value for pool point {start + bad[0]}"
            )
        mu = hv.mean(axis=1)
        sd = hv.std(axis=1, ddof=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.abs(mu) / sd
        u[sd < 1e-12 * np.maximum(np.abs(mu), 1e-300)] = np.inf
        out[sl] = u
    return out


def usys(models, expr: Node, maps, x: np.ndarray, n: int, seed) -> float:
    """Single-point system deviation number from fitted surrogates."""
    x = np.asarray(x, dtype=float)
    m = len(models)
    means = np.empty((1, m))
    stds = np.empty((1, m))
    for j, (model, cmap) in enumerate(zip(models, maps)):
        mu, var = model.predict(x[list(cmap)])
        means[0, j] = mu
        stds[0, j] = math.sqrt(var)
    return float(usys_pool(means, stds, expr, n, seed)[0])


def filter_candidates(usys_values: np.ndarray, alpha: float) -> np.ndarray:
    """Indices of points at or below the nearest-rank alpha-quantile of U_sys.

    +inf sentinels (deterministic responses) are never retained; when fewer
    than k finite values exist, only those are returned.
    """
    vals = np.asarray(usys_values, dtype=float)
    if vals.size == 0:
        raise ValueError("candidate pool is empty")
    k = max(1, math.ceil(alpha * vals.size))
    uq = np.partition(vals, k - 1)[k - 1]
    if np.isinf(uq):
        return np.flatnonzero(np.isfinite(vals))
    return np.flatnonzero(vals <= uq)


def select_enrichment(usys_values: np.ndarray, labels: clustering.ClusterLabels,
                      n_max: int) -> list[int]:
    """Per-cluster argmin-U_sys representatives, then noise singletons,
    truncated to the n_max with smallest U_sys."""
    vals = np.asarray(usys_values, dtype=float)
    reps = []
    for cid in range(labels.n_clusters):
        idx = labels.cluster_indices(cid)
        reps.append(int(idx[np.argmin(vals[idx])]))
    reps.sort(key=lambda i: (vals[i], i))
    noise = sorted((int(i) for i in np.flatnonzero(labels.labels == clustering.NOISE)),
                   key=lambda i: (vals[i], i))
    return (reps + noise)[:n_max]


# ---------------------------------------------------------------------------
# reporting


@dataclass
class EnrichmentRecord:
    iteration: int
    point_u: list[float]
    point_x: list[float]
    usys: float
    cluster: int
    sobol: list[float] | None
    component: int  # 0-based
    routed_by_fallback: bool = False
    skipped_duplicate: bool = False


@dataclass
class IterationRecord:
    iteration: int
    pf: float
    beta: float
    eps: float | None
    pool_size: int
    n_clusters: int
    n_enriched: int


@dataclass
class RunReport:
    problem: str
    surrogate: str
    pf: float
    beta: float
    cov: float
    converged: bool
    stalled: bool
    iterations: list[IterationRecord]
    enrichment_log: list[EnrichmentRecord]
    n_eval: list[int]
    total_eval: int
    seeds: Seeds
    composition: str
    config: dict
    warnings: list[str]
    wall_seconds: float
    reference: dict | None = None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["seeds"] = {
            "global": self.seeds.global_,
            "sus": self.seeds.sus,
            "usys": self.seeds.usys,
            "sobol": self.seeds.sobol,
        }
        return d


class _CountingLsf:
    def __init__(self, fn):
        self.fn = fn
        self.count = 0

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        self.count += x.shape[0]
        out = np.asarray(self.fn(x), dtype=float)
        return out


# ---------------------------------------------------------------------------
# driver


DEFAULT_SUS = SusConfig(samples_per_level=10_000, p0=0.1, max_levels=10, rho=0.8)
DEFAULT_SUS_FINAL = SusConfig(samples_per_level=100_000, p0=0.1, max_levels=10, rho=0.8)


def run(problem, config: LearnConfig | None = None,
        sus_cfg: SusConfig | None = None,
        sus_final_cfg: SusConfig | None = None,
        seeds: Seeds | None = None) -> RunReport:
    """Execute the full active-learning reliability analysis on a problem.

    ``problem`` provides input_model, limit_states (vectorized callables on
    physical component subvectors), composition text and an optional
    reference solution.
    """
    t0 = time.perf_counter()
    config = config or LearnConfig()
    sus_cfg = sus_cfg or DEFAULT_SUS
    sus_final_cfg = sus_final_cfg or DEFAULT_SUS_FINAL
    seeds = seeds or Seeds.derive(0)
    # common random numbers: one fixed learning-phase seed for every iteration
    sus_cfg = dataclasses.replace(sus_cfg, seed=seeds.sus)

    model: InputModel = problem.input_model
    maps = [list(cm) for cm in model.component_maps]
    m = len(maps)
    M = model.dim
    expr = parse_composition(problem.composition)
    lsfs = [_CountingLsf(fn) for fn in problem.limit_states]
    n_max = config.n_max if config.n_max is not None else M
    warnings_log: list[str] = []

    # -- step 1: initial experimental designs per component
    bounds = initial_design_bounds(model, config.bounds_mode)
    eds: list[ExperimentalDesign] = []
    for j, cmap in enumerate(maps):
        n0 = (config.initial_sizes[j] if config.initial_sizes is not None
              else 2 * len(cmap) + 1)
        # floor at what the surrogate can calibrate: p + 2 points for a
        # p-term fixed trend, 3 for the adaptive PCE trend
        if config.surrogate == "kriging" and config.kriging_trend == "linear":
            n0 = max(n0, len(cmap) + 3)
        else:
            n0 = max(n0, 3)
        x_j = lhs_sample(bounds[cmap], n0, np.random.SeedSequence([seeds.global_, j]))
        g_j = lsfs[j](x_j)
        if not np.all(np.isfinite(g_j)):
            raise RuntimeError(f"limit state {j + 1} returned non-finite value "
                               "on the initial design")
        u_j = np.column_stack([
            model.marginals[i].to_u(x_j[:, c]) for c, i in enumerate(cmap)
        ])
        eds.append(ExperimentalDesign(u_j, g_j, config.duplicate_tol))

    def fit(j: int):
        opts = FitOptions(kernel=config.kernel, seed=j)
        if config.surrogate == "pck":
            return fit_pck(eds[j], config.pce_degree, config.kernel, opts)
        return fit_kriging(eds[j], config.kriging_trend, config.kernel, opts)

    surrogates = [None] * m
    need_fit = [True] * m
    tracker = ConvergenceTracker()
    iterations: list[IterationRecord] = []
    enrichment_log: list[EnrichmentRecord] = []
    alpha = config.alpha
    alpha_doubled = False
    converged = False
    stalled = False

    for k in range(config.max_iterations):
        for j in range(m):
            if need_fit[j]:
                surrogates[j] = fit(j)
                need_fit[j] = False
        lsf_sys = system_mean_lsf(surrogates, expr, maps)
        sus = subset_simulation(lsf_sys, M, sus_cfg)  # CRN: fixed seed
        pf_k = min(max(sus.pf, 1e-300), 1.0 - 1e-12)
        beta_k = reliability_index(pf_k)
        eps_k = tracker.update(beta_k)
        rec = IterationRecord(k, pf_k, beta_k, eps_k, sus.samples.shape[0], 0, 0)
        iterations.append(rec)
        if check_convergence(tracker, config.eps_bar, config.streak_required):
            converged = True
            break
        if k == config.max_iterations - 1:
            warnings_log.append("maximum number of iterations reached")
            break

        # -- steps 5-9: learn, filter, cluster, select, route, enrich
        pool_u = sus.samples
        means = np.empty((pool_u.shape[0], m))
        stds = np.empty_like(means)
        for j, cmap in enumerate(maps):
            mu, var = surrogates[j].predict(pool_u[:, cmap])
            means[:, j] = mu
            stds[:, j] = np.sqrt(var)
        uvals = usys_pool(means, stds, expr, config.n_usys,
                          np.random.SeedSequence([seeds.usys, k]))
        added = 0
        if np.all(np.isinf(uvals)):
            warnings_log.append(
                f"iteration {k}: every candidate classified with certainty")
        else:
            fidx = filter_candidates(uvals, alpha)
            pts_f = pool_u[fidx]
            eps_db, n_min = clustering.default_params(pts_f)
            labels = clustering.dbscan(pts_f, eps_db, n_min)
            rec.n_clusters = labels.n_clusters
            selected = select_enrichment(uvals[fidx], labels, n_max)
            for rank, i_f in enumerate(selected):
                gi = int(fidx[i_f])
                u = pool_u[gi]
                rg = ResponseGaussians(means[gi], stds[gi])
                sobol_vec = None
                fallback = False
                try:
                    S = total_sobol(expr, rg, config.n_sobol,
                                    np.random.SeedSequence([seeds.sobol, k, rank]))
                    j_star = select_limit_state(S)
                    sobol_vec = [float(s) for s in S]
                except DegenerateVarianceError:
                    # route to the least certain component instead
                    with np.errstate(divide="ignore"):
                        ratio = np.where(rg.stds > 0.0,
                                         np.abs(rg.means) / np.maximum(rg.stds, 1e-300),
                                         np.inf)
                    if np.all(np.isinf(ratio)):
                        continue
                    j_star = int(np.argmin(ratio))
                    fallback = True
                u_j = u[maps[j_star]]
                entry = EnrichmentRecord(
                    iteration=k,
                    point_u=[float(v) for v in u],
                    point_x=[float(v) for v in model.from_standard(u)],
                    usys=float(uvals[gi]),
                    cluster=int(labels.labels[i_f]),
                    sobol=sobol_vec,
                    component=j_star,
                    routed_by_fallback=fallback,
                )
                if eds[j_star].is_duplicate(u_j):
                    entry.skipped_duplicate = True
                    enrichment_log.append(entry)
                    continue
                x = model.from_standard(u)
                g_new = float(lsfs[j_star](x[maps[j_star]])[0])
                if not np.isfinite(g_new):
                    raise RuntimeError(
                        f"limit state {j_star + 1} returned non-finite value at x = {x}")
                eds[j_star] = eds[j_star].appended(u_j, g_new)
                need_fit[j_star] = True
                enrichment_log.append(entry)
                added += 1
            rec.n_enriched = added
        if added == 0:
            if not alpha_doubled:
                alpha = min(2.0 * alpha, 1.0)
                alpha_doubled = True
                warnings_log.append(
                    f"iteration {k}: no enrichment point added, doubling alpha")
            else:
                stalled = True
                warnings_log.append(
                    f"iteration {k}: enrichment stalled, stopping early")
                break

    # -- step 10: final estimate with fine subset simulation, fresh seed
    for j in range(m):
        if need_fit[j]:
            surrogates[j] = fit(j)
            need_fit[j] = False
    final_seed = int(np.random.SeedSequence([seeds.sus, 1]).generate_state(1)[0])
    fine_cfg = dataclasses.replace(sus_final_cfg, seed=final_seed)
    lsf_sys = system_mean_lsf(surrogates, expr, maps)
    final = subset_simulation(lsf_sys, M, fine_cfg)
    pf = min(max(final.pf, 1e-300), 1.0 - 1e-12)

    counts = [lsf.count for lsf in lsfs]
    return RunReport(
        problem=getattr(problem, "name", "custom"),
        surrogate=config.surrogate,
        pf=pf,
        beta=reliability_index(pf),
        cov=final.cov,
        converged=converged and not stalled,
        stalled=stalled,
        iterations=iterations,
        enrichment_log=enrichment_log,
        n_eval=counts,
        total_eval=int(sum(counts)),
        seeds=seeds,
        composition=pretty(expr),
        config=dataclasses.asdict(config),
        warnings=warnings_log,
        wall_seconds=time.perf_counter() - t0,
        reference=getattr(problem, "reference", None),
    )
