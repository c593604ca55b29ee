"""Kriging and PC-Kriging surrogates with predictive mean and variance.

A universal-Kriging model with trend basis f and anisotropic correlation
kernel is calibrated by profile maximum likelihood over the length-scales.
PC-Kriging uses a sparse Hermite polynomial chaos trend selected by
least-angle regression; points are expected in standard-normal coordinates
for the basis to be orthonormal (any coordinates work for pure fitting).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .inputs import lhs_sample


class ConditioningError(RuntimeError):
    """Correlation matrix stayed singular at the maximum allowed nugget."""


@dataclass(frozen=True)
class ExperimentalDesign:
    """Paired input points and limit-state observations for one component."""

    points: np.ndarray  # (N, d)
    values: np.ndarray  # (N,)
    duplicate_tol: float = 1e-8

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        vals = np.asarray(self.values, dtype=float).ravel()
        if pts.shape[0] != vals.shape[0]:
            raise ValueError("points and values must have equal length")
        if pts.shape[0] < 1:
            raise ValueError("experimental design needs at least one point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        if self.size > 1:
            scale = self._scale()
            for i in range(self.size):
                d = np.linalg.norm((pts[i + 1:] - pts[i]) / scale, axis=1)
                if np.any(d < self.duplicate_tol):
                    raise ValueError("experimental design contains duplicate points")

    def _scale(self) -> np.ndarray:
        s = self.points.std(axis=0)
        s[s == 0.0] = 1.0
        return s

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def is_duplicate(self, x: np.ndarray, tol: float | None = None) -> bool:
        tol = self.duplicate_tol if tol is None else tol
        d = np.linalg.norm((self.points - np.asarray(x, float)) / self._scale(), axis=1)
        return bool(np.any(d < tol))

    def appended(self, x: np.ndarray, g: float) -> "ExperimentalDesign":
        return ExperimentalDesign(
            np.vstack([self.points, np.asarray(x, float)]),
            np.append(self.values, g),
            self.duplicate_tol,
        )


# ---------------------------------------------------------------------------
# trend bases


@dataclass(frozen=True)
class TrendSpec:
    kind: str  # "constant" | "linear" | "pce"
    indices: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "pce"):
            raise ValueError(f"unknown trend kind {self.kind!r}")
        if self.kind == "pce":
            if len(set(self.indices)) != len(self.indices):
                raise ValueError("pce multi-indices must be unique")


def hermite_design(X: np.ndarray, indices) -> np.ndarray:
    """Design matrix of orthonormal (probabilists') Hermite products.

    Column k is prod_i He_{a_i}(x_i)/sqrt(a_i!) for multi-index a = indices[k].
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = X.shape
    max_deg = max((max(a) for a in indices if a), default=0)
    # univariate tables, tab[i][k] = psi_k(X[:, i])
    tab = np.empty((d, max_deg + 1, n))
    tab[:, 0] = 1.0
    if max_deg >= 1:
        tab[:, 1] = X.T
        he_prev, he_cur = np.ones((d, n)), X.T.copy()
        for k in range(1, max_deg):
            he_next = X.T * he_cur - k * he_prev
            he_prev, he_cur = he_cur, he_next
            tab[:, k + 1] = he_next / math.sqrt(math.factorial(k + 1))
    out = np.ones((n, len(indices)))
    for col, alpha in enumerate(indices):
        for i, a in enumerate(alpha):
            if a:
                out[:, col] *= tab[i, a]
    return out


def build_pce_basis(dim: int, max_degree: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices with total degree <= max_degree, C(dim+d, d) of them."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    out = [(0,) * dim]
    for deg in range(1, max_degree + 1):
        for combo in combinations_with_replacement(range(dim), deg):
            alpha = [0] * dim
            for i in combo:
                alpha[i] += 1
            out.append(tuple(alpha))
    return tuple(sorted(out, key=lambda a: (sum(a), a)))


def trend_matrix(spec: TrendSpec, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if spec.kind == "constant":
        return np.ones((X.shape[0], 1))
    if spec.kind == "linear":
        return np.hstack([np.ones((X.shape[0], 1)), X])
    return hermite_design(X, spec.indices)


# ---------------------------------------------------------------------------
# correlation kernels


def _corr(kernel: str, A: np.ndarray, B: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Cross-correlation matrix between scaled point sets A (n,d) and B (m,d)."""
    D = (A[:, None, :] - B[None, :, :]) / theta
    h2 = np.sum(D * D, axis=-1)
    if kernel == "gaussian":
        return np.exp(-0.5 * h2)
    if kernel == "matern52":
        h = np.sqrt(h2)
        s5h = math.sqrt(5.0) * h
        return (1.0 + s5h + (5.0 / 3.0) * h2) * np.exp(-s5h)
    raise ValueError(f"unknown kernel family {kernel!r}")


def _chol_with_nugget(R: np.ndarray, nugget0: float, nugget_max: float):
    nug = nugget0
    while nug <= nugget_max:
        try:
            L = cholesky(R + nug * np.eye(R.shape[0]), lower=True)
            return L, nug
        except np.linalg.LinAlgError:
            nug *= 10.0
    raise ConditioningError(
        f"correlation matrix singular even at nugget {nugget_max:g}"
    )


# ---------------------------------------------------------------------------
# model


@dataclass
class FitOptions:
    kernel: str = "matern52"
    theta: np.ndarray | None = None  # fixed length-scales (skips optimization)
    sigma2: float | None = None  # fixed process variance
    n_starts: int = 5
    log10_bounds: tuple[float, float] = (-2.0, 2.0)
    seed: int = 0
    nugget: float = 1e-10
    nugget_max: float = 1e-4


@dataclass
class SurrogateModel:
    """Fitted Kriging/PC-Kriging posterior with cached factorizations."""

    trend: TrendSpec
    beta: np.ndarray
    theta: np.ndarray
    sigma2: float
    nugget: float
    kernel: str
    x_mean: np.ndarray
    x_std: np.ndarray
    train_points: np.ndarray  # raw coordinates
    train_values: np.ndarray
    _S: np.ndarray = field(repr=False, default=None)  # scaled train points
    _L: np.ndarray = field(repr=False, default=None)  # chol(R + nugget I)
    _Ri_resid: np.ndarray = field(repr=False, default=None)
    _Ri_F: np.ndarray = field(repr=False, default=None)
    _FtRiF: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.train_points.shape[1]

    def predict(self, x: np.ndarray, return_raw_variance: bool = False):
        """Predictive mean and variance at x (single point or batch).

        Variance includes the universal-Kriging trend term and is clamped
        at zero after floating-point cancellation.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[1] != self.dim:
            raise ValueError("prediction dimension mismatch")
        s = (X - self.x_mean) / self.x_std
        r = _corr(self.kernel, s, self._S, self.theta)  # (n, N)
        f = trend_matrix(self.trend, X)  # (n, p)
        mean = f @ self.beta + r @ self._Ri_resid
        Ri_r = cho_solve((self._L, True), r.T)  # (N, n)
        u = r @ self._Ri_F - f  # (n, p)
        # u^T (F^T R^-1 F)^-1 u via solve against the cached Gram matrix
        t = np.linalg.solve(self._FtRiF, u.T)  # (p, n)
        raw = self.sigma2 * (
            1.0 + self.nugget - np.einsum("ij,ji->i", r, Ri_r) + np.einsum("ij,ji->i", u, t)
        )
        var = np.maximum(raw, 0.0)
        if single:
            if return_raw_variance:
                return float(mean[0]), float(var[0]), float(raw[0])
            return float(mean[0]), float(var[0])
        if return_raw_variance:
            return mean, var, raw
        return mean, var


def _gls(L, F, y):
    """GLS trend fit and profile-likelihood pieces for a fixed correlation."""
    Ri_F = cho_solve((L, True), F)
    Ri_y = cho_solve((L, True), y)
    G = F.T @ Ri_F
    try:
        beta = np.linalg.solve(G, F.T @ Ri_y)
    except np.linalg.LinAlgError:
        beta = np.linalg.lstsq(G, F.T @ Ri_y, rcond=None)[0]
    resid = y - F @ beta
    Ri_resid = cho_solve((L, True), resid)
    n = y.shape[0]
    sigma2 = float(resid @ Ri_resid) / n
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return beta, sigma2, Ri_resid, Ri_F, G, logdet


def _fit_with_trend(ed: ExperimentalDesign, trend: TrendSpec, opts: FitOptions):
    X, y = ed.points, ed.values
    n, d = X.shape
    F_probe = trend_matrix(trend, X)
    p = F_probe.shape[1]
    if opts.theta is None and n < p + 2:
        raise ValueError(
            f"need at least p + 2 = {p + 2} points for a {p}-term trend, got {n}"
        )
    x_mean = X.mean(axis=0)
    x_std = X.std(axis=0)
    x_std[x_std == 0.0] = 1.0
    S = (X - x_mean) / x_std
    F = F_probe
    var_y = float(np.var(y))

    def objective(log10_theta):
        theta = 10.0 ** np.asarray(log10_theta, dtype=float)
        R = _corr(opts.kernel, S, S, theta)
        try:
            L, nug = _chol_with_nugget(R, opts.nugget, opts.nugget_max)
        except ConditioningError:
            return np.inf, None
        beta, sigma2, Ri_resid, Ri_F, G, logdet = _gls(L, F, y)
        nll = n * math.log(max(sigma2, 1e-16 * max(var_y, 1e-300))) + logdet
        return nll, (theta, L, nug, beta, sigma2, Ri_resid, Ri_F, G)

    if opts.theta is not None:
        theta = np.broadcast_to(np.asarray(opts.theta, dtype=float), (d,)).copy()
        R = _corr(opts.kernel, S, S, theta)
        L, nug = _chol_with_nugget(R, opts.nugget, opts.nugget_max)
        beta, sigma2, Ri_resid, Ri_F, G, _ = _gls(L, F, y)
        best = (theta, L, nug, beta, sigma2, Ri_resid, Ri_F, G)
    else:
        lo, hi = opts.log10_bounds
        starts = lhs_sample(np.tile([lo, hi], (d, 1)), opts.n_starts, opts.seed)
        best_val, best = np.inf, None
        for x0 in starts:
            val0, state0 = objective(x0)
            if not np.isfinite(val0):
                continue
            res = minimize(
                lambda t: objective(t)[0],
                x0,
                method="L-BFGS-B",
                bounds=[(lo, hi)] * d,
            )
            val, state = objective(res.x)
            if state is None:
                val, state = val0, state0
            if val < best_val:
                best_val, best = val, state
        if best is None:
            raise ConditioningError("no feasible length-scales found")

    theta, L, nug, beta, sigma2, Ri_resid, Ri_F, G = best
    if opts.sigma2 is not None:
        # rescale cached solves: Ri_resid is sigma2-free, only sigma2 changes
        sigma2 = float(opts.sigma2)
    return SurrogateModel(
        trend=trend,
        beta=beta,
        theta=theta,
        sigma2=sigma2,
        nugget=nug,
        kernel=opts.kernel,
        x_mean=x_mean,
        x_std=x_std,
        train_points=X,
        train_values=y,
        _S=S,
        _L=L,
        _Ri_resid=Ri_resid,
        _Ri_F=Ri_F,
        _FtRiF=G,
    )


def fit_kriging(
    ed: ExperimentalDesign,
    trend: str = "linear",
    kernel_family: str = "matern52",
    opts: FitOptions | None = None,
) -> SurrogateModel:
    """Fit a Kriging model with constant or linear trend."""
    if trend not in ("constant", "linear"):
        raise ValueError("fit_kriging trend must be constant or linear")
    opts = opts or FitOptions()
    opts.kernel = kernel_family
    return _fit_with_trend(ed, TrendSpec(trend), opts)


# ---------------------------------------------------------------------------
# least-angle regression basis selection


def _loo_error(Phi: np.ndarray, y: np.ndarray) -> float:
    """Leave-one-out mean squared error of the OLS fit y ~ Phi."""
    coef, *_ = np.linalg.lstsq(Phi, y, rcond=None)
    resid = y - Phi @ coef
    Q, _ = np.linalg.qr(Phi)
    h = np.sum(Q * Q, axis=1)
    denom = 1.0 - h
    if np.any(denom < 1e-10):
        return np.inf
    return float(np.mean((resid / denom) ** 2))


def lar_select(candidates, ed: ExperimentalDesign):
    """Sparse multi-index subset chosen by LAR entry order and LOO error.

    The constant term is always retained; the remaining candidates enter in
    least-angle order and the path prefix minimizing the leave-one-out error
    is kept, with at most N - 1 terms.
    """
    candidates = [tuple(a) for a in candidates]
    n = ed.size
    dim = ed.dim
    const = (0,) * dim
    if not candidates:
        return [const]
    if len(candidates) == 1:
        return list(candidates)
    if n < 3:
        raise ValueError("lar_select needs at least 3 observations")

    noncst = [a for a in candidates if a != const]
    Psi = hermite_design(ed.points, noncst)
    keep = Psi.std(axis=0) > 1e-12
    if not np.all(keep):
        warnings.warn("dropping degenerate (zero-variance) PCE regressors")
        noncst = [a for a, k in zip(noncst, keep) if k]
        Psi = Psi[:, keep]
    if not noncst:
        return [const]

    from sklearn.exceptions import ConvergenceWarning
    from sklearn.linear_model import lars_path

    y = ed.values
    Xc = Psi - Psi.mean(axis=0)
    yc = y - y.mean()
    norms = np.linalg.norm(Xc, axis=0)
    norms[norms == 0.0] = 1.0
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        # small-N designs routinely exhaust the active set early (with
        # float32-overflow noise from the step-length computation); the path
        # prefix search below copes with a truncated path
        warnings.simplefilter("ignore", ConvergenceWarning)
        warnings.simplefilter("ignore", RuntimeWarning)
        _, active, _ = lars_path(Xc / norms, yc, method="lar")

    best_err, best_set = np.inf, [const]
    max_terms = min(len(active), n - 2)  # plus the constant -> <= n - 1 total
    for k in range(0, max_terms + 1):
        sel = [const] + [noncst[i] for i in active[:k]]
        Phi = hermite_design(ed.points, sel)
        err = _loo_error(Phi, y)
        if err < best_err - 1e-15:
            best_err, best_set = err, sel
    return best_set


def fit_pck(
    ed: ExperimentalDesign,
    max_degree: int = 3,
    kernel_family: str = "matern52",
    opts: FitOptions | None = None,
) -> SurrogateModel:
    """Fit a PC-Kriging model: LAR-selected Hermite trend + Kriging residual."""
    opts = opts or FitOptions()
    opts.kernel = kernel_family
    if max_degree == 0:
        return _fit_with_trend(ed, TrendSpec("constant"), opts)
    candidates = build_pce_basis(ed.dim, max_degree)
    selected = lar_select(candidates, ed)
    # kriging calibration requires p <= N - 2
    selected = selected[: max(1, ed.size - 2)]
    return _fit_with_trend(ed, TrendSpec("pce", tuple(selected)), opts)
