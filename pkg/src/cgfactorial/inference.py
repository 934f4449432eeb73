"""Jackknife covariance, confidence intervals and the ANOVA-type F-test.

The test statistic for ``H0: C p = 0`` is

    F = N p' T p / tr(T V),    T = C' (C C')^+ C,

with ``V = N * Cov(p_hat)`` from the leave-one-subject-out jackknife. Under
``H0`` it is approximately ``sum(lambda_k chi2_k(1)) / sum(lambda_k)`` where
``lambda_k`` are the eigenvalues of ``T V``. Critical values come either from
simulating that weighted chi-square law or from the two-moment
``chi2(f) / f`` approximation with ``f = tr(TV)^2 / tr(TVTV)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .contrasts import Contrast, validate_contrast
from .copulas import INDEPENDENCE, CopulaSpec, make_copula
from .effects import (
    Dataset,
    EffectsEstimate,
    _event_grid,
    _on_grid,
    _pairwise,
    _parts,
    estimate_effects,
    resolve_tau,
)
from .exceptions import DegenerateTestError, InsufficientSampleError, TauValidityError
from .survival import _loo_record_levels, _record_levels

METHODS = ("sim", "analytic", "both")


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    """Jackknife covariance of ``p_hat`` (``v_phat``) and ``v_asym = N * v_phat``."""

    v_phat: np.ndarray
    v_asym: np.ndarray
    se: np.ndarray
    replicates: np.ndarray = field(repr=False, default=None)

    @property
    def N(self) -> int:
        return self.replicates.shape[0]


def leave_one_out_effects(data: Dataset, c: CopulaSpec = INDEPENDENCE, tau="auto") -> np.ndarray:
    """Relative effects with each subject deleted in turn, shape ``(N, d)``.

    Rows follow the group order, and within a group the sorted record order.
    Only the pairwise effects that involve the shrunken group are recomputed;
    all leave-one-out curves of a group come from one batched generator sum.
    """
    c = make_copula(c) if not isinstance(c, CopulaSpec) else c
    for g in data.groups:
        if g.n < 3:
            raise InsufficientSampleError(
                f"the jackknife needs at least 3 subjects per group; group {g.label!r} has {g.n}"
            )
    tau = resolve_tau(data, tau)
    d = data.d
    grid = _event_grid(data.groups, tau)

    full = []
    for g in data.groups:
        levels = _record_levels(g.time, g.status, c)
        if tau > g.max_time and levels[-1] != 0.0:
            raise TauValidityError(
                f"tau={tau:g} exceeds the last observed time {g.max_time:g} of group {g.label!r}"
            )
        full.append(_on_grid(levels, g.time, grid))
    pm_f, jump_f, tau_f = _parts(np.stack(full))
    w_full = _pairwise(pm_f, tau_f, jump_f, tau_f)

    out = []
    for i, g in enumerate(data.groups):
        n = g.n
        loo = _loo_record_levels(g.time, g.status, c)
        domain = np.full(n, g.time[-1])
        domain[-1] = g.time[-2]
        bad = np.flatnonzero((tau > domain) & (loo[:, -1] != 0.0))
        if bad.size:
            m = int(bad[0])
            raise TauValidityError(
                f"deleting subject {m} (time={g.time[m]:g}) of group {g.label!r} leaves its curve "
                f"undefined at tau={tau:g}; choose a smaller tau"
            )
        pm_l, jump_l, tau_l = _parts(_on_grid(loo, g.time, grid))
        row = _pairwise(pm_l, tau_l, jump_f, tau_f)
        col = _pairwise(pm_f, tau_f, jump_l, tau_l)
        diag = -(pm_l * jump_l).sum(axis=-1) + 0.5 * tau_l * tau_l
        w = np.repeat(w_full[None, :, :], n, axis=0)
        w[:, i, :] = row
        w[:, :, i] = col.T
        w[:, i, i] = diag
        out.append(w.sum(axis=-1) / d)
    return np.concatenate(out, axis=0)


def jackknife_covariance(data: Dataset, c: CopulaSpec = INDEPENDENCE, tau="auto") -> CovarianceEstimate:
    """Leave-one-subject-out jackknife covariance of ``p_hat``.

    ``V(p_hat) = N/(N-1) * sum_ij (p^(-ij) - p^(.)) (p^(-ij) - p^(.))'`` where
    ``p^(.)`` is the mean of the ``N`` deleted-subject estimates.
    """
    reps = leave_one_out_effects(data, c, tau)
    N = reps.shape[0]
    dev = reps - reps.mean(axis=0)
    v = N / (N - 1) * np.einsum("ni,nj->ij", dev, dev)
    v = 0.5 * (v + v.T)
    return CovarianceEstimate(v, N * v, np.sqrt(np.clip(np.diag(v), 0.0, None)), reps)


def confidence_intervals(est, cov, alpha: float = 0.05, scale: str = "plain") -> np.ndarray:
    """Normal-theory intervals for each ``p_i``, shape ``(d, 2)``.

    ``scale='logit'`` builds the interval for ``logit(p)`` by the delta method
    and maps it back, so the endpoints stay inside ``(0, 1)``. ``est`` and
    ``cov`` may also be plain arrays of estimates and standard errors.
    """
    p = np.asarray(est.p_hat if isinstance(est, EffectsEstimate) else est, dtype=float)
    se = np.asarray(cov.se if isinstance(cov, CovarianceEstimate) else cov, dtype=float)
    _check_alpha(alpha)
    z = stats.norm.isf(alpha / 2)
    if scale == "plain":
        return np.column_stack([p - z * se, p + z * se])
    if scale != "logit":
        raise ValueError(f"scale must be 'plain' or 'logit', got {scale!r}")
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("logit intervals need every estimate strictly inside (0, 1)")
    lp = np.log(p / (1 - p))
    half = z * se / (p * (1 - p))
    return np.column_stack([_expit(lp - half), _expit(lp + half)])


def _expit(x):
    return 1.0 / (1.0 + np.exp(-x))


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def pseudo_inverse(M, rtol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose inverse; singular values below ``rtol * max`` count as zero."""
    M = np.asarray(M, dtype=float)
    if M.size == 0 or not np.any(M):
        return np.zeros(M.T.shape)
    return np.linalg.pinv(M, rtol=rtol)


def projection_matrix(C, rtol: float = 1e-12) -> np.ndarray:
    """``T = C' (C C')^+ C``, the orthogonal projector onto the row space of ``C``."""
    C = C.matrix if isinstance(C, Contrast) else np.atleast_2d(np.asarray(C, dtype=float))
    T = C.T @ pseudo_inverse(C @ C.T, rtol) @ C
    return 0.5 * (T + T.T)


def _trace_tol(v_asym: np.ndarray) -> float:
    return 1e-12 * max(float(np.trace(v_asym)), 0.0)


def f_statistic(p_hat, T, v_asym, N: int) -> tuple[float, float]:
    """``(F, tr(T V))`` for ``F = N p' T p / tr(T V)``."""
    p_hat = np.asarray(p_hat, dtype=float)
    trace = float(np.trace(T @ v_asym))
    if trace <= _trace_tol(v_asym) or trace <= 0:
        raise DegenerateTestError(
            f"tr(T V) = {trace:.3g}: the estimated covariance has no variance in the "
            "direction of the hypothesis, so it cannot be tested on these data"
        )
    f = N * float(p_hat @ T @ p_hat) / trace
    return max(f, 0.0), trace


def null_eigenvalues(T, v_asym, psd_tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of ``T V`` (descending), via the symmetric ``V^1/2 T V^1/2``."""
    v = 0.5 * (np.asarray(v_asym, dtype=float) + np.asarray(v_asym, dtype=float).T)
    w, Q = np.linalg.eigh(v)
    scale = max(np.abs(w).max(initial=0.0), np.finfo(float).tiny)
    if w.min(initial=0.0) < -psd_tol * scale:
        raise ArithmeticError(f"covariance matrix is not positive semidefinite (eigenvalue {w.min():.3g})")
    root = (Q * np.sqrt(np.clip(w, 0.0, None))) @ Q.T
    M = root @ T @ root
    lam = np.linalg.eigvalsh(0.5 * (M + M.T))[::-1]
    top = lam[0] if lam.size else 0.0
    lam[lam < 1e-12 * max(top, 0.0)] = 0.0
    return lam


@dataclass(frozen=True, eq=False)
class SimulatedNull:
    """Monte Carlo draws from the weighted chi-square null of ``F``."""

    critical_value: float
    replicates: np.ndarray = field(repr=False)
    alpha: float
    seed: int

    def p_value(self, f_obs: float) -> float:
        """Add-one Monte Carlo p-value ``(1 + #{F_r >= f}) / (R + 1)``."""
        count = int(np.count_nonzero(self.replicates >= f_obs))
        return (1 + count) / (self.replicates.size + 1)

    def critical_at(self, alpha: float) -> float:
        _check_alpha(alpha)
        return float(np.quantile(self.replicates, 1 - alpha))


def critical_value_simulation(lambdas, trace_tv: float, alpha: float = 0.05, R: int = 1000, seed: int = 0) -> SimulatedNull:
    """Upper-``alpha`` point of ``sum(lambda_k chi2_k(1)) / tr(TV)`` from ``R`` draws.

    Draws come from a Philox (counter-based) stream keyed by ``seed``, so the
    result depends only on the arguments.
    """
    _check_alpha(alpha)
    if int(R) != R or R < 100:
        raise ValueError(f"R must be an integer >= 100, got {R}")
    lam = np.asarray(lambdas, dtype=float)
    lam = lam[lam > 0]
    if lam.size == 0 or trace_tv <= 0:
        raise DegenerateTestError("all null eigenvalues are zero; the weighted chi-square law is degenerate")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    z = rng.standard_normal((int(R), lam.size))
    reps = (z * z * lam).sum(axis=1) / trace_tv
    return SimulatedNull(float(np.quantile(reps, 1 - alpha)), reps, alpha, int(seed))


def critical_value_analytic(T, v_asym, alpha: float = 0.05) -> tuple[float, float]:
    """``(chi2_{1-alpha}(f) / f, f)`` with ``f = tr(TV)^2 / tr(TVTV)``."""
    _check_alpha(alpha)
    f = box_dof(T, v_asym)
    return float(stats.chi2.isf(alpha, f) / f), f


def box_dof(T, v_asym) -> float:
    tv = np.asarray(T) @ np.asarray(v_asym)
    tr1 = float(np.trace(tv))
    tr2 = float(np.trace(tv @ tv))
    if tr2 <= 0 or tr1 <= 0:
        raise DegenerateTestError(f"tr(TVTV) = {tr2:.3g}; the analytic approximation is undefined")
    return tr1 * tr1 / tr2


def analytic_p_value(f_value: float, f_hat: float) -> float:
    return float(stats.chi2.sf(f_value * f_hat, f_hat))


@dataclass(frozen=True, eq=False)
class TestResult:
    """Outcome of one F-test; simulation fields are None when not requested."""

    f_value: float
    trace_tv: float
    eigenvalues: np.ndarray
    crit_analytic: float
    p_analytic: float
    f_hat_dof: float
    alpha: float
    reps: int
    seed: int
    crit_sim: float | None = None
    p_sim: float | None = None
    contrast: np.ndarray = field(default=None, repr=False)

    __test__ = False  # keep pytest from collecting this class

    @property
    def reject_analytic(self) -> bool:
        return self.f_value > self.crit_analytic

    @property
    def reject_sim(self) -> bool | None:
        return None if self.crit_sim is None else self.f_value > self.crit_sim


def f_test(p_hat, v_asym, N: int, C, alpha: float = 0.05, method: str = "both", R: int = 1000, seed: int = 0) -> TestResult:
    """F-test of ``C p = 0`` from an estimate and its asymptotic covariance."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    _check_alpha(alpha)
    p_hat = np.asarray(p_hat, dtype=float)
    C = validate_contrast(C, p_hat.size)
    T = projection_matrix(C)
    if not np.any(T):
        # a zero contrast restricts nothing: F is 0 and never rejects
        d = p_hat.size
        return TestResult(0.0, 0.0, np.zeros(d), np.inf, 1.0, np.nan, alpha, int(R), int(seed),
                          np.inf if method != "analytic" else None,
                          1.0 if method != "analytic" else None, C.matrix)
    f, trace = f_statistic(p_hat, T, v_asym, N)
    lam = null_eigenvalues(T, v_asym)
    crit_a, f_hat = critical_value_analytic(T, v_asym, alpha)
    p_a = analytic_p_value(f, f_hat)
    crit_s = p_s = None
    if method in ("sim", "both"):
        sim = critical_value_simulation(lam, trace, alpha, R, seed)
        crit_s, p_s = sim.critical_value, sim.p_value(f)
    return TestResult(f, trace, lam, crit_a, p_a, f_hat, alpha, int(R), int(seed), crit_s, p_s, C.matrix)


def run_test(data: Dataset, c: CopulaSpec, tau, C, alpha: float = 0.05, method: str = "both",
             R: int = 1000, seed: int = 0) -> TestResult:
    """Effects, jackknife covariance and F-test in one call."""
    c = make_copula(c) if not isinstance(c, CopulaSpec) else c
    est = estimate_effects(data, c, tau)
    cov = jackknife_covariance(data, c, est.tau_used)
    return f_test(est.p_hat, cov.v_asym, data.N, C, alpha, method, R, seed)
