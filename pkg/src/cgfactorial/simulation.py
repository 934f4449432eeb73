"""Monte Carlo harness: Clayton-dependent censoring with exponential margins.

Each subject draws ``(a, b)`` from a Clayton copula and sets
``T = -log(a) / lambda`` and ``U = min(-log(b) / mu, tau)``, so that
``P(T > t, U > u) = C(S(t), G(u))`` before the administrative cut at ``tau``.

Randomness is keyed by ``(seed, replication, stream)`` through
``SeedSequence`` into Philox generators. Any replication can therefore be
recomputed on its own, and a sweep over fitted copula parameters sees the
same data sets for every parameter.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .contrasts import contrast_for
from .copulas import make_copula
from .effects import Dataset, GroupedSample, Layout, aggregation_matrix, estimate_effects
from .exceptions import CGFactorialError, TiesWarning
from .inference import confidence_intervals, f_test, jackknife_covariance

log = logging.getLogger(__name__)

ALPHAS = (0.10, 0.05, 0.01)
_DATA_STREAM, _NULL_STREAM = 0, 1


@dataclass(frozen=True)
class Scenario:
    id: int
    layout: Layout
    lam: tuple[float, ...]
    mu: tuple[float, ...]
    theta_true: float = 2.0
    tau: float = 1.0

    @property
    def d(self) -> int:
        return len(self.lam)

    @property
    def contrast_kind(self) -> str:
        return "main-a" if self.layout.is_two_way else "global"


_ONE = Layout("one-way")
_TWO = Layout("two-way", 2, 3, (1, 2), (1, 2, 3))

SCENARIOS = {
    1: Scenario(1, _ONE, (1, 1, 1), (1, 1, 1)),
    2: Scenario(2, _ONE, (1, 1, 1), (1, 1.25, 1.5)),
    3: Scenario(3, _ONE, (1, 1.25, 1.5), (1, 1, 1)),
    4: Scenario(4, _ONE, (1, 1.25, 1.5), (1, 1.25, 1.5)),
    5: Scenario(5, _ONE, (1.25, 1, 0.75), (1, 1, 1)),
    6: Scenario(6, _ONE, (1.25, 1, 0.75), (1, 1.25, 1.5)),
    7: Scenario(7, _TWO, (1, 1, 1, 1, 1, 1), (1, 1, 1, 1, 1, 1)),
    8: Scenario(8, _TWO, (1, 1.25, 1.5, 1, 1.25, 1.5), (1, 1, 1, 1, 1, 1)),
    9: Scenario(9, _TWO, (1, 1.25, 1.5, 1, 1, 1), (1, 1.25, 1.5, 1, 1, 1)),
}


def get_scenario(scenario_id: int) -> Scenario:
    try:
        return SCENARIOS[int(scenario_id)]
    except (KeyError, ValueError):
        raise ValueError(f"unknown scenario {scenario_id!r}; choose 1-9") from None


def rng_for(seed: int, rep: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(rep), int(stream)])))


def sample_clayton_pair(theta: float, rng: np.random.Generator, size=None):
    """Draw ``(u, v)`` from the Clayton copula by conditional inversion."""
    w1 = rng.random(size)
    w2 = rng.random(size)
    if theta < 1e-12:
        return w1, w2
    v = ((w2 ** (-theta / (1 + theta)) - 1) * w1 ** (-theta) + 1) ** (-1 / theta)
    return w1, v


def generate_scenario(s: Scenario, n_per_group: int, seed: int, rep: int = 0) -> Dataset:
    """Simulate one data set with ``n_per_group`` subjects in every group."""
    if n_per_group < 3:
        raise ValueError(f"n_per_group must be >= 3, got {n_per_group}")
    rng = rng_for(seed, rep, _DATA_STREAM)
    groups = []
    for i, (lam, mu) in enumerate(zip(s.lam, s.mu)):
        a, b = sample_clayton_pair(s.theta_true, rng, n_per_group)
        t = -np.log(a) / lam
        u = np.minimum(-np.log(b) / mu, s.tau)
        x = np.minimum(t, u)
        groups.append(GroupedSample.from_arrays(x, (t <= u).astype(np.int8), label=_label(s, i)))
    return Dataset(groups, s.layout)


def _label(s: Scenario, i: int):
    if s.layout.is_two_way:
        return (i // s.layout.b + 1, i % s.layout.b + 1)
    return i + 1


def pairwise_truth(lam_i: float, lam_l: float, tau: float) -> float:
    """Truncated pairwise effect for exponential margins."""
    rate = lam_i + lam_l
    surv = np.exp(-rate * tau)
    return lam_l / rate * (1 - surv) + surv / 2


def true_effects_oracle(s: Scenario) -> np.ndarray:
    """Population relative effects ``p`` of a scenario (independent of censoring)."""
    w = np.array([[pairwise_truth(li, ll, s.tau) for ll in s.lam] for li in s.lam])
    return aggregation_matrix(s.d) @ w.ravel()


@dataclass
class ReplicationSummary:
    scenario: int
    n: int
    theta_fit: float
    reps: int
    seed: int
    n_failed: int
    n_sim: int
    true_p: list
    mean: list
    bias: list
    sd: list
    mean_se: list
    coverage: list
    rejection: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _one_replication(s: Scenario, n: int, rep: int, theta_fits, alphas, seed: int, n_sim: int):
    """Per-theta results for one simulated data set."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TiesWarning)
        data = generate_scenario(s, n, seed, rep)
    contrast = contrast_for(s.contrast_kind, s.d, s.layout)
    null_seed = int(np.random.SeedSequence([int(seed), rep, _NULL_STREAM]).generate_state(1)[0])
    out = []
    for theta in theta_fits:
        cop = make_copula("clayton", theta)
        try:
            est = estimate_effects(data, cop, s.tau)
            cov = jackknife_covariance(data, cop, s.tau)
            ci = confidence_intervals(est, cov, 0.05)
            rejects = {"sim": [], "analytic": []}
            for a in alphas:
                res = f_test(est.p_hat, cov.v_asym, data.N, contrast, a, "both", n_sim, null_seed)
                rejects["sim"].append(res.reject_sim)
                rejects["analytic"].append(res.reject_analytic)
            out.append((est.p_hat, cov.se, ci, rejects, None))
        except (CGFactorialError, ArithmeticError) as exc:
            out.append((None, None, None, None, f"rep {rep}: {exc}"))
    return out


def _summarise(s, n, theta, reps, seed, n_sim, alphas, rows) -> ReplicationSummary:
    truth = true_effects_oracle(s)
    ok = [r for r in rows if r[4] is None]
    failures = [r[4] for r in rows if r[4] is not None]
    if not ok:
        raise RuntimeError(f"all {reps} replications failed; first error: {failures[0]}")
    p = np.array([r[0] for r in ok])
    se = np.array([r[1] for r in ok])
    ci = np.array([r[2] for r in ok])
    covered = (ci[:, :, 0] <= truth) & (truth <= ci[:, :, 1])
    rejection = {
        method: {str(a): float(np.mean([r[3][method][k] for r in ok])) for k, a in enumerate(alphas)}
        for method in ("sim", "analytic")
    }
    mean = p.mean(axis=0)
    return ReplicationSummary(
        scenario=s.id, n=n, theta_fit=float(theta), reps=reps, seed=seed, n_failed=len(failures),
        n_sim=n_sim, true_p=truth.tolist(), mean=mean.tolist(), bias=(mean - truth).tolist(),
        sd=p.std(axis=0, ddof=1).tolist(), mean_se=se.mean(axis=0).tolist(),
        coverage=covered.mean(axis=0).tolist(), rejection=rejection, failures=failures,
    )


def misspecification_sweep(s: Scenario, n: int, theta_fits, reps: int = 500, seed: int = 0,
                           alphas=ALPHAS, n_sim: int = 1000, n_jobs: int = 1) -> list[ReplicationSummary]:
    """One summary per fitted Clayton parameter, all computed on the same data sets."""
    if reps < 100:
        raise ValueError(f"reps must be >= 100, got {reps}")
    theta_fits = [float(t) for t in theta_fits]
    alphas = tuple(float(a) for a in alphas)
    if n_jobs == 1:
        per_rep = [_one_replication(s, n, r, theta_fits, alphas, seed, n_sim) for r in range(reps)]
    else:
        from joblib import Parallel, delayed

        per_rep = Parallel(n_jobs=n_jobs)(
            delayed(_one_replication)(s, n, r, theta_fits, alphas, seed, n_sim) for r in range(reps)
        )
    summaries = []
    for k, theta in enumerate(theta_fits):
        summary = _summarise(s, n, theta, reps, seed, n_sim, alphas, [rows[k] for rows in per_rep])
        if summary.n_failed:
            log.warning("scenario %d, theta=%g: %d of %d replications failed", s.id, theta, summary.n_failed, reps)
        summaries.append(summary)
    return summaries


def run_replications(s: Scenario, n: int, reps: int = 500, theta_fit: float = 2.0, alphas=ALPHAS,
                     seed: int = 0, n_sim: int = 1000, n_jobs: int = 1) -> ReplicationSummary:
    """Bias, SD, mean SE, CI coverage and rejection rates over ``reps`` data sets."""
    return misspecification_sweep(s, n, [theta_fit], reps, seed, alphas, n_sim, n_jobs)[0]
