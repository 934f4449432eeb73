"""Estimator-style wrappers around the functional API.

The classes follow scikit-learn conventions: constructor arguments are plain
hyper-parameters (so ``get_params``/``set_params``/``clone`` work), ``fit``
returns ``self``, and fitted state lives in attributes with a trailing
underscore.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_design, check_survival_data, check_tau
from .contrasts import Contrast, ContrastKind, contrast_for, validate_contrast
from .copulas import make_copula
from .effects import estimate_effects
from .inference import confidence_intervals, f_test, jackknife_covariance
from .survival import GroupedSample, cg_survival


class CopulaGraphicSurvival(BaseEstimator):
    """Copula-graphic survival curve for a single group.

    Parameters
    ----------
    copula : str, default="clayton"
        Archimedean family: ``"independence"``, ``"clayton"``, ``"gumbel"`` or
        ``"frank"``.
    theta : float, default=0.0
        Dependence parameter; 0 gives the Kaplan-Meier estimator.

    Attributes
    ----------
    survival_ : StepSurvival
        The fitted step function.
    copula_ : CopulaSpec
    """

    def __init__(self, copula="clayton", theta=0.0):
        self.copula = copula
        self.theta = theta

    def fit(self, time, event):
        time, event = check_survival_data(time, event)
        self.copula_ = make_copula(self.copula, self.theta)
        sample = GroupedSample.from_arrays(time, event)
        self.n_ties_ = sample.n_ties
        self.survival_ = cg_survival(sample, self.copula_)
        return self

    def predict(self, t):
        """Survival probability at times ``t``."""
        check_is_fitted(self, "survival_")
        return self.survival_.eval(t)


class TreatmentEffects(BaseEstimator):
    """Relative treatment effects with jackknife standard errors.

    Parameters
    ----------
    copula, theta
        Shared copula for every group; see :class:`CopulaGraphicSurvival`.
    tau : float or "auto", default="auto"
        Follow-up end. ``"auto"`` takes the smallest group maximum.
    alpha : float, default=0.05
        Level of the reported confidence intervals.
    ci_scale : {"plain", "logit"}, default="plain"

    Attributes
    ----------
    p_hat_, w_hat_, se_, ci_, tau_, labels_, copula_, estimate_, covariance_, data_
    """

    def __init__(self, copula="clayton", theta=0.0, tau="auto", alpha=0.05, ci_scale="plain"):
        self.copula = copula
        self.theta = theta
        self.tau = tau
        self.alpha = alpha
        self.ci_scale = ci_scale

    def fit(self, time, event, groups):
        self.data_ = check_design(time, event, groups)
        self.copula_ = make_copula(self.copula, self.theta)
        self.estimate_ = estimate_effects(self.data_, self.copula_, check_tau(self.tau))
        self.tau_ = self.estimate_.tau_used
        self.covariance_ = jackknife_covariance(self.data_, self.copula_, self.tau_)
        self.labels_ = self.data_.labels
        self.p_hat_ = self.estimate_.p_hat
        self.w_hat_ = self.estimate_.w_hat
        self.se_ = self.covariance_.se
        self.ci_ = confidence_intervals(self.estimate_, self.covariance_, self.alpha, self.ci_scale)
        return self

    def predict(self, t):
        """CG survival of every group at ``t``, shape ``(d, len(t))``."""
        check_is_fitted(self, "estimate_")
        return np.stack([np.atleast_1d(s.eval(t)) for s in self.estimate_.curves])

    def test(self, contrast="global", method="both", n_sim=1000, random_state=0):
        """F-test of ``contrast @ p = 0``; see :class:`FactorialFTest`."""
        check_is_fitted(self, "estimate_")
        C = _resolve_contrast(contrast, self.data_)
        return f_test(self.p_hat_, self.covariance_.v_asym, self.data_.N, C, self.alpha, method, n_sim,
                      random_state)


class FactorialFTest(BaseEstimator):
    """ANOVA-type F-test for relative treatment effects under dependent censoring.

    ``contrast`` is ``"global"``, ``"main-a"``, ``"main-b"``, ``"interaction"``
    or an explicit ``r x d`` matrix. ``random_state`` seeds the simulated
    critical value and must be an integer.
    """

    def __init__(self, copula="clayton", theta=0.0, tau="auto", contrast="global", alpha=0.05,
                 method="both", n_sim=1000, random_state=0):
        self.copula = copula
        self.theta = theta
        self.tau = tau
        self.contrast = contrast
        self.alpha = alpha
        self.method = method
        self.n_sim = n_sim
        self.random_state = random_state

    def fit(self, time, event, groups):
        self.effects_ = TreatmentEffects(self.copula, self.theta, self.tau, self.alpha).fit(time, event, groups)
        self.result_ = self.effects_.test(self.contrast, self.method, self.n_sim, self.random_state)
        self.f_value_ = self.result_.f_value
        self.p_value_ = self.result_.p_sim if self.method == "sim" else self.result_.p_analytic
        return self

    @property
    def reject_(self):
        check_is_fitted(self, "result_")
        if self.method == "sim":
            return self.result_.reject_sim
        return self.result_.reject_analytic


def _resolve_contrast(contrast, data) -> Contrast:
    if isinstance(contrast, str):
        return contrast_for(ContrastKind(contrast), data.d, data.layout)
    return validate_contrast(contrast, data.d)
