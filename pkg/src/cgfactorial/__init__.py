"""Copula-graphic relative treatment effects and ANOVA-type tests for censored data."""

__version__ = "0.1.0"

from .contrasts import (
    Contrast,
    ContrastKind,
    centering_matrix,
    contrast_for,
    global_contrast,
    load_contrast_csv,
    two_way_contrasts,
    validate_contrast,
)
from .copulas import (
    INDEPENDENCE,
    CopulaSpec,
    Family,
    generator,
    generator_inverse,
    kendalls_tau,
    make_copula,
    theta_from_tau,
)
from .effects import (
    Dataset,
    EffectsEstimate,
    Layout,
    aggregation_matrix,
    estimate_effects,
    pairwise_effect,
    resolve_tau,
)
from .estimators import CopulaGraphicSurvival, FactorialFTest, TreatmentEffects
from .exceptions import (
    CGFactorialError,
    ContrastError,
    CopulaDomainError,
    DataValidationError,
    DegenerateTestError,
    InsufficientSampleError,
    NonArchimedeanError,
    TauValidityError,
    TiesWarning,
)
from .inference import (
    CovarianceEstimate,
    SimulatedNull,
    TestResult,
    analytic_p_value,
    box_dof,
    confidence_intervals,
    critical_value_analytic,
    critical_value_simulation,
    f_statistic,
    f_test,
    jackknife_covariance,
    leave_one_out_effects,
    null_eigenvalues,
    projection_matrix,
    pseudo_inverse,
    run_test,
)
from .simulation import (
    SCENARIOS,
    ReplicationSummary,
    Scenario,
    generate_scenario,
    get_scenario,
    misspecification_sweep,
    run_replications,
    true_effects_oracle,
)
from .survival import (
    CensoredRecord,
    GroupedSample,
    StepSurvival,
    at_risk,
    cg_survival,
    group_sample,
    km_survival,
    sample_from_pairs,
)

__all__ = [name for name, obj in globals().items() if not name.startswith("_") and not isinstance(obj, type(__import__("sys")))]
