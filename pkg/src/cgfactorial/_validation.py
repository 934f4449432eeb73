"""Input checks shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array, check_consistent_length

from .effects import Dataset
from .exceptions import DataValidationError


def check_survival_data(time, event):
    """Return ``(time, event)`` as 1-d float and int8 arrays after validation."""
    time = check_array(time, ensure_2d=False, dtype=float, input_name="time")
    event = check_array(event, ensure_2d=False, dtype=None, input_name="event")
    if time.ndim != 1 or event.ndim != 1:
        raise DataValidationError("time and event must be 1-d arrays")
    check_consistent_length(time, event)
    if np.any(time <= 0):
        raise DataValidationError("observed times must be positive")
    if not np.all(np.isin(event, (0, 1))):
        raise DataValidationError("event indicators must be 0 (censored) or 1 (event)")
    return time, event.astype(np.int8)


def check_design(time, event, groups) -> Dataset:
    """Build a :class:`Dataset` from flat arrays.

    ``groups`` is a 1-d array of labels for a one-way layout, or an
    ``(n, 2)`` array of (factor A, factor B) labels for a two-way layout.
    """
    time, event = check_survival_data(time, event)
    groups = np.asarray(groups)
    if groups.ndim == 2 and groups.shape[1] == 2:
        check_consistent_length(time, groups)
        return Dataset.two_way(time, event, groups[:, 0], groups[:, 1])
    if groups.ndim != 1:
        raise DataValidationError("groups must be 1-d labels or an (n, 2) array of factor levels")
    check_consistent_length(time, groups)
    return Dataset.one_way(time, event, groups)


def check_tau(tau):
    if tau is None or (isinstance(tau, str) and tau.lower() == "auto"):
        return "auto"
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0:
        raise ValueError(f"tau must be positive or 'auto', got {tau}")
    return tau
