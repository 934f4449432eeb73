"""Copula-graphic survival curves for one treatment group.

Under an Archimedean survival copula with generator ``phi`` linking event and
censoring times, the copula-graphic (CG) estimate is

    S(t) = phi^{-1}( sum over events X_j <= t of
                     phi((Y(X_j) - 1) / n) - phi(Y(X_j) / n) )

where ``Y(u)`` counts subjects still at risk at ``u``. With ``phi = -log`` the
sum telescopes into the Kaplan-Meier product.

Ties are broken deterministically: records are ordered by time with events
before censorings, and each record decrements the at-risk count. Because the
generator increments telescope, a block of tied events contributes
``phi((Y - e)/n) - phi(Y/n)`` exactly as a grouped computation would.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .copulas import INDEPENDENCE, CopulaSpec, _phi, _phi_inv, _require_generator
from .exceptions import (
    CopulaDomainError,
    DataValidationError,
    InsufficientSampleError,
    TauValidityError,
    TiesWarning,
)


@dataclass(frozen=True)
class CensoredRecord:
    """One subject: observed time ``min(T, U)`` and event indicator."""

    time: float
    status: int

    def __post_init__(self):
        if not np.isfinite(self.time) or self.time <= 0:
            raise DataValidationError(f"observed time must be positive and finite, got {self.time}")
        if self.status not in (0, 1):
            raise DataValidationError(f"status must be 0 or 1, got {self.status!r}")


@dataclass(frozen=True, eq=False)
class GroupedSample:
    """Records of one group, sorted by time with events ahead of censorings."""

    time: np.ndarray
    status: np.ndarray
    label: Hashable = None
    n_ties: int = 0

    @property
    def n(self) -> int:
        return len(self.time)

    @property
    def records(self) -> list[CensoredRecord]:
        return [CensoredRecord(float(t), int(d)) for t, d in zip(self.time, self.status)]

    @property
    def max_time(self) -> float:
        return float(self.time[-1])

    @classmethod
    def from_arrays(cls, time, status, label=None) -> "GroupedSample":
        time = np.asarray(time, dtype=float).ravel()
        raw_status = np.asarray(status).ravel()
        if time.size == 0:
            raise DataValidationError(f"group {label!r} is empty")
        if time.shape != raw_status.shape:
            raise DataValidationError("time and status must have the same length")
        if not np.all(np.isfinite(time)) or np.any(time <= 0):
            raise DataValidationError(f"group {label!r}: observed times must be positive and finite")
        if not np.all(np.isin(raw_status, (0, 1))):
            raise DataValidationError(f"group {label!r}: status must be 0 (censored) or 1 (event)")
        status = raw_status.astype(np.int8)
        order = np.lexsort((-status, time))
        time, status = time[order], status[order]
        n_ties = int(time.size - np.unique(time).size)
        time.flags.writeable = False
        status.flags.writeable = False
        return cls(time, status, label, n_ties)

    def without(self, index: int) -> "GroupedSample":
        """Copy with the record at sorted position ``index`` removed."""
        keep = np.ones(self.n, dtype=bool)
        keep[index] = False
        return GroupedSample.from_arrays(self.time[keep], self.status[keep], self.label)


def group_sample(records: Iterable, label: Hashable = None) -> GroupedSample:
    """Sort ``records`` (CensoredRecord or ``(time, status)`` pairs) into a group.

    Tied times are counted in ``n_ties`` and reported with a :class:`TiesWarning`.
    """
    recs = [r if isinstance(r, CensoredRecord) else CensoredRecord(float(r[0]), int(r[1])) for r in records]
    if not recs:
        raise DataValidationError(f"group {label!r} is empty")
    s = GroupedSample.from_arrays([r.time for r in recs], [r.status for r in recs], label)
    if s.n_ties:
        warnings.warn(f"group {label!r} has {s.n_ties} tied time(s)", TiesWarning, stacklevel=2)
    return s


def at_risk(s: GroupedSample, u: float) -> int:
    """Number of subjects with observed time >= ``u``."""
    return int(s.n - np.searchsorted(s.time, u, side="left"))


@dataclass(frozen=True, eq=False)
class StepSurvival:
    """Right-continuous nonincreasing step function starting at 1.

    ``values[k]`` is the level from ``jump_times[k]`` up to the next jump. The
    curve is defined on ``[0, domain_end]``; once it has reached 0 it is also
    taken to be 0 beyond ``domain_end``.
    """

    jump_times: np.ndarray
    values: np.ndarray
    domain_end: float
    label: Hashable = None
    copula: CopulaSpec = field(default=INDEPENDENCE)

    @property
    def reaches_zero(self) -> bool:
        return self.values.size > 0 and self.values[-1] == 0.0

    def defined_at(self, t: float) -> bool:
        return 0 <= t <= self.domain_end or (t > self.domain_end and self.reaches_zero)

    def _check(self, t: np.ndarray) -> None:
        if np.any(t < 0):
            raise TauValidityError("survival curves are only defined for t >= 0")
        if not self.reaches_zero and np.any(t > self.domain_end):
            raise TauValidityError(
                f"t={float(np.max(t)):g} lies beyond the last observed time "
                f"{self.domain_end:g} of group {self.label!r}; the estimate is undefined there"
            )

    def _right(self, t: np.ndarray) -> np.ndarray:
        return np.r_[1.0, self.values][np.searchsorted(self.jump_times, t, side="right")]

    def _left(self, t: np.ndarray) -> np.ndarray:
        return np.r_[1.0, self.values][np.searchsorted(self.jump_times, t, side="left")]

    def eval(self, t):
        """Right-continuous value S(t)."""
        arr = np.asarray(t, dtype=float)
        self._check(arr)
        out = self._right(arr)
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def eval_left(self, t):
        """Left limit S(t-)."""
        arr = np.asarray(t, dtype=float)
        self._check(arr)
        out = self._left(arr)
        return float(out) if out.ndim == 0 else out

    def eval_pm(self, t):
        """Midpoint ``(S(t+) + S(t-)) / 2``; differs from :meth:`eval` only at jumps."""
        arr = np.asarray(t, dtype=float)
        self._check(arr)
        out = 0.5 * (self._right(arr) + self._left(arr))
        return float(out) if out.ndim == 0 else out

    def knots(self) -> tuple[np.ndarray, np.ndarray]:
        """``(times, levels)`` including the starting knot ``(0, 1)``."""
        return np.r_[0.0, self.jump_times], np.r_[1.0, self.values]


def _check_increments(inc: np.ndarray, copula: CopulaSpec, n: int) -> None:
    if np.isnan(inc).any():
        raise CopulaDomainError(
            f"{copula} overflows the generator for a group of {n} subjects; use a smaller theta"
        )


def _record_levels(time: np.ndarray, status: np.ndarray, copula: CopulaSpec) -> np.ndarray:
    """Curve level just after each sorted record (censored records repeat the level)."""
    n = time.size
    at_risk_k = n - np.arange(n, dtype=float)
    with np.errstate(invalid="ignore"):
        inc = np.where(status == 1, _phi(copula, (at_risk_k - 1) / n) - _phi(copula, at_risk_k / n), 0.0)
    _check_increments(inc, copula, n)
    return _phi_inv(copula, np.cumsum(inc))


def _loo_record_levels(time: np.ndarray, status: np.ndarray, copula: CopulaSpec) -> np.ndarray:
    """Levels for every leave-one-out sample at once.

    Row ``m`` holds the levels of the sample without record ``m``, indexed by
    the original sorted positions; the deleted position carries no increment.
    """
    n = time.size
    k = np.arange(n)
    m = k[:, None]
    # at-risk count of record k once record m is gone
    y = (n - 1 - k[None, :] + (k[None, :] > m)).astype(float)
    n1 = n - 1
    with np.errstate(invalid="ignore"):
        inc = _phi(copula, (y - 1) / n1) - _phi(copula, y / n1)
    inc = np.where((status[None, :] == 1) & (k[None, :] != m), inc, 0.0)
    _check_increments(inc, copula, n1)
    return _phi_inv(copula, np.cumsum(inc, axis=1))


def _collapse(time: np.ndarray, status: np.ndarray, levels: np.ndarray):
    """Reduce per-record levels to one value per distinct event time."""
    ev = status == 1
    if not np.any(ev):
        return np.empty(0), np.empty(0)
    # last record sharing each time carries the post-jump level
    last_of_time = np.r_[time[1:] != time[:-1], True]
    ev_times = np.unique(time[ev])
    pos = np.flatnonzero(last_of_time)
    sel = pos[np.isin(time[pos], ev_times)]
    return time[sel].copy(), levels[sel].copy()


def cg_survival(s: GroupedSample, c: CopulaSpec = INDEPENDENCE) -> StepSurvival:
    """Copula-graphic estimate of the survival function of one group."""
    _require_generator(c)
    if s.n < 2:
        raise InsufficientSampleError(f"group {s.label!r} needs at least 2 subjects, has {s.n}")
    levels = _record_levels(s.time, s.status, c)
    jt, vals = _collapse(s.time, s.status, levels)
    jt.flags.writeable = False
    vals.flags.writeable = False
    return StepSurvival(jt, vals, s.max_time, s.label, c)


def km_survival(s: GroupedSample) -> StepSurvival:
    """Kaplan-Meier estimate, computed as the product of ``1 - 1/Y`` factors."""
    if s.n < 2:
        raise InsufficientSampleError(f"group {s.label!r} needs at least 2 subjects, has {s.n}")
    at_risk_k = s.n - np.arange(s.n, dtype=float)
    factors = np.where(s.status == 1, 1.0 - 1.0 / at_risk_k, 1.0)
    levels = np.cumprod(factors)
    jt, vals = _collapse(s.time, s.status, levels)
    return StepSurvival(jt, vals, s.max_time, s.label, INDEPENDENCE)


def sample_from_pairs(pairs: Sequence[tuple[float, int]], label=None) -> GroupedSample:
    """Shortcut for tests and interactive use: ``[(time, status), ...]``."""
    return GroupedSample.from_arrays([p[0] for p in pairs], [p[1] for p in pairs], label)
