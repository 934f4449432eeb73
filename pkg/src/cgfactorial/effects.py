"""Pairwise Mann-Whitney effects and relative treatment effects.

For groups ``i`` and ``l`` followed up to ``tau``, the pairwise effect is

    w_il = -int_[0, tau] S_i^pm(t) dS_l(t) + S_i(tau) S_l(tau) / 2

with ``S^pm`` the average of left and right limits. It equals
``P(min(T_i, tau) > min(T_l, tau)) + P(tie) / 2`` for continuous curves. The
relative effects are ``p = A w`` with ``A = I_d kron 1'_d / d``, i.e. row
means of the ``d x d`` matrix of pairwise effects.

All curves of a design are step functions whose jumps sit at event times, so
every integral reduces to a sum over the pooled event times up to ``tau``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .copulas import INDEPENDENCE, CopulaSpec, make_copula
from .exceptions import DataValidationError, InsufficientSampleError, TauValidityError, TiesWarning
from .survival import GroupedSample, StepSurvival, cg_survival


@dataclass(frozen=True)
class Layout:
    """One-way layout with ``d`` groups, or two-way ``a x b`` in row-major order."""

    kind: str = "one-way"
    a: int | None = None
    b: int | None = None
    levels_a: tuple = ()
    levels_b: tuple = ()

    @property
    def is_two_way(self) -> bool:
        return self.kind == "two-way"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered groups of censored observations sharing one design layout."""

    groups: tuple[GroupedSample, ...]
    layout: Layout = field(default_factory=Layout)

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if len(self.groups) < 2:
            raise DataValidationError(f"need at least 2 groups, got {len(self.groups)}")
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise DataValidationError(f"group labels must be distinct, got {labels}")
        if self.layout.is_two_way and self.layout.a * self.layout.b != self.d:
            raise DataValidationError(
                f"two-way layout {self.layout.a}x{self.layout.b} does not match {self.d} groups"
            )

    @property
    def d(self) -> int:
        return len(self.groups)

    @property
    def N(self) -> int:
        return sum(g.n for g in self.groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(g.n for g in self.groups)

    @property
    def labels(self) -> tuple:
        return tuple(g.label for g in self.groups)

    @property
    def n_ties(self) -> int:
        return sum(g.n_ties for g in self.groups)

    @classmethod
    def one_way(cls, time, status, group) -> "Dataset":
        """Split flat arrays by ``group``; groups are ordered by sorted label."""
        time, status, group = _flat(time, status, group)
        groups = [
            GroupedSample.from_arrays(time[group == lab], status[group == lab], _py(lab))
            for lab in np.unique(group)
        ]
        ds = cls(groups, Layout("one-way"))
        _warn_ties(ds)
        return ds

    @classmethod
    def two_way(cls, time, status, factor_a, factor_b) -> "Dataset":
        """Cells ``(A_j, B_k)`` in row-major order over sorted factor levels."""
        time, status, factor_a = _flat(time, status, factor_a)
        factor_b = np.asarray(factor_b).ravel()
        if factor_b.shape != factor_a.shape:
            raise DataValidationError("factor_a and factor_b must have the same length")
        lev_a, lev_b = np.unique(factor_a), np.unique(factor_b)
        groups = []
        for la in lev_a:
            for lb in lev_b:
                mask = (factor_a == la) & (factor_b == lb)
                if not mask.any():
                    raise DataValidationError(f"two-way cell ({la}, {lb}) has no subjects")
                groups.append(GroupedSample.from_arrays(time[mask], status[mask], (_py(la), _py(lb))))
        layout = Layout("two-way", len(lev_a), len(lev_b), tuple(map(_py, lev_a)), tuple(map(_py, lev_b)))
        ds = cls(groups, layout)
        _warn_ties(ds)
        return ds

    def replace_group(self, i: int, group: GroupedSample) -> "Dataset":
        groups = list(self.groups)
        groups[i] = group
        return Dataset(groups, self.layout)


def _py(x):
    return x.item() if isinstance(x, np.generic) else x


def _flat(time, status, group):
    time = np.asarray(time, dtype=float).ravel()
    status = np.asarray(status).ravel()
    group = np.asarray(group).ravel()
    if not (time.shape == status.shape == group.shape):
        raise DataValidationError("time, status and group arrays must have the same length")
    return time, status, group


def _warn_ties(ds: Dataset) -> None:
    for g in ds.groups:
        if g.n_ties:
            warnings.warn(f"group {g.label!r} has {g.n_ties} tied time(s)", TiesWarning, stacklevel=3)


@dataclass(frozen=True, eq=False)
class EffectsEstimate:
    """Pairwise effects ``w_hat`` (row-major, length ``d**2``) and ``p_hat = A w_hat``."""

    w_hat: np.ndarray
    p_hat: np.ndarray
    tau_used: float
    copula_used: CopulaSpec
    labels: tuple = ()
    curves: tuple[StepSurvival, ...] = ()

    @property
    def d(self) -> int:
        return self.p_hat.size

    @property
    def w_matrix(self) -> np.ndarray:
        return self.w_hat.reshape(self.d, self.d)


def aggregation_matrix(d: int) -> np.ndarray:
    """``A = I_d kron 1'_d / d`` mapping row-major pairwise effects to ``p``."""
    if int(d) != d or d < 2:
        raise ValueError(f"aggregation matrix needs d >= 2, got {d}")
    d = int(d)
    return np.kron(np.eye(d), np.full((1, d), 1.0 / d))


def resolve_tau(data: Dataset, tau="auto") -> float:
    """``'auto'`` (or None) gives the smallest per-group maximum observed time."""
    if tau is None or (isinstance(tau, str) and tau.lower() == "auto"):
        tau = min(g.max_time for g in data.groups)
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0:
        raise TauValidityError(f"follow-up end tau must be positive, got {tau}")
    return tau


def _event_grid(groups: Sequence[GroupedSample], tau: float) -> np.ndarray:
    ev = np.concatenate([g.time[g.status == 1] for g in groups])
    ev = np.unique(ev)
    return ev[ev <= tau]


def _on_grid(levels: np.ndarray, time: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Right-continuous curve values at ``grid`` from per-record levels (last axis)."""
    idx = np.searchsorted(time, grid, side="right") - 1
    vals = levels[..., np.maximum(idx, 0)]
    return np.where(idx >= 0, vals, 1.0)


def _parts(right: np.ndarray):
    """Midpoint values, jump sizes and the value at tau for curves on a grid."""
    ones = np.ones(right.shape[:-1] + (1,))
    left = np.concatenate([ones, right[..., :-1]], axis=-1)
    s_tau = right[..., -1] if right.shape[-1] else ones[..., 0]
    return 0.5 * (right + left), right - left, s_tau


def _pairwise(pm_a, tau_a, jump_b, tau_b) -> np.ndarray:
    """Matrix of ``w(a_r, b_c)`` for every row curve ``a_r`` and column curve ``b_c``."""
    integral = (pm_a[:, None, :] * jump_b[None, :, :]).sum(axis=-1)
    return -integral + 0.5 * tau_a[:, None] * tau_b[None, :]


def pairwise_effect(si: StepSurvival, sl: StepSurvival, tau: float) -> float:
    """Estimated ``P(min(T_i, tau) > min(T_l, tau)) + P(tie) / 2`` from two curves.

    Jumps exactly at ``tau`` belong to the integral.
    """
    tau = float(tau)
    if not tau > 0:
        raise TauValidityError(f"follow-up end tau must be positive, got {tau}")
    for s in (si, sl):
        if not s.defined_at(tau):
            raise TauValidityError(
                f"tau={tau:g} exceeds the last observed time {s.domain_end:g} of group {s.label!r}"
            )
    grid = np.union1d(si.jump_times, sl.jump_times)
    grid = grid[grid <= tau]
    ri = si._right(grid)[None, :]
    rl = sl._right(grid)[None, :]
    pm_i, _, ti = _parts(ri)
    _, jump_l, tl = _parts(rl)
    return float(_pairwise(pm_i, ti, jump_l, tl)[0, 0])


def _check_tau(curves: Sequence[StepSurvival], tau: float) -> None:
    for s in curves:
        if not s.defined_at(tau):
            raise TauValidityError(
                f"tau={tau:g} exceeds the last observed time {s.domain_end:g} of group {s.label!r}; "
                "choose tau no larger than the smallest group maximum"
            )


def estimate_effects(data: Dataset, c: CopulaSpec = INDEPENDENCE, tau="auto") -> EffectsEstimate:
    """CG-based pairwise and relative treatment effects with one copula for all groups."""
    c = make_copula(c) if not isinstance(c, CopulaSpec) else c
    for g in data.groups:
        if g.n < 2:
            raise InsufficientSampleError(f"group {g.label!r} needs at least 2 subjects, has {g.n}")
    tau = resolve_tau(data, tau)
    curves = tuple(cg_survival(g, c) for g in data.groups)
    _check_tau(curves, tau)
    grid = _event_grid(data.groups, tau)
    right = np.stack([s._right(grid) for s in curves])
    pm, jump, s_tau = _parts(right)
    w = _pairwise(pm, s_tau, jump, s_tau)
    p = w.sum(axis=1) / data.d
    return EffectsEstimate(w.ravel(), p, tau, c, data.labels, curves)
