"""Contrast matrices for hypotheses ``H0: C p = 0``."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import ContrastError


class ContrastKind(str, enum.Enum):
    ONE_WAY_GLOBAL = "global"
    MAIN_A = "main-a"
    MAIN_B = "main-b"
    INTERACTION = "interaction"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class Contrast:
    matrix: np.ndarray
    kind: ContrastKind = ContrastKind.CUSTOM

    @property
    def d(self) -> int:
        return self.matrix.shape[1]


def _check_levels(**levels) -> None:
    for name, k in levels.items():
        if int(k) != k or k < 2:
            raise ContrastError(f"{name} must be an integer >= 2, got {k}")


def centering_matrix(d: int) -> np.ndarray:
    """``P_d = I_d - 1 1' / d``."""
    _check_levels(d=d)
    d = int(d)
    return np.eye(d) - np.full((d, d), 1.0 / d)


def global_contrast(d: int) -> Contrast:
    return Contrast(centering_matrix(d), ContrastKind.ONE_WAY_GLOBAL)


def two_way_contrasts(a: int, b: int) -> dict[ContrastKind, Contrast]:
    """Main effects of A and B and their interaction for cells in row-major order."""
    _check_levels(a=a, b=b)
    pa, pb = centering_matrix(a), centering_matrix(b)
    mean_a = np.full((1, int(a)), 1.0 / a)
    mean_b = np.full((1, int(b)), 1.0 / b)
    return {
        ContrastKind.MAIN_A: Contrast(np.kron(pa, mean_b), ContrastKind.MAIN_A),
        ContrastKind.MAIN_B: Contrast(np.kron(mean_a, pb), ContrastKind.MAIN_B),
        ContrastKind.INTERACTION: Contrast(np.kron(pa, pb), ContrastKind.INTERACTION),
    }


def validate_contrast(C, d: int, tol: float = 1e-10) -> Contrast:
    """Check that ``C`` has ``d`` columns and zero row sums."""
    if isinstance(C, Contrast):
        kind, C = C.kind, C.matrix
    else:
        kind = ContrastKind.CUSTOM
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.ndim != 2:
        raise ContrastError(f"contrast must be a 2-d matrix, got shape {C.shape}")
    if C.shape[1] != d:
        raise ContrastError(f"contrast has {C.shape[1]} columns but the design has {d} groups")
    if not np.all(np.isfinite(C)):
        raise ContrastError("contrast entries must be finite")
    sums = C.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums) > tol)
    if bad.size:
        r = int(bad[0])
        raise ContrastError(f"row {r + 1} of the contrast sums to {sums[r]:.6g}, not 0")
    return Contrast(C, kind)


def contrast_for(kind, d: int, layout=None) -> Contrast:
    """Named contrast for a design with ``d`` groups and an optional two-way layout."""
    kind = ContrastKind(kind)
    if kind is ContrastKind.ONE_WAY_GLOBAL:
        return global_contrast(d)
    if kind is ContrastKind.CUSTOM:
        raise ContrastError("custom contrasts need an explicit matrix")
    if layout is None or not layout.is_two_way:
        raise ContrastError(f"the {kind.value} contrast needs a two-way layout")
    return two_way_contrasts(layout.a, layout.b)[kind]


def load_contrast_csv(path, d: int) -> Contrast:
    """Read a header-less CSV holding an ``r x d`` contrast matrix."""
    try:
        C = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ContrastError(f"could not parse contrast file {path}: {exc}") from None
    return validate_contrast(C, d)
