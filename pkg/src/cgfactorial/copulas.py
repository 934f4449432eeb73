"""Archimedean copula families used to model dependent censoring.

Every family here is parametrised so that ``theta = 0`` (or the limit
``theta -> 0``) is the independence copula. Note the Gumbel convention: the
generator is ``(-log t) ** (theta + 1)``, so ``theta = 0`` is independence and
Kendall's tau is ``theta / (theta + 1)``. This differs from the more common
parametrisation with exponent ``theta``.

FGM is kept in the catalog for its Kendall's tau only. It is not
Archimedean, so asking for its generator raises :class:`NonArchimedeanError`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .exceptions import CopulaDomainError, NonArchimedeanError

# |theta| below this is treated as the independence limit.
THETA_ZERO_TOL = 1e-12


class Family(str, enum.Enum):
    INDEPENDENCE = "independence"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"
    FGM = "fgm"


_RANGES = {
    Family.CLAYTON: "theta > 0 (theta = 0 is independence)",
    Family.GUMBEL: "theta >= 0",
    Family.FRANK: "theta != 0 (theta = 0 is independence)",
    Family.FGM: "-1 <= theta <= 1",
}


@dataclass(frozen=True)
class CopulaSpec:
    """A validated copula family together with its dependence parameter.

    Build instances with :func:`make_copula`, which checks the parameter range
    and folds the ``theta -> 0`` limits into :attr:`Family.INDEPENDENCE`.
    """

    family: Family
    theta: float = 0.0

    @property
    def is_archimedean(self) -> bool:
        return self.family is not Family.FGM

    def generator(self, t):
        return generator(self, t)

    def generator_inverse(self, s):
        return generator_inverse(self, s)

    @property
    def kendalls_tau(self) -> float:
        return kendalls_tau(self)

    def __str__(self) -> str:
        if self.family is Family.INDEPENDENCE:
            return "independence"
        return f"{self.family.value}(theta={self.theta:g})"


INDEPENDENCE = CopulaSpec(Family.INDEPENDENCE, 0.0)


def make_copula(family, theta: float = 0.0) -> CopulaSpec:
    """Validate ``theta`` for ``family`` and return a :class:`CopulaSpec`.

    Clayton, Gumbel and Frank with ``|theta| < 1e-12`` normalise to the
    independence copula. ``family`` may be a :class:`Family` or its string
    value (case-insensitive).
    """
    if isinstance(family, CopulaSpec):
        return family
    try:
        family = Family(family.lower() if isinstance(family, str) else family)
    except ValueError:
        names = ", ".join(f.value for f in Family)
        raise CopulaDomainError(f"unknown copula family {family!r}; expected one of {names}") from None
    theta = float(theta)
    if not math.isfinite(theta):
        raise CopulaDomainError(f"{family.value} copula requires a finite theta, got {theta}")

    if family is Family.INDEPENDENCE:
        return INDEPENDENCE
    if family is Family.FGM:
        if not -1.0 <= theta <= 1.0:
            raise CopulaDomainError(f"FGM copula requires {_RANGES[family]}, got theta={theta}")
        return CopulaSpec(family, theta)
    if family in (Family.CLAYTON, Family.GUMBEL) and theta < 0:
        raise CopulaDomainError(
            f"{family.value.capitalize()} copula requires {_RANGES[family]}, got theta={theta}"
        )
    if abs(theta) < THETA_ZERO_TOL:
        return INDEPENDENCE
    return CopulaSpec(family, theta)


def _require_generator(c: CopulaSpec) -> None:
    if not c.is_archimedean:
        raise NonArchimedeanError(
            "the FGM copula is not Archimedean and has no generator; "
            "use independence, clayton, gumbel or frank"
        )


def _phi(c: CopulaSpec, t):
    """Generator on [0, 1] without argument checks; phi(0) is +inf."""
    fam, th = c.family, c.theta
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if fam is Family.INDEPENDENCE:
            out = -np.log(t)
        elif fam is Family.CLAYTON:
            out = np.expm1(-th * np.log(t)) / th
        elif fam is Family.GUMBEL:
            out = (-np.log(t)) ** (th + 1.0)
        elif fam is Family.FRANK:
            if th > 0:
                out = np.log(-np.expm1(-th)) - np.log(-np.expm1(-th * t))
            else:
                a = -th
                out = np.log(np.expm1(a)) - np.log(np.expm1(a * t))
        else:
            _require_generator(c)
    # -log(1) can come out as -0.0
    return out + 0.0


def _phi_inv(c: CopulaSpec, s):
    """Generator inverse on [0, inf] without argument checks."""
    fam, th = c.family, c.theta
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if fam is Family.INDEPENDENCE:
            out = np.exp(-s)
        elif fam is Family.CLAYTON:
            out = np.exp(-np.log1p(th * s) / th)
        elif fam is Family.GUMBEL:
            out = np.exp(-(s ** (1.0 / (th + 1.0))))
        elif fam is Family.FRANK:
            out = -np.log1p(np.exp(-s) * np.expm1(-th)) / th
        else:
            _require_generator(c)
    return np.clip(out, 0.0, 1.0)


def generator(c: CopulaSpec, t):
    """Evaluate the generator phi(t) for ``0 < t <= 1``.

    Works elementwise on arrays. Values too large to represent come back as
    ``inf``.
    """
    _require_generator(c)
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)) or np.any(arr > 1):
        raise CopulaDomainError("generator argument must lie in (0, 1]")
    out = _phi(c, arr)
    return float(out) if out.ndim == 0 else out


def generator_inverse(c: CopulaSpec, s):
    """Evaluate phi^{-1}(s) for ``s >= 0``; ``s = inf`` maps to 0."""
    _require_generator(c)
    arr = np.asarray(s, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise CopulaDomainError("generator inverse argument must be >= 0")
    out = _phi_inv(c, arr)
    return float(out) if out.ndim == 0 else out


def _debye1(theta: float) -> float:
    # (1/theta) * int_0^theta t / (e^t - 1) dt
    def f(t):
        return 1.0 if t == 0.0 else t / math.expm1(t)

    val, _ = integrate.quad(f, 0.0, theta, epsabs=1e-10, epsrel=1e-12, limit=200)
    return val / theta


def kendalls_tau(c: CopulaSpec) -> float:
    """Kendall's tau implied by the copula."""
    fam, th = c.family, c.theta
    if fam is Family.INDEPENDENCE:
        return 0.0
    if fam is Family.CLAYTON:
        return th / (th + 2.0)
    if fam is Family.GUMBEL:
        return th / (th + 1.0)
    if fam is Family.FGM:
        return 2.0 * th / 9.0
    if abs(th) < 1e-2:
        # series of the Debye form; the quadrature cancels badly near 0
        return th / 9.0 - th**3 / 900.0 + th**5 / 52920.0
    return 1.0 - 4.0 / th * (1.0 - _debye1(th))


def theta_from_tau(family, tau: float) -> float:
    """Invert :func:`kendalls_tau` for a family.

    Attainable ranges: Clayton and Gumbel ``[0, 1)``, Frank ``(-1, 1)``,
    FGM ``[-2/9, 2/9]``, independence ``{0}``. Frank is solved with Brent's
    method.
    """
    family = Family(family.lower() if isinstance(family, str) else family)
    tau = float(tau)

    def bad(rng):
        return CopulaDomainError(f"Kendall's tau {tau} is not attainable by the {family.value} copula ({rng})")

    if family is Family.INDEPENDENCE:
        if tau != 0.0:
            raise bad("tau = 0 only")
        return 0.0
    if family is Family.CLAYTON:
        if not 0.0 <= tau < 1.0:
            raise bad("0 <= tau < 1")
        return 2.0 * tau / (1.0 - tau)
    if family is Family.GUMBEL:
        if not 0.0 <= tau < 1.0:
            raise bad("0 <= tau < 1")
        return tau / (1.0 - tau)
    if family is Family.FGM:
        if not -2.0 / 9.0 <= tau <= 2.0 / 9.0:
            raise bad("-2/9 <= tau <= 2/9")
        return 4.5 * tau

    if not -1.0 < tau < 1.0:
        raise bad("-1 < tau < 1")
    if tau == 0.0:
        return 0.0
    sign = 1.0 if tau > 0 else -1.0

    def g(th):
        return kendalls_tau(CopulaSpec(Family.FRANK, sign * th)) - tau

    hi = 1.0
    while g(hi) * sign < 0:
        hi *= 2.0
        if hi > 1e6:
            raise bad("too close to +/-1 to resolve")
    root = optimize.brentq(g, 1e-10, hi, xtol=1e-14, rtol=1e-15, maxiter=500)
    return sign * root
