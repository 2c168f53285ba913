"""Closed-form asymptotic bias, variance, AMSE and optimal exponents.

The dominant asymptotic variance of every family is (theta**2 / k) * v(p)
with v(p) = 1 for the hat families and

    v(p) = (Gamma(2p+1) / Gamma(p+1)**2 - 1) / p**2

for the tilde families.  Squared dominant bias depends on the family and
on the second-order class of the model: closed forms are available for
B(t) = 0 and B(t) = alpha/t; the ln(t)/t class carries no tabulated alpha
here and is rejected.  A callback variant accepts an arbitrary rate
function B for exploratory use.

For the tilde families and alpha/t models the dominant bias vanishes at

    p_opt = 2*alpha/theta - 1   (GG normalization)
    p_opt = 2*alpha/theta + 1   (G normalization)

whenever that value is positive; otherwise no admissible exponent removes
the bias and the computation reports infeasibility as a value, not an
error (e.g. the Logistic model, alpha = -ln 2, is infeasible for both).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.special import gammaln

from .core import Family
from .errors import DomainError, ParameterError, UnsupportedModelError
from .models import SecondOrder

__all__ = [
    "AmseInput",
    "AmseReport",
    "variance_factor",
    "amse",
    "amse_generic",
    "bias_coefficient",
    "optimal_p",
]


@dataclass(frozen=True)
class AmseInput:
    """Inputs of one closed-form AMSE evaluation."""

    family: Family
    p: float
    theta: float
    n: int
    k: int
    second_order: SecondOrder
    alpha: float | None = None

    def __post_init__(self):
        if self.theta <= 0.0:
            raise ParameterError(f"theta must be positive, got {self.theta}")
        if not 1 <= self.k < self.n:
            raise ParameterError(f"need 1 <= k < n, got k={self.k}, n={self.n}")


@dataclass(frozen=True)
class AmseReport:
    bias_sq: float
    variance: float
    amse: float
    variance_factor: float


def variance_factor(family, p: float) -> float:
    """Variance inflation v(p) relative to theta**2/k.

    Accepts a Family or one of the kind strings "hat"/"tilde".  Hat
    families have v(p) = 1 for every p.  Tilde families need p > -1,
    p != 0; the second moment of the limiting mean diverges for
    p <= -1/2, reported as +inf.
    """
    tilde = family.is_tilde if isinstance(family, Family) else _is_tilde_kind(family)
    if not tilde:
        return 1.0
    if p == 0.0 or p <= -1.0:
        raise ParameterError(f"tilde variance factor needs p > -1, p != 0, got {p}")
    if p == 1.0:
        # Gamma(3)/Gamma(2)**2 - 1 = 1: the tilde and hat variances agree.
        return 1.0
    if p <= -0.5:
        return math.inf
    ratio = math.exp(gammaln(2.0 * p + 1.0) - 2.0 * gammaln(p + 1.0))
    return (ratio - 1.0) / (p * p)


def _is_tilde_kind(kind) -> bool:
    text = str(kind).lower()
    if text in ("tilde", "pm"):
        return True
    if text in ("hat", "hp"):
        return False
    raise ParameterError(f"unknown estimator kind {kind!r}; expected 'hat' or 'tilde'")


def _dominant_bias(family: Family, p: float, theta: float, log_ratio: float,
                   second_order: SecondOrder, alpha: float | None) -> float:
    if second_order is SecondOrder.B_ZERO:
        if family is Family.HAT_GG:
            return -theta / log_ratio
        if family is Family.HAT_G:
            return 0.0
        if family is Family.TILDE_GG:
            return -theta * (p + 1.0) / (2.0 * log_ratio)
        return -theta * (p - 1.0) / (2.0 * log_ratio)
    if second_order is SecondOrder.B_ALPHA_OVER_T:
        if alpha is None:
            raise UnsupportedModelError(
                "alpha/t second-order class without a tabulated alpha; "
                "closed-form AMSE unavailable"
            )
        if family is Family.HAT_GG:
            return (alpha - theta) / log_ratio
        if family is Family.HAT_G:
            return alpha / log_ratio
        if family is Family.TILDE_GG:
            return (2.0 * alpha - theta * (p + 1.0)) / (2.0 * log_ratio)
        return (2.0 * alpha - theta * (p - 1.0)) / (2.0 * log_ratio)
    raise UnsupportedModelError(
        f"no closed-form AMSE for second-order class {second_order.value!r}"
    )


def amse(inp: AmseInput) -> AmseReport:
    """Dominant AMSE = squared asymptotic bias + asymptotic variance."""
    log_ratio = math.log(inp.n / inp.k)
    bias = _dominant_bias(
        inp.family, inp.p, inp.theta, log_ratio, inp.second_order, inp.alpha
    )
    vf = variance_factor(inp.family, inp.p)
    variance = inp.theta * inp.theta / inp.k * vf
    return AmseReport(
        bias_sq=bias * bias,
        variance=variance,
        amse=bias * bias + variance,
        variance_factor=vf,
    )


def amse_generic(
    family: Family,
    p: float,
    theta: float,
    n: int,
    k: int,
    rate_fn: Callable[[float], float],
) -> AmseReport:
    """AMSE with a caller-supplied second-order rate function B.

    Uses the family-independent leading form (B(ln(n/k)) / theta)**2 for
    the squared bias; only the variance distinguishes hat from tilde at
    this level.
    """
    if theta <= 0.0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if not 1 <= k < n:
        raise ParameterError(f"need 1 <= k < n, got k={k}, n={n}")
    b = rate_fn(math.log(n / k)) / theta
    vf = variance_factor(family, p)
    variance = theta * theta / k * vf
    return AmseReport(bias_sq=b * b, variance=variance, amse=b * b + variance,
                      variance_factor=vf)


def bias_coefficient(
    family: Family,
    p: float,
    theta: float,
    alpha: float | None = None,
    second_order: SecondOrder = SecondOrder.B_ALPHA_OVER_T,
) -> float:
    """Normalized dominant-bias coefficient of the tilde families.

    alpha/t class: (2*alpha - theta*(p+1)) / (2*alpha) for GG and the
    (p-1) analogue for G, i.e. the factor multiplying the bias scale;
    zero exactly at the optimal exponent.  B = 0 class: -theta*(p+1)/2
    (GG) and -theta*(p-1)/2 (G).
    """
    if family not in (Family.TILDE_G, Family.TILDE_GG):
        raise ParameterError("bias coefficient is defined for the tilde families")
    if theta <= 0.0:
        raise ParameterError(f"theta must be positive, got {theta}")
    shift = 1.0 if family is Family.TILDE_GG else -1.0
    if second_order is SecondOrder.B_ZERO:
        return -theta * (p + shift) / 2.0
    if second_order is SecondOrder.B_ALPHA_OVER_T:
        if alpha is None:
            raise UnsupportedModelError("alpha/t class without a tabulated alpha")
        if alpha == 0.0:
            raise DomainError("bias coefficient is undefined at alpha = 0")
        return (2.0 * alpha - theta * (p + shift)) / (2.0 * alpha)
    raise UnsupportedModelError(
        f"no bias coefficient for second-order class {second_order.value!r}"
    )


def optimal_p(family: Family, alpha: float, theta: float) -> float | None:
    """Exponent cancelling the dominant bias for an alpha/t model.

    Returns None when the formula value is not positive (infeasible);
    only the tilde families admit an optimal exponent.
    """
    if family not in (Family.TILDE_G, Family.TILDE_GG):
        raise ParameterError("optimal exponent is defined for the tilde families")
    if theta <= 0.0:
        raise ParameterError(f"theta must be positive, got {theta}")
    value = 2.0 * alpha / theta + (1.0 if family is Family.TILDE_G else -1.0)
    return value if value > 0.0 else None
