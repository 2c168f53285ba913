"""Excess statistics, generalized means, and the four WTC estimator families.

Everything in this module is a pure function of a :class:`SortedSample`
(immutable, ascending, strictly positive) plus the number ``k`` of upper
order statistics used.  The two building blocks are the log-excesses

    V[i] = ln X_{n-i+1:n} - ln X_{n-k:n},    i = 1..k,

and the relative excesses U[i] = X_{n-i+1:n} / X_{n-k:n} = exp(V[i]).
Two generalized means of these excesses (a Gamma-normalized power mean of
the V's and an order-p mean transform of the U's) are turned into tail
estimates by one of two deterministic normalizing sequences: ``ln(n/k)``
(the "GG" variant) or the log-log spacing average returned by
:func:`t_seq_g` (the "G" variant).  The four combinations are addressed
through :class:`EstimatorSpec`.

Curve evaluation over all k is incremental: prefix sums for the averages
of V, a running log-sum-exp for the means of U**p (exact O(n) updates),
and a single vectorized sweep of the top-k block for general-p power
means of V, where the shifted base makes an exact O(1) update impossible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, KRangeError, ParameterError

__all__ = [
    "Family",
    "SortedSample",
    "EstimatorSpec",
    "ExcessVectors",
    "excesses",
    "hill",
    "pm",
    "hp",
    "t_seq_g",
    "t_seq_g_curve",
    "wtc",
    "wtc_curve",
]


class Family(str, Enum):
    """Estimator family tag: mean type (hat/tilde) x normalization (G/GG).

    ``hat`` families transform the relative excesses (order-p mean of U),
    ``tilde`` families transform the log-excesses (power mean of V).
    ``GG`` families multiply the mean by ln(n/k); ``G`` families divide
    it by the log-log spacing sequence of :func:`t_seq_g`.
    """

    HAT_G = "hatG"
    HAT_GG = "hatGG"
    TILDE_G = "tildeG"
    TILDE_GG = "tildeGG"

    @property
    def is_tilde(self) -> bool:
        return self in (Family.TILDE_G, Family.TILDE_GG)

    @property
    def is_gg(self) -> bool:
        return self in (Family.HAT_GG, Family.TILDE_GG)


@dataclass(frozen=True, eq=False)
class SortedSample:
    """Ascending, strictly positive sample with optional provenance.

    The constructor sorts its input, so building one from any permutation
    of the same raw values yields identical estimates.  Instances are
    immutable and safe to share across threads.

    Args:
        values: array-like of strictly positive, finite reals (any order).
        origin: optional provenance tag, e.g. ``(model_id, (seed, rep))``.
    """

    values: np.ndarray
    origin: tuple | None = None

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=np.float64))
        if v.size < 2:
            raise DomainError(f"need at least 2 observations, got {v.size}")
        if not np.isfinite(v).all():
            raise DomainError("sample contains non-finite values")
        if v[0] <= 0.0:
            raise DomainError(
                "sample values must be strictly positive (log-excesses "
                "require ln X); truncate before constructing the sample"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        log_desc = np.log(v[::-1])
        log_desc.setflags(write=False)
        object.__setattr__(self, "_log_desc", log_desc)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def log_desc(self) -> np.ndarray:
        """ln of the sample in descending order; element j is ln X_{n-j:n}."""
        return self._log_desc  # type: ignore[attr-defined]

    def scaled(self, c: float) -> "SortedSample":
        """Sample multiplied by c > 0 (estimates are invariant under this)."""
        if c <= 0:
            raise DomainError("scale factor must be positive")
        return SortedSample(self.values * c, origin=self.origin)


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator: a family tag plus its tuning exponent p.

    tilde families need p > -1, p != 0 (domain of the Gamma-normalized
    power mean).  hat families accept any real p: in the Weibull-tail
    setting the effective extreme value index is 0, so the heavy-tail
    restriction p < 1/xi never binds (simulations use p as low as -25).
    """

    family: Family
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        if not math.isfinite(self.p):
            raise ParameterError(f"p must be finite, got {self.p}")
        if self.family.is_tilde:
            _check_pm_exponent(self.p)

    @property
    def label(self) -> str:
        """Stable identifier used in CSV headers and configs, e.g. tildeG_p1."""
        return f"{self.family.value}_p{self.p:g}"

    @classmethod
    def from_label(cls, text: str) -> "EstimatorSpec":
        name, sep, ptxt = text.strip().partition("_p")
        try:
            family = Family(name)
        except ValueError:
            family = None
        if family is None or not sep:
            raise ParameterError(
                f"malformed estimator id {text!r}; expected "
                "<family>_p<real> with family in "
                + "/".join(f.value for f in Family)
            )
        try:
            p = float(ptxt)
        except ValueError:
            raise ParameterError(f"malformed exponent in estimator id {text!r}") from None
        return cls(family, p)


@dataclass(frozen=True, eq=False)
class ExcessVectors:
    """Log-excesses V and relative excesses U above the k-th upper threshold.

    Both arrays have length k, are ordered from the sample maximum down to
    the observation just above the threshold, and satisfy V = ln U.
    """

    V: np.ndarray
    U: np.ndarray
    k: int


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n - 1:
        raise KRangeError(f"k must be in [1, {n - 1}] for a sample of size {n}, got {k}")


def _check_pm_exponent(p: float) -> None:
    if p == 0.0:
        raise ParameterError("power mean of the log-excesses is undefined at p=0")
    if p <= -1.0:
        raise ParameterError(f"power mean of the log-excesses needs p > -1, got {p}")


# ---------------------------------------------------------------------------
# scalar operations (single k)
# ---------------------------------------------------------------------------

def excesses(s: SortedSample, k: int) -> ExcessVectors:
    """Log- and relative excesses of the top k observations.

    Args:
        s: the sample.
        k: number of upper order statistics, 1 <= k <= n-1.

    Returns:
        ExcessVectors with V[i-1] = ln X_{n-i+1:n} - ln X_{n-k:n} and
        U[i-1] = X_{n-i+1:n} / X_{n-k:n} for i = 1..k.
    """
    _check_k(s.n, k)
    L = s.log_desc
    V = L[:k] - L[k]
    desc = s.values[::-1]
    U = desc[:k] / desc[k]
    return ExcessVectors(V=V, U=U, k=k)


def hill(s: SortedSample, k: int) -> float:
    """Average of the k log-excesses (equals ln of the geometric mean of U)."""
    _check_k(s.n, k)
    L = s.log_desc
    return float(np.mean(L[:k] - L[k]))


def pm(s: SortedSample, k: int, p: float) -> float:
    """Gamma-normalized power mean of exponent p of the log-excesses.

    Computes (mean(V**p) / Gamma(p+1))**(1/p) for p > -1, p != 0; at p=1
    this is exactly :func:`hill`.  Negative p requires all log-excesses
    to be strictly positive (a tie at the threshold makes V**p blow up).
    """
    _check_pm_exponent(p)
    _check_k(s.n, k)
    L = s.log_desc
    V = L[:k] - L[k]
    if p == 1.0:
        return float(V.mean())
    if p < 0.0 and V[-1] == 0.0:
        raise DomainError(
            f"log-excess tied at the threshold (k={k}); mean of V**p with "
            f"p={p} < 0 is undefined"
        )
    with np.errstate(divide="ignore", over="ignore"):
        m = np.power(V, p).mean()
        return float(np.exp((np.log(m) - gammaln(p + 1.0)) / p))


def hp(s: SortedSample, k: int, p: float) -> float:
    """Order-p mean transform of the relative excesses.

    Returns (1 - mean(U**p)**(-1)) / p for p != 0 and :func:`hill` at
    p = 0, to which it is continuous as p -> 0.
    """
    _check_k(s.n, k)
    if p == 0.0:
        return hill(s, k)
    L = s.log_desc
    V = L[:k] - L[k]
    with np.errstate(over="ignore", divide="ignore"):
        a = np.exp(p * V).mean()
        return float((1.0 - 1.0 / a) / p)


def t_seq_g(n: int, k: int) -> float:
    """Data-free normalizing sequence of the G families.

    (1/k) sum_{i=1..k} ln ln((n+1)/i) - ln ln((n+1)/(k+1)); strictly
    positive for every 1 <= k <= n-1 because each summand dominates the
    subtracted term.
    """
    _check_k(n, k)
    i = np.arange(1, k + 1, dtype=np.float64)
    s = float(np.mean(np.log(np.log((n + 1.0) / i))))
    return s - math.log(math.log((n + 1.0) / (k + 1.0)))


def wtc(s: SortedSample, k: int, spec: EstimatorSpec) -> float:
    """Weibull tail-coefficient estimate for one k and one estimator spec."""
    base = pm(s, k, spec.p) if spec.family.is_tilde else hp(s, k, spec.p)
    if spec.family.is_gg:
        return math.log(s.n / k) * base
    return base / t_seq_g(s.n, k)


# ---------------------------------------------------------------------------
# full curves over k
# ---------------------------------------------------------------------------

@lru_cache(maxsize=128)
def t_seq_g_curve(n: int) -> np.ndarray:
    """t_seq_g(n, k) for k = 1..n-1, cached per n (data-independent)."""
    if n < 2:
        raise KRangeError(f"sample size must be >= 2, got {n}")
    i = np.arange(1, n, dtype=np.float64)
    loglog = np.log(np.log((n + 1.0) / i))
    k = np.arange(1, n, dtype=np.float64)
    curve = np.cumsum(loglog) / k - np.log(np.log((n + 1.0) / (k + 1.0)))
    curve.setflags(write=False)
    return curve


def _hill_curve(L: np.ndarray) -> np.ndarray:
    """Hill estimates for k = 1..n-1 from descending logs; O(n).

    Telescoped as sum_{j<k}(L_j - L_k) = sum_{i<=k} i*(L_{i-1} - L_i):
    nonnegative terms, no cancellation, exactly zero across tied blocks.
    """
    n = L.size
    k = np.arange(1, n, dtype=np.float64)
    weighted_gaps = k * (L[:-1] - L[1:])
    return np.cumsum(weighted_gaps) / k


def _hp_curve(L: np.ndarray, p: float) -> np.ndarray:
    """Order-p transform of mean(U**p) for k = 1..n-1; O(n).

    mean(U**p) over the top k factorizes as exp(-p*T_k) * sum(exp(p*L_j)),
    so a running log-sum-exp of p*L gives an exact incremental update that
    cannot overflow.
    """
    if p == 0.0:
        return _hill_curve(L)
    n = L.size
    k = np.arange(1, n, dtype=np.float64)
    ln_sum = np.logaddexp.accumulate(p * L)
    ln_mean = ln_sum[:-1] - np.log(k) - p * L[1:]
    with np.errstate(over="ignore"):
        return (1.0 - np.exp(-ln_mean)) / p


def _pm_curves(L: np.ndarray, ps) -> dict:
    """Gamma-normalized power-mean curves for each exponent in ps.

    p = 1 reduces to the Hill curve (exact O(n) prefix sums).  For any
    other p the shifted sum sum((L_j - T_k)**p) admits no exact O(1)
    update, so each k is evaluated in one vectorized pass over the top-k
    block; the block subtraction L[:k] - L[k] is shared by all requested
    exponents.  Entries where the mean is undefined (tie at the threshold
    with p < 0) are NaN, never silently zero.
    """
    for p in ps:
        _check_pm_exponent(p)
    n = L.size
    out = {}
    sweep_ps = [p for p in set(ps) if p != 1.0]
    if 1.0 in ps:
        out[1.0] = _hill_curve(L)
    if sweep_ps:
        sums = {p: np.empty(n - 1) for p in sweep_ps}
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            for k in range(1, n):
                V = L[:k] - L[k]
                for p in sweep_ps:
                    sums[p][k - 1] = np.power(V, p).sum()
            kk = np.arange(1, n, dtype=np.float64)
            tie = L[:-1] == L[1:]
            for p in sweep_ps:
                curve = np.exp((np.log(sums[p] / kk) - gammaln(p + 1.0)) / p)
                if p < 0.0:
                    curve[tie] = np.nan
                out[p] = curve
    return out


def _base_curve(L: np.ndarray, spec: EstimatorSpec) -> np.ndarray:
    if spec.family.is_tilde:
        return _pm_curves(L, (spec.p,))[spec.p]
    return _hp_curve(L, spec.p)


def _normalize_curve(base: np.ndarray, n: int, is_gg: bool) -> np.ndarray:
    k = np.arange(1, n, dtype=np.float64)
    if is_gg:
        return np.log(n / k) * base
    return base / t_seq_g_curve(n)


def wtc_curve(
    s: SortedSample,
    spec: EstimatorSpec,
    k_range: tuple[int, int] | None = None,
) -> np.ndarray:
    """Estimates for every k in k_range (default 1..n-1).

    Element j is the estimate at k = k_min + j.  Agreement with per-k
    recomputation through :func:`wtc` is within 1e-9 relative; undefined
    entries are NaN.
    """
    n = s.n
    k_min, k_max = k_range if k_range is not None else (1, n - 1)
    _check_k(n, k_min)
    _check_k(n, k_max)
    if k_min > k_max:
        raise KRangeError(f"empty k range [{k_min}, {k_max}]")
    full = _normalize_curve(_base_curve(s.log_desc, spec), n, spec.family.is_gg)
    return full[k_min - 1 : k_max]
