"""Test distributions with known tail coefficient and second-order class.

Six models drive the Monte-Carlo comparison (standard Exponential,
Weibull(2,1), Gamma(0.75,1), Half-Normal, standard Gumbel, Half-Logistic);
the Logistic and location-shifted Gumbel are included as well because
their slow-variation constants make the optimal-exponent formulas of the
asymptotics module interesting.  Each model carries its true tail
coefficient theta and the class of the rate function controlling
second-order bias:

  * B_ZERO          - no second-order term (Exponential, Weibull);
  * B_ALPHA_OVER_T  - B(t) = alpha/t (Logistic: alpha = -ln 2;
                      Gumbel with location mu: alpha = -mu);
  * B_LOG_OVER_T    - B(t) proportional to ln(t)/t (Gamma, Half-Normal);
                      no scalar alpha is carried for this class.

Sampling is reproducible: a (experiment_seed, replication_index) pair maps
injectively to an independent generator state, so distinct replications
never share a stream and reruns are bit-identical.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammainc, ndtr

from .core import SortedSample
from .errors import DegenerateSampleError, DomainError, ParameterError

__all__ = [
    "SecondOrder",
    "ModelSpec",
    "SeededStream",
    "MODEL_IDS",
    "get_model",
    "sample",
    "true_theta",
    "second_order_info",
    "quantile",
    "cdf",
]

_LN2 = math.log(2.0)


class SecondOrder(Enum):
    B_ZERO = "b=0"
    B_ALPHA_OVER_T = "b=alpha/t"
    B_LOG_OVER_T = "b~log(t)/t"


@dataclass(frozen=True)
class ModelSpec:
    """Identity, ground truth and sampling traits of one test model."""

    id: str                      # stable CLI identifier
    kind: str                    # sampler dispatch key
    theta: float
    second_order: SecondOrder
    alpha: float | None          # only for B_ALPHA_OVER_T (None: untabulated)
    beta: float                  # -inf when B(t) = 0
    mu: float = 0.0              # Gumbel location
    truncate_nonpositive: bool = False


def _gumbel(mu: float) -> ModelSpec:
    mid = "gumbel" if mu == 0.0 else f"gumbel(mu={mu:g})"
    return ModelSpec(
        id=mid, kind="gumbel", theta=1.0,
        second_order=SecondOrder.B_ALPHA_OVER_T, alpha=-mu, beta=-1.0,
        mu=mu, truncate_nonpositive=True,
    )


_REGISTRY = {
    m.id: m
    for m in (
        ModelSpec("exponential", "exponential", 1.0, SecondOrder.B_ZERO, None, -math.inf),
        ModelSpec("weibull(2,1)", "weibull", 0.5, SecondOrder.B_ZERO, None, -math.inf),
        ModelSpec("gamma(0.75,1)", "gamma", 1.0, SecondOrder.B_LOG_OVER_T, None, -1.0),
        ModelSpec("half-normal", "half-normal", 0.5, SecondOrder.B_LOG_OVER_T, None, -1.0),
        _gumbel(0.0),
        # Half-Logistic: known to sit in the alpha/t class but its alpha is
        # not tabulated here; closed-form AMSE computations reject it.
        ModelSpec("half-logistic", "half-logistic", 1.0, SecondOrder.B_ALPHA_OVER_T, None, -1.0),
        ModelSpec("logistic", "logistic", 1.0, SecondOrder.B_ALPHA_OVER_T, -_LN2, -1.0,
                  truncate_nonpositive=True),
    )
}

MODEL_IDS = tuple(_REGISTRY)

_GUMBEL_MU_RE = re.compile(r"^gumbel\(\s*mu\s*=\s*([-+0-9.eE]+)\s*\)$")


def get_model(name: str) -> ModelSpec:
    """Resolve a stable model identifier, including gumbel(mu=<real>)."""
    key = name.strip().lower().replace(" ", "")
    if key in _REGISTRY:
        return _REGISTRY[key]
    m = _GUMBEL_MU_RE.match(key)
    if m:
        return _gumbel(float(m.group(1)))
    raise ParameterError(
        f"unknown model {name!r}; known: {', '.join(MODEL_IDS)} or gumbel(mu=<real>)"
    )


@dataclass(frozen=True)
class SeededStream:
    """Pure, injective (experiment_seed, replication_index) -> RNG state.

    Built on numpy's SeedSequence spawn keys, so two distinct replication
    indices never share a stream and the mapping is stable across runs
    and machines for a fixed numpy version.
    """

    experiment_seed: int
    replication_index: int

    def __post_init__(self):
        if self.replication_index < 0:
            raise ParameterError("replication_index must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.experiment_seed, spawn_key=(self.replication_index,)
        )
        return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# quantiles, CDFs, samplers
# ---------------------------------------------------------------------------

def quantile(model: ModelSpec, u) -> np.ndarray | float:
    """Inverse CDF at u in (0,1) for the closed-form models.

    Gamma and Half-Normal are not sampled by inversion and are rejected.
    """
    u = np.asarray(u, dtype=np.float64)
    if np.any((u < 0.0) | (u >= 1.0)):
        raise DomainError("quantile argument must lie in [0, 1)")
    kind = model.kind
    if kind == "exponential":
        return -np.log1p(-u)
    if kind == "weibull":
        return np.sqrt(-np.log1p(-u))
    if kind == "gumbel":
        with np.errstate(divide="ignore"):
            return model.mu - np.log(-np.log(u))
    if kind == "half-logistic":
        return np.log1p(u) - np.log1p(-u)
    if kind == "logistic":
        with np.errstate(divide="ignore"):
            return np.log(u) - np.log1p(-u)
    raise ParameterError(f"model {model.id!r} has no closed-form quantile")


def cdf(model: ModelSpec, x) -> np.ndarray | float:
    """CDF of the raw (untruncated) model at x."""
    x = np.asarray(x, dtype=np.float64)
    kind = model.kind
    if kind == "exponential":
        return -np.expm1(-np.maximum(x, 0.0))
    if kind == "weibull":
        return -np.expm1(-np.maximum(x, 0.0) ** 2)
    if kind == "gamma":
        return gammainc(0.75, np.maximum(x, 0.0))
    if kind == "half-normal":
        return np.where(x <= 0.0, 0.0, 2.0 * ndtr(x) - 1.0)
    if kind == "gumbel":
        return np.exp(-np.exp(-(x - model.mu)))
    if kind == "half-logistic":
        return np.where(x <= 0.0, 0.0, np.tanh(x / 2.0))
    if kind == "logistic":
        return 1.0 / (1.0 + np.exp(-x))
    raise ParameterError(f"unknown model kind {model.kind!r}")


def _raw_draws(model: ModelSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """n IID draws from the untruncated model."""
    kind = model.kind
    if kind == "gamma":
        return rng.standard_gamma(0.75, size=n)
    if kind == "half-normal":
        return np.abs(rng.standard_normal(n))
    u = rng.random(n)
    # u = 0.0 occurs with probability 2**-53 per draw; nudge it into the
    # open interval so inverse-CDF models never emit an exact zero/-inf.
    u = np.maximum(u, np.finfo(np.float64).tiny)
    return quantile(model, u)


def sample(model: ModelSpec, n: int, stream: SeededStream) -> SortedSample:
    """Draw a replication sample, sorted ascending and strictly positive.

    Models supported on the whole real line (Gumbel, Logistic) keep only
    their positive draws, so the working sample may be smaller than n.

    Raises:
        DegenerateSampleError: fewer than 2 positive values survived.
    """
    if n < 2:
        raise ParameterError(f"sample size must be >= 2, got {n}")
    draws = _raw_draws(model, stream.generator(), n)
    if model.truncate_nonpositive:
        draws = draws[draws > 0.0]
        if draws.size < 2:
            raise DegenerateSampleError(
                f"{model.id}: only {draws.size} positive values out of {n} draws "
                f"(seed={stream.experiment_seed}, rep={stream.replication_index})"
            )
    return SortedSample(
        draws,
        origin=(model.id, (stream.experiment_seed, stream.replication_index)),
    )


def true_theta(model: ModelSpec) -> float:
    return model.theta


def second_order_info(model: ModelSpec) -> tuple[SecondOrder, float | None, float]:
    """(second-order class, alpha when tabulated, regular-variation index beta)."""
    return model.second_order, model.alpha, model.beta
