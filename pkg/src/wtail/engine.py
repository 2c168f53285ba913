"""Deterministic, parallel Monte-Carlo replication of estimator curves.

A run draws ``replications`` independent samples of one model, evaluates
every requested estimator on the full k grid of each sample, and streams
the results into per-k aggregates (mean, RMSE about the true theta, and a
fourth central power used for standard-error diagnostics).  Memory is
O(#k * #estimators) regardless of the replication count.

Determinism contract: replication r always uses the stream derived from
(experiment_seed, r); replications are grouped into fixed-size blocks,
each block is accumulated in index order by a single worker, and block
partials are reduced in block order with compensated summation.  The
aggregate is therefore bit-identical for any worker count.

Replications whose estimate is undefined at some k (truncated sample too
short, tie-induced domain failure) are excluded from that k's aggregates
only; a replication whose sample is degenerate outright is skipped and
logged with its index.
"""

from __future__ import annotations

import logging
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field

import numpy as np

from .core import EstimatorSpec, SortedSample, _hp_curve, _pm_curves, _normalize_curve
from .errors import DegenerateRunError, DegenerateSampleError, ParameterError
from .models import ModelSpec, SeededStream, sample

__all__ = [
    "ExperimentConfig",
    "CurveSet",
    "OptimalSummary",
    "REPLICATION_BLOCK",
    "run_experiment",
    "replication_estimates",
    "optimal_level",
    "mean_se",
    "rmse_se",
]

logger = logging.getLogger(__name__)

REPLICATION_BLOCK = 25
"""Replications per accumulation block; fixed so that the reduction order
never depends on the worker count."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One (model, n) Monte-Carlo experiment."""

    model: ModelSpec
    n: int
    replications: int
    estimators: tuple[EstimatorSpec, ...]
    experiment_seed: int
    k_range: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.n < 2:
            raise ParameterError(f"sample size must be >= 2, got {self.n}")
        if self.replications < 1:
            raise ParameterError(f"need at least one replication, got {self.replications}")
        if not self.estimators:
            raise ParameterError("estimator list is empty")
        lo, hi = self.k_bounds
        if not (1 <= lo <= hi <= self.n - 1):
            raise ParameterError(
                f"k range [{lo}, {hi}] not within [1, {self.n - 1}]"
            )

    @property
    def k_bounds(self) -> tuple[int, int]:
        return self.k_range if self.k_range is not None else (1, self.n - 1)


@dataclass(eq=False)
class CurveSet:
    """Per-k Monte-Carlo aggregates for one estimator.

    ``dev4`` is the mean fourth power of the deviation from theta over the
    defined replications; it exists only to let callers attach a standard
    error to the RMSE curve.
    """

    k: np.ndarray
    mean: np.ndarray
    rmse: np.ndarray
    defined_count: np.ndarray
    n: int
    dev4: np.ndarray | None = None


@dataclass(frozen=True)
class OptimalSummary:
    """Location and value of the RMSE minimum of one curve."""

    k_hat: int
    osf: float
    mean_at_opt: float
    rmse_at_opt: float


# ---------------------------------------------------------------------------
# per-replication evaluation
# ---------------------------------------------------------------------------

def estimates_for_sample(
    s: SortedSample,
    estimators,
    nominal_n: int | None = None,
) -> dict[EstimatorSpec, np.ndarray]:
    """Curves of every estimator on one sample, padded to a nominal k grid.

    The power-mean sweep over the top-k block is shared by all tilde
    exponents, and each distinct (mean type, p) base curve is computed
    once even when both normalizations request it.  k values beyond the
    working sample (shorter after truncation) are NaN.
    """
    m = s.n
    grid_len = (nominal_n if nominal_n is not None else m) - 1
    L = s.log_desc

    specs = list(dict.fromkeys(estimators))
    tilde_ps = {spec.p for spec in specs if spec.family.is_tilde}
    tilde_base = _pm_curves(L, tuple(tilde_ps)) if tilde_ps else {}
    hat_base: dict[float, np.ndarray] = {}

    out: dict[EstimatorSpec, np.ndarray] = {}
    for spec in specs:
        if spec.family.is_tilde:
            curve = tilde_base[spec.p]
        else:
            if spec.p not in hat_base:
                hat_base[spec.p] = _hp_curve(L, spec.p)
            curve = hat_base[spec.p]
        curve = _normalize_curve(curve, m, spec.family.is_gg)
        if grid_len > m - 1:
            curve = np.concatenate(
                [curve, np.full(grid_len - (m - 1), np.nan)]
            )
        elif grid_len < m - 1:
            curve = curve[:grid_len]
        out[spec] = curve
    return out


def replication_estimates(
    model: ModelSpec,
    n: int,
    stream: SeededStream,
    estimators,
) -> dict[EstimatorSpec, np.ndarray]:
    """Draw one sample and evaluate every estimator curve on it.

    All estimators share the sample and its sort.  The returned arrays
    cover k = 1..n-1 of the nominal n; for a truncation-shortened sample
    the unreachable tail is NaN.

    Raises:
        DegenerateSampleError: the sample has fewer than 2 positive values.
    """
    specs = [s if isinstance(s, EstimatorSpec) else EstimatorSpec(*s) for s in estimators]
    s = sample(model, n, stream)
    return estimates_for_sample(s, specs, nominal_n=n)


# ---------------------------------------------------------------------------
# streaming aggregation
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class _BlockStats:
    """Plain per-block sums, accumulated in replication-index order."""

    sum_x: np.ndarray
    sum_d2: np.ndarray
    sum_d4: np.ndarray
    count: np.ndarray
    skipped: list = field(default_factory=list)


def _accumulate_block(cfg: ExperimentConfig, start: int, stop: int) -> list[_BlockStats]:
    lo, hi = cfg.k_bounds
    width = hi - lo + 1
    theta = cfg.model.theta
    stats = [
        _BlockStats(
            sum_x=np.zeros(width),
            sum_d2=np.zeros(width),
            sum_d4=np.zeros(width),
            count=np.zeros(width, dtype=np.int64),
        )
        for _ in cfg.estimators
    ]
    for rep in range(start, stop):
        stream = SeededStream(cfg.experiment_seed, rep)
        try:
            curves = replication_estimates(cfg.model, cfg.n, stream, cfg.estimators)
        except DegenerateSampleError as exc:
            logger.warning("replication %d skipped: %s", rep, exc)
            for st in stats:
                st.skipped.append(rep)
            continue
        for spec, st in zip(cfg.estimators, stats):
            x = curves[spec][lo - 1 : hi]
            defined = np.isfinite(x)
            xd = np.where(defined, x, 0.0)
            d = np.where(defined, x - theta, 0.0)
            d2 = d * d
            st.sum_x += xd
            st.sum_d2 += d2
            st.sum_d4 += d2 * d2
            st.count += defined
    return stats


def _neumaier_add(total: np.ndarray, comp: np.ndarray, x: np.ndarray) -> np.ndarray:
    t = total + x
    comp += np.where(np.abs(total) >= np.abs(x), (total - t) + x, (x - t) + total)
    return t


def run_experiment(
    cfg: ExperimentConfig,
    workers: int = 1,
    progress=None,
) -> dict[EstimatorSpec, CurveSet]:
    """Run all replications and return one CurveSet per estimator.

    Args:
        cfg: experiment description; estimator specs are validated at
            construction, before any sampling happens.
        workers: process count; the result is bit-identical for any value.
        progress: optional callable(done_replications, total) fired as
            blocks complete.

    The map preserves the order of cfg.estimators (duplicates collapse).
    """
    blocks = [
        (a, min(a + REPLICATION_BLOCK, cfg.replications))
        for a in range(0, cfg.replications, REPLICATION_BLOCK)
    ]
    partials: dict[int, list[_BlockStats]] = {}
    total = cfg.replications

    if workers <= 1 or len(blocks) == 1:
        done = 0
        for idx, (a, b) in enumerate(blocks):
            partials[idx] = _accumulate_block(cfg, a, b)
            done += b - a
            if progress is not None:
                progress(done, total)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_accumulate_block, cfg, a, b): (idx, b - a)
                for idx, (a, b) in enumerate(blocks)
            }
            done = 0
            pending = set(futures)
            while pending:
                finished, pending = wait(pending, return_when=FIRST_COMPLETED)
                for fut in finished:
                    idx, size = futures[fut]
                    partials[idx] = fut.result()
                    done += size
                    if progress is not None:
                        progress(done, total)

    lo, hi = cfg.k_bounds
    width = hi - lo + 1
    unique_specs = list(dict.fromkeys(cfg.estimators))
    result: dict[EstimatorSpec, CurveSet] = {}
    for pos, spec in enumerate(cfg.estimators):
        if spec in result:
            continue
        sum_x = np.zeros(width)
        sum_d2 = np.zeros(width)
        sum_d4 = np.zeros(width)
        comp_x = np.zeros(width)
        comp_d2 = np.zeros(width)
        comp_d4 = np.zeros(width)
        count = np.zeros(width, dtype=np.int64)
        for idx in range(len(blocks)):
            st = partials[idx][pos]
            sum_x = _neumaier_add(sum_x, comp_x, st.sum_x)
            sum_d2 = _neumaier_add(sum_d2, comp_d2, st.sum_d2)
            sum_d4 = _neumaier_add(sum_d4, comp_d4, st.sum_d4)
            count += st.count
        sum_x += comp_x
        sum_d2 += comp_d2
        sum_d4 += comp_d4
        with np.errstate(invalid="ignore", divide="ignore"):
            denom = np.where(count > 0, count, 1).astype(np.float64)
            mean = np.where(count > 0, sum_x / denom, np.nan)
            rmse = np.where(count > 0, np.sqrt(np.maximum(sum_d2, 0.0) / denom), np.nan)
            dev4 = np.where(count > 0, np.maximum(sum_d4, 0.0) / denom, np.nan)
        result[spec] = CurveSet(
            k=np.arange(lo, hi + 1),
            mean=mean,
            rmse=rmse,
            defined_count=count,
            n=cfg.n,
            dev4=dev4,
        )
    assert list(result) == unique_specs
    return result


# ---------------------------------------------------------------------------
# optimal-level summaries
# ---------------------------------------------------------------------------

def optimal_level(curve: CurveSet, replications: int | None = None) -> OptimalSummary:
    """Summary at the k minimizing the simulated RMSE (ties: smallest k).

    When the total replication count is supplied, a minimum located where
    fewer than half of the replications define the estimator fails loudly
    instead of reporting an untrustworthy optimum.
    """
    usable = (curve.defined_count > 0) & np.isfinite(curve.rmse)
    if not usable.any():
        raise DegenerateRunError("curve has no defined k")
    masked = np.where(usable, curve.rmse, np.inf)
    idx = int(np.argmin(masked))
    if replications is not None and curve.defined_count[idx] < 0.5 * replications:
        raise DegenerateRunError(
            f"optimal k={int(curve.k[idx])} is defined in only "
            f"{int(curve.defined_count[idx])}/{replications} replications"
        )
    k_hat = int(curve.k[idx])
    return OptimalSummary(
        k_hat=k_hat,
        osf=k_hat / curve.n,
        mean_at_opt=float(curve.mean[idx]),
        rmse_at_opt=float(curve.rmse[idx]),
    )


def mean_se(curve: CurveSet, theta: float) -> np.ndarray:
    """Standard error of the mean curve, from the stored aggregates."""
    with np.errstate(invalid="ignore", divide="ignore"):
        var = np.maximum(curve.rmse**2 - (curve.mean - theta) ** 2, 0.0)
        return np.sqrt(var / np.maximum(curve.defined_count, 1))


def rmse_se(curve: CurveSet, theta: float) -> np.ndarray:
    """Delta-method standard error of the RMSE curve (needs dev4)."""
    if curve.dev4 is None:
        raise ParameterError("curve carries no fourth-power aggregate")
    m2 = curve.rmse**2
    with np.errstate(invalid="ignore", divide="ignore"):
        var_m2 = np.maximum(curve.dev4 - m2 * m2, 0.0) / np.maximum(curve.defined_count, 1)
        return np.sqrt(var_m2) / (2.0 * curve.rmse)
