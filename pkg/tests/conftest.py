import math

import numpy as np
import pytest

from wtail.core import EstimatorSpec, Family, SortedSample, wtc
from wtail.models import MODEL_IDS, SeededStream, get_model, sample

E = math.e

SIX_MODELS = tuple(
    get_model(mid) for mid in MODEL_IDS if mid != "logistic"
)


@pytest.fixture
def geometric_sample() -> SortedSample:
    """[1, e, e^2, e^3]: log-excesses at k=3 are exactly [3, 2, 1]."""
    return SortedSample([1.0, E, E**2, E**3])


@pytest.fixture(params=[mid for mid in MODEL_IDS if mid != "logistic"])
def model(request):
    return get_model(request.param)


def draw(model_id: str, n: int, seed: int, rep: int = 0) -> SortedSample:
    return sample(get_model(model_id), n, SeededStream(seed, rep))


def naive_curve(s: SortedSample, spec: EstimatorSpec) -> np.ndarray:
    """Brute-force per-k recomputation through the scalar estimator path."""
    out = np.empty(s.n - 1)
    for k in range(1, s.n):
        try:
            out[k - 1] = wtc(s, k, spec)
        except Exception:
            out[k - 1] = np.nan
    return out


def all_family_specs(ps) -> list[EstimatorSpec]:
    """All (family, p) combinations, skipping p outside a tilde domain."""
    specs = []
    for family in Family:
        for p in ps:
            if family.is_tilde and (p <= -1.0 or p == 0.0):
                continue
            specs.append(EstimatorSpec(family, p))
    return specs
