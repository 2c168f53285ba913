"""Semi-parametric Weibull tail-coefficient estimation toolkit.

Public surface:

* :mod:`wtail.core` - excess statistics, generalized means, the four
  estimator families, and incremental full-k curves;
* :mod:`wtail.models` - the test distributions, their ground truth, and
  reproducible seeded sampling;
* :mod:`wtail.asymptotics` - closed-form bias/variance/AMSE and optimal
  tuning exponents;
* :mod:`wtail.engine` - the deterministic parallel Monte-Carlo harness;
* :mod:`wtail.cli` - the ``wtail`` command (curves, tables, asymptotics,
  selftest).
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    EstimatorSpec,
    ExcessVectors,
    Family,
    SortedSample,
    excesses,
    hill,
    hp,
    pm,
    t_seq_g,
    wtc,
    wtc_curve,
)
from .engine import (  # noqa: F401
    CurveSet,
    ExperimentConfig,
    OptimalSummary,
    optimal_level,
    replication_estimates,
    run_experiment,
)
from .models import (  # noqa: F401
    ModelSpec,
    SecondOrder,
    SeededStream,
    get_model,
    sample,
    second_order_info,
    true_theta,
)
from .asymptotics import (  # noqa: F401
    AmseInput,
    AmseReport,
    amse,
    amse_generic,
    bias_coefficient,
    optimal_p,
    variance_factor,
)
