"""
Parameter sweeps over the collisional, dephasing and unitary-mixture models.

Each runner takes an [ExperimentConfig][divisio.experiments.ExperimentConfig]
and returns an [ExperimentResult][divisio.experiments.ExperimentResult] whose
CSV columns are fixed per experiment:

| experiment     | columns                                        |
|----------------|------------------------------------------------|
| `collisional`  | `p,cp_distance,p_distance`                     |
| `dephasing`    | `t1,t2,distance`                               |
| `dephasing_hd` | `p,q,distance,identity_flag`                   |
| `unitary_mix`  | `d,n,sample,seed,solve_seconds,distance`       |

JSON output additionally carries the config (seed and tolerance included),
extra per-row fields and a summary.
"""

from divisio.experiments.config import (
    Experiment,
    ExperimentConfig,
    ExperimentConfigError,
    OutputFormat,
    experiment_config,
)
from divisio.experiments.output import ExperimentDocument, ExperimentResult
from divisio.experiments.runners import (
    RUNNERS,
    NonCptpInput,
    TimingRecord,
    run_collisional,
    run_dephasing,
    run_dephasing_hd,
    run_query,
    run_unitary_mix,
    sample_seed,
    timing_summary,
)

__all__ = [
    "RUNNERS",
    "Experiment",
    "ExperimentConfig",
    "ExperimentConfigError",
    "ExperimentDocument",
    "ExperimentResult",
    "NonCptpInput",
    "OutputFormat",
    "TimingRecord",
    "experiment_config",
    "run_collisional",
    "run_dephasing",
    "run_dephasing_hd",
    "run_query",
    "run_unitary_mix",
    "sample_seed",
    "timing_summary",
]
