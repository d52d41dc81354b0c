"""recosim: opinion dynamics on an adaptive weighted network under
recommendation strategies, with seed-exact reproducibility."""

from .sampling import PowerLawSpec, RngStream, fluctuation, power_law_weight, uniform
from .state import (Opinion, SimParams, SimulationState, distance,
                    exposed_average, init_network)
from .recommend import ExposureSet, compute_exposures
from .dynamics import RoundUpdate, generate_opinion, run_round
from .metrics import (MetricsRecord, community_state_std, eccentricity,
                      louvain, modularity, record_round_metrics, symmetrize)
from .stats import MannWhitneyResult, mann_whitney_u
from .harness import (ExperimentConfig, RunResult, RunSpec, compare_strategies,
                      execute, expand_grid, load_preset, persist, sweep)

__version__ = "0.1.0"
