"""Random covering of the circle with non-uniformly distributed centers.

Core objects: piecewise degree<=1 densities (`density`), decreasing length
sequences and their series criteria (`sequences`, `blocks`), the covering
kernel and energy integrals (`capacity`), seeded covering trials and their
exact first-moment oracle (`coversim`, `coupling`), and experiment recipes
with a CLI front end (`harness`, `cli`).

Hot kernels are numba-compiled with a pure-numpy fallback; set
CIRCLECOVER_NO_NUMBA=1 to force the fallback.
"""

from ._accel import BACKEND
from .arcset import ArcSet, circle_dist, mod1
from .density import (DensityAnalysis, FlatnessReport, PiecewisePolyDensity,
                      analyze, borel_cantelli_point, flatness_partial)
from .sequences import (Constant, Explicit, Harmonic, LengthSequence,
                        LogHarmonic, Power, parse_sequence, shepp_classify,
                        shepp_partial)
from .blocks import BlockSequence, block_sequence_A, block_sequence_B
from .capacity import (CoveringKernel, EnergyEstimate, SupportMeasure,
                       cap_zero_heuristic, energy, energy_series_equivalence)
from .coversim import (TrialConfig, TrialResult, billard_moments,
                       expected_uncovered_exact, log_checkpoints, run_trial,
                       run_trials)
from .coupling import (ComparisonReport, CoupledModel, comparison_experiment,
                       coupled_centers, run_coupled_trial)
from .harness import (SweepResult, block_report, criteria_independence,
                      criteria_report, emit, phase_transition_sweep,
                      read_jsonl)

__version__ = "0.1.0"
