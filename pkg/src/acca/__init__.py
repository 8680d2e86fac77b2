"""Circular midpoint opinion dynamics with bi-modal noise and parallel updates."""

from .circle import PI, TWO_PI, WINDING_TOL, Kind, Topology, circ_increment, rounded_winding, winding_number, wrap_pi
from .dynamics import StepParams, acca_step, make_rng, midpoint_update, noise_kick, noisy_step, parallel_step
from .errors import DomainError, NumericError, UsageError
from .harness import (DEFAULT_GRID, LateTimeSummary, SimulationParams, SweepGrid, SweepResult, TimeSeries,
                      count_flips, late_time_average, run_conditioned, run_simulation, sweep)
from .matching import count_matchings, sample_matching, sample_subset
from .observables import (KuramotoOrder, alternating_odd_sum, ideal_winding, kuramoto, tau1_config,
                          tau1_pair_estimate, tau1_theory, y_projection)

__version__ = "0.1.0"
