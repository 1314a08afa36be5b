"""Frequency-domain compressive sampling with support-aware sample allocation."""

from .allocation import (AllocationPlan, Slice, SliceSchedule, allocate_table1, density_profile,
                         estimate_min_samples, horizontal_slices, hu_cumulative_counts,
                         plan_horizontal, plan_vertical, sample_inband, sample_urs)
from .iterative import IterativeResult, IterativeState, StageError, run_iterative, scale_factor
from .projection import (IndexSet, ProjectionOperator, apply_adjoint, apply_rows, complement,
                         extend, extend_vector, measure, suppress_outside)
from .solver import (BasisPursuitProblem, SolutionReport, SolverConfig, soft_threshold,
                     solve_l0_bruteforce, solve_l1, support_of)
from .spectral import (BandSpec, ComplexSignal, SpectrumProfile, band_signal_closed_form, dft,
                       dft_matrix, energy, generate_spectrum, idft, main_lobe_width)

__version__ = "0.1.0"
