"""Staged reconstruction over nested horizontal slices.

Stage m solves an L1 problem on the residual measurements, using every
sample collected up to slice m and forcing all bins outside slice m's
support to zero. A fraction ``f_m`` of that solution is added to the
estimate and removed from the residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .allocation import AllocationPlan, SliceSchedule
from .projection import IndexSet, suppress_outside
from .solver import BasisPursuitProblem, SolutionReport, SolverConfig, solve_l1
from .spectral import ComplexSignal, dft

__all__ = [
    "IterativeState",
    "IterativeResult",
    "StageError",
    "scale_factor",
    "run_iterative",
]


class StageError(RuntimeError):
    """A stage could not be run or its solve did not converge."""

    def __init__(self, stage: int, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


def scale_factor(beta: float) -> float:
    """Per-stage energy ratio ``1 - 2^-beta`` for a ``k^-beta`` spectrum."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return 1.0 - 2.0 ** (-beta)


@dataclass(frozen=True)
class IterativeState:
    stage: int
    estimate: ComplexSignal
    residual_measurements: np.ndarray
    cumulative_samples: IndexSet
    energy_remaining: float
    stage_solution: ComplexSignal
    report: SolutionReport
    rmse: float | None = None
    residual_spectrum: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class IterativeResult:
    report: SolutionReport
    stages: tuple[IterativeState, ...]
    energy_initial: float

    @property
    def stage_rmse(self) -> list[float | None]:
        return [s.rmse for s in self.stages]


MeasurementSource = Callable[[np.ndarray], np.ndarray]


def _as_source(source) -> tuple[MeasurementSource, np.ndarray | None]:
    if callable(source):
        return source, None
    s = source.values if isinstance(source, ComplexSignal) else np.asarray(source, dtype=complex)
    S = dft(s).values
    return (lambda idx: S[idx]), s


def _estimate_energy(plan: AllocationPlan, values: dict[int, complex]) -> float:
    # Stratified Parseval estimate: each set of new draws stands for the part
    # of its support that no earlier slice covered.
    total, prev = 0.0, None
    for drawn, sup in zip(plan.sampled_sets, plan.supports):
        region = sup if prev is None or plan.scheme != "HU" else sup.difference(prev)
        if len(drawn):
            e = sum(abs(values[i]) ** 2 for i in drawn)
            total += len(region) * e / len(drawn)
        prev = sup
    return float(total)


def run_iterative(source, schedule: SliceSchedule, plan: AllocationPlan,
                  stage_factors: Sequence[float] | None = None,
                  config: SolverConfig | None = None,
                  residual_rule: Literal["additive", "literal"] = "additive",
                  require_convergence: bool = False) -> IterativeResult:
    """Slice-by-slice reconstruction with sample reuse.

    Parameters
    ----------
    source : ComplexSignal, array or callable
        Either the true time signal (then per-stage RMSE and residual
        spectra are recorded) or a callable returning spectrum values at
        the requested bins.
    schedule : SliceSchedule
        Nested slices, top first.
    plan : AllocationPlan
        One sample set per slice; HU plans are accumulated.
    stage_factors : sequence of float, optional
        Fraction of each stage solution that is kept. Defaults to
        ``schedule.stage_factors()``.
    residual_rule : {"additive", "literal"}
        ``"additive"`` removes ``f_m`` times the measured stage solution from
        the residual, consistent with adding ``f_m`` of it to the estimate.
        ``"literal"`` removes ``(1 - f_m)`` times it instead.
    require_convergence : bool
        Raise :class:`StageError` when a stage solve does not converge.

    Returns
    -------
    IterativeResult
        Final report (the estimate after the last stage) and per-stage trace.
    """
    config = config or SolverConfig()
    B = len(schedule)
    factors = list(schedule.stage_factors() if stage_factors is None else stage_factors)
    if len(plan.sampled_sets) != B:
        raise ValueError(f"plan has {len(plan.sampled_sets)} sets for {B} slices")
    if len(factors) != B:
        raise ValueError(f"{len(factors)} stage factors for {B} slices")
    if any(not 0 < f <= 1 for f in factors):
        raise ValueError("stage factors must lie in (0, 1]")
    for sup, sl in zip(plan.supports, schedule.slices):
        if not sup.issubset(sl.support):
            raise ValueError("plan supports do not align with the slice schedule")

    measure_at, truth = _as_source(source)
    cumulative = plan.cumulative_sets()
    all_idx = plan.all_indices().indices
    measured = np.asarray(measure_at(all_idx), dtype=complex)
    pos = {int(k): i for i, k in enumerate(all_idx)}
    energy0 = _estimate_energy(plan, {int(k): v for k, v in zip(all_idx, measured)})

    N = schedule.N
    residual = measured.copy()
    estimate = np.zeros(N, dtype=complex)
    energy = energy0
    stages = []
    last_report = None
    for m, (sl, cum, f) in enumerate(zip(schedule.slices, cumulative, factors), start=1):
        if len(cum) == 0:
            raise StageError(m, "no samples available")
        op = suppress_outside(cum, sl.support)
        rows = np.array([pos[int(k)] for k in cum.indices], dtype=np.int64)
        b = np.concatenate([residual[rows], np.zeros(len(op.suppressed), dtype=complex)])
        report = solve_l1(BasisPursuitProblem(op, b, "time"), config)
        if require_convergence and not report.converged:
            raise StageError(m, f"solver did not converge ({report.status})")
        sol = report.solution.values
        estimate = estimate + f * sol
        sol_at_samples = np.fft.fft(sol, norm="ortho")[all_idx]
        keep = f if residual_rule == "additive" else 1.0 - f
        residual = residual - keep * sol_at_samples
        energy *= 1.0 - f
        rmse = err_spec = None
        if truth is not None:
            err = truth - estimate
            rmse = float(np.sqrt(np.mean(np.abs(err) ** 2)))
            err_spec = np.fft.fft(err, norm="ortho")
        stages.append(IterativeState(m, ComplexSignal(estimate, "time"), residual.copy(), cum,
                                     float(energy), report.solution, report, rmse, err_spec))
        last_report = report

    final = SolutionReport(
        solution=ComplexSignal(estimate, "time"),
        iterations_used=sum(s.report.iterations_used for s in stages),
        final_residual=max(s.report.final_residual for s in stages),
        objective=float(np.abs(estimate).sum()),
        converged=all(s.report.converged for s in stages),
        history=last_report.history,
        status="converged" if all(s.report.converged for s in stages) else "stage not converged",
    )
    return IterativeResult(final, tuple(stages), energy0)
