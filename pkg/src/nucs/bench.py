"""Seeded Monte-Carlo experiment harness.

An :class:`ExperimentConfig` describes a signal family, a list of sampling
schemes and a trial count. :func:`run_experiment` generates one signal per
trial, samples and reconstructs it under every scheme, and collects a
:class:`TrialResult` per (scheme, trial). Results are written as CSV; the
first trial's reconstructions are kept as a trace for plotting.

Schemes
-------
urs   M bins uniform over the whole grid, no suppression.
nrs   bins inside the known support only, out-band bins forced to zero.
      Uses ``band_counts`` per band if given, otherwise the slice plan when
      ``slice_counts`` is given, otherwise M uniform draws over the support.
vd    per-band draws (``band_counts``), one joint solve.
hd    per-slice draws without reuse, one joint solve over their union.
hu    per-slice draws with reuse, one joint solve over their union.
iter  per-slice draws with reuse, staged slice-by-slice reconstruction.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .allocation import (AllocationPlan, SliceSchedule, horizontal_slices, plan_horizontal,
                         plan_vertical, sample_inband, sample_urs)
from .iterative import run_iterative
from .projection import IndexSet, ProjectionOperator, measure, suppress_outside
from .solver import BasisPursuitProblem, SolverConfig, solve_l1
from .spectral import BandSpec, ComplexSignal, SpectrumProfile, generate_spectrum, idft

__all__ = [
    "SCHEMES",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "TrialResult",
    "SchemeTrace",
    "ExperimentTrace",
    "ExperimentResult",
    "rmse",
    "profile_from_dict",
    "profile_to_dict",
    "make_signal",
    "make_plan",
    "reconstruct",
    "run_trial",
    "run_experiment",
    "write_results",
    "summarize",
    "PRESETS",
    "preset",
    "trials_csv",
    "summary_csv",
    "read_trials_csv",
]

SCHEMES = ("urs", "nrs", "vd", "hd", "hu", "iter")
CSV_COLUMNS = ("scheme", "seed", "rmse", "stage", "converged", "wall_time_s")
SUMMARY_COLUMNS = ("scheme", "trials", "mean_rmse", "std_rmse", "converged", "failed")
CSV_VERSION = 1

# Fixed per-scheme RNG streams; nrs, hu and iter share the plan stream so
# they see the same sample locations within a trial.
_STREAM = {"signal": 0, "plan": 1, "urs": 2, "vd": 3, "hd": 4}


def rmse(reference, estimate) -> float:
    """``sqrt(mean(|estimate - reference|^2))`` over complex samples."""
    a = np.asarray(reference.values if isinstance(reference, ComplexSignal) else reference)
    b = np.asarray(estimate.values if isinstance(estimate, ComplexSignal) else estimate)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean(np.abs(b - a) ** 2)))


def profile_from_dict(d: dict) -> SpectrumProfile:
    d = dict(d)
    kind = d.pop("kind")
    if kind == "flat_band":
        return SpectrumProfile.flat_band(d["start"], d["width"], d.get("amplitude", 1.0))
    if kind == "multi_band":
        return SpectrumProfile.multi_band([BandSpec(**b) for b in d["bands"]])
    if kind == "stepwise_power":
        return SpectrumProfile.stepwise(d["base_width"], d.get("n_bands", 4),
                                        d.get("amplitude", 1.0), d.get("start", 0))
    if kind == "triangular":
        return SpectrumProfile.triangular(d["start"], d["width"], d.get("peak", 1.0))
    if kind == "power_law":
        return SpectrumProfile.power_law(d["start"], d["width"], d.get("peak", 1.0),
                                         d.get("exponent", 1.0))
    raise ValueError(f"unknown profile kind {kind!r}")


def profile_to_dict(p: SpectrumProfile) -> dict:
    if p.kind == "flat_band":
        (b,) = p.bands
        return {"kind": p.kind, "start": b.start, "width": b.width, "amplitude": b.amplitude}
    if p.kind == "multi_band":
        return {"kind": p.kind, "bands": [asdict(b) for b in p.bands]}
    if p.kind == "stepwise_power":
        last = p.bands[-1]
        return {"kind": p.kind, "base_width": p.bands[0].width, "n_bands": len(p.bands),
                "amplitude": last.amplitude, "start": p.bands[0].start}
    (b,) = p.bands
    d = {"kind": p.kind, "start": b.start, "width": b.width, "peak": b.amplitude}
    if p.kind == "power_law":
        d["exponent"] = p.exponent
    return d


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: signal family, schemes, budget and trial count.

    `magnitude_units` says how profile magnitudes are read: ``"unitary"``
    takes them as coefficients of the orthonormal transform, ``"dft"`` as
    coefficients of the unnormalized forward DFT (divided by sqrt(N) before
    use). `phase` is ``"zero"`` or ``"random"`` (seeded per trial).
    `randomize_placement` draws new disjoint band starts every trial.
    """

    name: str
    N: int
    profile: SpectrumProfile
    schemes: tuple[str, ...]
    M: int
    slice_counts: tuple[int, ...] | None = None
    band_counts: tuple[int, ...] | None = None
    slices: int | None = None
    trials: int = 10
    base_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    phase: str = "zero"
    magnitude_units: str = "unitary"
    randomize_placement: bool = False
    record_timing: bool = False
    output_dir: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(s.lower() for s in self.schemes))
        for name in ("slice_counts", "band_counts"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(int(c) for c in v))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not 0 <= self.base_seed < 2 ** 64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; choose from {SCHEMES}")
        if self.phase not in ("zero", "random"):
            raise ValueError("phase must be 'zero' or 'random'")
        if self.magnitude_units not in ("unitary", "dft"):
            raise ValueError("magnitude_units must be 'unitary' or 'dft'")
        if self.slice_counts is not None and sum(self.slice_counts) > self.M:
            raise ValueError("slice_counts exceed the budget M")
        if self.band_counts is not None:
            if sum(self.band_counts) > self.M:
                raise ValueError("band_counts exceed the budget M")
            if len(self.band_counts) != len(self.profile.bands):
                raise ValueError("one band count per profile band required")
        if any(b.stop > self.N for b in self.profile.bands):
            raise ValueError("profile does not fit in N")

    @property
    def n_slices(self) -> int:
        if self.slices is not None:
            return self.slices
        return len(self.slice_counts) if self.slice_counts else 1

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "N": self.N,
            "profile": profile_to_dict(self.profile),
            "schemes": list(self.schemes),
            "M": self.M,
            "slice_counts": list(self.slice_counts) if self.slice_counts else None,
            "band_counts": list(self.band_counts) if self.band_counts else None,
            "slices": self.slices,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "solver": asdict(self.solver),
            "phase": self.phase,
            "magnitude_units": self.magnitude_units,
            "randomize_placement": self.randomize_placement,
            "record_timing": self.record_timing,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["profile"] = profile_from_dict(d["profile"])
        d["solver"] = SolverConfig(**d.get("solver", {}))
        d["schemes"] = tuple(d["schemes"])
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class TrialResult:
    scheme: str
    seed: int
    rmse: float
    per_stage_rmse: tuple[float, ...] = ()
    converged: bool = True
    wall_time: float = 0.0
    out_band_peak: float = 0.0
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error) or not self.converged


@dataclass
class SchemeTrace:
    solution: np.ndarray
    samples: np.ndarray
    stage_estimates: list[np.ndarray] = field(default_factory=list)
    stage_error_spectra: list[np.ndarray] = field(default_factory=list)


@dataclass
class ExperimentTrace:
    """Everything needed to redraw one trial's figures."""

    name: str
    N: int
    truth: np.ndarray
    support: np.ndarray
    schemes: dict[str, SchemeTrace] = field(default_factory=dict)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list[TrialResult]
    trace: ExperimentTrace | None = None

    def summary(self) -> list[dict]:
        return summarize(self.trials)

    def mean_rmse(self, scheme: str) -> float:
        return next(r["mean_rmse"] for r in self.summary() if r["scheme"] == scheme)

    @property
    def failure_fraction(self) -> float:
        return sum(t.failed for t in self.trials) / len(self.trials)


def _place_bands(profile: SpectrumProfile, N: int, rng: np.random.Generator) -> SpectrumProfile:
    """Same widths and shape, new disjoint starts drawn uniformly."""
    widths = [b.width for b in profile.bands]
    free = N - sum(widths)
    if free < 0:
        raise ValueError("bands do not fit in N")
    # Uniform composition of the free bins into len(widths) + 1 gaps.
    cuts = np.sort(rng.choice(free + len(widths), size=len(widths), replace=False))
    gaps = np.diff(np.concatenate([[-1], cuts])) - 1
    bands, k = [], 0
    for b, g in zip(profile.bands, gaps):
        k += int(g)
        bands.append(BandSpec(k, b.width, b.amplitude))
        k += b.width
    return replace(profile, bands=tuple(bands))


def make_signal(config: ExperimentConfig, seed: int) -> tuple[SpectrumProfile, ComplexSignal]:
    """Profile (possibly re-placed) and time signal for one trial."""
    rng = np.random.default_rng([seed, _STREAM["signal"]])
    profile = config.profile
    if config.randomize_placement:
        profile = _place_bands(profile, config.N, rng)
    if config.phase == "random":
        profile = replace(profile, phase="random", phase_seed=int(rng.integers(2 ** 63)))
    S = generate_spectrum(profile, config.N).values
    if config.magnitude_units == "dft":
        S = S / np.sqrt(config.N)
    return profile, idft(ComplexSignal(S, "frequency"))


def _schedule(config: ExperimentConfig, profile: SpectrumProfile) -> SliceSchedule:
    return horizontal_slices(profile, config.n_slices, config.N)


def _proportional_counts(widths: Sequence[int], M: int) -> list[int]:
    raw = [M * w / sum(widths) for w in widths]
    counts = [math.floor(r + 0.5) for r in raw]
    counts[int(np.argmax(widths))] += M - sum(counts)
    return counts


def make_plan(config: ExperimentConfig, scheme: str, profile: SpectrumProfile,
              seed: int) -> tuple[AllocationPlan | IndexSet, SliceSchedule | None]:
    """Sample locations for one scheme in one trial."""
    N = config.N
    if scheme == "urs":
        return sample_urs(N, config.M, np.random.default_rng([seed, _STREAM["urs"]])), None
    if scheme == "vd":
        counts = config.band_counts or _proportional_counts([b.width for b in profile.bands], config.M)
        return plan_vertical(profile.bands, counts, np.random.default_rng([seed, _STREAM["vd"]]), N), None
    plan_rng = np.random.default_rng([seed, _STREAM["plan"]])
    if scheme == "nrs":
        if config.band_counts:
            return plan_vertical(profile.bands, config.band_counts, plan_rng, N, scheme="NRS"), None
        if not config.slice_counts:
            return sample_inband(profile.bands, config.M, plan_rng, N), None
    if not config.slice_counts:
        raise ValueError(f"scheme {scheme!r} needs slice_counts")
    sched = _schedule(config, profile)
    if scheme == "hd":
        return plan_horizontal(sched, config.slice_counts,
                               np.random.default_rng([seed, _STREAM["hd"]]), reuse=False), sched
    return plan_horizontal(sched, config.slice_counts, plan_rng, reuse=True), sched


def reconstruct(config: ExperimentConfig, scheme: str, profile: SpectrumProfile,
                signal: ComplexSignal, seed: int):
    """Sample and reconstruct one signal; returns (estimate, stages, converged, samples)."""
    plan, sched = make_plan(config, scheme, profile, seed)
    if isinstance(plan, IndexSet):
        op = ProjectionOperator(plan)
        rep = solve_l1(BasisPursuitProblem(op, measure(op, signal)), config.solver)
        return rep.solution.values, [], rep.converged, plan.indices
    if scheme == "iter":
        res = run_iterative(signal, sched, plan, config=config.solver)
        return res.report.solution.values, list(res.stages), res.report.converged, \
            plan.all_indices().indices
    samples = plan.all_indices()
    support = IndexSet(profile.support(), config.N)
    op = suppress_outside(samples, support)
    rep = solve_l1(BasisPursuitProblem(op, measure(op, signal)), config.solver)
    return rep.solution.values, [], rep.converged, samples.indices


def run_trial(config: ExperimentConfig, trial: int, keep_trace: bool = False):
    seed = config.base_seed + trial
    profile, signal = make_signal(config, seed)
    off_support = np.ones(config.N, dtype=bool)
    off_support[profile.support()] = False
    results, trace = [], None
    if keep_trace:
        trace = ExperimentTrace(config.name, config.N, signal.values.copy(), profile.support())
    for scheme in config.schemes:
        t0 = time.perf_counter()
        try:
            est, stages, converged, samples = reconstruct(config, scheme, profile, signal, seed)
        except Exception as exc:  # recorded in the row; the run goes on
            results.append(TrialResult(scheme, seed, float("nan"), (), False,
                                       time.perf_counter() - t0, float("nan"), repr(exc)))
            continue
        dt = time.perf_counter() - t0
        spec = np.abs(np.fft.fft(est, norm="ortho"))
        results.append(TrialResult(
            scheme, seed, rmse(signal, est), tuple(s.rmse for s in stages), converged, dt,
            float(spec[off_support].max()) if off_support.any() else 0.0))
        if trace is not None:
            trace.schemes[scheme] = SchemeTrace(
                est, np.asarray(samples), [s.estimate.values for s in stages],
                [s.residual_spectrum for s in stages])
    return results, trace


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CS_ALLOC_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every scheme on every trial; rows come back sorted by (scheme, seed)."""
    def job(t):
        return run_trial(config, t, keep_trace=(t == 0))

    workers = min(_threads(), config.trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outs = list(pool.map(job, range(config.trials)))
    else:
        outs = [job(t) for t in range(config.trials)]
    rows = [r for res, _ in outs for r in res]
    order = {s: i for i, s in enumerate(config.schemes)}
    rows.sort(key=lambda r: (order[r.scheme], r.seed))
    return ExperimentResult(config, rows, outs[0][1])


def summarize(trials: Sequence[TrialResult]) -> list[dict]:
    """Per-scheme mean and population std of RMSE, in first-seen scheme order."""
    out = []
    for scheme in dict.fromkeys(t.scheme for t in trials):
        vals = [t.rmse for t in trials if t.scheme == scheme]
        mean = math.fsum(vals) / len(vals)
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / len(vals))
        rows = [t for t in trials if t.scheme == scheme]
        out.append({
            "scheme": scheme,
            "trials": len(vals),
            "mean_rmse": mean,
            "std_rmse": std,
            "converged": sum(t.converged for t in rows),
            "failed": sum(t.failed for t in rows),
        })
    return out


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def trials_csv(trials: Sequence[TrialResult], record_timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for t in trials:
        timing = _fmt(t.wall_time) if record_timing else ""
        for m, r in enumerate(t.per_stage_rmse, start=1):
            w.writerow([t.scheme, t.seed, _fmt(float(r)), m, _fmt(t.converged), ""])
        w.writerow([t.scheme, t.seed, _fmt(t.rmse), "final", _fmt(t.converged), timing])
    return buf.getvalue()


def summary_csv(trials: Sequence[TrialResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in summarize(trials):
        w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def write_results(result: ExperimentResult, output_dir=None) -> dict[str, Path]:
    """Write ``<name>_trials.csv``, ``<name>_summary.csv`` and ``<name>_config.json``."""
    cfg = result.config
    out = Path(output_dir or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "trials": out / f"{cfg.name}_trials.csv",
            "summary": out / f"{cfg.name}_summary.csv",
            "config": out / f"{cfg.name}_config.json",
        }
        paths["trials"].write_text(trials_csv(result.trials, cfg.record_timing))
        paths["summary"].write_text(summary_csv(result.trials))
        echo = {"csv_version": CSV_VERSION, **cfg.to_dict()}
        paths["config"].write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return paths


def read_trials_csv(path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


# Built-in experiment presets. Random phases, N=256 and "dft" magnitude
# units for the staged experiments are choices explained in the README.
PRESETS: dict[str, dict[str, Any]] = {
    "single_band": {
        "name": "single_band",
        "N": 128,
        "profile": {"kind": "flat_band", "start": 32, "width": 77, "amplitude": 1.0},
        "schemes": ["urs", "nrs"],
        "M": 20,
        "trials": 50,
        "base_seed": 2024,
        "randomize_placement": True,
    },
    "two_band": {
        "name": "two_band",
        "N": 128,
        "profile": {"kind": "multi_band", "bands": [
            {"start": 10, "width": 38, "amplitude": 1.0},
            {"start": 80, "width": 25, "amplitude": 1.0}]},
        "schemes": ["urs", "nrs"],
        "M": 11,
        "band_counts": [7, 4],
        "trials": 50,
        "base_seed": 2024,
        "randomize_placement": True,
    },
    "stepwise": {
        "name": "stepwise",
        "N": 256,
        "profile": {"kind": "stepwise_power", "base_width": 30, "n_bands": 3,
                    "amplitude": 1.0, "start": 0},
        "schemes": ["urs", "nrs", "iter"],
        "M": 16,
        "slice_counts": [12, 3, 1],
        "trials": 10,
        "base_seed": 2024,
        "phase": "random",
        "magnitude_units": "dft",
        "solver": {"max_iterations": 20000},
    },
    "triangular": {
        "name": "triangular",
        "N": 256,
        "profile": {"kind": "triangular", "start": 0, "width": 120, "peak": 1.0},
        "schemes": ["urs", "nrs", "iter"],
        "M": 15,
        "slice_counts": [12, 3],
        "trials": 10,
        "base_seed": 2024,
        "phase": "random",
        "magnitude_units": "dft",
        "solver": {"max_iterations": 20000},
    },
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig.from_dict({**PRESETS[name], **overrides})
