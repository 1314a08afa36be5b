"""Sample-allocation planning over frequency bins.

Covers uniform random sampling over the whole grid (URS), uniform sampling
restricted to a known support (NRS), the three band-division schemes
(vertical VD, horizontal HD, horizontal with reuse HU), horizontal slicing
of a magnitude profile, the sample-density law and the ``C K log N``
budget heuristic. All draws are without replacement and fully determined
by the seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .projection import IndexSet
from .spectral import BandSpec, SpectrumProfile

__all__ = [
    "AllocationPlan",
    "Slice",
    "SliceSchedule",
    "sample_urs",
    "sample_inband",
    "plan_vertical",
    "plan_horizontal",
    "allocate_table1",
    "hu_cumulative_counts",
    "density_profile",
    "horizontal_slices",
    "estimate_min_samples",
]

Scheme = Literal["URS", "NRS", "VD", "HD", "HU"]

TABLE1_FRACTIONS = {
    "VD": (Fraction(1), Fraction(1), Fraction(1, 2), Fraction(1, 4)),
    "HD": (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)),
    "HU": (Fraction(1), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)),
}


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass(frozen=True)
class AllocationPlan:
    """Concrete sample locations, one set per band or slice.

    For HU, ``sampled_sets[m]`` holds only the *new* draws of slice m and
    ``reuse_links[m]`` lists the earlier slices whose draws it reuses;
    :meth:`cumulative_sets` gives the effective per-slice sets.
    """

    scheme: Scheme
    per_band_counts: tuple[int, ...]
    sampled_sets: tuple[IndexSet, ...]
    supports: tuple[IndexSet, ...]
    total_budget: int
    seed: int | None = None
    reuse_links: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("per_band_counts", "sampled_sets", "supports", "reuse_links"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(self.sampled_sets) != len(self.supports):
            raise ValueError("one support per sampled set required")
        for s, sup in zip(self.sampled_sets, self.supports):
            if not s.issubset(sup):
                raise ValueError("sampled indices escape their support")

    @property
    def N(self) -> int:
        return self.supports[0].N

    def cumulative_sets(self) -> list[IndexSet]:
        """Effective sample set of each slice (new draws plus reused ones)."""
        if self.scheme != "HU":
            return list(self.sampled_sets)
        out, acc = [], None
        for s in self.sampled_sets:
            acc = s if acc is None else acc.union(s)
            out.append(acc)
        return out

    def all_indices(self) -> IndexSet:
        acc = IndexSet(np.empty(0, dtype=np.int64), self.N)
        for s in self.sampled_sets:
            acc = acc.union(s)
        return acc

    def support_union(self) -> IndexSet:
        acc = self.supports[0]
        for s in self.supports[1:]:
            acc = acc.union(s)
        return acc


def sample_urs(N: int, M: int, seed=None) -> IndexSet:
    """`M` distinct bins drawn uniformly from ``[0, N)``."""
    if not 0 <= M <= N:
        raise ValueError(f"need 0 <= M <= N, got M={M}, N={N}")
    return IndexSet(_rng(seed).choice(N, size=M, replace=False), N)


def _band_sets(bands: Sequence[BandSpec], N: int) -> list[IndexSet]:
    return [IndexSet(b.indices(), N) for b in bands]


def sample_inband(bands: Sequence[BandSpec], M: int, seed=None, N: int | None = None) -> AllocationPlan:
    """Draw `M` bins uniformly from the union of `bands` (NRS).

    Each band's count is whatever the draw gives, so on average counts are
    proportional to band widths.
    """
    N = N if N is not None else max(b.stop for b in bands)
    supports = _band_sets(bands, N)
    union = np.concatenate([s.indices for s in supports])
    if np.unique(union).size != union.size:
        raise ValueError("bands overlap")
    if not 0 <= M <= union.size:
        raise ValueError(f"M={M} exceeds the total band width {union.size}")
    picked = _rng(seed).choice(union, size=M, replace=False)
    sets = [IndexSet(picked[np.isin(picked, s.indices)], N) for s in supports]
    return AllocationPlan("NRS", tuple(len(s) for s in sets), tuple(sets), tuple(supports),
                          M, seed if isinstance(seed, (int, np.integer)) else None)


def plan_vertical(bands: Sequence[BandSpec], counts: Sequence[int], seed=None,
                  N: int | None = None, scheme: Scheme = "VD") -> AllocationPlan:
    """Draw ``counts[i]`` bins uniformly inside band i, independently per band."""
    if len(counts) != len(bands):
        raise ValueError("one count per band required")
    N = N if N is not None else max(b.stop for b in bands)
    rng = _rng(seed)
    supports = _band_sets(bands, N)
    sets = []
    for c, sup in zip(counts, supports):
        if not 0 <= c <= len(sup):
            raise ValueError(f"count {c} does not fit a band of width {len(sup)}")
        sets.append(IndexSet(rng.choice(sup.indices, size=c, replace=False), N))
    return AllocationPlan(scheme, tuple(int(c) for c in counts), tuple(sets), tuple(supports),
                          int(sum(counts)), seed if isinstance(seed, (int, np.integer)) else None)


def plan_horizontal(schedule: "SliceSchedule", counts: Sequence[int], seed=None,
                    reuse: bool = True) -> AllocationPlan:
    """Sample the slices of a horizontal schedule.

    Without reuse (HD) slice m gets ``counts[m]`` fresh draws from its whole
    support. With reuse (HU) slice m reuses every earlier draw and adds
    ``counts[m]`` new draws from the part of its support not covered by the
    previous slice, so ``counts`` are new samples per slice.
    """
    if len(counts) != len(schedule.slices):
        raise ValueError("one count per slice required")
    rng = _rng(seed)
    N = schedule.N
    sets, links = [], []
    prev = IndexSet(np.empty(0, dtype=np.int64), N)
    for m, (c, sl) in enumerate(zip(counts, schedule.slices)):
        pool = sl.support.difference(prev) if reuse else sl.support
        if not 0 <= c <= len(pool):
            raise ValueError(f"slice {m + 1}: count {c} exceeds {len(pool)} available bins")
        sets.append(IndexSet(rng.choice(pool.indices, size=c, replace=False), N))
        links.append(tuple(range(m)) if reuse else ())
        prev = sl.support
    return AllocationPlan("HU" if reuse else "HD", tuple(int(c) for c in counts), tuple(sets),
                          tuple(sl.support for sl in schedule.slices), int(sum(counts)),
                          seed if isinstance(seed, (int, np.integer)) else None, tuple(links))


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def allocate_table1(M: int, scheme: Literal["VD", "HD", "HU"]) -> list[int]:
    """Per-band sample counts of the four-band dyadic allocation table.

    VD gives ``[M, M, M/2, M/4]``, HD ``[M, M/2, M/4, M/8]`` and HU the new
    samples per slice ``[M, M/4, M/8, M/16]``. Counts are rounded half-up and
    the first (largest) band absorbs whatever is needed to hit the rounded
    exact total.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    fr = TABLE1_FRACTIONS[scheme]
    counts = [_round_half_up(f * M) for f in fr]
    counts[0] += _round_half_up(sum(fr) * M) - sum(counts)
    return counts


def hu_cumulative_counts(new_counts: Sequence[int]) -> list[int]:
    """Effective per-slice counts when every earlier sample is reused."""
    return list(itertools.accumulate(new_counts))


def density_profile(M0: float, K_max: int, law: Literal["square", "inverse"] = "square") -> np.ndarray:
    """Sample density at k = 1..K_max.

    ``"square"`` is ``M0 k^-2``, density proportional to the squared
    magnitude of a ``k^-1`` spectrum; ``"inverse"`` is ``M0 k^-1``. The two
    readings disagree and both are offered.
    """
    if M0 < 1:
        raise ValueError("M0 must be >= 1")
    k = np.arange(1, K_max + 1, dtype=float)
    if law == "square":
        return M0 * k ** -2
    if law == "inverse":
        return M0 / k
    raise ValueError(f"unknown density law {law!r}")


@dataclass(frozen=True)
class Slice:
    """One horizontal layer: bins with magnitude above `floor`, clipped at `ceiling`."""

    support: IndexSet
    floor: float
    ceiling: float
    energy: float


@dataclass(frozen=True)
class SliceSchedule:
    """Nested horizontal slices, top (narrowest) first."""

    slices: tuple[Slice, ...]
    N: int

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))
        for a, b in zip(self.slices, self.slices[1:]):
            if not a.support.issubset(b.support):
                raise ValueError("slice supports must be nested")

    def __len__(self):
        return len(self.slices)

    def widths(self) -> list[int]:
        return [len(s.support) for s in self.slices]

    def stage_factors(self) -> list[float]:
        """Fraction of the remaining energy carried by each slice.

        ``f_m = E_m / (E_m + ... + E_B)``; the last factor is always 1.
        """
        e = np.array([s.energy for s in self.slices])
        tail = np.cumsum(e[::-1])[::-1]
        return [float(x) for x in e / tail]


def _layer(mag: np.ndarray, floor: float, ceiling: float, N: int) -> Slice:
    support = IndexSet(np.flatnonzero(mag > floor), N)
    layer = np.clip(mag - floor, 0.0, ceiling - floor)
    return Slice(support, float(floor), float(ceiling), float(layer.sum()))


def horizontal_slices(profile: SpectrumProfile, B: int, N: int | None = None) -> SliceSchedule:
    """Cut a monotone magnitude profile into `B` nested horizontal slices.

    Staircase profiles are cut at their steps; when `B` is smaller than the
    number of steps, the cuts are the subset of steps giving the most even
    layer energies. Continuous profiles (triangular, power law) are cut at
    dyadic magnitude levels ``peak/2, peak/4, ...``. Layer energy is the area
    (sum of magnitudes) between floor and ceiling.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    N = N if N is not None else max(b.stop for b in profile.bands)
    mag = profile.magnitude(N)
    peak = float(mag.max())

    if profile.kind in ("triangular", "power_law"):
        floors = [peak / 2 ** j for j in range(1, B)] + [0.0]
    else:
        levels = sorted({float(v) for v in mag[mag > 0]}, reverse=True)
        if B > len(levels):
            raise ValueError(f"B={B} exceeds the {len(levels)} distinct magnitude levels")
        candidates = levels[1:]
        best = None
        for cut in itertools.combinations(candidates, B - 1):
            fl = list(cut) + [0.0]
            ce = [peak] + list(cut)
            en = [np.clip(mag - f, 0, c - f).sum() for f, c in zip(fl, ce)]
            spread = max(en) - min(en)
            if best is None or spread < best[0]:
                best = (spread, fl)
        floors = best[1]

    ceilings = [peak] + floors[:-1]
    return SliceSchedule(tuple(_layer(mag, f, c, N) for f, c in zip(floors, ceilings)), N)


def estimate_min_samples(K: int, N: float, C: float = 2.0) -> int:
    """Sample budget ``ceil(C K ln N)``."""
    if K < 1 or N < 2 or C <= 0:
        raise ValueError("need K >= 1, N >= 2 and C > 0")
    return math.ceil(C * K * math.log(N))
