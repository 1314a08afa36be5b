"""Unitary DFT pair and generators for the test-signal families.

All transforms use the orthonormal convention::

    S(k) = 1/sqrt(N) * sum_n s(n) exp(-2j*pi*k*n/N)
    s(n) = 1/sqrt(N) * sum_k S(k) exp(+2j*pi*k*n/N)

so the rows of the transform matrix are orthonormal. Indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

__all__ = [
    "ComplexSignal",
    "BandSpec",
    "SpectrumProfile",
    "as_signal",
    "dft",
    "idft",
    "dft_matrix",
    "generate_spectrum",
    "band_signal_closed_form",
    "main_lobe_width",
    "energy",
]

Domain = Literal["time", "frequency"]


@dataclass(frozen=True)
class ComplexSignal:
    """Length-N complex vector tagged with the domain it lives in."""

    values: np.ndarray
    domain: Domain = "time"

    def __post_init__(self):
        if self.domain not in ("time", "frequency"):
            raise ValueError(f"unknown domain {self.domain!r}")
        v = np.array(self.values, dtype=complex).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def N(self) -> int:
        return self.values.size


def as_signal(x, domain: Domain) -> ComplexSignal:
    """Wrap `x` as a ComplexSignal, checking the domain tag when `x` already is one."""
    if isinstance(x, ComplexSignal):
        if x.domain != domain:
            raise ValueError(f"expected a {domain}-domain signal, got {x.domain}")
        return x
    return ComplexSignal(np.asarray(x), domain)


def dft(signal) -> ComplexSignal:
    """Unitary forward transform of a time-domain signal."""
    s = as_signal(signal, "time")
    return ComplexSignal(np.fft.fft(s.values, norm="ortho"), "frequency")


def idft(spectrum) -> ComplexSignal:
    """Unitary inverse transform; exact inverse of :func:`dft`."""
    S = as_signal(spectrum, "frequency")
    return ComplexSignal(np.fft.ifft(S.values, norm="ortho"), "time")


def dft_matrix(N: int) -> np.ndarray:
    """Dense N x N unitary analysis matrix, ``S = dft_matrix(N) @ s``.

    Only meant for small-N oracles and tests.
    """
    n = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(n, n) / N) / np.sqrt(N)


@dataclass(frozen=True)
class BandSpec:
    """Contiguous frequency band ``{start, ..., start + width - 1}``.

    `amplitude` is the flat magnitude used by flat/multi-band and
    stepwise profiles; triangular and power-law profiles treat it as the peak.
    """

    start: int
    width: int
    amplitude: float = 1.0

    def __post_init__(self):
        if self.start < 0:
            raise ValueError("band start must be nonnegative")
        if self.width < 1:
            raise ValueError("band width must be positive")
        if self.amplitude < 0:
            raise ValueError("band amplitude must be nonnegative")

    @property
    def stop(self) -> int:
        return self.start + self.width

    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)


ProfileKind = Literal["flat_band", "multi_band", "stepwise_power", "triangular", "power_law"]


@dataclass(frozen=True)
class SpectrumProfile:
    """Magnitude envelope of a spectrum.

    Build instances through the classmethods rather than by hand; they
    enforce the shape rules of each family.
    """

    kind: ProfileKind
    bands: tuple[BandSpec, ...]
    exponent: float = 1.0
    peak: float = 1.0
    phase: Literal["zero", "random"] = "zero"
    phase_seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        if not self.bands:
            raise ValueError("profile needs at least one band")
        if self.kind == "power_law" and self.exponent <= 0:
            raise ValueError("power-law exponent must be positive")
        if self.phase not in ("zero", "random"):
            raise ValueError(f"unknown phase mode {self.phase!r}")
        ordered = sorted(self.bands, key=lambda b: b.start)
        for a, b in zip(ordered, ordered[1:]):
            if b.start < a.stop:
                raise ValueError(f"overlapping bands {a} and {b}")

    @classmethod
    def flat_band(cls, start: int, width: int, amplitude: float = 1.0, **kw) -> "SpectrumProfile":
        return cls("flat_band", (BandSpec(start, width, amplitude),), peak=amplitude, **kw)

    @classmethod
    def multi_band(cls, bands: Sequence[BandSpec], **kw) -> "SpectrumProfile":
        bands = tuple(bands)
        return cls("multi_band", bands, peak=max(b.amplitude for b in bands), **kw)

    @classmethod
    def stepwise(cls, base_width: int, n_bands: int = 4, amplitude: float = 1.0,
                 start: int = 0, **kw) -> "SpectrumProfile":
        """Dyadic staircase: widths w, w, 2w, 4w, ... and magnitudes (2^i - 1)A.

        The widest (last) band has magnitude A, the first has (2^n - 1)A, so
        four bands give 15A, 7A, 3A, A over widths w, w, 2w, 4w.
        """
        if n_bands < 1:
            raise ValueError("n_bands must be >= 1")
        widths = [base_width] + [base_width * 2 ** max(i - 1, 0) for i in range(1, n_bands)]
        bands, k = [], start
        for i, w in enumerate(widths):
            bands.append(BandSpec(k, w, (2 ** (n_bands - i) - 1) * amplitude))
            k += w
        return cls("stepwise_power", tuple(bands), peak=bands[0].amplitude, **kw)

    @classmethod
    def triangular(cls, start: int, width: int, peak: float = 1.0, **kw) -> "SpectrumProfile":
        return cls("triangular", (BandSpec(start, width, peak),), peak=peak, **kw)

    @classmethod
    def power_law(cls, start: int, width: int, peak: float = 1.0, exponent: float = 1.0,
                  **kw) -> "SpectrumProfile":
        return cls("power_law", (BandSpec(start, width, peak),), exponent=exponent,
                   peak=peak, **kw)

    @property
    def support_width(self) -> int:
        return sum(b.width for b in self.bands)

    def support(self) -> np.ndarray:
        return np.sort(np.concatenate([b.indices() for b in self.bands]))

    def magnitude(self, N: int) -> np.ndarray:
        """Real, nonnegative magnitude envelope on the length-N grid."""
        for b in self.bands:
            if b.stop > N:
                raise ValueError(f"band {b} does not fit in N={N}")
        mag = np.zeros(N)
        if self.kind in ("flat_band", "multi_band", "stepwise_power"):
            for b in self.bands:
                mag[b.start:b.stop] = b.amplitude
        elif self.kind == "triangular":
            (b,) = self.bands
            i = np.arange(b.width)
            mag[b.start:b.stop] = b.amplitude * (b.width - i) / b.width
        elif self.kind == "power_law":
            (b,) = self.bands
            k = np.arange(1, b.width + 1, dtype=float)
            mag[b.start:b.stop] = b.amplitude * k ** (-self.exponent)
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        return mag


def generate_spectrum(profile: SpectrumProfile, N: int) -> ComplexSignal:
    """Frequency-domain signal whose magnitudes follow `profile` exactly.

    Phases are zero unless the profile asks for seeded random phases.
    """
    mag = profile.magnitude(N)
    if profile.phase == "random":
        rng = np.random.default_rng(profile.phase_seed)
        values = mag * np.exp(2j * np.pi * rng.random(N))
    else:
        values = mag.astype(complex)
    return ComplexSignal(values, "frequency")


def band_signal_closed_form(width: int, N: int, start: int = 0,
                            amplitude: float = 1.0) -> ComplexSignal:
    """Time-domain closed form of a flat band (Dirichlet kernel).

    For ``width = 2L - 1`` this is::

        A/sqrt(N) * exp(2j*pi*n*(start + L - 1)/N) * sin(pi*width*n/N) / sin(pi*n/N)

    with the removable singularity at ``n = 0`` replaced by its limit `width`.
    """
    n = np.arange(N)
    num = np.sin(np.pi * width * n / N)
    den = np.sin(np.pi * n / N)
    kernel = np.empty(N)
    kernel[0] = width
    kernel[1:] = num[1:] / den[1:]
    phase = np.exp(1j * np.pi * n * (2 * start + width - 1) / N)
    return ComplexSignal(amplitude / np.sqrt(N) * phase * kernel, "time")


def main_lobe_width(band_width: int, N: int) -> float:
    """Predicted main-lobe width ``2N / (W + 1)`` of a flat band of width W."""
    if not 1 <= band_width < N:
        raise ValueError("need 1 <= band_width < N")
    return 2.0 * N / (band_width + 1)


def energy(signal) -> float:
    """Sum of squared moduli; equal in both domains under the unitary transform."""
    v = signal.values if isinstance(signal, ComplexSignal) else np.asarray(signal)
    return float(np.vdot(v, v).real)
