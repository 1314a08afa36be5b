"""SVG figures for an experiment trace.

Files are named ``<experiment>_<scheme>_<kind>.svg`` with kinds
``spectrum`` (magnitude overlay with sampling markers), ``signal``
(real/imaginary overlays with residual panels) and ``stage<m>-error``
(per-stage error spectrum of the staged reconstruction).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import ExperimentTrace  # noqa: E402

__all__ = ["emit_plots"]

_MARKERS = {"urs": "*", "nrs": "D", "vd": "s", "hd": "^", "hu": "v", "iter": "o"}

# Fixed hash salt and no date metadata so reruns give identical files.
_SVG_RC = {"svg.hashsalt": "nucs", "svg.fonttype": "none"}


def _save(fig, path: Path) -> Path:
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _spectrum_plot(trace: ExperimentTrace, scheme: str, st) -> plt.Figure:
    k = np.arange(trace.N)
    orig = np.abs(np.fft.fft(trace.truth, norm="ortho"))
    rec = np.abs(np.fft.fft(st.solution, norm="ortho"))
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(k, orig, "k-", lw=1.2, label="original")
    ax.plot(k, rec, "r--", lw=1.0, label=f"reconstructed ({scheme.upper()})")
    ax.plot(st.samples, orig[st.samples], _MARKERS.get(scheme, "o"), mfc="none", mec="b",
            ls="none", label="sampling points")
    ax.set_xlabel("frequency index k")
    ax.set_ylabel("|S(k)|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _signal_plot(trace: ExperimentTrace, scheme: str, st) -> plt.Figure:
    n = np.arange(trace.N)
    fig, axes = plt.subplots(2, 2, figsize=(9, 5), sharex=True)
    for row, (part, name) in enumerate([(np.real, "real"), (np.imag, "imaginary")]):
        axes[row, 0].plot(n, part(trace.truth), "k-", lw=1.0, label="original")
        axes[row, 0].plot(n, part(st.solution), "r--", lw=0.9, label=scheme.upper())
        axes[row, 0].set_ylabel(name)
        axes[row, 1].plot(n, part(st.solution - trace.truth), "b-", lw=0.9)
        axes[row, 1].set_ylabel(f"{name} residual")
    axes[0, 0].legend(fontsize=8)
    axes[1, 0].set_xlabel("time index n")
    axes[1, 1].set_xlabel("time index n")
    fig.tight_layout()
    return fig


def _stage_plot(trace: ExperimentTrace, m: int, estimate, err_spec) -> plt.Figure:
    k = np.arange(trace.N)
    fig, (a, b) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    a.plot(k, np.abs(np.fft.fft(trace.truth, norm="ortho")), "k-", lw=1.0, label="original")
    a.plot(k, np.abs(np.fft.fft(estimate, norm="ortho")), "r--", lw=0.9, label=f"stage {m}")
    a.set_ylabel("|S(k)|")
    a.legend(fontsize=8)
    b.plot(k, np.abs(err_spec), "b-", lw=0.9)
    b.set_ylabel("|error spectrum|")
    b.set_xlabel("frequency index k")
    fig.tight_layout()
    return fig


def emit_plots(trace: ExperimentTrace, output_dir) -> list[Path]:
    """Write every figure for `trace` into `output_dir`; returns the paths."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".nucs-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"cannot write plots to {out}: {exc}") from exc

    paths = []
    for scheme, st in trace.schemes.items():
        stem = f"{trace.name}_{scheme}"
        paths.append(_save(_spectrum_plot(trace, scheme, st), out / f"{stem}_spectrum.svg"))
        paths.append(_save(_signal_plot(trace, scheme, st), out / f"{stem}_signal.svg"))
        for m, (est, err) in enumerate(zip(st.stage_estimates, st.stage_error_spectra), start=1):
            if err is None:
                continue
            paths.append(_save(_stage_plot(trace, m, est, err), out / f"{stem}_stage{m}-error.svg"))
    return paths
