"""
Band-limited signals and their main lobes
==========================================

A flat band of W bins is a Dirichlet kernel in time. Wider bands give
narrower main lobes, which is why a wide band can need fewer samples.
"""

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from nucs import SpectrumProfile, band_signal_closed_form, generate_spectrum, idft, main_lobe_width

N = 128

# The generator and the closed form agree to rounding error
for W in (5, 31, 77):
    s = idft(generate_spectrum(SpectrumProfile.flat_band(0, W), N)).values
    err = np.abs(s - band_signal_closed_form(W, N).values).max()
    print(f"W={W:3d}  max |generated - closed form| = {err:.1e}")

# Main-lobe width against the 2N/(W+1) rule of thumb.
# The exact first zero of a W-bin kernel is at N/W.
for W in (15, 31, 63):
    print(f"W={W:3d}  rule {main_lobe_width(W, N):6.2f}   exact {2 * N / W:6.2f}")

fig, ax = plt.subplots(figsize=(7, 3))
n = np.arange(-N // 2, N // 2)
for W in (7, 15, 31):
    mag = np.abs(band_signal_closed_form(W, N).values)
    ax.plot(n, np.fft.fftshift(mag), label=f"W={W}")
ax.set_xlabel("time index n")
ax.set_ylabel("|s(n)|")
ax.legend()
fig.tight_layout()
fig.savefig("band_signals.svg")
print("wrote band_signals.svg")
