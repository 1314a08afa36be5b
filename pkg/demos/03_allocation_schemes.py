"""
Allocating samples across bands and slices
===========================================

Vertical division samples each band on its own; horizontal division cuts
the spectrum by magnitude into nested slices; with reuse, the samples of
a narrow slice also count for every wider slice below it.
"""

from nucs import (SpectrumProfile, allocate_table1, density_profile, estimate_min_samples,
                  horizontal_slices, hu_cumulative_counts, plan_horizontal)

for scheme in ("VD", "HD", "HU"):
    counts = allocate_table1(16, scheme)
    print(f"{scheme}: {counts}  total {sum(counts)}")
print("HU effective per slice:", hu_cumulative_counts(allocate_table1(16, "HU")))

# Two readings of the density law, side by side
print("k^-2:", density_profile(1, 8, law="square").round(4))
print("k^-1:", density_profile(1, 8, law="inverse").round(4))

# A 7/3/1 staircase over widths 30/30/60 gives three equal-area slices
profile = SpectrumProfile.stepwise(30, n_bands=3)
sched = horizontal_slices(profile, 3, N=256)
print("slice widths:", sched.widths())
print("stage factors:", [round(f, 3) for f in sched.stage_factors()])

plan = plan_horizontal(sched, [12, 3, 1], seed=7)
for m, (new, cum) in enumerate(zip(plan.sampled_sets, plan.cumulative_sets()), start=1):
    print(f"slice {m}: new {new.indices.tolist()}  total {len(cum)}")

print("C K ln N budget for K=4, N=128, C=1:", estimate_min_samples(4, 128, 1.0))
