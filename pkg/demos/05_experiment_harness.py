"""
Running a seeded experiment
============================

The harness runs every scheme on every trial and writes CSV, JSON and SVG.
The command line does the same: ``nucs experiment --preset triangular``.
"""

from nucs.bench import preset, run_experiment, write_results
from nucs.plots import emit_plots

cfg = preset("triangular", trials=5, output_dir="results")
result = run_experiment(cfg)
for row in result.summary():
    print(f"{row['scheme']:5s} mean {row['mean_rmse']:.5f}  std {row['std_rmse']:.5f}  "
          f"converged {row['converged']}/{row['trials']}")

for path in write_results(result).values():
    print(path)
for path in emit_plots(result.trace, cfg.output_dir):
    print(path)
