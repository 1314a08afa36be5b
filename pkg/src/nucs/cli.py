"""Command-line entry point: ``nucs <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .bench import ExperimentConfig, PRESETS, make_plan, make_signal
from .projection import IndexSet


def _load_config(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise SystemExit("give either --config or --preset, not both")
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.preset:
        cfg = bench.preset(args.preset)
    else:
        raise SystemExit("need --config <path> or --preset <name>")
    overrides = {}
    if getattr(args, "trials", None):
        overrides["trials"] = args.trials
    if getattr(args, "scheme", None):
        overrides["schemes"] = tuple(args.scheme)
    if getattr(args, "out", None):
        overrides["output_dir"] = str(args.out)
    if overrides:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **overrides})
    return cfg


def _trial_seed(cfg: ExperimentConfig, args) -> int:
    return cfg.base_seed if args.seed is None else args.seed


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    seed = _trial_seed(cfg, args)
    profile, signal = make_signal(cfg, seed)
    spec = np.fft.fft(signal.values, norm="ortho")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{cfg.name}_signal_{seed}.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["index", "time_re", "time_im", "freq_re", "freq_im"])
        for i, (s, S) in enumerate(zip(signal.values, spec)):
            w.writerow([i, repr(s.real), repr(s.imag), repr(S.real), repr(S.imag)])
    print(path)
    return 0


def _plan_dict(plan) -> dict:
    if isinstance(plan, IndexSet):
        return {"scheme": "URS", "N": plan.N, "samples": plan.indices.tolist()}
    return {
        "scheme": plan.scheme,
        "N": plan.N,
        "per_band_counts": list(plan.per_band_counts),
        "sampled_sets": [s.indices.tolist() for s in plan.sampled_sets],
        "cumulative_sets": [s.indices.tolist() for s in plan.cumulative_sets()],
        "support_widths": [len(s) for s in plan.supports],
        "reuse_links": [list(r) for r in plan.reuse_links],
    }


def cmd_plan(args) -> int:
    cfg = _load_config(args)
    seed = _trial_seed(cfg, args)
    profile, _ = make_signal(cfg, seed)
    plans = {s: _plan_dict(make_plan(cfg, s, profile, seed)[0]) for s in cfg.schemes}
    text = json.dumps({"seed": seed, "plans": plans}, indent=2)
    if args.out:
        Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
        path = Path(cfg.output_dir) / f"{cfg.name}_plan_{seed}.json"
        path.write_text(text + "\n")
        print(path)
    else:
        print(text)
    return 0


def cmd_reconstruct(args) -> int:
    cfg = _load_config(args)
    seed = _trial_seed(cfg, args)
    cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "trials": 1, "base_seed": seed})
    results, trace = bench.run_trial(cfg, 0, keep_trace=True)
    for r in results:
        stages = " ".join(f"{x:.4g}" for x in r.per_stage_rmse)
        print(f"{r.scheme:5s} seed={r.seed} rmse={r.rmse:.6g} converged={r.converged}"
              + (f" stages=[{stages}]" if stages else "") + (f" error={r.error}" if r.error else ""))
    if not args.no_plots:
        from .plots import emit_plots
        for p in emit_plots(trace, cfg.output_dir):
            print(p)
    return 0 if all(not r.failed for r in results) else 1


def cmd_experiment(args) -> int:
    cfg = _load_config(args)
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "base_seed": args.seed})
    result = bench.run_experiment(cfg)
    paths = bench.write_results(result)
    if not args.no_plots and result.trace is not None:
        from .plots import emit_plots
        emit_plots(result.trace, cfg.output_dir)
    _print_summary(result.summary())
    for p in paths.values():
        print(p)
    if result.failure_fraction > 0.5:
        print(f"{result.failure_fraction:.0%} of trials failed", file=sys.stderr)
        return 1
    return 0


def _print_summary(rows) -> None:
    print(f"{'scheme':8s}{'trials':>7s}{'mean_rmse':>14s}{'std_rmse':>14s}{'conv':>6s}")
    for r in rows:
        print(f"{r['scheme']:8s}{r['trials']:7d}{r['mean_rmse']:14.6g}{r['std_rmse']:14.6g}"
              f"{r['converged']:6d}")


def cmd_report(args) -> int:
    out = Path(args.out or "results")
    files = sorted(out.glob("*_trials.csv"))
    if not files:
        print(f"no *_trials.csv files in {out}", file=sys.stderr)
        return 1
    for path in files:
        rows = [r for r in bench.read_trials_csv(path) if r["stage"] == "final"]
        trials = [bench.TrialResult(r["scheme"], int(r["seed"]), float(r["rmse"]),
                                    converged=r["converged"] == "true") for r in rows]
        print(f"== {path.name[:-len('_trials.csv')]}")
        _print_summary(bench.summarize(trials))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nucs", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scheme=True, trials=False):
        sp.add_argument("--config", type=Path, help="experiment JSON config")
        sp.add_argument("--preset", choices=sorted(PRESETS), help="built-in experiment")
        sp.add_argument("--seed", type=int, help="trial seed (experiment: base seed)")
        sp.add_argument("--out", type=Path, help="output directory")
        if scheme:
            sp.add_argument("--scheme", action="append", choices=bench.SCHEMES,
                            help="restrict to this scheme (repeatable)")
        if trials:
            sp.add_argument("--trials", type=int, help="number of trials")

    sp = sub.add_parser("generate", help="write one trial's signal and spectrum as CSV")
    common(sp, scheme=False)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("plan", help="print or write the sample plan of one trial")
    common(sp)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("reconstruct", help="reconstruct one trial and plot it")
    common(sp)
    sp.add_argument("--no-plots", action="store_true")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("experiment", help="run all trials, write CSV, JSON and SVG")
    common(sp, trials=True)
    sp.add_argument("--no-plots", action="store_true")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("report", help="summarize *_trials.csv files in a directory")
    sp.add_argument("--out", type=Path, help="results directory")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
