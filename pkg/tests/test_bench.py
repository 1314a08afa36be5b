import json
import math

import numpy as np
import pytest

from nucs import bench, cli
from nucs.bench import ExperimentConfig, TrialResult, preset, rmse, run_experiment, summarize
from nucs.plots import emit_plots
from nucs.spectral import band_signal_closed_form, energy


def small(name="stepwise", **kw):
    base = dict(trials=2)
    base.update(kw)
    return preset(name, **base)


def test_rmse_definition():
    s = band_signal_closed_form(31, 128).values
    assert rmse(s, s) == 0.0
    c = 0.3 - 0.4j
    assert rmse(s, s + c) == pytest.approx(0.5)
    assert rmse(s, np.zeros(128)) == pytest.approx(math.sqrt(energy(s) / 128))
    with pytest.raises(ValueError):
        rmse(s, s[:-1])


def test_config_roundtrip(tmp_path):
    cfg = small()
    d = cfg.to_dict()
    assert ExperimentConfig.from_dict(json.loads(json.dumps(d))) == cfg
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    assert ExperimentConfig.load(p) == cfg


@pytest.mark.parametrize("bad", [dict(trials=0), dict(M=0), dict(schemes=["xyz"]),
                                 dict(slice_counts=[12, 3, 9]), dict(phase="odd"),
                                 dict(base_seed=-1)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        small(**bad)


def test_config_unknown_key():
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({**small().to_dict(), "colour": "red"})


def test_schemes_share_budget_and_plan():
    cfg = small(schemes=["urs", "nrs", "hu", "iter"])
    profile, _ = bench.make_signal(cfg, 11)
    urs, _ = bench.make_plan(cfg, "urs", profile, 11)
    nrs, _ = bench.make_plan(cfg, "nrs", profile, 11)
    hu, _ = bench.make_plan(cfg, "hu", profile, 11)
    it, _ = bench.make_plan(cfg, "iter", profile, 11)
    assert len(urs) == len(nrs.all_indices()) == cfg.M
    assert hu.all_indices() == it.all_indices() == nrs.all_indices()


def test_randomized_placement_keeps_bands_disjoint():
    cfg = preset("two_band")
    starts = set()
    for seed in range(30):
        prof, _ = bench.make_signal(cfg, seed)
        b1, b2 = sorted(prof.bands, key=lambda b: b.start)
        assert b1.stop <= b2.start and b2.stop <= cfg.N
        starts.add(prof.bands[0].start)
    assert len(starts) > 10


def test_dft_units_scale():
    a = preset("stepwise")
    b = preset("stepwise", magnitude_units="unitary")
    _, sa = bench.make_signal(a, 0)
    _, sb = bench.make_signal(b, 0)
    assert np.allclose(sa.values * 16, sb.values)


def test_summary_means_exact():
    trials = [TrialResult("a", i, v) for i, v in enumerate([0.1, 0.2, 0.4])] + [TrialResult("b", 0, 1.0)]
    rows = summarize(trials)
    assert rows[0]["mean_rmse"] == math.fsum([0.1, 0.2, 0.4]) / 3
    assert rows[1]["std_rmse"] == 0.0


def test_run_experiment_rows_sorted():
    res = run_experiment(small(schemes=["iter", "urs"], trials=3))
    assert [(t.scheme, t.seed) for t in res.trials] == [
        ("iter", 2024), ("iter", 2025), ("iter", 2026), ("urs", 2024), ("urs", 2025), ("urs", 2026)]
    assert all(len(t.per_stage_rmse) == 3 for t in res.trials if t.scheme == "iter")
    assert res.failure_fraction <= 0.5


def test_threads_do_not_change_output(monkeypatch):
    cfg = small(trials=3, schemes=["nrs", "iter"])
    monkeypatch.setenv("CS_ALLOC_THREADS", "1")
    a = bench.trials_csv(run_experiment(cfg).trials)
    monkeypatch.setenv("CS_ALLOC_THREADS", "3")
    b = bench.trials_csv(run_experiment(cfg).trials)
    assert a == b


def test_failure_recorded_not_raised():
    cfg = small(schemes=["nrs", "hd"], slice_counts=None, trials=1)
    res = run_experiment(cfg)
    hd = [t for t in res.trials if t.scheme == "hd"][0]
    assert hd.failed and "slice_counts" in hd.error
    nrs = [t for t in res.trials if t.scheme == "nrs"][0]
    assert not nrs.failed


def test_csv_layout(tmp_path):
    res = run_experiment(small(trials=2))
    paths = bench.write_results(res, tmp_path)
    rows = bench.read_trials_csv(paths["trials"])
    assert list(rows[0]) == list(bench.CSV_COLUMNS)
    finals = [r for r in rows if r["stage"] == "final"]
    assert len(finals) == 6
    assert [r["stage"] for r in rows if r["scheme"] == "iter"][:4] == ["1", "2", "3", "final"]
    assert all(r["wall_time_s"] == "" for r in rows)
    echo = json.loads(paths["config"].read_text())
    assert echo["csv_version"] == bench.CSV_VERSION and echo["name"] == "stepwise"
    summary = bench.read_trials_csv(paths["summary"])
    mean = math.fsum(float(r["rmse"]) for r in finals if r["scheme"] == "urs") / 2
    assert float(summary[0]["mean_rmse"]) == mean


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    res = run_experiment(small(trials=1, schemes=["nrs"]))
    with pytest.raises(OSError, match=str(blocker)):
        bench.write_results(res, blocker / "sub")
    with pytest.raises(OSError, match=str(blocker)):
        emit_plots(res.trace, blocker / "sub")


def test_plots(tmp_path):
    res = run_experiment(small(trials=1, schemes=["urs", "nrs", "iter"]))
    paths = emit_plots(res.trace, tmp_path)
    names = sorted(p.name for p in paths)
    assert "stepwise_urs_spectrum.svg" in names and "stepwise_nrs_signal.svg" in names
    assert [n for n in names if "error" in n] == [
        "stepwise_iter_stage1-error.svg", "stepwise_iter_stage2-error.svg",
        "stepwise_iter_stage3-error.svg"]
    first = {p.name: p.read_bytes() for p in paths}
    emit_plots(res.trace, tmp_path)
    assert all(p.read_bytes() == first[p.name] for p in paths)
    assert first["stepwise_urs_spectrum.svg"].startswith(b"<?xml")


def test_plots_without_stages(tmp_path):
    res = run_experiment(small(trials=1, schemes=["nrs"]))
    paths = emit_plots(res.trace, tmp_path)
    assert len(paths) == 2


def test_cli_experiment_and_report(tmp_path, capsys):
    out = tmp_path / "r"
    assert cli.main(["experiment", "--preset", "triangular", "--trials", "2", "--out", str(out),
                     "--no-plots"]) == 0
    assert (out / "triangular_trials.csv").exists()
    assert not list(out.glob("*.svg"))
    capsys.readouterr()
    assert cli.main(["report", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "triangular" in text and "iter" in text


def test_cli_config_file(tmp_path, capsys):
    cfg = small(schemes=["nrs"], trials=1, output_dir=str(tmp_path / "o"))
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert cli.main(["experiment", "--config", str(p), "--seed", "7"]) == 0
    rows = bench.read_trials_csv(tmp_path / "o" / "stepwise_trials.csv")
    assert rows[0]["seed"] == "7"
    assert (tmp_path / "o" / "stepwise_nrs_spectrum.svg").exists()


def test_cli_plan_generate_reconstruct(tmp_path, capsys):
    assert cli.main(["plan", "--preset", "stepwise", "--scheme", "iter", "--seed", "3"]) == 0
    plan = json.loads(capsys.readouterr().out)
    assert [len(s) for s in plan["plans"]["iter"]["cumulative_sets"]] == [12, 15, 16]
    assert cli.main(["generate", "--preset", "single_band", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "single_band_signal_1.csv").read_text().startswith("index,time_re")
    assert cli.main(["reconstruct", "--preset", "single_band", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "single_band_nrs_spectrum.svg").exists()


def test_cli_errors(tmp_path, capsys):
    with pytest.raises(SystemExit):
        cli.main(["experiment"])
    with pytest.raises(SystemExit):
        cli.main(["experiment", "--preset", "stepwise", "--scheme", "bogus"])
    assert cli.main(["report", "--out", str(tmp_path)]) == 1


def test_cli_exit_code_on_mass_failure(tmp_path):
    cfg = small(schemes=["hd"], slice_counts=None, trials=2, output_dir=str(tmp_path))
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert cli.main(["experiment", "--config", str(p), "--no-plots"]) == 1
