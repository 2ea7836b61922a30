import csv
import json

import pytest

from fedalloc.cli import main
from fedalloc.config import from_mapping
from fedalloc.suite import (COMPARISON_HEADER, CONVERGENCE_HEADER, SWEEP_HEADER, RunRecord,
                            format_report, load_records, run_suite, win_rate)

CSVS = ("convergence.csv", "comparison.csv", "energy_sweep.csv")


def read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    run_suite(from_mapping({"seed": 5}), out, n_seeds=2)
    return out


def test_headers_and_row_counts(run_dir):
    conv, comp, sweep = (read(run_dir / n) for n in CSVS)
    assert tuple(conv[0]) == CONVERGENCE_HEADER
    assert tuple(comp[0]) == COMPARISON_HEADER
    assert tuple(sweep[0]) == SWEEP_HEADER
    assert [r[0] for r in comp[1:]] == ["5", "6"] and all(r[-1] == "ok" for r in comp[1:])
    assert len(sweep) == 1 + 2 * 6
    assert sorted(p.name for p in run_dir.iterdir()) == sorted(CSVS + ("records.json",))


def test_proposed_column_non_increasing(run_dir):
    rows = read(run_dir / "convergence.csv")[1:]
    for seed in {r[0] for r in rows}:
        vals = [float(r[2]) for r in rows if r[0] == seed]
        assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_outputs_byte_identical_across_reruns(run_dir, tmp_path):
    run_suite(from_mapping({"seed": 5}), tmp_path, n_seeds=2, jobs=2)
    for name in CSVS:
        assert (tmp_path / name).read_bytes() == (run_dir / name).read_bytes()


def test_infeasible_runs_become_flagged_rows(tmp_path):
    cfg = from_mapping({"seed": 0, "n_devices": 2, "t_max": 1e-4, "outer_max": 2,
                        "block_max_iter": 50, "reject_max": 20})
    records, points = run_suite(cfg, tmp_path)
    assert all(r.status != "ok" for r in records)
    comp = read(tmp_path / "comparison.csv")
    assert comp[1][1:5] == ["", "", "", ""]
    assert comp[1][5] == "infeasible:proposed;random_pf;random_theta;random_all"
    assert all(row[-1] == "infeasible" for row in read(tmp_path / "energy_sweep.csv")[1:])


def _rec(method, seed, obj, status="ok"):
    return RunRecord(method, seed, obj, 0.5, status=status)


def test_report_formatting():
    text = format_report([])
    assert "runs: 0" in text and "0.0% (0/0 seeds)" in text
    recs = [_rec("proposed", 0, 1.0), _rec("random_pf", 0, 2.0), _rec("proposed", 1, 3.0),
            _rec("random_pf", 1, 2.0), _rec("random_all", 0, None, "infeasible: x")]
    assert win_rate(recs) == (1, 2)
    text = format_report(recs)
    assert "proposed win rate: 50.0% (1/2 seeds)" in text
    assert "warning: every random_all run was infeasible" in text


def test_cli_run_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("seed: 2\nn_devices: 3\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--seeds", "1",
                 "--methods", "proposed,random_all", "--no-sweep"]) == 0
    assert {r.method_tag for r in load_records(out)} == {"proposed", "random_all"}
    assert read(out / "energy_sweep.csv") == [list(SWEEP_HEADER)]
    capsys.readouterr()
    assert main(["report", "--in", str(out)]) == 0
    assert "proposed win rate: 100.0% (1/1 seeds)" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("n_devices: 3\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert main(["report", "--in", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        main(["run", "--config", str(cfg), "--out", "x", "--methods", "nope"])


def test_cli_report_empty_records(tmp_path, capsys):
    (tmp_path / "records.json").write_text(json.dumps([]))
    assert main(["report", "--in", str(tmp_path)]) == 0
    assert "runs: 0" in capsys.readouterr().out


def test_cli_oracle_check_quick(capsys):
    code = main(["oracle-check", "--quick"])
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("criterion")]
    assert len(lines) == 8
    # the baseline-gap ordering is a known failure; every other criterion must pass
    assert all("[PASS]" in l for l in lines if not l.startswith("criterion 5 "))
    assert code == 1
