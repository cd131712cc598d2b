import json
import os

import numpy as np
import pytest

from pedigree_scc import harness
from pedigree_scc.generate import RngSpec, sample_wcm
from pedigree_scc.harness import (
    ClaimReport,
    ExperimentConfig,
    ExperimentError,
    judge,
    recheck,
    run_experiment,
    summarize,
    table_to_csv,
    write_report,
)
from pedigree_scc.structure import scc_decompose


def strip_clock(d):
    for row in d["rows"]:
        row.pop("wall_clock_s")
    return d


def test_config_validation():
    with pytest.raises(ValueError, match="unknown claim"):
        ExperimentConfig("nope", (10,))
    with pytest.raises(ValueError):
        ExperimentConfig("giant", ())
    with pytest.raises(ValueError):
        ExperimentConfig("giant", (100, 10))
    with pytest.raises(ValueError):
        ExperimentConfig("giant", (10,), replicates=0)
    with pytest.raises(ValueError):
        ExperimentConfig("giant", (10,), format="xml")


def test_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        run_experiment(ExperimentConfig("second_scc", (200, 400), replicates=4, seed=3, output=str(out), workers=1))
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert da["schema"] == 1
    assert json.dumps(strip_clock(da), sort_keys=True) == json.dumps(strip_clock(db), sort_keys=True)


def test_replicate_rerunnable_in_isolation():
    report = run_experiment(ExperimentConfig("giant", (300,), replicates=3, seed=5, workers=1))
    row = report.rows[0]
    assert row["substreams"] == {"seed": 5, "tags": ["graph"]}
    g = sample_wcm(300, RngSpec(5, 2, "graph"))
    assert row["per_replicate"][2]["value"] == scc_decompose(g).giant_fraction


def test_workers_do_not_change_statistics():
    one = run_experiment(ExperimentConfig("in_edges", (500,), replicates=4, seed=1, workers=1))
    two = run_experiment(ExperimentConfig("in_edges", (500,), replicates=4, seed=1, workers=2))
    assert one.rows[0]["per_replicate"] == two.rows[0]["per_replicate"]
    assert one.rows[0]["estimate"] == two.rows[0]["estimate"]


def test_worker_count_from_environment(monkeypatch):
    cfg = ExperimentConfig("giant", (10,))
    monkeypatch.setenv(harness.WORKERS_ENV, "3")
    assert harness.worker_count(cfg) == 3
    monkeypatch.delenv(harness.WORKERS_ENV)
    assert harness.worker_count(cfg) == (os.cpu_count() or 1)
    assert harness.worker_count(ExperimentConfig("giant", (10,), workers=2)) == 2


def test_recheck_and_tampering():
    report = run_experiment(ExperimentConfig("out_edges", (300, 600), replicates=5, seed=2, workers=1)).as_dict()
    assert recheck(report)
    report["rows"][0]["passed"] = not report["rows"][0]["passed"]
    assert not recheck(report)


def test_judge_examples():
    assert judge("giant", 10**5, [{"value": 0.79}] * 3, {})[0]
    assert not judge("giant", 10**5, [{"value": 0.79}, {"value": 0.83}], {})[0]
    assert not judge("paths", 10**5, [{"value": 11}] * 2 + [{"value": 3}] * 8, {})[0]
    assert judge("paths", 10**5, [{"value": 11}] + [{"value": 3}] * 9, {})[0]
    assert not judge("out_edges", 10**5, [{"value": 0}] * 9 + [{"value": 101}], {})[0]
    assert judge("stationary", 10, [{"value": 0.0, "residual": 1e-10}], {})[0]
    assert not judge("stationary", 10, [{"value": 0.0, "residual": 1e-8}], {})[0]


def test_contract_errors_carry_context(monkeypatch):
    def boom(n, seed, rep, cfg):
        raise ValueError("bad input")
    monkeypatch.setitem(harness.REPLICATE_FNS, "giant", boom)
    with pytest.raises(ExperimentError, match=r"claim=giant, N=10, replicate=0: bad input"):
        run_experiment(ExperimentConfig("giant", (10,), replicates=1, workers=1))


def test_unwritable_output(tmp_path):
    with pytest.raises(ExperimentError, match="not writable"):
        run_experiment(ExperimentConfig("giant", (10,), output=str(tmp_path / "missing" / "r.json")))


def test_summarize_examples():
    assert summarize([]) == []
    a = run_experiment(ExperimentConfig("giant", (100,), replicates=2, workers=1))
    b = run_experiment(ExperimentConfig("second_scc", (100,), replicates=2, workers=1))
    table = summarize([a, b.as_dict()])
    assert [(r["claim"], r["n"]) for r in table] == [("giant", 100), ("second_scc", 100)]
    with pytest.raises(ValueError, match="duplicate"):
        summarize([a, a])
    csv_text = table_to_csv(table)
    assert csv_text.splitlines()[0].startswith("claim,n,replicates")
    assert len(csv_text.splitlines()) == 3


def test_write_report_atomic(tmp_path):
    report = ClaimReport("giant", 0, [])
    path = tmp_path / "r.csv"
    write_report(report, path, "csv")
    assert path.read_text().startswith("claim,n")
    assert [p.name for p in tmp_path.iterdir()] == ["r.csv"]


def test_small_equivalence_run():
    report = run_experiment(ExperimentConfig("equivalence", (2,), replicates=1, samples=20_000, workers=1))
    row = report.rows[0]
    assert row["per_replicate"][0]["encodings"] == 9
    assert row["passed"]


def test_small_hazard_and_stationary_runs():
    hz = run_experiment(ExperimentConfig("hazard", (64,), replicates=2, pairs=2000, t_max=30, workers=1))
    d = hz.rows[0]["details"]
    assert d["window"] == [12, 30]
    assert recheck(hz.as_dict())
    st = run_experiment(ExperimentConfig("stationary", (300,), replicates=2, workers=1))
    assert st.rows[0]["estimate"] <= 1e-8
    ind = run_experiment(ExperimentConfig("indegree", (100, 1000), replicates=5, workers=1))
    assert ind.rows[1]["details"]["ratio_from"] == 100
    assert np.isfinite(ind.rows[1]["details"]["median_ratio"])
