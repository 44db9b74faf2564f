import io
import json
import math

import pytest

from isingbound import IsingGraph, IsingInstance
from isingbound.cli import run
from isingbound.core import dump_instance
from isingbound.report import (
    ResultRecord,
    RunConfig,
    canonical_json,
    default_threads,
    emit_plot_data,
    make_record,
    read_records,
    write_records,
)


def invoke(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, [json.loads(line) for line in out.getvalue().splitlines()]


@pytest.fixture
def path3(tmp_path):
    p = tmp_path / "path3.json"
    dump_instance(IsingInstance(IsingGraph.path(3), 1.0, (0.5, -1.0, math.inf)), p)
    return p


# ---------------------------------------------------------------- records

def test_config_digest_ignores_output():
    a = RunConfig("fuzz", {"trials": 5}, 1, 1e-9, "a.jsonl")
    b = RunConfig("fuzz", {"trials": 5}, 1, 1e-9, "b.jsonl")
    assert a.digest == b.digest
    assert a.digest != RunConfig("fuzz", {"trials": 6}, 1, 1e-9).digest
    with pytest.raises(ValueError):
        RunConfig("plot")


def test_record_round_trip(tmp_path):
    cfg = RunConfig("exact", {"instance": "x"})
    rec = make_record(cfg, {"kind": "exact", "values": [math.inf, -math.inf, 0.1], "n": 3}, "t0")
    assert ResultRecord.from_json(rec.to_json()) == rec
    path = tmp_path / "out" / "r.jsonl"
    write_records([rec, rec], path)
    assert read_records(path) == [rec, rec]


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("ISINGBOUND_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("ISINGBOUND_THREADS", "many")
    with pytest.raises(ValueError):
        default_threads()


# ---------------------------------------------------------------- plot data

def _decay_payload(k=5):
    pts = [[n, math.exp(-0.5 * n), 0.01] for n in range(1, k + 1)]
    return {"plot": "decay", "fit": {"points": pts, "slope": -0.5, "intercept": 0.0, "r_squared": 1.0}}


def test_decay_csv_shape():
    lines = emit_plot_data([_decay_payload()], "decay").splitlines()
    assert lines[0].startswith("# columns:") and "slope=-0.5" in lines[0]
    assert len(lines) == 2 + 5


def test_plot_data_rejects_empty_and_mixed():
    with pytest.raises(ValueError):
        emit_plot_data([], "decay")
    with pytest.raises(TypeError):
        emit_plot_data([_decay_payload(), {"plot": "lambda-sweep", "table_xy": []}], "decay")


def test_lambda_sweep_csv(tmp_path):
    code, recs = invoke("counterexample", "path", "--plot-csv", str(tmp_path / "p.csv"))
    assert code == 0 and recs[-1]["payload"]["certified"]
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert len(lines) == 2 + 101


# ---------------------------------------------------------------- exit codes

def test_missing_instance_exit_two():
    assert invoke("exact", "--instance", "does-not-exist.json")[0] == 2


def test_bad_flag_exit_two():
    assert invoke("fuzz", "--no-such-flag")[0] == 2


def test_malformed_json_names_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "n": 2,\n oops\n}')
    assert invoke("exact", "--instance", str(bad))[0] == 2
    assert "line 3" in capsys.readouterr().err


def test_capacity_exit_three():
    assert invoke("ssm", "--side", "30", "--seed", "0", "--y=-1,0")[0] == 3


def test_exact_command(path3):
    code, recs = invoke("exact", "--instance", str(path3), "--vertices", "2")
    assert code == 0 and recs[0]["payload"]["magnetizations"] == [1.0]


def test_single_check_violation_writes_reproducer(path3, tmp_path):
    repro = tmp_path / "repro"
    code, recs = invoke("check-theorem", "--instance", str(path3), "--h", "0,0,0", "--o", "1",
                        "--tolerance", "-1", "--seed", "0", "--reproducer-dir", str(repro))
    assert code == 1
    assert recs[0]["reproducer"] and "query" in json.loads(open(recs[0]["reproducer"]).read())


def test_theorem_campaign_clean():
    code, recs = invoke("check-theorem", "--fuzz", "--trials", "200", "--seed", "7", "--max-n", "8")
    assert code == 0 and recs[-1]["payload"]["violations"] == 0


def test_verbose_campaign_emits_trials():
    code, recs = invoke("fuzz", "--trials", "4", "--seed", "2", "--verbose")
    assert code == 0
    assert [r["payload"]["kind"] for r in recs] == ["trial"] * 4 + ["campaign"]


def test_fresh_seed_recorded(capsys):
    code, recs = invoke("lemma", "--points", "300")
    assert code == 0
    seed = recs[0]["payload"]["config"]["seed"]
    assert f"using fresh seed {seed}" in capsys.readouterr().err


def test_lemma_point_command():
    code, recs = invoke("lemma", "--theta", "0.4", "--a", "0.2", "--b", "-0.3", "--c", "0.5", "--seed", "0")
    assert code == 0 and recs[0]["payload"]["f_value"] <= 0


def test_ssm_scan_and_csv(tmp_path):
    csv = tmp_path / "tv.csv"
    code, recs = invoke("ssm", "--side", "5", "--seed", "0", "--plot-csv", str(csv))
    assert code == 0 and recs[0]["payload"]["monotone"]
    assert len(csv.read_text().splitlines()) == 2 + 20


def test_sphere_coupling_command():
    code, recs = invoke("sphere-coupling", "--side", "5", "--field", "gaussian:1", "--seed", "3")
    assert code == 0 and recs[0]["payload"]["all_dominate"]


def test_rfim_command_records(tmp_path):
    out = tmp_path / "rfim.jsonl"
    code, _ = invoke("rfim-decay", "--N", "1", "2", "--sweeps", "256", "--replicas", "2",
                     "--seed", "5", "--output", str(out), "--plot-csv", str(tmp_path / "d.csv"))
    assert code == 0
    recs = read_records(out)
    assert [r.kind for r in recs] == ["rfim-replica"] * 4 + ["rfim-decay"]
    assert len((tmp_path / "d.csv").read_text().splitlines()) == 2 + 2


# ---------------------------------------------------------------- determinism

@pytest.mark.parametrize("argv", [
    ("fuzz", "--trials", "50", "--seed", "9"),
    ("rfim-decay", "--N", "1", "--sweeps", "256", "--replicas", "2", "--seed", "9"),
    ("ssm", "--side", "4", "--method", "mc", "--y=-1,0", "--sweeps", "256", "--replicas", "1", "--seed", "9"),
])
def test_payloads_byte_identical(argv):
    a, b = invoke(*argv)[1], invoke(*argv)[1]
    assert [canonical_json(r["payload"]) for r in a] == [canonical_json(r["payload"]) for r in b]
