import io
import json

import pytest

from skeptic_update.cli import run
from skeptic_update.simulate import DgpConfig, simulate_survey
from skeptic_update.dataio import write_survey

from conftest import DATA


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_describe_matches_snapshot(golden_path):
    code, out, err = call("describe", "--input", str(golden_path))
    assert code == 0
    assert out == (DATA / "golden_describe.txt").read_text()
    assert "invariant violation" in err
    header = out.splitlines()[2].split()
    assert header == ["Mean", "Std.dev", "Min", "Max", "Missing"]


def test_describe_filter_snapshot(golden_path):
    code, out, _ = call("describe", "--input", str(golden_path), "--filter", "change=1")
    assert code == 0
    assert out == (DATA / "golden_describe_updaters.txt").read_text()


def test_fit_tobit_layout(golden_path):
    code, out, _ = call("fit", "tobit", "--input", str(golden_path))
    assert code == 0
    assert "Observations                           2,828" in out
    assert "(df = 5)" in out
    assert "gamma-hat = 1 - " in out
    assert "Note: *p<0.1; **p<0.05; ***p<0.01" in out


def test_fit_tobit_jsonl_records(golden_path):
    code, out, _ = call("fit", "tobit", "--input", str(golden_path), "--format", "jsonl")
    records = [json.loads(line) for line in out.splitlines()]
    assert code == 0
    assert records[0]["term"] == "prior"
    assert records[0]["latent_estimate"] == pytest.approx(1 - records[0]["estimate"])
    summary = records[-1]
    assert summary["n"] == 2828 and summary["wald_df"] == 5


def test_no_censoring_exit_code(tmp_path):
    frame = simulate_survey(DgpConfig(model="linear", n=200, seed=1))
    frame["post"] = frame["prior"] * 0.5
    path = tmp_path / "all_updaters.csv"
    write_survey(frame, path)
    code, out, err = call("fit", "tobit", "--input", str(path))
    assert code == 2
    assert "NoCensoring" in err
    assert out == ""


def test_hurdle_margins_predict(golden_path):
    code, out, _ = call("fit", "hurdle", "--input", str(golden_path), "--transform", "log")
    assert code == 0
    assert "Marginal effects (probit)" in out and "log(Post)" in out
    code, out, _ = call("margins", "--input", str(golden_path), "--link", "logit")
    assert code == 0 and "Average Marginal Effects (logit)" in out
    code, out, _ = call("predict", "--input", str(golden_path), "--format", "csv")
    assert code == 0
    assert out.splitlines()[0].startswith("threshold,n,n_correct,success_rate")
    code, out, _ = call("fit", "binary", "--input", str(golden_path))
    assert code == 0 and "Akaike Inf. Crit." in out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["fit", "tobit"],
        ["describe", "--input", "x.csv", "--format", "xml"],
        ["fit", "tobit", "--input", "x.csv", "--covariates", "income"],
        ["predict", "--input", "x.csv", "--threshold", "2"],
        ["simulate", "--param", "prior"],
    ],
)
def test_usage_errors_exit_1(argv):
    code, out, err = call(*argv)
    assert code == 1
    assert "usage:" in err


def test_missing_file_exit_2(tmp_path):
    code, _, err = call("describe", "--input", str(tmp_path / "nope.csv"))
    assert code == 2


def test_simulate_stdout_and_file_agree(tmp_path):
    path = tmp_path / "sim.csv"
    code, out, _ = call("simulate", "--n", "120", "--seed", "9", "--param", "sigma=80")
    assert code == 0
    call("simulate", "--n", "120", "--seed", "9", "--param", "sigma=80", "--out", str(path))
    assert path.read_text() == out
    assert out.count("\n") == 121


def test_mc_small_run_is_deterministic():
    argv = ["mc", "--model", "linear", "--reps", "4", "--n", "200", "--seed", "3"]
    assert call(*argv) == call(*argv, "--threads", "3")
    code, out, _ = call(*argv)
    assert code == 0 and "Failed replications: 0" in out


def test_timings_only_on_request():
    argv = ["mc", "--model", "linear", "--reps", "3", "--n", "100"]
    assert "elapsed" not in call(*argv)[2]
    assert "elapsed" in call(*argv, "--timings")[2]
