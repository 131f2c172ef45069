import io
import json

import pytest

from suffup.cli import main


def run(argv, capsys):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue(), capsys.readouterr().err


@pytest.fixture
def three_csv(tmp_path):
    p = tmp_path / "three.csv"
    p.write_text("time,status\n1,1\n2,0\n3,1\n")
    return str(p)


@pytest.fixture
def eventless_csv(tmp_path):
    p = tmp_path / "none.csv"
    p.write_text("time,status\n1,0\n2,0\n")
    return str(p)


@pytest.fixture
def data_csv(tmp_path):
    from suffup import to_csv
    from suffup.simulation import Scenario, exponential, gen_sample, uniform

    p = tmp_path / "data.csv"
    p.write_text(to_csv(gen_sample(Scenario(exponential(1.0), uniform(0, 3), 0.8, 300), 1)))
    return str(p)


class TestTest:
    def test_json_keys(self, data_csv, capsys):
        code, out, _ = run(["test", "--input", data_csv, "--bootstrap", "99", "--format", "json"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert {"t_n", "p_naive", "p_gumbel", "epsilon", "critical_value", "p_value", "reject", "seed"} <= set(payload)
        assert payload["bootstrap"] == 99 and payload["alpha"] == 0.05

    def test_defaults(self, data_csv, capsys):
        code, out, _ = run(["test", "--input", data_csv, "--format", "json"], capsys)
        assert code == 0 and json.loads(out)["bootstrap"] == 1000

    def test_byte_identical(self, data_csv, capsys):
        argv = ["test", "--input", data_csv, "--bootstrap", "50", "--seed", "4", "--format", "json"]
        assert run(argv, capsys)[1] == run(argv, capsys)[1]

    def test_text_matches_json(self, data_csv, capsys):
        base = ["test", "--input", data_csv, "--bootstrap", "50"]
        payload = json.loads(run(base + ["--format", "json"], capsys)[1])
        text = run(base, capsys)[1]
        assert f"{payload['t_n']:.4f}" in text
        assert f"{payload['p_value']:.4f}" in text
        assert f"{payload['epsilon']:.4f}" in text

    def test_diagnostic(self, data_csv, capsys):
        code, out, _ = run(
            ["test", "--input", data_csv, "--bootstrap", "20", "--diagnostic", "--format", "json"], capsys
        )
        assert code == 0 and "diagnostic" in json.loads(out)

    def test_user_epsilon_and_fixed(self, data_csv, capsys):
        code, out, _ = run(
            ["test", "--input", data_csv, "--bootstrap", "20", "--epsilon", "1.0",
             "--fixed-epsilon", "--format", "json"],
            capsys,
        )
        payload = json.loads(out)
        assert code == 0
        assert payload["epsilon_branch"] == "user_supplied" and payload["fixed_epsilon"]

    def test_epsilon_out_of_range(self, three_csv, capsys):
        assert run(["test", "--input", three_csv, "--epsilon", "10"], capsys)[0] == 1

    @pytest.mark.parametrize("flag", [["--alpha", "1.5"], ["--bootstrap", "0"], ["--seed", "-1"], ["--format", "xml"]])
    def test_usage_errors(self, three_csv, capsys, flag):
        with pytest.raises(SystemExit) as exc:
            run(["test", "--input", three_csv] + flag, capsys)
        assert exc.value.code == 1

    def test_no_events(self, eventless_csv, capsys):
        code, _, err = run(["test", "--input", eventless_csv], capsys)
        assert code == 2 and "no uncensored observations" in err

    def test_missing_file(self, tmp_path, capsys):
        assert run(["test", "--input", str(tmp_path / "nope.csv")], capsys)[0] == 2

    def test_bad_data(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("time,status\n0,1\n")
        code, _, err = run(["test", "--input", str(p)], capsys)
        assert code == 2 and err


class TestKm:
    def test_three_obs(self, three_csv, tmp_path, capsys):
        out = tmp_path / "km.csv"
        assert run(["km", "--input", three_csv, "--out", str(out)], capsys)[0] == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,F_hat"
        rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
        assert rows == [(0.0, 0.0), (1.0, 1 / 3), (3.0, 1.0)]

    def test_no_events(self, eventless_csv, tmp_path, capsys):
        out = tmp_path / "km.csv"
        assert run(["km", "--input", eventless_csv, "--out", str(out)], capsys)[0] == 0
        assert out.read_text() == "t,F_hat\n0.0,0.0\n"

    def test_unwritable(self, three_csv, tmp_path, capsys):
        target = tmp_path / "missing_dir" / "km.csv"
        assert run(["km", "--input", three_csv, "--out", str(target)], capsys)[0] == 3

    def test_data_error(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("time,status\n1,7\n")
        assert run(["km", "--input", str(p), "--out", str(tmp_path / "o.csv")], capsys)[0] == 2


class TestSimulate:
    def test_preset(self, capsys):
        code, out, _ = run(
            ["simulate", "--preset", "table1:h0:lambda2.5:p0.9:n800", "--runs", "2",
             "--bootstrap", "9", "--format", "json"],
            capsys,
        )
        payload = json.loads(out)
        assert code == 0
        assert payload["reference_rate"] == 0.043
        assert payload["scenario"]["n"] == 800

    def test_explicit_spec_deterministic(self, capsys):
        argv = ["simulate", "--failure", "exponential:1", "--censor", "uniform:0:2", "--p", "0.9",
                "--n", "100", "--runs", "1", "--bootstrap", "19", "--seed", "7", "--format", "json"]
        first = run(argv, capsys)
        assert first[0] == 0
        assert first[1] == run(argv, capsys)[1]

    def test_malformed_spec(self, capsys):
        code, _, err = run(
            ["simulate", "--failure", "weibull:1.5", "--censor", "uniform:0:2", "--p", "0.9", "--n", "10"],
            capsys,
        )
        assert code == 1 and "weibull" in err

    def test_missing_spec(self, capsys):
        assert run(["simulate", "--runs", "1"], capsys)[0] == 1

    def test_bad_preset(self, capsys):
        assert run(["simulate", "--preset", "table9:h0:lambda1:p0.9"], capsys)[0] == 1


class TestSummarize:
    def test_text(self, three_csv, capsys):
        code, out, _ = run(["summarize", "--input", three_csv], capsys)
        assert code == 0 and "0.3333" in out

    def test_json_stable(self, three_csv, capsys):
        out = run(["summarize", "--input", three_csv, "--format", "json"], capsys)[1]
        payload = json.loads(out)
        assert list(payload) == sorted(payload)
        assert payload["censoring_rate"] == 1 / 3 and payload["plateau_censored_count"] == 0

    def test_all_events(self, tmp_path, capsys):
        p = tmp_path / "ev.csv"
        p.write_text("time,status\n1,1\n2,1\n")
        payload = json.loads(run(["summarize", "--input", str(p), "--format", "json"], capsys)[1])
        assert payload["plateau_censored_count"] == 0

    def test_data_error(self, tmp_path, capsys):
        p = tmp_path / "e.csv"
        p.write_text("time,status\n")
        assert run(["summarize", "--input", str(p)], capsys)[0] == 2


def test_no_command(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
