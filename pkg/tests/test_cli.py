import json

import pytest
from click.testing import CliRunner

from cli import cli, main
from settings import SEED_VARIABLE
from syntax import parse_derivation
from strategies import CORPUS


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(SEED_VARIABLE, raising=False)
    return CliRunner()


def corpus(name):
    return str(CORPUS / name)


@pytest.mark.parametrize("name", ["beyond_ill.deriv.json", "closed.deriv.json", "ill_identity.deriv.json"])
def test_golden_files_check(runner, name):
    result = runner.invoke(cli, ["check", corpus(name)])
    assert result.exit_code == 0
    assert "valid" in result.output


def test_check_with_system(runner):
    assert runner.invoke(cli, ["check", "--system", "ull", corpus("beyond_ill.deriv.json")]).exit_code == 0
    assert runner.invoke(cli, ["check", "--system", "cll", corpus("beyond_ill.deriv.json")]).exit_code == 2


def test_check_judgment_file(runner):
    result = runner.invoke(cli, ["check", corpus("tensor_unit.judgment")])
    assert result.exit_code == 0
    assert result.output.startswith("derivable")


def test_classify_reports_r_degree(runner):
    result = runner.invoke(cli, ["--json", "classify", corpus("beyond_ill.deriv.json")])
    assert result.exit_code == 1
    assert json.loads(result.output)["max_r_degree"] == 2


def test_classify_inside_fragment(runner):
    assert runner.invoke(cli, ["classify", corpus("closed.deriv.json")]).exit_code == 0


def test_run_closed_program(runner, tmp_path):
    trace = tmp_path / "trace.json"
    result = runner.invoke(cli, ["run", corpus("closed.deriv.json"), "--fuel", "50", "--trace", str(trace)])
    assert result.exit_code == 0
    assert result.output.strip() == "close z"
    assert [step["rule"] for step in json.loads(trace.read_text())] == ["betaClose"]


def test_run_out_of_fuel(runner):
    result = runner.invoke(cli, ["run", corpus("closed.deriv.json"), "--fuel", "0"])
    assert result.exit_code == 1


def test_run_open_program_is_a_usage_error(runner):
    assert runner.invoke(cli, ["run", corpus("beyond_ill.deriv.json")]).exit_code == 2


def test_reduce(runner):
    result = runner.invoke(cli, ["--json", "reduce", corpus("beta_close.spi"), "--steps", "5"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["result"] == "close z"
    assert [s["rule"] for s in payload["steps"]] == ["betaClose"]


def test_reduce_all_redexes(runner):
    result = runner.invoke(cli, ["reduce", "--all-redexes", corpus("beta_close.spi")])
    assert result.exit_code == 0
    assert "betaClose" in result.output


def test_translate_pairs(runner):
    result = runner.invoke(cli, ["translate", "--from", "ull", "--to", "cll", corpus("beyond_ill.deriv.json")])
    assert result.exit_code == 0
    assert parse_derivation(result.output).system == "cll"
    bad = runner.invoke(cli, ["translate", "--from", "ill", "--to", "cll", corpus("beyond_ill.deriv.json")])
    assert bad.exit_code == 2
    outside = runner.invoke(cli, ["translate", "--from", "ull", "--to", "ill", corpus("beyond_ill.deriv.json")])
    assert outside.exit_code == 1


def test_diagnose(runner):
    result = runner.invoke(cli, ["--json", "diagnose", corpus("beyond_ill.spi")])
    assert result.exit_code == 1
    assert json.loads(result.output)[0]["kind"] == "NonLocalServer"
    assert runner.invoke(cli, ["diagnose", corpus("local_server.spi")]).exit_code == 0


def test_infer_process_file(runner):
    result = runner.invoke(cli, ["infer", corpus("beyond_ill.spi"),
                                 "--type", "?bot -o ?bot", "--type", "?bot * !1"])
    assert result.exit_code == 0
    assert result.output.strip().endswith("3 derivations")


def test_infer_judgment_prints_a_document(runner):
    result = runner.invoke(cli, ["infer", corpus("tensor_unit.judgment")])
    assert result.exit_code == 0
    assert parse_derivation(result.output).system == "ull"


def test_parse_errors_exit_2(runner, tmp_path):
    broken = tmp_path / "broken.spi"
    broken.write_text("recv x(. close x")
    assert runner.invoke(cli, ["diagnose", str(broken)]).exit_code == 2
    assert runner.invoke(cli, ["diagnose", str(tmp_path / "missing.spi")]).exit_code == 2


def test_fuzz_is_reproducible(runner):
    args = ["--json", "fuzz", "--suite", "duality_involution", "--suite", "parse_print_roundtrip",
            "--cases", "4", "--seed", "9", "--depth", "3"]
    first, second = runner.invoke(cli, args), runner.invoke(cli, args)
    assert first.exit_code == 0
    drop_time = lambda out: [dict(r, wall_time=0) for r in json.loads(out)["reports"]]
    assert drop_time(first.output) == drop_time(second.output)


def test_seed_from_environment(runner, monkeypatch):
    monkeypatch.setenv(SEED_VARIABLE, "123")
    result = runner.invoke(cli, ["--json", "fuzz", "--suite", "duality_involution", "--cases", "1",
                                 "--seed", "9"])
    assert json.loads(result.output)["seed"] == 123


def test_main_returns_exit_codes(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["check", corpus("closed.deriv.json")]) == 0
    assert main(["classify", corpus("beyond_ill.deriv.json")]) == 1
    assert main(["classify", str(tmp_path / "missing.deriv.json")]) == 2
