import json

import pytest

from qnodal.cli import main
from qnodal.config import ExperimentConfig, load_config, parse_config, render_config
from qnodal.errors import ConfigurationError

QUICK = """\
experiment = bochner
selectors = 325
seeds = 0
seeds = 1
seeds = 2
bump_traces = 5
detector_min_hits = 3
"""


def test_defaults_roundtrip():
    cfg = ExperimentConfig()
    assert parse_config(render_config(cfg)) == cfg


def test_parse_lists_comments_and_quotes():
    cfg = parse_config('seeds = 4  # first\nseeds = 9\nsurface = "sphere"\n\ntol_limit = 0.2\n')
    assert cfg.seeds == [4, 9] and cfg.surface == "sphere" and cfg.tol_limit == 0.2


@pytest.mark.parametrize("text", ["bogus = 1\n", "experiment = dance\n", "tol_limit = abc\n",
                                  "experiment = nodal\nexperiment = psido\n", "no equals sign\n"])
def test_parse_errors(text):
    with pytest.raises(ConfigurationError):
        parse_config(text)


def test_load_missing(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.cfg")


def run(tmp_path, text, name="run"):
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(text + f"output = {tmp_path / name}\n")
    return main(["run", str(cfg)]), tmp_path / name


def test_run_writes_tables_and_summary(tmp_path, capsys):
    code, out = run(tmp_path, QUICK)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema_version"] == 1 and summary["experiment"] == "bochner"
    assert [c["id"] for c in summary["criteria"]] == [1, 2, 3, 9]
    assert summary["criteria"][-1]["detail"]["hits"] == 3
    header = (out / "bochner.csv").read_text().splitlines()[0]
    assert header.startswith("id,verdict,phi_min")


def test_run_is_deterministic(tmp_path):
    _, a = run(tmp_path, QUICK, "a")
    _, b = run(tmp_path, QUICK, "b")
    for name in ("bochner.csv", "moments.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_threads_do_not_change_output(tmp_path, monkeypatch):
    _, a = run(tmp_path, QUICK, "serial")
    monkeypatch.setenv("LAB_THREADS", "4")
    _, b = run(tmp_path, QUICK, "threaded")
    assert (a / "bochner.csv").read_bytes() == (b / "bochner.csv").read_bytes()


def test_failing_criterion_exits_one(tmp_path):
    code, _ = run(tmp_path, QUICK + "psd_tol = 10.0\n")
    assert code == 1


def test_bad_config_exits_two(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["run", str(bad)]) == 2
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_report(tmp_path, capsys):
    _, a = run(tmp_path, QUICK, "a")
    _, b = run(tmp_path, QUICK, "b")
    capsys.readouterr()
    assert main(["report", str(a), str(b / "summary.json")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split()[:2] == ["path", "experiment"] and len(lines) == 3
    assert main(["report", "--json", str(a), str(b)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema_version"] == 1 and len(doc["runs"]) == 2
    assert doc["runs"][0]["passed"] == 4


def test_report_errors(tmp_path):
    assert main(["report"]) == 2
    assert main(["report", str(tmp_path / "nowhere")]) == 2
    junk = tmp_path / "junk.json"
    junk.write_text("[1, 2]")
    assert main(["report", str(junk)]) == 2


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as err:
        main(["fly"])
    assert err.value.code == 2
