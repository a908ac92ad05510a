import json

import pytest

from igklo.cli import canonical, load_config, main

EX_A = {"diagram": {"type": "A", "rank": 1}, "lambda": [2], "mu": [0]}


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_check_ex_a(tmp_path, capsys):
    code, out = run(["check", "--config", write(tmp_path, EX_A), "--trunc", "8"], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert rep["version"] and rep["ok"]
    assert rep["suites"]["split"]["failed"] == 0
    assert load_config(rep["config"]) == rep["config"]


def test_check_sabotage_exit_1(tmp_path, capsys):
    code, out = run(["check", "--config", write(tmp_path, {**EX_A, "sabotage": True})], capsys)
    assert code == 1
    assert json.loads(out.out)["suites"]["quasisplit"]["failures"]


@pytest.mark.parametrize(
    "cfg",
    [
        {"diagram": {"type": "A", "rank": 3, "tau": [2, 3, 1]}, "lambda": [0, 2, 0], "mu": [0, 0, 0]},
        {"diagram": {"type": "A", "rank": 1}, "lambda": [2]},
        {**EX_A, "bogus": 1},
        {**EX_A, "mu": [1]},
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, cfg):
    code, out = run(["check", "--config", write(tmp_path, cfg)], capsys)
    assert code == 2 and "error" in out.err


def test_image_golden(tmp_path, capsys):
    code, out = run(["image", "--config", write(tmp_path, EX_A), "--family", "H", "--node", "1", "--modes", "0..3"], capsys)
    assert code == 0
    assert json.loads(out.out)["modes"] == {"0": "1", "1": "0", "2": "-z_{1,1}^2", "3": "0"}
    code, out = run(["image", "--config", write(tmp_path, EX_A), "--family", "B", "--node", "1", "--modes", "0..1"], capsys)
    assert json.loads(out.out)["modes"] == {"0": "outside validity window", "1": "-i*z_{1,1}"}


def test_dict_and_classify(capsys):
    code, out = run(["dict", "--n", "2", "--N", "4", "--mu", "2"], capsys)
    rec = json.loads(out.out)
    assert code == 0 and rec["partition"] == [1, 3] and rec["dim"] == 2 and rec["s12"] == 1
    code, out = run(["classify", "--partition", "2,2,2"], capsys)
    assert json.loads(out.out)["label"] == "C3"
    code, _ = run(["dict", "--partition", "1,2"], capsys)
    assert code == 2


def test_report_stable_across_jobs(tmp_path, capsys):
    path = write(tmp_path, {"model": "gl", "gl": {"n": 2, "lambda": [2, 0], "mu": [0, 2]}, "trunc": 4})
    reps = []
    for jobs in ("1", "2"):
        code, out = run(["check", "--config", path, "--jobs", jobs], capsys)
        assert code == 0
        reps.append(canonical(json.loads(out.out)))
    assert reps[0] == reps[1]


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _ = run(["check", "--config", write(tmp_path, {"model": "kappa", "partition": [1, 3]}), "--out", str(out)], capsys)
    assert code == 0 and json.loads(out.read_text())["dictionary"]["type"] == "D"
