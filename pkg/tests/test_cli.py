import json

import pytest

from smoothsieve import cli
from smoothsieve.cli import UsageError, parse_args, render, run


def s(schemes_dir, name):
    return str(schemes_dir / name)


def test_parse_args_predict(schemes_dir):
    cfg = parse_args(["predict", "--scheme", s(schemes_dir, "nodal_cubic.scm"),
                      "--q", "2"])
    assert cfg.subcommand == "predict"
    assert cfg.q == 2


def test_parse_args_estimate_range(schemes_dir):
    cfg = parse_args(["estimate", "--scheme", s(schemes_dir, "p2.scm"),
                      "-d", "3..5", "--budget", "exhaustive", "--exact"])
    assert cfg.degrees == (3, 4, 5)
    assert cfg.budget == ("exhaustive",)
    assert cfg.exact is True


def test_parse_args_bad_budget(schemes_dir):
    with pytest.raises(UsageError) as info:
        parse_args(["estimate", "--scheme", s(schemes_dir, "p2.scm"),
                    "-d", "3", "--budget", "sample:banana"])
    assert "banana" in str(info.value)


def test_parse_args_bad_degree(schemes_dir):
    with pytest.raises(UsageError):
        parse_args(["estimate", "--scheme", s(schemes_dir, "p2.scm"),
                    "-d", "5..3"])


def test_parse_args_missing_required():
    with pytest.raises(UsageError):
        parse_args(["predict"])


def test_run_predict_nodal(schemes_dir):
    cfg = parse_args(["predict", "--scheme", s(schemes_dir, "nodal_cubic.scm")])
    code, report = run(cfg)
    assert code == 0
    assert report["schema"] == 1
    assert report["result"]["value"] == "15/128"
    parts = {(f["part"], f["s"]): f["zeta"] for f in report["result"]["factors"]}
    assert parts == {("X-V", 4): "128/45", ("V_1", 2): "3/2", ("V_2", 1): "2"}


def test_run_singdist_predict_p2(schemes_dir):
    cfg = parse_args(["singdist", "predict", "--scheme",
                      s(schemes_dir, "p2.scm"), "--ell-max", "1"])
    code, report = run(cfg)
    assert code == 0
    entries = report["result"]["entries"]
    assert entries["0"]["value"] == "21/64"
    assert entries["1"]["value"] == "21/64"


def test_run_predict_degenerate(schemes_dir):
    cfg = parse_args(["predict", "--scheme",
                      s(schemes_dir, "nonreduced_line.scm")])
    code, report = run(cfg)
    assert code == 0
    assert report["result"]["value"] == "0"
    hc = report["result"]["hypothesis_check"]
    assert hc["status"] == "violated" and hc["e"] == 2


def test_run_embed_obstruction_exit_2(schemes_dir):
    cfg = parse_args(["embed", "--scheme",
                      s(schemes_dir, "obstructed_axes.scm"),
                      "--target-dim", "2"])
    code, report = run(cfg)
    assert code == 2
    wit = report["result"]["witness"]
    assert wit["embedding_dimension"] == 3
    assert wit["representative"] == ["0", "0", "0", "1"]


def test_run_embed_success(schemes_dir):
    cfg = parse_args(["embed", "--scheme", s(schemes_dir, "nodal_cubic.scm"),
                      "--target-dim", "2", "--d-max", "8"])
    code, report = run(cfg)
    assert code == 0
    assert report["result"]["status"] == "success"
    assert report["result"]["chain"]


def test_run_points(schemes_dir):
    cfg = parse_args(["points", "--scheme", s(schemes_dir, "nodal_cubic.scm"),
                      "--max-degree", "2"])
    code, report = run(cfg)
    assert code == 0
    pts = report["result"]["points"]
    assert {(p["degree"], p["e"]) for p in pts} == {(1, 1), (1, 2), (2, 1)}


def test_run_zeta(schemes_dir):
    cfg = parse_args(["zeta", "--scheme", s(schemes_dir, "p2.scm"),
                      "--s", "3", "--s", "4"])
    code, report = run(cfg)
    assert code == 0
    vals = {v["s"]: v["exact"] for v in report["result"]["values"]}
    assert vals[3] == "64/21"


def test_run_lowdeg(schemes_dir):
    cfg = parse_args(["lowdeg", "--scheme", s(schemes_dir, "p2.scm"),
                      "--r", "2"])
    code, report = run(cfg)
    assert code == 0
    assert report["result"]["predicted"] == "823543/2097152"


def test_determinism_across_threads_and_bytes(schemes_dir):
    args = ["estimate", "--scheme", s(schemes_dir, "p2.scm"), "-d", "3",
            "--budget", "sample:300", "--seed", "11"]
    outs = []
    for t in ("1", "2"):
        code, report = run(parse_args(args + ["--threads", t]))
        blob = json.dumps(report, indent=2)
        blob = blob.replace('"threads": 2', '"threads": 1')  # echo differs
        outs.append((code, blob))
    assert outs[0] == outs[1]


def test_identical_invocations_identical_bytes(schemes_dir):
    args = ["singdist", "estimate", "--scheme", s(schemes_dir, "p1.scm"),
            "-d", "2..3", "--budget", "exhaustive", "--seed", "5"]
    blobs = {json.dumps(run(parse_args(args))[1], indent=2) for _ in range(2)}
    assert len(blobs) == 1


def test_csv_output(schemes_dir):
    cfg = parse_args(["estimate", "--scheme", s(schemes_dir, "p1.scm"),
                      "-d", "2", "--out", "csv"])
    code, report = run(cfg)
    text = render(report, "csv")
    lines = text.splitlines()
    assert lines[0] == "d,metric,value"
    assert any(line.startswith("2,") for line in lines[1:])


def test_main_exit_codes(schemes_dir, capsys):
    assert cli.main(["predict", "--scheme",
                     s(schemes_dir, "nodal_cubic.scm")]) == 0
    capsys.readouterr()
    assert cli.main(["predict", "--scheme", "/nonexistent.scm"]) == 1
    capsys.readouterr()
    assert cli.main(["estimate", "--scheme", s(schemes_dir, "p2.scm"),
                     "-d", "3", "--budget", "sample:banana"]) == 1
    err = capsys.readouterr().err
    assert "banana" in err
    assert cli.main(["embed", "--scheme", s(schemes_dir, "obstructed_axes.scm"),
                     "--target-dim", "2"]) == 2
    capsys.readouterr()


def test_main_renders_json(schemes_dir, capsys):
    assert cli.main(["singdist", "predict", "--scheme",
                     s(schemes_dir, "p2.scm"), "--ell-max", "1"]) == 0
    out = capsys.readouterr().out
    data = json.loads(out)
    assert data["result"]["entries"]["1"]["value"] == "21/64"
