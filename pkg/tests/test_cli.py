import json

import numpy as np
import pytest

from mmsdist.cli import main


def _write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def files(tmp_path):
    a = _write(tmp_path / "A.mat", "3\n0 1 3\n1 0 2\n3 2 0\n")
    b = _write(tmp_path / "B.mat", "3\n0 2 3\n2 0 1\n3 1 0\n")
    p = _write(tmp_path / "P.json", "[0.5, 0.5, 0.0]")
    q = _write(tmp_path / "Q.json", '{"mass": [0.0, 0.5, 0.5]}')
    d = _write(tmp_path / "D.mat", "3\n0 1 2\n1 0 1\n2 1 0\n")
    s = _write(tmp_path / "S.mat", "2\n0.5 0.5\n0.5 0.5\n")
    x = _write(
        tmp_path / "X.json",
        '{"labels": ["o", "x"], "dist": [[0, 0.5], [0.5, 0]], "mass": [0.9, 0.1]}',
    )
    y = _write(
        tmp_path / "Y.json",
        '{"labels": ["o", "y"], "dist": [[0, 1.0], [1.0, 0]], "mass": [0.9, 0.1]}',
    )
    space = _write(
        tmp_path / "space.json",
        '{"kind": "finite", "labels": ["o", "x"], "dist": [[0, 0.5], [0.5, 0]],'
        ' "mass": [0.9, 0.1]}',
    )
    return dict(a=a, b=b, p=p, q=q, d=d, s=s, x=x, y=y, space=space, dir=tmp_path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_dm_command(files, capsys):
    code, out = _run(capsys, ["dm", files["a"], files["b"]])
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(1 / 3)
    assert payload["excluded"] == [1]


def test_dpi_command(files, capsys):
    code, out = _run(capsys, ["dpi", files["a"], files["b"]])
    payload = json.loads(out)
    assert code == 0
    assert payload["value"] == 0.0
    assert payload["permutation"] == [2, 1, 0]
    assert payload["exact"] is True
    code, out = _run(capsys, ["dpi", files["a"], files["b"], "--heuristic"])
    assert json.loads(out)["exact"] is False


def test_prokhorov_command(files, capsys):
    code, out = _run(capsys, ["prokhorov", files["p"], files["q"], files["d"]])
    payload = json.loads(out)
    assert code == 0
    assert payload["value"] == 0.5
    assert payload["coupling"][1][1] == pytest.approx(0.5)


def test_birkhoff_command(files, capsys):
    code, out = _run(capsys, ["birkhoff", files["s"]])
    payload = json.loads(out)
    assert code == 0
    assert payload["term_count"] == 2
    assert payload["reconstruction_error"] <= 1e-12


def test_ghp_command(files, capsys):
    code, out = _run(capsys, ["ghp", files["x"], files["y"]])
    payload = json.loads(out)
    assert code == 0
    assert payload["method"] == "identify"
    assert payload["upper"] == pytest.approx(0.1)


def test_sample_and_ensemble_commands(files, capsys):
    code, out = _run(
        capsys, ["sample", files["space"], "--n", "3", "--seed", "1", "--count", "2"]
    )
    assert code == 0
    assert out.splitlines()[0] == "3"
    code, out = _run(capsys, ["sample", files["space"], "--n", "2", "--json"])
    mats = json.loads(out)
    assert len(mats) == 1 and len(mats[0]) == 2
    code, out = _run(capsys, ["ensemble", files["space"], "--n", "2"])
    payload = json.loads(out)
    assert code == 0
    assert sum(a["probability"] for a in payload["atoms"]) == pytest.approx(1.0)


def test_entropy_command(files, capsys):
    code, out = _run(capsys, ["entropy", files["x"], files["x"]])
    payload = json.loads(out)
    assert code == 0
    assert payload["value"] == 0.0
    assert payload["embedding_count"] >= 1
    # diameters clash: no embedding, infinite value
    code, out = _run(capsys, ["entropy", files["y"], files["x"]])
    assert json.loads(out)["value"] == "inf"


def test_check_command_exit_codes_and_reports(files, capsys):
    out_json = files["dir"] / "r.json"
    out_csv = files["dir"] / "r.csv"
    code, out = _run(
        capsys,
        [
            "check",
            "gpaction",
            "--n",
            "3",
            "--out",
            str(out_json),
            "--csv",
            str(out_csv),
        ],
    )
    assert code == 0
    payload = json.loads(out_json.read_text())
    assert payload["passed"]["dp_values_equal"] is True
    assert out_csv.read_text().startswith("report,section,key,value")


def test_check_hoelder_cli(files, capsys):
    code, out = _run(capsys, ["check", "hoelder", "--eps", "0.1", "--n", "3"])
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"]["dp_le_sqrt_eps"] is True


def test_check_nonzero_exit_on_failure(files, capsys):
    # an absurdly small epsilon makes the concentration assertion fail
    code, out = _run(
        capsys,
        ["check", "sampconv", "--eps", "0.001", "--n", "50", "--trials", "10"],
    )
    assert code == 1
    assert json.loads(out)["passed"]["frequency_below_eps"] is False


def test_cli_error_paths(files, capsys):
    code = main(["dm", files["a"], str(files["dir"] / "missing.mat")])
    assert code == 2
    bad = _write(files["dir"] / "bad.mat", "2\n0 1\n")
    code = main(["dm", files["a"], bad])
    assert code == 2
