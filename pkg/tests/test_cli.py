from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from oracles import layered_T
from scatterbound import cli
from scatterbound.errors import StiffFailure


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def test_exact_delta_row(capsys):
    code, out, _ = run(["exact", "--potential", "kind=delta,g=2", "--energy", "1"], capsys)
    assert code == 0
    head, rows = table(out)
    assert head == ["E", "T_exact", "R_exact"]
    assert [float(v) for v in rows[0]] == pytest.approx([1.0, 0.5, 0.5], abs=1e-15)


def test_exact_free_and_resonance(capsys):
    code, out, _ = run(["exact", "--potential", '{"kind": "free"}', "--energy", "0.5:3:4"], capsys)
    assert code == 0
    assert all(float(r[1]) == 1.0 for r in table(out)[1])
    E = 1.0 + math.pi**2
    code, out, _ = run(["exact", "--potential", "kind=square_barrier,V0=1,L=1", "--energy", repr(E)], capsys)
    assert float(table(out)[1][0][1]) == pytest.approx(1.0, abs=1e-12)


def test_potential_file(tmp_path, capsys):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"kind": "delta", "g": 2.0}))
    code, out, _ = run(["exact", "--potential", str(f), "--energy", "1"], capsys)
    assert code == 0 and float(table(out)[1][0][1]) == pytest.approx(0.5)


def test_float_format(capsys):
    code, out, _ = run(["exact", "--potential", "kind=square_barrier,V0=1,L=1", "--energy", "2"], capsys)
    T = table(out)[1][0][1]
    assert len(T.replace(".", "").lstrip("0")) == 17
    assert float(T) == pytest.approx(layered_T([2.0, 1.0, 2.0], [0.0, 1.0])[0], rel=1e-14)


def test_solve_matches_exact(capsys):
    args = ["--potential", "kind=square_barrier,V0=1,L=1", "--energy", "0.5:2.5:3"]
    _, out_e, _ = run(["exact", *args], capsys)
    code, out_s, _ = run(["solve", *args], capsys)
    assert code == 0
    head, rows = table(out_s)
    assert head == ["E", "T", "R", "abs_alpha", "abs_beta", "err_estimate", "status"]
    for re_, rs in zip(table(out_e)[1], rows):
        assert float(rs[1]) == pytest.approx(float(re_[1]), abs=1e-6)
        assert rs[-1] == "ok"
    assert 0 < float(rows[0][1]) < 1


def test_bound_rows(capsys):
    code, out, _ = run(
        ["bound", "--potential", "kind=square_barrier,V0=1,L=1", "--energy", "2", "--bounds", "case2,case1"], capsys
    )
    assert code == 0
    head, rows = table(out)
    assert head == ["E", "bound_id", "kind", "value", "valid", "quad_err", "reason"]
    assert [r[1] for r in rows] == ["case1", "case2"]
    assert float(rows[0][3]) == pytest.approx(0.884724, abs=1e-6)
    assert rows[0][4] == "true"


def test_bound_invalid_row(capsys):
    code, out, _ = run(
        ["bound", "--potential", "kind=square_barrier,V0=1,L=1", "--energy", "0.5", "--bounds", "case2"], capsys
    )
    assert code == 0
    row = table(out)[1][0]
    assert row[4] == "false" and row[6]


def test_bound_all_sorted_and_below_solve(capsys):
    args = ["--potential", "kind=sech2,Ve=0.25,L=1", "--energy", "0.5:2:3"]
    code, out, _ = run(["bound", *args, "--bounds", "all"], capsys)
    assert code == 0
    _, rows = table(out)
    keys = [(float(r[0]), r[1]) for r in rows]
    assert keys == sorted(keys)
    _, solved = table(run(["solve", *args], capsys)[1])
    T = {float(r[0]): float(r[1]) for r in solved}
    for r in rows:
        if r[2] == "lowerT" and r[4] == "true":
            assert float(r[3]) <= T[float(r[0])] + 1e-6


def test_greybody_table(capsys):
    code, out, _ = run(["greybody", "--spin", "1", "--ell", "1", "--sweep", "0.2:1:3"], capsys)
    assert code == 0
    head, rows = table(out)
    assert head == ["omega", "bound1", "bound2", "T_numeric"]
    assert len(rows) == 3
    assert rows[0][2] == "nan"  # below the barrier top
    for r in rows:
        assert float(r[1]) <= float(r[3])


def test_compare_columns(capsys):
    code, out, _ = run(
        ["compare", "--reference", "kind=free", "--potential", "kind=square_barrier,V0=1,L=1", "--energy", "2"], capsys
    )
    assert code == 0
    head, rows = table(out)
    assert head[:5] == ["E", "lowerT", "upperT", "upper_valid", "T_numeric"]
    r = rows[0]
    assert float(r[1]) == pytest.approx(0.884724, abs=1e-6)
    assert r[3] == "false"
    assert float(r[1]) <= float(r[4])


def test_sweep_grid(capsys):
    code, out, _ = run(
        [
            "sweep", "--potential", "kind=tanh,v_left=0,v_right=1,L=1", "--param", "L",
            "--values", "0.1:1:3", "--energy", "2:3:2", "--bounds", "case2a",
        ],
        capsys,
    )  # fmt: skip
    assert code == 0
    head, rows = table(out)
    assert head == ["L", "E", "T_numeric", "case2a"]
    assert len(rows) == 6
    for r in rows:
        assert float(r[3]) <= float(r[2]) + 1e-12


def test_jsonl(capsys):
    code, out, _ = run(["exact", "--potential", "kind=delta,g=2", "--energy", "1:2:2", "--format", "jsonl"], capsys)
    assert code == 0
    objs = [json.loads(line) for line in out.splitlines()]
    assert objs[0] == {"E": 1.0, "T_exact": 0.5, "R_exact": 0.5}
    assert len(objs) == 2


def test_out_file(tmp_path, capsys):
    p = tmp_path / "t.csv"
    code, out, _ = run(["exact", "--potential", "kind=free", "--energy", "1", "--out", str(p)], capsys)
    assert code == 0 and out == ""
    assert p.read_text().startswith("E,T_exact,R_exact\n")


@pytest.mark.parametrize(
    "args",
    [
        [],
        ["exact"],
        ["exact", "--potential", "kind=free", "--energy", "2:1:3"],
        ["exact", "--potential", "kind=free", "--energy", "a:b"],
        ["exact", "--potential", "nokind", "--energy", "1"],
        ["greybody", "--spin", "1", "--ell", "1"],
        ["solve", "--potential", "kind=free", "--energy", "1", "--tol", "0.5"],
    ],
)
def test_usage_errors(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 1
    assert "error" in err


@pytest.mark.parametrize(
    "args",
    [
        ["exact", "--potential", '{"kind": "sampled", "xs": [0, 1, 2], "vs": [0, 1, 0]}', "--energy", "1"],
        ["exact", "--potential", "kind=nosuch", "--energy", "1"],
        ["bound", "--potential", "kind=free", "--energy", "1", "--bounds", "case9"],
        ["greybody", "--spin", "1", "--ell", "0", "--omega", "1"],
        ["compare", "--reference", "kind=sech2,Ve=0.25,L=1", "--potential", "kind=free", "--energy", "1"],
    ],
)
def test_input_errors(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 2
    assert err


def test_numerical_failure_flags_rows(monkeypatch, capsys):
    real = cli.solve_scattering

    def flaky(d, cfg=None):
        if d.energy > 1.5:
            raise StiffFailure("step size underflow")
        return real(d, cfg=cfg)

    monkeypatch.setattr(cli, "solve_scattering", flaky)
    code, out, _ = run(["solve", "--potential", "kind=square_barrier,V0=1,L=1", "--energy", "1:2:2"], capsys)
    assert code == 3
    _, rows = table(out)
    assert rows[0][-1] == "ok"
    assert rows[1][-1].startswith("failed: StiffFailure")


def test_threads_byte_identical(monkeypatch, capsys):
    args = ["solve", "--potential", "kind=sech2,Ve=0.25,L=1", "--energy", "0.3:3:6"]
    monkeypatch.setenv("SCATTERBOUND_THREADS", "1")
    a = run(args, capsys)[1]
    b = run(args, capsys)[1]
    monkeypatch.setenv("SCATTERBOUND_THREADS", "3")
    c = run(args, capsys)[1]
    assert a == b == c


def test_bad_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("SCATTERBOUND_THREADS", "many")
    assert run(["exact", "--potential", "kind=free", "--energy", "1"], capsys)[0] == 1


def test_plot(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    png = tmp_path / "g.png"
    code, _, _ = run(["exact", "--potential", "kind=delta,g=2", "--energy", "0.5:3:5", "--plot", str(png)], capsys)
    assert code == 0
    assert png.stat().st_size > 0


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "scatterbound", "exact", "--potential", "kind=delta,g=2", "--energy", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "1,0.5,0.5"
