import json
import subprocess
import sys

import pytest

from btknap.cli import main
from btknap.knapsack import SimpleKnapsackInstance

GEN8 = ["generate", "--n", "8", "--beta", "1/2", "--gamma", "1/4", "--alpha", "3", "--N", "auto"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_optimize(capsys):
    code, out, _ = run(capsys, "optimize")
    assert code == 0
    assert out.splitlines() == ["gamma 0.276393202251", "base 1.618033988750", "log2 0.694241913631"]


def test_optimize_json_and_check(capsys):
    code, out, err = run(capsys, "optimize", "--json", "--check")
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["base"] - 1.6180339887) < 1e-9
    assert abs(doc["gamma"] - doc["gamma_closed_form"]) < 1e-10
    assert err.count("PASS") == 2


def test_params_command(capsys):
    code, out, _ = run(capsys, "params", "--n", "8", "--alpha", "3")
    assert code == 0 and json.loads(out)["feasible"] is True
    code, out, _ = run(capsys, "params", "--n", "8", "--alpha", "3", "--N", "6561")
    assert code == 2 and "containment" in json.loads(out)["violated"]


def test_generate_verify_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, *GEN8, "--solver", "smallest", "--out", str(tmp_path))
    assert code == 0
    assert "bound 6" in out and "complete true" in out
    files = sorted(tmp_path.glob("instance_Q*.json"))
    assert len(files) == 6
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["complete"] and report["successes"] == 6
    for f in files:
        code, out, _ = run(capsys, "verify", str(f))
        assert code == 0
        assert json.loads(out)["verified"] is True


def test_generate_is_byte_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(capsys, *GEN8, "--solver", "random", "--seed", "9", "--out", str(d))[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_generate_infeasible(capsys, tmp_path):
    code, _, err = run(capsys, "generate", "--n", "8", "--beta", "1/4", "--gamma", "1/2", "--out", str(tmp_path))
    assert code == 2 and "beta > gamma violated" in err
    code, _, err = run(capsys, *GEN8[:-1], "6561", "--out", str(tmp_path))
    assert code == 2 and "containment" in err


def test_generate_budget(capsys, tmp_path):
    code, _, err = run(capsys, *GEN8, "--cap", "6", "--out", str(tmp_path))
    assert code == 3 and "budget" in err
    code, _, _ = run(capsys, *GEN8, "--signed-cap", "5", "--out", str(tmp_path))
    assert code == 3


def write(tmp_path, items, capacity, name="inst.json"):
    path = tmp_path / name
    path.write_text(SimpleKnapsackInstance(tuple(items), capacity).dumps())
    return path


def test_verify_negative(capsys, tmp_path):
    path = write(tmp_path, [2, 3, 5], 5)
    code, out, _ = run(capsys, "verify", str(path), "--designated", "2")
    assert code == 1
    assert json.loads(out)["solutions"] == [[0, 1], [2]]


def test_verify_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "verify", str(bad), "--designated", "0")[0] == 4
    assert run(capsys, "verify", str(tmp_path / "missing.json"), "--designated", "0")[0] == 4
    path = write(tmp_path, [1, 2], 3)
    assert run(capsys, "verify", str(path))[0] == 4
    assert run(capsys, "verify", str(path), "--designated", "5")[0] == 4
    assert run(capsys, "verify", str(path), "--designated", "x")[0] == 4


def test_verify_cap(capsys, tmp_path):
    path = write(tmp_path, range(1, 12), 5)
    assert run(capsys, "verify", str(path), "--designated", "4", "--cap", "10")[0] == 3


def test_width_full_and_greedy(capsys, tmp_path):
    assert run(capsys, *GEN8, "--out", str(tmp_path))[0] == 0
    path = tmp_path / "instance_Q000.json"
    code, out, _ = run(capsys, "width", str(path), "--algorithm", "full_backtrack")
    assert code == 0
    assert "width 256" in out and "best_value 524880" in out and "optimum_matched true" in out
    code, out, _ = run(capsys, "width", str(path), "--algorithm", "greedy")
    assert code == 0 and "width 1" in out


def test_width_unknown_algorithm(capsys, tmp_path):
    path = write(tmp_path, [1, 2], 3)
    assert run(capsys, "width", str(path), "--algorithm", "nope")[0] == 4
    assert run(capsys, "width", str(path), "--algorithm", "width_capped")[0] == 4


def test_game_refutation_and_width(capsys, tmp_path):
    out_path = tmp_path / "refute.json"
    code, out, _ = run(
        capsys, "game", "--n", "8", "--alpha", "3", "--refute", "5", "--out", str(out_path)
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["P"] == ["1", "2", "4", "8"]
    assert all(r["distinct_subset_sums"] and not r["subset_hits_N"] for r in doc["rounds"])
    assert doc["refutation"]["refuted"] is True
    code, out, _ = run(capsys, "width", str(out_path), "--algorithm", "width_capped", "--b", "5", "--file-order")
    assert code == 0
    lines = dict(line.split(" ", 1) for line in out.splitlines())
    assert int(lines["best_value"]) < 524880 and lines["optimum"] == "524880"
    assert int(lines["width"]) <= 5
    assert run(capsys, "verify", str(out_path))[0] == 0


def test_game_refute_not_binding(capsys):
    code, _, err = run(capsys, "game", "--n", "8", "--alpha", "3", "--refute", "6")
    assert code == 4 and "not below" in err


def test_table(capsys):
    code, out, _ = run(capsys, "table", "--point", "1/2,1/4", "--n", "8", "12", "16", "--optimal")
    assert code == 0
    rows = out.strip().split("\n")
    assert [r.split(",")[6] for r in rows[1:4]] == ["6", "20", "70"]
    assert rows[4].split(",")[4].startswith("1.618")


def test_table_empty(capsys):
    code, out, _ = run(capsys, "table")
    assert code == 0 and out.count("\n") == 1 and out.startswith("beta,gamma,n")


def test_bad_flag_is_input_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--n", "8", "--beta", "half", "--out", "x"])
    assert exc.value.code == 4


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "btknap.cli", "optimize"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.startswith("gamma 0.2763932")
