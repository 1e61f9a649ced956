import json
import subprocess
import sys

import pytest

from artifact import cli
from artifact.cache import Cache, task_key


@pytest.fixture(autouse=True)
def tmp_cache(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("PDL_CACHE_DIR", str(d))
    return d


def run(capsys, *argv):
    code = cli.dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_maximality(capsys):
    code, out, _ = run(capsys, "verify", "maximality", "--q", "2", "--n", "2", "--kappa", "0", "--h", "2")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert [(c["expected"], c["got"]) for c in rep["checks"]] == [(16, 16)] * len(rep["checks"])
    for key in ("tool_version", "tower", "params", "suite", "wall_time_ms"):
        assert key in rep


def test_enum_inner_form_single_stratum(capsys):
    code, out, _ = run(capsys, "enum", "--which", "xh1", "--q", "2", "--n", "2", "--kappa", "1", "--h", "2")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["count"] == 16 and rep["result"]["strata"] == {"1": 16}


def test_tower_and_witt(capsys):
    code, out, _ = run(capsys, "tower", "--q", "4", "--N", "2")
    assert code == 0 and json.loads(out)["result"]["order"] == 16
    # (1, 0) * (1, 0) = (1, 0) in W_2(F_2)
    code, out, _ = run(capsys, "witt", "--q", "2", "--op", "mul", "--a", "1,0", "--b", "1,0")
    assert code == 0 and json.loads(out)["result"]["value"] == [1, 0]


def test_howe_csv(capsys):
    code, out, _ = run(capsys, "howe", "--all", "--q", "2", "--n", "2", "--h", "2", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "index,key,d,dprime,m_seq,h_seq,r_chi,dim"
    assert len(lines) == 1 + 12


@pytest.mark.parametrize("argv,code", [
    (["verify", "maximality", "--q", "6", "--n", "2", "--h", "2"], 2),
    (["frobnicate"], 2),
    (["enum", "--which", "xh", "--q", "2", "--n", "2", "--h", "2", "--M", "3", "--budget", "10"], 3),
    (["verify", "ij_lemma"], 1),
])
def test_exit_codes(capsys, argv, code):
    got, out, _ = run(capsys, *argv)
    assert got == code
    if code == 3:
        rep = json.loads(out)
        assert rep["pass"] is False and "BudgetError" in rep["error"]


def test_cache_hit_is_identical(capsys, tmp_cache):
    argv = ["degrees", "--q", "2", "--n", "2", "--h", "2"]
    c1, o1, _ = run(capsys, *argv)
    files = list(tmp_cache.glob("*.json"))
    assert len(files) == 1
    c2, o2, _ = run(capsys, *argv)
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "wall_time_ms"}
    assert c1 == c2 == 0 and strip(o1) == strip(o2)
    # --no-cache recomputes and agrees with the stored entry
    c3, o3, err = run(capsys, *argv, "--no-cache")
    assert c3 == 0 and strip(o3) == strip(o1) and "differs" not in err


def test_distinct_tasks_get_distinct_keys(capsys, tmp_cache):
    run(capsys, "degrees", "--q", "2", "--n", "2", "--h", "2")
    run(capsys, "degrees", "--q", "2", "--n", "2", "--h", "3")
    run(capsys, "degrees", "--q", "2", "--n", "2", "--h", "2", "--seed", "5")
    assert len(list(tmp_cache.glob("*.json"))) == 3


def test_corrupt_entry_is_recomputed(capsys, tmp_cache):
    argv = ["degrees", "--q", "2", "--n", "2", "--h", "2"]
    _, o1, _ = run(capsys, *argv)
    (path,) = tmp_cache.glob("*.json")
    path.write_text("{not json")
    code, o2, err = run(capsys, *argv)
    assert code == 0
    assert json.loads(o2)["checks"] == json.loads(o1)["checks"]
    assert json.loads(path.read_text())["payload"]["report"]["pass"]


def test_cache_roundtrip_and_task_check(tmp_path):
    c = Cache(tmp_path)
    task = {"a": 1, "b": [1, 2]}
    assert c.get(task) is None
    c.put(task, {"x": 3})
    assert c.get({"b": [1, 2], "a": 1}) == {"x": 3}
    assert task_key(task) != task_key({"a": 2, "b": [1, 2]})
    # an entry filed under the wrong key is treated as corrupt
    c.path(task_key(task)).write_text(json.dumps({"task": {"a": 9}, "payload": 1}))
    assert c.get(task) is None


def test_out_flag(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "group", "--which", "Gh1", "--q", "2", "--n", "2", "--h", "2", "--out", str(out))
    assert code == 0 and stdout == ""
    assert [c["got"] for c in json.loads(out.read_text())["checks"]] == [16]


def test_console_entry_point(tmp_cache):
    res = subprocess.run([sys.executable, "-m", "artifact.cli", "verify", "lti", "--no-cache"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["pass"]
