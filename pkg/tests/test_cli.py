import json

import pytest

from ym2d.cli import config_hash, main
from ym2d.surface import save_graph, theta_sphere


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_partition_prints_json(capsys):
    code, io = run(capsys, "partition", "--group", "su2", "--sig", "0,0,2")
    assert code == 0
    d = json.loads(io.out)
    assert set(d) == {"classes", "group", "signature", "tail_bound", "value"}
    assert d["value"] == pytest.approx(4.55175158893748939, rel=1e-12)


def test_partition_with_classes(capsys):
    code, io = run(capsys, "partition", "--group", "u1", "--sig", "2,0,1", "--classes", "0.5,1.0")
    assert code == 0
    assert json.loads(io.out)["classes"] == [0.5, 1.0]


def test_bad_group_exits_2(capsys):
    code, io = run(capsys, "partition", "--group", "su3")
    assert code == 2
    assert "usage" in io.err and "unknown group" in io.err


def test_bad_signature_and_class_count_exit_2(capsys):
    assert run(capsys, "partition", "--sig", "1,0")[0] == 2
    assert run(capsys, "partition", "--sig", "2,0,1", "--classes", "0.1")[0] == 2
    assert run(capsys, "sample")[0] == 2
    assert run(capsys, "heat", "--tol", "-1")[0] == 2


def test_failed_check_exits_1(capsys):
    code, io = run(capsys, "heat", "--group", "u1", "--times", "1", "--angles", "0.5", "--tol", "1e-300")
    assert code == 1
    assert "semigroup" in io.err


def test_heat_passes(capsys):
    code, io = run(capsys, "heat", "--group", "su2", "--times", "0.25,1", "--angles", "0,1")
    assert code == 0
    assert io.out.splitlines()[0] == "check,s,t,angle,value,residual,pass"


def test_manifest(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["zero-one", "--mc", "500", "--ladder", "1,4", "--seed", "7", "--out", str(out)]) in (0, 1)
    man = json.loads((tmp_path / "z.manifest.json").read_text())
    assert man["config"]["seed"] == 7
    assert man["config_hash"] == config_hash(man["config"])
    assert "version" in man and "checks" in man
    assert "time" not in json.dumps(man).lower()


def test_config_file_overridden_by_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"group": "u1", "sig": "0,0,2"}))
    code, io = run(capsys, "partition", "--config", str(cfg))
    assert json.loads(io.out)["group"] == "u1"
    code, io = run(capsys, "partition", "--config", str(cfg), "--group", "su2")
    assert json.loads(io.out)["group"] == "su2"
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run(capsys, "partition", "--config", str(bad))[0] == 2


def _twice(tmp_path, argv):
    texts = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        main(argv + ["--out", str(out)])
        texts.append(out.read_bytes())
    return texts


def test_sample_deterministic(tmp_path):
    gpath = tmp_path / "g.json"
    save_graph(theta_sphere([0.2, 0.3, 0.5]), gpath)
    a, b = _twice(tmp_path, ["sample", "--graph", str(gpath), "--steps", "2000", "--seed", "5", "--step-t", "0.05"])
    assert a == b
    assert a.splitlines()[0] == b"step,word_id,re_chi,im_chi"
    man = json.loads((tmp_path / "r1.manifest.json").read_text())
    assert man["step_t"] == 0.05 and "graph_hash" in man and "acceptance" in man


def test_invalid_graph_exits_2(tmp_path, capsys):
    gpath = tmp_path / "g.json"
    gpath.write_text("{}")
    assert run(capsys, "sample", "--graph", str(gpath))[0] == 2


def test_seed_changes_output(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    main(["zero-one", "--mc", "200", "--ladder", "1,4", "--seed", "1", "--out", str(a)])
    main(["zero-one", "--mc", "200", "--ladder", "1,4", "--seed", "2", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()
