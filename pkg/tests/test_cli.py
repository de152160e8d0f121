import json

import numpy as np
import pytest

from dolearn import io as dio
from dolearn.cli import main
from dolearn.demo import bow_graph, fig3a_graph
from dolearn.scm import exact_interventional, random_net_for


@pytest.fixture
def workdir(tmp_path):
    g = fig3a_graph()
    net = random_net_for(g, seed=7)
    (tmp_path / "graph.json").write_text(dio.dump_json(dio.admg_to_dict(g)))
    (tmp_path / "net.json").write_text(dio.dump_json(dio.net_to_dict(net)))
    (tmp_path / "query.json").write_text(json.dumps({
        "intervene": [{"var": "X", "value": 0}],
        "targets": ["Z1", "Z2", "Y"],
    }))
    return tmp_path, g, net


def test_identify_success(workdir, capsys):
    tmp, g, net = workdir
    code = main(["identify", "--graph", str(tmp / "graph.json"),
                 "--query", str(tmp / "query.json")])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["identifiable"] is True
    assert "P[z1|x]" in out["formula"]
    assert out["trace"][0]["step"] == "step4"


def test_identify_hedge_exit_code(tmp_path, capsys):
    bow = bow_graph()
    (tmp_path / "g.json").write_text(dio.dump_json(dio.admg_to_dict(bow)))
    (tmp_path / "q.json").write_text(json.dumps({
        "intervene": [{"var": "X", "value": 1}], "targets": ["Y"],
    }))
    code = main(["identify", "--graph", str(tmp_path / "g.json"),
                 "--query", str(tmp_path / "q.json")])
    assert code == 2
    out = json.loads(capsys.readouterr().out)
    assert out["identifiable"] is False
    assert out["root_set"] == ["Y"]


def test_missing_file_is_input_error(capsys):
    code = main(["identify", "--graph", "/nonexistent/graph.json",
                 "--query", "/nonexistent/query.json"])
    assert code == 4
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "FileNotFound"


def test_invalid_query_is_input_error(workdir, capsys):
    tmp, g, net = workdir
    (tmp / "bad.json").write_text(json.dumps({
        "intervene": [{"var": "X", "value": 0}], "targets": ["X", "Y"],
    }))
    code = main(["identify", "--graph", str(tmp / "graph.json"),
                 "--query", str(tmp / "bad.json")])
    assert code == 4


def test_oracle_tables(workdir, capsys):
    tmp, g, net = workdir
    code = main(["oracle", "--cbn", str(tmp / "net.json"),
                 "--query", str(tmp / "query.json")])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    oracle = exact_interventional(net, {"X": 0})
    assert out["vars"] == list(oracle.names)
    assert np.allclose(out["probs"], oracle.probs.reshape(-1))


def test_full_pipeline_roundtrip(workdir, capsys):
    tmp, g, net = workdir
    assert main(["simulate", "--cbn", str(tmp / "net.json"), "--seed", "3",
                 "--m", "20000", "--out", str(tmp / "samples.csv")]) == 0
    assert main(["learn", "--graph", str(tmp / "graph.json"),
                 "--query", str(tmp / "query.json"),
                 "--samples", str(tmp / "samples.csv"),
                 "--out", str(tmp / "li.json")]) == 0
    capsys.readouterr()

    (tmp / "assign.json").write_text(json.dumps({"Z1": 0, "Z2": 1, "Y": 1}))
    assert main(["eval", "--li", str(tmp / "li.json"),
                 "--assign", str(tmp / "assign.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert 0.0 <= out["probability"] <= 1.0

    assert main(["sample", "--li", str(tmp / "li.json"), "--seed", "5",
                 "--m", "50", "--out", str(tmp / "gen.csv")]) == 0
    gen = dio.samples_from_csv((tmp / "gen.csv").read_text())
    assert gen.names == ("Z1", "Z2", "Y")
    assert gen.m == 50

    assert main(["verify", "--li", str(tmp / "li.json"),
                 "--cbn", str(tmp / "net.json")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["tv"] < 0.1
    assert report["m"] == 20000


def test_learn_self_generate_requires_seed(workdir, capsys):
    tmp, g, net = workdir
    code = main(["learn", "--graph", str(tmp / "graph.json"),
                 "--query", str(tmp / "query.json"),
                 "--cbn", str(tmp / "net.json"), "--m", "1000"])
    assert code == 4
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "MissingSeed"


def test_learn_positivity_exit_code(workdir, capsys):
    tmp, g, net = workdir
    code = main(["learn", "--graph", str(tmp / "graph.json"),
                 "--query", str(tmp / "query.json"),
                 "--cbn", str(tmp / "net.json"), "--seed", "1", "--m", "2"])
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "PositivityViolation"


def test_learn_not_identifiable_exit_code(tmp_path, capsys):
    bow = bow_graph()
    net = random_net_for(bow, seed=2)
    (tmp_path / "g.json").write_text(dio.dump_json(dio.admg_to_dict(bow)))
    (tmp_path / "net.json").write_text(dio.dump_json(dio.net_to_dict(net)))
    (tmp_path / "q.json").write_text(json.dumps({
        "intervene": [{"var": "X", "value": 0}], "targets": ["Y"],
    }))
    code = main(["learn", "--graph", str(tmp_path / "g.json"),
                 "--query", str(tmp_path / "q.json"),
                 "--cbn", str(tmp_path / "net.json"), "--seed", "1", "--m", "100"])
    assert code == 2


def test_simulate_deterministic(workdir, capsys):
    tmp, g, net = workdir
    main(["simulate", "--cbn", str(tmp / "net.json"), "--seed", "9", "--m", "100",
          "--out", str(tmp / "a.csv")])
    main(["simulate", "--cbn", str(tmp / "net.json"), "--seed", "9", "--m", "100",
          "--out", str(tmp / "b.csv")])
    assert (tmp / "a.csv").read_text() == (tmp / "b.csv").read_text()


def test_demo_example1(capsys):
    code = main(["demo", "example1", "--seed", "7", "--m", "20000"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["symbolic_vs_oracle_tv"] <= 1e-9
    assert out["learned_vs_oracle_tv"] < 0.1
    assert "P[z1|x]" in out["formula"]


def test_float_rendering_17_digits(tmp_path):
    text = dio.dump_json({"p": 1 / 3})
    assert "0.33333333333333331" in text
