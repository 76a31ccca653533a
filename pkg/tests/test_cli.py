import json
import subprocess
import sys
from pathlib import Path

import pytest

from cfxplain.cli import main

FIXTURE = Path(__file__).parent / "fixtures" / "cf_samples.csv"


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    corpus = d / "corpus.csv"
    assert main(["generate", "--n", "300", "--seed", "5", "--out", str(corpus)]) == 0
    rc = main(["train", "--input", str(corpus), "--model", str(d / "m.cfx"), "--out", str(d / "train.json"),
               "--folds", "3", "--seed", "1"])
    assert rc == 0
    return d


def test_usage_errors_exit_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["explain", "--input", "x.csv"])
    assert e.value.code == 1
    assert main(["train", "--input", str(tmp_path / "missing.csv"), "--model", str(tmp_path / "m")]) == 1


def test_empty_corpus_is_an_error(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("id,description,amount_eur,date,label\n", encoding="utf-8")
    assert main(["train", "--input", str(p), "--model", str(tmp_path / "m")]) == 1


def test_footprint_fixture_from_labels(tmp_path):
    out = tmp_path / "fp.json"
    assert main(["footprint", "--input", str(FIXTURE), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert len(rep["estimates"]) == 8
    assert rep["water_liters"] == pytest.approx(29304.094, rel=0.01)
    assert rep["sector_source"] == "label"


def test_footprint_missing_sector_params(tmp_path):
    params = tmp_path / "p.json"
    params.write_text(json.dumps([{"sector": "flights", "avp": 0.05, "epsilon": 0.192}]))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"emission_params": "p.json"}))
    rc = main(["footprint", "--input", str(FIXTURE), "--out", str(tmp_path / "o.json"), "--config", str(cfg)])
    assert rc == 1


def test_train_explain_report_flow(trained, tmp_path):
    d = trained
    rep = json.loads((d / "train.json").read_text())
    assert rep["evaluation"]["accuracy"] > 0.5 and len(rep["evaluation"]["per_fold"]) == 3
    out = tmp_path / "x.jsonl"
    assert main(["explain", "--input", str(FIXTURE), "--model", str(d / "m.cfx"), "--out", str(out)]) == 0
    lines = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(lines) == 8
    assert {"config_sha256", "seed", "verdict", "rendered_en", "rendered_es"} <= set(lines[0])
    summary = Path(str(out) + ".summary.json")
    assert main(["report", "--explain-summary", str(summary), "--gate", "max_empty=1.0"]) == 0
    assert main(["report", "--explain-summary", str(summary), "--gate", "min_validated=1.01"]) == 2
    assert main(["report", "--explain-summary", str(summary), "--gate", "nonsense=1"]) == 1
    assert main(["report", "--train-report", str(d / "train.json"), "--gate", "min_validated=0.1"]) == 1
    fp = tmp_path / "fp.json"
    assert main(["footprint", "--input", str(FIXTURE), "--model", str(d / "m.cfx"), "--out", str(fp)]) == 0
    assert json.loads(fp.read_text())["sector_source"] == "model"


def test_model_from_other_normalization_rejected(trained, tmp_path, capsys):
    norm = tmp_path / "norm.json"
    src = Path(__file__).parents[1] / "src/cfxplain/data/normalization.json"
    data = json.loads(src.read_text())
    data["stopwords"] = list(data["stopwords"]) + ["zzzz"]
    norm.write_text(json.dumps(data))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"normalization": "norm.json"}))
    rc = main(["explain", "--input", str(FIXTURE), "--model", str(trained / "m.cfx"),
               "--out", str(tmp_path / "x.jsonl"), "--config", str(cfg)])
    assert rc == 1
    assert "different normalization config" in capsys.readouterr().err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cfxplain", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "footprint" in r.stdout
