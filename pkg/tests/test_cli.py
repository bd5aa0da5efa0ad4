import json
import os

import pytest

from kgforge import ExperimentConfig, load_bundle
from kgforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_train_end_to_end(tmp_path, graph_tsv, config_file, capsys):
    out_dir = tmp_path / "bundle"
    code, out, _ = run(capsys, "train", "--config", str(config_file), "--data",
                       str(graph_tsv), "--format", "tsv", "--out", str(out_dir))
    assert code == 0
    assert "bundle written" in out
    bundle = load_bundle(out_dir)
    assert bundle.config.model_name == "transe"
    assert (out_dir / "trained_model.bin").exists()


def test_train_missing_config_exits_1(tmp_path, graph_tsv, capsys):
    code, _, err = run(capsys, "train", "--config", str(tmp_path / "missing.json"),
                       "--data", str(graph_tsv), "--out", str(tmp_path / "b"))
    assert code == 1
    assert "missing.json" in err


def test_unknown_flag_exits_1(capsys):
    code, _, err = run(capsys, "train", "--bogus")
    assert code == 1
    assert "bogus" in err


def test_unknown_subcommand_exits_1(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1


def test_help_exits_0(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    assert "train" in out and "wizard" in out


def test_malformed_config_exits_1(tmp_path, graph_tsv, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"model_name": "transe"}')  # missing embedding_dim
    code, _, err = run(capsys, "train", "--config", str(bad), "--data", str(graph_tsv),
                       "--out", str(tmp_path / "b"))
    assert code == 1
    assert "embedding_dim" in err


def test_malformed_data_exits_1(tmp_path, config_file, capsys):
    data = tmp_path / "bad.tsv"
    data.write_text("a\tb\n")
    code, _, err = run(capsys, "train", "--config", str(config_file), "--data", str(data),
                       "--out", str(tmp_path / "b"))
    assert code == 1
    assert "expected 3 fields" in err


def test_train_then_evaluate_reproduces_stored_metrics(tmp_path, graph_tsv, config_file,
                                                       capsys):
    out_dir = tmp_path / "bundle"
    code, _, _ = run(capsys, "train", "--config", str(config_file), "--data",
                     str(graph_tsv), "--out", str(out_dir))
    assert code == 0
    bundle = load_bundle(out_dir)
    kg = bundle.index()
    test_tsv = tmp_path / "test.tsv"
    test_tsv.write_text("".join("\t".join(kg.label_triple(t)) + "\n"
                                for t in bundle.test_triples))
    code, out, _ = run(capsys, "evaluate", "--bundle", str(out_dir), "--test", str(test_tsv))
    assert code == 0
    recomputed = json.loads(out)
    stored = json.loads((out_dir / "evaluation_summary.json").read_text())
    assert recomputed == stored


def test_evaluate_unknown_label_exits_1(tmp_path, graph_tsv, config_file, capsys):
    out_dir = tmp_path / "bundle"
    run(capsys, "train", "--config", str(config_file), "--data", str(graph_tsv),
        "--out", str(out_dir))
    test_tsv = tmp_path / "test.tsv"
    test_tsv.write_text("ghost\tr0\te01\n")
    code, _, err = run(capsys, "evaluate", "--bundle", str(out_dir), "--test", str(test_tsv))
    assert code == 1
    assert "ghost" in err


def test_infer_writes_ranked_file(tmp_path, graph_tsv, config_file, capsys):
    out_dir = tmp_path / "bundle"
    run(capsys, "train", "--config", str(config_file), "--data", str(graph_tsv),
        "--out", str(out_dir))
    entities = tmp_path / "entities.txt"
    entities.write_text("e00\ne01\ne10\ne11\n")
    relations = tmp_path / "relations.txt"
    relations.write_text("r0\n")
    predictions = tmp_path / "predictions.tsv"
    code, out, _ = run(capsys, "infer", "--bundle", str(out_dir), "--entities",
                       str(entities), "--relations", str(relations), "--no-reflexive",
                       "--out", str(predictions))
    assert code == 0
    lines = predictions.read_text().splitlines()
    assert len(lines) == 4 * 3 * 1  # 4 entities, no reflexive, 1 relation
    scores = [float(line.split("\t")[3]) for line in lines]
    assert scores == sorted(scores, reverse=True)


def test_infer_with_exclusions(tmp_path, graph_tsv, config_file, capsys):
    out_dir = tmp_path / "bundle"
    run(capsys, "train", "--config", str(config_file), "--data", str(graph_tsv),
        "--out", str(out_dir))
    entities = tmp_path / "entities.txt"
    entities.write_text("e00\ne10\n")
    relations = tmp_path / "relations.txt"
    relations.write_text("r0\n")
    exclude = tmp_path / "exclude.tsv"
    exclude.write_text("e00\tr0\te10\n")
    predictions = tmp_path / "predictions.tsv"
    code, _, _ = run(capsys, "infer", "--bundle", str(out_dir), "--entities", str(entities),
                     "--relations", str(relations), "--no-reflexive", "--exclude",
                     str(exclude), "--out", str(predictions))
    assert code == 0
    lines = predictions.read_text().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("e10\tr0\te00\t")


def test_zoo_validate_cli(tmp_path, graph_tsv, capsys):
    config = ExperimentConfig(
        model_name="transe", embedding_dim=8, num_epochs=5, batch_size=8, seed=0,
        metadata={"reference": "doi:10.5555/demo",
                  "dataset_url": "https://example.org/data"})
    config_path = tmp_path / "config.json"
    config_path.write_text(config.to_json())
    entry = tmp_path / "zoo" / "domain" / "dataset" / "exp01"
    code, _, _ = run(capsys, "train", "--config", str(config_path), "--data",
                     str(graph_tsv), "--out", str(entry))
    assert code == 0
    (entry / "README.md").write_text("demo entry\n")
    code, out, _ = run(capsys, "zoo-validate", str(entry), "--zoo-root",
                       str(tmp_path / "zoo"))
    assert code == 0
    assert "all checks passed" in out

    os.unlink(entry / "README.md")
    code, out, _ = run(capsys, "zoo-validate", str(entry), "--zoo-root",
                       str(tmp_path / "zoo"))
    assert code == 2
    assert "description: FAIL" in out


def test_hpo_cli_end_to_end(tmp_path, graph_tsv, capsys):
    space = {
        "model_name": "transe", "embedding_dim": [4, 8], "learning_rate": [0.01, 0.1],
        "margin": 1.0, "num_epochs": 3, "batch_size": 8, "split_ratio": 0.8,
        "seed": 0, "eval_ks": [1, 3, 10], "trials": 3,
        "selection_metric": {"metric": "hits_at_k", "k": 10},
    }
    space_path = tmp_path / "space.json"
    space_path.write_text(json.dumps(space))
    out_dir = tmp_path / "hpo_bundle"
    code, out, _ = run(capsys, "hpo", "--space", str(space_path), "--data", str(graph_tsv),
                       "--out", str(out_dir), "--seed", "1")
    assert code == 0
    assert "best trial" in out
    bundle = load_bundle(out_dir)
    assert bundle.trials is not None
    assert len(bundle.trials) == 3
    assert bundle.config.embedding_dim in (4, 8)


# --------------------------------------------------------------------------- wizard

def wizard_session(monkeypatch, capsys, tmp_path, answers):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO("".join(a + "\n" for a in answers)))
    code = main(["wizard", "--out", str(tmp_path / "wizard_config.json")])
    captured = capsys.readouterr()
    return code, captured.out


def test_wizard_rejects_negative_dim_then_accepts(monkeypatch, capsys, tmp_path, graph_tsv):
    answers = ["train", str(graph_tsv), "tsv", "transe",
               "-5",          # invalid embedding dimension
               "50",          # corrected
               "", "", "", "", "", "", "", "", "", ""]
    code, out = wizard_session(monkeypatch, capsys, tmp_path, answers)
    assert code == 0
    invalid_pos = out.index("Invalid value")
    assert "e.g. 50" in out[invalid_pos:invalid_pos + 120]
    config = ExperimentConfig.from_json((tmp_path / "wizard_config.json").read_text())
    assert config.embedding_dim == 50
    assert config.model_name == "transe"


def test_wizard_scripted_full_session_validates(monkeypatch, capsys, tmp_path, graph_tsv):
    answers = ["train", str(graph_tsv), "tsv", "distmult", "16", "margin_ranking", "2.0",
               "0.05", "30", "16", "0.75", "7", "1,5", "filtered"]
    code, out = wizard_session(monkeypatch, capsys, tmp_path, answers)
    assert code == 0
    config = ExperimentConfig.from_json((tmp_path / "wizard_config.json").read_text())
    assert config.model_name == "distmult"
    assert config.margin == 2.0
    assert config.num_epochs == 30
    assert config.eval_ks == (1, 5)
    assert config.filter_setting == "filtered"
    assert config.seed == 7


def test_wizard_eof_writes_nothing(monkeypatch, capsys, tmp_path):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO(""))
    target = tmp_path / "never.json"
    code = main(["wizard", "--out", str(target)])
    assert code == 1
    assert not target.exists()


def test_wizard_eof_midway_writes_nothing(monkeypatch, capsys, tmp_path, graph_tsv):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO("train\n" + str(graph_tsv) + "\n"))
    target = tmp_path / "partial.json"
    code = main(["wizard", "--out", str(target)])
    assert code == 1
    assert not target.exists()


def test_wizard_hpo_mode_emits_search_space(monkeypatch, capsys, tmp_path, graph_tsv):
    from kgforge import SearchSpace
    answers = ["hpo", str(graph_tsv), "tsv", "transe,distmult", "8,16",
               "1,2",          # scoring norm candidates (transe)
               "0.01,0.1", "1.0", "5", "8", "0.8", "0,1", "1,3,10", "4",
               "hits_at_k", "10"]
    code, out = wizard_session(monkeypatch, capsys, tmp_path, answers)
    assert code == 0
    space = SearchSpace.from_dict(json.loads((tmp_path / "wizard_config.json").read_text()))
    assert space.model_name == ("transe", "distmult")
    assert space.embedding_dim == (8, 16)
    assert space.trials == 4
