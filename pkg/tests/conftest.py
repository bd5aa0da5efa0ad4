import json

import pytest

from kgforge import ExperimentConfig, build_index, group_structured_kg, split


@pytest.fixture
def toy_kg():
    """Five entities, two relations, six triples."""
    return build_index([
        ("a", "likes", "b"),
        ("b", "likes", "c"),
        ("c", "likes", "d"),
        ("d", "knows", "e"),
        ("e", "knows", "a"),
        ("a", "knows", "c"),
    ])


@pytest.fixture(scope="session")
def synthetic_kg():
    return build_index(group_structured_kg(seed=0))


@pytest.fixture(scope="session")
def synthetic_split(synthetic_kg):
    return split(synthetic_kg, 0.8, 0)


@pytest.fixture
def quick_config():
    """A fast-but-real training config for pipeline tests."""
    return ExperimentConfig(model_name="transe", embedding_dim=8, learning_rate=0.01,
                            margin=1.0, num_epochs=15, batch_size=8, split_ratio=0.8,
                            seed=0, eval_ks=(1, 3, 10))


@pytest.fixture
def graph_tsv(tmp_path, synthetic_kg):
    path = tmp_path / "graph.tsv"
    lines = [("\t".join(synthetic_kg.label_triple(t)) + "\n") for t in synthetic_kg.triples]
    path.write_text("".join(lines), encoding="utf-8")
    return path


@pytest.fixture
def config_file(tmp_path, quick_config):
    path = tmp_path / "config.json"
    path.write_text(quick_config.to_json(), encoding="utf-8")
    return path


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path
