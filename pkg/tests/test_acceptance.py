"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one ``ACCEPTANCE <n> <name>: PASS/FAIL`` line (run with
``pytest tests/test_acceptance.py -v -s`` to see them inline).
"""

import json
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest
import requests

from kgforge import (
    ExperimentConfig,
    IngestError,
    SearchSpace,
    SelectionMetric,
    build_index,
    evaluate,
    export_experiment,
    fetch_network,
    group_structured_kg,
    load_experiment,
    random_search,
    read_cx,
    read_ntriples,
    read_tsv,
    score,
    split,
    train,
    validate_zoo_entry,
    write_triples,
)
from kgforge.losses import LossSpec
from kgforge.models import BUILTIN_MODEL_NAMES, get_model, init_params

from oracles import (
    active_margin_spec,
    fd_loss_gradient,
    max_relative_error,
    oracle_evaluate,
    random_kg_ids,
    scaled_instance,
)


@contextmanager
def criterion(number, name):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} {name}: FAIL ({time.perf_counter() - started:.1f}s)")
        raise
    print(f"ACCEPTANCE {number} {name}: PASS ({time.perf_counter() - started:.1f}s)")


BENCHMARK_CONFIG = ExperimentConfig(
    model_name="transe", embedding_dim=16, learning_rate=0.01, margin=1.0,
    loss="margin_ranking", num_epochs=200, batch_size=8, split_ratio=0.8, seed=0,
    eval_ks=(1, 3, 5, 10))


def benchmark_kg():
    return build_index(group_structured_kg(seed=0))


def test_criterion_1_gradient_correctness():
    with criterion(1, "gradient-correctness"):
        started = time.perf_counter()
        for name in BUILTIN_MODEL_NAMES:
            model = get_model(name)
            for seed in range(20):
                params = scaled_instance(name, model, seed)
                rng = np.random.default_rng(seed * 1000 + 17)
                pos = tuple(int(v) for v in (rng.integers(5), rng.integers(3),
                                             rng.integers(5)))
                neg = tuple(int(v) for v in (rng.integers(5), rng.integers(3),
                                             rng.integers(5)))
                for spec in (active_margin_spec(model, params, pos, neg),
                             LossSpec("binary_cross_entropy")):
                    _, grad = model.pair_loss_gradient(params, pos, neg, spec)
                    numeric = fd_loss_gradient(model, params, pos, neg, spec, eps=1e-5)
                    worst = max_relative_error(grad.to_dense(params), numeric)
                    assert worst < 1e-4, (name, seed, spec.kind, worst)
        assert time.perf_counter() - started < 10.0


def test_criterion_2_rank_oracle_equivalence():
    with criterion(2, "rank-oracle-equivalence"):
        started = time.perf_counter()
        models = sorted(BUILTIN_MODEL_NAMES)
        for index in range(50):
            rng = np.random.default_rng(index)
            num_entities, num_relations, triples = random_kg_ids(rng)
            name = models[index % len(models)]
            model = get_model(name)
            params = scaled_instance(name, model, index, num_entities=num_entities,
                                     num_relations=num_relations)
            if index % 3 == 0:
                for tensor in params.tensors.values():
                    if tensor.shape[0] == num_entities:
                        tensor[1] = tensor[0]  # force exact score ties
            test = triples[: max(2, len(triples) // 3)]
            ks = [1, 3, 10]
            got = evaluate(name, params, test, triples, ks)
            expected = oracle_evaluate(model, params, test, triples, ks, num_entities)
            assert got.mean_rank_raw == expected["mean_rank_raw"]
            assert got.mean_rank_filtered == expected["mean_rank_filtered"]
            assert got.hits_at_k_raw == expected["hits_at_k_raw"]
            assert got.hits_at_k_filtered == expected["hits_at_k_filtered"]
            for entry, (_, _, raw, filt) in zip(got.per_triple_ranks,
                                                expected["per_triple"]):
                assert entry.raw_rank == raw and entry.filtered_rank == filt
        assert time.perf_counter() - started < 30.0


def test_criterion_3_filtered_vs_raw_dominance():
    with criterion(3, "filtered-vs-raw-dominance"):
        for index, name in enumerate(sorted(BUILTIN_MODEL_NAMES)):
            rng = np.random.default_rng(1000 + index)
            num_entities, num_relations, triples = random_kg_ids(rng)
            params = scaled_instance(name, get_model(name), index,
                                     num_entities=num_entities,
                                     num_relations=num_relations)
            metrics = evaluate(name, params, triples[:6], triples, ks=[1, 10])
            for entry in metrics.per_triple_ranks:
                assert entry.filtered_rank <= entry.raw_rank  # exact, no tolerance
            assert metrics.mean_rank_filtered <= metrics.mean_rank_raw


def test_criterion_4_learning_signal_benchmark():
    with criterion(4, "learning-signal-benchmark"):
        started = time.perf_counter()
        kg = benchmark_kg()
        assert kg.num_entities == 40 and kg.num_relations == 4
        assert 350 <= len(kg.triples) <= 450
        kg_train, kg_test = split(kg, BENCHMARK_CONFIG.split_ratio, BENCHMARK_CONFIG.seed)
        known = set(kg.triples)

        baseline_params = init_params(
            BENCHMARK_CONFIG.model_name, kg.num_entities, kg.num_relations,
            BENCHMARK_CONFIG.dims(), BENCHMARK_CONFIG.seed)
        baseline = evaluate(BENCHMARK_CONFIG.model_name, baseline_params,
                            kg_test.triples, known, [10]).hits_at_k_filtered[10]

        params, history = train(kg_train, BENCHMARK_CONFIG)
        assert history.epoch_losses[-1] < history.epoch_losses[0]
        trained = evaluate(BENCHMARK_CONFIG.model_name, params, kg_test.triples,
                           known, [10]).hits_at_k_filtered[10]

        print(f"  trained filtered hits@10 = {trained:.4f}, "
              f"random-params baseline = {baseline:.4f}")
        assert trained >= 0.5
        assert trained >= 3.0 * baseline
        assert time.perf_counter() - started < 60.0


def acceptance_space():
    # contains the criterion-4 configuration among its candidates
    return SearchSpace(
        model_name=("transe",), embedding_dim=(8, 16), learning_rate=(0.01, 0.1),
        margin=(1.0, 2.0), num_epochs=(100, 200), batch_size=(8,),
        split_ratio=(0.8,), seed=(0,), eval_ks=((1, 3, 5, 10),),
        trials=10, selection_metric=SelectionMetric("hits_at_k", 10))


def test_criterion_5_hpo_contract():
    with criterion(5, "hpo-contract"):
        started = time.perf_counter()
        kg = benchmark_kg()
        kg_train, _ = split(kg, 0.8, 0)
        space = acceptance_space()

        best, records = random_search(kg_train, space, seed=0)
        metric = space.selection_metric
        values = [metric.value(r.metrics) for r in records if not r.failed]
        assert len(records) == 10
        assert metric.value(best.metrics) == max(values)  # exact extremum

        best_again, records_again = random_search(kg_train, space, seed=0)
        assert best_again.config == best.config
        assert best_again.trial_index == best.trial_index
        assert [r.config for r in records_again] == [r.config for r in records]
        assert time.perf_counter() - started < 600.0


def full_run(directory, kg):
    config = ExperimentConfig(
        model_name="transe", embedding_dim=8, learning_rate=0.01, margin=1.0,
        num_epochs=30, batch_size=8, split_ratio=0.8, seed=0, eval_ks=(1, 10),
        metadata={"reference": "doi:10.5555/acceptance",
                  "dataset_url": "https://example.org/synthetic"})
    kg_train, kg_test = split(kg, config.split_ratio, config.seed)
    params, history = train(kg_train, config)
    metrics = evaluate(config.model_name, params, kg_test.triples,
                       set(kg.triples), config.eval_ks)
    export_experiment(directory, config, kg, params, metrics, history,
                      kg_train=kg_train, kg_test=kg_test)
    return config, params, kg_test


def test_criterion_6_determinism_and_round_trip(tmp_path):
    with criterion(6, "determinism-and-round-trip"):
        kg = benchmark_kg()
        dir_a = tmp_path / "run_a"
        dir_b = tmp_path / "run_b"
        config, params, kg_test = full_run(dir_a, kg)
        full_run(dir_b, kg)

        names = sorted(os.listdir(dir_a))
        assert names == sorted(os.listdir(dir_b))
        for name in names:
            with open(dir_a / name, "rb") as fa, open(dir_b / name, "rb") as fb:
                assert fa.read() == fb.read(), f"{name} differs between identical runs"

        _, loaded_params, _ = load_experiment(dir_a)
        assert loaded_params.exactly_equals(params)
        for triple in kg_test.triples:
            assert score(config.model_name, loaded_params, triple) == \
                score(config.model_name, params, triple)


class _StubResponse:
    def __init__(self, status_code, content=b""):
        self.status_code = status_code
        self.content = content


class _StubSession:
    def __init__(self, response=None, exception=None):
        self.response, self.exception = response, exception

    def get(self, url, timeout=None):
        if self.exception:
            raise self.exception
        return self.response


def test_criterion_7_format_fidelity(tmp_path):
    with criterion(7, "format-fidelity"):
        # TSV: malformed inputs and writer round trip
        bad = tmp_path / "bad.tsv"
        bad.write_text("a\tb\n")
        with pytest.raises(IngestError, match="line 1: expected 3 fields, got 2"):
            read_tsv(bad)
        triples = [("A", "r", "B"), ("B", "r", "C"), ("ü", "rel x", "émile")]
        round_trip = tmp_path / "round.tsv"
        write_triples(round_trip, triples)
        assert [tuple(t) for t in read_tsv(round_trip)] == triples

        # N-Triples: literal preservation and malformed statement
        nt = tmp_path / "data.nt"
        nt.write_text('<a> <r> "5"^^<int> .\n')
        assert read_ntriples(nt)[0].tail == '"5"^^<int>'
        nt.write_text("<a> <r> <b>\n")
        with pytest.raises(IngestError, match="missing statement terminator"):
            read_ntriples(nt)

        # CX: dangling edge reference and default relation
        cx = tmp_path / "net.cx"
        cx.write_text(json.dumps([{"nodes": [{"@id": 1, "n": "A"}]},
                                  {"edges": [{"s": 9, "t": 1}]}]))
        with pytest.raises(IngestError, match="unknown node 9"):
            read_cx(cx)
        cx.write_text(json.dumps([{"nodes": [{"@id": 1, "n": "A"}, {"@id": 2, "n": "B"}]},
                                  {"edges": [{"s": 1, "t": 2}]}]))
        assert read_cx(cx)[0].relation == "interacts_with"

        # remote fetch: recorded fixture, no live network
        recorded = open("tests/data/pathways.cx", "rb").read()
        payload = fetch_network("net-1", "https://commons.example/api",
                                session=_StubSession(_StubResponse(200, recorded)))
        assert payload == recorded
        with pytest.raises(Exception, match="status 404"):
            fetch_network("nope", "https://commons.example/api",
                          session=_StubSession(_StubResponse(404)))
        with pytest.raises(Exception, match="timed out"):
            fetch_network("x", "https://commons.example/api",
                          session=_StubSession(exception=requests.Timeout()))


def test_criterion_8_zoo_validation(tmp_path):
    with criterion(8, "zoo-validation"):
        kg = benchmark_kg()
        root = tmp_path / "zoo"

        def fresh_entry(name):
            entry = root / "bioinformatics" / "synthetic-groups" / name
            full_run(entry, kg)
            (entry / "README.md").write_text("benchmark entry\n")
            return entry

        entry = fresh_entry("exp_ok")
        report = validate_zoo_entry(entry, zoo_root=root)
        assert report.all_passed, report.lines()

        def failing(report):
            return {c.requirement for c in report.checks if c.passed is False}

        corrupt = fresh_entry("exp_noreadme")
        os.unlink(corrupt / "README.md")
        assert failing(validate_zoo_entry(corrupt, zoo_root=root)) == {"description"}

        corrupt = fresh_entry("exp_nomapping")
        os.unlink(corrupt / "entity_to_id.json")
        assert failing(validate_zoo_entry(corrupt, zoo_root=root)) == {"completeness"}

        corrupt = fresh_entry("exp_truncated")
        blob = (corrupt / "trained_model.bin").read_bytes()
        (corrupt / "trained_model.bin").write_bytes(blob[: len(blob) // 2])
        assert failing(validate_zoo_entry(corrupt, zoo_root=root)) == {"instantiation"}

        shallow = root / "bioinformatics" / "exp_shallow"  # depth 2, not 3
        full_run(shallow, kg)
        (shallow / "README.md").write_text("entry\n")
        assert failing(validate_zoo_entry(shallow, zoo_root=root)) == {"layout"}
