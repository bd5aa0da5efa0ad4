"""Command-line front end.

Subcommands: ``train``, ``hpo``, ``evaluate``, ``infer``, ``wizard`` (an
interactive, fully scriptable configuration assistant) and
``zoo-validate``. Exit codes: 0 on success, 1 on usage or input errors
(bad flags, missing or malformed files, invalid configs, unknown labels),
2 on runtime failures (divergence, degenerate splits, corrupt bundles,
failed fetches, failed zoo validation). Logs go to standard error, with
verbosity controlled by ``KGFORGE_LOG={error,info,debug}``; results go to
files (and short summaries to standard output).
"""

from __future__ import annotations

import json
import logging
import os
import sys

import click

from kgforge.artifacts import export_experiment, load_bundle, validate_zoo_entry
from kgforge.config import ExperimentConfig, canonical_json
from kgforge.errors import (
    BundleError,
    ConfigError,
    GraphError,
    HPOError,
    IngestError,
    KGForgeError,
    ModelError,
    RemoteFetchError,
    SplitError,
    TrainingDivergedError,
)
from kgforge.evaluation import evaluate as evaluate_ranks
from kgforge.fileio import atomic_write_text
from kgforge.graph import build_index, split
from kgforge.hpo import HITS_AT_K, MEAN_RANK_FILTERED, SearchSpace, SelectionMetric, random_search
from kgforge.inference import enumerate_candidates, rank_candidates, write_predictions
from kgforge.ingest import SOURCE_FORMATS, read_triples, read_tsv
from kgforge.losses import LOSS_NAMES
from kgforge.models import get_model, model_names
from kgforge.training import train as train_model
from kgforge.validation import triples_to_ids

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class ZooValidationFailed(KGForgeError):
    pass


def _configure_logging():
    raw = os.environ.get("KGFORGE_LOG", "").lower()
    level = LOG_LEVELS.get(raw, logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    if raw and raw not in LOG_LEVELS:
        logging.getLogger(__name__).warning(
            "KGFORGE_LOG=%r not understood; expected one of %s", raw, sorted(LOG_LEVELS))


@click.group()
def cli():
    """Knowledge-graph embedding toolkit."""


def _load_config_file(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return ExperimentConfig.from_json(text)


def _load_space_file(path) -> SearchSpace:
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"search space is not valid JSON: {exc}") from None
    return SearchSpace.from_dict(data)


def _echo_metrics(config: ExperimentConfig, metrics):
    settings = (("raw", metrics.mean_rank_raw, metrics.hits_at_k_raw),
                ("filtered", metrics.mean_rank_filtered, metrics.hits_at_k_filtered))
    for name, mean_rank, hits in settings:
        if config.filter_setting not in (name, "both"):
            continue
        hits_text = ", ".join(f"hits@{k}={hits[k]:.4f}" for k in sorted(hits))
        click.echo(f"{name}: mean_rank={mean_rank:.4f}, {hits_text}")


@cli.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Experiment config JSON.")
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Knowledge-graph file.")
@click.option("--format", "source_format", type=click.Choice(SOURCE_FORMATS),
              default="tsv", show_default=True, help="Input data format.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Bundle output directory.")
@click.option("--overwrite", is_flag=True, help="Replace a non-empty output directory.")
@click.option("--device", type=click.Choice(["cpu"]), default="cpu", show_default=True,
              help="Training device (only cpu is available).")
def train(config_path, data_path, source_format, out_dir, overwrite, device):
    """Train a model, evaluate it on a held-out split, export a bundle."""
    config = _load_config_file(config_path)
    kg = build_index(read_triples(data_path, source_format))
    kg_train, kg_test = split(kg, config.split_ratio, config.seed)
    logger.info("split %d triples into %d train / %d test",
                len(kg.triples), len(kg_train.triples), len(kg_test.triples))
    params, history = train_model(kg_train, config)
    metrics = evaluate_ranks(config.model_name, params, kg_test.triples,
                             set(kg.triples), config.eval_ks)
    export_experiment(out_dir, config, kg, params, metrics, history,
                      kg_train=kg_train, kg_test=kg_test, overwrite=overwrite)
    click.echo(f"bundle written to {out_dir}")
    _echo_metrics(config, metrics)


@cli.command()
@click.option("--space", "space_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Search-space JSON.")
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Knowledge-graph file.")
@click.option("--format", "source_format", type=click.Choice(SOURCE_FORMATS),
              default="tsv", show_default=True, help="Input data format.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Bundle output directory for the best configuration.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True,
              help="Master seed for the search (sub-split and trial streams).")
@click.option("--overwrite", is_flag=True, help="Replace a non-empty output directory.")
def hpo(space_path, data_path, source_format, out_dir, seed, overwrite):
    """Random-search hyper-parameters, then train and export the best config."""
    space = _load_space_file(space_path)
    if len(space.split_ratio) != 1:
        raise ConfigError("hpo needs a single split_ratio candidate "
                          "(it fixes the outer train/test split)")
    kg = build_index(read_triples(data_path, source_format))
    kg_train, kg_test = split(kg, space.split_ratio[0], seed)
    best, records = random_search(kg_train, space, seed)
    failed = sum(1 for r in records if r.failed)
    click.echo(f"best trial {best.trial_index}: "
               f"{space.selection_metric.kind}={space.selection_metric.value(best.metrics):.4f} "
               f"({len(records)} trials, {failed} failed)")

    params, history = train_model(kg_train, best.config)
    metrics = evaluate_ranks(best.config.model_name, params, kg_test.triples,
                             set(kg.triples), best.config.eval_ks)
    trials = [record.to_dict(space.selection_metric) for record in records]
    export_experiment(out_dir, best.config, kg, params, metrics, history, trials,
                      kg_train=kg_train, kg_test=kg_test, overwrite=overwrite)
    click.echo(f"bundle written to {out_dir}")
    _echo_metrics(best.config, metrics)


@cli.command()
@click.option("--bundle", "bundle_dir", required=True,
              type=click.Path(exists=True, file_okay=False), help="Experiment bundle directory.")
@click.option("--test", "test_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Test triples file.")
@click.option("--format", "source_format", type=click.Choice(SOURCE_FORMATS),
              default="tsv", show_default=True, help="Test file format.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the metrics JSON here instead of standard output.")
def evaluate(bundle_dir, test_path, source_format, out_path):
    """Evaluate a bundle's model on a test file (filtering against its stored split)."""
    bundle = load_bundle(bundle_dir)
    kg = bundle.index()
    test_ids = triples_to_ids(kg, read_triples(test_path, source_format), what="test triple")
    known = set(bundle.train_triples or ()) | set(bundle.test_triples or ()) | set(test_ids)
    metrics = evaluate_ranks(bundle.config.model_name, bundle.params, test_ids,
                             known, bundle.config.eval_ks)
    text = canonical_json(metrics.to_dict())
    if out_path:
        atomic_write_text(out_path, text)
        click.echo(f"metrics written to {out_path}")
    else:
        click.echo(text, nl=False)


def _read_label_lines(path) -> list[str]:
    labels = []
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if line and not line.startswith("#"):
                labels.append(line)
    if not labels:
        raise IngestError(f"{path}: no labels found")
    return labels


@cli.command()
@click.option("--bundle", "bundle_dir", required=True,
              type=click.Path(exists=True, file_okay=False), help="Experiment bundle directory.")
@click.option("--entities", "entities_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Entity labels, one per line ('#' comments allowed).")
@click.option("--relations", "relations_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Relation labels, one per line.")
@click.option("--exclude", "exclude_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="TSV of triples to drop from the candidates (e.g. the training set).")
@click.option("--no-reflexive", is_flag=True, help="Drop all (e, r, e) candidates.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="Ranked predictions TSV output.")
def infer(bundle_dir, entities_path, relations_path, exclude_path, no_reflexive, out_path):
    """Score all candidate triples over entity/relation sets, best first."""
    bundle = load_bundle(bundle_dir)
    kg = bundle.index()

    entity_ids = set()
    for label in _read_label_lines(entities_path):
        if label not in kg.entity_to_id:
            raise KeyError(f"unknown entity label {label!r} in {entities_path}")
        entity_ids.add(kg.entity_to_id[label])
    relation_ids = set()
    for label in _read_label_lines(relations_path):
        if label not in kg.relation_to_id:
            raise KeyError(f"unknown relation label {label!r} in {relations_path}")
        relation_ids.add(kg.relation_to_id[label])
    exclude = set()
    if exclude_path:
        exclude = set(triples_to_ids(kg, read_tsv(exclude_path), what="exclusion triple"))

    candidates = enumerate_candidates(entity_ids, relation_ids, exclude, no_reflexive)
    ranked = rank_candidates(bundle.config.model_name, bundle.params, candidates)
    write_predictions(out_path, [(kg.label_triple(t), s) for t, s in ranked])
    click.echo(f"{len(ranked)} predictions written to {out_path}")


@cli.command("zoo-validate")
@click.argument("entry_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--zoo-root", "zoo_root", default=None, type=click.Path(file_okay=False),
              help="Zoo root; enables the <domain>/<dataset>/<experiment> depth check.")
def zoo_validate(entry_dir, zoo_root):
    """Check a model-zoo entry against the sharing requirements."""
    report = validate_zoo_entry(entry_dir, zoo_root)
    for line in report.lines():
        click.echo(line)
    if not report.all_passed:
        raise ZooValidationFailed(f"zoo entry {entry_dir} failed validation")
    click.echo("all checks passed")


# ---------------------------------------------------------------------------
# interactive wizard (scriptable: reads stdin lines, no TTY required)

def _read_answer(prompt: str) -> str:
    sys.stdout.write(prompt)
    sys.stdout.flush()
    line = sys.stdin.readline()
    if line == "":  # EOF mid-wizard: abort without writing anything
        sys.stdout.write("\n")
        raise click.Abort()
    return line.strip()


def _ask(prompt, parse, example, default=None):
    """Prompt until ``parse`` accepts; re-prompt shows a correct example."""
    suffix = f" [{default}]" if default is not None else ""
    while True:
        answer = _read_answer(f"{prompt}{suffix}: ")
        if not answer and default is not None:
            answer = str(default)
        try:
            return parse(answer)
        except ValueError as exc:
            sys.stdout.write(f"Invalid value: {exc} (e.g. {example})\n")


def _parse_choice(name, choices):
    def parse(text):
        if text not in choices:
            raise ValueError(f"{name} must be one of {', '.join(choices)}")
        return text
    return parse


def _parse_positive_int(name):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise ValueError(f"{name} must be a positive integer") from None
        if value < 1:
            raise ValueError(f"{name} must be a positive integer")
        return value
    return parse


def _parse_nonnegative_float(name):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise ValueError(f"{name} must be a non-negative number") from None
        if value < 0:
            raise ValueError(f"{name} must be a non-negative number")
        return value
    return parse


def _parse_positive_float(name):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise ValueError(f"{name} must be a positive number") from None
        if value <= 0:
            raise ValueError(f"{name} must be a positive number")
        return value
    return parse


def _parse_ratio(text):
    try:
        value = float(text)
    except ValueError:
        raise ValueError("split ratio must be a number strictly between 0 and 1") from None
    if not 0 < value < 1:
        raise ValueError("split ratio must be strictly between 0 and 1")
    return value


def _parse_seed(text):
    try:
        value = int(text)
    except ValueError:
        raise ValueError("seed must be an unsigned 64-bit integer") from None
    if not 0 <= value < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return value


def _parse_existing_file(text):
    if not os.path.isfile(text):
        raise ValueError(f"file {text!r} does not exist")
    return text


def _parse_ks(text):
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError("hits@k cutoffs must be comma-separated positive integers") from None
    if not ks or any(k < 1 for k in ks):
        raise ValueError("hits@k cutoffs must be comma-separated positive integers")
    return ks


def _parse_list(element_parse):
    def parse(text):
        parts = [part.strip() for part in text.split(",") if part.strip()]
        if not parts:
            raise ValueError("provide at least one comma-separated value")
        return [element_parse(part) for part in parts]
    return parse


def _ask_model_specific(model_name, ask_value):
    """Prompt for the model's extra dims/norm; returns a model_specific dict."""
    values = {}
    prompts = {
        "relation_dim": ("relation-space dimension", "20"),
        "hidden_dim": ("hidden-layer dimension", "32"),
        "scoring_norm": ("scoring norm (1 or 2)", "2"),
    }
    for key in get_model(model_name).config_keys:
        label, example = prompts[key]
        values[key] = ask_value(key, label, example)
    return values


def _wizard_train(data_path, source_format):
    models = model_names()
    model = _ask(f"model ({'/'.join(models)})", _parse_choice("model", models), "transe")
    embedding_dim = _ask("embedding dimension", _parse_positive_int("embedding dimension"), "50")

    def ask_value(key, label, example):
        if key == "scoring_norm":
            return int(_ask(label, _parse_choice(label, ("1", "2")), example, default="2"))
        return _ask(label, _parse_positive_int(label), example, default=embedding_dim)

    model_specific = _ask_model_specific(model, ask_value)
    default_loss = get_model(model).default_loss
    loss = _ask(f"loss ({'/'.join(LOSS_NAMES)})", _parse_choice("loss", LOSS_NAMES),
                LOSS_NAMES[0], default=default_loss)
    margin = 1.0
    if loss == "margin_ranking":
        margin = _ask("margin", _parse_nonnegative_float("margin"), "1.0", default="1.0")
    learning_rate = _ask("learning rate", _parse_positive_float("learning rate"),
                         "0.01", default="0.01")
    num_epochs = _ask("number of epochs", _parse_positive_int("number of epochs"),
                      "100", default="100")
    batch_size = _ask("batch size", _parse_positive_int("batch size"), "64", default="64")
    split_ratio = _ask("train/test split ratio", _parse_ratio, "0.8", default="0.8")
    seed = _ask("random seed", _parse_seed, "42", default="0")
    eval_ks = _ask("hits@k cutoffs (comma-separated)", _parse_ks, "1,3,5,10",
                   default="1,3,5,10")
    filter_setting = _ask("filter setting (raw/filtered/both)",
                          _parse_choice("filter setting", ("raw", "filtered", "both")),
                          "both", default="both")

    config = ExperimentConfig(
        model_name=model, embedding_dim=embedding_dim, learning_rate=learning_rate,
        margin=margin, loss=loss, num_epochs=num_epochs, batch_size=batch_size,
        split_ratio=split_ratio, seed=seed, eval_ks=tuple(eval_ks),
        filter_setting=filter_setting, model_specific=model_specific)
    follow_up = "kgforge train --config {out} --data {data} --format {fmt} --out <bundle-dir>"
    return config.to_json(), follow_up.format(out="{out}", data=data_path, fmt=source_format)


def _wizard_hpo(data_path, source_format):
    models = model_names()
    parse_models = _parse_list(_parse_choice("model", models))
    chosen_models = _ask(f"model candidates ({'/'.join(models)}, comma-separated)",
                         parse_models, "transe,distmult")
    dims = _ask("embedding dimension candidates",
                _parse_list(_parse_positive_int("embedding dimension")), "16,50")

    model_specific = {}
    keys = sorted({key for name in chosen_models for key in get_model(name).config_keys})
    prompts = {
        "relation_dim": ("relation-space dimension candidates", "16,20"),
        "hidden_dim": ("hidden-layer dimension candidates", "32,64"),
        "scoring_norm": ("scoring norm candidates (1 or 2)", "1,2"),
    }
    for key in keys:
        label, example = prompts[key]
        if key == "scoring_norm":
            values = _ask(label, _parse_list(_parse_choice(label, ("1", "2"))), example,
                          default="2")
            model_specific[key] = [int(v) for v in values]
        else:
            model_specific[key] = _ask(label, _parse_list(_parse_positive_int(label)),
                                       example, default=str(dims[0]))

    learning_rates = _ask("learning rate candidates",
                          _parse_list(_parse_positive_float("learning rate")),
                          "0.01,0.1", default="0.01")
    margins = _ask("margin candidates", _parse_list(_parse_nonnegative_float("margin")),
                   "1.0,2.0", default="1.0")
    epochs = _ask("number-of-epochs candidates",
                  _parse_list(_parse_positive_int("number of epochs")), "100,200",
                  default="100")
    batch_sizes = _ask("batch size candidates",
                       _parse_list(_parse_positive_int("batch size")), "32,64", default="64")
    split_ratio = _ask("train/test split ratio (single value)", _parse_ratio, "0.8",
                       default="0.8")
    seeds = _ask("seed candidates", _parse_list(_parse_seed), "0,1", default="0")
    eval_ks = _ask("hits@k cutoffs (comma-separated)", _parse_ks, "1,3,5,10",
                   default="1,3,5,10")
    trials = _ask("number of trials", _parse_positive_int("number of trials"), "10",
                  default="10")
    metric_kind = _ask(f"selection metric ({HITS_AT_K}/{MEAN_RANK_FILTERED})",
                       _parse_choice("selection metric", (HITS_AT_K, MEAN_RANK_FILTERED)),
                       HITS_AT_K, default=HITS_AT_K)
    metric_k = 10
    if metric_kind == HITS_AT_K:
        metric_k = _ask("selection k", _parse_positive_int("selection k"), "10", default="10")

    space = SearchSpace(
        model_name=tuple(chosen_models), embedding_dim=tuple(dims),
        learning_rate=tuple(learning_rates), margin=tuple(margins),
        num_epochs=tuple(epochs), batch_size=tuple(batch_sizes),
        split_ratio=(split_ratio,), seed=tuple(seeds), eval_ks=(tuple(eval_ks),),
        model_specific={k: tuple(v) for k, v in model_specific.items()},
        trials=trials, selection_metric=SelectionMetric(metric_kind, metric_k))
    follow_up = "kgforge hpo --space {out} --data {data} --format {fmt} --out <bundle-dir>"
    return canonical_json(space.to_dict()), follow_up.format(out="{out}", data=data_path,
                                                             fmt=source_format)


@cli.command()
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Where to write the configuration JSON (otherwise prompted).")
def wizard(out_path):
    """Interactively assemble a training config or an HPO search space.

    Every answer is validated immediately; invalid input re-prompts with
    an example of a correct value. The wizard can be driven entirely by a
    scripted input stream. Nothing is written until all answers are in.
    """
    mode = _ask("mode (train/hpo)", _parse_choice("mode", ("train", "hpo")),
                "train", default="train")
    data_path = _ask("path to the knowledge-graph file", _parse_existing_file, "graph.tsv")
    source_format = _ask(f"data format ({'/'.join(SOURCE_FORMATS)})",
                         _parse_choice("data format", SOURCE_FORMATS), "tsv", default="tsv")

    if mode == "train":
        text, follow_up = _wizard_train(data_path, source_format)
    else:
        text, follow_up = _wizard_hpo(data_path, source_format)

    if out_path is None:
        default_name = "configuration.json" if mode == "train" else "search_space.json"
        out_path = _ask("output path for the configuration", str, default_name,
                        default=default_name)

    sys.stdout.write(text)
    atomic_write_text(out_path, text)
    sys.stdout.write(f"written to {out_path}\n")
    sys.stdout.write(f"next: {follow_up.format(out=out_path)}\n")


# ---------------------------------------------------------------------------
# exit-code mapping

_RUNTIME_ERRORS = (SplitError, TrainingDivergedError, HPOError, BundleError,
                   RemoteFetchError, ZooValidationFailed)
_INPUT_ERRORS = (ConfigError, IngestError, GraphError, ModelError, KeyError, ValueError)


def main(argv=None) -> int:
    _configure_logging()
    try:
        cli.main(args=argv, prog_name="kgforge", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_help(), err=True)
        else:
            click.echo("run 'kgforge --help' for usage", err=True)
        return EXIT_USAGE
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except _RUNTIME_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RUNTIME
    except _INPUT_ERRORS as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        click.echo(f"error: {message}", err=True)
        return EXIT_USAGE
    except KGForgeError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RUNTIME
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
