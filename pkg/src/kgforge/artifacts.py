"""Experiment bundles: export, load, and model-zoo validation.

A bundle directory contains everything needed to reproduce and reuse an
experiment, all human-facing parts as canonical JSON (sorted keys, full
float precision) and the trained parameters as one versioned, checksummed
binary so corruption is detected on load:

* ``configuration.json``      — the experiment configuration
* ``evaluation_summary.json`` — rank metrics (raw and filtered)
* ``entity_to_id.json`` / ``relation_to_id.json`` — label dictionaries
* ``entity_embeddings.json`` plus one JSON per extra tensor family
* ``trained_model.bin``       — all parameters (format below)
* ``training_history.json``   — per-epoch mean losses
* ``training_triples.json`` / ``test_triples.json`` — the exact split, so
  stored metrics can be recomputed bit-for-bit
* ``hpo_trials.json``         — optional, per-trial search records

Binary format of ``trained_model.bin`` (all little-endian):
``b"KEENB"`` magic, 1 version byte (currently 1), uint32 header length, a
JSON header (model name, dims, tensor manifest with shapes), the raw
float64 tensor data in manifest order, and an 8-byte BLAKE2b checksum over
everything preceding it.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import struct
from dataclasses import dataclass
from urllib.parse import urlparse

import numpy as np

from kgforge.config import ExperimentConfig, canonical_json
from kgforge.errors import BundleError
from kgforge.evaluation import RankMetrics
from kgforge.fileio import atomic_write_bytes, atomic_write_text
from kgforge.graph import IndexedKG
from kgforge.models import ENTITY_EMB, ModelParams, get_model
from kgforge.training import TrainingHistory

MAGIC = b"KEENB"
FORMAT_VERSION = 1
CHECKSUM_BYTES = 8

CONFIG_FILE = "configuration.json"
METRICS_FILE = "evaluation_summary.json"
ENTITY_MAP_FILE = "entity_to_id.json"
RELATION_MAP_FILE = "relation_to_id.json"
MODEL_FILE = "trained_model.bin"
HISTORY_FILE = "training_history.json"
TRAIN_TRIPLES_FILE = "training_triples.json"
TEST_TRIPLES_FILE = "test_triples.json"
TRIALS_FILE = "hpo_trials.json"

_BASE_REQUIRED = (CONFIG_FILE, METRICS_FILE, ENTITY_MAP_FILE, RELATION_MAP_FILE,
                  f"{ENTITY_EMB}.json", MODEL_FILE)

README_NAMES = ("README.md", "README.rst", "README.txt", "README")
ZOO_ENTRY_DEPTH = 3  # <domain>/<dataset>/<experiment_name>


# ---------------------------------------------------------------------------
# parameter binary codec

def encode_params(params: ModelParams) -> bytes:
    header = {
        "model_name": params.model_name,
        "dims": params.dims,
        "tensors": [{"name": name, "shape": list(tensor.shape)}
                    for name, tensor in params.tensors.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    body = bytearray()
    body += MAGIC
    body.append(FORMAT_VERSION)
    body += struct.pack("<I", len(header_bytes))
    body += header_bytes
    for tensor in params.tensors.values():
        body += np.ascontiguousarray(tensor, dtype="<f8").tobytes()
    checksum = hashlib.blake2b(bytes(body), digest_size=CHECKSUM_BYTES).digest()
    return bytes(body) + checksum


def decode_params(blob: bytes) -> ModelParams:
    prefix = len(MAGIC) + 1 + 4
    if len(blob) < prefix + CHECKSUM_BYTES:
        raise BundleError("model binary is truncated")
    if blob[:len(MAGIC)] != MAGIC:
        raise BundleError("not a model binary (bad magic bytes)")
    body, checksum = blob[:-CHECKSUM_BYTES], blob[-CHECKSUM_BYTES:]
    if hashlib.blake2b(body, digest_size=CHECKSUM_BYTES).digest() != checksum:
        raise BundleError("model binary checksum mismatch")
    version = blob[len(MAGIC)]
    if version != FORMAT_VERSION:
        raise BundleError(f"model binary has format version {version}, "
                          f"but this build reads version {FORMAT_VERSION}")
    (header_len,) = struct.unpack("<I", blob[len(MAGIC) + 1:prefix])
    header_end = prefix + header_len
    if header_end > len(body):
        raise BundleError("model binary header is truncated")
    try:
        header = json.loads(body[prefix:header_end].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise BundleError(f"model binary header is not valid JSON: {exc}") from None

    tensors = {}
    offset = header_end
    for item in header["tensors"]:
        shape = tuple(int(s) for s in item["shape"])
        nbytes = int(np.prod(shape)) * 8 if shape else 8
        raw = body[offset:offset + nbytes]
        if len(raw) != nbytes:
            raise BundleError(f"model binary tensor {item['name']!r} is truncated")
        tensors[item["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(body):
        raise BundleError("model binary has trailing bytes")
    dims = {key: int(value) for key, value in header["dims"].items()}
    return ModelParams(header["model_name"], dims, tensors)


# ---------------------------------------------------------------------------
# export / load

def tensor_file(family: str) -> str:
    return f"{family}.json"


def export_experiment(directory, config: ExperimentConfig, kg: IndexedKG,
                      params: ModelParams, metrics: RankMetrics,
                      history: TrainingHistory, trials=None, *,
                      kg_train: IndexedKG | None = None,
                      kg_test: IndexedKG | None = None,
                      overwrite: bool = False) -> str:
    """Write the full bundle; refuses a non-empty directory unless ``overwrite``."""
    directory = os.fspath(directory)
    if os.path.exists(directory):
        if not os.path.isdir(directory):
            raise BundleError(f"{directory} exists and is not a directory")
        if os.listdir(directory) and not overwrite:
            raise BundleError(f"{directory} is not empty (pass overwrite to replace)")
    os.makedirs(directory, exist_ok=True)

    def write_json(name, data):
        atomic_write_text(os.path.join(directory, name), canonical_json(data))

    write_json(CONFIG_FILE, config.to_dict())
    write_json(METRICS_FILE, metrics.to_dict())
    write_json(ENTITY_MAP_FILE, kg.entity_to_id)
    write_json(RELATION_MAP_FILE, kg.relation_to_id)
    write_json(HISTORY_FILE, history.to_dict())
    for family, tensor in params.tensors.items():
        write_json(tensor_file(family), tensor.tolist())
    if kg_train is not None:
        write_json(TRAIN_TRIPLES_FILE, [list(t) for t in kg_train.triples])
    if kg_test is not None:
        write_json(TEST_TRIPLES_FILE, [list(t) for t in kg_test.triples])
    if trials is not None:
        write_json(TRIALS_FILE, trials)
    atomic_write_bytes(os.path.join(directory, MODEL_FILE), encode_params(params))
    return directory


def missing_bundle_files(directory) -> list[str]:
    """Required files that are absent, in a stable order.

    The per-tensor JSON requirements come from the model binary's own
    manifest; if the binary itself is unreadable only the base files are
    checked (its corruption is the instantiation check's concern).
    """
    missing = [name for name in _BASE_REQUIRED
               if not os.path.isfile(os.path.join(directory, name))]
    model_path = os.path.join(directory, MODEL_FILE)
    if os.path.isfile(model_path):
        try:
            params = decode_params(_read_bytes(model_path))
        except BundleError:
            return missing
        for family in params.tensors:
            name = tensor_file(family)
            if name not in _BASE_REQUIRED and not os.path.isfile(os.path.join(directory, name)):
                missing.append(name)
    return missing


def _read_bytes(path) -> bytes:
    with open(path, "rb") as handle:
        return handle.read()


def _read_json(directory, name):
    path = os.path.join(directory, name)
    if not os.path.isfile(path):
        raise BundleError(f"missing {name}")
    with open(path, encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise BundleError(f"{name} is not valid JSON: {exc}") from None


@dataclass(frozen=True)
class ExperimentBundle:
    """Everything read back from a bundle directory."""

    directory: str
    config: ExperimentConfig
    params: ModelParams
    metrics: RankMetrics
    entity_to_id: dict[str, int]
    relation_to_id: dict[str, int]
    history: TrainingHistory | None
    train_triples: tuple | None
    test_triples: tuple | None
    trials: list | None

    def index(self) -> IndexedKG:
        """The indexed KG over all stored triples (train plus test)."""
        triples = tuple(self.train_triples or ()) + tuple(self.test_triples or ())
        return IndexedKG(self.entity_to_id, self.relation_to_id, triples)


def load_bundle(directory) -> ExperimentBundle:
    directory = os.fspath(directory)
    if not os.path.isdir(directory):
        raise BundleError(f"{directory} is not a directory")
    missing = missing_bundle_files(directory)
    if missing:
        raise BundleError(f"missing {missing[0]}")

    config = ExperimentConfig.from_dict(_read_json(directory, CONFIG_FILE))
    params = decode_params(_read_bytes(os.path.join(directory, MODEL_FILE)))
    metrics = RankMetrics.from_dict(_read_json(directory, METRICS_FILE))
    entity_to_id = {str(k): int(v) for k, v in _read_json(directory, ENTITY_MAP_FILE).items()}
    relation_to_id = {str(k): int(v) for k, v in _read_json(directory, RELATION_MAP_FILE).items()}

    history = None
    if os.path.isfile(os.path.join(directory, HISTORY_FILE)):
        history = TrainingHistory.from_dict(_read_json(directory, HISTORY_FILE))
    train_triples = test_triples = None
    if os.path.isfile(os.path.join(directory, TRAIN_TRIPLES_FILE)):
        train_triples = tuple(tuple(t) for t in _read_json(directory, TRAIN_TRIPLES_FILE))
    if os.path.isfile(os.path.join(directory, TEST_TRIPLES_FILE)):
        test_triples = tuple(tuple(t) for t in _read_json(directory, TEST_TRIPLES_FILE))
    trials = None
    if os.path.isfile(os.path.join(directory, TRIALS_FILE)):
        trials = _read_json(directory, TRIALS_FILE)

    return ExperimentBundle(directory, config, params, metrics, entity_to_id,
                            relation_to_id, history, train_triples, test_triples, trials)


def load_experiment(directory) -> tuple[ExperimentConfig, ModelParams, RankMetrics]:
    """Reconstruct a scoreable model: (config, params, metrics)."""
    bundle = load_bundle(directory)
    return bundle.config, bundle.params, bundle.metrics


# ---------------------------------------------------------------------------
# model-zoo validation

@dataclass(frozen=True)
class RequirementCheck:
    requirement: str
    passed: bool | None  # None: not checked
    reason: str

    def line(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "SKIPPED"}[self.passed]
        return f"{self.requirement}: {status} ({self.reason})"


@dataclass(frozen=True)
class ValidationReport:
    entry_dir: str
    checks: tuple[RequirementCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(check.passed is not False for check in self.checks)

    def lines(self) -> list[str]:
        return [check.line() for check in self.checks]


def validate_zoo_entry(entry_dir, zoo_root=None) -> ValidationReport:
    """Mechanical checks of a zoo entry; failures are report rows, not errors.

    The publication and dataset-accessibility requirements are human
    judgments; this validator only checks their syntactic proxies (a
    non-empty ``reference`` metadata field, and a ``dataset_url`` metadata
    field that parses as an absolute URL). Never modifies the directory.
    """
    entry_dir = os.fspath(entry_dir)
    checks = []

    config = None
    config_error = None
    try:
        config = ExperimentConfig.from_dict(_read_json(entry_dir, CONFIG_FILE))
    except BundleError as exc:
        config_error = str(exc)

    reference = (config.metadata.get("reference", "") if config else "").strip()
    checks.append(RequirementCheck(
        "reference", bool(reference),
        f"non-empty 'reference' metadata field (syntactic proxy): {reference!r}"
        if config else f"configuration unreadable: {config_error}"))

    missing = missing_bundle_files(entry_dir) if os.path.isdir(entry_dir) else list(_BASE_REQUIRED)
    checks.append(RequirementCheck(
        "completeness", not missing,
        "all bundle files present" if not missing else f"missing: {', '.join(missing)}"))

    url = (config.metadata.get("dataset_url", "") if config else "").strip()
    parsed = urlparse(url)
    url_ok = bool(parsed.scheme in ("http", "https", "ftp") and parsed.netloc)
    checks.append(RequirementCheck(
        "dataset_url", url_ok,
        f"'dataset_url' metadata field resolves syntactically: {url!r}"
        if config else f"configuration unreadable: {config_error}"))

    readme = next((name for name in README_NAMES
                   if os.path.isfile(os.path.join(entry_dir, name))
                   and os.path.getsize(os.path.join(entry_dir, name)) > 0), None)
    checks.append(RequirementCheck(
        "description", readme is not None,
        f"found {readme}" if readme else f"no non-empty {' / '.join(README_NAMES)} in entry"))

    checks.append(_instantiation_check(entry_dir))

    if zoo_root is None:
        checks.append(RequirementCheck(
            "layout", None, "not checked (no zoo root provided)"))
    else:
        relative = os.path.relpath(os.path.abspath(entry_dir), os.path.abspath(zoo_root))
        parts = [p for p in relative.split(os.sep) if p not in ("", ".")]
        ok = ".." not in parts and len(parts) == ZOO_ENTRY_DEPTH
        checks.append(RequirementCheck(
            "layout", ok,
            f"entry path depth relative to zoo root is {len(parts)}, "
            f"expected {ZOO_ENTRY_DEPTH} (<domain>/<dataset>/<experiment>)"))

    return ValidationReport(entry_dir, tuple(checks))


def _instantiation_check(entry_dir) -> RequirementCheck:
    model_path = os.path.join(entry_dir, MODEL_FILE)
    if not os.path.isfile(model_path):
        return RequirementCheck("instantiation", False, f"missing {MODEL_FILE}")
    try:
        params = decode_params(_read_bytes(model_path))
        model = get_model(params.model_name)
        probe_score = model.score_batch(params, [(0, 0, 0)])[0]
        if not math.isfinite(probe_score):
            return RequirementCheck("instantiation", False,
                                    f"probe score is not finite: {probe_score}")
    except Exception as exc:  # report, never raise
        return RequirementCheck("instantiation", False, f"{type(exc).__name__}: {exc}")
    return RequirementCheck("instantiation", True,
                            f"model deserialized and scored a probe triple ({probe_score:.6g})")
