"""Exception hierarchy.

Errors that stem from bad user input (files, configs, labels) are kept
distinct from runtime failures so the CLI can map them to different exit
codes.
"""


class KGForgeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(KGForgeError):
    """Invalid experiment configuration or search space."""


class IngestError(KGForgeError):
    """Unreadable or malformed input data (TSV, N-Triples, CX)."""


class RemoteFetchError(KGForgeError):
    """Remote network document could not be retrieved."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class GraphError(KGForgeError):
    """Structurally invalid knowledge graph (e.g. empty)."""


class SplitError(GraphError):
    """Train/test split could not be produced."""


class ModelError(KGForgeError):
    """Unknown model or invalid triple IDs passed to a model."""


class TrainingDivergedError(KGForgeError):
    """Training produced a non-finite loss or parameters."""

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class HPOError(KGForgeError):
    """Hyper-parameter search could not produce a result."""


class BundleError(KGForgeError):
    """Experiment bundle is incomplete, corrupt, or unwritable."""
