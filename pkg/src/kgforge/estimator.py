"""Scikit-learn style estimator facade over the functional core."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from kgforge.config import ExperimentConfig
from kgforge.graph import build_index
from kgforge.inference import predict as predict_scores
from kgforge.models import ENTITY_EMB, get_model
from kgforge.training import train
from kgforge.validation import as_entity_labels, as_label_triples, triples_to_ids


class KGEmbedder(BaseEstimator):
    """Knowledge-graph embedding estimator with a fit/predict interface.

    ``fit`` takes label triples, indexes them, and trains the selected
    embedding model on all of them; ``predict`` returns plausibility
    scores (higher = more plausible) for label triples over the fitted
    vocabulary, and ``transform`` looks up entity embedding vectors. The
    hyper-parameters mirror :class:`kgforge.config.ExperimentConfig`, so
    the estimator composes with scikit-learn model selection utilities via
    ``get_params`` / ``set_params`` / ``clone``.

    Parameters
    ----------
    model_name : str, default "transe"
        One of the registered model names.
    embedding_dim : int, default 50
        Dimension of entity (and, model permitting, relation) embeddings.
    learning_rate : float, default 0.01
        SGD step size.
    margin : float, default 1.0
        Margin of the ranking loss; ignored under binary cross entropy.
    loss : str or None, default None
        "margin_ranking" or "binary_cross_entropy"; None selects the
        model's default.
    num_epochs : int, default 100
    batch_size : int, default 64
    relation_dim : int or None, default None
        Relation-space dimension for models that project entities into a
        separate relation space; None means ``embedding_dim``.
    hidden_dim : int or None, default None
        Hidden-layer width for the MLP model; None means ``embedding_dim``.
    scoring_norm : int, default 2
        1 or 2; the norm used by the unsquared-distance models.
    seed : int, default 0
        Seed for the deterministic training streams.

    Attributes
    ----------
    index_ : kgforge.graph.IndexedKG
        Label dictionaries and indexed triples seen during fit.
    params_ : kgforge.models.ModelParams
        Trained parameter tensors.
    history_ : kgforge.training.TrainingHistory
        Per-epoch mean losses.
    """

    def __init__(self, model_name="transe", embedding_dim=50, learning_rate=0.01,
                 margin=1.0, loss=None, num_epochs=100, batch_size=64,
                 relation_dim=None, hidden_dim=None, scoring_norm=2, seed=0):
        self.model_name = model_name
        self.embedding_dim = embedding_dim
        self.learning_rate = learning_rate
        self.margin = margin
        self.loss = loss
        self.num_epochs = num_epochs
        self.batch_size = batch_size
        self.relation_dim = relation_dim
        self.hidden_dim = hidden_dim
        self.scoring_norm = scoring_norm
        self.seed = seed

    def _config(self) -> ExperimentConfig:
        model = get_model(self.model_name)
        model_specific = {}
        for key, value in (("relation_dim", self.relation_dim),
                           ("hidden_dim", self.hidden_dim),
                           ("scoring_norm", self.scoring_norm)):
            if key in model.config_keys and value is not None:
                model_specific[key] = value
        return ExperimentConfig(
            model_name=self.model_name,
            embedding_dim=self.embedding_dim,
            learning_rate=self.learning_rate,
            margin=self.margin,
            loss=self.loss,
            num_epochs=self.num_epochs,
            batch_size=self.batch_size,
            seed=self.seed,
            model_specific=model_specific,
        )

    def fit(self, X, y=None):
        """Index the label triples in X and train on all of them."""
        triples = as_label_triples(X)
        self.index_ = build_index(triples)
        self.params_, self.history_ = train(self.index_, self._config())
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("this KGEmbedder instance is not fitted yet; call fit first")

    def predict(self, X) -> np.ndarray:
        """Plausibility scores for label triples, aligned with the input."""
        self._check_fitted()
        id_triples = triples_to_ids(self.index_, as_label_triples(X))
        return np.asarray(predict_scores(self.model_name, self.params_, id_triples))

    def transform(self, X) -> np.ndarray:
        """Embedding vectors for a sequence of entity labels."""
        self._check_fitted()
        labels = as_entity_labels(X)
        unknown = [label for label in labels if label not in self.index_.entity_to_id]
        if unknown:
            raise KeyError(f"unknown entity labels: {unknown[:5]}")
        ids = [self.index_.entity_to_id[label] for label in labels]
        return self.params_.tensors[ENTITY_EMB][ids].copy()
