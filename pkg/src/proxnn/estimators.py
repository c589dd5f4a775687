"""Scikit-learn style wrappers around the functional training code."""

from __future__ import annotations

import dataclasses

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .activations import Activation
from .errors import ConfigError
from .network import (PpnnParams, TrainConfig, forward_batch, random_ppnn,
                      sgd_train)


class PPNNDenoiser(TransformerMixin, BaseEstimator):
    """Signal denoiser built from square orthogonal soft-shrinkage layers.

    ``fit(X, y)`` trains on pairs of noisy rows X and clean rows y;
    ``transform(X)`` denoises.  ``lam_mode="train"`` makes the shared
    shrinkage threshold a trainable parameter: it is held at its
    initialization until the final annealing epoch, because co-training the
    threshold against a still-random operator drives it toward zero (the
    identity network is a stationary point of the training loss) and at
    short horizons the threshold never recovers.
    """

    def __init__(self, n_layers=1, lam=0.1, lam_mode="fixed", epochs=5,
                 batch_size=32, learning_rate=0.5, lr_decay=0.65, seed=0,
                 retraction="cayley_fp"):
        self.n_layers = n_layers
        self.lam = lam
        self.lam_mode = lam_mode
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.seed = seed
        self.retraction = retraction

    def _initial_params(self, d: int) -> PpnnParams:
        if self.lam_mode not in ("fixed", "train"):
            raise ConfigError(f"unknown lam_mode {self.lam_mode!r}")
        return random_ppnn(
            d, [d] * self.n_layers, seed=self.seed,
            activation=Activation("softshrink", lam=float(self.lam)),
            shrink_trainable=self.lam_mode == "train", shared_shrink=True)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        params = self._initial_params(X.shape[1])
        schedule = "constant" if self.lr_decay == 1.0 else "step"

        def config(lr, epochs, seed, trainable):
            # threshold steps are calibrated relative to the operator steps
            return TrainConfig(batch_size=self.batch_size, learning_rate=lr,
                               epochs=epochs, seed=seed, schedule=schedule,
                               step_every=1, step_factor=self.lr_decay,
                               retraction=self.retraction,
                               shrink_rate=8.0 if trainable else 1.0)

        warmup = self.epochs - 1 if self.lam_mode == "train" else self.epochs
        self.history_ = []
        if warmup > 0:
            frozen = dataclasses.replace(params, shrink_trainable=False)
            frozen, hist = sgd_train(frozen, X, y,
                                     config(self.learning_rate, warmup,
                                            self.seed, False))
            params = dataclasses.replace(
                frozen, shrink_trainable=self.lam_mode == "train")
            self.history_ += hist
        if self.epochs > warmup:
            lr = self.learning_rate * self.lr_decay ** warmup
            params, hist = sgd_train(params, X, y,
                                     config(lr, self.epochs - warmup,
                                            self.seed + 1, True))
            self.history_ += hist
        self.params_ = params
        return self

    def transform(self, X):
        return forward_batch(self.params_, np.asarray(X, dtype=float)).output

    @property
    def lam_(self) -> float:
        """The (possibly trained) shrinkage threshold."""
        return float(self.params_.shrink[0])


class PPNNClassifier(ClassifierMixin, BaseEstimator):
    """Orthogonality-constrained classifier with a dense logistic head.

    Hidden layers are Stiefel-constrained with the given inner widths
    (widths below the input dimension use the orthonormal-rows orientation);
    the output layer is an unconstrained dense map with componentwise
    logistic activation, trained with squared loss against one-hot targets.
    """

    def __init__(self, hidden_widths=(784, 784, 400, 400, 200),
                 activation="relu", epochs=50, batch_size=1024,
                 learning_rate=5.0, seed=0, retraction="cayley_fp"):
        self.hidden_widths = hidden_widths
        self.activation = activation
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed
        self.retraction = retraction

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.classes_ = np.unique(y)
        targets = np.eye(len(self.classes_))[np.searchsorted(self.classes_, y)]
        params = random_ppnn(
            X.shape[1], list(self.hidden_widths), seed=self.seed,
            activation=Activation(self.activation),
            final_constraint="unconstrained", out_dim=len(self.classes_),
            output_activation="logistic")
        config = TrainConfig(batch_size=self.batch_size,
                             learning_rate=self.learning_rate,
                             epochs=self.epochs, seed=self.seed,
                             retraction=self.retraction)
        self.params_, self.history_ = sgd_train(params, X, targets, config)
        return self

    def decision_function(self, X):
        return forward_batch(self.params_, np.asarray(X, dtype=float)).output

    def predict_proba(self, X):
        scores = self.decision_function(X)
        return scores / scores.sum(axis=1, keepdims=True)

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
