"""scikit-learn style wrappers around the core pipelines.

``X`` is always a 2-D array of flattened binary images (one row per sample).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .crossbar import Crossbar
from .device import DeviceParams
from .engine import run_layer
from .experiments import compensated_thresholds
from .neuron import NeuronBank, NeuronPhysParams
from .rng import substream
from .stdp import StdpConfig, init_random_weights


def _check_binary(X):
    X = check_array(X, dtype=None)
    if not np.isin(X, (0, 1)).all():
        raise ValueError("X must be binary (0/1)")
    return X.astype(np.uint8)


def _seed(random_state) -> int:
    if random_state is None:
        return 0
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    raise ValueError("random_state must be an int or None")


class TemplateMatcher(ClassifierMixin, BaseEstimator):
    """One crossbar row per training sample; prediction = label of the row firing most.

    Membranes are reset after every output spike (first to fire wins) and
    between samples, so samples are classified independently.
    """

    def __init__(self, threshold=0.5, repeats=10, base_delta=0.04, mismatch=0.25,
                 p_program_fail=0.01, random_state=None):
        self.threshold = threshold
        self.repeats = repeats
        self.base_delta = base_delta
        self.mismatch = mismatch
        self.p_program_fail = p_program_fail
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=None)
        X = _check_binary(X)
        seed = _seed(self.random_state)
        self.classes_ = unique_labels(y)
        self.template_labels_ = np.asarray(y)
        self.n_features_in_ = X.shape[1]
        self.crossbar_ = Crossbar(X.shape[0], X.shape[1], DeviceParams(p_program_fail=self.p_program_fail))
        self.crossbar_.form_all(substream(seed, "device"))
        self.crossbar_.program_pattern(X, substream(seed, "device", 1))
        params = NeuronPhysParams(base_delta=self.base_delta, i_c_sigma=self.mismatch * 10e-9)
        self.neurons_ = NeuronBank.sample(params, X.shape[0], substream(seed, "mismatch"), threshold=self.threshold)
        return self

    def spike_counts(self, X) -> np.ndarray:
        """Output spike counts ``(n_samples, n_templates)``."""
        check_is_fitted(self)
        X = _check_binary(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features")
        segs = [np.tile(np.flatnonzero(row), self.repeats) for row in X]
        run = run_layer(self.crossbar_, self.neurons_.copy(), segs, reset_mode="all")
        return run.counts(len(self.neurons_)).T

    def decision_function(self, X):
        return self.spike_counts(X)

    def predict(self, X):
        counts = self.spike_counts(X)
        return self.template_labels_[np.argmax(counts, axis=1)]

    def correct_spike_ratio(self, X, y) -> float:
        """Share of output spikes emitted by a template carrying the sample's label."""
        counts = self.spike_counts(X)
        hit = self.template_labels_[None, :] == np.asarray(y)[:, None]
        total = counts.sum()
        return float(counts[hit].sum() / total) if total else 0.0


class SBSTDPFeatureExtractor(TransformerMixin, BaseEstimator):
    """Unsupervised SB-STDP feature layer on a 64x64 crossbar.

    ``fit`` presents every row of ``X`` once, in order, with learning on.
    ``transform`` returns per-sample output spike counts with learning off
    and mismatch-compensated thresholds.
    """

    def __init__(self, n_neurons=64, p_ltp=0.6, p_ltd=0.15, n_lrs_target=32, history_len=64,
                 threshold_step=0.04, initial_threshold=0.5, repeats=10, base_delta=0.04,
                 p_program_fail=0.01, random_state=None):
        self.n_neurons = n_neurons
        self.p_ltp = p_ltp
        self.p_ltd = p_ltd
        self.n_lrs_target = n_lrs_target
        self.history_len = history_len
        self.threshold_step = threshold_step
        self.initial_threshold = initial_threshold
        self.repeats = repeats
        self.base_delta = base_delta
        self.p_program_fail = p_program_fail
        self.random_state = random_state

    def _stdp_config(self) -> StdpConfig:
        return StdpConfig(p_ltp=self.p_ltp, p_ltd=self.p_ltd, history_len=self.history_len,
                          n_lrs_target=self.n_lrs_target, threshold_step=self.threshold_step,
                          initial_threshold=self.initial_threshold)

    def _segments(self, X):
        return [np.tile(np.flatnonzero(row), self.repeats) for row in X]

    def fit(self, X, y=None):
        X = _check_binary(X)
        seed = _seed(self.random_state)
        cfg = self._stdp_config()
        self.n_features_in_ = X.shape[1]
        xbar = Crossbar(self.n_neurons, X.shape[1], DeviceParams(p_program_fail=self.p_program_fail))
        xbar.form_all(substream(seed, "device"))
        init_random_weights(xbar, substream(seed, "init"))
        bank = NeuronBank.sample(NeuronPhysParams(base_delta=self.base_delta), self.n_neurons,
                                 substream(seed, "mismatch"), threshold=cfg.initial_threshold)
        self.initial_crossbar_ = xbar.copy()
        run = run_layer(xbar, bank, self._segments(X), learning=cfg, rng=substream(seed, "stdp"))
        self.crossbar_, self.neurons_ = xbar, bank
        self.n_updates_ = len(run.updates)
        self.thresholds_ = bank.threshold.copy()
        return self

    def weights(self) -> np.ndarray:
        """Binary learned weights ``[neuron][input]`` (LRS = 1)."""
        check_is_fitted(self)
        return self.crossbar_.lrs_mask().astype(np.uint8)

    def transform(self, X):
        check_is_fitted(self)
        X = _check_binary(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features")
        thr = compensated_thresholds(self.neurons_, self.base_delta)
        run = run_layer(self.crossbar_, self.neurons_.copy(), self._segments(X), threshold=thr)
        return run.counts(self.n_neurons).T


class SpikeCountClassifier(ClassifierMixin, BaseEstimator):
    """Linear read-out with ``w_ij = N_ij / N_j`` learned from feature spike counts.

    ``decision_function`` is the charge each class neuron would integrate,
    ``X @ w``; the event-exact integrate-and-fire read-out is
    :func:`cmolsim.experiments.classify`.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if np.any(X < 0):
            raise ValueError("spike counts must be non-negative")
        self.classes_ = unique_labels(y)
        self.n_features_in_ = X.shape[1]
        counts = np.stack([X[y == c].sum(axis=0) for c in self.classes_], axis=1).astype(float)
        totals = counts.sum(axis=0)
        self.coef_ = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
        return self

    def decision_function(self, X):
        check_is_fitted(self)
        X = check_array(X)
        return X @ self.coef_

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
