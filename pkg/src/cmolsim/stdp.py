"""Regularized stochastic binary STDP (order-based, full-swing updates).

On every post-synaptic spike of neuron ``j``:

1. each synapse from a neuron in the recent pre-spike history is written
   to LRS with probability ``p_ltp``;
2. every other synapse of row ``j`` is erased to HRS with probability ``p_ltd``;
3. the threshold of ``j`` is raised by ``threshold_step`` (saturating at 1);
4. row ``j`` is corrected back to exactly ``n_lrs_target`` LRS devices by
   flipping uniformly chosen cells.

Pre-synaptic spikes alone never change a weight.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .crossbar import Crossbar
from .neuron import NeuronBank


@dataclass(frozen=True)
class StdpConfig:
    p_ltp: float = 0.6
    p_ltd: float = 0.15
    history_len: int = 64
    n_lrs_target: int = 32
    threshold_step: float = 0.04
    initial_threshold: float = 0.5
    #: passes of verify-and-repulse during regularization
    regularize_retries: int = 10

    def __post_init__(self):
        for name in ("p_ltp", "p_ltd"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if self.history_len < 1:
            raise ValueError("history_len must be >= 1")
        if self.n_lrs_target < 0:
            raise ValueError("n_lrs_target must be >= 0")
        if not 0.0 <= self.initial_threshold <= 1.0:
            raise ValueError("initial_threshold must lie in [0, 1]")


class PreSpikeHistory:
    """Arrival-ordered ids of the last ``maxlen`` pre-synaptic spikes (oldest first)."""

    def __init__(self, maxlen: int = 64, ids=()):
        self._buf = deque(ids, maxlen=maxlen)

    @property
    def maxlen(self) -> int:
        return self._buf.maxlen

    def __len__(self):
        return len(self._buf)

    def __iter__(self):
        return iter(self._buf)

    def __eq__(self, other):
        return isinstance(other, PreSpikeHistory) and list(self) == list(other)

    def __repr__(self):
        return f"PreSpikeHistory({list(self._buf)!r}, maxlen={self.maxlen})"

    def append(self, pre_id: int) -> None:
        self._buf.append(int(pre_id))

    def correlated(self, n_pre: int) -> np.ndarray:
        """Boolean mask of the distinct pre neurons present in the history."""
        mask = np.zeros(n_pre, bool)
        if self._buf:
            mask[np.fromiter(self._buf, dtype=np.int64)] = True
        return mask

    def copy(self) -> "PreSpikeHistory":
        return PreSpikeHistory(self.maxlen, self._buf)


def record_pre_spike(history: PreSpikeHistory, pre_id: int) -> PreSpikeHistory:
    """Return a new history with ``pre_id`` appended (oldest entry evicted when full)."""
    out = history.copy()
    out.append(pre_id)
    return out


def init_random_weights(xbar: Crossbar, rng: np.random.Generator, n_lrs: int | None = None) -> Crossbar:
    """Program each row with exactly ``n_lrs`` (default half) LRS cells at random positions."""
    n_lrs = xbar.n_pre // 2 if n_lrs is None else n_lrs
    bits = np.zeros(xbar.shape, np.uint8)
    for j in range(xbar.n_post):
        bits[j, rng.choice(xbar.n_pre, size=n_lrs, replace=False)] = 1
    xbar.program_pattern(bits, rng, verify=True)
    return xbar


def regularize(xbar: Crossbar, post_id: int, cfg: StdpConfig, rng: np.random.Generator) -> int:
    """Flip uniformly chosen cells of row ``post_id`` until it holds ``n_lrs_target`` LRS.

    Returns the number of cells pulsed. With program failures some rows may
    still miss the target after ``cfg.regularize_retries`` passes.
    """
    target = min(cfg.n_lrs_target, xbar.n_pre)
    pulsed = 0
    for _ in range(cfg.regularize_retries + 1):
        lrs = xbar.lrs_mask()[post_id]
        diff = int(lrs.sum()) - target
        if diff == 0:
            break
        pool = np.flatnonzero(lrs if diff > 0 else ~lrs)
        chosen = rng.choice(pool, size=abs(diff), replace=False)
        mask = np.zeros(xbar.n_pre, bool)
        mask[chosen] = True
        if diff > 0:
            xbar.erase_row(post_id, mask, rng)
        else:
            xbar.write_row(post_id, mask, rng)
        pulsed += abs(diff)
    return pulsed


@dataclass
class UpdateRecord:
    """What one post-spike did to its row (for training traces)."""

    post_id: int
    n_ltp: int
    n_ltd: int
    n_regularized: int
    threshold: float


def on_post_spike(xbar: Crossbar, history: PreSpikeHistory, post_id: int, neurons: NeuronBank,
                  cfg: StdpConfig, rng: np.random.Generator) -> UpdateRecord:
    """Apply the full SB-STDP update for a spike of ``post_id`` (in place)."""
    if not 0 <= post_id < xbar.n_post:
        raise IndexError(f"post index {post_id} out of range")
    corr = history.correlated(xbar.n_pre)
    ltp = corr & (rng.random(xbar.n_pre) < cfg.p_ltp)
    ltd = ~corr & (rng.random(xbar.n_pre) < cfg.p_ltd)
    xbar.write_row(post_id, ltp, rng)
    xbar.erase_row(post_id, ltd, rng)
    neurons.potentiate(post_id, cfg.threshold_step)
    n_reg = regularize(xbar, post_id, cfg, rng)
    return UpdateRecord(post_id, int(ltp.sum()), int(ltd.sum()), n_reg,
                        float(neurons.threshold[post_id]))
