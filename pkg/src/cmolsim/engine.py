"""Event-by-event simulation of one crossbar layer.

Each input event activates one crossbar column; every post neuron whose
synapse current beats its comparator reference integrates one charge packet.
Neurons at threshold emit a post spike, optionally trigger SB-STDP, and are
reset according to ``reset_mode``:

``"all"``
    any spike resets every membrane (first-to-fire wins);
``"fired"``
    only the neurons that spiked are reset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .crossbar import Crossbar
from .neuron import NeuronBank, comparator
from .stdp import PreSpikeHistory, StdpConfig, UpdateRecord, on_post_spike

RESET_MODES = ("all", "fired")


@dataclass
class LayerRun:
    """Post-synaptic raster of a run; all arrays are aligned per output spike."""

    t_ns: np.ndarray
    neuron: np.ndarray
    segment: np.ndarray
    n_segments: int
    #: (start_ns, end_ns) of each presented pattern
    segment_bounds: list = field(default_factory=list)
    updates: list = field(default_factory=list)
    #: thresholds after each update, one row per update (empty without learning)
    threshold_trace: np.ndarray | None = None

    def counts(self, n_neurons: int) -> np.ndarray:
        """Spike counts ``[neuron][segment]``."""
        out = np.zeros((n_neurons, self.n_segments), dtype=np.int64)
        np.add.at(out, (self.neuron, self.segment), 1)
        return out

    def ids_per_segment(self):
        """Post-neuron ids in firing order, split per input segment."""
        return [self.neuron[self.segment == s] for s in range(self.n_segments)]


def run_layer(xbar: Crossbar, neurons: NeuronBank, segments, *, period_ns: int = 220,
              reset_mode: str = "all", reset_between: bool = True, threshold=None,
              learning: StdpConfig | None = None, history: PreSpikeHistory | None = None,
              rng: np.random.Generator | None = None, start_ns: int = 0) -> LayerRun:
    """Drive ``xbar``/``neurons`` with ``segments`` (sequences of pre-neuron ids).

    ``threshold`` overrides the neuron thresholds (e.g. mismatch-compensated
    read-out) and is ignored for learning, which always potentiates
    ``neurons.threshold``. With ``learning`` set, ``xbar`` and ``neurons``
    are modified in place.
    """
    if reset_mode not in RESET_MODES:
        raise ValueError(f"reset_mode must be one of {RESET_MODES}")
    if learning is not None:
        if rng is None:
            raise ValueError("learning needs an rng")
        if history is None:
            history = PreSpikeHistory(learning.history_len)
    if len(neurons) != xbar.n_post:
        raise ValueError("neuron bank size does not match crossbar rows")
    thr_override = None if threshold is None else np.asarray(threshold, dtype=float)

    active = comparator(xbar.current_matrix(), neurons.i_ref[:, None])
    t = int(start_ns)
    out_t, out_n, out_s, bounds, updates, trace = [], [], [], [], [], []
    for s, ids in enumerate(segments):
        if reset_between:
            neurons.reset()
        seg_start = t
        for pre in np.asarray(ids, dtype=np.int64):
            if not 0 <= pre < xbar.n_pre:
                raise IndexError(f"pre index {pre} out of range")
            if history is not None:
                history.append(pre)
            thr = neurons.threshold if (thr_override is None or learning is not None) else thr_override
            fired = neurons.integrate(active[:, pre], thr)
            if fired.any():
                idx = np.flatnonzero(fired)
                out_t.extend([t] * idx.size)
                out_n.extend(idx.tolist())
                out_s.extend([s] * idx.size)
                if learning is not None:
                    for j in idx:
                        rec: UpdateRecord = on_post_spike(xbar, history, int(j), neurons, learning, rng)
                        updates.append(rec)
                        trace.append(neurons.threshold.copy())
                    rows = comparator(xbar.current_matrix()[idx], neurons.i_ref[idx, None])
                    active[idx] = rows
                neurons.reset(None if reset_mode == "all" else fired)
            t += period_ns
        bounds.append((seg_start, t))
    return LayerRun(
        t_ns=np.asarray(out_t, dtype=np.int64),
        neuron=np.asarray(out_n, dtype=np.int64),
        segment=np.asarray(out_s, dtype=np.int64),
        n_segments=len(bounds),
        segment_bounds=bounds,
        updates=updates,
        threshold_trace=np.asarray(trace) if trace else None,
    )
