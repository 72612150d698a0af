"""Post-synaptic neuron model: current comparator, charge-packet membrane,
adaptive threshold and the query-driven read-out latency.

Membrane state is normalized to [0, 1] with 0 as reset. The physical circuit
runs the other way (packets discharge C_mem from Vc_reset toward V_ref, and a
"potentiated" threshold means a *lower* V_ref); only the normalized form is
simulated here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .device import I_REF

#: Guards ``membrane >= threshold`` against float accumulation error.
_FIRE_EPS = 1e-9


@dataclass(frozen=True)
class NeuronPhysParams:
    i_ref: float = I_REF
    i_ref_mismatch_sigma: float = 0.1 / 3
    #: relative half-width of the comparator-reference truncation
    i_ref_bound: float = 0.1
    i_c_mean: float = 10e-9
    i_c_sigma: float = 2.5e-9
    t_spike: float = 200e-9
    c_mem: float = 125e-15
    #: normalized membrane increment of an unmismatched neuron
    base_delta: float = 0.04
    #: admissible range of the delta mismatch factor (resampled outside)
    delta_factor_bounds: tuple = (0.0, float("inf"))

    def __post_init__(self):
        for name in ("i_ref", "i_c_mean", "t_spike", "c_mem", "base_delta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("i_ref_mismatch_sigma", "i_c_sigma", "i_ref_bound"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def delta_sigma(self) -> float:
        """Relative mismatch of the charge packet (0.25 by default)."""
        return self.i_c_sigma / self.i_c_mean

    @property
    def delta_vc(self) -> float:
        """Physical membrane step in volts, I_c * T_spike / C_mem."""
        return self.i_c_mean * self.t_spike / self.c_mem


@dataclass(frozen=True)
class PostNeuronState:
    membrane: float = 0.0
    threshold: float = 0.5
    delta: float = 0.04
    fired_count: int = 0

    def __post_init__(self):
        if not 0.0 <= self.membrane <= 1.0:
            raise ValueError("membrane must lie in [0, 1]")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.delta <= 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class ReadoutConfig:
    n_lev: int = 13
    clock_period: float = 20e-9
    n_neurons: int = 64

    def __post_init__(self):
        if self.n_lev < 1:
            raise ValueError("n_lev must be >= 1")
        if self.clock_period <= 0 or self.n_neurons < 1:
            raise ValueError("clock_period and n_neurons must be positive")


def comparator(i_post, i_ref_effective):
    """True where the synapse current strictly exceeds the reference."""
    active = np.asarray(i_post) > np.asarray(i_ref_effective)
    return bool(active) if active.ndim == 0 else active


def integrate_event(neuron: PostNeuronState, comparator_active: bool):
    """One input spike; returns ``(neuron', fired)``. Does not reset."""
    membrane = neuron.membrane
    if comparator_active:
        membrane = min(1.0, membrane + neuron.delta)
    fired = membrane >= neuron.threshold - _FIRE_EPS
    return replace(neuron, membrane=membrane, fired_count=neuron.fired_count + int(fired)), fired


def potentiate_threshold(neuron: PostNeuronState, step: float = 0.04) -> PostNeuronState:
    return replace(neuron, threshold=min(1.0, neuron.threshold + step))


def reset(neuron: PostNeuronState) -> PostNeuronState:
    return replace(neuron, membrane=0.0)


def readout_latency(cfg: ReadoutConfig) -> float:
    """Time to query every output neuron once: 2 * n_lev clock cycles each."""
    if cfg.n_lev < 1:
        raise ValueError("n_lev must be >= 1")
    return 2 * cfg.n_lev * cfg.clock_period * cfg.n_neurons


def _truncated_normal(rng, mean, sigma, lo, hi, n):
    out = mean + sigma * rng.standard_normal(n)
    if sigma == 0:
        return out
    bad = (out <= lo) | (out >= hi)
    while bad.any():
        out[bad] = mean + sigma * rng.standard_normal(int(bad.sum()))
        bad = (out <= lo) | (out >= hi)
    return out


def sample_mismatch(params: NeuronPhysParams, n_neurons: int, rng: np.random.Generator):
    """Per-neuron ``(delta, i_ref)`` arrays.

    ``delta = base_delta * N(1, i_c_sigma/i_c_mean)`` resampled outside
    ``delta_factor_bounds``; ``i_ref = I_ref * N(1, i_ref_mismatch_sigma)``
    resampled outside ``1 +/- i_ref_bound``.
    """
    lo, hi = params.delta_factor_bounds
    factor = _truncated_normal(rng, 1.0, params.delta_sigma, lo, hi, n_neurons)
    b = params.i_ref_bound
    ref_factor = _truncated_normal(rng, 1.0, params.i_ref_mismatch_sigma, 1 - b, 1 + b, n_neurons)
    return params.base_delta * factor, params.i_ref * ref_factor


class NeuronBank:
    """Vectorized state of all post-synaptic neurons of one core."""

    def __init__(self, delta, i_ref, threshold=0.5):
        self.delta = np.asarray(delta, dtype=float).copy()
        n = self.delta.size
        self.i_ref = np.broadcast_to(np.asarray(i_ref, dtype=float), (n,)).copy()
        self.threshold = np.broadcast_to(np.asarray(threshold, dtype=float), (n,)).copy()
        self.membrane = np.zeros(n)
        self.fired_count = np.zeros(n, dtype=np.int64)
        if np.any(self.delta <= 0):
            raise ValueError("delta must be positive")

    @classmethod
    def sample(cls, params: NeuronPhysParams, n_neurons: int, rng, threshold=0.5):
        delta, i_ref = sample_mismatch(params, n_neurons, rng)
        return cls(delta, i_ref, threshold)

    @classmethod
    def ideal(cls, params: NeuronPhysParams, n_neurons: int, threshold=0.5):
        return cls(np.full(n_neurons, params.base_delta), params.i_ref, threshold)

    def __len__(self):
        return self.delta.size

    def copy(self) -> "NeuronBank":
        other = NeuronBank(self.delta, self.i_ref, self.threshold)
        other.membrane = self.membrane.copy()
        other.fired_count = self.fired_count.copy()
        return other

    def state(self, j: int) -> PostNeuronState:
        return PostNeuronState(float(self.membrane[j]), float(self.threshold[j]),
                               float(self.delta[j]), int(self.fired_count[j]))

    def integrate(self, active: np.ndarray, threshold=None) -> np.ndarray:
        """Add one packet to every active neuron; return the mask of neurons at threshold."""
        thr = self.threshold if threshold is None else threshold
        np.minimum(self.membrane + self.delta * active, 1.0, out=self.membrane)
        fired = self.membrane >= thr - _FIRE_EPS
        self.fired_count += fired
        return fired

    def reset(self, mask=None) -> None:
        if mask is None:
            self.membrane[:] = 0.0
        else:
            self.membrane[np.asarray(mask, bool)] = 0.0

    def potentiate(self, j: int, step: float = 0.04) -> None:
        self.threshold[j] = min(1.0, self.threshold[j] + step)
