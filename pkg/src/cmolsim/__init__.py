"""Behavioral simulator of a CMOS-memristor neuromorphic core.

A 64x64 1T1R crossbar with charge-packet spiking neurons, regularized
stochastic binary STDP, a pseudo-CMOL layout mapper and experiment
pipelines for template matching and feature learning.
"""

from .crossbar import Crossbar
from .device import DeviceParams, MemState, PulseKind, UnformedDeviceError
from .encoding import SpikeEvent, TimingConfig
from .layout import TileGeometry, TilePlacement, map_synapse, unmap_synapse
from .neuron import NeuronBank, NeuronPhysParams, ReadoutConfig, readout_latency
from .stdp import PreSpikeHistory, StdpConfig, on_post_spike

__version__ = "0.1.0"

__all__ = [
    "Crossbar", "DeviceParams", "MemState", "PulseKind", "UnformedDeviceError", "SpikeEvent",
    "TimingConfig", "TileGeometry", "TilePlacement", "map_synapse", "unmap_synapse", "NeuronBank",
    "NeuronPhysParams", "ReadoutConfig", "readout_latency", "PreSpikeHistory", "StdpConfig",
    "on_post_spike",
]
