"""1T1R memristor-selector behavioral model.

A cell is a binary-intent resistive device: the programmed *state* is HRS or
LRS, but the resistance is a continuous value redrawn from a per-state
log-normal distribution on every successful program pulse.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

#: Voltage across a selected 1T1R during an inference spike (2.4 V - 2.1 V).
V_READ = 0.3
#: Comparator reference current.
I_REF = 10e-6
#: HRS/LRS discrimination resistance. ``V_READ / I_REF`` must equal this.
R_BOUNDARY = 30e3
#: Border band used to characterize imperfectly binary devices.
BORDER_BAND = (15e3, 100e3)


class UnformedDeviceError(ValueError):
    """Raised when a pulse or read is applied to a device that was never formed."""

    def __init__(self, msg="unformed device"):
        super().__init__(msg)


class MemState(enum.IntEnum):
    UNFORMED = 0
    HRS = 1
    LRS = 2


class PulseKind(str, enum.Enum):
    FORM = "form"
    WRITE = "write"
    ERASE = "erase"
    READ = "read"
    INFERENCE = "inference"


@dataclass(frozen=True)
class PulseSpec:
    duration: float
    v_top: float
    v_bottom: float
    v_g: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("pulse duration must be positive")
        for v in (self.v_top, self.v_bottom, self.v_g):
            if not 0.0 <= v <= 4.8:
                raise ValueError(f"pulse voltage {v} outside [0, 4.8] V")


_PULSE_TABLE = {
    PulseKind.FORM: PulseSpec(10e-6, 4.8, 0.0, 1.5),
    PulseKind.WRITE: PulseSpec(100e-9, 2.4, 0.0, 1.5),
    PulseKind.ERASE: PulseSpec(100e-9, 0.0, 4.8, 4.8),
    PulseKind.READ: PulseSpec(10e-6, 2.4, 2.1, 3.5),
    PulseKind.INFERENCE: PulseSpec(200e-9, 2.4, 2.1, 3.5),
}


def pulse_spec(kind) -> PulseSpec:
    """Fixed electrical pulse (duration, V_top, V_bottom, V_g) for an operation."""
    return _PULSE_TABLE[PulseKind(kind)]


@dataclass(frozen=True)
class DeviceParams:
    """Resistance statistics and programming reliability of the 1T1R devices.

    The log-sigmas are calibrated so that about 3% of programmed devices land
    in the 15k-100k border band while the two states remain separable at the
    30k boundary (see ``tests/test_device.py::test_border_fraction_calibration``).
    """

    hrs_median: float = 150e3
    hrs_sigma: float = 0.216
    lrs_median: float = 10e3
    lrs_sigma: float = 0.216
    sense_min: float = 6e3
    sense_max: float = 200e3
    p_program_fail: float = 0.01
    border_fraction_target: float = 0.03

    def __post_init__(self):
        if not (self.sense_min < self.lrs_median < R_BOUNDARY < self.hrs_median < self.sense_max):
            raise ValueError(
                "require sense_min < lrs_median < 30k < hrs_median < sense_max"
            )
        if self.hrs_sigma < 0 or self.lrs_sigma < 0:
            raise ValueError("log-sigmas must be non-negative")
        for name in ("p_program_fail", "border_fraction_target"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} is not a probability")

    def sample_resistance(self, state, rng: np.random.Generator, size=None):
        """Draw resistance(s) for ``state`` (a MemState or array of them)."""
        state = np.asarray(state)
        z = rng.standard_normal(size if size is not None else state.shape)
        lrs = state == MemState.LRS
        median = np.where(lrs, self.lrs_median, self.hrs_median)
        sigma = np.where(lrs, self.lrs_sigma, self.hrs_sigma)
        out = median * np.exp(sigma * z)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MemristorCell:
    state: MemState = MemState.UNFORMED
    #: true series resistance in ohms; ``measure`` reports it through the sensing range
    resistance: float = math.inf


def _target_state(kind: PulseKind) -> MemState:
    return MemState.HRS if kind is PulseKind.ERASE else MemState.LRS


def apply_pulse(cell: MemristorCell, kind, params: DeviceParams, rng: np.random.Generator) -> MemristorCell:
    """Apply a Form, Write or Erase pulse and return the resulting cell.

    With probability ``params.p_program_fail`` the pulse has no effect. A Form
    pulse on an already formed cell keeps its state and redraws its resistance.
    """
    kind = PulseKind(kind)
    if kind not in (PulseKind.FORM, PulseKind.WRITE, PulseKind.ERASE):
        raise ValueError(f"{kind.value} is not a programming pulse")
    if kind is not PulseKind.FORM and cell.state is MemState.UNFORMED:
        raise UnformedDeviceError()
    if rng.random() < params.p_program_fail:
        return cell
    if kind is PulseKind.FORM and cell.state is not MemState.UNFORMED:
        target = cell.state
    else:
        target = _target_state(kind)
    return replace(cell, state=target, resistance=params.sample_resistance(target, rng))


def program_arrays(states: np.ndarray, resistance: np.ndarray, mask: np.ndarray, kind,
                   params: DeviceParams, rng: np.random.Generator) -> int:
    """In-place vectorized ``apply_pulse`` over every cell selected by ``mask``.

    Returns the number of pulses that took effect.
    """
    kind = PulseKind(kind)
    if kind not in (PulseKind.FORM, PulseKind.WRITE, PulseKind.ERASE):
        raise ValueError(f"{kind.value} is not a programming pulse")
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return 0
    flat_s = states.reshape(-1)
    flat_r = resistance.reshape(-1)
    if kind is not PulseKind.FORM and np.any(flat_s[idx] == MemState.UNFORMED):
        raise UnformedDeviceError()
    ok = rng.random(idx.size) >= params.p_program_fail
    idx = idx[ok]
    if kind is PulseKind.FORM:
        target = np.where(flat_s[idx] == MemState.UNFORMED, MemState.LRS, flat_s[idx])
    else:
        target = np.full(idx.size, _target_state(kind), dtype=flat_s.dtype)
    flat_s[idx] = target
    flat_r[idx] = params.sample_resistance(target, rng)
    return int(idx.size)


def read_current(resistance, v_drop: float = V_READ):
    """Ohmic current through the 1T1R during a read/inference spike."""
    r = np.asarray(resistance, dtype=float)
    if np.any(r <= 0) or np.any(np.isnan(r)):
        raise ValueError("resistance must be positive")
    i = v_drop / r
    return float(i) if i.ndim == 0 else i


def clip_to_sense(resistance, params: DeviceParams):
    out = np.clip(resistance, params.sense_min, params.sense_max)
    return float(out) if np.ndim(out) == 0 else out


def measure(cell: MemristorCell, params: DeviceParams | None = None) -> float:
    """Resistance as seen by the sensing circuit (saturates outside its range)."""
    if cell.state is MemState.UNFORMED:
        raise UnformedDeviceError()
    return clip_to_sense(cell.resistance, params or DeviceParams())
