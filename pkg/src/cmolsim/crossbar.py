"""N x M array of 1T1R cells with row/column addressing.

Storage is row-major ``[post][pre]``: columns are driven by pre-synaptic
neurons, rows feed post-synaptic neurons.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .device import (
    R_BOUNDARY,
    V_READ,
    DeviceParams,
    MemristorCell,
    MemState,
    PulseKind,
    UnformedDeviceError,
    clip_to_sense,
    program_arrays,
    read_current,
)


@dataclass
class ProgramReport:
    #: (post, pre) coordinates still on the wrong side of the boundary
    wrong_cells: list = field(default_factory=list)
    pulses: int = 0
    passes: int = 0

    @property
    def clean(self) -> bool:
        return not self.wrong_cells


class Crossbar:
    """Behavioral crossbar.

    Programming and forming mutate the instance in place; use :meth:`copy`
    to keep a snapshot. Inference (`infer_column`, `measure_all`) never
    mutates.
    """

    def __init__(self, n_post: int = 64, n_pre: int = 64, params: DeviceParams | None = None):
        if n_post < 1 or n_pre < 1:
            raise ValueError("crossbar dimensions must be positive")
        self.n_post = int(n_post)
        self.n_pre = int(n_pre)
        self.params = params or DeviceParams()
        self.states = np.full((self.n_post, self.n_pre), MemState.UNFORMED, dtype=np.int8)
        self.resistance = np.full((self.n_post, self.n_pre), np.inf)

    @property
    def shape(self):
        return (self.n_post, self.n_pre)

    def copy(self) -> "Crossbar":
        other = Crossbar(self.n_post, self.n_pre, self.params)
        other.states = self.states.copy()
        other.resistance = self.resistance.copy()
        return other

    def cell(self, post: int, pre: int) -> MemristorCell:
        return MemristorCell(MemState(int(self.states[post, pre])), float(self.resistance[post, pre]))

    @property
    def is_formed(self) -> bool:
        return bool(np.all(self.states != MemState.UNFORMED))

    def _require_formed(self):
        if not self.is_formed:
            raise UnformedDeviceError()

    # -- programming -------------------------------------------------------

    def form_all(self, rng: np.random.Generator, max_attempts: int = 1000) -> "Crossbar":
        """Form every device. Previously formed devices only get a fresh resistance."""
        program_arrays(self.states, self.resistance, np.ones(self.shape, bool),
                       PulseKind.FORM, self.params, rng)
        for _ in range(max_attempts):
            pending = self.states == MemState.UNFORMED
            if not pending.any():
                return self
            program_arrays(self.states, self.resistance, pending, PulseKind.FORM, self.params, rng)
        raise RuntimeError("forming did not converge")

    def pulse(self, mask: np.ndarray, kind, rng: np.random.Generator) -> int:
        """Send one program pulse of ``kind`` to each cell selected by ``mask``."""
        return program_arrays(self.states, self.resistance, np.asarray(mask, bool),
                              kind, self.params, rng)

    def write_row(self, post: int, pre_mask: np.ndarray, rng: np.random.Generator) -> int:
        mask = np.zeros(self.shape, bool)
        mask[post] = pre_mask
        return self.pulse(mask, PulseKind.WRITE, rng)

    def erase_row(self, post: int, pre_mask: np.ndarray, rng: np.random.Generator) -> int:
        mask = np.zeros(self.shape, bool)
        mask[post] = pre_mask
        return self.pulse(mask, PulseKind.ERASE, rng)

    def program_pattern(self, pattern, rng: np.random.Generator, verify: bool = True,
                        max_retries: int = 10) -> tuple["Crossbar", ProgramReport]:
        """Write LRS where ``pattern`` is 1 and erase to HRS where it is 0.

        With ``verify``, cells whose measured resistance falls on the wrong
        side of the 30k boundary are re-pulsed up to ``max_retries`` times.
        """
        bits = np.asarray(pattern)
        if bits.shape != self.shape:
            raise ValueError(f"pattern shape {bits.shape} does not match crossbar {self.shape}")
        bits = bits.astype(bool)
        self._require_formed()
        report = ProgramReport()
        report.pulses += self.pulse(bits, PulseKind.WRITE, rng)
        report.pulses += self.pulse(~bits, PulseKind.ERASE, rng)
        report.passes = 1
        wrong = self.lrs_mask() != bits
        if verify:
            for _ in range(max_retries):
                if not wrong.any():
                    break
                report.pulses += self.pulse(wrong & bits, PulseKind.WRITE, rng)
                report.pulses += self.pulse(wrong & ~bits, PulseKind.ERASE, rng)
                report.passes += 1
                wrong = self.lrs_mask() != bits
        report.wrong_cells = [tuple(int(v) for v in rc) for rc in np.argwhere(wrong)]
        return self, report

    # -- read-out ----------------------------------------------------------

    def measure_all(self) -> np.ndarray:
        self._require_formed()
        return clip_to_sense(self.resistance, self.params)

    def lrs_mask(self) -> np.ndarray:
        """Cells whose measured resistance is below the 30k boundary."""
        return self.measure_all() < R_BOUNDARY

    def count_lrs_row(self, post: int) -> int:
        if not 0 <= post < self.n_post:
            raise IndexError(f"post index {post} out of range")
        return int(np.count_nonzero(self.lrs_mask()[post]))

    def infer_column(self, pre: int, v_drop: float = V_READ) -> np.ndarray:
        """Currents into every post-synaptic neuron when column ``pre`` spikes."""
        if not 0 <= pre < self.n_pre:
            raise IndexError(f"pre index {pre} out of range")
        self._require_formed()
        return read_current(self.resistance[:, pre], v_drop)

    def current_matrix(self, v_drop: float = V_READ) -> np.ndarray:
        """All column currents at once, ``[post][pre]``; same values as `infer_column`."""
        self._require_formed()
        return read_current(self.resistance, v_drop)

    @classmethod
    def from_resistance_map(cls, rmap, params: DeviceParams | None = None) -> "Crossbar":
        rmap = np.asarray(rmap, dtype=float)
        if rmap.ndim != 2:
            raise ValueError("resistance map must be 2-D")
        xbar = cls(rmap.shape[0], rmap.shape[1], params)
        xbar.resistance = rmap.copy()
        xbar.states = np.where(rmap < R_BOUNDARY, MemState.LRS, MemState.HRS).astype(np.int8)
        return xbar


# -- file formats ---------------------------------------------------------

_MAP_HEADER = "# resistance map: {rows} rows (post) x {cols} columns (pre), ohms\n"
_PATTERN_HEADER = "# bit pattern: {rows} rows (post) x {cols} columns (pre), 1=LRS 0=HRS\n"


def save_resistance_map(path, rmap) -> None:
    rmap = np.rint(np.asarray(rmap, dtype=float)).astype(np.int64)
    buf = io.StringIO()
    buf.write(_MAP_HEADER.format(rows=rmap.shape[0], cols=rmap.shape[1]))
    np.savetxt(buf, rmap, fmt="%d", delimiter=",")
    Path(path).write_text(buf.getvalue())


def load_resistance_map(path) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",", comments="#", dtype=np.int64, ndmin=2)
    return arr


def save_bit_pattern(path, bits) -> None:
    bits = np.asarray(bits).astype(np.uint8)
    lines = [_PATTERN_HEADER.format(rows=bits.shape[0], cols=bits.shape[1])]
    lines += ["".join(str(b) for b in row) + "\n" for row in bits]
    Path(path).write_text("".join(lines))


def load_bit_pattern(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) - {"0", "1"}:
            raise ValueError(f"invalid bit-pattern line: {line!r}")
        rows.append([int(c) for c in line])
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("bit pattern must be a non-empty rectangular 0/1 grid")
    return np.array(rows, dtype=np.uint8)
