"""Binary images to address-event spike trains, and the event/image file formats.

Event file (CSV)::

    t_ns,layer,neuron_id
    #pattern A0
    0,pre,3
    220,pre,4
    ...

``#pattern <label>`` lines open a new pattern segment. Image-set files hold
``#image <label>`` lines each followed by a 0/1 text grid; single images may
also be read from plain text grids or ASCII PBM (P1).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

LAYERS = ("pre", "post", "class")
TILE = 8


@dataclass(frozen=True, order=True)
class SpikeEvent:
    t: int  # ns
    layer: str
    neuron_id: int

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("event time must be >= 0")
        if self.layer not in LAYERS:
            raise ValueError(f"unknown layer {self.layer!r}")
        if self.neuron_id < 0:
            raise ValueError("neuron id must be >= 0")


@dataclass(frozen=True)
class TimingConfig:
    spike_width: int = 200  # ns
    period: int = 220  # ns
    repeats_per_pattern: int = 10

    def __post_init__(self):
        if self.period < self.spike_width or self.spike_width <= 0:
            raise ValueError("require 0 < spike_width <= period")
        if self.repeats_per_pattern < 1:
            raise ValueError("repeats_per_pattern must be >= 1")


def pixel_to_neuron(row: int, col: int, width: int = TILE) -> int:
    if not (0 <= row < width and 0 <= col < width):
        raise IndexError(f"pixel ({row}, {col}) outside {width}x{width}")
    return row * width + col


def neuron_to_pixel(neuron_id: int, width: int = TILE):
    if not 0 <= neuron_id < width * width:
        raise IndexError(f"neuron {neuron_id} outside 0..{width * width - 1}")
    return divmod(neuron_id, width)


def _as_binary_image(image, shape=None) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 2 or (shape is not None and img.shape != shape):
        raise ValueError(f"expected a {shape or '2-D'} image, got shape {img.shape}")
    if not np.isin(img, (0, 1)).all():
        raise ValueError("image must be binary (0/1)")
    return img.astype(bool)


def image_to_ids(image, repeats: int = 1) -> np.ndarray:
    """Pre-neuron ids for the black pixels in raster-scan order, tiled ``repeats`` times."""
    img = _as_binary_image(image)
    return np.tile(np.flatnonzero(img.reshape(-1)), repeats)


def image_to_spikes(image, start_t: int = 0, cfg: TimingConfig = TimingConfig()) -> list:
    """One pre-layer event per black pixel per repeat, one every ``cfg.period`` ns."""
    ids = image_to_ids(_as_binary_image(image, (TILE, TILE)), cfg.repeats_per_pattern)
    return [SpikeEvent(int(start_t + k * cfg.period), "pre", int(i)) for k, i in enumerate(ids)]


def letter_to_features(image) -> list:
    """Split a 32x32 letter into 16 non-overlapping 8x8 tiles, row-major."""
    img = np.asarray(image)
    if img.shape != (4 * TILE, 4 * TILE):
        raise ValueError(f"expected a 32x32 image, got {img.shape}")
    return [img[r * TILE:(r + 1) * TILE, c * TILE:(c + 1) * TILE].copy()
            for r in range(4) for c in range(4)]


def features_to_letter(tiles) -> np.ndarray:
    tiles = list(tiles)
    if len(tiles) != 16:
        raise ValueError("need exactly 16 tiles")
    return np.block([[tiles[r * 4 + c] for c in range(4)] for r in range(4)])


# -- event files ----------------------------------------------------------

def write_events(path, segments) -> None:
    """Write ``[(label, [SpikeEvent, ...]), ...]``; a ``None`` label writes no marker."""
    lines = ["t_ns,layer,neuron_id"]
    for label, events in segments:
        if label is not None:
            lines.append(f"#pattern {label}")
        lines.extend(f"{e.t},{e.layer},{e.neuron_id}" for e in events)
    Path(path).write_text("\n".join(lines) + "\n")


def read_events(path) -> list:
    segments = []
    current = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line == "t_ns,layer,neuron_id":
            continue
        if line.startswith("#pattern"):
            current = (line[len("#pattern"):].strip(), [])
            segments.append(current)
            continue
        if line.startswith("#"):
            continue
        t, layer, nid = line.split(",")
        if current is None:
            current = (None, [])
            segments.append(current)
        current[1].append(SpikeEvent(int(t), layer, int(nid)))
    return segments


def is_time_ordered(events, strict: bool = True) -> bool:
    ts = [e.t for e in events]
    pairs = zip(ts, ts[1:])
    return all(a < b for a, b in pairs) if strict else all(a <= b for a, b in pairs)


# -- image files ----------------------------------------------------------

def _parse_grid(lines) -> np.ndarray:
    rows = [[int(c) for c in ln] for ln in lines]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("image grid must be non-empty and rectangular")
    return np.array(rows, dtype=np.uint8)


def read_image(path) -> np.ndarray:
    """Read a 0/1 text grid or an ASCII PBM (P1) file."""
    tokens = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    tokens = [t for t in tokens if t]
    if tokens and tokens[0] == "P1":
        body = " ".join(tokens[1:]).split()
        w, h = int(body[0]), int(body[1])
        bits = "".join(body[2:])
        if len(bits) != w * h:
            raise ValueError(f"PBM body has {len(bits)} pixels, expected {w * h}")
        return np.array([int(b) for b in bits], dtype=np.uint8).reshape(h, w)
    return _parse_grid([t.replace(" ", "") for t in tokens])


def write_image(path, image, pbm: bool = False) -> None:
    img = np.asarray(image).astype(np.uint8)
    rows = [" ".join(map(str, r)) if pbm else "".join(map(str, r)) for r in img]
    head = [f"P1\n{img.shape[1]} {img.shape[0]}"] if pbm else []
    Path(path).write_text("\n".join(head + rows) + "\n")


def read_image_set(path):
    """Return ``(labels, images)`` from an ``#image <label>`` file."""
    labels, blocks = [], []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if line.startswith("#image"):
            labels.append(line[len("#image"):].strip())
            blocks.append([])
        elif line and not line.startswith("#"):
            if not blocks:
                raise ValueError("grid rows before the first #image marker")
            blocks[-1].append(line)
    return labels, np.stack([_parse_grid(b) for b in blocks])


def write_image_set(path, labels, images, header: str = "") -> None:
    out = [f"# {ln}" for ln in header.splitlines()] if header else []
    for label, img in zip(labels, images):
        out.append(f"#image {label}")
        out.extend("".join(map(str, r)) for r in np.asarray(img).astype(np.uint8))
    Path(path).write_text("\n".join(out) + "\n")
