"""Pseudo-CMOL tiling: logical crossbar coordinates <-> macro-cell placements.

General geometry: ``n`` rows by ``m`` columns of tiles, ``p`` pre-synaptic
neurons per tile. There are ``N = n*m`` post-synaptic and ``M = p*n*m``
pre-synaptic neurons. Each tile holds one post neuron, ``p`` pre neurons and
``p`` sub-crossbars of ``n`` columns (pre) by ``m`` rows (post).

Tile column ``c`` carries pre neurons ``(c-1)*p*n + 1 .. c*p*n``; within the
column they are split into ``p`` consecutive groups of ``n``, group ``k``
wired to sub-crossbar ``k`` (left to right) of every tile in that column.
Tile row ``r`` carries post neurons ``(r-1)*m + 1 .. r*m``. With ``n = m = 8``
and ``p = 1`` this is the 64x64 core: 8x8 tiles, each with an 8x8 synapse block.

All public indices are 1-based; ``local_sub`` is 0-based.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class TileGeometry:
    n: int = 8
    m: int = 8
    p: int = 1
    cell_pitch: tuple = (3.0, 5.0)  # um, (width, height)
    macro_dims: tuple = (55.0, 51.0)  # um, (width, height)

    def __post_init__(self):
        if min(self.n, self.m, self.p) < 1:
            raise ValueError("n, m and p must all be >= 1")

    @property
    def n_post(self) -> int:
        return self.n * self.m

    @property
    def n_pre(self) -> int:
        return self.p * self.n * self.m


@dataclass(frozen=True, order=True)
class TilePlacement:
    tile_row: int
    tile_col: int
    local_sub: int
    local_row: int
    local_col: int


def _check(idx, hi, what):
    if not 1 <= idx <= hi:
        raise IndexError(f"{what} index {idx} outside 1..{hi}")


def map_pre_neuron(i: int, geom: TileGeometry = TileGeometry()):
    """Tile hosting pre-synaptic neuron ``i``: ``(tile_row, tile_col, local_sub)``."""
    _check(i, geom.n_pre, "pre-synaptic")
    col_group = geom.p * geom.n
    off = (i - 1) % col_group
    return (off % geom.n + 1, (i - 1) // col_group + 1, off // geom.n)


def map_post_neuron(j: int, geom: TileGeometry = TileGeometry()):
    """Tile hosting post-synaptic neuron ``j``: ``(tile_row, tile_col)``."""
    _check(j, geom.n_post, "post-synaptic")
    return ((j - 1) // geom.m + 1, (j - 1) % geom.m + 1)


def map_synapse(i: int, j: int, geom: TileGeometry = TileGeometry()) -> TilePlacement:
    """Placement of the synapse joining pre neuron ``i`` to post neuron ``j``."""
    _check(i, geom.n_pre, "pre-synaptic")
    _check(j, geom.n_post, "post-synaptic")
    col_group = geom.p * geom.n
    off = (i - 1) % col_group
    return TilePlacement(
        tile_row=(j - 1) // geom.m + 1,
        tile_col=(i - 1) // col_group + 1,
        local_sub=off // geom.n,
        local_row=(j - 1) % geom.m + 1,
        local_col=off % geom.n + 1,
    )


def unmap_synapse(pl: TilePlacement, geom: TileGeometry = TileGeometry()):
    """Inverse of :func:`map_synapse`, returns ``(i, j)``."""
    if not (1 <= pl.tile_row <= geom.n and 1 <= pl.tile_col <= geom.m
            and 0 <= pl.local_sub < geom.p and 1 <= pl.local_row <= geom.m
            and 1 <= pl.local_col <= geom.n):
        raise IndexError(f"placement {pl} out of range for {geom}")
    i = (pl.tile_col - 1) * geom.p * geom.n + pl.local_sub * geom.n + pl.local_col
    j = (pl.tile_row - 1) * geom.m + pl.local_row
    return i, j


def area_estimate(geom: TileGeometry = TileGeometry()):
    """Tile-array bounding box ``(width, height)`` in um, excluding array overhead."""
    w, h = geom.macro_dims
    return (w * geom.m, h * geom.n)


def placement_table(geom: TileGeometry = TileGeometry()):
    """Every synapse placement, pre-major."""
    for i in range(1, geom.n_pre + 1):
        for j in range(1, geom.n_post + 1):
            yield i, j, map_synapse(i, j, geom)


def write_placement_csv(path, geom: TileGeometry = TileGeometry()) -> int:
    rows = 0
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pre", "post", "tile_row", "tile_col", "local_sub", "local_row", "local_col"])
        for i, j, pl in placement_table(geom):
            w.writerow([i, j, pl.tile_row, pl.tile_col, pl.local_sub, pl.local_row, pl.local_col])
            rows += 1
    return rows
