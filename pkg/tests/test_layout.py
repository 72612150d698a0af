import csv

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmolsim.layout import (
    TileGeometry,
    TilePlacement,
    area_estimate,
    map_post_neuron,
    map_pre_neuron,
    map_synapse,
    placement_table,
    unmap_synapse,
    write_placement_csv,
)

SQUARE = TileGeometry()
ASYM = TileGeometry(n=4, m=4, p=3)


def test_pre_and_post_examples():
    assert map_pre_neuron(1)[1] == 1
    assert map_pre_neuron(8)[1] == 1
    assert map_pre_neuron(9)[1] == 2
    assert map_post_neuron(1)[0] == 1
    assert map_post_neuron(9)[0] == 2


def test_synapse_corners():
    assert map_synapse(1, 1) == TilePlacement(1, 1, 0, 1, 1)
    assert map_synapse(64, 64) == TilePlacement(8, 8, 0, 8, 8)


@pytest.mark.parametrize("geom", [SQUARE, ASYM, TileGeometry(2, 3, 2), TileGeometry(1, 1, 1)])
def test_bijection_and_consistency(geom):
    seen = set()
    for i, j, pl in placement_table(geom):
        assert unmap_synapse(pl, geom) == (i, j)
        assert pl.tile_col == map_pre_neuron(i, geom)[1]
        assert pl.local_sub == map_pre_neuron(i, geom)[2]
        assert pl.tile_row == map_post_neuron(j, geom)[0]
        seen.add(pl)
    assert len(seen) == geom.n_pre * geom.n_post


def test_asymmetric_count():
    assert ASYM.n_pre == 48 and ASYM.n_post == 16
    assert len({pl for _, _, pl in placement_table(ASYM)}) == 768


@pytest.mark.parametrize("geom", [SQUARE, ASYM])
def test_neuron_maps_per_tile(geom):
    pre_tiles = [map_pre_neuron(i, geom)[:2] for i in range(1, geom.n_pre + 1)]
    post_tiles = [map_post_neuron(j, geom) for j in range(1, geom.n_post + 1)]
    tiles = {(r, c) for r in range(1, geom.n + 1) for c in range(1, geom.m + 1)}
    assert set(post_tiles) == tiles and len(post_tiles) == len(tiles)
    assert all(pre_tiles.count(t) == geom.p for t in tiles)
    per_tile = {}
    for _, _, pl in placement_table(geom):
        per_tile[(pl.tile_row, pl.tile_col)] = per_tile.get((pl.tile_row, pl.tile_col), 0) + 1
    assert set(per_tile.values()) == {geom.p * geom.n * geom.m}


def test_out_of_range():
    with pytest.raises(IndexError):
        map_pre_neuron(0)
    with pytest.raises(IndexError):
        map_synapse(1, 65)
    with pytest.raises(IndexError):
        unmap_synapse(TilePlacement(9, 1, 0, 1, 1))
    with pytest.raises(ValueError):
        TileGeometry(n=0)


def test_area():
    assert area_estimate(SQUARE) == (440.0, 408.0)
    assert area_estimate(TileGeometry(1, 1)) == (55.0, 51.0)
    assert area_estimate(TileGeometry(16, 16)) == (880.0, 816.0)


@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 4), st.data())
def test_round_trip_random_geometry(n, m, p, data):
    g = TileGeometry(n, m, p)
    i = data.draw(st.integers(1, g.n_pre))
    j = data.draw(st.integers(1, g.n_post))
    assert unmap_synapse(map_synapse(i, j, g), g) == (i, j)


def test_placement_csv(tmp_path):
    p = tmp_path / "pl.csv"
    assert write_placement_csv(p, ASYM) == 768
    rows = list(csv.reader(p.open()))
    assert rows[0][:2] == ["pre", "post"] and len(rows) == 769
