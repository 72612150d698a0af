import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cmolsim.crossbar import (
    Crossbar,
    load_bit_pattern,
    load_resistance_map,
    save_bit_pattern,
    save_resistance_map,
)
from cmolsim.device import I_REF, R_BOUNDARY, DeviceParams, MemState, UnformedDeviceError, read_current
from cmolsim.experiments import load_glyphs

NO_FAIL = DeviceParams(p_program_fail=0.0)


def formed(n_post=64, n_pre=64, params=None, seed=0):
    x = Crossbar(n_post, n_pre, params)
    x.form_all(np.random.default_rng(seed))
    return x


def test_new_crossbar_is_unformed():
    x = Crossbar(3, 5)
    assert x.shape == (3, 5) and not x.is_formed
    with pytest.raises(UnformedDeviceError):
        x.measure_all()
    with pytest.raises(UnformedDeviceError):
        x.program_pattern(np.zeros((3, 5)), np.random.default_rng(0))


def test_form_all_small_and_reform():
    x = formed(2, 2)
    assert x.is_formed and (x.states == MemState.LRS).all()
    x.states[0, 0] = MemState.HRS
    before = x.states.copy()
    r0 = x.resistance.copy()
    x.form_all(np.random.default_rng(1))
    assert (x.states == before).all()
    assert not np.array_equal(r0, x.resistance)


def test_program_dimension_mismatch():
    x = formed(4, 4)
    with pytest.raises(ValueError):
        x.program_pattern(np.zeros((4, 5)), np.random.default_rng(0))


def test_verify_gives_exact_pattern():
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, (64, 64))
    x = formed()
    _, rep = x.program_pattern(bits, rng)
    assert rep.clean
    assert (x.lrs_mask() == bits.astype(bool)).all()


def test_no_verify_leaves_failures():
    rng = np.random.default_rng(2)
    x = formed(params=DeviceParams(p_program_fail=0.3))
    bits = np.zeros((64, 64), int)
    _, rep = x.program_pattern(bits, rng, verify=False)
    assert rep.passes == 1 and not rep.clean


def test_glyph_templates_recognizable():
    # programmed glyph map: >= 90% of pixels on the correct side of 30k
    _, gl = load_glyphs()
    bits = gl.reshape(64, 64)
    x = formed(params=DeviceParams())
    x.program_pattern(bits, np.random.default_rng(5), verify=False)
    assert np.mean(x.lrs_mask() == bits.astype(bool)) >= 0.90


def test_infer_column_levels():
    x = Crossbar.from_resistance_map(np.full((64, 64), 10e3))
    assert np.allclose(x.infer_column(3), 30e-6)
    x = Crossbar.from_resistance_map(np.full((64, 64), 100e3))
    assert np.allclose(x.infer_column(0), 3e-6)
    with pytest.raises(IndexError):
        x.infer_column(64)


def test_infer_column_matches_cells():
    x = formed(8, 8)
    x.program_pattern(np.eye(8), np.random.default_rng(0))
    for i in range(8):
        col = x.infer_column(i)
        for j in range(8):
            assert col[j] == read_current(x.cell(j, i).resistance)
    assert np.array_equal(x.current_matrix()[:, 5], x.infer_column(5))


def test_current_vs_resistance_classification_exhaustive():
    x = formed(params=DeviceParams(hrs_sigma=0.6, lrs_sigma=0.6))
    x.program_pattern(np.random.default_rng(1).integers(0, 2, (64, 64)), np.random.default_rng(2), verify=False)
    r = x.measure_all()
    assert np.array_equal(read_current(r) > I_REF, r < R_BOUNDARY)


def test_count_lrs_row():
    x = formed(4, 8, NO_FAIL)
    bits = np.zeros((4, 8), int)
    bits[2, :5] = 1
    x.program_pattern(bits, np.random.default_rng(0))
    assert [x.count_lrs_row(j) for j in range(4)] == [0, 0, 5, 0]
    with pytest.raises(IndexError):
        x.count_lrs_row(4)


def test_copy_is_independent():
    x = formed(2, 2)
    y = x.copy()
    y.erase_row(0, np.array([True, True]), np.random.default_rng(0))
    assert (x.states == MemState.LRS).all()


def test_resistance_map_round_trip(tmp_path):
    x = formed()
    x.program_pattern(np.random.default_rng(0).integers(0, 2, (64, 64)), np.random.default_rng(1))
    p = tmp_path / "map.csv"
    save_resistance_map(p, x.measure_all())
    loaded = load_resistance_map(p)
    assert loaded.shape == (64, 64)
    assert np.array_equal(loaded, np.rint(x.measure_all()).astype(np.int64))
    y = Crossbar.from_resistance_map(loaded)
    assert np.array_equal(y.lrs_mask(), x.lrs_mask())


@given(arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.integers(0, 1)))
def test_bit_pattern_round_trip(tmp_path_factory, bits):
    p = tmp_path_factory.mktemp("bits") / "p.txt"
    save_bit_pattern(p, bits)
    assert np.array_equal(load_bit_pattern(p), bits)


def test_bit_pattern_rejects_garbage(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0102\n")
    with pytest.raises(ValueError):
        load_bit_pattern(p)
