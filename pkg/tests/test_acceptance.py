"""Acceptance criteria 1-9, each checked at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion is
printed in the terminal summary) or ``python tests/test_acceptance.py``.
"""

import filecmp
import tempfile
from pathlib import Path

import numpy as np
import pytest

from cmolsim import experiments as ex
from cmolsim.cli import main as cli_main
from cmolsim.crossbar import Crossbar
from cmolsim.device import BORDER_BAND, I_REF, DeviceParams, read_current
from cmolsim.layout import TileGeometry, map_post_neuron, map_pre_neuron, map_synapse, unmap_synapse
from cmolsim.neuron import NeuronBank, NeuronPhysParams, ReadoutConfig, comparator, readout_latency
from cmolsim.rng import substream
from cmolsim.stdp import PreSpikeHistory, StdpConfig, init_random_weights, on_post_spike

RESULTS = {}


def _record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    return bool(ok), detail


def check_1():
    e, q = ex.energy_report(2.3e-3, 4.8, 220e-9, 64)
    ok = abs(e - 37.95e-12) <= 0.005e-12 and abs(q - 7.91e-12) <= 0.02e-12
    return _record(1, ok, f"E_SOP={e * 1e12:.4f} pJ, dQ_SOP={q * 1e12:.4f} pC")


def check_2():
    bad = 0
    for geom in (TileGeometry(8, 8, 1), TileGeometry(4, 4, 3)):
        seen = set()
        for i in range(1, geom.n_pre + 1):
            for j in range(1, geom.n_post + 1):
                pl = map_synapse(i, j, geom)
                seen.add(pl)
                bad += unmap_synapse(pl, geom) != (i, j)
                bad += pl.tile_col != map_pre_neuron(i, geom)[1]
                bad += pl.tile_row != map_post_neuron(j, geom)[0]
        bad += len(seen) != geom.n_pre * geom.n_post
    return _record(2, bad == 0, f"{bad} violations over 4096 + 768 synapses")


def check_3():
    a = readout_latency(ReadoutConfig(n_lev=1))
    b = readout_latency(ReadoutConfig(n_lev=13))
    ok = round(a * 1e9, 6) == 2560.0 and round(b * 1e9, 6) == 33280.0
    return _record(3, ok, f"{a * 1e6:.2f} us (n_lev=1), {b * 1e6:.2f} us (n_lev=13)")


def check_4():
    x = Crossbar(params=DeviceParams())
    x.form_all(substream(0, "device"))
    x.program_pattern(np.zeros((64, 64)), substream(0, "device", 1))
    r_hrs = x.measure_all()
    x.program_pattern(np.ones((64, 64)), substream(0, "device", 2))
    r_lrs = x.measure_all()
    ok_h = np.mean(~comparator(read_current(r_hrs), I_REF))
    ok_l = np.mean(comparator(read_current(r_lrs), I_REF))
    pooled = np.concatenate([r_hrs.ravel(), r_lrs.ravel()])
    border = np.mean((pooled >= BORDER_BAND[0]) & (pooled <= BORDER_BAND[1]))
    ok = ok_h >= 0.99 and ok_l >= 0.99 and abs(border - 0.03) <= 0.015
    return _record(4, ok, f"correct HRS {ok_h:.4f}, LRS {ok_l:.4f}; border band {border:.2%}")


def _ascii_ratios(seeds):
    _, gl = ex.load_glyphs()
    return np.array([ex.template_matching(gl, seed=s).correct_ratio for s in seeds])


def check_5():
    r = _ascii_ratios(range(100))
    m, s = r.mean(), r.std(ddof=1)
    ok = 0.45 <= m <= 0.65 and 0.04 <= s <= 0.10
    return _record(5, ok, f"mean {m:.2%}, std {s * 100:.2f} pp over 100 seeds")


def check_6():
    seeds = range(20)
    a = _ascii_ratios(seeds)
    b = np.array([ex.template_matching(ex.gen_random_shapes(rng=substream(s, "shapes")), seed=s).correct_ratio
                  for s in seeds])
    gap = b - a
    ok = 0.75 <= b.mean() <= 0.90 and gap.min() >= 0.10
    return _record(6, ok, f"shapes mean {b.mean():.2%}; min paired gain over ASCII {gap.min() * 100:.1f} pp")


def check_7():
    reports, st = ex.full_stdp_benchmark(ex.BenchmarkConfig(n_runs=10), seed=0)
    rr_, rl = st["random"], st["learned"]
    parts = {
        "random R_ev in [25,45]%": 0.25 <= rr_["r_ev"]["median"] <= 0.45,
        "random RR < 100%": rr_["rr"]["median"] < 1.0,
        "learned R_ev >= 50%": rl["r_ev"]["median"] >= 0.50,
        "learned RR = 100%": rl["rr"]["median"] == 1.0,
        "learned > random R_ev": rl["r_ev"]["median"] > rr_["r_ev"]["median"],
    }
    failed = [k for k, v in parts.items() if not v]
    detail = (f"median R_ev random {rr_['r_ev']['median']:.2%} / learned {rl['r_ev']['median']:.2%}; "
              f"median RR random {rr_['rr']['median']:.0%} / learned {rl['rr']['median']:.0%}")
    if failed:
        detail += "; unmet: " + ", ".join(failed)
    return _record(7, not failed, detail)


def check_8(n_events: int = 400):
    violations = 0
    for seed in range(5):
        rng = substream(seed, "stdp")
        x = Crossbar(params=DeviceParams(p_program_fail=0.0))
        x.form_all(rng)
        init_random_weights(x, rng)
        bank = NeuronBank.sample(NeuronPhysParams(), 64, rng)
        cfg = StdpConfig()
        hist = PreSpikeHistory(64)
        fired = set()
        start = x.copy()
        prev = bank.threshold.copy()
        violations += not np.all(prev == 0.5)
        for _ in range(n_events):
            hist.append(int(rng.integers(64)))
            post = int(rng.integers(64))
            fired.add(post)
            on_post_spike(x, hist, post, bank, cfg, rng)
            violations += x.count_lrs_row(post) != 32
            expect = prev.copy()
            expect[post] = min(1.0, prev[post] + 0.04)
            violations += not np.allclose(bank.threshold, expect)
            violations += np.any(bank.threshold < prev) or np.any(bank.threshold > 1.0)
            prev = bank.threshold.copy()
        for j in set(range(64)) - fired:
            violations += not np.array_equal(x.resistance[j], start.resistance[j])
    return _record(8, violations == 0, f"{violations} invariant violations over 5 x {n_events} updates")


def check_9():
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [Path(tmp) / "a", Path(tmp) / "b"]
        for d in dirs:
            code = cli_main(["train-stdp", "--seed", "0", "--runs", "10", "--out", str(d)])
            if code != 0:
                return _record(9, False, f"train-stdp exited with {code}")
        names = sorted(p.name for p in dirs[0].iterdir())
        same = sorted(p.name for p in dirs[1].iterdir()) == names
        _, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        ok = same and not mismatch and not errors
        return _record(9, ok, f"{len(names)} report files compared, {len(mismatch) + len(errors)} differ")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{k}" for k in range(1, 10)])
def test_criterion(check):
    ok, detail = check()
    assert ok, detail


if __name__ == "__main__":
    for k, chk in enumerate(CHECKS, 1):
        ok, detail = chk()
        print(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
