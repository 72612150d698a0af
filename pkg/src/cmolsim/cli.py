"""``cmolsim`` command-line entry point.

Exit status: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments as ex
from .config import ConfigError, RunConfig, load_config, write_config
from .crossbar import Crossbar, load_bit_pattern, load_resistance_map, save_resistance_map
from .encoding import is_time_ordered, read_events
from .engine import run_layer
from .layout import TileGeometry, area_estimate, write_placement_csv
from .neuron import NeuronBank
from .rng import substream

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class ValidationError(ValueError):
    pass


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _prepare(args, exp: str):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    if args.runs is not None:
        if args.runs < 1:
            raise ValidationError("--runs must be >= 1")
        cfg = cfg.with_overrides(experiment=replace(cfg.experiment, runs=args.runs))
    if args.jobs < 1:
        raise ValidationError("--jobs must be >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{exp}_seed{cfg.seed}"
    write_config(cfg, out / f"{stem}_config.toml")
    return cfg, out, stem


# -- commands -------------------------------------------------------------

def cmd_program(args) -> int:
    cfg, out, stem = _prepare(args, "program")
    bits = load_bit_pattern(args.pattern)
    if bits.shape != (args.rows, args.cols):
        raise ValidationError(f"pattern is {bits.shape[0]}x{bits.shape[1]}, expected {args.rows}x{args.cols}")
    xbar = Crossbar(args.rows, args.cols, cfg.device)
    xbar.form_all(substream(cfg.seed, "device"))
    _, report = xbar.program_pattern(bits, substream(cfg.seed, "device", 1), verify=not args.no_verify)
    rmap = xbar.measure_all()
    save_resistance_map(out / f"{stem}_map.csv", rmap)
    correct = float(np.mean(xbar.lrs_mask() == bits.astype(bool)))
    _dump_json(out / f"{stem}_report.json", {
        "seed": cfg.seed, "rows": args.rows, "cols": args.cols, "passes": report.passes,
        "pulses": report.pulses, "wrong_cells": [list(map(int, c)) for c in report.wrong_cells],
        "correct_fraction": correct,
    })
    print(f"programmed {args.rows}x{args.cols}: {correct:.2%} cells on the intended side")
    return EXIT_OK


def cmd_infer(args) -> int:
    cfg, out, stem = _prepare(args, "infer")
    rmap = load_resistance_map(args.map)
    xbar = Crossbar.from_resistance_map(rmap, cfg.device)
    segments = read_events(args.events)
    labels, ids = [], []
    for k, (label, events) in enumerate(segments):
        if not is_time_ordered(events, strict=False):
            raise ValidationError(f"events of pattern {label or k} are not time ordered")
        pre = [e.neuron_id for e in events if e.layer == "pre"]
        labels.append(label if label is not None else str(k))
        ids.append(np.asarray(pre, dtype=np.int64))
    bank = NeuronBank.sample(cfg.neuron, xbar.n_post, substream(cfg.seed, "mismatch"),
                             threshold=cfg.experiment.match_threshold)
    run = run_layer(xbar, bank, ids, period_ns=cfg.timing.period, reset_mode="all")
    with (out / f"{stem}_raster.csv").open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t_ns", "layer", "neuron_id", "pattern"])
        for t, n, s in zip(run.t_ns, run.neuron, run.segment):
            wr.writerow([int(t), "post", int(n), labels[s]])
    conf = ex.ConfusionMatrix(run.counts(xbar.n_post))
    with (out / f"{stem}_confusion.csv").open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["neuron"] + labels)
        for j, row in enumerate(conf.counts):
            wr.writerow([j] + [int(v) for v in row])
    _dump_json(out / f"{stem}_report.json", {
        "seed": cfg.seed, "n_patterns": len(labels), "n_output_spikes": int(run.neuron.size),
        "correct_ratio": conf.correct_ratio(),
    })
    print(f"{run.neuron.size} output spikes, correct-spike ratio {conf.correct_ratio():.4f}")
    return EXIT_OK


def _benchmark_config(cfg: RunConfig) -> ex.BenchmarkConfig:
    return ex.BenchmarkConfig(stdp=cfg.stdp, device=cfg.device, neuron=cfg.neuron, timing=cfg.timing,
                              theta_class=cfg.experiment.theta_class, n_runs=cfg.experiment.runs)


def cmd_train_stdp(args) -> int:
    cfg, out, stem = _prepare(args, "train-stdp")
    reports, stats = ex.full_stdp_benchmark(_benchmark_config(cfg), seed=cfg.seed, jobs=args.jobs)
    for r in reports:
        r.write(out, f"{stem}_run{r.run_index:02d}")
    _dump_json(out / f"{stem}_stats.json", {"seed": cfg.seed, "n_runs": len(reports), "stats": stats})
    for phase in ("random", "learned"):
        s = stats[phase]
        print(f"{phase:8s} R_ev median {s['r_ev']['median']:.4f}  RR median {s['rr']['median']:.4f}")
    return EXIT_OK


def _match_job(args):
    kind, cfg, seed = args
    if kind == "ascii":
        _, images = ex.load_glyphs()
    else:
        images = ex.gen_random_shapes(64, cfg.experiment.shape_pixels, substream(seed, "shapes"),
                                      max_overlap=cfg.experiment.shape_max_overlap)
    res = ex.template_matching(images, seed=seed, threshold=cfg.experiment.match_threshold,
                               device=cfg.device, neuron=cfg.neuron, timing=cfg.timing)
    return res.correct_ratio


def cmd_match(args) -> int:
    cfg, out, stem = _prepare(args, f"match-{args.set}")
    seeds = [cfg.seed + k for k in range(cfg.experiment.runs)]
    jobs = [(args.set, cfg, s) for s in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            ratios = list(pool.map(_match_job, jobs))
    else:
        ratios = [_match_job(j) for j in jobs]
    v = np.asarray(ratios)
    _dump_json(out / f"{stem}_report.json", {
        "set": args.set, "seeds": seeds, "correct_ratio": ratios,
        "mean": float(v.mean()), "std": float(v.std()),
    })
    print(f"{args.set}: mean correct-spike ratio {v.mean():.4f} (std {v.std():.4f}) over {v.size} seeds")
    return EXIT_OK


def cmd_layout(args) -> int:
    cfg, out, _ = _prepare(args, "layout")
    try:
        geom = TileGeometry(args.n, args.m, args.p)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    stem = f"layout_{geom.n}x{geom.m}x{geom.p}"
    rows = write_placement_csv(out / f"{stem}_placement.csv", geom)
    w, h = area_estimate(geom)
    _dump_json(out / f"{stem}_area.json", {
        "n": geom.n, "m": geom.m, "p": geom.p, "n_pre": geom.n_pre, "n_post": geom.n_post,
        "synapses": rows, "tile_um": list(geom.macro_dims), "width_um": w, "height_um": h,
        "area_um2": w * h, "note": "tile array only; periphery and pads not included",
    })
    print(f"{rows} synapses placed; tile array {w:g} um x {h:g} um")
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--runs", type=int, help="override the number of runs/seeds")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common.add_argument("--out", default="cmolsim_out", help="output directory")

    p = argparse.ArgumentParser(prog="cmolsim", description="CMOS-memristor neuromorphic core simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("program", parents=[common], help="program a bit pattern, write the resistance map")
    s.add_argument("pattern", help="0/1 text grid, rows = post neurons")
    s.add_argument("--rows", type=int, default=64)
    s.add_argument("--cols", type=int, default=64)
    s.add_argument("--no-verify", action="store_true", help="single programming pass")
    s.set_defaults(func=cmd_program)

    s = sub.add_parser("infer", parents=[common], help="run an event file through a programmed map")
    s.add_argument("map", help="resistance map CSV")
    s.add_argument("events", help="event CSV with #pattern markers")
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("train-stdp", parents=[common], help="SB-STDP letter benchmark")
    s.set_defaults(func=cmd_train_stdp)

    s = sub.add_parser("match", parents=[common], help="template-matching statistics over seeds")
    s.add_argument("--set", choices=("ascii", "shapes"), default="ascii")
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("layout", parents=[common], help="pseudo-CMOL placement table and area")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--m", type=int, default=8)
    s.add_argument("--p", type=int, default=1)
    s.set_defaults(func=cmd_layout)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError, ValueError, IndexError, FileNotFoundError) as exc:
        print(f"cmolsim: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"cmolsim: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
