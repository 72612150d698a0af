"""End-to-end pipelines: template matching, SB-STDP feature learning with an
off-chip spike-count classifier, random-shape generation and the energy model.

Every pipeline takes an integer ``seed`` and draws from named substreams
(:mod:`cmolsim.rng`), so a (config, seed) pair always reproduces the same
report bit for bit.
"""

from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .crossbar import Crossbar
from .device import DeviceParams
from .encoding import TimingConfig, image_to_ids, letter_to_features, read_image_set
from .engine import LayerRun, run_layer
from .neuron import NeuronBank, NeuronPhysParams
from .rng import substream
from .stdp import StdpConfig, init_random_weights

LETTERS = ("A", "B", "C", "D")


# -- bundled assets -------------------------------------------------------

def _data_path(name: str):
    return resources.files("cmolsim").joinpath("data", name)


def load_glyphs():
    """``(labels, images)`` of the 64 bundled 8x8 glyphs."""
    with resources.as_file(_data_path("glyphs64.txt")) as p:
        return read_image_set(p)


def load_letters():
    """The four bundled 32x32 letters A, B, C, D as a ``(4, 32, 32)`` array."""
    with resources.as_file(_data_path("letters_abcd.txt")) as p:
        labels, images = read_image_set(p)
    if tuple(labels) != LETTERS:
        raise ValueError(f"unexpected letter labels {labels}")
    return images


# -- energy ---------------------------------------------------------------

def energy_report(i_vdd: float = 2.3e-3, v_dd: float = 4.8, t_p: float = 220e-9, n_syn: int = 64):
    """Energy and supply charge per synaptic operation, ``(E_SOP [J], dQ_SOP [C])``."""
    if min(i_vdd, v_dd, t_p) <= 0 or n_syn < 1:
        raise ValueError("energy model inputs must be positive")
    e_sop = i_vdd * v_dd * t_p / n_syn
    return e_sop, e_sop / v_dd


# -- template matching ----------------------------------------------------

@dataclass
class ConfusionMatrix:
    """Spike counts ``[output neuron][input pattern]``."""

    counts: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        """Column-normalized counts; silent columns stay zero."""
        col = self.counts.sum(axis=0, keepdims=True)
        return np.divide(self.counts, col, out=np.zeros(self.counts.shape), where=col > 0)

    def correct_ratio(self) -> float:
        """Share of spikes emitted by the neuron whose index equals the input index."""
        total = self.counts.sum()
        k = min(self.counts.shape)
        return float(np.trace(self.counts[:k, :k]) / total) if total else 0.0


@dataclass
class TemplateMatchResult:
    seed: int
    run: LayerRun
    confusion: ConfusionMatrix

    @property
    def correct_ratio(self) -> float:
        return self.confusion.correct_ratio()


def template_matching(templates, inputs=None, *, seed: int = 0, threshold: float = 0.5,
                      device: DeviceParams = DeviceParams(), neuron: NeuronPhysParams = NeuronPhysParams(),
                      timing: TimingConfig = TimingConfig()) -> TemplateMatchResult:
    """Program one template per crossbar row and present ``inputs`` (default: the templates).

    Each input pattern is presented ``timing.repeats_per_pattern`` times in
    raster order. Any output spike resets every membrane; membranes are also
    cleared between patterns. Thresholds are common and fixed.
    """
    templates = np.asarray(templates)
    if templates.ndim != 3:
        raise ValueError("templates must be an (n, h, w) stack of binary images")
    n, h, w = templates.shape
    inputs = templates if inputs is None else np.asarray(inputs)
    if inputs.ndim != 3 or inputs.shape[1:] != (h, w):
        raise ValueError(f"inputs must be (k, {h}, {w}) images")
    xbar = Crossbar(n_post=n, n_pre=h * w, params=device)
    xbar.form_all(substream(seed, "device"))
    xbar.program_pattern(templates.reshape(n, h * w), substream(seed, "device", 1))
    bank = NeuronBank.sample(neuron, n, substream(seed, "mismatch"), threshold=threshold)
    segments = [image_to_ids(im, timing.repeats_per_pattern) for im in inputs]
    run = run_layer(xbar, bank, segments, period_ns=timing.period, reset_mode="all")
    return TemplateMatchResult(seed, run, ConfusionMatrix(run.counts(n)))


# -- random shapes --------------------------------------------------------

_N4 = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _grow(seed_pixel: int, n_pixels: int, size: int, rng) -> np.ndarray:
    img = np.zeros((size, size), bool)
    img.flat[seed_pixel] = True
    while img.sum() < n_pixels:
        frontier = sorted({(r + dr, c + dc) for r, c in zip(*np.nonzero(img)) for dr, dc in _N4
                           if 0 <= r + dr < size and 0 <= c + dc < size and not img[r + dr, c + dc]})
        img[frontier[rng.integers(len(frontier))]] = True
    return img


def gen_random_shapes(count: int = 64, n_pixels: int = 8, rng=None, *, size: int = 8,
                      max_overlap: int | None = 5, max_tries: int = 200) -> np.ndarray:
    """4-connected random shapes grown from distinct seed pixels.

    Growth adds one uniformly chosen unoccupied 4-neighbor of the current
    shape at a time. A shape sharing more than ``max_overlap`` pixels with an
    earlier one is regrown from the same seed (up to ``max_tries`` times,
    after which the last attempt is kept); ``None`` disables the check.
    """
    if not 1 <= n_pixels <= size * size:
        raise ValueError("n_pixels out of range")
    if not 1 <= count <= size * size:
        raise ValueError("need one distinct seed pixel per shape")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    out = []
    for s in rng.permutation(size * size)[:count]:
        for _ in range(max_tries):
            img = _grow(int(s), n_pixels, size, rng)
            if max_overlap is None or all(int((img & o).sum()) <= max_overlap for o in out):
                break
        out.append(img)
    return np.stack(out).astype(np.uint8)


# -- SB-STDP feature layer + classifier -----------------------------------

@dataclass
class ClassifierWeights:
    """``w[i][j]``: feature neuron ``i`` to class ``j``."""

    w: np.ndarray
    classes: tuple = LETTERS


@dataclass
class ClassifyResult:
    #: ``(t_ns, letter_index, class_index)`` per class-neuron spike
    events: list
    #: class spike counts ``[presented letter][class]``
    counts: np.ndarray
    decisions: np.ndarray
    r_ev: float
    rr: float


@dataclass
class TrainingResult:
    xbar: Crossbar
    neurons: NeuronBank
    run: LayerRun


def letter_segments(letters, repeats: int = 10):
    """The 16 feature stimuli of every letter, in presentation order."""
    return [image_to_ids(f, repeats) for letter in letters for f in letter_to_features(letter)]


def compensated_thresholds(neurons: NeuronBank, base_delta: float) -> np.ndarray:
    """Scale each threshold by its neuron's packet mismatch so all need equal active counts (capped at 1)."""
    return np.minimum(neurons.threshold * neurons.delta / base_delta, 1.0)


def run_stdp_training(letters, cfg: StdpConfig, xbar: Crossbar, neurons: NeuronBank, rng, *,
                      timing: TimingConfig = TimingConfig()) -> TrainingResult:
    """Present the 64 feature stimuli once with SB-STDP on; ``xbar``/``neurons`` are copied first."""
    xbar, neurons = xbar.copy(), neurons.copy()
    neurons.threshold[:] = cfg.initial_threshold
    segs = letter_segments(letters, timing.repeats_per_pattern)
    run = run_layer(xbar, neurons, segs, period_ns=timing.period, reset_mode="all", learning=cfg, rng=rng)
    return TrainingResult(xbar, neurons, run)


def collect_feature_counts(xbar: Crossbar, neurons: NeuronBank, letters, *, base_delta: float = 0.04,
                           compensate: bool = True, timing: TimingConfig = TimingConfig()):
    """Spike counts ``N[i][letter]`` with learning off, plus the underlying raster."""
    segs = letter_segments(letters, timing.repeats_per_pattern)
    thr = compensated_thresholds(neurons, base_delta) if compensate else None
    run = run_layer(xbar.copy(), neurons.copy(), segs, period_ns=timing.period, reset_mode="all", threshold=thr)
    n_letters = len(segs) // 16
    counts = run.counts(len(neurons)).reshape(len(neurons), n_letters, 16).sum(axis=2)
    return counts, run


def train_classifier(counts) -> ClassifierWeights:
    """``w_ij = N_ij / N_j``; a class with no feature spikes gets all-zero weights."""
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 2 or np.any(counts < 0):
        raise ValueError("counts must be a non-negative 2-D array")
    totals = counts.sum(axis=0)
    if np.any(totals == 0):
        warnings.warn("classifier column with no feature spikes; weights set to zero", RuntimeWarning,
                      stacklevel=2)
    w = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    return ClassifierWeights(w, LETTERS[:counts.shape[1]] if counts.shape[1] <= 4 else tuple(range(counts.shape[1])))


def classify(weights: ClassifierWeights, feature_spikes, theta: float = 0.5, times=None) -> ClassifyResult:
    """Integrate-and-fire class neurons driven by the feature raster.

    ``feature_spikes[k]`` lists the feature-neuron ids (in firing order)
    recorded while letter ``k`` was presented. Each spike adds ``w[i]`` to
    every class membrane; a class neuron reaching ``theta`` spikes and resets
    itself. Membranes are cleared at the start of each letter. A letter is
    recognized when its own class neuron has strictly the most spikes.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    w = np.asarray(weights.w, dtype=float)
    n_cls = w.shape[1]
    counts = np.zeros((len(feature_spikes), n_cls), dtype=np.int64)
    events = []
    for k, ids in enumerate(feature_spikes):
        mem = np.zeros(n_cls)
        ts = times[k] if times is not None else range(len(ids))
        for t, i in zip(ts, ids):
            mem += w[i]
            fired = mem >= theta - 1e-12
            if fired.any():
                for c in np.flatnonzero(fired):
                    events.append((int(t), k, int(c)))
                counts[k] += fired
                mem[fired] = 0.0
    total = counts.sum()
    k = min(counts.shape)
    r_ev = float(np.trace(counts[:k, :k]) / total) if total else 0.0
    decisions = np.array([
        int(row.max() > 0 and np.argmax(row) == j and np.count_nonzero(row == row.max()) == 1)
        for j, row in enumerate(counts)
    ])
    return ClassifyResult(events, counts, decisions, r_ev, float(decisions.sum() / len(decisions)))


def _split_by_letter(run: LayerRun):
    ids, ts = [], []
    for k in range(run.n_segments // 16):
        sel = (run.segment >= 16 * k) & (run.segment < 16 * (k + 1))
        ids.append(run.neuron[sel])
        ts.append(run.t_ns[sel])
    return ids, ts


def evaluate_feature_layer(xbar, neurons, letters, *, theta: float = 0.5, base_delta: float = 0.04,
                           timing: TimingConfig = TimingConfig()):
    """Steps 2/4 of the benchmark: counts -> classifier -> class spikes on the same stimuli."""
    counts, run = collect_feature_counts(xbar, neurons, letters, base_delta=base_delta, timing=timing)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        weights = train_classifier(counts)
    ids, ts = _split_by_letter(run)
    return counts, run, weights, classify(weights, ids, theta, times=ts)


# -- full benchmark -------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkConfig:
    stdp: StdpConfig = StdpConfig()
    device: DeviceParams = DeviceParams()
    neuron: NeuronPhysParams = NeuronPhysParams()
    timing: TimingConfig = TimingConfig()
    theta_class: float = 0.5
    n_runs: int = 10


@dataclass
class ExperimentReport:
    """One benchmark run (random-weight and learned evaluations)."""

    seed: int
    run_index: int
    random: dict
    learned: dict
    energy: dict
    #: final thresholds after learning
    thresholds: list
    n_updates: int
    # large artifacts kept out of the JSON
    raster: list = field(default_factory=list, repr=False)
    confusion: np.ndarray | None = field(default=None, repr=False)
    learned_map: np.ndarray | None = field(default=None, repr=False)
    threshold_trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def r_ev(self) -> float:
        return self.learned["r_ev"]

    @property
    def rr(self) -> float:
        return self.learned["rr"]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "run_index": self.run_index, "random": self.random,
                "learned": self.learned, "energy": self.energy, "thresholds": self.thresholds,
                "n_updates": self.n_updates}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, out_dir, stem: str) -> list:
        """Write ``<stem>.json`` plus raster/confusion/map/trace CSVs; returns the paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{stem}.json", out / f"{stem}_raster.csv", out / f"{stem}_confusion.csv"]
        paths[0].write_text(self.to_json() + "\n")
        with paths[1].open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t_ns", "layer", "neuron_id", "letter"])
            wr.writerows(self.raster)
        with paths[2].open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["letter"] + [f"class_{c}" for c in LETTERS])
            for letter, row in zip(LETTERS, self.confusion):
                wr.writerow([letter] + [int(v) for v in row])
        if self.learned_map is not None:
            from .crossbar import save_resistance_map
            paths.append(out / f"{stem}_learned_map.csv")
            save_resistance_map(paths[-1], self.learned_map)
        if self.threshold_trace is not None:
            paths.append(out / f"{stem}_threshold_trace.csv")
            np.savetxt(paths[-1], self.threshold_trace, fmt="%.4f", delimiter=",",
                       header=",".join(f"n{j}" for j in range(self.threshold_trace.shape[1])))
        return paths


def _phase_summary(counts, result: ClassifyResult) -> dict:
    return {"r_ev": result.r_ev, "rr": result.rr, "decisions": result.decisions.tolist(),
            "class_counts": result.counts.tolist(), "feature_counts": np.asarray(counts).tolist()}


def stdp_benchmark_run(cfg: BenchmarkConfig, seed: int, run_index: int, letters=None) -> ExperimentReport:
    """The five-step protocol for one initial random weight distribution."""
    letters = load_letters() if letters is None else letters
    xbar = Crossbar(params=cfg.device)
    xbar.form_all(substream(seed, "device", run_index))
    init_random_weights(xbar, substream(seed, "init", run_index))
    neurons = NeuronBank.sample(cfg.neuron, xbar.n_post, substream(seed, "mismatch", run_index),
                                threshold=cfg.stdp.initial_threshold)
    bd = cfg.neuron.base_delta
    kw = dict(theta=cfg.theta_class, base_delta=bd, timing=cfg.timing)
    # step 2: classifier on random weights
    n_rand, _, _, res_rand = evaluate_feature_layer(xbar, neurons, letters, **kw)
    # step 3: on-line learning
    trained = run_stdp_training(letters, cfg.stdp, xbar, neurons, substream(seed, "stdp", run_index),
                                timing=cfg.timing)
    # step 4: classifier on learned weights
    n_learn, run_l, _, res_learn = evaluate_feature_layer(trained.xbar, trained.neurons, letters, **kw)
    e, q = energy_report()
    raster = [(int(t), "post", int(n), LETTERS[int(s) // 16]) for t, n, s in zip(run_l.t_ns, run_l.neuron, run_l.segment)]
    raster += [(t, "class", c, LETTERS[k]) for t, k, c in res_learn.events]
    raster.sort(key=lambda r: (r[0], r[1] == "class", r[2]))
    return ExperimentReport(
        seed=seed, run_index=run_index,
        random=_phase_summary(n_rand, res_rand), learned=_phase_summary(n_learn, res_learn),
        energy={"e_sop_j": e, "dq_sop_c": q},
        thresholds=[round(float(v), 10) for v in trained.neurons.threshold],
        n_updates=len(trained.run.updates), raster=raster, confusion=res_learn.counts,
        learned_map=trained.xbar.measure_all(), threshold_trace=trained.run.threshold_trace,
    )


def summarize(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {"median": float(np.median(v)), "q1": float(np.percentile(v, 25)),
            "q3": float(np.percentile(v, 75)), "min": float(v.min()), "max": float(v.max())}


def benchmark_stats(reports) -> dict:
    """Median/quartiles/min/max of R_ev and RR for both phases."""
    return {phase: {m: summarize([getattr(r, phase)[m] for r in reports]) for m in ("r_ev", "rr")}
            for phase in ("random", "learned")}


def _bench_job(args):
    cfg, seed, k = args
    return stdp_benchmark_run(cfg, seed, k)


def full_stdp_benchmark(cfg: BenchmarkConfig = BenchmarkConfig(), seed: int = 0, jobs: int = 1):
    """Run ``cfg.n_runs`` independent five-step experiments; returns ``(reports, stats)``."""
    if cfg.n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    args = [(cfg, seed, k) for k in range(cfg.n_runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_bench_job, args))
    else:
        reports = [_bench_job(a) for a in args]
    return reports, benchmark_stats(reports)


def config_dict(cfg) -> dict:
    """Plain-dict view of a (nested) parameter dataclass, for reports."""
    return asdict(cfg)
