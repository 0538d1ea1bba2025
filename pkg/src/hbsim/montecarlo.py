"""Monte Carlo sweep engine with deterministic per-trial seeding.

A sweep evaluates a set of combining methods over a grid of one sweep
variable (SNR, RF-chain count, antenna count, or ADC bits). Within one
(sweep point, trial) cell every configured method sees the *same* channel
realization, so method comparisons are paired. Trial seeds derive from
``SeedSequence(master_seed, spawn_key=(point_index, trial_index))``, which
makes results independent of execution order and worker count; aggregation
is a fixed-order fold over a preallocated (point, method, trial) array.

Results serialize to CSV with the fixed header::

    sweep_variable,sweep_value,method,metric,mean,stderr,trials,n_r,n_rf,n_u,bits,snr_db,channel_model,seed

Closed-form overlay curves (labels EQ13, EQ14, EQ29, EQ31) are evaluated once
per sweep point and appended as rows with ``trials=0``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import gen_geometric_channel, gen_rayleigh_channel, gen_virtual_channel
from .combiner import aoa_combiner, arv_tsac, build_codebook, dft_matrix, digital_combiner, greedy_mi, svd_combiner
from .metrics import TheoryInputs, db_to_linear, mutual_information, per_user_rate, theory_ergodic_rate, theory_optimal_mi, theory_svd_upper_bound
from .quantizer import QuantizerModel

CHANNEL_MODELS = ("geometric", "rayleigh", "virtual")
METHOD_NAMES = ("ARV_TSAC", "ARV_ONLY", "SVD_DFT", "SVD", "GREEDY_MI", "AOA_DFT")
VIRTUAL_METHODS = ("ARV_TSAC", "ARV_ONLY")
DIGITAL_KINDS = ("MRC", "ZF", "MMSE")
METRICS = ("MI", "SUM_RATE")
SWEEP_VARIABLES = ("snr_db", "n_rf", "n_antennas", "bits")
OVERLAY_NAMES = ("EQ13", "EQ14", "EQ29", "EQ31")

CSV_HEADER = [
    "sweep_variable", "sweep_value", "method", "metric", "mean", "stderr",
    "trials", "n_r", "n_rf", "n_u", "bits", "snr_db", "channel_model", "seed",
]


class ConfigError(ValueError):
    """Invalid experiment configuration; names the offending field."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class ExperimentConfig:
    channel_model: str
    methods: list[str]
    metric: str
    sweep_variable: str
    sweep_values: list
    n_r: int
    n_rf: int
    n_u: int
    bits: float  # positive integer or math.inf
    snr_db: float
    n_trials: int
    master_seed: int
    digital: str | None = None
    mean_paths: float | None = None
    paths_per_user: int | None = None
    kappa: float | None = None
    d_over_lambda: float = 0.5
    theory_overlays: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class PointParams:
    """Fully resolved parameters of one sweep point."""

    sweep_value: float
    n_r: int
    n_rf: int
    n_u: int
    bits: float
    snr_db: float


def resolve_points(cfg: ExperimentConfig) -> list[PointParams]:
    points = []
    for value in cfg.sweep_values:
        n_r, n_rf, bits, snr_db = cfg.n_r, cfg.n_rf, cfg.bits, cfg.snr_db
        if cfg.sweep_variable == "snr_db":
            snr_db = float(value)
        elif cfg.sweep_variable == "n_rf":
            n_rf = int(value)
        elif cfg.sweep_variable == "n_antennas":
            n_r = int(value)
            if cfg.kappa is not None:
                n_rf = math.ceil(cfg.kappa * n_r)
        elif cfg.sweep_variable == "bits":
            bits = float(value)
        points.append(
            PointParams(
                sweep_value=float(value), n_r=n_r, n_rf=n_rf, n_u=cfg.n_u,
                bits=bits, snr_db=snr_db,
            )
        )
    return points


def _validate_bits(bits, field_name: str) -> None:
    if bits == math.inf:
        return
    if bits != int(bits) or bits < 1:
        raise ConfigError(field_name, f"must be a positive integer or inf, got {bits}")


def validate_config(cfg: ExperimentConfig) -> list[PointParams]:
    """Check the whole sweep before any trial runs; returns resolved points."""
    if cfg.channel_model not in CHANNEL_MODELS:
        raise ConfigError("channel_model", f"must be one of {CHANNEL_MODELS}")
    if not cfg.methods:
        raise ConfigError("methods", "must list at least one method")
    for m in cfg.methods:
        if m not in METHOD_NAMES:
            raise ConfigError("methods", f"unknown method {m!r}")
    if len(set(cfg.methods)) != len(cfg.methods):
        raise ConfigError("methods", "contains duplicates")
    if cfg.channel_model == "virtual":
        bad = [m for m in cfg.methods if m not in VIRTUAL_METHODS]
        if bad:
            raise ConfigError(
                "methods", f"{bad} not defined for the virtual channel model"
            )
    if "AOA_DFT" in cfg.methods and cfg.channel_model != "geometric":
        raise ConfigError("methods", "AOA_DFT requires the geometric channel model")
    if cfg.metric not in METRICS:
        raise ConfigError("metric", f"must be one of {METRICS}")
    if cfg.metric == "SUM_RATE":
        if cfg.digital not in DIGITAL_KINDS:
            raise ConfigError("digital", f"SUM_RATE requires one of {DIGITAL_KINDS}")
    if cfg.sweep_variable not in SWEEP_VARIABLES:
        raise ConfigError("sweep_variable", f"must be one of {SWEEP_VARIABLES}")
    if not cfg.sweep_values:
        raise ConfigError("sweep_values", "must be non-empty")
    diffs = np.diff([float(v) for v in cfg.sweep_values])
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ConfigError("sweep_values", "must be strictly monotone")
    if cfg.kappa is not None:
        if cfg.sweep_variable != "n_antennas":
            raise ConfigError("kappa", "only valid when sweeping n_antennas")
        if not 0 < cfg.kappa <= 1:
            raise ConfigError("kappa", "must lie in (0, 1]")
    if cfg.n_trials < 1:
        raise ConfigError("n_trials", "must be >= 1")
    if cfg.channel_model == "geometric":
        if cfg.mean_paths is None or cfg.mean_paths <= 0:
            raise ConfigError("mean_paths", "required (positive) for geometric channels")
    if cfg.channel_model == "virtual":
        if cfg.paths_per_user is None or cfg.paths_per_user < 1:
            raise ConfigError("paths_per_user", "required (>= 1) for virtual channels")
    for name in cfg.theory_overlays:
        if name not in OVERLAY_NAMES:
            raise ConfigError("theory_overlays", f"unknown overlay {name!r}")
        if name in ("EQ29", "EQ31") and cfg.paths_per_user is None:
            raise ConfigError("paths_per_user", f"required by overlay {name}")
    if cfg.sweep_variable != "bits":
        _validate_bits(cfg.bits, "bits")

    points = resolve_points(cfg)
    for pt in points:
        _validate_bits(pt.bits, "sweep_values" if cfg.sweep_variable == "bits" else "bits")
        if not (pt.n_u <= pt.n_rf <= pt.n_r):
            raise ConfigError(
                "sweep_values",
                f"infeasible point {pt.sweep_value}: need n_u <= n_rf <= n_r, "
                f"got ({pt.n_u}, {pt.n_rf}, {pt.n_r})",
            )
        if cfg.channel_model == "virtual" and cfg.paths_per_user > pt.n_rf:
            raise ConfigError(
                "paths_per_user",
                f"exceeds n_rf ({pt.n_rf}) at sweep point {pt.sweep_value}",
            )
    return points


def _trial_rng(master_seed: int, point_idx: int, trial_idx: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(point_idx, trial_idx))
    return np.random.default_rng(seq)


def _combiners_for_trial(cfg: ExperimentConfig, pt: PointParams, chan, snr: float,
                         q: QuantizerModel) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    if cfg.channel_model == "virtual":
        # the sparse channel already lives in the aggregated RF-chain domain
        for m in cfg.methods:
            if m == "ARV_TSAC":
                out[m] = dft_matrix(pt.n_rf)
            elif m == "ARV_ONLY":
                out[m] = np.eye(pt.n_rf, dtype=complex)
        return out
    h = chan.h
    wanted = set(cfg.methods)
    if wanted & {"ARV_TSAC", "ARV_ONLY"}:
        pair = arv_tsac(h, pt.n_rf, build_codebook(pt.n_r))
        if "ARV_TSAC" in wanted:
            out["ARV_TSAC"] = pair.w_rf
        if "ARV_ONLY" in wanted:
            out["ARV_ONLY"] = pair.w_rf1
    if wanted & {"SVD_DFT", "SVD"}:
        pair = svd_combiner(h, pt.n_rf, with_dft_stage=True)
        if "SVD_DFT" in wanted:
            out["SVD_DFT"] = pair.w_rf
        if "SVD" in wanted:
            out["SVD"] = pair.w_rf1
    if "GREEDY_MI" in wanted:
        out["GREEDY_MI"] = greedy_mi(h, pt.n_rf, build_codebook(pt.n_r), snr, q).w_rf1
    if "AOA_DFT" in wanted:
        out["AOA_DFT"] = aoa_combiner(chan, pt.n_rf).w_rf
    return out


def _evaluate_trial(cfg: ExperimentConfig, pt: PointParams, point_idx: int,
                    trial_idx: int, debug: bool):
    rng = _trial_rng(cfg.master_seed, point_idx, trial_idx)
    snr = db_to_linear(pt.snr_db)
    q = QuantizerModel(pt.bits)
    if cfg.channel_model == "geometric":
        chan = gen_geometric_channel(
            pt.n_r, pt.n_u, cfg.mean_paths, rng, d_over_lambda=cfg.d_over_lambda
        )
        h = chan.h
    elif cfg.channel_model == "rayleigh":
        chan = gen_rayleigh_channel(pt.n_r, pt.n_u, rng)
        h = chan.h
    else:
        chan = gen_virtual_channel(pt.n_rf, pt.n_u, cfg.paths_per_user, pt.n_r, rng)
        h = chan.h_b
    combiners = _combiners_for_trial(cfg, pt, chan, snr, q)
    values = np.empty(len(cfg.methods))
    prints = []
    for i, m in enumerate(cfg.methods):
        w = combiners[m]
        if debug:
            prints.append(hashlib.sha256(np.ascontiguousarray(h).tobytes()).hexdigest()[:16])
        if cfg.metric == "MI":
            values[i] = mutual_information(w, h, snr, q)
        else:
            dc = digital_combiner(cfg.digital, w.conj().T @ h, w, snr, q)
            values[i] = per_user_rate(w, dc, h, snr, q).sum_rate
    return values, prints


def _overlay_value(cfg: ExperimentConfig, pt: PointParams, name: str) -> float:
    q = QuantizerModel(pt.bits)
    snr = db_to_linear(pt.snr_db)
    if name == "EQ13":
        return theory_svd_upper_bound(pt.n_u, q)
    if name == "EQ14":
        # large-array limit of i.i.d. channels: common eigenvalue ~ n_r
        return theory_optimal_mi(TheoryInputs(
            n_antennas=pt.n_r, n_rf=pt.n_rf, n_users=pt.n_u, snr=snr,
            quantizer=q, singular_value=float(pt.n_r),
        ))
    variant = "two_stage" if name == "EQ29" else "one_stage"
    return theory_ergodic_rate(variant, TheoryInputs(
        n_antennas=pt.n_r, n_rf=pt.n_rf, n_users=pt.n_u, snr=snr,
        quantizer=q, paths_per_user=cfg.paths_per_user,
    ))


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list[PointParams]
    methods: list[str]
    values: np.ndarray  # (n_points, n_methods, n_trials)
    overlays: dict[str, np.ndarray]  # overlay name -> per-point values
    wall_times: np.ndarray  # per-point accumulated trial seconds
    fingerprints: list | None = None  # (point, trial) -> per-method channel hashes

    @property
    def means(self) -> np.ndarray:
        return np.mean(self.values, axis=2)

    @property
    def stderrs(self) -> np.ndarray:
        n = self.values.shape[2]
        if n == 1:
            return np.zeros(self.values.shape[:2])
        return np.std(self.values, axis=2, ddof=1) / np.sqrt(n)


def run_sweep(cfg: ExperimentConfig, n_workers: int | None = None,
              debug: bool = False) -> SweepResult:
    """Run every (sweep point, trial) cell and aggregate per-method statistics.

    ``n_workers`` caps the thread pool (None = os.cpu_count()); results are
    identical for any worker count.
    """
    points = validate_config(cfg)
    n_points, n_methods, n_trials = len(points), len(cfg.methods), cfg.n_trials
    values = np.empty((n_points, n_methods, n_trials))
    durations = np.zeros(n_points)
    prints = [[None] * n_trials for _ in range(n_points)] if debug else None

    def work(task):
        pi, ti = task
        start = time.perf_counter()
        vals, fp = _evaluate_trial(cfg, points[pi], pi, ti, debug)
        return pi, ti, vals, fp, time.perf_counter() - start

    def consume(results) -> None:
        for pi, ti, vals, fp, dt in results:
            values[pi, :, ti] = vals
            durations[pi] += dt
            if debug:
                prints[pi][ti] = fp

    tasks = [(pi, ti) for pi in range(n_points) for ti in range(n_trials)]
    if n_workers == 1:
        consume(map(work, tasks))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            consume(pool.map(work, tasks))

    overlays = {
        name: np.array([_overlay_value(cfg, pt, name) for pt in points])
        for name in cfg.theory_overlays
    }
    return SweepResult(
        config=cfg, points=points, methods=list(cfg.methods), values=values,
        overlays=overlays, wall_times=durations, fingerprints=prints,
    )


def _fmt_bits(bits: float) -> str:
    return "inf" if bits == math.inf else str(int(bits))


def _fmt_num(x) -> str:
    f = float(x)
    return str(int(f)) if f == int(f) and abs(f) < 1e15 else repr(f)


def write_csv(result: SweepResult, path: str) -> None:
    """Emit one row per (sweep point, method) plus overlay rows."""
    cfg = result.config
    means, stderrs = result.means, result.stderrs
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for pi, pt in enumerate(result.points):
            base = [
                cfg.sweep_variable, _fmt_num(pt.sweep_value),
            ]
            tail = [
                str(pt.n_r), str(pt.n_rf), str(pt.n_u), _fmt_bits(pt.bits),
                _fmt_num(pt.snr_db), cfg.channel_model, str(cfg.master_seed),
            ]
            for mi_, method in enumerate(result.methods):
                writer.writerow(
                    base
                    + [method, cfg.metric, repr(float(means[pi, mi_])),
                       repr(float(stderrs[pi, mi_])), str(cfg.n_trials)]
                    + tail
                )
            for name in cfg.theory_overlays:
                metric = "MI" if name in ("EQ13", "EQ14") else "SUM_RATE"
                writer.writerow(
                    base
                    + [name, metric, repr(float(result.overlays[name][pi])),
                       repr(0.0), "0"]
                    + tail
                )


_CONFIG_REQUIRED = (
    "channel_model", "methods", "metric", "sweep_variable", "sweep_values",
    "n_r", "n_rf", "n_u", "bits", "snr_db", "n_trials", "master_seed",
)
_CONFIG_OPTIONAL = (
    "digital", "mean_paths", "paths_per_user", "kappa", "d_over_lambda",
    "theory_overlays",
)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    data = asdict(cfg)
    if cfg.bits == math.inf:
        data["bits"] = "inf"
    return data


def save_config(cfg: ExperimentConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_to_dict(cfg), f, indent=2)
        f.write("\n")


def load_config(path: str) -> ExperimentConfig:
    """Read a JSON experiment config whose keys mirror ExperimentConfig."""
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("<file>", "top level must be a JSON object")
    for key in data:
        if key not in _CONFIG_REQUIRED and key not in _CONFIG_OPTIONAL:
            raise ConfigError(key, "unknown field")
    for key in _CONFIG_REQUIRED:
        if key not in data:
            raise ConfigError(key, "missing required field")
    if data["bits"] == "inf":
        data["bits"] = math.inf
    try:
        cfg = ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError("<file>", str(exc)) from exc
    validate_config(cfg)
    return cfg


def figure_preset(name: str, scale: str = "desk") -> ExperimentConfig:
    """Named experiment configurations reproducing the reference figures.

    ``paper`` scale uses the published parameter sets; ``desk`` shrinks the
    array (keeping the RF-chain ratio and user loading) so every preset runs
    in minutes on a laptop.
    """
    if scale not in ("desk", "paper"):
        raise ValueError(f"scale must be 'desk' or 'paper', got {scale!r}")
    paper = scale == "paper"
    five = ["ARV_TSAC", "ARV_ONLY", "SVD_DFT", "SVD", "GREEDY_MI"]
    snr_grid = [-10, -5, 0, 5, 10, 15, 20]
    seed = 1234
    if name == "fig_mi_vs_snr":
        return ExperimentConfig(
            channel_model="geometric", methods=five, metric="MI",
            sweep_variable="snr_db", sweep_values=snr_grid,
            n_r=128 if paper else 64, n_rf=43 if paper else 22,
            n_u=8 if paper else 4, bits=2, snr_db=0.0, mean_paths=3.0,
            n_trials=1000 if paper else 200, master_seed=seed,
        )
    if name == "fig_mi_vs_nrf_fixed_nr":
        return ExperimentConfig(
            channel_model="geometric", methods=five, metric="MI",
            sweep_variable="n_rf",
            sweep_values=[16, 32, 48, 64, 80, 96] if paper else [8, 16, 24, 32, 40, 48],
            n_r=256 if paper else 128, n_rf=16 if paper else 8,
            n_u=8 if paper else 4, bits=2, snr_db=0.0, mean_paths=4.0,
            n_trials=1000 if paper else 200, master_seed=seed,
        )
    if name == "fig_mi_vs_nrf_fixed_ratio":
        return ExperimentConfig(
            channel_model="geometric", methods=five, metric="MI",
            sweep_variable="n_antennas",
            sweep_values=[96, 192, 288, 384] if paper else [48, 96, 144, 192],
            n_r=96 if paper else 48, n_rf=32 if paper else 16,
            n_u=8 if paper else 4, bits=2, snr_db=0.0, mean_paths=4.0,
            kappa=1.0 / 3.0, n_trials=500 if paper else 100, master_seed=seed,
        )
    if name == "fig_rate_vs_snr":
        return ExperimentConfig(
            channel_model="geometric", methods=five, metric="SUM_RATE",
            digital="MRC", sweep_variable="snr_db", sweep_values=snr_grid,
            n_r=128 if paper else 64, n_rf=43 if paper else 22,
            n_u=8 if paper else 4, bits=2, snr_db=0.0, mean_paths=3.0,
            n_trials=1000 if paper else 200, master_seed=seed,
        )
    if name == "fig_rate_vs_nrf":
        return ExperimentConfig(
            channel_model="geometric", methods=five, metric="SUM_RATE",
            digital="MRC", sweep_variable="n_antennas",
            sweep_values=[96, 192, 288, 384] if paper else [48, 96, 144, 192],
            n_r=96 if paper else 48, n_rf=32 if paper else 16,
            n_u=8 if paper else 4, bits=2, snr_db=0.0, mean_paths=3.0,
            kappa=1.0 / 3.0, n_trials=500 if paper else 100, master_seed=seed,
        )
    if name == "fig_rate_vs_bits":
        return ExperimentConfig(
            channel_model="geometric", methods=five, metric="SUM_RATE",
            digital="MRC", sweep_variable="bits",
            sweep_values=[1, 2, 3, 4, 5, 6, 7, 8],
            n_r=128 if paper else 64, n_rf=43 if paper else 22,
            n_u=8 if paper else 4, bits=2, snr_db=0.0, mean_paths=3.0,
            n_trials=1000 if paper else 200, master_seed=seed,
        )
    if name == "fig_theory_vs_sim":
        return ExperimentConfig(
            channel_model="virtual", methods=["ARV_TSAC", "ARV_ONLY"],
            metric="SUM_RATE", digital="MRC", sweep_variable="snr_db",
            sweep_values=snr_grid,
            n_r=128 if paper else 64, n_rf=43 if paper else 22,
            n_u=8 if paper else 4, bits=2, snr_db=0.0, paths_per_user=8,
            theory_overlays=["EQ29", "EQ31"],
            n_trials=1000 if paper else 200, master_seed=seed,
        )
    raise ValueError(f"unknown preset: {name!r}")


PRESET_NAMES = (
    "fig_mi_vs_snr", "fig_mi_vs_nrf_fixed_nr", "fig_mi_vs_nrf_fixed_ratio",
    "fig_rate_vs_snr", "fig_rate_vs_nrf", "fig_rate_vs_bits", "fig_theory_vs_sim",
)
