"""Deterministic Monte-Carlo sweeps over (scheme, SNR, correlation).

Reproducibility contract: every trial seeds its own generator from
(master_seed, grid-point index, trial index), and aggregation walks trials in
index order, so results are bit-identical for a given config no matter how
many workers ran them. Workers recompute nothing shared; they return raw
per-trial values and the parent reduces.

SNR is per bit: with unit average channel power and QPSK (2 bits/symbol) the
frequency-domain noise variance at snr_db is 1 / (2 * 10^(snr/10)), and the
time-domain variance is that over N (the inverse transform carries 1/N).
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np

from . import analysis
from .channel import PowerDelayProfile, draw_channel, draw_correlated, exp_pdp
from .decomposition import canonical_split, decompose_fir
from .ofdm import OfdmGrid, make_grid, qpsk_map
from .security import SchemeMode, alice_precode, bob_receive, eve_receive

EXPERIMENTS = ("ber", "nmse", "papr", "correlation")
METRIC_NAMES = (
    "ber_bob",
    "ber_eve",
    "nmse_bob_db",
    "nmse_eve_db",
    "papr_db_sample",
    "corr_min_empirical",
    "corr_min_model",
)

CSV_HEADER = ("scheme", "snr_db", "rho", "metric", "value", "trials", "seed")

_DEFAULT_SNR_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "baseline"
    experiment: str = "ber"
    n_subcarriers: int = 256
    cp_len: int = 64
    pilot_rate: float = 0.25
    constellation: str = "qpsk"
    n_taps: int = 11
    pdp_span_db: float = 20.0
    snr_grid_db: tuple = _DEFAULT_SNR_GRID
    rho_grid: tuple = (0.0,)
    trials: int = 1000
    master_seed: int = 1234
    eve_knows_channel: bool = True
    eve_equalizer: str = "min"
    estimator: str = "ls"
    csi_mode: str = "estimated"
    workers: int = 1
    pilot_seed: int = 11

    def __post_init__(self):
        SchemeMode.parse(self.scheme)
        if self.experiment not in EXPERIMENTS:
            raise ValueError("unknown experiment %r" % (self.experiment,))
        n = self.n_subcarriers
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError("subcarrier count must be a power of two")
        if self.constellation != "qpsk":
            raise ValueError("only QPSK is supported")
        if self.n_taps < 1:
            raise ValueError("need at least one channel tap")
        if self.cp_len < self.n_taps - 1:
            raise ValueError("cyclic prefix shorter than the channel")
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))
        if len(self.snr_grid_db) == 0 or len(self.rho_grid) == 0:
            raise ValueError("sweep grids cannot be empty")
        if not all(math.isfinite(s) for s in self.snr_grid_db):
            raise ValueError("SNR grid must be finite")
        if not all(0.0 <= r <= 1.0 for r in self.rho_grid):
            raise ValueError("correlations must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.experiment == "correlation" and self.trials < 1000:
            raise ValueError("correlation sweeps need at least 1000 pairs per point")
        if self.experiment == "nmse" and self.csi_mode == "perfect":
            raise ValueError("estimation error is undefined under perfect CSI")
        if self.eve_equalizer not in ("min", "full"):
            raise ValueError("unknown eve equalizer %r" % (self.eve_equalizer,))
        if self.estimator not in ("ls", "mmse"):
            raise ValueError("unknown estimator %r" % (self.estimator,))
        if self.csi_mode not in ("perfect", "estimated"):
            raise ValueError("unknown CSI mode %r" % (self.csi_mode,))
        if self.workers < 1:
            raise ValueError("need at least one worker")


def config_from_dict(values: dict) -> ExperimentConfig:
    """Build a config from a plain mapping, rejecting unknown keys."""
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValueError("unknown config keys: %s" % ", ".join(unknown))
    kwargs = dict(values)
    for key in ("snr_grid_db", "rho_grid"):
        if key in kwargs:
            raw = kwargs[key]
            kwargs[key] = tuple(raw) if np.iterable(raw) else (float(raw),)
    return ExperimentConfig(**kwargs)


@dataclass(frozen=True)
class MetricRecord:
    scheme: str
    snr_db: float
    rho: float
    metric: str
    value: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.metric not in METRIC_NAMES:
            raise ValueError("unknown metric %r" % (self.metric,))
        if not math.isfinite(self.value):
            raise ValueError("metric value must be finite")
        # 0.5 is the information-less ceiling; the slack covers binomial
        # scatter in short runs.
        if self.metric.startswith("ber_") and not 0.0 <= self.value <= 0.75:
            raise ValueError("bit error rate out of range: %g" % self.value)
        if self.metric.startswith("corr_") and not 0.0 <= self.value <= 1.02:
            raise ValueError("correlation out of range: %g" % self.value)
        if self.metric == "papr_db_sample" and self.value < 0.0:
            raise ValueError("PAPR below 0 dB is impossible")
        if self.trials < 1:
            raise ValueError("trial count must be positive")


@lru_cache(maxsize=8)
def _cached_grid(n: int, cp_len: int, pilot_rate: float, pilot_seed: int) -> OfdmGrid:
    return make_grid(n=n, cp_len=cp_len, pilot_rate=pilot_rate, pilot_seed=pilot_seed)


@lru_cache(maxsize=8)
def _cached_pdp(n_taps: int, span_db: float) -> PowerDelayProfile:
    return exp_pdp(n_taps=n_taps, span_db=span_db)


def _grid_of(config: ExperimentConfig) -> OfdmGrid:
    return _cached_grid(config.n_subcarriers, config.cp_len,
                        config.pilot_rate, config.pilot_seed)


def _pdp_of(config: ExperimentConfig) -> PowerDelayProfile:
    return _cached_pdp(config.n_taps, config.pdp_span_db)


def _trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, point_index, trial_index])


def _apply_channel(tx_time: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # Linear convolution truncated to the symbol span; the cyclic prefix
    # absorbs the tail, so this matches circular convolution on the FFT body.
    return np.convolve(tx_time, taps)[: tx_time.size]


def _link_trial(config: ExperimentConfig, point_index: int, trial_index: int,
                snr_db: float, rho: float, force_eve_estimate: bool):
    """One fading realization: returns (bob_err, eve_err, bob_nmse, eve_nmse)."""
    grid = _grid_of(config)
    pdp = _pdp_of(config)
    rng = _trial_rng(config.master_seed, point_index, trial_index)

    h_ab = draw_channel(pdp, rng)
    h_ae = draw_correlated(h_ab, pdp, rho, rng)
    bits = rng.integers(0, 2, size=2 * grid.n_data).astype(np.uint8)
    n_time = grid.n + grid.cp_len
    z_bob = rng.standard_normal((2, n_time))
    z_eve = rng.standard_normal((2, n_time))

    gamma = 10.0 ** (snr_db / 10.0)
    noise_var_f = 1.0 / (2.0 * gamma)
    sigma_t = math.sqrt(noise_var_f / grid.n / 2.0)
    noise_bob = sigma_t * (z_bob[0] + 1j * z_bob[1])
    noise_eve = sigma_t * (z_eve[0] + 1j * z_eve[1])

    mode = SchemeMode.parse(config.scheme)
    decomp = None if mode is SchemeMode.BASELINE else decompose_fir(h_ab, grid.n)
    symbol = alice_precode(grid, qpsk_map(bits), mode, decomp)

    rx_bob = _apply_channel(symbol.time, h_ab) + noise_bob
    rx_eve = _apply_channel(symbol.time, h_ae) + noise_eve

    bob = bob_receive(rx_bob, grid, mode, tx_bits=bits, h_ab=h_ab, pdp=pdp,
                      noise_var=noise_var_f, csi=config.csi_mode,
                      estimator=config.estimator)
    eve = eve_receive(rx_eve, grid, mode, tx_bits=bits, h_ae=h_ae, pdp=pdp,
                      noise_var=noise_var_f,
                      h_ae_known=config.eve_knows_channel and not force_eve_estimate,
                      equalizer=config.eve_equalizer,
                      estimator=config.estimator)
    return bob.bit_errors, eve.bit_errors, bob.channel_nmse, eve.channel_nmse


def _papr_trial(config: ExperimentConfig, point_index: int, trial_index: int):
    grid = _grid_of(config)
    pdp = _pdp_of(config)
    rng = _trial_rng(config.master_seed, point_index, trial_index)
    h_ab = draw_channel(pdp, rng)
    bits = rng.integers(0, 2, size=2 * grid.n_data).astype(np.uint8)
    mode = SchemeMode.parse(config.scheme)
    decomp = None if mode is SchemeMode.BASELINE else decompose_fir(h_ab, grid.n)
    symbol = alice_precode(grid, qpsk_map(bits), mode, decomp)
    return analysis.papr(symbol.time)


def _correlation_trial(config: ExperimentConfig, point_index: int,
                       trial_index: int, rho: float):
    # Canonical members: the min-phase factor a magnitude-only observer can
    # reconstruct. The pooled statistic centers per bin, which removes the
    # common positive-real leading tap this convention plants.
    grid = _grid_of(config)
    pdp = _pdp_of(config)
    rng = _trial_rng(config.master_seed, point_index, trial_index)
    h_ab = draw_channel(pdp, rng)
    h_ae = draw_correlated(h_ab, pdp, rho, rng)
    min_ab = canonical_split(decompose_fir(h_ab, grid.n)).min_phase
    min_ae = canonical_split(decompose_fir(h_ae, grid.n)).min_phase
    return min_ab, min_ae


def _dispatch(task):
    kind, config, point_index, trial_index, extra = task
    if kind == "link":
        snr_db, rho, force_eve_estimate = extra
        return _link_trial(config, point_index, trial_index, snr_db, rho,
                           force_eve_estimate)
    if kind == "papr":
        return _papr_trial(config, point_index, trial_index)
    if kind == "corr":
        return _correlation_trial(config, point_index, trial_index, extra)
    raise AssertionError(kind)


def _map_trials(config: ExperimentConfig, tasks):
    if config.workers == 1:
        return [_dispatch(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * config.workers))
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(_dispatch, tasks, chunksize=chunk))


def run(config: ExperimentConfig):
    """Execute the configured sweep and return the metric records."""
    grid = _grid_of(config)
    records: list[MetricRecord] = []

    if config.experiment in ("ber", "nmse"):
        force_eve_estimate = config.experiment == "nmse"
        bits_per_trial = 2 * grid.n_data
        points = [(s, r) for s in config.snr_grid_db for r in config.rho_grid]
        for point_index, (snr_db, rho) in enumerate(points):
            tasks = [("link", config, point_index, t,
                      (snr_db, rho, force_eve_estimate))
                     for t in range(config.trials)]
            results = _map_trials(config, tasks)
            bob_err = 0
            eve_err = 0
            bob_nmse = 0.0
            eve_nmse = 0.0
            for be, ee, bn, en in results:
                bob_err += be
                eve_err += ee
                bob_nmse += bn
                eve_nmse += en
            total_bits = config.trials * bits_per_trial
            common = dict(scheme=config.scheme, snr_db=snr_db, rho=rho,
                          trials=config.trials, seed=config.master_seed)
            if config.experiment == "ber":
                records.append(MetricRecord(metric="ber_bob",
                                            value=bob_err / total_bits, **common))
                records.append(MetricRecord(metric="ber_eve",
                                            value=eve_err / total_bits, **common))
            else:
                records.append(MetricRecord(
                    metric="nmse_bob_db",
                    value=10.0 * math.log10(bob_nmse / config.trials), **common))
                records.append(MetricRecord(
                    metric="nmse_eve_db",
                    value=10.0 * math.log10(eve_nmse / config.trials), **common))
    elif config.experiment == "papr":
        tasks = [("papr", config, 0, t, None) for t in range(config.trials)]
        for value in _map_trials(config, tasks):
            records.append(MetricRecord(scheme=config.scheme, snr_db=0.0,
                                        rho=0.0, metric="papr_db_sample",
                                        value=value, trials=config.trials,
                                        seed=config.master_seed))
    elif config.experiment == "correlation":
        for point_index, rho in enumerate(config.rho_grid):
            tasks = [("corr", config, point_index, t, rho)
                     for t in range(config.trials)]
            pairs = _map_trials(config, tasks)
            empirical = analysis.empirical_min_phase_correlation(pairs)
            common = dict(scheme=config.scheme, snr_db=0.0, rho=rho,
                          trials=config.trials, seed=config.master_seed)
            records.append(MetricRecord(metric="corr_min_empirical",
                                        value=empirical, **common))
            records.append(MetricRecord(metric="corr_min_model",
                                        value=float(analysis.rho_min(rho)), **common))
    else:  # pragma: no cover - config validation is exhaustive
        raise AssertionError(config.experiment)
    return records


def write_csv(records, path) -> None:
    """Atomically write records: header plus one row each, %.12g values."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".csv.part")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for rec in records:
                writer.writerow([
                    rec.scheme,
                    "%.12g" % rec.snr_db,
                    "%.12g" % rec.rho,
                    rec.metric,
                    "%.12g" % rec.value,
                    "%d" % rec.trials,
                    "%d" % rec.seed,
                ])
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


__all__ = [
    "CSV_HEADER",
    "EXPERIMENTS",
    "ExperimentConfig",
    "METRIC_NAMES",
    "MetricRecord",
    "config_from_dict",
    "run",
    "write_csv",
]
