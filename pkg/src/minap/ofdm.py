"""OFDM transceiver primitives: comb-pilot grids, QPSK, CP handling, AWGN,
LS and MMSE channel estimation, one-tap equalization.

Everything here follows the package FFT convention (inverse carries 1/N), so
a frequency-domain noise variance ``sigma_f^2`` corresponds to a time-domain
variance ``sigma_f^2 / N`` at the demodulator input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import numerics
from .channel import PowerDelayProfile

_QPSK_SCALE = 1.0 / np.sqrt(2.0)
_QPSK_POINTS = np.array(
    [1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=complex
) * _QPSK_SCALE

EQUALIZER_FLOOR = 1e-12


@dataclass(frozen=True)
class OfdmGrid:
    """Subcarrier layout: comb pilots at known values, data on the rest."""

    n: int
    cp_len: int
    pilot_indices: np.ndarray
    data_indices: np.ndarray
    pilot_values: np.ndarray

    def __post_init__(self):
        kp = np.asarray(self.pilot_indices, dtype=int)
        kd = np.asarray(self.data_indices, dtype=int)
        pv = np.asarray(self.pilot_values, dtype=complex)
        if self.n < 1 or (self.n & (self.n - 1)) != 0:
            raise ValueError("grid size must be a power of two")
        if self.cp_len < 0:
            raise ValueError("cp_len must be nonnegative")
        merged = np.sort(np.concatenate([kp, kd]))
        if not np.array_equal(merged, np.arange(self.n)):
            raise ValueError("pilot and data indices must partition the grid")
        if pv.size != kp.size:
            raise ValueError("one pilot value per pilot index")
        if np.any(pv == 0):
            raise ValueError("pilot values must be nonzero")
        object.__setattr__(self, "pilot_indices", kp)
        object.__setattr__(self, "data_indices", kd)
        object.__setattr__(self, "pilot_values", pv)

    @property
    def n_data(self) -> int:
        return int(self.data_indices.size)


def make_grid(n: int = 256, cp_len: int = 64, pilot_rate: float = 0.25,
              pilot_seed: int = 11) -> OfdmGrid:
    """Comb-type grid: every (1/pilot_rate)-th bin is a pilot, starting at 0.

    Pilot symbols are unit-magnitude QPSK points drawn once from
    ``pilot_seed`` and thereafter known to every party.
    """
    if not 0 < pilot_rate <= 1:
        raise ValueError("pilot_rate must lie in (0, 1]")
    spacing = int(round(1.0 / pilot_rate))
    if spacing < 1 or abs(spacing * pilot_rate - 1.0) > 1e-9:
        raise ValueError("pilot_rate must be 1/k for integer k")
    kp = np.arange(0, n, spacing)
    mask = np.ones(n, dtype=bool)
    mask[kp] = False
    kd = np.nonzero(mask)[0]
    rng = np.random.default_rng(pilot_seed)
    pilots = np.exp(1j * (np.pi / 4 + np.pi / 2 * rng.integers(0, 4, size=kp.size)))
    return OfdmGrid(n=n, cp_len=cp_len, pilot_indices=kp, data_indices=kd,
                    pilot_values=pilots)


@dataclass(frozen=True)
class OfdmSymbol:
    """One OFDM symbol, frequency-domain grid plus CP-prefixed time signal."""

    freq: np.ndarray
    time: np.ndarray


@dataclass(frozen=True)
class ChannelEstimate:
    """A CFR estimate, how it was obtained, and the noise level assumed."""

    values: np.ndarray
    method: str  # "ls" | "mmse" | "perfect"
    noise_var: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise ValueError("channel estimate contains non-finite values")
        object.__setattr__(self, "values", vals)


def qpsk_map(bits) -> np.ndarray:
    """Gray-mapped unit-power QPSK: bit pair (b0, b1) -> ((1-2b0) + j(1-2b1))/sqrt(2)."""
    b = np.asarray(bits)
    if b.ndim != 1:
        raise ValueError("bits must be a 1-D vector")
    if b.size % 2 != 0:
        raise ValueError("bit count must be even for QPSK")
    b = b.astype(int)
    if np.any((b != 0) & (b != 1)):
        raise ValueError("bits must be 0 or 1")
    pairs = b.reshape(-1, 2)
    return ((1 - 2 * pairs[:, 0]) + 1j * (1 - 2 * pairs[:, 1])) * _QPSK_SCALE


def qpsk_demap(symbols) -> np.ndarray:
    """Nearest-neighbor QPSK decisions back to bits."""
    s = np.asarray(symbols, dtype=complex)
    if s.ndim != 1:
        raise ValueError("symbols must be a 1-D vector")
    bits = np.empty((s.size, 2), dtype=np.uint8)
    bits[:, 0] = (s.real < 0).astype(np.uint8)
    bits[:, 1] = (s.imag < 0).astype(np.uint8)
    return bits.reshape(-1)


def modulate(grid: OfdmGrid, data_symbols, pilot_values=None) -> OfdmSymbol:
    """Assemble one OFDM symbol and prefix the cyclic extension.

    ``pilot_values`` overrides the grid's pilots (used by precoded-pilot
    schemes); by default the grid's known pilots are placed.
    """
    data = np.asarray(data_symbols, dtype=complex)
    if data.size != grid.n_data:
        raise ValueError("expected %d data symbols, got %d" % (grid.n_data, data.size))
    pilots = grid.pilot_values if pilot_values is None else np.asarray(pilot_values, dtype=complex)
    if pilots.size != grid.pilot_indices.size:
        raise ValueError("pilot override length mismatch")
    freq = np.empty(grid.n, dtype=complex)
    freq[grid.pilot_indices] = pilots
    freq[grid.data_indices] = data
    body = numerics.fft(freq, inverse=True)
    time = np.concatenate([body[grid.n - grid.cp_len :], body])
    return OfdmSymbol(freq=freq, time=time)


def demodulate(time_signal, grid: OfdmGrid) -> np.ndarray:
    """Strip the CP and return the frequency-domain grid."""
    t = np.asarray(time_signal, dtype=complex)
    if t.size != grid.n + grid.cp_len:
        raise ValueError("expected %d time samples, got %d" % (grid.n + grid.cp_len, t.size))
    return numerics.fft(t[grid.cp_len :])


def awgn(signal, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add circularly-symmetric white noise at an SNR measured on this signal.

    The noise variance comes from the empirical mean power of the input, so
    the realized SNR matches the request for the given vector. ``inf`` passes
    the signal through untouched.
    """
    s = np.asarray(signal, dtype=complex)
    if np.isinf(snr_db):
        return s.copy()
    power = float(np.mean(np.abs(s) ** 2))
    var = power * 10.0 ** (-snr_db / 10.0)
    noise = np.sqrt(var / 2.0) * (rng.standard_normal(s.size) + 1j * rng.standard_normal(s.size))
    return s + noise


def ls_estimate(rx_freq, grid: OfdmGrid, noise_var: float = 0.0,
                interp: str = "linear") -> ChannelEstimate:
    """Per-pilot division, then interpolation across the whole grid.

    Real and imaginary parts interpolate separately; edge bins beyond the
    outermost pilots take the nearest pilot's value on the linear route.
    ``interp="spline"`` swaps in a natural cubic spline.
    """
    rx = np.asarray(rx_freq, dtype=complex)
    pilots = rx[grid.pilot_indices] / grid.pilot_values
    bins = np.arange(grid.n)
    if interp == "linear":
        values = (np.interp(bins, grid.pilot_indices, pilots.real)
                  + 1j * np.interp(bins, grid.pilot_indices, pilots.imag))
    elif interp == "spline":
        values = CubicSpline(grid.pilot_indices, pilots, bc_type="natural")(bins)
    else:
        raise ValueError("unknown interpolation %r" % (interp,))
    return ChannelEstimate(values=values, method="ls", noise_var=noise_var)


def _tap_covariance(r_hh) -> np.ndarray:
    if isinstance(r_hh, PowerDelayProfile):
        return np.diag(r_hh.tap_powers.astype(complex))
    mat = np.asarray(r_hh, dtype=complex)
    if mat.ndim == 1:
        return np.diag(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("tap covariance must be square")
    return mat


def mmse_estimate(rx_freq, grid: OfdmGrid, r_hh, noise_var: float) -> ChannelEstimate:
    """Linear MMSE estimate of the CFR from the pilot observations.

    ``r_hh`` is the delay-domain tap covariance (a PowerDelayProfile, a power
    vector, or a full matrix); the estimate is constrained to that support,
    shrinks toward zero as the noise grows, and reduces to the exact channel
    at zero noise when the pilots span the support.
    """
    rx = np.asarray(rx_freq, dtype=complex)
    cov = _tap_covariance(r_hh)
    n_taps = cov.shape[0]
    kp = grid.pilot_indices
    y = rx[kp]
    f_full = np.exp(-2j * np.pi * np.outer(np.arange(grid.n), np.arange(n_taps)) / grid.n)
    f_pilot = f_full[kp, :]
    a = f_pilot @ cov @ f_pilot.conj().T
    q = grid.pilot_values
    gram = (q[:, None] * a) * q.conj()[None, :]
    cross = (f_full @ cov @ f_pilot.conj().T) * q.conj()[None, :]
    system = gram + noise_var * np.eye(kp.size)
    try:
        if noise_var > 0:
            weights = np.linalg.solve(system, y)
        else:
            weights, *_ = np.linalg.lstsq(system, y, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular MMSE system: %s" % exc) from exc
    values = cross @ weights
    return ChannelEstimate(values=values, method="mmse", noise_var=noise_var)


def equalize(rx_freq, est_values, indices) -> np.ndarray:
    """One-tap equalization ``rx[k] / est[k]`` at the requested bins.

    Estimate magnitudes are floored at 1e-12 so a nulled bin yields a large
    but finite output instead of dividing by zero.
    """
    rx = np.asarray(rx_freq, dtype=complex)
    est = np.asarray(est_values, dtype=complex)
    idx = np.asarray(indices, dtype=int)
    denom = est[idx].copy()
    mags = np.abs(denom)
    small = mags < EQUALIZER_FLOOR
    if np.any(small):
        unit = np.ones(int(small.sum()), dtype=complex)
        has_phase = mags[small] > 0
        unit[has_phase] = denom[small][has_phase] / mags[small][has_phase]
        denom[small] = EQUALIZER_FLOOR * unit
    return rx[idx] / denom
