"""Multipath Rayleigh channel generation and CIR/CFR conversion.

Channels are block fading: one realization holds for one OFDM symbol and is
redrawn per trial. Reciprocity is modeled by reusing the same tap vector for
both link directions; spatial correlation between the legitimate and the
eavesdropping channel is applied tap-wise in the delay domain so a correlated
channel stays an L-tap channel (the frequency-domain statement is equivalent
by linearity of the DFT).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics

DEFAULT_N_TAPS = 11
DEFAULT_SPAN_DB = 20.0


@dataclass(frozen=True)
class PowerDelayProfile:
    """Normalized per-tap linear powers of a tapped delay line."""

    tap_powers: np.ndarray

    def __post_init__(self):
        powers = np.asarray(self.tap_powers, dtype=float)
        if powers.ndim != 1 or powers.size < 1:
            raise ValueError("profile needs at least one tap")
        if np.any(powers < 0):
            raise ValueError("tap powers must be nonnegative")
        if abs(powers.sum() - 1.0) > 1e-12:
            raise ValueError("tap powers must sum to 1 within 1e-12")
        object.__setattr__(self, "tap_powers", powers)

    @property
    def n_taps(self) -> int:
        return int(self.tap_powers.size)


def exp_pdp(n_taps: int = DEFAULT_N_TAPS, decay: float | None = None,
            span_db: float = DEFAULT_SPAN_DB) -> PowerDelayProfile:
    """Exponentially decaying profile, unit total power.

    ``tap_powers[l] ~ exp(-l / decay)``. When ``decay`` is omitted it is set
    so that the last tap sits ``span_db`` below the first (the default 20 dB
    span over 11 taps is the usual indoor WLAN-style profile).
    """
    if n_taps < 1:
        raise ValueError("n_taps must be >= 1")
    if decay is None:
        if n_taps == 1:
            decay = 1.0
        else:
            if span_db <= 0:
                raise ValueError("span_db must be positive")
            decay = 10.0 * (n_taps - 1) / (span_db * np.log(10.0))
    if decay <= 0:
        raise ValueError("decay must be positive")
    powers = np.exp(-np.arange(n_taps) / decay)
    return PowerDelayProfile(tap_powers=powers / powers.sum())


def draw_channel(pdp: PowerDelayProfile, rng: np.random.Generator) -> np.ndarray:
    """One realization of circularly-symmetric Gaussian taps.

    ``taps[l] ~ CN(0, tap_powers[l])`` so the expected total power is 1.
    """
    scale = np.sqrt(pdp.tap_powers / 2.0)
    return scale * (rng.standard_normal(pdp.n_taps)
                    + 1j * rng.standard_normal(pdp.n_taps))


def draw_correlated(h_ab: np.ndarray, pdp: PowerDelayProfile, rho: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Channel correlated with ``h_ab`` at complex correlation ``rho``.

    Returns ``rho * h_ab + sqrt(1 - rho^2) * h_e`` with ``h_e`` an independent
    draw from the same profile, which preserves the per-tap marginal variance.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1], got %r" % (rho,))
    h_e = draw_channel(pdp, rng)
    return rho * np.asarray(h_ab, dtype=complex) + np.sqrt(1.0 - rho * rho) * h_e


def cfr_of(taps, n: int) -> np.ndarray:
    """N-point DFT of the zero-padded taps (the per-subcarrier response)."""
    t = np.asarray(taps, dtype=complex)
    if t.ndim != 1:
        raise ValueError("taps must be a 1-D vector")
    if t.size > n:
        raise ValueError("tap count %d exceeds grid size %d" % (t.size, n))
    padded = np.zeros(n, dtype=complex)
    padded[: t.size] = t
    return numerics.fft(padded)
