"""Closed-form reference curves and scoring metrics.

The error-probability expressions follow the classical one-shot matched-filter
analysis of QPSK over a Rayleigh fading channel with possibly imperfect
channel knowledge at the receiver: the decision variable conditioned on the
estimate is Gaussian, and averaging the conditional error rate over the joint
(channel, estimate) distribution gives the two-term expression implemented in
``bep_imperfect``. ``gamma_factor`` and ``rho_min`` translate a correlation
between two channels into the equivalent SNR penalty and the residual
correlation of their min-phase factors.

All SNR arguments are per-bit and linear (not dB) unless the name says
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BepParams:
    """Inputs for the imperfect-estimate bit error probability.

    ``rho1`` is the in-phase part of the channel/estimate correlation,
    ``rho2`` the quadrature part; a perfect estimate is (1, 0).
    """

    gamma_bar: float
    rho1: float
    rho2: float = 0.0

    def __post_init__(self):
        if not self.gamma_bar > 0:
            raise ValueError("mean SNR must be positive")
        if not (0.0 <= self.rho1 <= 1.0 and 0.0 <= self.rho2 <= 1.0):
            raise ValueError("correlation coefficients must lie in [0, 1]")
        if self.rho1 ** 2 + self.rho2 ** 2 > 1.0 + 1e-12:
            raise ValueError("correlation magnitude exceeds 1")


def bep_perfect(gamma_bar) -> np.ndarray | float:
    """QPSK over Rayleigh fading with exact channel knowledge."""
    g = np.asarray(gamma_bar, dtype=float)
    if np.any(g <= 0):
        raise ValueError("mean SNR must be positive")
    out = 0.5 * (1.0 - 1.0 / np.sqrt(1.0 + 1.0 / g))
    return out if out.ndim else float(out)


def bep_imperfect(params: BepParams) -> float:
    """QPSK over Rayleigh fading, equalized with a correlated estimate.

    With estimate correlation (rho1, rho2) and mean per-bit SNR g, the two
    bit rails of the QPSK symbol see error rates

        P_I = 1/2 * [ 1 - s / sqrt(1 + 1/(2g) - d^2) ]
        P_Q = 1/2 * [ 1 - d / sqrt(1 + 1/(2g) - s^2) ]

    with s = (rho1 + rho2)/sqrt(2) and d = (rho1 - rho2)/sqrt(2); the bit
    error probability is their average. At (rho1, rho2) = (1, 0) the rails
    coincide and the perfect-knowledge expression is recovered.
    """
    g = params.gamma_bar
    s = (params.rho1 + params.rho2) / np.sqrt(2.0)
    d = (params.rho1 - params.rho2) / np.sqrt(2.0)
    base = 1.0 + 1.0 / (2.0 * g)
    term_s = 0.5 * s / np.sqrt(base - d * d)
    term_d = 0.5 * d / np.sqrt(base - s * s)
    return float(0.5 * (1.0 - term_s - term_d))


def bep_correlated(gamma_bar, rho) -> np.ndarray | float:
    """QPSK error rate when equalizing with a channel of correlation rho.

    This is the observer floor model: at high SNR the rate tends to
    (1 - rho)/2 instead of zero.
    """
    g = np.asarray(gamma_bar, dtype=float)
    if np.any(g <= 0):
        raise ValueError("mean SNR must be positive")
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [0, 1]")
    out = 0.5 * (1.0 - rho / np.sqrt(1.0 + 1.0 / g))
    return out if out.ndim else float(out)


def gamma_factor(rho) -> np.ndarray | float:
    """SNR penalty factor 1 + sqrt(1 - rho^2) of the min-phase-only observer."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > 1):
        raise ValueError("correlation must lie in [0, 1]")
    out = 1.0 + np.sqrt(1.0 - rho * rho)
    return out if out.ndim else float(out)


def rho_min(rho) -> np.ndarray | float:
    """Correlation of the min-phase factors given full-channel correlation rho.

    rho / (1 + sqrt(1 - rho^2)); equals rho / gamma_factor(rho). Monotone,
    0 at 0 and 1 at 1, always at or below rho.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > 1):
        raise ValueError("correlation must lie in [0, 1]")
    out = rho / (1.0 + np.sqrt(1.0 - rho * rho))
    return out if out.ndim else float(out)


def nmse(estimate, truth) -> float:
    """Normalized mean square error sum|e - t|^2 / sum|t|^2."""
    e = np.asarray(estimate, dtype=complex).ravel()
    t = np.asarray(truth, dtype=complex).ravel()
    if e.shape != t.shape:
        raise ValueError("estimate and truth must have the same length")
    denom = float(np.sum(np.abs(t) ** 2))
    if denom == 0.0:
        raise ValueError("truth has zero power")
    return float(np.sum(np.abs(e - t) ** 2) / denom)


def papr(time_signal) -> float:
    """Peak-to-average power ratio of one time-domain symbol, in dB."""
    x = np.asarray(time_signal, dtype=complex).ravel()
    if x.size == 0:
        raise ValueError("empty signal")
    p = np.abs(x) ** 2
    mean = float(np.mean(p))
    if mean == 0.0:
        raise ValueError("signal has zero power")
    return float(10.0 * np.log10(np.max(p) / mean))


@dataclass(frozen=True)
class CcdfCurve:
    """Empirical complementary CDF over a sample of scalar values (dB)."""

    thresholds: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        if self.thresholds.shape != self.probabilities.shape:
            raise ValueError("thresholds and probabilities must align")
        if np.any(np.diff(self.thresholds) < 0):
            raise ValueError("thresholds must be nondecreasing")
        p = self.probabilities
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if np.any(np.diff(p) > 1e-15):
            raise ValueError("CCDF must be nonincreasing")


def ccdf(samples, thresholds=None) -> CcdfCurve:
    """P(X > threshold) on a threshold grid (default: the sorted samples)."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("no samples")
    if thresholds is None:
        thresholds = x
    else:
        thresholds = np.asarray(thresholds, dtype=float).ravel()
        if np.any(np.diff(thresholds) < 0):
            raise ValueError("thresholds must be nondecreasing")
    exceed = x.size - np.searchsorted(x, thresholds, side="right")
    return CcdfCurve(thresholds=thresholds.copy(), probabilities=exceed / x.size)


def empirical_min_phase_correlation(pairs, min_pairs: int = 1000,
                                    per_subcarrier: bool = False):
    """Pooled sample correlation magnitude between paired frequency responses.

    ``pairs`` is an iterable of (a, b) complex vectors, typically min-phase
    CFRs of channel draws at a fixed correlation. Each bin is centered by its
    across-pair sample mean (the magnitude-derived min-phase factor has a
    nonzero ensemble mean that would otherwise masquerade as correlation) and
    the centered cross/auto moments are pooled over bins:

        |sum_k cross_k| / sqrt(sum_k var_a_k * sum_k var_b_k)

    With ``per_subcarrier=True`` a per-bin correlation vector comes back
    instead, for diagnostics.
    """
    sum_a = None
    sum_b = None
    pow_a = None
    pow_b = None
    cross = None
    count = 0
    for a, b in pairs:
        a = np.asarray(a, dtype=complex).ravel()
        b = np.asarray(b, dtype=complex).ravel()
        if a.shape != b.shape:
            raise ValueError("paired vectors must have the same length")
        if sum_a is None:
            sum_a = np.zeros(a.shape, dtype=complex)
            sum_b = np.zeros(a.shape, dtype=complex)
            pow_a = np.zeros(a.shape)
            pow_b = np.zeros(a.shape)
            cross = np.zeros(a.shape, dtype=complex)
        elif sum_a.shape != a.shape:
            raise ValueError("all pairs must have the same length")
        sum_a += a
        sum_b += b
        pow_a += np.abs(a) ** 2
        pow_b += np.abs(b) ** 2
        cross += a * np.conj(b)
        count += 1
    if count < min_pairs:
        raise ValueError("need at least %d pairs, got %d" % (min_pairs, count))
    cross_c = cross - sum_a * np.conj(sum_b) / count
    var_a = pow_a - np.abs(sum_a) ** 2 / count
    var_b = pow_b - np.abs(sum_b) ** 2 / count
    if per_subcarrier:
        denom = np.sqrt(np.maximum(var_a, 0.0) * np.maximum(var_b, 0.0))
        if np.any(denom == 0.0):
            raise ValueError("zero-variance subcarrier")
        return np.abs(cross_c) / denom
    va = float(np.sum(var_a))
    vb = float(np.sum(var_b))
    if va <= 0.0 or vb <= 0.0:
        raise ValueError("zero-variance input")
    return float(np.abs(np.sum(cross_c)) / np.sqrt(va * vb))
