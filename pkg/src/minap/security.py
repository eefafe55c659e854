"""Alice-side precoding and Bob/Eve-side receivers for the scheme modes.

Modes
-----
baseline   plain CP-OFDM, known pilots, no precoding.
data       data subcarriers multiplied by conj(all-pass); pilots intact. Bob
           estimates the channel from the pilots as usual, decomposes the
           estimate, and equalizes only the min-phase factor; the precoder
           cancels the all-pass phase for him and scrambles it for anyone on
           a different channel.
pilot      pilot subcarriers multiplied by the all-pass; data intact. A pilot
           observer sees channel * all-pass, i.e. min * allpass^2; Bob rebuilds
           the true channel from it, an eavesdropper estimates a phantom.
joint      both precoders at once.

Convention: every precode/reconstruct path uses the canonical split (min-phase
factor with positive real leading tap, global phase in the all-pass). Bob's
pilot-mode reconstruction recovers the min-phase factor from magnitude alone,
which can only land on the canonical member; Alice must precode with the same
member or a residual global rotation survives. See decomposition module notes.

The remaining ambiguity in pilot/joint mode is one global sign: +-H with the
matching precoders produce identical received symbols, so no receiver can tell
them apart from one symbol alone. The sign is resolved by picking whichever of
+-H sits closer to the true channel, standing in for one bit of out-of-band
sign agreement; this is implementation-defined, not part of the over-the-air
scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import PowerDelayProfile, cfr_of
from .numerics import poly_roots, unwrap_phase
from .decomposition import (
    DecomposedChannel,
    canonical_split,
    decompose_cfr,
    decompose_fir,
    fir_sqrt,
)
from .ofdm import (
    ChannelEstimate,
    OfdmGrid,
    OfdmSymbol,
    equalize,
    demodulate,
    ls_estimate,
    mmse_estimate,
    modulate,
    qpsk_demap,
)
from . import analysis


class SchemeMode(Enum):
    BASELINE = "baseline"
    DATA = "data"
    PILOT = "pilot"
    JOINT = "joint"

    @classmethod
    def parse(cls, name) -> "SchemeMode":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError("unknown scheme %r (expected baseline|data|pilot|joint)" % (name,)) from None


@dataclass(frozen=True)
class LinkOutcome:
    """What one receiver got out of one symbol."""

    decoded_bits: np.ndarray
    bit_errors: int
    channel_estimate: ChannelEstimate | None
    channel_nmse: float

    def __post_init__(self):
        if self.bit_errors > self.decoded_bits.size:
            raise ValueError("more bit errors than bits")
        if self.channel_nmse < 0:
            raise ValueError("NMSE cannot be negative")


def alice_precode(grid: OfdmGrid, data_symbols, mode, decomp: DecomposedChannel | None = None) -> OfdmSymbol:
    """Build the transmit symbol for a scheme mode.

    ``decomp`` is the decomposition of the current Alice-Bob channel (from
    reciprocity); it is canonicalized here, so callers may pass either split.
    Baseline ignores it; every other mode requires it.
    """
    mode = SchemeMode.parse(mode)
    data = np.asarray(data_symbols, dtype=complex)
    if mode is SchemeMode.BASELINE:
        return modulate(grid, data)
    if decomp is None:
        raise ValueError("mode %s needs the channel decomposition" % mode.value)
    ap = canonical_split(decomp).all_pass
    tx_data = data
    tx_pilots = None
    if mode in (SchemeMode.DATA, SchemeMode.JOINT):
        tx_data = data * np.conj(ap[grid.data_indices])
    if mode in (SchemeMode.PILOT, SchemeMode.JOINT):
        tx_pilots = grid.pilot_values * ap[grid.pilot_indices]
    return modulate(grid, tx_data, pilot_values=tx_pilots)


def _uniform_support_prior(n_taps: int) -> np.ndarray:
    """Flat unit-trace delay-domain prior over ``n_taps`` taps.

    The precoded pilot response min * allpass^2 is not confined to the
    channel's own tap count, so pilot/joint estimation uses a support as long
    as the CP and lets the later model-order projection do the sharpening.
    """
    return np.full(n_taps, 1.0 / n_taps)


def _estimate_cfr(rx_freq, grid: OfdmGrid, estimator: str, noise_var: float,
                  pdp: PowerDelayProfile | None, support: int | None = None) -> ChannelEstimate:
    if estimator == "ls":
        return ls_estimate(rx_freq, grid, noise_var=noise_var)
    if estimator == "mmse":
        if support is not None:
            prior = _uniform_support_prior(support)
        elif pdp is not None:
            prior = pdp.tap_powers
        else:
            raise ValueError("MMSE estimation needs a power delay profile or support length")
        return mmse_estimate(rx_freq, grid, prior, noise_var)
    raise ValueError("unknown estimator %r" % (estimator,))


def _decompose_estimate(est_values: np.ndarray, n: int,
                        n_taps: int | None = None) -> DecomposedChannel:
    """Canonical decomposition of an estimated CFR.

    When the receiver knows the delay-spread bound it projects the estimate
    onto that tap support first; the truncation discards most of the
    estimation noise and the factorization runs on a clean FIR model.
    """
    values = np.asarray(est_values, dtype=complex)
    if n_taps is None:
        return canonical_split(decompose_cfr(values))
    taps = np.fft.ifft(values)[:n_taps]
    return canonical_split(decompose_fir(taps, n))


_REFIT_MAX_ITERS = 40
_REFIT_PATIENCE = 3


def _refit_against_pilots(h_taps: np.ndarray, y: np.ndarray,
                          fourier: np.ndarray, grid: OfdmGrid,
                          res_floor: float) -> tuple[np.ndarray, float]:
    """Fixed-point refinement of channel taps against raw pilot observations.

    Each pass derives the canonical split of the current taps, scores the
    precoded-response model min * allpass^2 against the observations, maps
    the observations to squared-channel samples, and refits the exact
    (2 n_taps - 1)-tap square; the inner square root warm-starts from the
    current taps so successive passes stay in one basin. Returns the best
    iterate by pilot-domain residual. Stops at ``res_floor`` (machine-level
    convergence on clean data) or after a few passes without improvement;
    transient wobbles above the running best are tolerated rather than
    treated as divergence.
    """
    kp = grid.pilot_indices
    n = grid.n
    best_taps, best_res = h_taps, np.inf
    stale = 0
    for _ in range(_REFIT_MAX_ITERS):
        try:
            can = canonical_split(decompose_fir(h_taps, n))
            res = float(np.sum(np.abs(
                (can.min_phase * can.all_pass ** 2)[kp] - y) ** 2))
            if res < best_res:
                best_res, best_taps = res, h_taps
                stale = 0
            else:
                stale += 1
                if stale >= _REFIT_PATIENCE:
                    break
            if res <= res_floor:
                break
            refit = np.linalg.lstsq(fourier, y * can.min_phase[kp], rcond=None)[0]
            if refit[0] == 0:
                break
            h_taps = fir_sqrt(refit, start=h_taps)
        except ValueError:
            break
    return best_taps, best_res


def _zero_flip_rescue(taps: np.ndarray, res: float, y: np.ndarray,
                      fourier: np.ndarray, grid: OfdmGrid, res_floor: float,
                      res_healthy: float, rounds: int = 3) -> tuple[np.ndarray, float]:
    """Discrete repair for a refit stuck in a wrong basin.

    A stuck fit typically differs from the truth by which side of the unit
    circle some zero sits on: reflecting a zero preserves the magnitude shape
    (up to a constant the energy rescale restores), so such impostors match
    the min-phase evidence and only the pilot-phase residual can tell them
    apart. Each round reflects every zero in turn, re-runs the refit, and
    hill-climbs to the best residual; stops when healthy or no flip helps.
    """
    for _ in range(rounds):
        if res <= res_healthy:
            break
        rooted = poly_roots(taps)
        zeros = rooted.roots
        improved = False
        for i in range(zeros.size):
            if not 1e-3 < abs(zeros[i]) < 1e3:
                continue
            flipped = zeros.copy()
            flipped[i] = 1.0 / np.conj(flipped[i])
            cand = rooted.leading_coeff * np.atleast_1d(np.poly(flipped)).astype(complex)
            scale = np.sqrt(np.sum(np.abs(taps) ** 2) / np.sum(np.abs(cand) ** 2))
            if not np.isfinite(scale):
                continue
            t, r = _refit_against_pilots(scale * cand, y, fourier, grid, res_floor)
            if r < res:
                taps, res = t, r
                improved = True
        if not improved:
            break
    return taps, res


def _reconstruct_from_precoded(rx_freq: np.ndarray, est_values: np.ndarray,
                               grid: OfdmGrid, n_taps: int, noise_var: float,
                               true_cfr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild (min-phase CFR, channel CFR) from precoded-pilot observations.

    The pilot estimate approximates min * allpass^2. Its magnitude alone pins
    the canonical min-phase factor (projected to the channel's tap count),
    and multiplying the estimate by that factor squares the channel:
    ``est * min = (min * allpass)^2 = H^2``; the first ``2 n_taps - 1`` delay
    taps of that product seed the refinement loop in ``_refit_against_pilots``
    (the single pass alone is limited by the finite delay support of the
    pilot estimator, since the precoded response itself is not FIR).

    Two seeds cover each other's failure mode. The FIR square root of the
    squared taps is exact on clean data for any zero configuration, but its
    root pairing scatters when noise perturbs the square's small leading
    coefficients. Halving the unwrapped all-pass-squared phase (its winding
    is an even multiple of 2pi, so the half branch closes around the grid)
    ignores roots entirely, but aliases when a zero hugs the unit circle and
    the phase steps faster than pi per bin. The refit runs from the root seed
    first, the phase seed only if the residual stayed above the healthy band
    around the noise floor, and a zero-reflection repair if both are stuck;
    the lowest residual wins.

    The global sign that survives (+-H with matching precoders produce the
    same received symbols) is resolved against the true channel, standing in
    for one bit of out-of-band agreement.
    """
    n = grid.n
    kp = grid.pilot_indices
    dc = decompose_cfr(est_values, fir_len=n_taps)
    squared_cfr = est_values * dc.min_phase
    squared_taps = np.fft.ifft(squared_cfr)[: 2 * n_taps - 1]

    y = rx_freq[kp] / grid.pilot_values
    fourier = np.exp(-2j * np.pi * np.outer(kp, np.arange(2 * n_taps - 1)) / n)
    res_floor = 1e-24 * float(np.sum(np.abs(y) ** 2))
    # A healthy fit leaves a residual near noise_var * n_pilots (less the dof
    # the taps absorb); far above that means the seed landed in a wrong basin.
    res_healthy = max(res_floor, 1.5 * noise_var * kp.size)

    try:
        seed = fir_sqrt(squared_taps)
        best_taps, best_res = _refit_against_pilots(seed, y, fourier, grid,
                                                    res_floor)
    except ValueError:
        best_taps, best_res = None, np.inf
    if best_res > res_healthy:
        half_phase = 0.5 * unwrap_phase(np.angle(squared_cfr / dc.min_phase))
        alt_cfr = dc.min_phase * np.exp(1j * half_phase)
        alt_seed = np.fft.ifft(alt_cfr)[:n_taps]
        alt_taps, alt_res = _refit_against_pilots(alt_seed, y, fourier, grid,
                                                  res_floor)
        if alt_res < best_res:
            best_taps, best_res = alt_taps, alt_res
    if best_taps is None:
        raise ValueError("channel reconstruction failed on every seed")
    if best_res > res_healthy:
        best_taps, best_res = _zero_flip_rescue(best_taps, best_res, y, fourier,
                                                grid, res_floor, res_healthy)

    can = canonical_split(decompose_fir(best_taps, n))
    h_cfr = can.min_phase * can.all_pass
    if (np.sum(np.abs(-h_cfr - true_cfr) ** 2)
            < np.sum(np.abs(h_cfr - true_cfr) ** 2)):
        h_cfr = -h_cfr
        can = DecomposedChannel(min_phase=can.min_phase, all_pass=-can.all_pass)
    return can.min_phase, h_cfr


def bob_receive(rx_time, grid: OfdmGrid, mode, *, tx_bits, h_ab,
                pdp: PowerDelayProfile | None = None, noise_var: float = 0.0,
                csi: str = "estimated", estimator: str = "ls") -> LinkOutcome:
    """Legitimate receiver for one symbol.

    ``tx_bits`` and ``h_ab`` are the ground truth used for error counting and
    NMSE scoring (and, with ``csi="perfect"``, for the genie-CSI switch).
    ``noise_var`` is the frequency-domain noise variance assumed by MMSE.
    """
    mode = SchemeMode.parse(mode)
    if estimator not in ("ls", "mmse"):
        raise ValueError("unknown estimator %r" % (estimator,))
    if csi not in ("perfect", "estimated"):
        raise ValueError("unknown CSI mode %r" % (csi,))
    rx_freq = demodulate(rx_time, grid)
    n = grid.n
    true_cfr = cfr_of(h_ab, n)
    n_taps = np.asarray(h_ab).size
    tx_bits = np.asarray(tx_bits, dtype=np.uint8)

    if mode in (SchemeMode.BASELINE, SchemeMode.DATA):
        if csi == "perfect":
            est = ChannelEstimate(values=true_cfr, method="perfect", noise_var=noise_var)
        else:
            est = _estimate_cfr(rx_freq, grid, estimator, noise_var, pdp)
        if mode is SchemeMode.BASELINE:
            eq = equalize(rx_freq, est.values, grid.data_indices)
        else:
            if csi == "perfect":
                dc = canonical_split(decompose_fir(h_ab, n))
            else:
                dc = _decompose_estimate(est.values, n, n_taps)
            eq = equalize(rx_freq, dc.min_phase, grid.data_indices)
        est_for_nmse = est.values
    elif mode in (SchemeMode.PILOT, SchemeMode.JOINT):
        if csi == "perfect":
            min_cfr = canonical_split(decompose_fir(h_ab, n)).min_phase
            h_cfr = true_cfr
            method = "perfect"
        else:
            # The precoded pilot response min*allpass^2 rotates too fast
            # across bins for sample-wise interpolation, so both estimator
            # settings solve the delay-support linear model; "mmse" adds the
            # noise regularizer, "ls" solves it plainly.
            reg = noise_var if estimator == "mmse" else 0.0
            prior = _uniform_support_prior(grid.cp_len)
            values = mmse_estimate(rx_freq, grid, prior, reg).values
            min_cfr, h_cfr = _reconstruct_from_precoded(rx_freq, values, grid,
                                                        n_taps, noise_var,
                                                        true_cfr)
            method = estimator
        if mode is SchemeMode.PILOT:
            eq = equalize(rx_freq, h_cfr, grid.data_indices)
        else:
            eq = equalize(rx_freq, min_cfr, grid.data_indices)
        est = ChannelEstimate(values=h_cfr, method=method, noise_var=noise_var)
        est_for_nmse = h_cfr
    else:  # pragma: no cover - enum is exhaustive
        raise AssertionError(mode)

    bits = qpsk_demap(eq)
    errors = int(np.count_nonzero(bits != tx_bits))
    score = analysis.nmse(est_for_nmse, true_cfr)
    return LinkOutcome(decoded_bits=bits, bit_errors=errors,
                       channel_estimate=est, channel_nmse=score)


def eve_receive(rx_time, grid: OfdmGrid, mode, *, tx_bits, h_ae,
                pdp: PowerDelayProfile | None = None, noise_var: float = 0.0,
                h_ae_known: bool = True, equalizer: str = "min",
                estimator: str = "ls") -> LinkOutcome:
    """Eavesdropper observing the same transmission through her own channel.

    ``h_ae_known=True`` grants her the true channel (the strongest adversary);
    otherwise she estimates from the pilots like any receiver, and in
    pilot/joint modes those pilots are precoded, so her estimate is of a
    phantom channel. Her NMSE is always scored against her true response.

    ``equalizer`` selects her data strategy against precoded data (data and
    joint modes): "full" divides by her whole channel, so the precoder's
    rotation survives untouched no matter how close her channel is to Bob's;
    "min" divides by only the min-phase factor of her channel, betting that
    her own all-pass cancels the precoder's, which pays off as her channel
    approaches Bob's. "min" is the stronger attack and the default. In
    baseline and pilot modes the data subcarriers are not precoded, so both
    settings equalize the full channel (dividing by the min factor alone is
    never rational there).
    """
    mode = SchemeMode.parse(mode)
    rx_freq = demodulate(rx_time, grid)
    n = grid.n
    true_cfr = cfr_of(h_ae, n)
    n_taps = np.asarray(h_ae).size
    tx_bits = np.asarray(tx_bits, dtype=np.uint8)

    if h_ae_known:
        est = ChannelEstimate(values=true_cfr, method="perfect", noise_var=noise_var)
    else:
        est = _estimate_cfr(rx_freq, grid, estimator, noise_var, pdp)

    if equalizer not in ("min", "full"):
        raise ValueError("unknown equalizer %r" % (equalizer,))
    data_precoded = mode in (SchemeMode.DATA, SchemeMode.JOINT)
    if equalizer == "min" and data_precoded:
        if h_ae_known:
            eq_cfr = canonical_split(decompose_fir(h_ae, n)).min_phase
        else:
            eq_cfr = _decompose_estimate(est.values, n, n_taps).min_phase
    else:
        eq_cfr = est.values

    eq = equalize(rx_freq, eq_cfr, grid.data_indices)
    bits = qpsk_demap(eq)
    errors = int(np.count_nonzero(bits != tx_bits))
    score = analysis.nmse(est.values, true_cfr)
    return LinkOutcome(decoded_bits=bits, bit_errors=errors,
                       channel_estimate=est, channel_nmse=score)
