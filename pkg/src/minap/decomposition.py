"""Minimum-phase / all-pass channel factorization.

A causal FIR channel H(z) factors as H_min(z) * H_ap(z) where H_min collects
the zeros inside the unit circle (plus unit-circle reflections of the outside
ones) and H_ap is a product of first-order Blaschke sections
``(z^{-1} - p) / (1 - conj(p) z^{-1})``, one per outside zero. On the
frequency grid |H_min| equals |H| and |H_ap| is identically 1.

Two sampled routes exist alongside the root route: an exact factorization of
the squared magnitude when it is consistent with a short FIR (lag-limited
autocorrelation), and the cepstral reconstruction from ``numerics`` otherwise.

Split conventions matter here. ``decompose_fir`` keeps the full complex gain
in the min-phase factor (the literal product form). The sampled routes, and
``canonical_split``, instead normalize the min-phase factor to a positive real
leading tap and push the leftover unit factor into the all-pass. Any receiver
that rebuilds the min-phase factor from magnitude alone lands on the canonical
member, so transmit-side precoding must use the canonical all-pass or a global
rotation survives the round trip; the security module relies on this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .channel import cfr_of
from .numerics import poly_roots

UNIT_CIRCLE_TOL = 1e-6
ALLPASS_MODULUS_TOL = 0.05


@dataclass(frozen=True)
class DecomposedChannel:
    """Minimum-phase and all-pass CFRs whose product is the source CFR."""

    min_phase: np.ndarray
    all_pass: np.ndarray

    def __post_init__(self):
        mp = np.asarray(self.min_phase, dtype=complex)
        ap = np.asarray(self.all_pass, dtype=complex)
        if mp.shape != ap.shape or mp.ndim != 1:
            raise ValueError("component CFRs must be 1-D and the same length")
        object.__setattr__(self, "min_phase", mp)
        object.__setattr__(self, "all_pass", ap)

    @property
    def cfr(self) -> np.ndarray:
        return self.min_phase * self.all_pass


def blaschke_cfr(poles, n: int) -> np.ndarray:
    """Product of Blaschke sections sampled on the N-grid.

    ``poles`` are the z-plane pole locations (inside the unit circle), one per
    section; the section zero sits at the conjugate reciprocal 1/conj(p).
    """
    w = np.exp(-2j * np.pi * np.arange(n) / n)  # z^{-1} around the circle
    out = np.ones(n, dtype=complex)
    for p in np.asarray(poles, dtype=complex):
        out *= (w - p) / (1.0 - np.conj(p) * w)
    return out


def decompose_fir(taps, n: int, circle_tol: float = UNIT_CIRCLE_TOL) -> DecomposedChannel:
    """Root-route factorization of FIR taps on an N-point grid.

    Zeros with ``|z| <= 1 + circle_tol`` stay in the min-phase factor; each
    zero strictly outside becomes a Blaschke section with pole ``1/z`` and a
    reflected min-phase zero at ``conj(1/z)``. The complex leading gain stays
    in the min-phase factor on this route. Exact leading-zero taps (pure
    delays) are all-pass and are factored out as ``e^{-j omega d}``.
    """
    t = np.asarray(taps, dtype=complex)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("taps must be a nonempty 1-D vector")
    if not np.any(t != 0):
        raise ValueError("all-zero taps")
    delay = int(np.argmax(t != 0))
    t = t[delay:]

    rooted = poly_roots(t)
    zeros = rooted.roots
    radius = np.abs(zeros)
    outside = zeros[radius > 1.0 + circle_tol]
    inside = zeros[radius <= 1.0 + circle_tol]

    poles = 1.0 / outside
    min_zeros = np.concatenate([inside, np.conj(poles)])
    gain = rooted.leading_coeff * np.prod(-outside) if outside.size else rooted.leading_coeff
    if min_zeros.size:
        min_taps = gain * np.atleast_1d(np.poly(min_zeros)).astype(complex)
    else:
        min_taps = np.array([gain], dtype=complex)

    all_pass = blaschke_cfr(poles, n)
    if delay:
        all_pass = all_pass * np.exp(-2j * np.pi * delay * np.arange(n) / n)
    return DecomposedChannel(min_phase=cfr_of(min_taps, n), all_pass=all_pass)


def canonical_split(dc: DecomposedChannel) -> DecomposedChannel:
    """Move the min-phase factor's global phase into the all-pass factor.

    Afterwards the leading delay tap of the min-phase part is positive real,
    the one member of the family a magnitude-only reconstruction can find.
    """
    lead = np.mean(dc.min_phase)  # tap 0 of the implied FIR
    mag = abs(lead)
    if mag == 0:
        raise ValueError("min-phase factor has a vanishing leading tap")
    unit = lead / mag
    return DecomposedChannel(min_phase=dc.min_phase / unit,
                             all_pass=dc.all_pass * unit)


def minimum_phase_taps_from_power(power, fir_len: int) -> np.ndarray:
    """Exact min-phase FIR taps whose |CFR|^2 matches a sampled power spectrum.

    Valid when the power spectrum is the squared magnitude of an FIR of the
    given length, so its autocorrelation is limited to lags below ``fir_len``;
    content at longer lags is discarded, which doubles as a model-order
    projection when the input is a noisy estimate. The returned taps have a
    positive real leading tap (canonical orientation).

    The factorization takes the roots of the lag-limited autocorrelation
    polynomial; conjugate-reciprocal root pairs are split by keeping the
    ``fir_len - 1`` largest in |w| (w-plane outside maps to z-plane inside
    under z = 1/w), which keeps the output length fixed even when truncation
    noise nudges a pair onto the circle.
    """
    p = np.asarray(power, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("power spectrum must be a nonempty 1-D vector")
    if np.any(p < 0):
        raise ValueError("negative power sample")
    mean_power = p.mean()
    if not mean_power > 0:
        raise ValueError("all-zero power spectrum")
    n = p.size
    order = fir_len - 1
    if fir_len < 1 or 2 * order >= n:
        raise ValueError("fir_len %d does not fit a length-%d grid" % (fir_len, n))
    if order == 0:
        return np.array([np.sqrt(mean_power)], dtype=complex)

    ac = np.fft.ifft(p.astype(complex))
    laurent = np.concatenate([ac[n - order :], ac[: order + 1]])  # lags -order..order
    wroots = np.roots(laurent[::-1])
    by_radius = np.argsort(np.abs(wroots))[::-1]
    z_zeros = 1.0 / wroots[by_radius[:order]]
    min_taps = np.atleast_1d(np.poly(z_zeros)).astype(complex)
    gain = np.sqrt(mean_power / np.mean(np.abs(np.fft.fft(min_taps, n)) ** 2))
    return gain * min_taps


def _conv_matrix(h: np.ndarray, cols: int) -> np.ndarray:
    """Convolution by ``h`` as a (h.size + cols - 1, cols) matrix."""
    out = np.zeros((h.size + cols - 1, cols), dtype=complex)
    for j in range(cols):
        out[j : j + h.size, j] = h
    return out


def _refine_sqrt(h: np.ndarray, s: np.ndarray, iters: int = 10) -> tuple[np.ndarray, float]:
    """Gauss-Newton polish of ``h`` against ``conv(h, h) = s``.

    Each step solves the exact linearized least-squares problem (the Jacobian
    of the self-convolution is 2x the convolution matrix). Returns the best
    iterate by residual, so a converged input passes through untouched.
    """
    res = np.convolve(h, h) - s
    best = h
    best_rr = float(np.vdot(res, res).real)
    for _ in range(iters):
        jac = 2.0 * _conv_matrix(h, h.size)
        delta = np.linalg.lstsq(jac, -res, rcond=None)[0]
        h = h + delta
        res = np.convolve(h, h) - s
        rr = float(np.vdot(res, res).real)
        if rr < best_rr:
            best_rr = rr
            best = h
        if np.linalg.norm(delta) <= 1e-14 * np.linalg.norm(h):
            break
    return best, best_rr


def _series_sqrt(s: np.ndarray, length: int) -> np.ndarray:
    """Formal power-series square root: triangular recursion from s[0]."""
    h = np.zeros(length, dtype=complex)
    h[0] = np.sqrt(s[0])
    for i in range(1, length):
        acc = s[i] - np.dot(h[1:i], h[i - 1 : 0 : -1])
        h[i] = acc / (2.0 * h[0])
    return h


def fir_sqrt(sq_taps, start=None) -> np.ndarray:
    """FIR square root of a self-convolved tap vector, up to a global sign.

    The roots of ``h * h`` (polynomial square) come in coincident pairs;
    greedy nearest-neighbor pairing collapses each pair to its centroid and a
    least-squares fit over the re-squared polynomial sets the gain. That
    candidate, together with a power-series start (robust exactly where root
    pairing is fragile and vice versa), is polished by Gauss-Newton on the
    self-convolution residual and the lower-residual result wins. Exact
    squares come back exact; the global +-1 ambiguity is the caller's.

    An explicit ``start`` replaces the internally built candidates: only that
    guess is polished. Iterative callers use it to keep successive square
    roots in one basin (and on one sign) instead of re-deriving the pairing
    from scratch on every pass.
    """
    s = np.asarray(sq_taps, dtype=complex)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("squared taps must be a nonempty 1-D vector")
    if s.size % 2 == 0:
        raise ValueError("a squared FIR has odd length, got %d" % s.size)
    if s[0] == 0:
        raise ValueError("leading squared tap is zero")
    if s.size == 1:
        return np.array([np.sqrt(s[0])], dtype=complex)
    length = (s.size + 1) // 2

    if start is not None:
        guess = np.asarray(start, dtype=complex)
        if guess.shape != (length,):
            raise ValueError("start must have length %d" % length)
        return _refine_sqrt(guess, s)[0]

    roots = list(np.roots(s))
    centers = []
    while len(roots) >= 2:
        a = roots.pop()
        gaps = [abs(a - b) for b in roots]
        b = roots.pop(int(np.argmin(gaps)))
        centers.append(0.5 * (a + b))
    monic = np.atleast_1d(np.poly(np.asarray(centers, dtype=complex))).astype(complex)
    squared = np.convolve(monic, monic)
    gain_sq = np.vdot(squared, s) / np.vdot(squared, squared)
    starts = [np.sqrt(gain_sq) * monic]

    series = _series_sqrt(s, length)
    if np.all(np.isfinite(series)):
        starts.append(series)

    best = None
    best_rr = np.inf
    for start in starts:
        cand, rr = _refine_sqrt(start, s)
        if rr < best_rr:
            best_rr = rr
            best = cand
    return best


def _fit_allpass_denominator(samples: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Least-squares fit of a monic order-``order`` all-pass through samples.

    An all-pass of order m satisfies ``A(w) D(w) = w^m conj(D(w))`` on the
    unit circle, linear in the denominator coefficients once conjugates are
    real-stacked. Returns (denominator coefficients d_0..d_m with d_0 = 1,
    rms residual of the defining identity).
    """
    n = samples.size
    w = np.exp(-2j * np.pi * np.arange(n) / n)
    wm = w**order
    # unknown d_i (i=1..m): sum_i [ d_i * a w^i - conj(d_i) * w^{m-i} ] = w^m - a
    alpha = samples[:, None] * w[:, None] ** np.arange(1, order + 1)[None, :]
    beta = w[:, None] ** (order - np.arange(1, order + 1))[None, :]
    rhs = wm - samples
    cols_u = alpha - beta
    cols_v = 1j * (alpha + beta)
    mat = np.concatenate(
        [
            np.concatenate([cols_u.real, cols_v.real], axis=1),
            np.concatenate([cols_u.imag, cols_v.imag], axis=1),
        ],
        axis=0,
    )
    vec = np.concatenate([rhs.real, rhs.imag])
    sol, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    d = np.concatenate([[1.0 + 0j], sol[:order] + 1j * sol[order:]])
    poly_vals = (w[:, None] ** np.arange(order + 1)[None, :]) @ d
    residual = samples * poly_vals - wm * np.conj(poly_vals)
    return d, float(np.sqrt(np.mean(np.abs(residual) ** 2)))


def allpass_sqrt(ap_squared, max_order: int | None = None) -> np.ndarray:
    """Spectral square root of an all-pass response, unique up to one sign.

    The input modulus must be within 0.05 of 1 (it is renormalized before
    use); a larger deviation raises ``ValueError("not an all-pass spectrum")``.

    When the input is the square of a finite-order rational all-pass, the
    routine recovers it exactly for any zero configuration: it fits monic
    denominators of increasing even order through the samples (a linear
    system) and halves the first order that fits. The fitted denominator's
    off-circle roots are the doubled section poles (reflected through the
    circle; each appears twice); roots the solver parks on the unit circle
    are degenerate sections that only carry a constant, which is how the fit
    absorbs the global phase a canonical split leaves in the all-pass. Pairing
    the off-circle roots, rebuilding one section per pair, restoring the
    constant from the leftover ratio, and verifying the square gives the
    answer. Phase unwrapping cannot do this in general; at N = 256 a double
    all-pass phase steps by more than pi between adjacent bins whenever a
    section pole hugs the circle, and the halved branch comes out wrong.

    Inputs that are not finite-order all-pass squares (noisy estimates) fall
    back to halving the unwrapped phase from the DC principal value, which is
    reliable exactly where the input phase is smooth (adjacent steps < pi).
    """
    a = np.asarray(ap_squared, dtype=complex)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("expected a nonempty 1-D spectrum")
    mod = np.abs(a)
    if np.max(np.abs(mod - 1.0)) > ALLPASS_MODULUS_TOL:
        raise ValueError("not an all-pass spectrum")
    a = a / mod
    n = a.size

    # order 0: constant spectrum
    mean = a.mean()
    if np.max(np.abs(a - mean)) < 1e-9:
        return np.full(n, np.sqrt(mean), dtype=complex)

    if max_order is None:
        max_order = min(64, n // 2 - 1)
    for order in range(2, max_order + 1, 2):
        d, residual = _fit_allpass_denominator(a, order)
        if residual > 1e-7:
            continue
        wroots = np.roots(d[::-1])
        off_circle = wroots[np.abs(np.abs(wroots) - 1.0) > 1e-6]
        if off_circle.size % 2:
            continue
        roots = list(off_circle)
        poles = []
        while len(roots) >= 2:
            first = roots.pop()
            gaps = [abs(first - other) for other in roots]
            second = roots.pop(int(np.argmin(gaps)))
            poles.append(1.0 / np.conj(0.5 * (first + second)))
        if poles and np.max(np.abs(poles)) >= 1.0:
            continue
        half = blaschke_cfr(poles, n)
        ratio = a / (half * half)
        rot = ratio.mean()
        if abs(rot) < 0.5:
            continue
        rot = rot / abs(rot)
        candidate = np.sqrt(rot) * half
        if np.max(np.abs(candidate * candidate - a)) < 1e-8:
            # doubled roots limit np.roots to ~sqrt(eps); a per-bin Newton
            # step squeezes the rest out. Only safe after verification: from
            # a wrong basin it would converge per bin and mask the mismatch.
            for _ in range(2):
                candidate = 0.5 * (candidate + a / candidate)
            return candidate

    phase = numerics.unwrap_phase(np.angle(a))
    return np.exp(0.5j * phase)


def detect_fir_length(cfr: np.ndarray, rel_tol: float = 1e-10) -> int | None:
    """Smallest FIR length consistent with |cfr|^2, or None.

    Checks how far the autocorrelation of the squared magnitude reaches;
    estimates produced with a finite delay-domain support (true channels,
    Bayesian estimates) are lag-limited, interpolated ones are not.
    """
    mag2 = np.abs(np.asarray(cfr, dtype=complex)) ** 2
    n = mag2.size
    ac = np.fft.ifft(mag2.astype(complex))
    magnitude = np.abs(ac[: n // 2 + 1])
    scale = magnitude[0]
    if not scale > 0:
        return None
    significant = np.nonzero(magnitude > rel_tol * scale)[0]
    order = int(significant[-1])
    if 2 * order >= n:
        return None
    return order + 1


def decompose_cfr(cfr, fir_len: int | None = None) -> DecomposedChannel:
    """Sampled-spectrum factorization: min-phase from |cfr|, all-pass by division.

    When the squared magnitude is consistent with an FIR response (always true
    for exact channels and for delay-domain-constrained estimates) the exact
    factorization runs; ``fir_len`` forces a model order and thereby projects
    a noisy magnitude onto it. Otherwise the cepstral route reconstructs the
    min-phase factor, with its documented near-circle phase tail. On both
    routes the global phase rides in the all-pass factor and the min-phase
    leading tap is positive real.
    """
    values = np.asarray(cfr, dtype=complex)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("CFR must be a nonempty 1-D vector")
    n = values.size
    if fir_len is None:
        fir_len = detect_fir_length(values)
    if fir_len is not None:
        taps = minimum_phase_taps_from_power(np.abs(values) ** 2, fir_len)
        min_cfr = cfr_of(taps, n)
    else:
        min_cfr = numerics.min_phase_from_magnitude(np.abs(values))
    return DecomposedChannel(min_phase=min_cfr, all_pass=values / min_cfr)
