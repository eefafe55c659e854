"""Self-contained complex-vector numerics.

Scaling convention, used by every module in the package: the forward DFT is the
plain unnormalized sum and the inverse carries the 1/N factor. Under it a unit
impulse maps to an all-ones spectrum and Parseval reads
``sum |x|^2 == (1/N) sum |X|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _as_vector(x, dtype=complex) -> np.ndarray:
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D vector, got shape %r" % (arr.shape,))
    return arr


def fft(x, inverse: bool = False) -> np.ndarray:
    """Radix-2 DFT pair. The inverse transform carries the 1/N factor.

    Raises ValueError for lengths that are not a power of two; nothing in the
    simulator needs mixed-radix sizes and rejecting them keeps the power
    accounting unambiguous.
    """
    arr = _as_vector(x)
    n = arr.size
    if n == 0 or (n & (n - 1)) != 0:
        raise ValueError("FFT length must be a power of two, got %d" % n)
    out = np.fft.ifft(arr) if inverse else np.fft.fft(arr)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite values in FFT output")
    return out


@dataclass(frozen=True)
class PolyRoots:
    """Roots of a polynomial in z^{-1}, plus the constant coefficient.

    The product form ``leading_coeff * prod_k (1 - roots[k] * z^{-1})``
    reconstructs the trimmed input coefficients.
    """

    roots: np.ndarray
    leading_coeff: complex

    def coefficients(self) -> np.ndarray:
        """Expand back to coefficients of z^{-l}, constant term first."""
        if self.roots.size == 0:
            expanded = np.ones(1, dtype=complex)
        else:
            expanded = np.atleast_1d(np.poly(self.roots)).astype(complex)
        return self.leading_coeff * expanded


def poly_roots(coeffs) -> PolyRoots:
    """z-plane roots of ``sum_l coeffs[l] z^{-l}`` via the companion matrix.

    Trailing zero coefficients (highest powers of z^{-1}) are trimmed first.
    The constant coefficient must be nonzero after trimming, otherwise the
    product form above cannot represent the input (a pure-delay factor has no
    finite zero). Companion-matrix QR is dependable for the degrees this
    package uses (a few hundred at most); conditioning degrades for tightly
    clustered roots, which callers on estimated data must expect.
    """
    c = _as_vector(coeffs)
    if c.size == 0:
        raise ValueError("empty coefficient vector")
    nonzero = np.nonzero(c)[0]
    if nonzero.size == 0:
        raise ValueError("degenerate polynomial: all coefficients are zero")
    c = c[: nonzero[-1] + 1]
    if c[0] == 0:
        raise ValueError("constant coefficient is zero after trimming")
    if c.size == 1:
        return PolyRoots(roots=np.empty(0, dtype=complex), leading_coeff=complex(c[0]))
    roots = np.roots(c)
    return PolyRoots(roots=np.asarray(roots, dtype=complex), leading_coeff=complex(c[0]))


SPECTRAL_FLOOR_RATIO = 1e-8


def oversample_power_spectrum(power: np.ndarray, factor: int) -> np.ndarray:
    """Trigonometric interpolation of a sampled power spectrum.

    Zero-pads the autocorrelation (inverse DFT of the power samples), which is
    exact when the autocorrelation is lag-limited to under half the grid, i.e.
    when the power spectrum came from a reasonably short FIR response, and a
    smooth approximation otherwise.
    """
    p = np.asarray(power, dtype=float)
    n = p.size
    if factor <= 1:
        return p.copy()
    m = n * factor
    ac = np.fft.ifft(p.astype(complex))
    padded = np.zeros(m, dtype=complex)
    half = n // 2
    if half == 0:
        padded[0] = ac[0]
    else:
        padded[:half] = ac[:half]
        padded[m - half + 1 :] = ac[half + 1 :]
        # split the shared Nyquist lag between the two halves
        padded[half] = 0.5 * ac[half]
        padded[m - half] = 0.5 * ac[half]
    out = np.fft.fft(padded).real
    return out


def min_phase_from_magnitude(mag_spectrum, oversample: int = 32) -> np.ndarray:
    """Minimum-phase CFR with the given magnitude, via the real cepstrum.

    Folding the real cepstrum onto causal quefrencies pins the phase to the
    minimum-phase response sharing the magnitude. The returned vector is
    exactly ``mag * exp(j*phase)``, so the magnitude is preserved to rounding;
    phase accuracy is limited by how close the implied zeros sit to the unit
    circle. Oversampling the log-magnitude (trig interpolation of |H|^2)
    sharpens the phase for nearly-on-circle zeros but cannot remove the tail
    entirely; exact factorization for FIR-consistent spectra lives in
    ``decomposition.minimum_phase_taps_from_power``.

    Magnitude samples below 1e-8 of the peak are floored before the log.
    Negative samples, or an all-zero input, raise ValueError.
    """
    mag = _as_vector(mag_spectrum, dtype=float)
    n = mag.size
    if n == 0 or (n & (n - 1)) != 0:
        raise ValueError("magnitude length must be a power of two, got %d" % n)
    if np.any(mag < 0):
        raise ValueError("negative magnitude sample")
    peak = mag.max()
    if not peak > 0:
        raise ValueError("all-zero magnitude spectrum")
    floor = SPECTRAL_FLOOR_RATIO * peak
    mag = np.maximum(mag, floor)
    if oversample < 1:
        raise ValueError("oversample must be >= 1")

    power = oversample_power_spectrum(mag**2, oversample)
    power = np.maximum(power, floor**2)
    log_mag = 0.5 * np.log(power)
    cep = np.fft.ifft(log_mag)
    m = power.size
    fold = np.zeros(m)
    fold[0] = 1.0
    fold[1 : m // 2] = 2.0
    fold[m // 2] = 1.0
    phase = np.fft.fft(cep * fold).imag
    return mag * np.exp(1j * phase[::oversample])


def unwrap_phase(phases) -> np.ndarray:
    """Remove 2*pi jumps so adjacent differences land in (-pi, pi].

    Standard single-pass rule, no smoothing.
    """
    return np.unwrap(_as_vector(phases, dtype=float))
