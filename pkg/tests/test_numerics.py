import numpy as np
import pytest

from minap import numerics


def dft_direct(x):
    # O(N^2) reference, same convention: forward unnormalized
    x = np.asarray(x, dtype=complex)
    n = x.size
    k = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return w @ x


def test_fft_impulse_maps_to_ones():
    x = np.zeros(8, dtype=complex)
    x[0] = 1.0
    assert np.allclose(numerics.fft(x), np.ones(8), atol=1e-14)


def test_fft_matches_direct_dft():
    rng = np.random.default_rng(3)
    for n in (2, 8, 64):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert np.allclose(numerics.fft(x), dft_direct(x), atol=1e-10)


def test_fft_inverse_round_trip():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    back = numerics.fft(numerics.fft(x), inverse=True)
    assert np.max(np.abs(back - x)) < 1e-12


def test_fft_parseval():
    rng = np.random.default_rng(5)
    x = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    spec = numerics.fft(x)
    lhs = np.sum(np.abs(x) ** 2)
    rhs = np.sum(np.abs(spec) ** 2) / x.size
    assert abs(lhs - rhs) < 1e-9 * lhs


def test_fft_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        numerics.fft(np.ones(12))
    with pytest.raises(ValueError):
        numerics.fft(np.ones(0))


def test_fft_rejects_matrix_input():
    with pytest.raises(ValueError):
        numerics.fft(np.ones((4, 4)))


def test_poly_roots_known_factorization():
    # (1 - 2 z^-1)(1 - 0.5j z^-1) expanded
    a, b = 2.0, 0.5j
    coeffs = np.array([1.0, -(a + b), a * b], dtype=complex)
    rooted = numerics.poly_roots(coeffs)
    assert sorted(np.round(rooted.roots, 10), key=abs) == sorted(
        np.round([a, b], 10), key=abs)
    assert rooted.leading_coeff == 1.0


def test_poly_roots_coefficients_round_trip():
    rng = np.random.default_rng(6)
    coeffs = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    back = numerics.poly_roots(coeffs).coefficients()
    assert np.max(np.abs(back - coeffs)) < 1e-8


def test_poly_roots_trims_trailing_zeros():
    rooted = numerics.poly_roots([1.0, -3.0, 0.0, 0.0])
    assert rooted.roots.shape == (1,)
    assert abs(rooted.roots[0] - 3.0) < 1e-12


def test_poly_roots_constant_has_no_roots():
    rooted = numerics.poly_roots([2.5])
    assert rooted.roots.size == 0
    assert np.allclose(rooted.coefficients(), [2.5])


def test_poly_roots_degenerate_inputs():
    with pytest.raises(ValueError):
        numerics.poly_roots([0.0, 0.0])
    with pytest.raises(ValueError):
        numerics.poly_roots([0.0, 1.0])  # pure delay, no product form
    with pytest.raises(ValueError):
        numerics.poly_roots([])


def test_oversample_power_spectrum_exact_for_short_fir():
    rng = np.random.default_rng(7)
    taps = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    n, factor = 64, 4
    power = np.abs(np.fft.fft(taps, n)) ** 2
    dense = numerics.oversample_power_spectrum(power, factor)
    reference = np.abs(np.fft.fft(taps, n * factor)) ** 2
    assert np.max(np.abs(dense - reference)) < 1e-9 * power.max()
    # original samples sit at the stride
    assert np.max(np.abs(dense[::factor] - power)) < 1e-9 * power.max()


def test_oversample_factor_one_is_identity():
    p = np.arange(8.0)
    out = numerics.oversample_power_spectrum(p, 1)
    assert np.array_equal(out, p)
    assert out is not p


def test_min_phase_from_magnitude_preserves_magnitude():
    rng = np.random.default_rng(8)
    mag = np.abs(rng.standard_normal(256)) + 0.1
    out = numerics.min_phase_from_magnitude(mag)
    assert np.max(np.abs(np.abs(out) - mag)) < 1e-12


def test_min_phase_from_magnitude_recovers_known_filter():
    # all zeros well inside the circle: the cepstral route should nail it
    zeros = np.array([0.5, -0.3 + 0.2j, 0.1 - 0.6j])
    taps = np.poly(zeros).astype(complex)
    n = 256
    truth = np.fft.fft(taps, n)
    out = numerics.min_phase_from_magnitude(np.abs(truth))
    assert np.max(np.abs(out - truth)) < 1e-6


def test_min_phase_from_magnitude_validation():
    with pytest.raises(ValueError):
        numerics.min_phase_from_magnitude(np.full(64, -1.0))
    with pytest.raises(ValueError):
        numerics.min_phase_from_magnitude(np.zeros(64))
    with pytest.raises(ValueError):
        numerics.min_phase_from_magnitude(np.ones(48))  # not a power of two
    with pytest.raises(ValueError):
        numerics.min_phase_from_magnitude(np.ones(64), oversample=0)


def test_unwrap_phase_removes_jumps():
    true_phase = np.linspace(0.0, 6 * np.pi, 200)
    wrapped = np.angle(np.exp(1j * true_phase))
    out = numerics.unwrap_phase(wrapped)
    assert np.max(np.abs(out - true_phase)) < 1e-9
