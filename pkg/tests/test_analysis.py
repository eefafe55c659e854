import numpy as np
import pytest

from minap import analysis
from minap.analysis import (
    BepParams,
    CcdfCurve,
    bep_correlated,
    bep_imperfect,
    bep_perfect,
    ccdf,
    empirical_min_phase_correlation,
    gamma_factor,
    nmse,
    papr,
    rho_min,
)


def test_bep_perfect_known_value():
    # g = 1: 0.5 * (1 - 1/sqrt(2))
    assert abs(bep_perfect(1.0) - 0.5 * (1 - 1 / np.sqrt(2))) < 1e-15
    arr = bep_perfect(np.array([1.0, 4.0]))
    assert arr.shape == (2,)
    assert abs(arr[0] - bep_perfect(1.0)) < 1e-15
    with pytest.raises(ValueError):
        bep_perfect(0.0)
    with pytest.raises(ValueError):
        bep_perfect(np.array([1.0, -2.0]))


def test_bep_perfect_asymptotes():
    assert bep_perfect(1e-9) == pytest.approx(0.5, abs=1e-4)
    assert bep_perfect(1e9) == pytest.approx(0.25e-9, rel=1e-3)


def test_bep_imperfect_reduces_to_perfect():
    for g in (0.5, 1.0, 4.0, 10.0, 100.0, 1234.5):
        a = bep_imperfect(BepParams(gamma_bar=g, rho1=1.0, rho2=0.0))
        assert abs(a - bep_perfect(g)) < 1e-12


def test_bep_params_validation():
    with pytest.raises(ValueError):
        BepParams(gamma_bar=0.0, rho1=1.0)
    with pytest.raises(ValueError):
        BepParams(gamma_bar=1.0, rho1=-0.1)
    with pytest.raises(ValueError):
        BepParams(gamma_bar=1.0, rho1=1.0, rho2=1.0)  # magnitude > 1


def _mc_bep(g, r1, r2, n=1_000_000, seed=7):
    # one-shot matched filter: channel h, correlated estimate, decide on
    # r * conj(estimate); counts both bit rails of the symbol
    rng = np.random.default_rng(seed)
    h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    w = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    est = (r1 + 1j * r2) * h + np.sqrt(max(0.0, 1 - r1 ** 2 - r2 ** 2)) * w
    n0 = 1.0 / (2.0 * g)
    noise = np.sqrt(n0 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    r = h * (1 + 1j) / np.sqrt(2) + noise
    dec = r * np.conj(est)
    return ((dec.real < 0).sum() + (dec.imag < 0).sum()) / (2 * n)


@pytest.mark.parametrize("g,r1,r2", [
    (4.0, 0.9, 0.3),
    (10.0, 0.7, 0.0),
    (2.0, 0.5, 0.5),
    (1.0, 0.3, 0.8),
])
def test_bep_imperfect_matches_monte_carlo(g, r1, r2):
    f = bep_imperfect(BepParams(gamma_bar=g, rho1=r1, rho2=r2))
    m = _mc_bep(g, r1, r2)
    # the two rails share one channel/noise draw, so the nominal sigma at 2n
    # draws understates; 5 sigma absorbs that
    sigma = np.sqrt(f * (1 - f) / 2e6)
    assert abs(m - f) < 5 * sigma


def test_bep_correlated_limits():
    g = np.array([1.0, 10.0, 1e6])
    full = bep_correlated(g, 1.0)
    assert np.max(np.abs(full - bep_perfect(g))) < 1e-15
    assert bep_correlated(10.0, 0.0) == 0.5
    # high-SNR floor (1 - rho) / 2
    assert bep_correlated(1e9, 0.8) == pytest.approx(0.1, abs=1e-6)
    with pytest.raises(ValueError):
        bep_correlated(1.0, 1.5)
    with pytest.raises(ValueError):
        bep_correlated(-1.0, 0.5)


def test_gamma_factor_and_rho_min_identities():
    assert gamma_factor(0.0) == 2.0
    assert gamma_factor(1.0) == 1.0
    assert rho_min(0.0) == 0.0
    assert rho_min(1.0) == 1.0
    rhos = np.linspace(0.0, 1.0, 21)
    assert np.max(np.abs(rho_min(rhos) * gamma_factor(rhos) - rhos)) < 1e-12
    assert np.all(rho_min(rhos) <= rhos + 1e-15)
    assert np.all(np.diff(rho_min(rhos)) > 0)
    with pytest.raises(ValueError):
        gamma_factor(1.2)
    with pytest.raises(ValueError):
        rho_min(-0.2)


def test_nmse_hand_value():
    assert nmse([1 + 1j, 2.0], [1.0, 2.0]) == pytest.approx(0.2, abs=1e-15)
    assert nmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    with pytest.raises(ValueError):
        nmse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        nmse([1.0], [0.0])


def test_papr_hand_values():
    assert papr(np.ones(16)) == pytest.approx(0.0, abs=1e-12)
    assert papr([2.0, 0.0, 0.0, 0.0]) == pytest.approx(10 * np.log10(4.0), abs=1e-12)
    with pytest.raises(ValueError):
        papr([])
    with pytest.raises(ValueError):
        papr([0.0, 0.0])


def test_ccdf_counts():
    curve = ccdf([1.0, 2.0, 3.0, 4.0], thresholds=[0.0, 1.0, 2.5, 4.0])
    assert np.allclose(curve.probabilities, [1.0, 0.75, 0.5, 0.0])
    default = ccdf([3.0, 1.0, 2.0, 4.0])
    assert np.array_equal(default.thresholds, [1.0, 2.0, 3.0, 4.0])
    assert np.allclose(default.probabilities, [0.75, 0.5, 0.25, 0.0])
    with pytest.raises(ValueError):
        ccdf([])
    with pytest.raises(ValueError):
        ccdf([1.0], thresholds=[2.0, 1.0])


def test_ccdf_curve_validation():
    t = np.array([0.0, 1.0])
    with pytest.raises(ValueError):
        CcdfCurve(thresholds=t, probabilities=np.array([0.5]))
    with pytest.raises(ValueError):
        CcdfCurve(thresholds=np.array([1.0, 0.0]), probabilities=np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        CcdfCurve(thresholds=t, probabilities=np.array([0.5, 0.9]))
    with pytest.raises(ValueError):
        CcdfCurve(thresholds=t, probabilities=np.array([1.5, 0.5]))


def _complex_rows(rng, n, m):
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


def test_correlation_identical_pairs():
    rng = np.random.default_rng(30)
    a = _complex_rows(rng, 1500, 8)
    val = empirical_min_phase_correlation(zip(a, a))
    assert val == pytest.approx(1.0, abs=1e-12)


def test_correlation_independent_pairs_near_zero():
    rng = np.random.default_rng(31)
    a = _complex_rows(rng, 3000, 8)
    b = _complex_rows(rng, 3000, 8)
    assert empirical_min_phase_correlation(zip(a, b)) < 0.05


def test_correlation_centering_removes_common_mean():
    # a constant offset shared by both members would read as correlation if
    # bins were pooled raw; the across-pair centering must remove it
    rng = np.random.default_rng(32)
    mean = 3.0 + 0.5j
    a = mean + _complex_rows(rng, 3000, 8)
    b = mean + _complex_rows(rng, 3000, 8)
    assert empirical_min_phase_correlation(zip(a, b)) < 0.05


def test_correlation_recovers_planted_rho():
    rng = np.random.default_rng(33)
    rho = 0.6
    x = _complex_rows(rng, 5000, 8)
    w = _complex_rows(rng, 5000, 8)
    y = rho * x + np.sqrt(1 - rho ** 2) * w
    val = empirical_min_phase_correlation(zip(x, y))
    assert val == pytest.approx(rho, abs=0.02)


def test_correlation_min_pairs_enforced():
    rng = np.random.default_rng(34)
    a = _complex_rows(rng, 10, 4)
    with pytest.raises(ValueError):
        empirical_min_phase_correlation(zip(a, a))
    assert empirical_min_phase_correlation(zip(a, a), min_pairs=10) == pytest.approx(1.0, abs=1e-12)


def test_correlation_per_subcarrier_shape():
    rng = np.random.default_rng(35)
    a = _complex_rows(rng, 1200, 6)
    vec = empirical_min_phase_correlation(zip(a, a), per_subcarrier=True)
    assert vec.shape == (6,)
    assert np.max(np.abs(vec - 1.0)) < 1e-12


def test_correlation_shape_mismatch():
    rng = np.random.default_rng(36)
    pairs = [(np.ones(4, dtype=complex), np.ones(5, dtype=complex))]
    with pytest.raises(ValueError):
        empirical_min_phase_correlation(pairs, min_pairs=1)
    mixed = [(np.ones(4, dtype=complex), np.ones(4, dtype=complex)),
             (np.ones(3, dtype=complex), np.ones(3, dtype=complex))]
    with pytest.raises(ValueError):
        empirical_min_phase_correlation(mixed, min_pairs=1)
