import numpy as np
import pytest

from minap import channel


def test_exp_pdp_default_shape():
    pdp = channel.exp_pdp()
    assert pdp.n_taps == 11
    assert abs(pdp.tap_powers.sum() - 1.0) < 1e-12
    assert np.all(np.diff(pdp.tap_powers) < 0)


def test_exp_pdp_span_is_exact():
    pdp = channel.exp_pdp(n_taps=11, span_db=20.0)
    ratio_db = 10 * np.log10(pdp.tap_powers[0] / pdp.tap_powers[-1])
    assert abs(ratio_db - 20.0) < 1e-9


def test_exp_pdp_explicit_decay():
    pdp = channel.exp_pdp(n_taps=4, decay=2.0)
    expected = np.exp(-np.arange(4) / 2.0)
    expected /= expected.sum()
    assert np.allclose(pdp.tap_powers, expected)


def test_exp_pdp_single_tap():
    pdp = channel.exp_pdp(n_taps=1)
    assert np.allclose(pdp.tap_powers, [1.0])


def test_exp_pdp_validation():
    with pytest.raises(ValueError):
        channel.exp_pdp(n_taps=0)
    with pytest.raises(ValueError):
        channel.exp_pdp(decay=-1.0)
    with pytest.raises(ValueError):
        channel.exp_pdp(span_db=0.0)


def test_pdp_rejects_unnormalized_powers():
    with pytest.raises(ValueError):
        channel.PowerDelayProfile(tap_powers=np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        channel.PowerDelayProfile(tap_powers=np.array([1.5, -0.5]))


def test_draw_channel_tap_statistics():
    # per-tap variance should track the profile, mean should vanish
    pdp = channel.exp_pdp()
    rng = np.random.default_rng(11)
    draws = np.array([channel.draw_channel(pdp, rng) for _ in range(20000)])
    var = np.mean(np.abs(draws) ** 2, axis=0)
    assert np.max(np.abs(var / pdp.tap_powers - 1.0)) < 0.05
    mean = draws.mean(axis=0)
    sigma = np.sqrt(pdp.tap_powers / (2 * draws.shape[0]))
    assert np.all(np.abs(mean.real) < 4 * sigma)
    assert np.all(np.abs(mean.imag) < 4 * sigma)


def test_draw_channel_total_power():
    pdp = channel.exp_pdp()
    rng = np.random.default_rng(12)
    total = np.mean([np.sum(np.abs(channel.draw_channel(pdp, rng)) ** 2)
                     for _ in range(20000)])
    assert abs(total - 1.0) < 0.03


def test_draw_correlated_endpoints():
    pdp = channel.exp_pdp()
    rng = np.random.default_rng(13)
    h = channel.draw_channel(pdp, rng)
    same = channel.draw_correlated(h, pdp, 1.0, rng)
    assert np.array_equal(same, h)
    other = channel.draw_correlated(h, pdp, 0.0, rng)
    assert not np.allclose(other, h)


def test_draw_correlated_statistics():
    pdp = channel.exp_pdp()
    rng = np.random.default_rng(14)
    rho = 0.7
    cross = 0.0
    p_a = 0.0
    p_b = 0.0
    for _ in range(20000):
        h = channel.draw_channel(pdp, rng)
        g = channel.draw_correlated(h, pdp, rho, rng)
        cross += np.sum(h * np.conj(g)).real
        p_a += np.sum(np.abs(h) ** 2)
        p_b += np.sum(np.abs(g) ** 2)
    measured = cross / np.sqrt(p_a * p_b)
    assert abs(measured - rho) < 0.02
    # the correlated draw keeps the marginal power
    assert abs(p_b / p_a - 1.0) < 0.03


def test_draw_correlated_rejects_bad_rho():
    pdp = channel.exp_pdp()
    rng = np.random.default_rng(15)
    h = channel.draw_channel(pdp, rng)
    for rho in (-0.1, 1.1):
        with pytest.raises(ValueError):
            channel.draw_correlated(h, pdp, rho, rng)


def test_cfr_of_matches_dft():
    rng = np.random.default_rng(16)
    taps = rng.standard_normal(11) + 1j * rng.standard_normal(11)
    n = 256
    cfr = channel.cfr_of(taps, n)
    k = np.arange(n)
    reference = sum(taps[l] * np.exp(-2j * np.pi * k * l / n)
                    for l in range(taps.size))
    assert np.max(np.abs(cfr - reference)) < 1e-10


def test_cfr_of_rejects_too_many_taps():
    with pytest.raises(ValueError):
        channel.cfr_of(np.ones(17), 16)
    with pytest.raises(ValueError):
        channel.cfr_of(np.ones((2, 2)), 16)
