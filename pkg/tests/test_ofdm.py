import numpy as np
import pytest

from minap import ofdm
from minap.channel import cfr_of, draw_channel, exp_pdp

GRID = ofdm.make_grid()


def test_make_grid_layout():
    g = ofdm.make_grid()
    assert g.n == 256 and g.cp_len == 64
    assert np.array_equal(g.pilot_indices, np.arange(0, 256, 4))
    assert g.pilot_indices.size == 64
    assert g.n_data == 192
    merged = np.sort(np.concatenate([g.pilot_indices, g.data_indices]))
    assert np.array_equal(merged, np.arange(256))
    assert np.max(np.abs(np.abs(g.pilot_values) - 1.0)) < 1e-12


def test_make_grid_pilots_deterministic_in_seed():
    a = ofdm.make_grid(pilot_seed=11)
    b = ofdm.make_grid(pilot_seed=11)
    c = ofdm.make_grid(pilot_seed=12)
    assert np.array_equal(a.pilot_values, b.pilot_values)
    assert not np.array_equal(a.pilot_values, c.pilot_values)


def test_make_grid_validation():
    with pytest.raises(ValueError):
        ofdm.make_grid(pilot_rate=0.3)  # not 1/k
    with pytest.raises(ValueError):
        ofdm.make_grid(pilot_rate=0.0)
    with pytest.raises(ValueError):
        ofdm.make_grid(n=100)


def test_grid_partition_enforced():
    with pytest.raises(ValueError):
        ofdm.OfdmGrid(n=8, cp_len=2,
                      pilot_indices=np.array([0, 2]),
                      data_indices=np.array([1, 3, 5, 6, 7]),  # 4 missing
                      pilot_values=np.ones(2, dtype=complex))


def test_qpsk_map_gray_table():
    bits = np.array([0, 0, 0, 1, 1, 0, 1, 1])
    s = ofdm.qpsk_map(bits)
    root = 1 / np.sqrt(2)
    expected = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) * root
    assert np.max(np.abs(s - expected)) < 1e-15
    assert np.max(np.abs(np.abs(s) - 1.0)) < 1e-15


def test_qpsk_round_trip():
    rng = np.random.default_rng(41)
    bits = rng.integers(0, 2, 2000)
    back = ofdm.qpsk_demap(ofdm.qpsk_map(bits))
    assert np.array_equal(back, bits.astype(np.uint8))


def test_qpsk_map_validation():
    with pytest.raises(ValueError):
        ofdm.qpsk_map([0, 1, 1])  # odd
    with pytest.raises(ValueError):
        ofdm.qpsk_map([0, 2])
    with pytest.raises(ValueError):
        ofdm.qpsk_map(np.zeros((2, 2)))


def test_modulate_demodulate_round_trip():
    rng = np.random.default_rng(42)
    data = ofdm.qpsk_map(rng.integers(0, 2, 2 * GRID.n_data))
    sym = ofdm.modulate(GRID, data)
    assert sym.time.size == GRID.n + GRID.cp_len
    back = ofdm.demodulate(sym.time, GRID)
    assert np.max(np.abs(back - sym.freq)) < 1e-9
    assert np.max(np.abs(back[GRID.data_indices] - data)) < 1e-9
    assert np.max(np.abs(back[GRID.pilot_indices] - GRID.pilot_values)) < 1e-9


def test_cyclic_prefix_is_cyclic():
    rng = np.random.default_rng(43)
    data = ofdm.qpsk_map(rng.integers(0, 2, 2 * GRID.n_data))
    sym = ofdm.modulate(GRID, data)
    assert np.array_equal(sym.time[:GRID.cp_len], sym.time[-GRID.cp_len:])


def test_modulate_pilot_override():
    rng = np.random.default_rng(44)
    data = ofdm.qpsk_map(rng.integers(0, 2, 2 * GRID.n_data))
    override = np.exp(1j * rng.uniform(0, 2 * np.pi, GRID.pilot_indices.size))
    sym = ofdm.modulate(GRID, data, pilot_values=override)
    assert np.max(np.abs(sym.freq[GRID.pilot_indices] - override)) < 1e-15
    with pytest.raises(ValueError):
        ofdm.modulate(GRID, data, pilot_values=override[:-1])
    with pytest.raises(ValueError):
        ofdm.modulate(GRID, data[:-1])


def test_demodulate_length_check():
    with pytest.raises(ValueError):
        ofdm.demodulate(np.zeros(GRID.n), GRID)


def test_channel_convolution_matches_frequency_product():
    # linear convolution plus the cyclic prefix equals per-bin multiplication
    pdp = exp_pdp()
    rng = np.random.default_rng(45)
    h = draw_channel(pdp, rng)
    data = ofdm.qpsk_map(rng.integers(0, 2, 2 * GRID.n_data))
    sym = ofdm.modulate(GRID, data)
    rx = np.convolve(sym.time, h)[: sym.time.size]
    rx_freq = ofdm.demodulate(rx, GRID)
    expected = sym.freq * cfr_of(h, GRID.n)
    assert np.max(np.abs(rx_freq - expected)) < 1e-10


def test_awgn_realized_snr_and_inf():
    rng = np.random.default_rng(46)
    x = np.exp(1j * rng.uniform(0, 2 * np.pi, 200000))
    noisy = ofdm.awgn(x, 10.0, rng)
    err = noisy - x
    snr = np.mean(np.abs(x) ** 2) / np.mean(np.abs(err) ** 2)
    assert abs(10 * np.log10(snr) - 10.0) < 0.1
    clean = ofdm.awgn(x, np.inf, rng)
    assert np.array_equal(clean, x)
    assert clean is not x


def test_ls_estimate_exact_on_pilots():
    pdp = exp_pdp()
    rng = np.random.default_rng(47)
    h = draw_channel(pdp, rng)
    data = ofdm.qpsk_map(rng.integers(0, 2, 2 * GRID.n_data))
    sym = ofdm.modulate(GRID, data)
    rx_freq = sym.freq * cfr_of(h, GRID.n)
    est = ofdm.ls_estimate(rx_freq, GRID)
    truth = cfr_of(h, GRID.n)
    assert np.max(np.abs(est.values[GRID.pilot_indices] - truth[GRID.pilot_indices])) < 1e-10
    # interpolation error between pilots stays moderate for an 11-tap channel
    assert np.mean(np.abs(est.values - truth) ** 2) < 0.05 * np.mean(np.abs(truth) ** 2)


def test_ls_estimate_spline_and_validation():
    rng = np.random.default_rng(48)
    rx = rng.standard_normal(GRID.n) + 1j * rng.standard_normal(GRID.n)
    spline = ofdm.ls_estimate(rx, GRID, interp="spline")
    assert spline.values.shape == (GRID.n,)
    with pytest.raises(ValueError):
        ofdm.ls_estimate(rx, GRID, interp="nearest")


def test_mmse_estimate_matches_dense_oracle():
    # independent construction of the same estimator, solved with an explicit
    # inverse: estimate taps, then project to the grid
    pdp = exp_pdp()
    rng = np.random.default_rng(49)
    h = draw_channel(pdp, rng)
    noise_var = 0.05
    data = ofdm.qpsk_map(rng.integers(0, 2, 2 * GRID.n_data))
    sym = ofdm.modulate(GRID, data)
    rx_freq = sym.freq * cfr_of(h, GRID.n)
    rx_freq = rx_freq + np.sqrt(noise_var / 2) * (
        rng.standard_normal(GRID.n) + 1j * rng.standard_normal(GRID.n))

    est = ofdm.mmse_estimate(rx_freq, GRID, pdp, noise_var)

    n, L = GRID.n, pdp.n_taps
    kp = GRID.pilot_indices
    q = GRID.pilot_values
    f_full = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(L)) / n)
    c = np.diag(pdp.tap_powers.astype(complex))
    a = np.diag(q) @ f_full[kp]
    cov_y = a @ c @ a.conj().T + noise_var * np.eye(kp.size)
    taps_hat = c @ a.conj().T @ np.linalg.inv(cov_y) @ rx_freq[kp]
    oracle = f_full @ taps_hat
    assert np.max(np.abs(est.values - oracle)) < 1e-10


def test_mmse_estimate_exact_at_zero_noise():
    pdp = exp_pdp()
    rng = np.random.default_rng(50)
    h = draw_channel(pdp, rng)
    data = ofdm.qpsk_map(rng.integers(0, 2, 2 * GRID.n_data))
    sym = ofdm.modulate(GRID, data)
    rx_freq = sym.freq * cfr_of(h, GRID.n)
    est = ofdm.mmse_estimate(rx_freq, GRID, pdp, 0.0)
    assert np.max(np.abs(est.values - cfr_of(h, GRID.n))) < 1e-9


def test_mmse_estimate_accepts_vector_and_matrix_prior():
    rng = np.random.default_rng(51)
    rx = rng.standard_normal(GRID.n) + 1j * rng.standard_normal(GRID.n)
    v = ofdm.mmse_estimate(rx, GRID, np.full(11, 1 / 11), 0.1)
    m = ofdm.mmse_estimate(rx, GRID, np.diag(np.full(11, 1 / 11)), 0.1)
    assert np.max(np.abs(v.values - m.values)) < 1e-12
    with pytest.raises(ValueError):
        ofdm.mmse_estimate(rx, GRID, np.ones((2, 3)), 0.1)


def test_equalize_division_and_floor():
    rx = np.array([1.0 + 0j, 2.0, 3.0])
    est = np.array([2.0 + 0j, 1e-15, 0.0])
    out = ofdm.equalize(rx, est, [0, 1, 2])
    assert abs(out[0] - 0.5) < 1e-12
    assert np.all(np.isfinite(out))
    assert abs(out[1]) <= 2.0 / ofdm.EQUALIZER_FLOOR + 1e-3
    assert abs(abs(out[2]) - 3.0 / ofdm.EQUALIZER_FLOOR) < 1.0


def test_channel_estimate_rejects_non_finite():
    with pytest.raises(ValueError):
        ofdm.ChannelEstimate(values=np.array([np.nan + 0j]), method="ls", noise_var=0.0)
