import numpy as np
import pytest

from peaklab import bench, spectral


def naive_dft2(x):
    """Matrix-product DFT straight from the definition, independent of FFT code."""
    height, width = x.shape
    e1 = np.exp(-2j * np.pi * np.outer(np.arange(height), np.arange(height)) / height)
    e2 = np.exp(-2j * np.pi * np.outer(np.arange(width), np.arange(width)) / width)
    return e1 @ x.astype(complex) @ e2


def noise_image(rng, height, width):
    return np.clip(np.round(rng.normal(128, 26, (height, width))), 0, 255).astype(np.uint8)


def test_forward_all_zeros():
    spectrum = spectral.dft_forward(np.zeros((8, 8)))
    np.testing.assert_array_equal(spectrum, np.zeros((8, 8), complex))


def test_forward_constant_is_dc_only():
    spectrum = spectral.dft_forward(np.full((4, 4), 3.25))
    assert spectrum[0, 0] == pytest.approx(16 * 3.25)
    rest = spectrum.copy()
    rest[0, 0] = 0
    np.testing.assert_allclose(np.abs(rest), 0, atol=1e-10)


def test_forward_dc_equals_sample_sum(rng):
    x = rng.uniform(0, 255, (11, 7))
    spectrum = spectral.dft_forward(x)
    np.testing.assert_allclose(spectrum[0, 0], x.sum(), rtol=1e-12)


def test_forward_single_cosine_occupies_two_bins():
    n1 = np.arange(16)[:, None]
    x = np.cos(2 * np.pi * 2 * n1 / 16) * np.ones((1, 16))
    spectrum = spectral.dft_forward(x)
    oracle = naive_dft2(x)
    np.testing.assert_allclose(spectrum, oracle, atol=1e-9)
    magnitude = np.abs(spectrum)
    hot = magnitude > 1e-9
    assert hot[2, 0] and hot[14, 0]
    assert hot.sum() == 2


@pytest.mark.parametrize("shape", [(8, 6), (5, 5), (16, 16)])
def test_forward_matches_naive_oracle(rng, shape):
    x = rng.uniform(-50, 50, shape)
    np.testing.assert_allclose(
        spectral.dft_forward(x), naive_dft2(x), rtol=1e-9, atol=1e-9 * np.abs(x).sum()
    )


def test_forward_rejects_empty():
    with pytest.raises(ValueError):
        spectral.dft_forward(np.zeros((0, 4)))


@pytest.mark.parametrize("shape", [(16, 16), (17, 23), (64, 48)])
def test_round_trip_is_identity(rng, shape):
    x = rng.integers(0, 256, shape).astype(np.float64)
    back, max_imag = spectral.dft_inverse(spectral.dft_forward(x))
    assert np.abs(back - x).max() < 1e-9
    assert max_imag < 1e-9 * np.abs(x).max()


def test_inverse_dc_only_gives_constant():
    spectrum = np.zeros((4, 4), complex)
    spectrum[0, 0] = 16 * 7.5
    back, max_imag = spectral.dft_inverse(spectrum)
    np.testing.assert_allclose(back, np.full((4, 4), 7.5), rtol=1e-12)
    assert max_imag == 0.0


def test_hermitian_symmetry_of_real_input(rng):
    x = rng.uniform(0, 255, (20, 14))
    spectrum = spectral.dft_forward(x)
    mirror = np.conj(np.roll(spectrum[::-1, ::-1], shift=(1, 1), axis=(0, 1)))
    np.testing.assert_allclose(spectrum, mirror, rtol=1e-9, atol=1e-9)


def test_symmetrized_spectrum_inverts_to_real(rng):
    raw = rng.normal(size=(12, 18)) + 1j * rng.normal(size=(12, 18))
    mirror = np.conj(np.roll(raw[::-1, ::-1], shift=(1, 1), axis=(0, 1)))
    symmetric = (raw + mirror) / 2
    back, max_imag = spectral.dft_inverse(symmetric)
    assert max_imag < 1e-9 * np.abs(back).max()


def test_parseval(rng):
    x = rng.uniform(-10, 260, (24, 40))
    spectrum = spectral.dft_forward(x)
    lhs = (x**2).sum()
    rhs = (np.abs(spectrum) ** 2).sum() / x.size
    np.testing.assert_allclose(lhs, rhs, rtol=1e-6)


def test_log_magnitude_all_zero_floor():
    rendered = spectral.log_magnitude(np.zeros((6, 6), complex), floor=1e-12)
    np.testing.assert_array_equal(rendered, np.full((6, 6), -12.0))


def test_log_magnitude_dc_moves_to_center():
    spectrum = np.zeros((4, 4), complex)
    spectrum[0, 0] = 10
    rendered = spectral.log_magnitude(spectrum, floor=1e-12)
    assert rendered[2, 2] == pytest.approx(1.0)
    rest = rendered.copy()
    rest[2, 2] = -12.0
    np.testing.assert_array_equal(rest, np.full((4, 4), -12.0))


def test_log_magnitude_phase_invariant(rng):
    magnitude = rng.uniform(0.1, 100, (9, 9))
    a = spectral.log_magnitude(magnitude * np.exp(1j * rng.uniform(0, 2 * np.pi, (9, 9))))
    b = spectral.log_magnitude(magnitude * np.exp(1j * rng.uniform(0, 2 * np.pi, (9, 9))))
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_log_magnitude_monotone_in_magnitude(rng):
    spectrum = rng.uniform(0.1, 100, (8, 8)).astype(complex)
    assert (spectral.log_magnitude(spectrum * 3) >= spectral.log_magnitude(spectrum)).all()


def test_log_magnitude_rejects_bad_floor():
    with pytest.raises(ValueError):
        spectral.log_magnitude(np.ones((4, 4), complex), floor=0.0)


def test_average_constant_image_is_dc_only():
    image = np.full((16, 16), 50, np.uint8)
    rendered = spectral.average_power_spectrum([image])
    center = (8, 8)
    dc_power = (50.0 * 16 * 16) ** 2
    assert rendered[center] == pytest.approx(np.log10(dc_power))
    rest = rendered.copy()
    rest[center] = -12.0
    np.testing.assert_array_equal(rest, np.full((16, 16), -12.0))


def test_average_rejects_empty_list():
    with pytest.raises(ValueError):
        spectral.average_power_spectrum([])


def test_average_mismatch_names_offender(rng):
    good = noise_image(rng, 16, 16)
    bad = noise_image(rng, 16, 18)
    with pytest.raises(ValueError, match="image 2"):
        spectral.average_power_spectrum([good, good, bad])


def test_average_is_mean_idempotent(rng):
    image = noise_image(rng, 16, 16)
    once = spectral.average_power_spectrum([image])
    twice = spectral.average_power_spectrum([image, image])
    np.testing.assert_allclose(once, twice, rtol=1e-12)


def test_average_magnitude_flag_changes_scale():
    image = np.full((16, 16), 50, np.uint8)
    power = spectral.average_power_spectrum([image])
    magnitude = spectral.average_power_spectrum([image], magnitude=True)
    assert power[8, 8] == pytest.approx(2 * magnitude[8, 8])


def test_average_residual_reveals_injected_grid(rng):
    spec = bench.InjectionSpec(period=8, amplitude=30)
    corpus = [
        bench.inject_periodic_peaks(noise_image(rng, 64, 64), spec) for _ in range(20)
    ]
    rendered = spectral.average_power_spectrum(corpus, use_residual=True)
    shifted_rows = (np.array([0, 8, 16, 24, 32, 40, 48, 56]) + 32) % 64
    grid = np.zeros((64, 64), bool)
    grid[np.ix_(shifted_rows, shifted_rows)] = True
    grid[32, 32] = False
    on_grid = rendered[grid]
    off_grid = rendered[~grid]
    assert np.median(on_grid) > np.median(off_grid) + 1.0
