import math
from fractions import Fraction

import numpy as np
import pytest

from peaklab import masking


def brute_grid_bins(extent, period):
    """Round-half-up harmonics via exact rationals, independent of the package."""
    return sorted(
        {math.floor(Fraction(n * extent, period) + Fraction(1, 2)) % extent for n in range(period)}
    )


def brute_mask(height, width, period, dilation, dc_guard):
    """Quadruple-loop mask oracle following the stated build order."""

    def wrap(a, b, extent):
        d = abs(a - b)
        return min(d, extent - d)

    rows = brute_grid_bins(height, period)
    cols = brute_grid_bins(width, period)
    zeros = set()
    for k1 in range(height):
        for k2 in range(width):
            if any(
                wrap(k1, g1, height) ** 2 + wrap(k2, g2, width) ** 2 <= dilation**2
                for g1 in rows
                for g2 in cols
            ):
                zeros.add((k1, k2))
    zeros |= {((height - a) % height, (width - b) % width) for a, b in zeros}
    zeros = {
        (a, b)
        for a, b in zeros
        if wrap(a, 0, height) ** 2 + wrap(b, 0, width) ** 2 > dc_guard**2
    }
    zeros.discard((0, 0))
    mask = np.ones((height, width), np.uint8)
    for a, b in zeros:
        mask[a, b] = 0
    return mask


def test_grid_bins_divisible():
    np.testing.assert_array_equal(masking.grid_bins(16, 8), [0, 2, 4, 6, 8, 10, 12, 14])


def test_grid_bins_unit_spacing():
    np.testing.assert_array_equal(masking.grid_bins(8, 8), np.arange(8))


def test_grid_bins_non_divisible_rounds_half_up():
    np.testing.assert_array_equal(masking.grid_bins(12, 8), [0, 2, 3, 5, 6, 8, 9, 11])


@pytest.mark.parametrize("extent,period", [(12, 8), (20, 8), (18, 16), (100, 16)])
def test_grid_bins_matches_rational_oracle(extent, period):
    np.testing.assert_array_equal(masking.grid_bins(extent, period), brute_grid_bins(extent, period))


def test_grid_bins_not_negation_symmetric():
    bins = set(masking.grid_bins(12, 8).tolist())
    mirrored = {(12 - b) % 12 for b in bins}
    assert bins != mirrored


def test_grid_bins_validation():
    with pytest.raises(ValueError):
        masking.grid_bins(0, 8)
    with pytest.raises(ValueError):
        masking.grid_bins(16, 1)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        masking.GridSpec(period=1)
    with pytest.raises(ValueError):
        masking.GridSpec(period=8, dilation_radius=-1)
    with pytest.raises(ValueError):
        masking.GridSpec(period=8, dc_guard_radius=-0.5)


def test_mask_16x16_bare_grid_has_63_zeros():
    mask = masking.build_grid_mask(16, 16, masking.GridSpec(8, 0.0, 0.0))
    zeros = np.argwhere(mask == 0)
    assert len(zeros) == 63
    assert all(a % 2 == 0 and b % 2 == 0 for a, b in zeros)
    assert mask[0, 0] == 1


def test_mask_16x16_radius_one_grows_plus_shapes():
    mask = masking.build_grid_mask(16, 16, masking.GridSpec(8, 1.0, 0.0))
    expected = set()
    for g1 in range(0, 16, 2):
        for g2 in range(0, 16, 2):
            for da, db in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]:
                expected.add(((g1 + da) % 16, (g2 + db) % 16))
    expected.discard((0, 0))
    actual = {tuple(z) for z in np.argwhere(mask == 0)}
    assert actual == expected


def test_mask_16x16_dc_guard_two_restores_near_dc():
    mask = masking.build_grid_mask(16, 16, masking.GridSpec(8, 0.0, 2.0))
    for kept in [(0, 2), (2, 0), (0, 14), (14, 0)]:
        assert mask[kept] == 1
    # (2, 14) sits at torus distance sqrt(8) > 2, so it stays removed.
    assert mask[2, 14] == 0
    assert mask[0, 4] == 0
    assert mask[4, 0] == 0
    assert mask[0, 0] == 1


@pytest.mark.parametrize(
    "height,width,period,dilation,dc_guard",
    [
        (16, 16, 8, 0.0, 0.0),
        (16, 16, 8, 1.0, 0.0),
        (16, 16, 8, 1.0, 2.0),
        (20, 28, 8, 1.25, 2.0),
        (18, 24, 8, 1.0, 1.0),
        (32, 32, 16, 1.0, 3.0),
        (33, 47, 8, 2.0, 1.5),
    ],
)
def test_mask_matches_brute_force_oracle(height, width, period, dilation, dc_guard):
    spec = masking.GridSpec(period, dilation, dc_guard)
    mask = masking.build_grid_mask(height, width, spec)
    np.testing.assert_array_equal(mask, brute_mask(height, width, period, dilation, dc_guard))


def test_mask_is_hermitian_symmetric(rng):
    for _ in range(5):
        height = int(rng.integers(16, 50))
        width = int(rng.integers(16, 50))
        period = 8
        spec = masking.GridSpec(period, float(rng.uniform(0, min(height, width) / 16)), float(rng.uniform(0, 3)))
        mask = masking.build_grid_mask(height, width, spec)
        mirror = np.roll(mask[::-1, ::-1], shift=(1, 1), axis=(0, 1))
        np.testing.assert_array_equal(mask, mirror)
        assert mask[0, 0] == 1


def test_mask_zero_count_lower_bound():
    mask = masking.build_grid_mask(20, 28, masking.GridSpec(8, 0.0, 0.0))
    rows = len(masking.grid_bins(20, 8))
    cols = len(masking.grid_bins(28, 8))
    assert (mask == 0).sum() >= rows * cols - 1


def test_mask_zero_set_monotone_in_radius():
    previous = None
    for radius in [0.0, 1.0, 2.0]:
        mask = masking.build_grid_mask(48, 48, masking.GridSpec(8, radius, 0.0))
        zeros = {tuple(z) for z in np.argwhere(mask == 0)}
        if previous is not None:
            assert previous <= zeros
        previous = zeros


def test_mask_rejects_oversized_period():
    with pytest.raises(ValueError, match="period"):
        masking.build_grid_mask(16, 30, masking.GridSpec(16))


def test_mask_rejects_merging_dilation():
    with pytest.raises(ValueError, match="dilation"):
        masking.build_grid_mask(16, 16, masking.GridSpec(8, 1.5, 0.0))
    # The bound is inclusive: radius exactly at min(H, W)/(2P) is legal.
    masking.build_grid_mask(16, 16, masking.GridSpec(8, 1.0, 0.0))


def test_default_radii_scale_with_size():
    assert masking.resolve_radius(None, 1024, 1024, 3.0) == 3.0
    assert masking.resolve_radius(None, 512, 2048, 3.0) == 1.5
    assert masking.resolve_radius(None, 16, 16, 3.0) == 1.0
    assert masking.resolve_radius(2.5, 16, 16, 3.0) == 2.5


def test_apply_mask_identity(rng):
    spectrum = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    np.testing.assert_array_equal(masking.apply_mask(spectrum, np.ones((16, 16), np.uint8)), spectrum)


def test_apply_mask_dimension_mismatch():
    with pytest.raises(ValueError, match="shape"):
        masking.apply_mask(np.ones((4, 4), complex), np.ones((4, 5), np.uint8))


def test_apply_mask_idempotent(rng):
    spectrum = rng.normal(size=(16, 20)) + 1j * rng.normal(size=(16, 20))
    mask = masking.build_grid_mask(16, 20, masking.GridSpec(8, 1.0, 1.0))
    once = masking.apply_mask(spectrum, mask)
    np.testing.assert_array_equal(masking.apply_mask(once, mask), once)


def test_apply_mask_energy_accounting(rng):
    spectrum = rng.normal(size=(32, 48)) + 1j * rng.normal(size=(32, 48))
    mask = masking.build_grid_mask(32, 48, masking.GridSpec(8, 1.0, 2.0))
    kept = masking.apply_mask(spectrum, mask)
    removed = (np.abs(spectrum[mask == 0]) ** 2).sum()
    np.testing.assert_allclose(
        (np.abs(kept) ** 2).sum(), (np.abs(spectrum) ** 2).sum() - removed, rtol=1e-9
    )


def test_masked_spectrum_inverts_to_real(rng):
    x = rng.uniform(0, 255, (24, 36))
    mask = masking.build_grid_mask(24, 36, masking.GridSpec(8, 1.0, 1.0))
    masked = masking.apply_mask(np.fft.fft2(x), mask)
    back = np.fft.ifft2(masked)
    assert np.abs(back.imag).max() < 1e-9 * np.abs(masked).max()
