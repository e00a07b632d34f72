import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smsd.modem import (
    SUPPORTED_ORDERS,
    LengthMismatch,
    NonPowerOfTwo,
    ShapeMismatch,
    TxVector,
    UnsupportedOrder,
    bit_errors,
    build_constellation,
    sm_demap,
    sm_map,
    smx_codebook,
    smx_demap,
    smx_map,
    spectral_efficiency,
)


def all_bits(m):
    return ["".join(b) for b in itertools.product("01", repeat=m)]


class TestSpectralEfficiency:
    @pytest.mark.parametrize(
        "scheme, nt, mo, m",
        [("SM", 4, 16, 6), ("SMX", 3, 4, 6), ("SM", 1, 2, 1), ("SM", 32, 2, 6), ("SMX", 6, 2, 6),
         ("SM", 2, 128, 8), ("SMX", 2, 16, 8)],
    )
    def test_values(self, scheme, nt, mo, m):
        assert spectral_efficiency(scheme, nt, mo) == m

    def test_sm_needs_power_of_two_antennas(self):
        with pytest.raises(NonPowerOfTwo):
            spectral_efficiency("SM", 3, 4)

    def test_order_must_be_power_of_two(self):
        with pytest.raises(NonPowerOfTwo):
            spectral_efficiency("SMX", 2, 12)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            spectral_efficiency("OFDM", 2, 4)


class TestConstellation:
    @pytest.mark.parametrize("order", SUPPORTED_ORDERS)
    def test_unit_energy_and_distinct(self, order):
        c = build_constellation(order)
        assert len(c.points) == order
        assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) < 1e-12
        assert len(np.unique(np.round(c.points, 9))) == order

    @pytest.mark.parametrize("order", SUPPORTED_ORDERS)
    def test_labels_are_all_bit_strings(self, order):
        c = build_constellation(order)
        assert sorted(c.labels) == all_bits(c.bits_per_symbol)

    @pytest.mark.parametrize("order", SUPPORTED_ORDERS)
    def test_zero_mean(self, order):
        assert abs(np.mean(build_constellation(order).points)) < 1e-12

    def test_bpsk(self):
        c = build_constellation(2)
        np.testing.assert_array_equal(c.points, [1, -1])
        assert c.labels == ["0", "1"]

    def test_qpsk(self):
        pts = build_constellation(4).points
        np.testing.assert_allclose(np.abs(pts), 1.0)
        np.testing.assert_allclose(np.abs(pts.real), 1 / np.sqrt(2))

    @pytest.mark.parametrize("order", [4, 16, 64, 256])
    def test_square_qam_is_gray(self, order):
        # nearest neighbours differ in exactly one bit
        c = build_constellation(order)
        d = np.abs(c.points[:, None] - c.points[None, :])
        dmin = np.min(d[d > 1e-9])
        for a, b in zip(*np.nonzero(np.abs(d - dmin) < 1e-9)):
            assert bin(a ^ b).count("1") == 1

    @pytest.mark.parametrize("order", [8, 32, 128])
    def test_non_square_mostly_gray(self, order):
        c = build_constellation(order)
        d = np.abs(c.points[:, None] - c.points[None, :])
        dmin = np.min(d[d > 1e-9])
        pairs = list(zip(*np.nonzero(np.abs(d - dmin) < 1e-9)))
        ones = sum(bin(a ^ b).count("1") == 1 for a, b in pairs)
        assert ones / len(pairs) > 0.8

    def test_eight_qam_is_rectangle(self):
        pts = build_constellation(8).points
        assert len(np.unique(np.round(pts.real, 9))) == 4
        assert len(np.unique(np.round(pts.imag, 9))) == 2

    @pytest.mark.parametrize("order, side, corner", [(32, 6, 5), (128, 12, 9)])
    def test_cross_shape(self, order, side, corner):
        # odd-integer grid with the corner squares removed
        pts = build_constellation(order).points
        dmin = np.min(np.abs(pts[:, None] - pts[None, :])[~np.eye(order, dtype=bool)])
        grid = np.round(pts / dmin * 2).astype(complex)
        re, im = grid.real, grid.imag
        assert len(np.unique(re)) == side and len(np.unique(im)) == side
        assert not ((np.abs(re) >= corner) & (np.abs(im) >= corner)).any()

    @pytest.mark.parametrize("order", [3, 512, 1])
    def test_unsupported(self, order):
        with pytest.raises(UnsupportedOrder):
            build_constellation(order)

    def test_immutable(self):
        c = build_constellation(4)
        with pytest.raises(ValueError):
            c.points[0] = 0

    def test_imag_groups_cover_all_points(self):
        c = build_constellation(32)
        lv, start, length, re, sym = c.imag_groups()
        assert length.sum() == 32 and sorted(sym) == list(range(32))
        for k in range(len(lv)):
            s = slice(start[k], start[k] + length[k])
            np.testing.assert_allclose(c.points[sym[s]].imag, lv[k])
            np.testing.assert_allclose(c.points[sym[s]].real, re[s])
            assert np.all(np.diff(re[s]) > 0)


class TestSmMapping:
    def test_first_bits_pick_antenna(self):
        c = build_constellation(2)
        x = sm_map("00", 2, c)
        assert x.antenna == 0 and c.points[x.symbols[0]] == 1

    def test_table_walk(self):
        c = build_constellation(4)
        x = sm_map("1101", 4, c)
        assert x.antenna == 3
        assert c.labels[x.symbols[0]] == "01"

    @pytest.mark.parametrize("nt, order", [(1, 2), (2, 2), (4, 16), (8, 32), (2, 128), (4, 256)])
    def test_round_trip_exhaustive(self, nt, order):
        c = build_constellation(order)
        m = spectral_efficiency("SM", nt, order)
        for b in all_bits(m):
            x = sm_map(b, nt, c)
            assert "".join(map(str, sm_demap(x.antenna, x.symbols[0], nt, c))) == b

    @given(st.integers(0, 2**9 - 1))
    def test_round_trip_fuzz(self, value):
        c = build_constellation(64)
        bits = format(value, "09b")
        x = sm_map(bits, 8, c)
        assert "".join(map(str, x.bits)) == bits

    def test_zero_bits(self):
        c = build_constellation(16)
        assert not sm_demap(0, 0, 4, c).any()

    def test_dense_is_one_hot(self):
        c = build_constellation(16)
        for b in all_bits(6):
            dense = sm_map(b, 4, c).dense
            assert np.count_nonzero(dense) == 1

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            sm_map("101", 4, build_constellation(4))

    @pytest.mark.parametrize("ell, s", [(-1, 0), (4, 0), (0, 4)])
    def test_out_of_range(self, ell, s):
        with pytest.raises(IndexError):
            sm_demap(ell, s, 4, build_constellation(4))


class TestSmxMapping:
    def test_bpsk_pair(self):
        c = build_constellation(2)
        np.testing.assert_allclose(smx_map("01", 2, c).dense, np.array([1, -1]) / np.sqrt(2))

    @pytest.mark.parametrize("nt, order", [(2, 2), (3, 4), (2, 16), (4, 4), (6, 2)])
    def test_codebook_energy(self, nt, order):
        c = build_constellation(order)
        dense = c.points[smx_codebook(nt, c)] / np.sqrt(nt)
        assert abs(np.mean(np.sum(np.abs(dense) ** 2, axis=1)) - 1) < 1e-12

    def test_round_trip_exhaustive(self):
        c = build_constellation(4)
        for b in all_bits(6):
            x = smx_map(b, 3, c)
            assert "".join(map(str, smx_demap(x.symbols, 3, c))) == b

    def test_codebook_in_label_order(self):
        c = build_constellation(4)
        book = smx_codebook(3, c)
        for k, word in enumerate(book):
            assert smx_map(format(k, "06b"), 3, c).symbols == tuple(word)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            smx_map("0101", 3, build_constellation(4))

    def test_demap_shape(self):
        with pytest.raises(ShapeMismatch):
            smx_demap((0, 1), 3, build_constellation(4))


class TestBitErrors:
    def test_identical(self):
        c = build_constellation(16)
        x = sm_map("101101", 4, c)
        assert bit_errors(x, x) == 0

    def test_antenna_bit(self):
        c = build_constellation(2)
        assert bit_errors(TxVector("SM", 2, c, (0,), 0), TxVector("SM", 2, c, (0,), 1)) == 1

    def test_pair_sum_brute_force(self):
        c = build_constellation(4)
        words = [sm_map(b, 4, c) for b in all_bits(4)]
        total = sum(bit_errors(a, b) for a in words for b in words)
        brute = sum(sum(x != y for x, y in zip(a, b)) for a in all_bits(4) for b in all_bits(4))
        assert total == brute == 4 * 2**3 * 2**4

    def test_mismatched_systems(self):
        c = build_constellation(4)
        with pytest.raises(ShapeMismatch):
            bit_errors(sm_map("0000", 4, c), smx_map("0000", 2, c))
