import numpy as np
import pytest

from fbmclink.filterbank import (
    PrototypeFilter,
    build_filter_bank,
    export_coeffs_csv,
    phydyas_coeffs,
)
from fbmclink.modem import dft_matrix


class TestPhydyasCoeffs:
    def test_leading_tap_is_zero(self):
        filt = phydyas_coeffs(4, 16)
        assert abs(filt.coeffs[0]) < 1e-12

    def test_center_tap_value(self):
        # cos(pi k) = (-1)^k collapses the series to 1 + 2 sum P(k)
        filt = phydyas_coeffs(4, 16)
        assert filt.coeffs[32] == pytest.approx(4.828427, abs=5e-6)

    def test_symmetry(self):
        filt = phydyas_coeffs(4, 16)
        g = filt.coeffs
        for i in range(1, 64):
            assert g[i] == pytest.approx(g[64 - i], abs=1e-12)

    def test_leading_tap_independent_of_m(self):
        for m in (8, 16, 32, 64, 128):
            assert abs(phydyas_coeffs(4, m).coeffs[0]) < 1e-12

    def test_rejects_other_overlap_without_table(self):
        with pytest.raises(ValueError):
            phydyas_coeffs(3, 16)

    def test_rejects_tiny_m(self):
        with pytest.raises(ValueError):
            phydyas_coeffs(4, 1)

    def test_custom_table_allows_other_overlap(self):
        filt = phydyas_coeffs(2, 8, p_table=(1.0, 0.5))
        assert filt.K == 2
        assert len(filt.coeffs) == 16

    def test_length_is_k_times_m(self):
        filt = phydyas_coeffs(4, 32)
        assert filt.length == 128
        assert filt.coeffs.shape == (128,)


class TestPrototypeFilter:
    def test_validates_tap_count(self):
        with pytest.raises(ValueError):
            PrototypeFilter(np.ones(7), 2, 4)

    def test_normalized_energy(self):
        filt = phydyas_coeffs(4, 16).normalized()
        assert np.sum(filt.coeffs**2) == pytest.approx(16.0, rel=1e-12)

    def test_coeffs_read_only(self):
        filt = phydyas_coeffs(4, 16)
        with pytest.raises(ValueError):
            filt.coeffs[0] = 1.0


class TestBuildFilterBank:
    def test_k1_flat_is_identity(self):
        bank = build_filter_bank(PrototypeFilter(np.ones(2), 1, 2))
        assert np.array_equal(bank.synthesis, np.eye(2))

    def test_column_support(self):
        # strictly positive taps so structural support equals the nonzeros
        filt = PrototypeFilter(np.arange(1.0, 65.0), 4, 16)
        bank = build_filter_bank(filt)
        col0 = np.flatnonzero(bank.synthesis[:, 0])
        assert col0.tolist() == [0, 16, 32, 48]
        for t in range(16):
            rows = np.flatnonzero(bank.synthesis[:, t])
            assert rows.tolist() == [t, t + 16, t + 32, t + 48]

    def test_phydyas_support_within_pattern(self, bank16_raw):
        s = bank16_raw.synthesis
        for t in range(16):
            outside = np.delete(s[:, t], [t, t + 16, t + 32, t + 48])
            assert np.all(outside == 0)

    def test_analysis_is_conjugate_transpose(self, bank16):
        assert np.array_equal(bank16.analysis, bank16.synthesis.conj().T)

    def test_gram_diagonal_equals_branch_energies(self, bank16_raw):
        # columns have disjoint support, so the literal Gram is diagonal
        s = bank16_raw.synthesis
        gram = bank16_raw.analysis @ s
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) == 0
        g = bank16_raw.filter.coeffs
        for t in range(16):
            expect = np.sum(g[t::16] ** 2)
            assert gram[t, t].real == pytest.approx(expect, rel=1e-12)
            assert abs(gram[t, t].imag) < 1e-15


class TestRoundTripNonOrthogonality:
    def test_unit_diagonal_after_normalization(self, bank16):
        phi = dft_matrix(16)
        rt = phi @ bank16.analysis @ bank16.synthesis @ phi.conj().T
        assert np.allclose(np.diag(rt).real, 1.0, atol=1e-10)
        assert np.max(np.abs(np.diag(rt).imag)) < 1e-10

    def test_single_filter_is_not_orthogonal(self, bank16):
        # adjacent-subcarrier leakage of the DFT-wrapped round trip is the
        # same-symbol intrinsic interference; it must be clearly nonzero
        phi = dft_matrix(16)
        rt = phi @ bank16.analysis @ bank16.synthesis @ phi.conj().T
        off = np.abs(rt - np.diag(np.diag(rt)))
        ratio = off.max() / np.abs(np.diag(rt)).min()
        assert np.isfinite(ratio)
        assert ratio > 0.1

    def test_cross_window_overlap_is_nonzero(self, bank16):
        # windows spaced M samples overlap; their Gram carries the ISI
        s = bank16.synthesis
        shifted = np.zeros_like(s)
        shifted[16:, :] = s[:-16, :]
        cross = s.conj().T @ shifted
        assert np.max(np.abs(cross)) > 0.1


def test_export_csv_17_digits(tmp_path):
    filt = phydyas_coeffs(4, 16)
    path = tmp_path / "taps.csv"
    export_coeffs_csv(filt, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 64
    back = np.array([float(s) for s in lines])
    assert np.array_equal(back, filt.coeffs)  # 17 significant digits round-trip
