import pytest

from fbmclink.complexity import (
    comparison_table,
    fbmc_inner,
    hybrid_inner,
    ofdm_inner,
    render_table_csv,
    render_table_markdown,
    total_complexity,
)

# published inner counts and ratios for M=128, K=4, one symbol
PUBLISHED = {
    0: (448, 960, 960, "2.14", "2.14"),
    1: (None, 2880, 2880, "6.4", "6.4"),
    2: (None, 4800, None, "10.7", None),
    3: (None, 6720, None, "15", None),
}


class TestInnerCounts:
    def test_ofdm_reference_cell(self):
        assert ofdm_inner(128, 1) == 448

    def test_ofdm_m2(self):
        assert ofdm_inner(2, 1) == 1

    def test_ofdm_linearity_in_symbols(self):
        assert ofdm_inner(128, 10) == 4480

    @pytest.mark.parametrize("i_iic,count", [(0, 960), (1, 2880), (2, 4800), (3, 6720)])
    def test_fbmc_cells(self, i_iic, count):
        assert fbmc_inner(128, 4, 1, i_iic) == count

    def test_fbmc_arithmetic_progression(self):
        deltas = {fbmc_inner(128, 4, 1, i) - fbmc_inner(128, 4, 1, i - 1)
                  for i in range(1, 8)}
        assert len(deltas) == 1

    def test_hybrid_saturates(self):
        assert hybrid_inner(128, 4, 1, 0) == 960
        assert hybrid_inner(128, 4, 1, 1) == 2880
        for i_iic in (2, 3, 5, 9):
            assert hybrid_inner(128, 4, 1, i_iic) == 2880

    def test_hybrid_equals_fbmc_up_to_one(self):
        for i_iic in (0, 1):
            assert hybrid_inner(64, 4, 3, i_iic) == fbmc_inner(64, 4, 3, i_iic)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            ofdm_inner(100, 1)
        with pytest.raises(ValueError):
            fbmc_inner(96, 4, 1, 0)


class TestPublishedTable:
    def test_all_cells_and_ratios_as_printed(self):
        rows = {r.i_iic: r for r in comparison_table()}
        for i_iic, (ofdm, fbmc, hyb, fr, hr) in PUBLISHED.items():
            row = rows[i_iic]
            assert row.ofdm == ofdm if ofdm is not None else row.ofdm is None
            assert row.fbmc == fbmc
            assert row.hybrid == hyb
            if fr == "15":
                assert f"{row.fbmc_ratio:.0f}" == fr
            elif fr == "2.14":
                assert f"{row.fbmc_ratio:.2f}" == fr
            else:
                assert f"{row.fbmc_ratio:.1f}" == fr
            if hr is None:
                assert row.hybrid_ratio is None
            elif hr == "2.14":
                assert f"{row.hybrid_ratio:.2f}" == hr
            else:
                assert f"{row.hybrid_ratio:.1f}" == hr

    def test_csv_rendering(self):
        text = render_table_csv(comparison_table())
        lines = text.strip().splitlines()
        assert lines[0].startswith("iic_iterations,")
        assert lines[1] == "0,448,960,960,2.14,2.14,0"
        assert lines[2] == "1,-,2880,2880,6.4,6.4,0"
        assert lines[3] == "2,-,4800,-,10.7,-,0"
        assert lines[4] == "3,-,6720,-,15,-,0"

    def test_extrapolated_hybrid_rows_marked(self):
        rows = comparison_table(include_all_hybrid=True)
        marked = {r.i_iic: r.hybrid_extrapolated for r in rows}
        assert marked == {0: False, 1: False, 2: True, 3: True}
        text = render_table_markdown(rows)
        assert "extrapolated" in text

    def test_runs_fast(self):
        import time

        t0 = time.time()
        for _ in range(100):
            comparison_table()
        assert time.time() - t0 < 1.0


class TestTotalComplexity:
    def test_ofdm_zero_outer_reduces_to_inner(self):
        rep = total_complexity("OFDM", m=128, n_s=3, i_dec=8, c_outer=0.0)
        assert rep.total == ofdm_inner(128, 3)

    def test_outer_terms_cancel_at_matched_budgets(self):
        # 8 OFDM decoder iterations cost the same outer term as 2
        # iterations across 4 cancellation passes
        ofdm = total_complexity("OFDM", m=128, n_s=1, n_b=648, i_dec=8,
                                c_outer=5.0)
        fbmc = total_complexity("FBMC", m=128, n_s=1, n_b=648, i_dec=2,
                                i_iic=3, c_outer=5.0)
        assert ofdm.outer_count == fbmc.outer_count

    def test_zero_bits_total_is_inner(self):
        rep = total_complexity("FBMC", m=128, k=4, n_s=2, n_b=0, i_dec=2,
                               i_iic=1, c_outer=99.0)
        assert rep.total == rep.inner_count == fbmc_inner(128, 4, 2, 1)

    def test_hybrid_extrapolation_flag(self):
        assert not total_complexity("HYBRID", m=128, i_iic=1).extrapolated
        assert total_complexity("HYBRID", m=128, i_iic=2).extrapolated

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            total_complexity("GFDM", m=128)
