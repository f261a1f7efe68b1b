import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from memkit.errors import DuplicateDate, NegativeValue, ParseError
from memkit.ingest import (
    CsvLayout,
    absolute_returns_to_vol,
    load_csv,
    load_series,
    realized_kernel_to_vol,
    vol_to_absolute_returns,
    vol_to_realized_kernel,
    write_csv,
)


def _write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_three_rows(self, tmp_path):
        p = _write(tmp_path, "date,value,ret\n2020-01-02,1.5,0.01\n2020-01-03,2.0,-0.02\n2020-01-06,0.5,\n")
        raw = load_csv(CsvLayout(p, "date", "value", "ret"))
        assert raw.values.shape == (3,)
        np.testing.assert_array_equal(raw.values, [1.5, 2.0, 0.5])
        assert math.isnan(raw.returns[2])

    def test_sorted_by_date(self, tmp_path):
        p = _write(tmp_path, "date,value\n2020-01-06,3\n2020-01-02,1\n2020-01-03,2\n")
        raw = load_csv(CsvLayout(p))
        np.testing.assert_array_equal(raw.values, [1.0, 2.0, 3.0])
        assert str(raw.dates[0]) == "2020-01-02"

    def test_duplicate_date(self, tmp_path):
        p = _write(tmp_path, "date,value\n2020-01-02,1\n2020-01-03,2\n2020-01-02,3\n")
        with pytest.raises(DuplicateDate):
            load_csv(CsvLayout(p))

    def test_non_numeric_cell_reports_row(self, tmp_path):
        p = _write(tmp_path, "date,value\n2020-01-02,1\n2020-01-03,abc\n")
        with pytest.raises(ParseError) as info:
            load_csv(CsvLayout(p))
        assert info.value.row == 2
        assert info.value.column == "value"

    def test_bad_date(self, tmp_path):
        p = _write(tmp_path, "date,value\n02/01/2020,1\n")
        with pytest.raises(ParseError) as info:
            load_csv(CsvLayout(p))
        assert info.value.row == 1

    def test_custom_format_and_delimiter(self, tmp_path):
        p = _write(tmp_path, "day;v\n02/01/2020;1\n03/01/2020;2\n")
        raw = load_csv(CsvLayout(p, "day", "v", date_format="%d/%m/%Y", delimiter=";"))
        assert str(raw.dates[1]) == "2020-01-03"

    def test_missing_column(self, tmp_path):
        p = _write(tmp_path, "date,value\n2020-01-02,1\n")
        with pytest.raises(ParseError):
            load_csv(CsvLayout(p, value_column="rk"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_csv(CsvLayout(tmp_path / "nope.csv"))

    def test_write_then_read(self, tmp_path, uni_sim):
        d = uni_sim.data
        p = tmp_path / "sim.csv"
        write_csv(p, d.dates, {"x": d.values, "ret": d.returns})
        s = load_series(CsvLayout(p, "date", "x", "ret"))
        np.testing.assert_array_equal(s.values, d.values)
        np.testing.assert_array_equal(s.returns, d.returns)
        np.testing.assert_array_equal(s.dates, d.dates)


class TestTransforms:
    dates = np.array(["2020-01-02", "2020-01-03"], dtype="datetime64[D]")

    def test_zero_return(self):
        s = absolute_returns_to_vol([0.0, 0.01], self.dates)
        assert s.values[0] == 0.0

    def test_absolute_return_arithmetic(self):
        s = absolute_returns_to_vol([-0.01, 0.0], self.dates, 252)
        assert s.values[0] == pytest.approx(0.01 * math.sqrt(math.pi / 2) * 100 * math.sqrt(252), rel=1e-14)
        # 1.2533141373 * 15.8745078664 by hand
        assert s.values[0] == pytest.approx(19.89575, abs=5e-5)
        assert s.returns[0] == -0.01

    def test_realized_kernel_zero(self):
        assert realized_kernel_to_vol([0.0, 1e-4], self.dates).values[0] == 0.0

    def test_realized_kernel_arithmetic(self):
        s = realized_kernel_to_vol([1e-4, 0.0], self.dates, annualization_days=252)
        assert s.values[0] == pytest.approx(100 * math.sqrt(0.0252), rel=1e-14)
        assert s.values[0] == pytest.approx(15.8745, abs=5e-5)

    def test_realized_kernel_negative(self):
        with pytest.raises(NegativeValue):
            realized_kernel_to_vol([1e-4, -1e-6], self.dates)

    @given(arrays(float, 30, elements=st.floats(-0.2, 0.2)))
    def test_absolute_returns_round_trip(self, r):
        dates = np.arange(30).astype("datetime64[D]")
        back = vol_to_absolute_returns(absolute_returns_to_vol(r, dates).values)
        np.testing.assert_allclose(back, np.abs(r), rtol=1e-12, atol=0)

    @given(arrays(float, 30, elements=st.floats(0.0, 0.01)))
    def test_realized_kernel_round_trip(self, rk):
        dates = np.arange(30).astype("datetime64[D]")
        back = vol_to_realized_kernel(realized_kernel_to_vol(rk, dates).values)
        np.testing.assert_allclose(back, rk, rtol=1e-12, atol=0)

    @given(st.floats(0.0, 0.1), st.floats(0.0, 0.1))
    def test_monotone(self, a, b):
        dates = np.arange(2).astype("datetime64[D]")
        lo, hi = sorted((a, b))
        v = realized_kernel_to_vol([lo, hi], dates).values
        assert v[0] <= v[1]
        w = absolute_returns_to_vol([lo, hi], dates).values
        assert w[0] <= w[1]

    def test_load_series_rk(self, tmp_path):
        p = _write(tmp_path, "date,rk,ret\n2020-01-02,0.0001,0.01\n2020-01-03,0.0004,-0.01\n")
        s = load_series(CsvLayout(p, "date", "rk", "ret"), transform="rk")
        np.testing.assert_allclose(s.values, 100 * np.sqrt(252 * np.array([1e-4, 4e-4])), rtol=1e-14)
        np.testing.assert_array_equal(s.neg_indicator, [0.0, 1.0])

    def test_load_series_absret_uses_values_as_returns(self, tmp_path):
        p = _write(tmp_path, "date,r\n2020-01-02,0.01\n2020-01-03,-0.02\n")
        s = load_series(CsvLayout(p, "date", "r"), transform="absret")
        np.testing.assert_array_equal(s.returns, [0.01, -0.02])
        assert s.values[1] == pytest.approx(2 * s.values[0], rel=1e-14)
