import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lpskew.io import (
    MAGIC,
    SeriesFormatError,
    format_binary,
    format_csv,
    parse_binary,
    parse_csv,
    read_series,
    write_series,
)

finite = st.floats(allow_nan=False, allow_infinity=False)
series = arrays(np.float64, st.integers(0, 40), elements=finite)


@given(series)
def test_csv_round_trip_is_exact(x):
    assert parse_csv(format_csv(x)).tobytes() == x.tobytes()


@given(series)
def test_binary_round_trip_is_exact(x):
    assert parse_binary(format_binary(x)).tobytes() == x.tobytes()


def test_csv_layout():
    assert format_csv([1.0, 0.1]) == "x\n1.0\n0.1\n"


def test_binary_layout():
    blob = format_binary([1.0])
    assert blob[:8] == MAGIC
    assert blob[8:16] == (1).to_bytes(8, "little")
    assert blob[16:] == np.array([1.0], dtype="<f8").tobytes()


@pytest.mark.parametrize("fmt", ["csv", "bin"])
def test_file_round_trip_with_sniffing(tmp_path, fmt):
    x = np.array([0.5, -1.25, 3e-300])
    path = tmp_path / f"s.{fmt}"
    write_series(path, x, fmt)
    np.testing.assert_array_equal(read_series(path), x)
    np.testing.assert_array_equal(read_series(path, fmt), x)


def test_malformed_inputs():
    with pytest.raises(SeriesFormatError):
        parse_csv("y\n1\n")
    with pytest.raises(SeriesFormatError):
        parse_csv("x\n1\nabc\n")
    with pytest.raises(SeriesFormatError):
        parse_binary(b"NOTMAGIC" + b"\0" * 8)
    with pytest.raises(SeriesFormatError):
        parse_binary(format_binary([1.0, 2.0])[:-1])


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        write_series(tmp_path / "a", [1.0], "xml")
