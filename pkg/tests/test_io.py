import json

import numpy as np
import pytest

from steposc import io
from steposc.errors import IngestionError


def test_spectrum_roundtrip(tmp_path):
    ev = np.array([1.0 / 3.0, 2.5, 7.125])
    io.write_spectrum_csv(tmp_path / "s.csv", ev, [1e-12, 2e-12, 3e-12])
    assert io.read_spectrum_csv(tmp_path / "s.csv").tobytes() == ev.tobytes()


def test_third_party_csv_any_order(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("eigenvalue,index,extra\n2.0,2,a\n1.0,1,b\n")
    np.testing.assert_array_equal(io.read_spectrum_csv(p), [1.0, 2.0])


@pytest.mark.parametrize("text", ["", "index,energy\n1,2.0\n", "index,eigenvalue\n1,abc\n",
                                  "index,eigenvalue\n1,nan\n"])
def test_bad_spectrum_csv(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(IngestionError):
        io.read_spectrum_csv(p)


def test_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        io.read_spectrum_csv(tmp_path / "nope.csv")


def test_fields_roundtrip(tmp_path):
    desc = {"n1": 3, "n2": 4, "h1": 0.5, "h2": 0.5, "q1_first": -0.5, "q2_first": -1.0}
    f = np.random.default_rng(0).standard_normal((2, 3, 4))
    io.write_fields(tmp_path / "v.bin", f, desc)
    side = json.loads((tmp_path / "v.json").read_text())
    assert side["shape"] == [2, 3, 4] and side["dtype"] == "<f8"
    g, meta = io.read_fields(tmp_path / "v.bin")
    assert g.tobytes() == f.tobytes()
    assert meta["count"] == 2


def test_fields_truncated(tmp_path):
    desc = {"n1": 2, "n2": 2}
    io.write_fields(tmp_path / "v.bin", np.ones((1, 2, 2)), desc)
    (tmp_path / "v.bin").write_bytes(b"\0" * 8)
    with pytest.raises(IngestionError):
        io.read_fields(tmp_path / "v.bin")


def test_fields_shape_checked(tmp_path):
    with pytest.raises(ValueError):
        io.write_fields(tmp_path / "v.bin", np.ones((3, 3)), {"n1": 2, "n2": 2})


def test_csv_floats_exact(tmp_path):
    x = 0.1 + 0.2
    io.write_csv(tmp_path / "t.csv", ["a", "b"], [(x, 3)])
    cols = io.read_csv_columns(tmp_path / "t.csv", ["a"])
    assert cols["a"][0] == x


def test_json_lines(tmp_path):
    io.write_json_lines(tmp_path / "a.jsonl", [{"n": np.int64(1), "v": np.float64(0.5)}])
    assert io.read_json_lines(tmp_path / "a.jsonl") == [{"n": 1, "v": 0.5}]
