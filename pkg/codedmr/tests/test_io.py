import io as _io
import json
import pytest
from fractions import Fraction

from codedmr.cli import bundled_profile
from codedmr.utils import io


def test_read_records(tmp_path):
    path = tmp_path / "records.txt"
    path.write_bytes(b"one\r\n\n  two \t\nthree\n")
    # Records are opaque: only line terminators and empty lines go
    assert io.read_records(str(path)) == [b"one", b"  two \t", b"three"]

    with pytest.raises(FileNotFoundError) as excinfo:
        io.read_records(str(tmp_path / "missing.txt"))
    assert "does not exist" in str(excinfo.value)


def test_synthetic_records():
    records = io.synthetic_records(20, record_length=24, seed=3)
    assert len(records) == 20
    assert all(len(r) >= 24 for r in records)
    assert all(r.replace(b" ", b"").isalpha() for r in records)

    assert records == io.synthetic_records(20, record_length=24, seed=3)
    assert records != io.synthetic_records(20, record_length=24, seed=4)

    with pytest.raises(ValueError) as excinfo:
        io.synthetic_records(0)
    assert "number of records" in str(excinfo.value)


def test_read_bundled_profile():
    sizes, needs, slots = io.read_profile(bundled_profile("terasort-k3"))

    assert len(sizes) == 18
    assert sizes[(3, "1")] == Fraction(1, 12)
    assert sizes[(1, "6")] == Fraction(1, 24)
    assert sum(sizes.values()) == 1
    assert needs[0] == (2, "1")
    assert slots[0] == [(2, "1"), (3, "3")]


def test_write_profile(tmp_path):
    path = str(tmp_path / "out.profile")
    sizes = {(1, "12,1"): Fraction(1, 3), (2, "12,1"): Fraction(2, 3)}
    io.write_profile(path, sizes, needs=[(2, "12,1")], slots=[[(2, "12,1")]])

    assert io.read_profile(path) == (sizes, [(2, "12,1")], [[(2, "12,1")]])


def test_read_profile_invalid(tmp_path):
    path = tmp_path / "bad.profile"
    path.write_text("size 1 1 1/2\nsize 1 2 -1/2\n")
    with pytest.raises(ValueError) as excinfo:
        io.read_profile(str(path))
    assert "Invalid profile line 2" in str(excinfo.value)

    path.write_text("weight 1 1\n")
    with pytest.raises(ValueError) as excinfo:
        io.read_profile(str(path))
    assert "Invalid profile line 1" in str(excinfo.value)


def test_read_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nK = 32\nmode=wired  # inline\n\n")
    assert io.read_config(str(path)) == {"K": "32", "mode": "wired"}

    path.write_text("K 32\n")
    with pytest.raises(ValueError) as excinfo:
        io.read_config(str(path))
    assert "expected key=value" in str(excinfo.value)


def test_trace_and_csv(tmp_path):
    record = {"tx": 1, "Q": [1, 2], "slot": 0}
    line = io.format_trace_record(record)
    assert line == '{"Q":[1,2],"slot":0,"tx":1}'

    path = tmp_path / "trace.jsonl"
    io.write_trace(str(path), [record, record])
    lines = path.read_text().splitlines()
    assert [json.loads(x) for x in lines] == [record, record]

    stream = _io.StringIO()
    io.write_csv(stream, ["a", "b"], [[1, "1/2"]])
    assert stream.getvalue() == "a,b\n1,1/2\n"
