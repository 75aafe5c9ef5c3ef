import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavity_sse.io import (ConfigError, parse_config, read_csv, read_state, read_wigner_binary, sha256_file,
                           write_csv, write_state, write_wigner_binary)


def test_parse_full_config():
    text = """
# regular seed
scenario = angles
kbar = 0.25
xi = 1.2
D = 0.001   # measurement strength
epsilon = 0.2
x0 = 0.0
p0 = 1.0
sigma_x = 0.3906
grid_size = 256
steps_per_period = 200
n_periods = 200
n_traj = 100
seed = 42
"""
    cfg = parse_config(text)
    assert cfg["scenario"] == "angles"
    assert cfg["D"] == 0.001 and cfg["grid_size"] == 256 and isinstance(cfg["seed"], int)


@pytest.mark.parametrize("text,key", [("bogus = 1", "bogus"), ("d = 0.1", "d"), ("grid_size = 12.5", "grid_size"),
                                      ("kbar = abc", "kbar")])
def test_config_errors_name_key(text, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.key == key
    assert key in str(err.value)


def test_sections_rejected():
    with pytest.raises(ConfigError):
        parse_config("kbar = 0.1\n[other]\nxi = 1\n")


@given(st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False), min_size=1, max_size=64),
       st.floats(0.01, 10), st.floats(0, 1e4))
def test_state_roundtrip(tmp_path_factory, values, kbar, time):
    path = tmp_path_factory.mktemp("s") / "psi.bin"
    amps = np.array(values, dtype=complex)
    write_state(path, amps, kbar, time)
    back, kb, t = read_state(path)
    assert np.array_equal(back, amps) and kb == kbar and t == time


def test_state_layout(tmp_path):
    path = write_state(tmp_path / "a.bin", np.array([1 + 2j, 3 - 4j]), 0.25, 1.5)
    raw = path.read_bytes()
    assert raw[:8] == b"CSSESTAT"
    assert int.from_bytes(raw[8:16], "little") == 1
    assert int.from_bytes(raw[16:24], "little") == 2
    body = np.frombuffer(raw[40:], dtype="<f8")
    assert body.tolist() == [1.0, 2.0, 3.0, -4.0]


def test_state_corruption_detected(tmp_path):
    path = write_state(tmp_path / "a.bin", np.ones(4, complex), 0.25, 0.0)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError, match="expected 4"):
        read_state(path)
    path.write_bytes(b"junk" * 20)
    with pytest.raises(ValueError):
        read_state(path)


def test_wigner_roundtrip(tmp_path):
    v = np.arange(12.0).reshape(3, 4)
    write_wigner_binary(tmp_path / "w.bin", v, 0.25, 2.0)
    back, kb, t = read_wigner_binary(tmp_path / "w.bin")
    assert np.array_equal(back, v) and kb == 0.25 and t == 2.0


def test_csv_format(tmp_path):
    path = write_csv(tmp_path / "t.csv", ["a", "b"], [(1, 0.1), (np.int64(2), np.float64(1e-20))])
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    assert raw.decode().splitlines() == ["a,b", "1,0.1", "2,1e-20"]
    header, data = read_csv(path)
    assert header == ["a", "b"] and data.shape == (2, 2)
    assert len(sha256_file(path)) == 64
    assert not list(tmp_path.glob(".*tmp"))
