"""Config files, binary state dumps and atomic table output."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

__all__ = [
    "ConfigError",
    "CONFIG_KEYS",
    "read_config",
    "parse_config",
    "write_state",
    "read_state",
    "write_wigner_binary",
    "read_wigner_binary",
    "atomic_write_bytes",
    "write_csv",
    "read_csv",
    "sha256_file",
]


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


_INT = int
_FLOAT = float
CONFIG_KEYS = {
    "kbar": _FLOAT,
    "xi": _FLOAT,
    "D": _FLOAT,
    "epsilon": _FLOAT,
    "x0": _FLOAT,
    "p0": _FLOAT,
    "sigma_x": _FLOAT,
    "grid_size": _INT,
    "steps_per_period": _INT,
    "n_periods": _INT,
    "n_traj": _INT,
    "seed": _INT,
    "scenario": str,
}


def parse_config(text: str) -> dict:
    """Parse flat ``key = value`` lines (``#`` comments allowed).

    Unknown keys raise :class:`ConfigError`: a typo must not silently
    fall back to a default.
    """
    parser = configparser.ConfigParser(delimiters=("=", ":"), comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (D vs d)
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if parser.sections() != ["config"]:
        raise ConfigError("config must be flat key/value pairs without sections")
    out = {}
    for key, raw in parser.items("config"):
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}", key)
        kind = CONFIG_KEYS[key]
        raw = raw.strip().strip('"').strip("'")
        try:
            if kind is _INT:
                value = float(raw)
                if value != int(value):
                    raise ValueError
                out[key] = int(value)
            elif kind is _FLOAT:
                out[key] = float(raw)
            else:
                out[key] = raw
        except ValueError:
            raise ConfigError(f"bad value for {key!r}: {raw!r}", key) from None
    return out


def read_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def atomic_write_bytes(path, data: bytes) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return atomic_write_bytes(path, buf.getvalue().encode("utf-8"))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and float array of a numeric CSV written by :func:`write_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# -- binary state dumps -----------------------------------------------------
# Header: magic, version, n (uint64), kbar, time (float64), all little-endian,
# followed by n interleaved (re, im) float64 pairs.
STATE_MAGIC = int.from_bytes(b"CSSESTAT", "little")
WIGNER_MAGIC = int.from_bytes(b"CSSEWIGN", "little")
FORMAT_VERSION = 1
_STATE_HEADER = struct.Struct("<QQQdd")
_WIGNER_HEADER = struct.Struct("<QQQQdd")


def encode_state(amps, kbar: float, time: float) -> bytes:
    amps = np.ascontiguousarray(amps, dtype="<c16")
    return _STATE_HEADER.pack(STATE_MAGIC, FORMAT_VERSION, amps.size, kbar, time) + amps.tobytes()


def write_state(path, amps, kbar: float, time: float) -> Path:
    return atomic_write_bytes(path, encode_state(amps, kbar, time))


def read_state(path):
    """Return ``(amps, kbar, time)`` from a state dump."""
    data = Path(path).read_bytes()
    if len(data) < _STATE_HEADER.size:
        raise ValueError(f"{path}: truncated state header")
    magic, version, n, kbar, time = _STATE_HEADER.unpack_from(data)
    if magic != STATE_MAGIC:
        raise ValueError(f"{path}: not a state dump")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    body = data[_STATE_HEADER.size:]
    if len(body) != 16 * n:
        raise ValueError(f"{path}: expected {n} amplitudes, found {len(body) // 16}")
    return np.frombuffer(body, dtype="<c16").astype(complex), kbar, time


def write_wigner_binary(path, values, kbar: float, time: float) -> Path:
    values = np.ascontiguousarray(values, dtype="<f8")
    nx, npts = values.shape
    head = _WIGNER_HEADER.pack(WIGNER_MAGIC, FORMAT_VERSION, nx, npts, kbar, time)
    return atomic_write_bytes(path, head + values.tobytes())


def read_wigner_binary(path):
    data = Path(path).read_bytes()
    magic, version, nx, npts, kbar, time = _WIGNER_HEADER.unpack_from(data)
    if magic != WIGNER_MAGIC or version != FORMAT_VERSION:
        raise ValueError(f"{path}: not a Wigner dump")
    values = np.frombuffer(data[_WIGNER_HEADER.size:], dtype="<f8").reshape(nx, npts).copy()
    return values, kbar, time
