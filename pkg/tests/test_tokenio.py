"""Binary and CSV token file round-trips and their failure diagnostics."""

import struct

import numpy as np
import pytest

from sagatt.errors import TokenFormatError
from sagatt.tokenio import MAGIC, load_tokens, load_tokens_csv, save_tokens, save_tokens_csv


def roundtrip(tmp_path, m):
    path = tmp_path / "tokens.bin"
    save_tokens(path, m)
    return load_tokens(path)


def test_binary_roundtrip_bit_exact(tmp_path):
    rng = np.random.Generator(np.random.PCG64(0))
    m = rng.standard_normal((64, 32))
    back = roundtrip(tmp_path, m)
    assert back.dtype == np.float64
    assert (back == m).all()


def test_binary_roundtrip_single_token(tmp_path):
    m = np.array([[1.5, -2.5, 3.25]])
    assert (roundtrip(tmp_path, m) == m).all()


def test_header_layout(tmp_path):
    path = tmp_path / "t.bin"
    save_tokens(path, np.zeros((3, 2)))
    raw = path.read_bytes()
    magic, n, c, reserved = struct.unpack_from("<4sIII", raw)
    assert magic == MAGIC
    assert (n, c, reserved) == (3, 2, 0)
    assert len(raw) == 16 + 3 * 2 * 8


def test_bad_magic(tmp_path):
    path = tmp_path / "t.bin"
    save_tokens(path, np.ones((2, 2)))
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(TokenFormatError, match="magic"):
        load_tokens(path)


def test_truncated_header(tmp_path):
    path = tmp_path / "t.bin"
    path.write_bytes(b"SA")
    with pytest.raises(TokenFormatError, match="header"):
        load_tokens(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "t.bin"
    save_tokens(path, np.ones((4, 4)))
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(TokenFormatError, match="truncated payload"):
        load_tokens(path)


def test_trailing_bytes(tmp_path):
    path = tmp_path / "t.bin"
    save_tokens(path, np.ones((2, 2)))
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(TokenFormatError, match="trailing"):
        load_tokens(path)


def test_zero_dimension_rejected(tmp_path):
    path = tmp_path / "t.bin"
    payload = struct.pack("<4sIII", MAGIC, 0, 4, 0)
    path.write_bytes(payload)
    with pytest.raises(TokenFormatError, match="dimensions"):
        load_tokens(path)


def test_non_finite_payload_rejected(tmp_path):
    path = tmp_path / "t.bin"
    m = np.ones((2, 2))
    save_tokens(path, m)
    raw = bytearray(path.read_bytes())
    raw[16:24] = struct.pack("<d", float("nan"))
    path.write_bytes(bytes(raw))
    with pytest.raises(TokenFormatError, match="non-finite"):
        load_tokens(path)


def test_csv_roundtrip_exact(tmp_path):
    rng = np.random.Generator(np.random.PCG64(1))
    m = rng.standard_normal((16, 5))
    path = tmp_path / "t.csv"
    save_tokens_csv(path, m)
    back = load_tokens_csv(path)
    # repr round-trips float64 exactly
    assert (back == m).all()


def test_csv_and_binary_twins_agree(tmp_path):
    rng = np.random.Generator(np.random.PCG64(2))
    m = rng.standard_normal((12, 7))
    bpath = tmp_path / "t.bin"
    cpath = tmp_path / "t.csv"
    save_tokens(bpath, m)
    save_tokens_csv(cpath, m)
    a = load_tokens(bpath)
    b = load_tokens_csv(cpath)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_csv_header_required(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("1.0,2.0\n")
    with pytest.raises(TokenFormatError):
        load_tokens_csv(path)
