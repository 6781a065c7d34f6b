import pytest

from hord import cache
from hord.errors import ChecksumError, ParseError
from hord.forms import DELTA, builtin_form, build_delta_table


def test_roundtrip_is_bit_identical(tmp_path, delta_small):
    t = delta_small.truncate(10**3)
    back = cache.cache_roundtrip(t, tmp_path)
    assert back == t
    assert cache.encode_table(back) == cache.encode_table(t)


def test_layout_header(delta_small):
    blob = cache.encode_table(delta_small.truncate(3))
    assert blob.startswith(b"HORD1")
    assert blob[5:21] == (12).to_bytes(4, "little") + (1).to_bytes(4, "little") + (3).to_bytes(8, "little")
    # a(2) = -24: length 2 (sign + one byte), sign 1, magnitude 24
    rec2 = blob[21 + 6 : 21 + 12]
    assert rec2 == (2).to_bytes(4, "little") + b"\x01\x18"


def test_truncated_file_detected_and_rebuilt(tmp_path, delta_small):
    t = delta_small.truncate(500)
    path = cache.cache_path(DELTA, 500, tmp_path)
    cache.write_cache(t, path)
    path.write_bytes(path.read_bytes()[:-40])
    with pytest.raises(ChecksumError):
        cache.read_cache(path)
    assert cache.load_table(DELTA, 500, tmp_path) == t
    assert cache.read_cache(path) == t  # rewritten


def test_bad_magic_with_valid_checksum():
    import hashlib

    blob = b"XXXX1" + b"\x00" * 16
    with pytest.raises(ParseError):
        cache.decode_table(blob + hashlib.sha256(blob).digest())


def test_smaller_request_served_by_truncation(tmp_path, delta_small):
    cache.write_cache(delta_small.truncate(1000), cache.cache_path(DELTA, 1000, tmp_path))
    got = cache.load_table(DELTA, 300, tmp_path)
    assert got == delta_small.truncate(300)
    assert len(list(tmp_path.iterdir())) == 1


def test_extension_keeps_prefix(tmp_path):
    small = cache.load_table(DELTA, 10**4, tmp_path)
    big = cache.load_table(DELTA, 10**5, tmp_path)
    assert big.coeffs[: 10**4] == small.coeffs


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("HORD_CACHE", str(tmp_path / "x"))
    assert cache.default_cache_dir() == tmp_path / "x"
    cache.load_table(builtin_form(16), 50)
    assert (tmp_path / "x" / "Delta16-w16-N1-50.hord").exists()


def test_no_cache_builds_directly(tmp_path):
    t = cache.load_table(DELTA, 20, tmp_path, use_cache=False)
    assert t == build_delta_table(20)
    assert not tmp_path.joinpath("Delta-w12-N1-20.hord").exists()
