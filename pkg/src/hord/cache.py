"""Binary on-disk cache for coefficient tables.

Layout (all little-endian)::

    b"HORD1" | weight u32 | level u32 | n_max u64
    n_max x ( length u32 | sign byte | magnitude bytes )
    sha256 of everything above (32 bytes)

The sign byte is 0 for non-negative and 1 for negative values; ``length``
counts the sign byte.  Files are keyed by (label, weight, level, n_max); a
request for fewer coefficients than a cached file holds is served by
truncation.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
from pathlib import Path

from .errors import ChecksumError, ParseError
from .forms import BUILTIN, CoefficientTable, FormDescriptor, build_table

log = logging.getLogger(__name__)

MAGIC = b"HORD1"
_HEADER = struct.Struct("<IIQ")
_LEN = struct.Struct("<I")


def default_cache_dir() -> Path:
    env = os.environ.get("HORD_CACHE")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "hord"


def encode_table(table: CoefficientTable) -> bytes:
    f = table.form
    parts = [MAGIC, _HEADER.pack(f.weight, f.level, table.n_max)]
    pack_len = _LEN.pack
    for c in table.coeffs:
        mag = abs(c)
        body = mag.to_bytes((mag.bit_length() + 7) // 8, "little")
        parts.append(pack_len(len(body) + 1))
        parts.append(b"\x01" if c < 0 else b"\x00")
        parts.append(body)
    blob = b"".join(parts)
    return blob + hashlib.sha256(blob).digest()


def decode_table(data: bytes, label: str = "Delta", source: str = BUILTIN) -> CoefficientTable:
    if len(data) < len(MAGIC) + _HEADER.size + 32:
        raise ChecksumError("cache file is truncated")
    blob, digest = data[:-32], data[-32:]
    if hashlib.sha256(blob).digest() != digest:
        raise ChecksumError("cache checksum mismatch")
    if not blob.startswith(MAGIC):
        raise ParseError("bad magic bytes")
    weight, level, n_max = _HEADER.unpack_from(blob, len(MAGIC))
    pos = len(MAGIC) + _HEADER.size
    coeffs = []
    frm = int.from_bytes
    for _ in range(n_max):
        (length,) = _LEN.unpack_from(blob, pos)
        sign = blob[pos + 4]
        mag = frm(blob[pos + 5 : pos + 4 + length], "little")
        coeffs.append(-mag if sign else mag)
        pos += 4 + length
    if pos != len(blob):
        raise ParseError("trailing bytes after coefficient records")
    return CoefficientTable(FormDescriptor(weight, level, source, label), n_max, tuple(coeffs))


def write_cache(table: CoefficientTable, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(encode_table(table))
    os.replace(tmp, path)


def read_cache(path, label: str = "Delta", source: str = BUILTIN) -> CoefficientTable:
    return decode_table(Path(path).read_bytes(), label, source)


def cache_roundtrip(table: CoefficientTable, cache_dir=None) -> CoefficientTable:
    """Write ``table`` to the cache and read it back."""
    path = cache_path(table.form, table.n_max, cache_dir)
    write_cache(table, path)
    return read_cache(path, table.form.label, table.form.source)


def cache_path(form: FormDescriptor, n_max: int, cache_dir=None) -> Path:
    base = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    return base / f"{form.label}-w{form.weight}-N{form.level}-{n_max}.hord"


def _cached_sizes(form: FormDescriptor, base: Path) -> list[int]:
    prefix = f"{form.label}-w{form.weight}-N{form.level}-"
    sizes = []
    if base.is_dir():
        for p in base.glob(prefix + "*.hord"):
            tail = p.name[len(prefix) : -len(".hord")]
            if tail.isdigit():
                sizes.append(int(tail))
    return sorted(sizes)


def load_table(form: FormDescriptor, n_max: int, cache_dir=None, use_cache: bool = True,
               memory_budget: int | None = None) -> CoefficientTable:
    """Serve ``a_f(1..n_max)`` from the smallest sufficient cache file, else build and store.

    A corrupt file is logged, discarded and rebuilt.
    """
    if not use_cache:
        return build_table(form, n_max, memory_budget)
    base = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    for size in _cached_sizes(form, base):
        if size < n_max:
            continue
        path = cache_path(form, size, base)
        try:
            table = read_cache(path, form.label, form.source)
        except (ChecksumError, ParseError, OSError) as exc:
            log.warning("discarding corrupt cache %s: %s", path, exc)
            path.unlink(missing_ok=True)
            continue
        return table if size == n_max else table.truncate(n_max)
    table = build_table(form, n_max, memory_budget)
    try:
        write_cache(table, cache_path(form, n_max, base))
    except OSError as exc:
        log.warning("could not write cache: %s", exc)
    return table
