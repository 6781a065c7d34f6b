"""Exact truncated power series over the integers.

Products are formed by Kronecker substitution: each series is packed into one
GMP integer with a fixed number of bits per coefficient (biased so that the
chunks are non-negative), multiplied once, and unpacked.  This is an exact
convolution whose cost is a single big-integer multiplication, so it is
deterministic and independent of any chunking of the output.
"""

from __future__ import annotations

from gmpy2 import mpz

Series = list  # list[int], coefficient of q^i at index i


def _width_bits(bound: int) -> int:
    """Chunk width (a multiple of 8) holding signed values of magnitude <= bound."""
    bits = bound.bit_length() + 2
    return (bits + 7) // 8 * 8


def _bias(count: int, width: int) -> mpz:
    nbytes = width // 8
    return mpz(int.from_bytes((b"\x00" * (nbytes - 1) + b"\x80") * count, "little"))


def _pack(coeffs: Series, width: int) -> mpz:
    nbytes = width // 8
    half = 1 << (width - 1)
    buf = b"".join((c + half).to_bytes(nbytes, "little") for c in coeffs)
    return mpz(int.from_bytes(buf, "little")) - _bias(len(coeffs), width)


def _unpack(value: mpz, count: int, width: int) -> Series:
    nbytes = width // 8
    value = (value & ((mpz(1) << (width * count)) - 1)) + _bias(count, width)
    data = int(value).to_bytes(nbytes * count + 1, "little")
    half = 1 << (width - 1)
    frm = int.from_bytes
    return [frm(data[i * nbytes : (i + 1) * nbytes], "little") - half for i in range(count)]


def _max_abs(coeffs: Series) -> int:
    return max((abs(c) for c in coeffs), default=0)


def mul(a: Series, b: Series, n: int) -> Series:
    """First ``n`` coefficients of ``a * b``."""
    a, b = list(a[:n]), list(b[:n])
    a += [0] * (n - len(a))
    b += [0] * (n - len(b))
    if n == 0:
        return []
    bound = n * _max_abs(a) * _max_abs(b)
    width = _width_bits(max(bound, _max_abs(a), _max_abs(b), 1))
    if a is b or a == b:
        pa = _pack(a, width)
        prod = pa * pa
    else:
        prod = _pack(a, width) * _pack(b, width)
    return _unpack(prod, n, width)


def square(a: Series, n: int) -> Series:
    return mul(a, a, n)


def mul_naive(a: Series, b: Series, n: int) -> Series:
    """Schoolbook truncated product; used as a reference in tests."""
    out = [0] * n
    for i, ai in enumerate(a[:n]):
        if ai:
            for j, bj in enumerate(b[: n - i]):
                out[i + j] += ai * bj
    return out


def eta_cubed(n: int) -> Series:
    """``prod (1-q^l)^3`` to ``n`` terms via Jacobi: ``sum (-1)^k (2k+1) q^{k(k+1)/2}``."""
    out = [0] * n
    k = 0
    while k * (k + 1) // 2 < n:
        out[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    return out


def divisor_power_sums(n: int, power: int) -> list[int]:
    """``sigma_power(m)`` for ``0 <= m < n`` (index 0 set to 0)."""
    sig = [0] * n
    for d in range(1, n):
        dp = d**power
        for m in range(d, n, d):
            sig[m] += dp
    return sig


def eisenstein(weight: int, n: int) -> Series:
    """Normalized ``E_4`` or ``E_6`` to ``n`` terms."""
    if weight == 4:
        c, power = 240, 3
    elif weight == 6:
        c, power = -504, 5
    else:
        raise ValueError("only E_4 and E_6 are provided")
    sig = divisor_power_sums(n, power)
    out = [c * s for s in sig]
    if n:
        out[0] = 1
    return out


def delta_series(n: int) -> Series:
    """First ``n`` coefficients of ``Delta = q prod (1-q^l)^24`` (index 0 is 0)."""
    if n <= 0:
        return []
    m = n - 1  # need eta^24 to m terms, then shift by q
    s = eta_cubed(max(m, 1))
    for _ in range(3):
        s = square(s, max(m, 1))
    return [0] + s[:m]
