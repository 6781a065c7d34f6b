"""Elementary integer arithmetic: prime sieves, primality, factorization, CRT.

Everything here is exact.  Factorization goes through three tiers:

* a smallest-prime-factor table for small arguments,
* trial division by the first few hundred primes,
* deterministic Miller-Rabin (below 2**64, BPSW above) plus Pollard rho
  with Brent's cycle detection for the rough cofactor.
"""

from __future__ import annotations

import math
import random
from functools import lru_cache

import gmpy2
import numpy as np
from scipy.special import expi

from .errors import FactorizationTimeout

_MR_BASES_64 = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def primes_upto(limit: int) -> np.ndarray:
    """All primes ``p <= limit`` as an int64 array (Eratosthenes on odd numbers)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    size = (limit - 1) // 2  # index i <-> 2i + 3
    sieve = np.ones(size, dtype=bool)
    for i in range((math.isqrt(limit) - 1) // 2):
        if sieve[i]:
            p = 2 * i + 3
            sieve[(p * p - 3) // 2 :: p] = False
    odd = 2 * np.flatnonzero(sieve).astype(np.int64) + 3
    return np.concatenate([np.array([2], dtype=np.int64), odd])


@lru_cache(maxsize=8)
def _cached_primes(limit: int) -> tuple[int, ...]:
    return tuple(int(p) for p in primes_upto(limit))


def prime_list(limit: int) -> tuple[int, ...]:
    """Cached tuple of Python ints; same content as :func:`primes_upto`."""
    return _cached_primes(int(limit))


def spf_table(limit: int) -> np.ndarray:
    """Smallest prime factor for every ``0 <= n <= limit`` (0 and 1 map to themselves)."""
    dtype = np.int32 if limit < 2**31 else np.int64
    spf = np.arange(limit + 1, dtype=dtype)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == p:
            block = spf[p * p :: p]
            mask = block == np.arange(p * p, limit + 1, p, dtype=dtype)
            block[mask] = p
    return spf


def is_prime(n: int) -> bool:
    """Deterministic for ``n < 2**64``; BPSW (no known counterexample) above."""
    if n < 2:
        return False
    for p in _MR_BASES_64:
        if n % p == 0:
            return n == p
    if n >= 1 << 64:
        return bool(gmpy2.is_bpsw_prp(n))
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES_64:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def brent_rho(n: int, rng: random.Random, max_iter: int = 1 << 20) -> int | None:
    """Return a nontrivial factor of composite odd ``n``, or None if one attempt fails."""
    y = rng.randrange(1, n)
    c = rng.randrange(1, n)
    m = 128
    g = r = q = 1
    x = ys = y
    iters = 0
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r <<= 1
        iters += r
        if iters > max_iter:
            return None
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    return g if g != n else None


class Factorizer:
    """Full factorization with a seeded, bounded Pollard-Brent fallback.

    ``restarts`` caps the number of rho attempts per composite cofactor;
    exhausting it raises :class:`FactorizationTimeout` rather than guessing.
    """

    def __init__(self, spf_limit: int = 0, seed: int = 0, restarts: int = 64,
                 trial_limit: int = 2000):
        self.spf_limit = int(spf_limit)
        self._spf = spf_table(self.spf_limit) if self.spf_limit >= 2 else None
        self.seed = seed
        self.restarts = restarts
        self._trial = prime_list(trial_limit)

    def factor(self, n: int) -> list[int]:
        """Prime factors of ``|n|`` in increasing order, with multiplicity."""
        n = abs(int(n))
        if n <= 1:
            return []
        if self._spf is not None and n <= self.spf_limit:
            return self._factor_spf(n)
        out: list[int] = []
        for p in self._trial:
            if p * p > n:
                break
            while n % p == 0:
                out.append(p)
                n //= p
        if n > 1:
            # deterministic per-argument stream keeps results independent of call order
            rng = random.Random(self.seed * 1_000_003 + n)
            out.extend(self._split(n, rng))
        out.sort()
        return out

    def _factor_spf(self, n: int) -> list[int]:
        spf = self._spf
        out = []
        while n > 1:
            p = int(spf[n])
            out.append(p)
            n //= p
        return out

    def _split(self, n: int, rng: random.Random) -> list[int]:
        if n == 1:
            return []
        if is_prime(n):
            return [n]
        r = math.isqrt(n)
        if r * r == n:
            half = self._split(r, rng)
            return half + half
        for _ in range(self.restarts):
            d = brent_rho(n, rng)
            if d is not None and 1 < d < n:
                return self._split(d, rng) + self._split(n // d, rng)
        raise FactorizationTimeout(n)


def factor_dict(primes: list[int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in primes:
        out[p] = out.get(p, 0) + 1
    return out


def crt(residues: list[int], moduli: list[int]) -> tuple[int, int]:
    """Solve ``x = r_i mod m_i`` for pairwise coprime moduli; returns ``(x, M)`` with ``0 <= x < M``."""
    x, m = 0, 1
    for r, mi in zip(residues, moduli):
        g = math.gcd(m, mi)
        if g != 1:
            raise ValueError(f"moduli {m} and {mi} are not coprime")
        t = ((r - x) * pow(m, -1, mi)) % mi
        x += m * t
        m *= mi
    return x % m, m


def li(x: float) -> float:
    """Logarithmic integral ``li(x) = Ei(log x)`` (principal value from 0)."""
    return float(expi(math.log(x)))


def prime_pi(x: int) -> int:
    return int(primes_upto(int(x)).size)


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for e in factor_dict(Factorizer().factor(n)).values())


def squarefree_part_check(primes: list[int]) -> bool:
    """True when the (sorted) multiset of primes has no repeats."""
    return all(a != b for a, b in zip(primes, primes[1:]))


def parse_int(text: str) -> int:
    """Parse ``"1000"``, ``"1e6"`` or ``"2.5e3"`` into an exact int; reject non-integers."""
    from decimal import Decimal, InvalidOperation

    try:
        d = Decimal(text.strip())
    except InvalidOperation as exc:
        raise ValueError(f"not a number: {text!r}") from exc
    if d != d.to_integral_value():
        raise ValueError(f"not an integer: {text!r}")
    return int(d)
