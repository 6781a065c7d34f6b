"""Slow reference implementations, independent of the package's series engine."""

from fractions import Fraction
import math


def sigma(n, power=1):
    return sum(d**power for d in range(1, n + 1) if n % d == 0)


def niebur_tau(n_max):
    """tau(n) = n^4 s(n) - 24 sum_{i<n} i^2 (35 i^2 - 52 i n + 18 n^2) s(i) s(n-i)."""
    s = [0] + [sigma(n) for n in range(1, n_max + 1)]
    out = []
    for n in range(1, n_max + 1):
        acc = sum(i * i * (35 * i * i - 52 * i * n + 18 * n * n) * s[i] * s[n - i]
                  for i in range(1, n))
        out.append(n**4 * s[n] - 24 * acc)
    return out


def naive_mul(a, b, n):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j in range(min(len(b), n - i)):
                out[i + j] += x * b[j]
    return out


def naive_delta(n):
    """Coefficients of q * prod (1 - q^m)^24 up to q^n by repeated multiplication."""
    poly = [1] + [0] * (n - 1)  # prod up to q^(n-1)
    for m in range(1, n):
        for _ in range(24):
            for i in range(n - 1, m - 1, -1):
                poly[i] -= poly[i - m]
    return [0] + poly[: n - 1]  # index 0 holds q^0 = 0


def naive_eisenstein(k, n):
    c = {4: 240, 6: -504}[k]
    return [1] + [c * sigma(m, k - 1) for m in range(1, n)]


def brute_sieve(forms, sigma_set, x, z):
    out = []
    for n in range(1, x + 1):
        ok = True
        for a, b in forms:
            v = abs(a * n + b)
            for p in range(2, int(math.ceil(z))):
                if p < z and p not in sigma_set and all(p % d for d in range(2, p)) and v % p == 0:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(n)
    return out


def lambda_sq(a, n, weight):
    return Fraction(a * a, n ** (weight - 1))
