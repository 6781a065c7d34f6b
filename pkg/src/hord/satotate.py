"""Empirical Sato-Tate checks on the normalized prime eigenvalues ``lambda_f(p) = 2 cos theta_p``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import prime_list
from .forms import CoefficientTable, FormDescriptor, lambda_float, theta_angle


def sato_tate_cdf(t: float) -> float:
    """Distribution function of ``(1/pi) sqrt(1 - t^2/4) dt`` on ``[-2, 2]``."""
    if not -2.0 <= t <= 2.0:
        raise ValueError(f"t={t} outside [-2, 2]")
    return 0.5 + t * math.sqrt(4.0 - t * t) / (4.0 * math.pi) + math.asin(t / 2.0) / math.pi


def sato_tate_density(t: float) -> float:
    return math.sqrt(max(0.0, 1.0 - t * t / 4.0)) / math.pi


def _cdf_vec(t: np.ndarray) -> np.ndarray:
    return 0.5 + t * np.sqrt(4.0 - t * t) / (4.0 * np.pi) + np.arcsin(t / 2.0) / np.pi


@dataclass(frozen=True)
class AngleSample:
    form: FormDescriptor
    x_max: int
    thetas: np.ndarray  # sorted, in [0, pi]

    @property
    def lambdas(self) -> np.ndarray:
        """``2 cos theta`` in increasing order."""
        return np.sort(2.0 * np.cos(self.thetas))

    def __len__(self) -> int:
        return int(self.thetas.size)


def angle_sample(table: CoefficientTable, x_max: int | None = None) -> AngleSample:
    """Satake angles for the unramified primes ``p <= x_max`` covered by the table."""
    x_max = table.n_max if x_max is None else x_max
    if x_max > table.n_max:
        from .errors import CoverageError

        raise CoverageError(f"x_max={x_max} exceeds table bound {table.n_max}")
    form = table.form
    thetas = [theta_angle(form, p, table.coeffs[p - 1])
              for p in prime_list(x_max) if form.level % p]
    return AngleSample(form, x_max, np.sort(np.array(thetas, dtype=float)))


def ecdf(values: np.ndarray, t: float) -> float:
    """Right-continuous empirical distribution ``#{v <= t} / n``."""
    v = np.sort(np.asarray(values, dtype=float))
    return float(np.searchsorted(v, t, side="right")) / v.size


def ks_statistic(values) -> float:
    """Sup distance between the empirical CDF of ``values`` and the Sato-Tate CDF."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise ValueError("empty sample")
    F = _cdf_vec(np.clip(v, -2.0, 2.0))
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def empirical_discrepancy(sample: AngleSample) -> float:
    return ks_statistic(sample.lambdas)


def small_lambda_density(sample: AngleSample, eps: float) -> float:
    """Fraction of sampled primes with ``|lambda_f(p)| <= eps``."""
    lam = sample.lambdas
    if lam.size == 0:
        raise ValueError("empty sample")
    return float(np.count_nonzero(np.abs(lam) <= eps)) / lam.size


def small_lambda_prediction(eps: float) -> float:
    eps = min(eps, 2.0)
    return sato_tate_cdf(eps) - sato_tate_cdf(-eps)


def count_zero_or_extreme(table: CoefficientTable, x_max: int | None = None) -> int:
    """Exact count of primes with ``a_p = 0`` or ``a_p^2 = 4 p^(k-1)``."""
    x_max = table.n_max if x_max is None else x_max
    km1 = table.form.weight - 1
    count = 0
    for p in prime_list(x_max):
        a = table.coeffs[p - 1]
        if a == 0 or a * a == 4 * p**km1:
            count += 1
    return count


def histogram(sample: AngleSample, bins: int = 64) -> list[dict]:
    """Binned ``lambda_f(p)`` counts next to the Sato-Tate expectation."""
    edges = np.linspace(-2.0, 2.0, bins + 1)
    counts, _ = np.histogram(sample.lambdas, bins=edges)
    n = len(sample)
    rows = []
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        expected = (sato_tate_cdf(float(hi)) - sato_tate_cdf(float(lo))) * n
        rows.append({"lo": float(lo), "hi": float(hi), "count": int(c), "expected": expected})
    return rows


def prime_lambdas(table: CoefficientTable, x_max: int | None = None) -> np.ndarray:
    """``lambda_f(p)`` for ``p <= x_max`` computed directly from ``a_p`` (no angle round trip)."""
    x_max = table.n_max if x_max is None else x_max
    w = table.form.weight
    return np.array([lambda_float(w, p, table.coeffs[p - 1]) for p in prime_list(x_max)])
