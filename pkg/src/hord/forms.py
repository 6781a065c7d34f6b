"""Fourier coefficients and normalized Hecke eigenvalues of level-1 eigenforms.

Built-in forms are the unique normalized cusp forms in the one-dimensional
spaces ``S_k`` for ``k`` in {12, 16, 18, 20, 22, 26}; any other primitive form
enters through :func:`ingest_table`, which re-checks the Hecke relations.

Same-weight and mixed-weight magnitude comparisons of normalized eigenvalues
are done exactly: ``|lambda_f(x)| < |lambda_g(y)|`` is equivalent to
``a_f(x)**2 * y**(k_g-1) < a_g(y)**2 * x**(k_f-1)``.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from . import series
from .arith import Factorizer, factor_dict, prime_list
from .errors import (
    CapacityError,
    CoverageError,
    DeligneViolation,
    MultiplicativityViolation,
    NormalizationViolation,
    OutOfRangeError,
    ParseError,
    RecurrenceViolation,
    UnsupportedWeightError,
)

log = logging.getLogger(__name__)

BUILTIN_WEIGHTS = (12, 16, 18, 20, 22, 26)
# weight -> (a, b) with Delta * E4^a * E6^b
_EISENSTEIN_EXPONENTS = {12: (0, 0), 16: (1, 0), 18: (0, 1), 20: (2, 0), 22: (1, 1), 26: (2, 1)}

BUILTIN = "builtin-eta-eisenstein"
EXTERNAL = "external-table"

DEFAULT_MEMORY_BUDGET = 4 << 30
# Rough peak bytes per coefficient during a build: packed operands, the
# product, the unpacked byte buffer and the final list of Python ints.
_BYTES_PER_COEFF = 200


def _is_squarefree(n: int) -> bool:
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        if n % d == 0:
            n //= d
        d += 1
    return True


@dataclass(frozen=True)
class FormDescriptor:
    weight: int
    level: int = 1
    source: str = BUILTIN
    label: str = "Delta"

    def __post_init__(self):
        if self.weight <= 0 or self.weight % 2:
            raise ValueError(f"weight must be a positive even integer, got {self.weight}")
        if self.level < 1 or not _is_squarefree(self.level):
            raise ValueError(f"level must be a positive square-free integer, got {self.level}")
        if self.source not in (BUILTIN, EXTERNAL):
            raise ValueError(f"unknown source {self.source!r}")
        if self.source == BUILTIN:
            if self.level != 1:
                raise ValueError("built-in forms have level 1")
            if self.weight not in BUILTIN_WEIGHTS:
                raise UnsupportedWeightError(
                    f"S_{self.weight}(1) is not one-dimensional; load the form from a table")


def builtin_form(weight: int = 12) -> FormDescriptor:
    if weight not in BUILTIN_WEIGHTS:
        raise UnsupportedWeightError(
            f"S_{weight}(1) is not one-dimensional; built-in weights are {BUILTIN_WEIGHTS}")
    return FormDescriptor(weight, 1, BUILTIN, "Delta" if weight == 12 else f"Delta{weight}")


DELTA = builtin_form(12)


def parse_form_name(name: str) -> FormDescriptor:
    """``'Δ'``, ``'Delta'`` -> weight 12; ``'Δ16'``, ``'Delta16'`` -> weight 16."""
    m = re.fullmatch(r"(?:Δ|delta|d)(\d*)", name.strip(), flags=re.IGNORECASE)
    if not m:
        raise ValueError(f"unknown form name {name!r}")
    return builtin_form(int(m.group(1)) if m.group(1) else 12)


@dataclass(frozen=True)
class CoefficientTable:
    """Exact ``a_f(1..n_max)``; immutable and safe to share between workers."""

    form: FormDescriptor
    n_max: int
    coeffs: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.coeffs) != self.n_max:
            raise ValueError("coefficient count does not match n_max")

    def __getitem__(self, n: int) -> int:
        return coefficient(self, n)

    def __len__(self) -> int:
        return self.n_max

    @property
    def weight(self) -> int:
        return self.form.weight

    def truncate(self, n_max: int) -> "CoefficientTable":
        if n_max > self.n_max:
            raise OutOfRangeError(f"cannot extend a table from {self.n_max} to {n_max}")
        return CoefficientTable(self.form, n_max, self.coeffs[:n_max])

    def values(self) -> list[int]:
        """``[0, a(1), ..., a(n_max)]`` so that index equals argument."""
        return [0, *self.coeffs]


@dataclass(frozen=True)
class EigenvalueView:
    lam: mpmath.mpf
    exact_numerator: int
    n: int
    weight: int


def _check_capacity(n_max: int, budget: int | None):
    budget = DEFAULT_MEMORY_BUDGET if budget is None else budget
    need = n_max * _BYTES_PER_COEFF
    if need > budget:
        raise CapacityError(
            f"n_max={n_max} needs about {need / 2**30:.1f} GiB, budget is {budget / 2**30:.1f} GiB")


def build_delta_table(n_max: int, memory_budget: int | None = None) -> CoefficientTable:
    """Exact ``tau(1..n_max)`` from Jacobi's ``eta^3`` raised to the 8th power."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    _check_capacity(n_max, memory_budget)
    coeffs = series.delta_series(n_max + 1)[1:]
    return CoefficientTable(DELTA, n_max, tuple(coeffs))


def build_eigenform_table(weight: int, n_max: int,
                          memory_budget: int | None = None) -> CoefficientTable:
    """The normalized eigenform spanning ``S_weight(1)``, as ``Delta * E4^a * E6^b``."""
    form = builtin_form(weight)
    if weight == 12:
        return build_delta_table(n_max, memory_budget)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    _check_capacity(n_max, memory_budget)
    n = n_max + 1
    s = series.delta_series(n)
    a, b = _EISENSTEIN_EXPONENTS[weight]
    if a:
        e4 = series.eisenstein(4, n)
        for _ in range(a):
            s = series.mul(s, e4, n)
    if b:
        s = series.mul(s, series.eisenstein(6, n), n)
    return CoefficientTable(form, n_max, tuple(s[1:]))


def build_table(form: FormDescriptor, n_max: int,
                memory_budget: int | None = None) -> CoefficientTable:
    if form.source != BUILTIN:
        raise ValueError("external forms cannot be built; use ingest_table")
    return build_eigenform_table(form.weight, n_max, memory_budget)


def coefficient(table: CoefficientTable, n: int) -> int:
    if not 1 <= n <= table.n_max:
        raise OutOfRangeError(f"n={n} outside 1..{table.n_max}")
    return table.coeffs[n - 1]


def prime_power_eigenvalue(form: FormDescriptor, p: int, l: int, a_p: int) -> int:
    """Exact ``a_f(p^l)`` from ``a_f(p)`` alone."""
    if l < 0:
        raise ValueError("exponent must be >= 0")
    if form.level % p == 0:
        return a_p**l
    if l <= 64:
        prev, cur = 1, a_p
        if l == 0:
            return 1
        q = p ** (form.weight - 1)
        for _ in range(l - 1):
            prev, cur = cur, a_p * cur - q * prev
        return cur
    return _prime_power_by_squaring(a_p, p ** (form.weight - 1), l)


def _prime_power_by_squaring(a_p: int, q: int, l: int) -> int:
    # [[a_p, -q], [1, 0]]^l applied to (a(p^0), a(p^-1)) = (1, 0)
    def matmul(x, y):
        return (x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3])

    result = (1, 0, 0, 1)
    base = (a_p, -q, 1, 0)
    while l:
        if l & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        l >>= 1
    return result[0]


def prime_power_sequence(form: FormDescriptor, p: int, a_p: int, l_max: int) -> list[int]:
    """``[a_f(p^0), ..., a_f(p^l_max)]``."""
    if form.level % p == 0:
        return [a_p**l for l in range(l_max + 1)]
    q = p ** (form.weight - 1)
    out = [1, a_p]
    for _ in range(l_max - 1):
        out.append(a_p * out[-1] - q * out[-2])
    return out[: l_max + 1]


def normalized_lambda(form: FormDescriptor, n: int, a_n: int,
                      prec_bits: int = 96) -> EigenvalueView:
    """``lambda_f(n) = a_f(n) / n^((k-1)/2)`` evaluated with ``prec_bits`` of mantissa."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with mpmath.workprec(max(prec_bits, 80)):
        lam = mpmath.mpf(a_n) / mpmath.sqrt(mpmath.mpf(n) ** (form.weight - 1))
    return EigenvalueView(lam, int(a_n), int(n), form.weight)


def lambda_float(weight: int, n: int, a_n: int) -> float:
    """Double-precision ``lambda``; only for planning and plotting."""
    # round the exact square once; n itself may be far beyond float range
    mag = math.sqrt(float(Fraction(a_n * a_n, n ** (weight - 1))))
    return -mag if a_n < 0 else mag


def abs_lambda_cmp(a_x: int, x: int, k_x: int, a_y: int, y: int, k_y: int) -> int:
    """Sign of ``|lambda_f(x)| - |lambda_g(y)|``, computed exactly."""
    lhs = a_x * a_x * y ** (k_y - 1)
    rhs = a_y * a_y * x ** (k_x - 1)
    return (lhs > rhs) - (lhs < rhs)


def deligne_holds(form: FormDescriptor, p: int, a_p: int) -> bool:
    return a_p * a_p <= 4 * p ** (form.weight - 1)


def theta_angle(form: FormDescriptor, p: int, a_p: int) -> float:
    """Satake angle ``theta_p`` in ``[0, pi]`` with ``lambda_f(p) = 2 cos theta_p``."""
    if not deligne_holds(form, p, a_p):
        raise DeligneViolation(f"a({p})^2 exceeds 4 p^(k-1)", (p,))
    half = lambda_float(form.weight, p, a_p) / 2
    return math.acos(min(1.0, max(-1.0, half)))


def lambda_via_angle(theta: float, l: int) -> float:
    """``sin((l+1) theta) / sin theta`` with the limits at 0 and pi."""
    if theta == 0.0:
        return float(l + 1)
    if theta == math.pi:
        return float((-1) ** l * (l + 1))
    return math.sin((l + 1) * theta) / math.sin(theta)


def is_rational_angle(form: FormDescriptor, p: int, a_p: int) -> bool:
    """True iff ``theta_p / pi`` is rational.

    ``lambda_f(p)^2 = a_p^2 / p^(k-1)`` is rational, and by Niven's theorem the
    only rational values of ``4 cos^2`` at rational angles are 0, 1, 2, 3, 4.
    """
    q = p ** (form.weight - 1)
    sq = a_p * a_p
    return sq % q == 0 and sq // q in (0, 1, 2, 3, 4)


def rational_angle_scan(form: FormDescriptor, p: int, a_p: int, l_max: int = 2000) -> bool:
    """Bounded empirical counterpart of :func:`is_rational_angle`.

    True if ``|lambda(p)| = 2`` or ``a_f(p^l) = 0`` for some ``l <= l_max``.
    Disagreement with the Niven rule is logged, never silently resolved.
    """
    if a_p * a_p == 4 * p ** (form.weight - 1):
        found = True
    else:
        found = any(v == 0 for v in prime_power_sequence(form, p, a_p, l_max)[1:])
    rule = is_rational_angle(form, p, a_p)
    if found != rule:
        log.warning("rational-angle rule (%s) and l-scan (%s) disagree at p=%d", rule, found, p)
    return found


# --- invariant checks -------------------------------------------------------

def check_normalization(table: CoefficientTable):
    if table.n_max >= 1 and table.coeffs[0] != 1:
        raise NormalizationViolation(f"a(1) = {table.coeffs[0]}, expected 1", (1,))


def check_deligne(table: CoefficientTable, primes=None):
    form = table.form
    for p in primes if primes is not None else prime_list(table.n_max):
        if not deligne_holds(form, p, table.coeffs[p - 1]):
            raise DeligneViolation(f"Deligne bound fails at p={p}", (p,))


def check_recurrence(table: CoefficientTable):
    a = table.values()
    n_max, form = table.n_max, table.form
    for p in prime_list(math.isqrt(n_max)):
        q = p ** (form.weight - 1)
        ramified = form.level % p == 0
        prev, cur, l = 1, p, 1
        while cur * p <= n_max:
            nxt = cur * p
            expected = a[p] ** (l + 1) if ramified else a[p] * a[cur] - q * a[prev]
            if a[nxt] != expected:
                raise RecurrenceViolation(f"recurrence fails at p={p}, l={l}", (p, l))
            prev, cur, l = cur, nxt, l + 1


def check_multiplicativity(table: CoefficientTable, exhaustive: bool = False):
    """Check ``a(mn) = a(m)a(n)`` for coprime ``m, n``.

    The default pass checks ``a(n) = a(p^e) a(n / p^e)`` with ``p`` the smallest
    prime of ``n``, which by induction on ``n`` is equivalent to the full
    statement.  ``exhaustive=True`` visits every coprime pair instead.
    """
    a = table.values()
    n_max = table.n_max
    if exhaustive:
        for m in range(2, math.isqrt(n_max) + 1):
            am = a[m]
            for n in range(m + 1, n_max // m + 1):
                if math.gcd(m, n) == 1 and a[m * n] != am * a[n]:
                    raise MultiplicativityViolation(
                        f"a({m * n}) != a({m}) a({n})", (m, n))
        return
    from .arith import spf_table

    spf = spf_table(n_max)
    for n in range(6, n_max + 1):
        p = int(spf[n])
        q = p
        while n % (q * p) == 0:
            q *= p
        r = n // q
        if r > 1 and a[n] != a[q] * a[r]:
            raise MultiplicativityViolation(f"a({n}) != a({q}) a({r})", (q, r))


def verify_table(table: CoefficientTable, exhaustive: bool = False):
    """Raise the first violated invariant; order: a(1), Deligne, recurrence, multiplicativity."""
    check_normalization(table)
    check_deligne(table)
    check_recurrence(table)
    check_multiplicativity(table, exhaustive=exhaustive)


# --- text table format ------------------------------------------------------

_HEADER = re.compile(
    r"#form\s+label=(?P<label>\S+)\s+weight=(?P<weight>-?\d+)\s+level=(?P<level>-?\d+)"
    r"\s+nmax=(?P<nmax>-?\d+)\s*$")


def write_table(table: CoefficientTable, path) -> None:
    f = table.form
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#form label={f.label} weight={f.weight} level={f.level} nmax={table.n_max}\n")
        for n, c in enumerate(table.coeffs, start=1):
            fh.write(f"{n}\t{c}\n")


def read_table_text(path) -> CoefficientTable:
    """Parse the line-based format without checking Hecke relations."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty coefficient file")
    m = _HEADER.match(lines[0].strip())
    if not m:
        raise ParseError(f"bad header line: {lines[0]!r}")
    weight, level, n_max = int(m["weight"]), int(m["level"]), int(m["nmax"])
    try:
        form = FormDescriptor(weight, level, EXTERNAL, m["label"])
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != n_max:
        raise ParseError(f"header says nmax={n_max} but file has {len(body)} rows")
    coeffs = []
    for expected, line in enumerate(body, start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"row {expected}: expected '<n>\\t<a_n>', got {line!r}")
        try:
            n, a_n = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"row {expected}: {exc}") from exc
        if n != expected:
            raise ParseError(f"row {expected}: index {n} breaks the 1..nmax sequence")
        coeffs.append(a_n)
    return CoefficientTable(form, n_max, tuple(coeffs))


def ingest_table(path, declared: FormDescriptor | None = None,
                 exhaustive: bool = False) -> CoefficientTable:
    """Load an external table and verify normalization, Deligne, recurrence and multiplicativity."""
    table = read_table_text(path)
    if declared is not None:
        if (declared.weight, declared.level) != (table.form.weight, table.form.level):
            raise ParseError(
                f"file declares weight={table.form.weight} level={table.form.level}, "
                f"expected weight={declared.weight} level={declared.level}")
        table = CoefficientTable(declared, table.n_max, table.coeffs)
    verify_table(table, exhaustive=exhaustive)
    return table


def multiplicative_table(form: FormDescriptor, prime_values: dict[int, int],
                         n_max: int, default: int = 1) -> CoefficientTable:
    """Synthetic table generated from prescribed ``a(p)`` via the Hecke relations.

    Primes missing from ``prime_values`` get ``a(p) = default``.
    """
    from .arith import spf_table

    a = [0] * (n_max + 1)
    if n_max >= 1:
        a[1] = 1
    spf = spf_table(n_max)
    for n in range(2, n_max + 1):
        p = int(spf[n])
        q, e = p, 1
        while n % (q * p) == 0:
            q *= p
            e += 1
        if q == n:
            a_p = prime_values.get(p, default)
            a[n] = prime_power_eigenvalue(form, p, e, a_p)
        else:
            a[n] = a[q] * a[n // q]
    return CoefficientTable(form, n_max, tuple(a[1:]))


# --- beyond the table -------------------------------------------------------

def coefficient_from_factorization(table: CoefficientTable, factors: dict[int, int]) -> int:
    """``a_f(n)`` for ``n = prod p^e`` using only ``a_f(p)`` from the table."""
    out = 1
    for p, e in factors.items():
        if p > table.n_max:
            raise CoverageError(f"prime {p} exceeds table bound {table.n_max}")
        out *= prime_power_eigenvalue(table.form, p, e, table.coeffs[p - 1])
    return out


def evaluate_coefficient(table: CoefficientTable, n: int,
                         factorizer: Factorizer | None = None) -> int:
    """``a_f(n)`` for any ``n >= 1``; beyond ``n_max`` via factorization and multiplicativity."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= table.n_max:
        return table.coeffs[n - 1]
    factorizer = factorizer or Factorizer()
    return coefficient_from_factorization(table, factor_dict(factorizer.factor(n)))
