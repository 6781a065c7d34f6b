"""Constructing integers ``m`` with a prescribed ordering of shifted eigenvalues.

Given forms ``f_1..f_k`` and distinct shifts ``nu_1..nu_k``, the construction

1. picks primes ``p_1 < ... < p_k`` above ``2K`` whose Satake angles are
   irrational multiples of pi,
2. picks exponents so that ``|lambda_i(p_i^l_i)| < delta |lambda_{i+1}(p_{i+1}^l_{i+1})|``,
3. forces ``m = 0 mod (2K)!`` and ``m + nu_i = p_i^l_i mod p_i^(l_i+1)`` by CRT,
   so ``m = A n + B`` and ``m + nu_i = nu_i p_i^l_i L_i(n)``,
4. sieves ``n`` so each ``L_i(n)`` is squarefree, composite and free of
   primes with small ``|lambda|``, then checks the ordering exactly.

The second half of the module decides, for a single form, whether there
is a window of ``k`` consecutive non-zero coefficients, which is equivalent
to ``a_f(n) != 0`` for ``n <= k/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith import Factorizer, crt, factor_dict, prime_list
from .errors import (
    CoverageError,
    ExhaustionError,
    ExponentCapError,
    HordError,
    InvariantViolation,
    ZeroCoefficientError,
)
from .forms import (
    CoefficientTable,
    FormDescriptor,
    abs_lambda_cmp,
    coefficient_from_factorization,
    evaluate_coefficient,
    is_rational_angle,
    lambda_float,
    prime_power_eigenvalue,
    theta_angle,
)
from .sieve import (
    DEFAULT_ETA,
    LinearSystem,
    avoid_prime_set,
    refine_omega1,
    sift_omega,
    smooth_window,
    validate_system,
)

DEFAULT_DELTA = 0.25
DEFAULT_EPS = 0.2
L_MAX = 100_000


@dataclass(frozen=True)
class TargetSpec:
    """Forms and shifts for the chain ``|lambda_1(m+nu_1)| < ... < |lambda_k(m+nu_k)|``.

    ``mode="abs"`` compares ``|a_f|`` instead of ``|lambda_f|`` and needs equal weights.
    """

    tables: tuple
    shifts: tuple
    mode: str = "lambda"

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "shifts", tuple(int(s) for s in self.shifts))
        if len(self.tables) != len(self.shifts) or not self.tables:
            raise ValueError("need one shift per form and at least one form")
        if len(set(self.shifts)) != len(self.shifts) or min(self.shifts) < 1:
            raise ValueError("shifts must be distinct positive integers")
        if self.mode not in ("lambda", "abs"):
            raise ValueError("mode must be 'lambda' or 'abs'")
        if self.mode == "abs" and len({t.form.weight for t in self.tables}) > 1:
            raise ValueError("abs mode compares a_f directly and needs equal weights")
        for i, (t, nu) in enumerate(zip(self.tables, self.shifts)):
            if nu > t.n_max:
                raise CoverageError(f"shift {nu} beyond table bound {t.n_max}")
            if t.coeffs[nu - 1] == 0:
                raise ZeroCoefficientError(f"a_f{i + 1}({nu}) = 0")

    @property
    def k(self) -> int:
        return len(self.shifts)

    @property
    def K(self) -> int:
        return max(self.shifts)

    @property
    def forms(self) -> list[FormDescriptor]:
        return [t.form for t in self.tables]

    def permuted(self, perm: Sequence[int]) -> "TargetSpec":
        """Reorder the chain positions: position ``j`` takes entry ``perm[j]`` (1-based)."""
        if sorted(perm) != list(range(1, self.k + 1)):
            raise ValueError(f"{list(perm)} is not a permutation of 1..{self.k}")
        return TargetSpec(tuple(self.tables[s - 1] for s in perm),
                          tuple(self.shifts[s - 1] for s in perm), self.mode)


def compute_c0_squared(spec: TargetSpec) -> Fraction:
    """Exact square of the normalizing constant ``c_0``."""
    best = None
    for t, nu in zip(spec.tables, spec.shifts):
        a = t.coeffs[nu - 1]
        if a == 0:
            raise ZeroCoefficientError(f"a({nu}) = 0")
        km1 = t.form.weight - 1
        lam_sq = Fraction(a * a, nu**km1)
        cand = min(lam_sq, 1 / (2**km1 * lam_sq))
        best = cand if best is None else min(best, cand)
    return best


def compute_c0(spec: TargetSpec) -> float:
    """``min_i min(|lambda_i(nu_i)|, 2^(-(k_i-1)/2) / |lambda_i(nu_i)|)``."""
    c2 = compute_c0_squared(spec)
    return math.sqrt(c2.numerator) / math.sqrt(c2.denominator)


# --- primes and exponents --------------------------------------------------

def admissible_prime(table: CoefficientTable, p: int) -> bool:
    a_p = table.coeffs[p - 1]
    return a_p != 0 and not is_rational_angle(table.form, p, a_p)


def choose_primes(spec: TargetSpec) -> tuple[int, ...]:
    """Smallest increasing primes ``p_i > 2K`` with an irrational Satake angle for ``f_i``."""
    chosen = []
    floor = 2 * spec.K
    for i, t in enumerate(spec.tables):
        p = next((q for q in prime_list(t.n_max) if q > floor and admissible_prime(t, q)), None)
        if p is None:
            raise ExhaustionError(
                f"no admissible prime above {floor} for form {i + 1} below {t.n_max}")
        chosen.append(p)
        floor = p
    return tuple(chosen)


def _delta_fraction(delta) -> Fraction:
    d = Fraction(str(delta)) if isinstance(delta, float) else Fraction(delta)
    if not 0 < d < 1:
        raise ValueError("delta must lie in (0, 1)")
    return d


def continued_fraction_denominators(alpha: float, q_max: int) -> list[int]:
    """Convergent denominators ``q <= q_max`` of ``alpha`` in ``(0, 1)``."""
    out = []
    h_prev, h = 0, 1  # denominators q_{-2}, q_{-1}
    x = alpha
    for _ in range(64):
        a = math.floor(x)
        h_prev, h = h, a * h + h_prev
        if h > q_max:
            break
        if h >= 1 and (not out or h != out[-1]):
            out.append(h)
        frac = x - a
        if frac < 1e-15:
            break
        x = 1.0 / frac
    return out


def _exact_below(form_i: FormDescriptor, p: int, l: int, a_p: int,
                 target_num: int, target_n: int, target_w: int, d2: Fraction) -> bool:
    """``|lambda_i(p^l)| < delta * |lambda_j(target_n)|`` with ``a_j(target_n) = target_num``."""
    v = prime_power_eigenvalue(form_i, p, l, a_p)
    lhs = v * v * target_n ** (target_w - 1) * d2.denominator
    rhs = d2.numerator * target_num * target_num * (p**l) ** (form_i.weight - 1)
    return lhs < rhs


def smallest_exponent(table: CoefficientTable, p: int, target_num: int, target_n: int,
                      target_w: int, delta, l_max: int = L_MAX) -> int:
    """Least ``l >= 1`` with ``|lambda_f(p^l)| < delta |lambda_g(target_n)|`` (exact decision).

    Continued-fraction convergents of ``theta_p / pi`` give a candidate; a
    vectorized scan over all smaller ``l`` with a generous tolerance finds
    every ``l`` that could qualify, and those are decided exactly in order.
    """
    form = table.form
    a_p = table.coeffs[p - 1]
    d2 = _delta_fraction(delta) ** 2
    theta = theta_angle(form, p, a_p)
    target = math.sqrt(float(d2)) * abs(lambda_float(target_w, target_n, target_num))
    s = math.sin(theta)
    bound = l_max
    for q in continued_fraction_denominators(theta / math.pi, l_max + 1):
        l = q - 1
        if l >= 1 and abs(math.sin(q * theta)) < target * s * (1 + 1e-9) and \
                _exact_below(form, p, l, a_p, target_num, target_n, target_w, d2):
            bound = l
            break
    ls = np.arange(1, bound + 1, dtype=np.float64)
    vals = np.abs(np.sin((ls + 1) * theta)) / s
    tol = 1e-9 * max(1.0, float(bound)) + 1e-12
    for l in np.flatnonzero(vals < target + tol) + 1:
        if _exact_below(form, p, int(l), a_p, target_num, target_n, target_w, d2):
            return int(l)
    best = int(np.argmin(vals)) + 1
    raise ExponentCapError(
        f"no exponent <= {l_max} for p={p}; best |lambda|/target = {vals.min() / target:.4g}",
        float(vals.min() / target), best)


def choose_exponents(spec: TargetSpec, primes: Sequence[int], delta=DEFAULT_DELTA,
                     l_max: int = L_MAX) -> tuple[int, ...]:
    """``l_k = 1``; each earlier exponent is the least one satisfying the delta-chain."""
    k = spec.k
    ls = [0] * k
    ls[-1] = 1
    for i in range(k - 2, -1, -1):
        t_next = spec.tables[i + 1]
        p_next = primes[i + 1]
        n_next = p_next ** ls[i + 1]
        a_next = prime_power_eigenvalue(t_next.form, p_next, ls[i + 1], t_next.coeffs[p_next - 1])
        ls[i] = smallest_exponent(spec.tables[i], primes[i], a_next, n_next,
                                  t_next.form.weight, delta, l_max)
    return tuple(ls)


# --- the progression --------------------------------------------------------

@dataclass(frozen=True)
class ProgressionSpec:
    spec: TargetSpec
    primes: tuple
    exponents: tuple
    A: int
    B: int
    system: LinearSystem
    delta: Fraction | None = None
    c0: float | None = None

    def m_of(self, n: int) -> int:
        return self.A * n + self.B

    def prime_power_values(self) -> list[int]:
        """Exact ``a_{f_i}(p_i^{l_i})``."""
        return [prime_power_eigenvalue(t.form, p, l, t.coeffs[p - 1])
                for t, p, l in zip(self.spec.tables, self.primes, self.exponents)]

    def chain_margins(self) -> list[float]:
        """``|lambda_i(p_i^l_i)| / |lambda_{i+1}(p_{i+1}^l_{i+1})|`` for consecutive ``i``."""
        vals = self.prime_power_values()
        lam = [abs(lambda_float(t.form.weight, p**l, v)) for t, p, l, v in
               zip(self.spec.tables, self.primes, self.exponents, vals)]
        return [lam[i] / lam[i + 1] for i in range(len(lam) - 1)]

    def to_json(self) -> dict:
        return {"primes": list(self.primes), "exponents": list(self.exponents),
                "A": str(self.A), "B": str(self.B),
                "forms": [[str(a), str(b)] for a, b in self.system.forms],
                "sigma": list(self.system.sigma),
                "delta": str(self.delta) if self.delta is not None else None,
                "c0": self.c0, "margins": self.chain_margins()}


def build_progression(spec: TargetSpec, primes: Sequence[int], exponents: Sequence[int],
                      delta=None) -> ProgressionSpec:
    """CRT for ``m = 0 mod (2K)!`` and ``m + nu_i = p_i^l_i mod p_i^(l_i+1)``."""
    K = spec.K
    fact = math.factorial(2 * K)
    if min(primes) <= 2 * K or len(set(primes)) != len(primes):
        raise ValueError("primes must be distinct and exceed 2K")
    residues, moduli = [0], [fact]
    for nu, p, l in zip(spec.shifts, primes, exponents):
        residues.append((p**l - nu) % p ** (l + 1))
        moduli.append(p ** (l + 1))
    B, A = crt(residues, moduli)
    forms = []
    for nu, p, l in zip(spec.shifts, primes, exponents):
        g = nu * p**l
        if A % g or (B + nu) % g or math.gcd(A, B + nu) != g:
            raise HordError(f"CRT output violates gcd(A, B+nu) = nu p^l at p={p}")
        forms.append((A // g, (B + nu) // g))
    sigma = tuple(sorted(set(prime_list(2 * K)) | set(primes)))
    system = LinearSystem(tuple(forms), sigma)
    rep = validate_system(system, require_divisibility=True)
    if not rep.ok:
        raise HordError(f"derived system invalid: {rep.failures}")
    d = _delta_fraction(delta) if delta is not None else None
    return ProgressionSpec(spec, tuple(primes), tuple(exponents), A, B, system, d, compute_c0(spec))


def plan_progression(spec: TargetSpec, delta=DEFAULT_DELTA, l_max: int = L_MAX) -> ProgressionSpec:
    primes = choose_primes(spec)
    exps = choose_exponents(spec, primes, delta, l_max)
    return build_progression(spec, primes, exps, delta)


# --- chain checks -------------------------------------------------------------

def _chain_holds(spec: TargetSpec, args: Sequence[int], values: Sequence[int]) -> bool:
    if values[0] == 0:
        return False
    for i in range(len(values) - 1):
        if spec.mode == "abs":
            if not abs(values[i]) < abs(values[i + 1]):
                return False
        else:
            wi, wj = spec.tables[i].form.weight, spec.tables[i + 1].form.weight
            if abs_lambda_cmp(values[i], args[i], wi, values[i + 1], args[i + 1], wj) >= 0:
                return False
    return True


@dataclass
class SearchResult:
    pspec: ProgressionSpec
    x: int
    z: float
    hits: list
    counts: dict
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"progression": self.pspec.to_json(), "x": self.x, "z": self.z,
                "counts": self.counts, "diagnostics": self.diagnostics,
                "hits": len(self.hits)}


def small_lambda_predicate(tables: Sequence[CoefficientTable], eps=DEFAULT_EPS):
    """``p`` is bad when ``|lambda_{f_i}(p)| <= eps/k`` for some ``i`` (decided exactly)."""
    k = len(tables)
    e2 = (Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)) ** 2 / (k * k)

    def bad(p: int) -> bool:
        for t in tables:
            if p > t.n_max:
                raise CoverageError(f"a({p}) not covered by the table")
            a = t.coeffs[p - 1]
            if a * a * e2.denominator <= e2.numerator * p ** (t.form.weight - 1):
                return True
        return False

    return bad


def hit_record(pspec: ProgressionSpec, n: int, m: int, args, values) -> dict:
    spec = pspec.spec
    chain = []
    for i, (t, nu, arg, v) in enumerate(zip(spec.tables, spec.shifts, args, values)):
        chain.append({"i": i + 1, "shift": nu, "abs_a": str(abs(v)),
                      "lambda": lambda_float(t.form.weight, arg, v)})
    return {"m": str(m), "n": n, "chain": chain, "verified": True}


def run_ordered_search(pspec: ProgressionSpec, x: int, eta: float = DEFAULT_ETA,
                       eps=DEFAULT_EPS, workers: int = 1, smooth_bound: int | None = None
                       ) -> SearchResult:
    """Sieve ``n <= x`` in the progression and return verified ordered runs ``m = A n + B``.

    The sifting level is ``z = max(2, x^eta)``.  ``a_f(m + nu_i)`` is assembled as
    ``a(nu_i) a(p_i^l_i) a(L_i(n))``; the last factor needs every prime of
    ``L_i(n)`` inside the tables, so ``n`` whose forms are not
    ``smooth_bound``-smooth are counted as ``unevaluable`` and skipped.
    """
    spec = pspec.spec
    system = pspec.system
    tables = spec.tables
    x = int(x)
    z = max(2.0, x**eta)
    bound = smooth_bound or min(t.n_max for t in tables)
    outcome = sift_omega(system, x, z, workers=workers)
    smooth = smooth_window(system, x, bound, outcome.survivors)
    gated = replace(outcome, survivors=np.array(sorted(smooth), dtype=np.int64))
    omega1 = refine_omega1(gated, factorizations=smooth, workers=workers)
    kept = avoid_prime_set(omega1, small_lambda_predicate(tables, eps))
    head = [t.coeffs[nu - 1] * v for t, nu, v in
            zip(tables, spec.shifts, pspec.prime_power_values())]
    hits = []
    for n in kept.survivors:
        n = int(n)
        m = pspec.m_of(n)
        args, values = [], []
        for i, (t, nu, p, l) in enumerate(zip(tables, spec.shifts, pspec.primes, pspec.exponents)):
            L = system.forms[i][0] * n + system.forms[i][1]
            if m + nu != nu * p**l * L:
                raise InvariantViolation(f"m + nu != nu p^l L at n={n}, i={i}", (n, i))
            a_L = coefficient_from_factorization(t, factor_dict(smooth[n][i]))
            args.append(m + nu)
            values.append(head[i] * a_L)
        if _chain_holds(spec, args, values):
            hits.append(hit_record(pspec, n, m, args, values))
    counts = dict(kept.counts, sifted=outcome.counts["omega"],
                  unevaluable=outcome.counts["omega"] - len(smooth), hits=len(hits))
    k = spec.k
    diag = dict(kept.diagnostics,
                hits_over_x_logx_k=len(hits) / (x / math.log(x) ** k) if x > 1 else math.nan,
                smooth_bound=bound, margins=pspec.chain_margins())
    return SearchResult(pspec, x, z, hits, counts, diag)


def verify_hit(hit: dict, spec: TargetSpec, factorizer: Factorizer | None = None) -> bool:
    """Recompute every ``a_{f_i}(m + nu_i)`` from scratch and re-check the chain."""
    factorizer = factorizer or Factorizer()
    m = int(hit["m"])
    args = [m + nu for nu in spec.shifts]
    values = [evaluate_coefficient(t, a, factorizer) for t, a in zip(spec.tables, args)]
    for v, rec in zip(values, hit["chain"]):
        if abs(v) != int(rec["abs_a"]):
            return False
    return _chain_holds(spec, args, values)


def sandwich_holds(spec: TargetSpec, m: int, factorizer: Factorizer | None = None) -> bool:
    """``c0^2 lambda(m_i)^2 <= lambda(m+nu_i)^2 <= lambda(m_i)^2 / c0^2`` for ``m + nu_i = nu_i m_i``."""
    fact = math.factorial(2 * spec.K)
    if m % fact:
        raise ValueError("m must be divisible by (2K)!")
    c2 = compute_c0_squared(spec)
    factorizer = factorizer or Factorizer()
    for t, nu in zip(spec.tables, spec.shifts):
        km1 = t.form.weight - 1
        mi = (m + nu) // nu
        a_full = evaluate_coefficient(t, m + nu, factorizer)
        a_mi = evaluate_coefficient(t, mi, factorizer)
        full = Fraction(a_full * a_full, (m + nu) ** km1)
        part = Fraction(a_mi * a_mi, mi**km1)
        if not (c2 * part <= full <= part / c2):
            return False
    return True


# --- brute-force scan ---------------------------------------------------------

@dataclass
class ScanResult:
    hits: np.ndarray
    m_max: int
    checkpoints: list

    @property
    def count(self) -> int:
        return int(self.hits.size)

    @property
    def first(self) -> int | None:
        return int(self.hits[0]) if self.hits.size else None


def _checkpoints(hits: np.ndarray, m_max: int) -> list[tuple[int, int]]:
    marks = []
    x = 10
    while x < m_max:
        marks.append(x)
        x *= 10
    marks.append(m_max)
    return [(mk, int(np.searchsorted(hits, mk, side="right"))) for mk in marks]


def scan_bruteforce(spec: TargetSpec, m_max: int, perm: Sequence[int] | None = None) -> ScanResult:
    """All ``1 <= m <= m_max`` satisfying the strict chain, by exhaustive comparison."""
    if perm is not None:
        spec = spec.permuted(perm)
    m_max = int(m_max)
    for t, nu in zip(spec.tables, spec.shifts):
        if m_max + nu > t.n_max:
            raise CoverageError(f"table bound {t.n_max} < m_max + shift = {m_max + nu}")
    m = np.arange(1, m_max + 1)
    ok = np.ones(m_max, dtype=bool)
    first_t, first_nu = spec.tables[0], spec.shifts[0]
    first_vals = np.array(first_t.coeffs[first_nu : first_nu + m_max], dtype=object)
    ok &= first_vals != 0
    if spec.mode == "abs":
        cols = [np.abs(np.array(t.coeffs[nu : nu + m_max], dtype=object))
                for t, nu in zip(spec.tables, spec.shifts)]
        for a, b in zip(cols, cols[1:]):
            ok &= (a < b).astype(bool)
        return ScanResult(m[ok], m_max, _checkpoints(m[ok], m_max))
    # lambda mode: float prefilter, exact decision on near ties
    lam = []
    for t, nu in zip(spec.tables, spec.shifts):
        w = t.form.weight
        vals = t.coeffs[nu : nu + m_max]
        lam.append(np.array([abs(lambda_float(w, arg, v)) for arg, v in
                             zip(range(1 + nu, m_max + 1 + nu), vals)]))
    for i in range(spec.k - 1):
        a, b = lam[i], lam[i + 1]
        ok &= a < b * (1 + 1e-9)
        close = np.flatnonzero(ok & (np.abs(a - b) <= 1e-9 * np.maximum(a, b)))
        ti, tj = spec.tables[i], spec.tables[i + 1]
        for idx in close:
            mm = int(idx) + 1
            xi, xj = mm + spec.shifts[i], mm + spec.shifts[i + 1]
            if abs_lambda_cmp(ti.coeffs[xi - 1], xi, ti.form.weight,
                              tj.coeffs[xj - 1], xj, tj.form.weight) >= 0:
                ok[idx] = False
    return ScanResult(m[ok], m_max, _checkpoints(m[ok], m_max))


# --- consecutive non-zero coefficients -----------------------------------------

@dataclass(frozen=True)
class OrderConditions:
    k: int
    cond1: bool
    cond_prime_powers: bool
    cond2: bool | None  # None = inconclusive below the search bound
    witness: int | None
    search_bound: int

    def to_json(self) -> dict:
        return {"k": self.k, "cond1": self.cond1, "cond_prime_powers": self.cond_prime_powers,
                "cond2": self.cond2, "witness": self.witness, "search_bound": self.search_bound}


def _prime_powers_upto(limit: int):
    for p in prime_list(max(int(limit), 1)):
        q = p
        while q <= limit:
            yield q
            q *= p


def check_order_conditions(table: CoefficientTable, k: int, search_bound: int | None = None,
                           start: int = 0) -> OrderConditions:
    """Evaluate the three equivalent forms of the non-vanishing condition for window length ``k``.

    ``cond2`` searches ``nu >= start`` with ``nu + k <= search_bound`` for ``k``
    consecutive non-zero coefficients ``a(nu+1..nu+k)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    half = k // 2
    if half > table.n_max:
        raise CoverageError(f"need a(n) for n <= {half}")
    cond1 = all(c != 0 for c in table.coeffs[:half])
    cond_pp = all(table.coeffs[q - 1] != 0 for q in _prime_powers_upto(half))
    bound = table.n_max if search_bound is None else min(search_bound, table.n_max)
    nz = np.array([c != 0 for c in table.coeffs[:bound]], dtype=np.int64)
    witness = None
    if bound - start >= k:
        csum = np.concatenate([[0], np.cumsum(nz)])
        # window a(nu+1..nu+k) sits at indices nu..nu+k-1
        full = np.flatnonzero(csum[start + k : bound + 1] - csum[start : bound + 1 - k] == k)
        if full.size:
            witness = int(full[0]) + start
    if witness is not None:
        cond2 = True
    elif not cond1:
        cond2 = False
    else:
        cond2 = None
    return OrderConditions(k, cond1, cond_pp, cond2, witness, bound)


def consecutive_nonzero_prime_powers(form: FormDescriptor, p: int, l_max: int, a_p: int) -> int:
    """Check that ``a(p^l)`` and ``a(p^(l+1))`` never vanish together for ``l < l_max``."""
    if form.level % p == 0:
        if a_p == 0:
            raise InvariantViolation(f"a({p}) = 0 at a ramified prime", (p,))
        return l_max
    seq = [1, a_p]
    q = p ** (form.weight - 1)
    for l in range(1, l_max):
        seq.append(a_p * seq[-1] - q * seq[-2])
        if seq[-1] == 0 and seq[-2] == 0:
            raise InvariantViolation(f"a({p}^{l}) = a({p}^{l + 1}) = 0", (p, l))
        seq[-3] = None  # keep memory flat
    return l_max


@dataclass(frozen=True)
class RModulus:
    k: int
    r: int
    D: int
    sigma: tuple
    exponents: dict
    system: LinearSystem

    def window_start(self, m: int) -> int:
        """``nu`` such that ``a(nu+1..nu+k)`` is the window centred at ``D m + r``."""
        return self.D * m + self.r - (self.k - 1) // 2 - 1


def build_r_modulus(table: CoefficientTable, k: int, scan_bound: int | None = None,
                    l_scan: int = 2000) -> RModulus:
    """CRT modulus ``D`` and residue ``r`` whose ``k`` neighbours yield admissible linear forms.

    Even ``k`` is handled through ``k + 1`` (the non-vanishing hypothesis is the same).
    """
    cond = check_order_conditions(table, k, search_bound=1)
    if not cond.cond1:
        raise ValueError(f"a(n) vanishes for some n <= {k // 2}")
    kk = k if k % 2 else k + 1
    h = (kk - 1) // 2
    form = table.form
    scan_bound = table.n_max if scan_bound is None else min(scan_bound, table.n_max)
    sigma = set(prime_list(2 * kk))
    for p in prime_list(scan_bound):
        a_p = table.coeffs[p - 1]
        q = p ** (form.weight - 1)
        if a_p != 0 and a_p * a_p != 4 * q and is_rational_angle(form, p, a_p):
            sigma.add(p)
    exps = {}
    residues, moduli = [], []
    for p in sorted(sigma):
        a_p = table.coeffs[p - 1]
        l = 1
        while not (p**l > kk and prime_power_eigenvalue(form, p, l, a_p) != 0):
            l += 1
            if l > l_scan:
                raise ExhaustionError(f"no usable exponent for p={p} below {l_scan}")
        exps[p] = l
        residues.append(p**l)
        moduli.append(p ** (l + 1))
    r, D = crt(residues, moduli)
    if r == 0:
        r = D
    forms = []
    for j in range(-h, h + 1):
        g = math.gcd(D, r + j)
        forms.append((D // g, (r + j) // g))
    system = LinearSystem(tuple(forms), tuple(sorted(sigma)))
    rep = validate_system(system, require_divisibility=True)
    if not rep.ok:
        raise HordError(f"r-modulus system invalid: {rep.failures}")
    return RModulus(kk, r, D, tuple(sorted(sigma)), exps, system)


def gcd_part_nonzero(table: CoefficientTable, rm: RModulus) -> bool:
    """``a(gcd(D, r+j)) != 0`` for every ``j`` in the window."""
    h = (rm.k - 1) // 2
    for j in range(-h, h + 1):
        g = math.gcd(rm.D, rm.r + j)
        fac = {p: e for p, e in factor_dict(Factorizer().factor(g)).items()}
        if coefficient_from_factorization(table, fac) == 0:
            return False
    return True
