"""Sieving integer windows against systems of linear forms ``L_i(n) = a_i n + b_i``.

Notation follows the usual sieve setup: ``Sigma`` is a finite set of
excluded primes, ``P_Sigma(z)`` the product of the primes ``p < z`` outside
``Sigma``, and

* ``Omega(x, z)``: ``1 <= n <= x`` with ``gcd(L_1(n)...L_k(n), P_Sigma(z)) = 1``;
* ``Omega_1(x, z)``: those ``n`` for which every ``L_i(n)`` is composite and
  Sigma-squarefree (a Sigma-unit times a squarefree integer).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable

import mpmath
import numpy as np

from .arith import Factorizer, is_prime, li, prime_list, primes_upto
from .errors import FactorizationTimeout, InvalidSystemError

DEFAULT_SEGMENT = 1 << 20
DEFAULT_ETA = 0.05
SPF_LIMIT_CAP = 20_000_000


@dataclass(frozen=True)
class LinearSystem:
    forms: tuple
    sigma: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "forms", tuple((int(a), int(b)) for a, b in self.forms))
        object.__setattr__(self, "sigma", tuple(sorted({int(p) for p in self.sigma})))

    @property
    def k(self) -> int:
        return len(self.forms)

    @property
    def M(self) -> int:
        return max((max(abs(a), abs(b)) for a, b in self.forms), default=0)

    def values(self, n: int) -> list[int]:
        return [a * n + b for a, b in self.forms]

    def to_dict(self) -> dict:
        return {"forms": [list(f) for f in self.forms], "sigma": list(self.sigma)}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearSystem":
        return cls(tuple(tuple(f) for f in d["forms"]), tuple(d.get("sigma", ())))

    @classmethod
    def parse(cls, text: str) -> "LinearSystem":
        """Inline form ``"1,0;1,2|2"``: forms ``a,b`` separated by ``;``, then ``|`` and Sigma."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_dict(json.loads(text))
        forms_part, _, sigma_part = text.partition("|")
        forms = []
        for chunk in forms_part.split(";"):
            if chunk.strip():
                a, b = chunk.split(",")
                forms.append((int(a), int(b)))
        sigma = [int(p) for p in sigma_part.replace(";", ",").split(",") if p.strip()]
        return cls(tuple(forms), tuple(sigma))


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)

    def add(self, condition: str, *witness):
        self.failures.append((condition, witness))

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def sieve_ok(self) -> bool:
        # The factorial part only serves the density estimates; the sieve itself
        # needs invertible a_i and pairwise distinct roots outside Sigma.
        return all(c == "factorial_sigma_unit" for c, _ in self.failures)

    def conditions(self) -> set[str]:
        return {c for c, _ in self.failures}


def _sigma_cofactor(value: int, sigma: Iterable[int]) -> int:
    value = abs(value)
    for p in sigma:
        while value and value % p == 0:
            value //= p
    return value


def validate_system(system: LinearSystem, require_divisibility: bool = False) -> ValidationReport:
    """Check non-degeneracy, the Sigma-unit condition and (optionally) that Sigma divides every a_i."""
    rep = ValidationReport()
    sigma = system.sigma
    for p in sigma:
        if not is_prime(p):
            rep.add("sigma_prime", p)
    forms = system.forms
    for i, (a, b) in enumerate(forms):
        if a == 0:
            rep.add("a_nonzero", i)
        elif math.gcd(a, b) != 1:
            rep.add("gcd_ab", i, math.gcd(a, b))
    for p in prime_list(2 * system.k):
        if p not in sigma:
            rep.add("factorial_sigma_unit", p)
    for i, (a, _) in enumerate(forms):
        if a and _sigma_cofactor(a, sigma) != 1:
            rep.add("a_sigma_unit", i, _sigma_cofactor(a, sigma))
    for i in range(len(forms)):
        for j in range(i + 1, len(forms)):
            det = forms[i][0] * forms[j][1] - forms[j][0] * forms[i][1]
            if det == 0:
                rep.add("nondegenerate", i, j)
            elif _sigma_cofactor(det, sigma) != 1:
                rep.add("det_sigma_unit", i, j, _sigma_cofactor(det, sigma))
    if require_divisibility:
        for p in sigma:
            for i, (a, _) in enumerate(forms):
                if a % p:
                    rep.add("sigma_divides_a", p, i)
    return rep


@dataclass(frozen=True)
class FormFactorization:
    i: int
    value: int
    sigma_part: int
    rough_factors: tuple

    def to_dict(self) -> dict:
        return {"i": self.i, "value": self.value, "sigma_part": self.sigma_part,
                "rough_factors": list(self.rough_factors)}

    @property
    def primes(self) -> list[int]:
        return sorted(set(self.rough_factors) | _primes_of(self.sigma_part))


_SMALL = Factorizer()


def _primes_of(n: int) -> set[int]:
    return set(_SMALL.factor(n)) if n > 1 else set()


@dataclass
class SieveOutcome:
    system: LinearSystem
    x: int
    z: float
    survivors: np.ndarray
    counts: dict
    predicted: float
    u: float
    stage: str = "omega"
    records: dict = field(default_factory=dict, repr=False)
    undecided: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        """Observed ``#Omega`` over the prediction ``x W_k(z)``."""
        return self.counts["omega"] / self.predicted if self.predicted else math.nan

    def to_json(self) -> dict:
        return {"x": self.x, "z": self.z, "u": self.u, "stage": self.stage,
                "counts": dict(self.counts), "predicted": self.predicted,
                "ratio": self.ratio, "undecided": [int(n) for n in self.undecided],
                "diagnostics": self.diagnostics}


def _require_sieve_ok(system: LinearSystem) -> ValidationReport:
    rep = validate_system(system)
    if not rep.sieve_ok:
        raise InvalidSystemError(f"system fails {sorted(rep.conditions())}", rep)
    return rep


def _roots(system: LinearSystem, z: float) -> list[tuple[int, tuple[int, ...]]]:
    out = []
    sigma = set(system.sigma)
    for p in prime_list(max(int(math.ceil(z)) - 1, 1)):
        if p >= z or p in sigma:
            continue
        rs = tuple((-b * pow(a, -1, p)) % p for a, b in system.forms)
        if len(set(rs)) != len(rs):
            raise InvalidSystemError(f"two forms share a root modulo {p}; validator bug")
        out.append((p, rs))
    return out


def _sift_segment(lo: int, hi: int, roots) -> np.ndarray:
    mask = np.ones(hi - lo, dtype=bool)
    for p, rs in roots:
        for r in rs:
            mask[(r - lo) % p :: p] = False
    return np.flatnonzero(mask).astype(np.int64) + lo


def sift_omega(system: LinearSystem, x: int, z: float, segment_size: int = DEFAULT_SEGMENT,
               workers: int = 1) -> SieveOutcome:
    """``Omega(x, z)`` by a segmented bitmap over ``n``; one residue class per form and prime."""
    if z < 2:
        raise ValueError("z must be >= 2")
    x = int(x)
    if x < 1:
        raise ValueError("x must be >= 1")
    _require_sieve_ok(system)
    roots = _roots(system, z)
    bounds = [(lo, min(lo + segment_size, x + 1)) for lo in range(1, x + 1, segment_size)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _sift_segment(b[0], b[1], roots), bounds))
    else:
        parts = [_sift_segment(lo, hi, roots) for lo, hi in bounds]
    survivors = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    w_k, _ = mertens_products(system, z)
    u = math.log(x) / math.log(z) if x > 1 else 0.0
    return SieveOutcome(system, x, float(z), survivors, {"omega": int(survivors.size)},
                        float(x * w_k), u)


# --- classification of survivors ------------------------------------------

def _classify(system: LinearSystem, n: int, factorizer: Factorizer, given=None):
    """Return (records, flags) for one survivor; flags = (prime, square, unit, composite_all)."""
    sigma = set(system.sigma)
    recs = []
    any_prime = any_square = any_unit = False
    all_composite = True
    for i, (a, b) in enumerate(system.forms):
        v = a * n + b
        fac = list(given[i]) if given is not None else factorizer.factor(v)
        sig = 1
        rough = []
        for p in fac:
            if p in sigma:
                sig *= p
            else:
                rough.append(p)
        recs.append(FormFactorization(i, v, sig, tuple(rough)))
        if abs(v) <= 1:
            any_unit = True
            all_composite = False
        elif len(fac) == 1:
            any_prime = True
            all_composite = False
        if any(p == q for p, q in zip(rough, rough[1:])):
            any_square = True
    return recs, (any_prime, any_square, any_unit, all_composite)


def _default_factorizer(system: LinearSystem, x: int, seed: int) -> Factorizer:
    vmax = max((abs(a) * x + abs(b) for a, b in system.forms), default=1)
    return Factorizer(spf_limit=min(vmax, SPF_LIMIT_CAP) if vmax <= SPF_LIMIT_CAP else 0, seed=seed)


def refine_omega1(outcome: SieveOutcome, factorizer: Factorizer | None = None, workers: int = 1,
                  factorizations: dict | None = None, seed: int = 0) -> SieveOutcome:
    """Keep ``n`` whose ``L_i(n)`` are all composite and Sigma-squarefree.

    Also counts ``Omega^prime`` (some ``L_i(n)`` prime), ``Omega^square`` (some
    ``L_i(n)`` not Sigma-squarefree) and ``Omega^unit`` (some ``L_i(n) = +-1``).
    ``factorizations`` may supply precomputed prime lists per ``n`` and form.
    Values the factorizer cannot split land in ``undecided``.
    """
    system = outcome.system
    factorizer = factorizer or _default_factorizer(system, outcome.x, seed)
    survivors = [int(n) for n in outcome.survivors]

    def work(chunk):
        out = []
        for n in chunk:
            given = factorizations.get(n) if factorizations else None
            try:
                out.append((n,) + _classify(system, n, factorizer, given))
            except FactorizationTimeout:
                out.append((n, None, None))
        return out

    chunks = [survivors[i : i + 4096] for i in range(0, len(survivors), 4096)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = [r for part in pool.map(work, chunks) for r in part]
    else:
        results = [r for c in chunks for r in work(c)]

    kept, records, undecided = [], {}, []
    n_prime = n_square = n_unit = 0
    for n, recs, flags in results:
        if recs is None:
            undecided.append(n)
            continue
        is_p, is_sq, is_u, comp = flags
        n_prime += is_p
        n_square += is_sq
        n_unit += is_u
        if comp and not is_sq:
            kept.append(n)
            records[n] = recs
    counts = dict(outcome.counts, omega1=len(kept), prime=n_prime, square=n_square,
                  unit=n_unit, undecided=len(undecided))
    return replace(outcome, survivors=np.array(kept, dtype=np.int64), counts=counts,
                   stage="omega1", records=records, undecided=undecided)


def avoid_prime_set(outcome: SieveOutcome, bad: Callable[[int], bool]) -> SieveOutcome:
    """Drop ``n`` for which some prime factor of some ``L_i(n)`` satisfies ``bad``."""
    if outcome.stage != "omega1":
        raise ValueError("avoid_prime_set expects the output of refine_omega1")
    verdict: dict[int, bool] = {}

    def is_bad(p):
        if p not in verdict:
            verdict[p] = bool(bad(p))
        return verdict[p]

    kept, records = [], {}
    for n in outcome.survivors:
        n = int(n)
        recs = outcome.records[n]
        if not any(is_bad(p) for r in recs for p in r.primes):
            kept.append(n)
            records[n] = recs
    before = outcome.counts["omega1"]
    frac = len(kept) / before if before else math.nan
    counts = dict(outcome.counts, avoid=len(kept))
    diag = dict(outcome.diagnostics, retained_fraction=frac,
                bad_primes_seen=sum(verdict.values()), primes_seen=len(verdict))
    return replace(outcome, survivors=np.array(kept, dtype=np.int64), counts=counts,
                   stage="avoid", records=records, diagnostics=diag)


# --- prime-value variant and predictions -------------------------------------

def _prime_mask_lookup(values: np.ndarray) -> np.ndarray:
    vmax = int(values.max()) if values.size else 0
    if vmax <= 50_000_000:
        flags = np.zeros(vmax + 1, dtype=bool)
        flags[primes_upto(vmax)] = True
        return flags[values]
    return np.array([is_prime(int(v)) for v in values], dtype=bool)


def count_omega_star(system: LinearSystem, x: int, z: float, which: int | None = None,
                     workers: int = 1) -> int:
    """Count ``n <= x`` with the other forms sifted at level ``z`` and ``L_which(n)`` prime."""
    which = system.k - 1 if which is None else which
    a, b = system.forms[which]
    others = LinearSystem(system.forms[:which] + system.forms[which + 1 :], system.sigma)
    if x < 1:
        return 0
    if others.k:
        survivors = sift_omega(others, x, max(z, 2), workers=workers).survivors
    else:
        survivors = np.arange(1, int(x) + 1, dtype=np.int64)
    values = np.abs(a * survivors.astype(object) + b) if abs(a) * x + abs(b) >= 2**62 \
        else np.abs(a * survivors + b)
    if values.dtype == object:
        return sum(is_prime(int(v)) for v in values)
    return int(_prime_mask_lookup(values).sum())


def omega_star_prediction(system: LinearSystem, x: int, z: float, which: int | None = None) -> float:
    """``li(|a| x) / phi(|a|) * W*_{k-1}(z)`` for the prime-valued form ``which``."""
    which = system.k - 1 if which is None else which
    a = abs(system.forms[which][0])
    _, w_star = mertens_products(system, z)
    return li(a * x) / _phi(a) * float(w_star)


def _phi(n: int) -> int:
    out = n
    for p in set(Factorizer().factor(n)):
        out -= out // p
    return out


def mertens_products(system: LinearSystem, z: float, exact: bool | None = None):
    """``(W_k(z), W*_{k-1}(z))`` over primes ``p <= z`` outside Sigma.

    Exact rationals when there are at most 2000 such primes (or ``exact=True``),
    otherwise 128-bit mpmath floats.
    """
    k = system.k
    sigma = set(system.sigma)
    primes = [p for p in prime_list(int(math.floor(z))) if p not in sigma]
    if exact is None:
        exact = len(primes) <= 2000
    if exact:
        w = Fraction(1)
        ws = Fraction(1)
        for p in primes:
            w *= Fraction(p - k, p)
            ws *= Fraction(p - 1 - (k - 1), p - 1)
        return w, ws
    with mpmath.workprec(128):
        w = mpmath.fprod(1 - mpmath.mpf(k) / p for p in primes)
        ws = mpmath.fprod(1 - mpmath.mpf(k - 1) / (p - 1) for p in primes)
    return w, ws


def nonsquarefree_bound(system: LinearSystem, x: float, z: float) -> float:
    """Explicit bound ``kM(x+1)/(z-1) + k sqrt(Mx+M)`` on ``#Omega^square``."""
    k, M = system.k, system.M
    return k * M * (x + 1) / (z - 1) + k * math.sqrt(M * x + M)


def prime_value_bound(system: LinearSystem, x: float, z: float) -> float:
    """``2k li(max|a_i| x) W*_{k-1}(z)``, the shape of the upper bound for ``#Omega^prime``."""
    amax = max(abs(a) for a, _ in system.forms)
    _, ws = mertens_products(system, z)
    return 2 * system.k * li(amax * x) * float(ws)


# --- smooth factorizations over a window ----------------------------------

def smooth_window(system: LinearSystem, x: int, bound: int, candidates: np.ndarray | None = None
                  ) -> dict[int, list[list[int]]]:
    """Factor ``L_i(n)`` for all ``n <= x`` at which every form is ``bound``-smooth.

    Pass one accumulates ``log q`` over the roots of ``L_i`` modulo each prime
    power ``q^e`` with ``q <= bound``; pass two collects the primes at the
    smooth positions and the product is re-checked exactly.  ``candidates``
    (sorted ``n`` values) restricts the result.
    """
    x = int(x)
    primes = prime_list(bound)
    forms = system.forms
    keep = np.zeros(x + 1, dtype=bool)
    if candidates is None:
        keep[1:] = True
    else:
        keep[np.asarray(candidates, dtype=np.int64)] = True
    plans = []  # per form: list of (step, first) for every root of every q^e
    smooth = keep.copy()
    for a, b in forms:
        vmax = abs(a) * x + abs(b)
        acc = np.zeros(x + 1)
        plan = []
        for q in primes:
            if a % q == 0:
                continue
            inv = pow(a, -1, q)
            qe, e = q, 1
            lq = math.log(q)
            while qe <= vmax:
                if e > 1:
                    inv = pow(a, -1, qe)
                r = (-b * inv) % qe
                first = r if r >= 1 else qe
                if first > x:
                    break
                acc[first::qe] += lq
                plan.append((q, qe, first))
                qe *= q
                e += 1
        vals = np.abs(a * np.arange(x + 1, dtype=np.float64) + b)
        with np.errstate(divide="ignore"):
            need = np.log(np.maximum(vals, 1.0))
        smooth &= acc >= need - 0.5 * math.log(max(bound, 2))
        plans.append(plan)
    cand = np.flatnonzero(smooth)
    out: dict[int, list[list[int]]] = {int(n): [[] for _ in forms] for n in cand}
    for i, plan in enumerate(plans):
        for q, qe, first in plan:
            hits = np.flatnonzero(smooth[first::qe])
            for h in hits:
                out[int(first + h * qe)][i].append(q)
    result = {}
    for n, lists in out.items():
        good = True
        for (a, b), fac in zip(forms, lists):
            if math.prod(fac) != abs(a * n + b):
                good = False
                break
        if good:
            result[n] = [sorted(f) for f in lists]
    return result


def dump_survivors(outcome: SieveOutcome, fh) -> int:
    """Write one JSON line per retained ``n``; returns the number of lines."""
    count = 0
    for n in outcome.survivors:
        n = int(n)
        recs = outcome.records.get(n)
        forms = [r.to_dict() for r in recs] if recs else []
        fh.write(json.dumps({"n": n, "forms": forms}) + "\n")
        count += 1
    return count
