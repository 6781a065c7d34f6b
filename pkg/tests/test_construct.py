import math
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from hord import construct
from hord.construct import TargetSpec
from hord.errors import (
    CoverageError,
    ExhaustionError,
    ExponentCapError,
    InvariantViolation,
    ZeroCoefficientError,
)
from hord.forms import DELTA, EXTERNAL, FormDescriptor, multiplicative_table, prime_power_sequence


def _spec(table, shifts, mode="lambda"):
    return TargetSpec((table,) * len(shifts), shifts, mode)


def test_target_spec_guards(delta_small):
    with pytest.raises(ValueError):
        TargetSpec((delta_small, delta_small), (1, 1))
    with pytest.raises(ValueError):
        TargetSpec((delta_small,), (0,))
    f = FormDescriptor(12, 1, EXTERNAL, "zero2")
    z = multiplicative_table(f, {2: 0}, 100)
    with pytest.raises(ZeroCoefficientError):
        TargetSpec((z,), (2,))
    assert _spec(delta_small, (1, 3, 2)).K == 3


def test_c0_examples(delta_small):
    assert construct.compute_c0(_spec(delta_small, (1,))) == pytest.approx(2**-5.5, rel=1e-15)
    # the two branches for nu = 2 are 24/2^5.5 and 2^-5.5 / (24/2^5.5) = 1/24
    assert construct.compute_c0_squared(_spec(delta_small, (2,))) == Fraction(1, 576)
    assert min(24 / 2**5.5, 1 / 24) == pytest.approx(construct.compute_c0(_spec(delta_small, (2,))))


def test_choose_primes(delta_small):
    assert construct.choose_primes(_spec(delta_small, (1,))) == (3,)
    ps = construct.choose_primes(_spec(delta_small, (5, 1, 2, 3, 4)))
    assert min(ps) > 10 and list(ps) == sorted(set(ps))
    assert construct.choose_primes(_spec(delta_small, (1, 2))) == (5, 7)


def test_choose_primes_skips_rational_angles():
    f = FormDescriptor(12, 1, EXTERNAL, "synthetic")
    t = multiplicative_table(f, {3: 729, 5: 0}, 200, default=1)
    assert construct.choose_primes(TargetSpec((t,), (1,))) == (7,)
    bare = multiplicative_table(f, {p: 0 for p in sympy.primerange(3, 60)}, 50)
    with pytest.raises(ExhaustionError):
        construct.choose_primes(TargetSpec((bare,), (1,)))


def _brute_exponent(a_p, p, target_sq, l_max=1000):
    seq = prime_power_sequence(DELTA, p, a_p, l_max)
    return next(l for l in range(1, l_max + 1) if Fraction(seq[l] ** 2, p ** (11 * l)) < target_sq)


@pytest.mark.parametrize("delta", ["0.9", "0.5", "0.25", "0.1", "0.03"])
def test_exponent_matches_bruteforce(delta_small, delta):
    spec = _spec(delta_small, (1, 2))
    tau = delta_small.coeffs
    l1, l2 = construct.choose_exponents(spec, (3, 5), Fraction(delta))
    assert l2 == 1
    target = Fraction(delta) ** 2 * Fraction(tau[4] ** 2, 5**11)
    assert l1 == _brute_exponent(tau[2], 3, target)


def test_exponent_chain_three_forms(delta_small):
    spec = _spec(delta_small, (1, 2, 3))
    ps = construct.choose_primes(spec)
    ls = construct.choose_exponents(spec, ps, 0.5)
    vals = [abs(Fraction(prime_power_sequence(DELTA, p, delta_small.coeffs[p - 1], l)[l]) ** 2
                / p ** (11 * l)) for p, l in zip(ps, ls)]
    assert ls[-1] == 1
    assert vals[0] < Fraction(1, 4) * vals[1] and vals[1] < Fraction(1, 4) * vals[2]


def test_single_form_exponent_is_one(delta_small):
    assert construct.choose_exponents(_spec(delta_small, (1,)), (3,), 0.25) == (1,)


def test_exponent_cap_reports_best(delta_small):
    with pytest.raises(ExponentCapError) as exc:
        construct.choose_exponents(_spec(delta_small, (1, 2)), (3, 5), Fraction(1, 10**9), l_max=50)
    assert exc.value.best_ratio > 1 and 1 <= exc.value.best_exponent <= 50


def test_convergent_denominators():
    assert construct.continued_fraction_denominators(math.sqrt(2) - 1, 100) == [1, 2, 5, 12, 29, 70]


def test_build_progression_example(delta_small):
    spec = _spec(delta_small, (1,))
    ps = construct.build_progression(spec, (3,), (1,))
    assert (ps.A, ps.B) == (18, 2)
    assert ps.system.forms == ((6, 1),)
    assert ps.system.sigma == (2, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**12))
def test_progression_identity(n):
    table = _TABLE
    spec = _spec(table, (1, 2, 3))
    ps = _PROG
    m = ps.m_of(n)
    assert m % math.factorial(6) == 0
    for (a, b), nu, p, l in zip(ps.system.forms, spec.shifts, ps.primes, ps.exponents):
        assert m + nu == nu * p**l * (a * n + b)
        assert (m + nu) % p**l == 0 and (m + nu) % p ** (l + 1) != 0


def _make_prog():
    from hord.forms import build_delta_table

    t = build_delta_table(2000)
    spec = _spec(t, (1, 2, 3))
    ps = construct.choose_primes(spec)
    return t, construct.build_progression(spec, ps, construct.choose_exponents(spec, ps, 0.5), 0.5)


_TABLE, _PROG = _make_prog()


def test_progression_invariants():
    ps = _PROG
    K = 3
    assert ps.primes[0] > 2 * K
    assert ps.A == math.factorial(2 * K) * math.prod(p ** (l + 1) for p, l in zip(ps.primes, ps.exponents))
    assert 0 < ps.B < ps.A and ps.B % math.factorial(2 * K) == 0
    for nu, p, l in zip((1, 2, 3), ps.primes, ps.exponents):
        assert math.gcd(ps.A, ps.B + nu) == nu * p**l
    assert all(m < 0.5 for m in ps.chain_margins())
    assert construct.validate_system(ps.system, require_divisibility=True).ok


def test_sandwich_on_sampled_m(delta_big):
    spec = _spec(delta_big, (1, 2))
    rng = random.Random(5)
    tested = 0
    while tested < 40:
        m = 24 * rng.randrange(1, 10**9)
        if max(max(sympy.factorint(m + nu)) for nu in (1, 2)) > delta_big.n_max:
            continue
        assert construct.sandwich_holds(spec, m)
        tested += 1
    with pytest.raises(ValueError):
        construct.sandwich_holds(spec, 25)


def test_scan_examples(delta_big):
    one = construct.scan_bruteforce(_spec(delta_big, (1,), "abs"), 10**5)
    assert one.count == 10**5  # no zeros of tau in range
    ident = construct.scan_bruteforce(_spec(delta_big, (1, 2), "abs"), 10**4)
    swap = construct.scan_bruteforce(_spec(delta_big, (1, 2), "abs"), 10**4, perm=(2, 1))
    assert ident.first == 1 and swap.first == 10
    assert ident.count + swap.count == 10**4  # |tau(n)| = |tau(n+1)| never happens here
    assert ident.checkpoints[-1] == (10**4, ident.count)


def test_scan_lambda_mode_matches_plain_loop(delta_small):
    spec = _spec(delta_small, (1, 2, 3))
    got = construct.scan_bruteforce(spec, 1500, perm=(3, 1, 2)).hits.tolist()
    a = delta_small.coeffs
    key = lambda n: Fraction(a[n - 1] ** 2, n**11)
    want = [m for m in range(1, 1501) if a[m + 2] != 0 and key(m + 3) < key(m + 1) < key(m + 2)]
    assert got == want


def test_scan_coverage_and_perm_errors(delta_small):
    with pytest.raises(CoverageError):
        construct.scan_bruteforce(_spec(delta_small, (1, 2)), delta_small.n_max)
    with pytest.raises(ValueError):
        construct.scan_bruteforce(_spec(delta_small, (1, 2)), 10, perm=(1, 1))


def test_run_ordered_search_k1_and_crosscheck(delta_big):
    spec = _spec(delta_big, (1,), "abs")
    ps = construct.build_progression(spec, (3,), (1,))
    res = construct.run_ordered_search(ps, 5000, eta=0.3)
    brute = set(construct.scan_bruteforce(spec, 18 * 5000 + 2).hits.tolist())
    ms = [int(h["m"]) for h in res.hits]
    assert ms and set(ms) <= brute
    # k = 1: every survivor of the filters is a hit
    assert len(res.hits) == res.counts["avoid"]


def test_run_ordered_search_cross_validation_k2(delta_big):
    spec = _spec(delta_big, (1, 2))
    ps = construct.build_progression(spec, (5, 7), (1, 1))  # A = 29400
    res = construct.run_ordered_search(ps, 30, eta=0.5)
    brute = set(construct.scan_bruteforce(spec, 10**6).hits.tolist())
    for h in res.hits:
        m = int(h["m"])
        assert m in brute
        assert construct.verify_hit(h, spec)


def test_verify_hit_rejects_tampering(delta_small):
    spec = _spec(delta_small, (1, 2), "abs")
    hit = {"m": "1", "chain": [{"abs_a": "24"}, {"abs_a": "252"}]}
    assert construct.verify_hit(hit, spec)
    assert not construct.verify_hit({"m": "1", "chain": [{"abs_a": "25"}, {"abs_a": "252"}]}, spec)
    assert not construct.verify_hit({"m": "10", "chain": [{"abs_a": "534612"}, {"abs_a": "370944"}]}, spec)


def test_conditions_delta_k14(delta_1e5):
    res = construct.check_order_conditions(delta_1e5, 14)
    assert res.cond1 and res.cond_prime_powers and res.cond2 and res.witness == 0


def test_conditions_k1_vacuous(delta_small):
    res = construct.check_order_conditions(delta_small, 1)
    assert res.cond1 and res.cond2 and res.witness == 0


def test_conditions_synthetic_counterexample():
    f = FormDescriptor(12, 1, EXTERNAL, "zero2")
    t = multiplicative_table(f, {2: 0}, 20_000)
    res = construct.check_order_conditions(t, 4)
    assert not res.cond1 and not res.cond_prime_powers
    assert res.cond2 is False and res.witness is None
    # a(2 * odd) = 0 so windows of 3 around an odd number still exist
    assert construct.check_order_conditions(t, 3).cond2


def test_conditions_inconclusive():
    f = FormDescriptor(12, 1, EXTERNAL, "zero3")
    t = multiplicative_table(f, {3: 0}, 500)
    res = construct.check_order_conditions(t, 5, search_bound=8)
    assert res.cond1 and res.cond2 is None


@given(st.integers(1, 40), st.sampled_from([{}, {2: 0}, {3: 0}, {2: 64}, {5: 0, 7: 0}]))
@settings(max_examples=60, deadline=None)
def test_cond1_equals_prime_power_form(k, prime_values):
    t = multiplicative_table(FormDescriptor(12, 1, EXTERNAL, "s"), prime_values, 200)
    res = construct.check_order_conditions(t, k)
    assert res.cond1 == res.cond_prime_powers


def test_consecutive_nonzero(delta_small):
    assert construct.consecutive_nonzero_prime_powers(DELTA, 2, 10**4, -24) == 10**4
    assert construct.consecutive_nonzero_prime_powers(DELTA, 7, 500, 0) == 500
    seq = prime_power_sequence(DELTA, 7, 0, 6)
    assert seq[0] == 1 and seq[1::2] == [0, 0, 0] and seq[2] == -(7**11)
    ram = FormDescriptor(2, 11, EXTERNAL, "E11")
    assert construct.consecutive_nonzero_prime_powers(ram, 11, 10, 1) == 10
    with pytest.raises(InvariantViolation):
        construct.consecutive_nonzero_prime_powers(ram, 11, 10, 0)


def test_r_modulus_k1(delta_small):
    rm = construct.build_r_modulus(delta_small, 1)
    assert (rm.sigma, rm.exponents, rm.D, rm.r) == ((2,), {2: 1}, 4, 2)


@pytest.mark.parametrize("k", [3, 7, 12])
def test_r_modulus_structure(delta_small, k):
    rm = construct.build_r_modulus(delta_small, k)
    assert 0 < rm.r < rm.D and rm.k % 2 == 1 and rm.k >= k
    assert construct.gcd_part_nonzero(delta_small, rm)
    h = (rm.k - 1) // 2
    for j in range(-h, h + 1):
        g = math.gcd(rm.D, rm.r + j)
        if j:
            assert all(p**e <= rm.k / 2 for p, e in sympy.factorint(g).items())
        else:
            assert all(e == rm.exponents[p] for p, e in sympy.factorint(g).items())
    for m in range(5):
        for (a, b), j in zip(rm.system.forms, range(-h, h + 1)):
            assert rm.D * m + rm.r + j == math.gcd(rm.D, rm.r + j) * (a * m + b)


def test_r_modulus_adds_rational_angle_primes():
    f = FormDescriptor(12, 1, EXTERNAL, "s")
    t = multiplicative_table(f, {11: 0, 13: 0}, 400)  # a(p) = 0 is not added, a(p^2) != 0
    rm = construct.build_r_modulus(t, 3)
    assert rm.sigma == (2, 3, 5)
    t2 = multiplicative_table(f, {2: 64}, 400)
    rm2 = construct.build_r_modulus(t2, 1)
    assert rm2.exponents[2] >= 1 and t2.coeffs[2 ** rm2.exponents[2] - 1] != 0
