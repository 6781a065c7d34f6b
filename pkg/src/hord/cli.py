"""``hord`` command line.

Machine-readable output goes to stdout, progress and diagnostics to stderr.
Exit status: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .arith import Factorizer, parse_int
from .cache import default_cache_dir, load_table
from .construct import (
    TargetSpec,
    build_progression,
    check_order_conditions,
    choose_exponents,
    choose_primes,
    run_ordered_search,
    scan_bruteforce,
    verify_hit,
)
from .errors import (
    ChecksumError,
    HordError,
    InvalidSystemError,
    InvariantViolation,
    ParseError,
)
from .forms import (
    CoefficientTable,
    evaluate_coefficient,
    ingest_table,
    normalized_lambda,
    parse_form_name,
    write_table,
)
from .satotate import (
    angle_sample,
    count_zero_or_extreme,
    empirical_discrepancy,
    histogram,
    small_lambda_density,
    small_lambda_prediction,
)
from .sieve import (
    LinearSystem,
    count_omega_star,
    dump_survivors,
    mertens_products,
    nonsquarefree_bound,
    prime_value_bound,
    refine_omega1,
    sift_omega,
)

log = logging.getLogger("hord")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    cache_dir: Path | None = None
    use_cache: bool = True
    precision_bits: int = 96
    workers: int = 1
    seed: int = 0
    json: bool = False
    memory_budget: int | None = None

    def __post_init__(self):
        if self.precision_bits < 64:
            raise UsageError("--precision-bits must be >= 64")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if self.memory_budget is not None and self.memory_budget <= 0:
            raise UsageError("--memory-budget must be positive")


# --- argument types -----------------------------------------------------------

def _int_arg(lo: int | None = None):
    def conv(text: str) -> int:
        try:
            v = parse_int(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
        if lo is not None and v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v
    return conv


def _float_in(lo: float, hi: float, closed_hi: bool = False):
    def conv(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not (lo < v < hi or (closed_hi and v == hi)):
            raise argparse.ArgumentTypeError(f"{v} outside ({lo}, {hi}{']' if closed_hi else ')'}")
        return v
    return conv


def _int_list(text: str) -> list[int]:
    try:
        return [parse_int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--json", action="store_true", default=d(False),
                        help="machine-readable JSON on stdout")
    parser.add_argument("--cache-dir", default=d(None), help="overrides HORD_CACHE")
    parser.add_argument("--no-cache", action="store_true", default=d(False))
    parser.add_argument("--workers", type=_int_arg(1), default=d(1))
    parser.add_argument("--precision-bits", type=_int_arg(64), default=d(96))
    parser.add_argument("--seed", type=_int_arg(0), default=d(0),
                        help="seed for Pollard rho")
    parser.add_argument("--memory-budget", type=_int_arg(1), default=d(None),
                        help="bytes allowed for a coefficient table")
    parser.add_argument("-v", "--verbose", action="count", default=d(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hord", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hord {__version__}")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p, suppress=True)
        return p

    p = add("tau", "print a_f(n)")
    p.add_argument("n", type=_int_arg())
    p.add_argument("--form", default="Delta")

    p = add("expand", "write a_f(1..nmax) in the text table format")
    p.add_argument("--form", default="Delta")
    p.add_argument("--nmax", type=_int_arg(1), required=True)
    p.add_argument("--out", help="file path (default stdout)")

    p = add("ingest", "load and verify an external coefficient table")
    p.add_argument("path")
    p.add_argument("--exhaustive", action="store_true",
                   help="check multiplicativity on every coprime pair")

    p = add("scan", "brute-force search for ordered runs of |tau|")
    p.add_argument("--form", default="Delta")
    p.add_argument("--k", type=_int_arg(1), required=True)
    p.add_argument("--perm", type=_int_list, help="e.g. 2,3,1 (default identity)")
    p.add_argument("--mmax", type=_int_arg(1), required=True)
    p.add_argument("--mode", choices=("abs", "lambda"), default="abs")
    p.add_argument("--hits-out", help="write every hit m to this file, one per line")

    p = add("construct", "sieve-and-CRT construction of ordered runs")
    p.add_argument("--forms", required=True, help="comma separated, e.g. Delta,Delta16")
    p.add_argument("--shifts", type=_int_list, required=True)
    p.add_argument("--delta", type=_float_in(0.0, 1.0), default=0.25)
    p.add_argument("--eta", type=_float_in(0.0, 1.0), default=0.05)
    p.add_argument("--eps", type=_float_in(0.0, 2.0, closed_hi=True), default=0.2)
    p.add_argument("--x", type=_int_arg(2), default=10**5)
    p.add_argument("--table-bound", type=_int_arg(10), default=10**6,
                   help="coefficients tabulated per form; L_i(n) must be smooth below it")
    p.add_argument("--mode", choices=("lambda", "abs"), default="lambda")
    p.add_argument("--max-hits", type=_int_arg(0), default=0, help="0 = all")
    p.add_argument("--summary", help="write the run summary JSON here")

    p = add("sieve-stats", "sift a system of linear forms and report counts and bounds")
    p.add_argument("--system", required=True, help="JSON file or inline '1,0;1,2|2'")
    p.add_argument("--x", type=_int_arg(1), required=True)
    p.add_argument("--z", type=_int_arg(2))
    p.add_argument("--eta", type=_float_in(0.0, 1.0, closed_hi=True))
    p.add_argument("--refine", action="store_true", help="also factor survivors")
    p.add_argument("--dump", help="write survivors as JSON lines")

    p = add("satotate", "compare lambda_f(p) with the Sato-Tate law")
    p.add_argument("--form", default="Delta")
    p.add_argument("--xmax", type=_int_arg(2), required=True)
    p.add_argument("--bins", type=_int_arg(1), default=64)
    p.add_argument("--eps", type=_float_in(0.0, 2.0, closed_hi=True), default=0.2)
    p.add_argument("--csv", help="histogram CSV path ('-' for stdout, replacing the JSON)")

    p = add("lehmer", "look for vanishing a_f(n) with n <= nmax")
    p.add_argument("--form", default="Delta")
    p.add_argument("--nmax", type=_int_arg(1), required=True)

    p = add("check-conditions", "window of k consecutive non-zero coefficients")
    p.add_argument("--form", default="Delta")
    p.add_argument("--k", type=_int_arg(1), required=True)
    p.add_argument("--bound", type=_int_arg(1), default=10**5,
                   help="search bound for the window")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    opts = {k: v for k, v in vars(ns).items() if k not in {
        "command", "json", "cache_dir", "no_cache", "workers", "precision_bits", "seed",
        "memory_budget", "verbose"}}
    cache_dir = ns.cache_dir or os.environ.get("HORD_CACHE") or None
    return RunConfig(ns.command, opts, Path(cache_dir) if cache_dir else default_cache_dir(),
                     not ns.no_cache, ns.precision_bits, ns.workers, ns.seed, ns.json,
                     ns.memory_budget)


# --- helpers ------------------------------------------------------------------

def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _table(cfg: RunConfig, name: str, n_max: int) -> CoefficientTable:
    path = Path(name)
    if path.is_file():
        table = ingest_table(path)
        if table.n_max < n_max:
            raise UsageError(f"{path} holds {table.n_max} coefficients, need {n_max}")
        return table
    form = parse_form_name(name)
    return load_table(form, n_max, cfg.cache_dir, cfg.use_cache, cfg.memory_budget)


# --- subcommands ----------------------------------------------------------------

def cmd_tau(cfg: RunConfig) -> int:
    n = cfg.options["n"]
    if n < 1:
        raise UsageError("n must be >= 1")
    fac = Factorizer(seed=cfg.seed)
    need = max(fac.factor(n), default=1)
    table = _table(cfg, cfg.options["form"], max(need, min(n, 1000), 2))
    a = evaluate_coefficient(table, n, fac)
    if cfg.json:
        lam = normalized_lambda(table.form, n, a, cfg.precision_bits)
        digits = max(15, int(cfg.precision_bits * math.log10(2)))
        from mpmath import nstr

        _emit({"form": table.form.label, "weight": table.form.weight, "n": n, "a_n": str(a),
               "lambda": nstr(lam.lam, digits)})
    else:
        print(a)
    return EXIT_OK


def cmd_expand(cfg: RunConfig) -> int:
    o = cfg.options
    table = _table(cfg, o["form"], o["nmax"])
    table = table.truncate(o["nmax"]) if table.n_max > o["nmax"] else table
    if o["out"]:
        write_table(table, o["out"])
        log.info("wrote %d coefficients to %s", table.n_max, o["out"])
    else:
        f = table.form
        out = sys.stdout
        out.write(f"#form label={f.label} weight={f.weight} level={f.level} nmax={table.n_max}\n")
        for n, c in enumerate(table.coeffs, start=1):
            out.write(f"{n}\t{c}\n")
    return EXIT_OK


def cmd_ingest(cfg: RunConfig) -> int:
    table = ingest_table(cfg.options["path"], exhaustive=cfg.options["exhaustive"])
    f = table.form
    summary = {"label": f.label, "weight": f.weight, "level": f.level,
               "nmax": table.n_max, "verified": True}
    _emit(summary) if cfg.json else print(f"{f.label}: {table.n_max} coefficients verified")
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    o = cfg.options
    k = o["k"]
    table = _table(cfg, o["form"], o["mmax"] + k)
    spec = TargetSpec((table,) * k, tuple(range(1, k + 1)), o["mode"])
    perm = o["perm"] or list(range(1, k + 1))
    if len(perm) != k:
        raise UsageError(f"--perm needs {k} entries")
    t0 = time.perf_counter()
    res = scan_bruteforce(spec, o["mmax"], perm)
    log.info("scan finished in %.1fs", time.perf_counter() - t0)
    if o["hits_out"]:
        Path(o["hits_out"]).write_text("".join(f"{m}\n" for m in res.hits))
    density = [{"x": x, "count": c,
                "over_x_logx_k": c / (x / math.log(x) ** k) if x > 1 else None}
               for x, c in res.checkpoints]
    out = {"form": table.form.label, "k": k, "perm": list(perm), "mode": o["mode"],
           "mmax": o["mmax"], "count": res.count, "first": res.first, "checkpoints": density}
    if cfg.json:
        _emit(out)
    else:
        print(f"{res.count} hits up to {o['mmax']}; first m = {res.first}")
        for row in density:
            print(f"  x={row['x']}: {row['count']}")
    return EXIT_OK


def cmd_construct(cfg: RunConfig) -> int:
    o = cfg.options
    names = [s.strip() for s in o["forms"].split(",") if s.strip()]
    shifts = o["shifts"]
    if len(names) == 1 and len(shifts) > 1:
        names = names * len(shifts)
    if len(names) != len(shifts):
        raise UsageError("--forms and --shifts must have the same length")
    bound = o["table_bound"]
    cache: dict[str, CoefficientTable] = {}
    for nm in names:
        if nm not in cache:
            cache[nm] = _table(cfg, nm, bound)
    spec = TargetSpec(tuple(cache[nm] for nm in names), tuple(shifts), o["mode"])
    primes = choose_primes(spec)
    exps = choose_exponents(spec, primes, o["delta"])
    pspec = build_progression(spec, primes, exps, o["delta"])
    log.info("primes %s exponents %s A=%d B=%d", primes, exps, pspec.A, pspec.B)
    res = run_ordered_search(pspec, o["x"], o["eta"], o["eps"], cfg.workers)
    fac = Factorizer(seed=cfg.seed)
    hits = res.hits[: o["max_hits"]] if o["max_hits"] else res.hits
    bad = []
    for h in hits:
        if not verify_hit(h, spec, fac):
            bad.append(h["m"])
            h = dict(h, verified=False)
        _emit(h)
    summary = res.to_json()
    summary["reverified"] = len(hits) - len(bad)
    if o["summary"]:
        Path(o["summary"]).write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n")
    log.info("%d hits for n <= %d; counts %s", len(res.hits), o["x"], res.counts)
    if bad:
        log.error("re-verification failed for m in %s", bad)
        return EXIT_FAIL
    return EXIT_OK


def cmd_sieve_stats(cfg: RunConfig) -> int:
    o = cfg.options
    text = o["system"]
    path = Path(text)
    system = LinearSystem.parse(path.read_text() if path.is_file() else text)
    x = o["x"]
    if o["z"] is None and o["eta"] is None:
        raise UsageError("give --z or --eta")
    z = o["z"] if o["z"] is not None else max(2.0, x ** o["eta"])
    out = sift_omega(system, x, z, workers=cfg.workers)
    report = out.to_json()
    w_k, w_star = mertens_products(system, z)
    report.update(W_k=float(w_k), W_star=float(w_star),
                  square_bound=nonsquarefree_bound(system, x, z),
                  prime_bound=prime_value_bound(system, x, z))
    if o["refine"]:
        out = refine_omega1(out, workers=cfg.workers, seed=cfg.seed)
        report["counts"] = out.counts
        report["undecided"] = [int(n) for n in out.undecided]
        report["omega_star"] = [count_omega_star(system, x, z, i, cfg.workers)
                                for i in range(system.k)]
    if o["dump"]:
        with open(o["dump"], "w", encoding="utf-8") as fh:
            dump_survivors(out, fh)
    if cfg.json:
        _emit(report)
    else:
        for key in ("x", "z", "counts", "predicted", "ratio", "square_bound", "prime_bound"):
            print(f"{key}: {report[key]}")
    return EXIT_OK


def cmd_satotate(cfg: RunConfig) -> int:
    o = cfg.options
    table = _table(cfg, o["form"], o["xmax"])
    sample = angle_sample(table, o["xmax"])
    summary = {"form": table.form.label, "xmax": o["xmax"], "primes": len(sample),
               "ks": empirical_discrepancy(sample),
               "eps": o["eps"], "small_density": small_lambda_density(sample, o["eps"]),
               "small_prediction": small_lambda_prediction(o["eps"]),
               "zero_pm2_count": count_zero_or_extreme(table, o["xmax"])}
    rows = histogram(sample, o["bins"])
    if o["csv"]:
        fh = sys.stdout if o["csv"] == "-" else open(o["csv"], "w", newline="", encoding="utf-8")
        try:
            w = csv.DictWriter(fh, fieldnames=["lo", "hi", "count", "expected"])
            w.writeheader()
            w.writerows(rows)
        finally:
            if fh is not sys.stdout:
                fh.close()
        if o["csv"] == "-":
            log.info("summary %s", json.dumps(summary, sort_keys=True))
            return EXIT_OK
    _emit(summary)
    return EXIT_OK


def cmd_lehmer(cfg: RunConfig) -> int:
    o = cfg.options
    table = _table(cfg, o["form"], o["nmax"])
    zeros = [n for n, c in enumerate(table.coeffs[: o["nmax"]], start=1) if c == 0]
    if cfg.json:
        _emit({"form": table.form.label, "nmax": o["nmax"], "zeros": zeros})
    elif zeros:
        print(f"{len(zeros)} zeros found; first {zeros[:10]}")
    else:
        print(f"no zeros found for n <= {o['nmax']}")
    return EXIT_FAIL if zeros else EXIT_OK


def cmd_check_conditions(cfg: RunConfig) -> int:
    o = cfg.options
    table = _table(cfg, o["form"], max(o["bound"], o["k"]))
    res = check_order_conditions(table, o["k"], search_bound=o["bound"])
    out = dict(res.to_json(), form=table.form.label,
               cond2_status={True: "true", False: "false", None: "inconclusive"}[res.cond2])
    if cfg.json:
        _emit(out)
    else:
        for key in ("cond1", "cond_prime_powers", "cond2_status", "witness"):
            print(f"{key}: {out[key]}")
    if res.cond1 != res.cond_prime_powers or (res.cond2 is not None and res.cond2 != res.cond1):
        log.error("equivalence violated: %s", out)
        return EXIT_FAIL
    return EXIT_OK


COMMANDS = {
    "tau": cmd_tau, "expand": cmd_expand, "ingest": cmd_ingest, "scan": cmd_scan,
    "construct": cmd_construct, "sieve-stats": cmd_sieve_stats, "satotate": cmd_satotate,
    "lehmer": cmd_lehmer, "check-conditions": cmd_check_conditions,
}


def dispatch(cfg: RunConfig) -> int:
    """Run one subcommand and map library errors onto exit codes."""
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        log.error("usage: %s", exc)
        return EXIT_USAGE
    except (InvariantViolation, ChecksumError) as exc:
        witness = getattr(exc, "witness", ())
        log.error("verification failed: %s%s", exc, f" (witness {witness})" if witness else "")
        return EXIT_FAIL
    except (ParseError, InvalidSystemError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except HordError as exc:
        log.error("%s", exc)
        return EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2),
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(ns)
    except UsageError as exc:
        parser.error(str(exc))
    if cfg.command == "tau" and cfg.options["n"] < 1:
        parser.error("tau: n must be >= 1")
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
