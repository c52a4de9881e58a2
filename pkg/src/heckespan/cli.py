"""Command-line entry point: ``heckespan <command> ...``.

Every report is a JSON object with a ``schema`` id and an ``input`` echo of
the arguments, serialized with sorted keys so repeated runs on the same cache
state are byte-identical. ``--format csv`` flattens the report's table.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

from . import bounds, detsum, span, stsums
from .arith import divisors
from .characters import DirichletCharacter, primitive_characters
from .config import RunConfig
from .errors import DataUnavailable, HeckeSpanError, UnsupportedInput
from .modforms.newforms import hecke_check
from .modforms.sources import CoefficientCache, DefaultCuspSource, get_orbits

log = logging.getLogger("heckespan")

SCHEMAS = {
    "bound": bounds.BOUND_SCHEMA,
    "span": span.SPAN_SCHEMA,
    "stsums": stsums.ST_SCHEMA,
    "phi": "heckespan.phi/1",
    "detsum": "heckespan.detsum/1",
    "checks": "heckespan.checks/1",
    "cache": "heckespan.cache/1",
}


class UsageError(UnsupportedInput):
    pass


# ---------------------------------------------------------------------------
# output

def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):  # numpy scalars
        return x.item()
    if isinstance(x, float) and x != x:
        return None
    return x


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


def render(report: dict, fmt: str) -> str:
    report = _jsonable(report)
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    rows = report.get("rows")
    base = {k: v for k, v in report.items() if k != "rows"}
    table = [_flatten({**_flatten(base), **_flatten(r)}) for r in rows] if rows else [_flatten(base)]
    cols = []
    for r in table:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(table)
    return buf.getvalue()


def _report(kind: str, args, body: dict) -> dict:
    echo = {k: v for k, v in vars(args).items() if k not in ("func", "format", "verbose") and v is not None}
    return {"schema": SCHEMAS[kind], "input": echo, **body}


# ---------------------------------------------------------------------------
# selectors

def parse_character(text: str) -> DirichletCharacter:
    """``q`` (first primitive character mod q) or a full label ``q.e1.e2...``."""
    parts = text.split(".")
    try:
        nums = [int(x) for x in parts]
    except ValueError:
        raise UsageError(f"bad character selector {text!r}") from None
    q = nums[0]
    if q < 1:
        raise UsageError("character modulus must be positive")
    if len(nums) == 1:
        prim = primitive_characters(q)
        if not prim or (q > 1 and prim[0].conductor == 1):
            raise UsageError(f"no primitive character of conductor {q}")
        return prim[0]
    return DirichletCharacter(q, tuple(nums[1:]))


def parse_form(text: str, src, ap_max: int | None = None):
    """``N.k.a`` (first orbit), ``N.k.a.x`` (orbit x) or ``N.k.a.x.j`` (embedding j, 1-based)."""
    parts = text.split(".")
    if len(parts) < 3 or parts[2] != "a":
        raise UsageError(f"bad newform label {text!r}; expected N.k.a[.x[.j]]")
    try:
        N, k = int(parts[0]), int(parts[1])
        emb = int(parts[4]) if len(parts) > 4 else 1
    except ValueError:
        raise UsageError(f"bad newform label {text!r}") from None
    recs = src.newforms(N, k, ap_max=ap_max)
    if not recs:
        raise DataUnavailable(N, k, "the new cusp space is zero")
    orbit = ".".join(parts[:4]) if len(parts) > 3 else recs[0].label
    hits = [r for r in recs if r.label == orbit and r.embedding_index == emb - 1]
    if not hits:
        raise UsageError(f"no newform {orbit} embedding {emb}; known: {sorted({r.label for r in recs})}")
    return hits[0]


def parse_phi(text: str, src, ap_max: int | None, ell: float) -> stsums.PhiSpec:
    """sym2:F, tensor:F,G, char:CHI, twist:F:CHI."""
    variant, _, rest = text.partition(":")
    if not rest:
        raise UsageError(f"bad --phi {text!r}; expected VARIANT:ARGS")
    if variant == "sym2":
        return stsums.sym2(parse_form(rest, src, ap_max), ell)
    if variant == "tensor":
        a, _, b = rest.partition(",")
        return stsums.tensor(parse_form(a, src, ap_max), parse_form(b, src, ap_max), ell)
    if variant == "char":
        return stsums.char(parse_character(rest), ell)
    if variant == "twist":
        f, _, c = rest.rpartition(":")
        if not f:
            raise UsageError("twist needs F:CHI")
        return stsums.twist(parse_form(f, src, ap_max), parse_character(c), ell)
    raise UsageError(f"unknown variant {variant!r}; expected one of {stsums.VARIANTS}")


def parse_detsum_spec(text: str, src) -> detsum.BlockMatrixSpec:
    """``eEsS:K.M``: the first E Eisenstein and first S cusp columns of the (K, M) block matrix."""
    head, _, tail = text.partition(":")
    try:
        assert head[0] == "e" and "s" in head
        e, s = (int(x) for x in head[1:].split("s"))
        k, M = (int(x) for x in tail.split("."))
    except (AssertionError, ValueError, IndexError):
        raise UsageError(f"bad --spec {text!r}; expected eEsS:K.M, e.g. e1s1:12.1") from None
    full = detsum.block_spec(k, M, src)
    if e > full.eps or s > full.s:
        raise UsageError(f"(k, M) = ({k}, {M}) has only {full.eps} Eisenstein and {full.s} cusp columns")
    return detsum.BlockMatrixSpec(full.eis[:e], full.cusp[:s], k, M)


# ---------------------------------------------------------------------------
# commands

def _weight_level(args):
    if args.weight < 4 or args.weight % 2:
        raise UsageError("weight must be even and at least 4")
    if args.level < 1:
        raise UsageError("level must be positive")


def cmd_bound(args, cfg):
    _weight_level(args)
    inp = bounds.BoundInput.for_level(args.weight, args.level)
    body = {"corollary_n": bounds.corollary_n(args.weight, args.level)}
    Ms = divisors(args.level) if args.per_divisor else [args.level]
    body["rows"] = [bounds.solve_X_M(bounds.BoundInput.for_level(args.weight, M)).to_dict() for M in Ms]
    for r in body["rows"]:
        r.pop("schema")
    body["alpha"] = bounds.alpha_const(inp.k, inp.M)
    return _report("bound", args, body)


def cmd_span(args, cfg):
    _weight_level(args)
    src = DefaultCuspSource(cfg.with_(offline=True) if args.offline else cfg)
    rep = span.minimal_hecke_bound(args.weight, args.level, args.max_n, src).to_dict()
    rep.pop("schema")
    return _report("span", args, rep)


def cmd_stsums(args, cfg):
    if args.xmax < stsums.ST_MIN_X:
        raise UsageError(f"--xmax must be at least {stsums.ST_MIN_X}")
    src = DefaultCuspSource(cfg)
    X = args.xmax
    if args.phi:
        phi = parse_phi(args.phi, src, int(X), args.ell)
        th, S, ps = stsums.theta_phi(phi, X), stsums.S_phi(phi, X), stsums.psi_phi(phi, X)
        body = {"phi": phi.label(), "degree": phi.degree, "bad_modulus": phi.bad_modulus(),
                "theta": th.value, "S": S.value, "psi": ps.value,
                "psi_minus_theta": ps.value - th.value,
                "prime_power_tail_bound": stsums.prime_power_tail(phi.ell, X),
                "abel_S_from_theta": stsums.abel_S_from_theta(phi, X)}
        if args.series:
            ps_ = stsums._good_primes(phi, X)
            body["rows"] = [{"p": p, "a_phi_p": stsums.phi_prime_coeff(phi, p)} for p in ps_]
        return _report("phi", args, body)
    if args.level < 1:
        raise UsageError("level must be positive")
    rep = stsums.check_effectiveST(args.level, args.weight, X, src).to_dict()
    rep.pop("schema")
    return _report("stsums", args, rep)


def cmd_detsum(args, cfg):
    src = DefaultCuspSource(cfg)
    spec = parse_detsum_spec(args.spec, src)
    res = detsum.det_square_sum(spec, args.xmax, distinct_only=args.distinct_only)
    body = {"eps": spec.eps, "s": spec.s, "m": spec.m, "k": spec.k, "M": spec.M, "rational": spec.rational,
            "columns": [f"E({e.psi.label()},{e.phi.label()})" for e in spec.eis] + [r.full_label for r in spec.cusp],
            **res.to_dict(), "positive": res.value > 0}
    if args.cross_check and spec.rational:
        body["cross_check"] = {
            "ordered": str(detsum.det_square_sum_ordered(spec, args.xmax)),
            "gram": str(detsum.gram_route(spec, args.xmax)),
        }
        if spec.m <= 3:
            body["cross_check"]["pair_expansion"] = str(detsum.pair_expansion_sum(spec, args.xmax))
        body["cross_check"]["agree"] = len(set(body["cross_check"].values()) | {str(res.exact)}) == 1
    if args.envelope:
        inp = bounds.BoundInput(spec.k, spec.M, spec.s, spec.eps)
        sums = bounds.measured_sums(spec.M, spec.k, args.xmax, src)
        env = bounds.prop_determinant_envelope(args.xmax, inp, sums)
        body["envelope"] = {**env.to_dict(), "sums": sums,
                            "note": "evaluated at desk-scale X; outside the preconditions unless flagged"}
    if args.benchmark:
        body["benchmark"] = detsum.benchmark(spec, args.xmax)
    return _report("detsum", args, body)


def _check_aux():
    rep = bounds.auxbounds_check([17.5, 100, 1000, 10**4, 10**5], range(0, 5), [2, 6, 30])
    sweeps = {
        "pi_upper": bounds.pi_upper_sweep(10**6),
        "theta_upper": bounds.theta_upper_sweep(10**6),
        "deviation": bounds.deviation_sweep([2, 6, 30], 4, 10**5),
    }
    rows = [{"name": c.name, **{f"param.{k}": v for k, v in c.params.items()}, "lhs": c.lhs, "rhs": c.rhs,
             "ok": c.ok, "skipped": c.skipped} for c in rep.checks]
    ok = rep.ok and all(s["ok"] for s in sweeps.values())
    return {"ok": ok, "failures": len(rep.failures()), "sweeps": sweeps, "rows": rows}


def _check_combinatorial():
    cases = detsum.combinatorial_estimate_check()
    pairs = detsum.compare_eq_pairs(6)
    rs = {str(l): sum(detsum.rencontres(l, g) for g in range(l + 1)) for l in range(11)}
    violations = [c for c in cases if c.ok is False]
    return {
        "rencontres_row_sums": rs,
        "pair_count_discrepancies": [{"d": p.d, "ell": p.ell, "gamma_brute_formula": p.discrepancies()}
                                     for p in pairs if not p.agree],
        "pair_counts_match_inclusion_exclusion": all(
            p.brute == [detsum.corrected_eq_pairs(p.d, p.ell, g) for g in range(p.ell + 1)] for p in pairs),
        "violations": {e: sum(1 for c in violations if c.estimate == e)
                       for e in ("first-literal", "first-inferred", "second")},
        "rows": [{"estimate": c.estimate, **{f"param.{k}": v for k, v in c.params.items()}, "lhs": c.lhs,
                  "rhs": c.rhs, "ok": c.ok, "skipped": c.skipped} for c in cases],
    }


def _check_digamma(n=200, seed=1):
    sw = bounds.digamma_sweep(n, seed)
    return {"ok": all(not v["failures"] for v in sw.values()), "seed": seed,
            "rows": [{"variant": k, "samples": v["samples"], "failures": len(v["failures"]),
                      "worst_ratio": v["worst_ratio"]} for k, v in sw.items()]}


def cmd_checks(args, cfg):
    suite = {"aux": _check_aux, "combinatorial": _check_combinatorial, "digamma": _check_digamma}[args.suite]
    return _report("checks", args, suite())


def cmd_cache(args, cfg):
    cache = CoefficientCache(cfg.cache_dir)
    if args.action == "list":
        rows = []
        for N, k in cache.entries():
            got = cache.read(N, k)
            n = 0 if got is None else sum(len(o.records) for o in got[0])
            rows.append({"level": N, "weight": k, "records": n})
        return _report("cache", args, {"cache_dir": str(cfg.cache_dir), "rows": rows})
    if args.action == "fetch":
        if args.level is None or args.weight is None:
            raise UsageError("cache fetch needs --level and --weight")
        orbits = get_orbits(args.level, args.weight, cfg, refresh=args.refresh)
        recs = [r for o in orbits for r in o.records]
        return _report("cache", args, {"cached": len(recs), "rows": [
            {"label": r.full_label, "orbit_dim": r.orbit_dim, "source": r.source, "primes": len(r.ap)} for r in recs]})
    # verify
    rows = []
    for N, k in cache.entries():
        if args.level is not None and N != args.level or args.weight is not None and k != args.weight:
            continue
        got = cache.read(N, k)
        if got is None:
            rows.append({"level": N, "weight": k, "ok": False, "detail": "unreadable"})
            continue
        orbits, rep = got
        for line in rep.corrupted:
            rows.append({"level": N, "weight": k, "ok": False, "detail": f"corrupted line {line} quarantined"})
        for o in orbits:
            for r in o.records:
                h = hecke_check(r)
                rows.append({"level": N, "weight": k, "label": r.full_label, "ok": h.ok,
                             "detail": "; ".join(h.violations[:3])})
    return _report("cache", args, {"ok": all(r["ok"] for r in rows), "rows": rows})


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    # global options are accepted before or after the command name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS, help="report format (default json)")
    common.add_argument("--cache-dir", default=argparse.SUPPRESS)
    common.add_argument("--fixtures", default=argparse.SUPPRESS)
    common.add_argument("--db-url", default=argparse.SUPPRESS)
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS, help="bits, at least 64")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="heckespan", parents=[common],
                                description="Hecke-span bounds, prime sums and determinant checks.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[common], help="threshold X_M and the corollary n")
    b.add_argument("--weight", type=int, required=True)
    b.add_argument("--level", type=int, required=True)
    b.add_argument("--per-divisor", action="store_true")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("span", parents=[common], help="minimal n with T_1..T_n spanning the Hecke algebra")
    s.add_argument("--weight", type=int, required=True)
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--max-n", type=int, required=True)
    s.add_argument("--offline", action="store_true")
    s.set_defaults(func=cmd_span)

    t = sub.add_parser("stsums", parents=[common], help="effective Sato-Tate sums F, G, H or a single phi")
    t.add_argument("--level", type=int, default=1)
    t.add_argument("--weight", type=int, default=12)
    t.add_argument("--xmax", type=float, required=True)
    t.add_argument("--phi", default=None, help="sym2:N.k.a[.x[.j]] | tensor:F,G | char:q[.e..] | twist:F:CHI")
    t.add_argument("--ell", type=float, default=0.0)
    t.add_argument("--series", action="store_true", help="dump a_phi(p) for every good p <= xmax")
    t.set_defaults(func=cmd_stsums)

    d = sub.add_parser("detsum", parents=[common], help="sum of |det(E|S)|^2 over prime tuples")
    d.add_argument("--spec", required=True, help="eEsS:K.M, e.g. e1s1:12.1")
    d.add_argument("--xmax", type=float, required=True)
    d.add_argument("--distinct-only", action="store_true")
    d.add_argument("--cross-check", action="store_true")
    d.add_argument("--envelope", action="store_true")
    d.add_argument("--benchmark", action="store_true")
    d.set_defaults(func=cmd_detsum)

    c = sub.add_parser("checks", parents=[common], help="catalogued inequality checks")
    c.add_argument("--suite", choices=("aux", "combinatorial", "digamma"), required=True)
    c.set_defaults(func=cmd_checks)

    k = sub.add_parser("cache", parents=[common], help="coefficient cache")
    k.add_argument("action", choices=("fetch", "verify", "list"))
    k.add_argument("--level", type=int, default=None)
    k.add_argument("--weight", type=int, default=None)
    k.add_argument("--refresh", action="store_true")
    k.set_defaults(func=cmd_cache)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    for name in ("format", "cache_dir", "fixtures", "db_url", "precision", "workers", "verbose"):
        if not hasattr(args, name):
            setattr(args, name, None)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.from_env(cache_dir=args.cache_dir, fixtures_dir=args.fixtures, db_url=args.db_url,
                                 precision_bits=args.precision, workers=args.workers, output_format=args.format)
        if args.db_url:
            cfg = cfg.with_(offline=False)
        report = args.func(args, cfg)
    except HeckeSpanError as e:
        print(f"heckespan: error: {e}", file=sys.stderr)
        return e.exit_code
    sys.stdout.write(render(report, cfg.output_format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
