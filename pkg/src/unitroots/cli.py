"""Command-line front end for the unit-root toolkit.

Each subcommand surfaces one route: exact point counts with their fiber
L-polynomials, a single fiber's p-adic unit root, the assembled Euler
product, the closed-form product, the symmetric-power operator, and a
combined verification gate.  Reports are deterministic JSON; a manifest
block records the package version, a hash of the input config, and every
truncation knob that shaped the result.  The process exits 0 exactly
when every certificate in the report passed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import metadata, resources

from .counting import (enumerate_closed_points, exp_sum, fiber_rational_l,
                       fiber_unit_root_exact, make_family)
from .fiber import fiber_unit_root_padic, verify_trace_formula
from .gf import gf_cache
from .padic import KappaExponent
from .pipeline import (StabilizationError, assemble_L_unit,
                       eigenvector_check, extract_unit_root_of_Lunit,
                       formula_eval, moments_from_series, three_way_compare)
from .sympower import (SymTrunc, beta_unit_root, convergence_check,
                       default_k_sequence, det_duality_check,
                       trace_identity_check)

_WORKERS = 4
_EXACT_FIELD_CAP = 2 * 10 ** 6
_SUM_FIELD_CAP = 10 ** 5


class ConfigError(ValueError):
    """Config rejection that names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


@dataclass
class FamilyConfig:
    """Parsed run description: the family plus every knob."""

    label: str
    family: object
    kappa: KappaExponent
    N: int
    d_max: int
    trunc: SymTrunc
    D_Y: int | None
    K: int
    options: dict
    raw: dict


_COEFF = re.compile(r"^(?:(-?\d+)|g(?:\^(\d+))?)$")


def _parse_coeff(txt, p: int, a: int, field: str):
    if not isinstance(txt, str):
        raise ConfigError(field, "coefficient must be a string such as "
                          "'2' or 'g^3'")
    m = _COEFF.match(txt.strip())
    if m is None:
        raise ConfigError(field, f"cannot parse coefficient {txt!r}")
    if m.group(1) is not None:
        return int(m.group(1)) % p
    k = int(m.group(2)) if m.group(2) is not None else 1
    return gf_cache(p, a).exp(k)


def _parse_kappa(val, p: int, field: str):
    if isinstance(val, bool):
        raise ConfigError(field, "expected an integer or a digit string")
    if isinstance(val, int):
        if val < 0:
            raise ConfigError(field, "must be nonnegative")
        return KappaExponent.from_int(p, val)
    if isinstance(val, str) and val.isdigit():
        digits = tuple(int(ch) for ch in val)
        if any(d >= p for d in digits):
            raise ConfigError(field, f"digit out of range for p={p}")
        return KappaExponent.from_digits(p, digits)
    raise ConfigError(field, "expected an integer or a base-p digit "
                      "string, lowest digit first")


def _pos_int(raw, key: str, default: int) -> int:
    val = raw.get(key, default)
    if not isinstance(val, int) or isinstance(val, bool) or val < 1:
        raise ConfigError(key, "must be a positive integer")
    return val


def _override(raw: dict, *names):
    for name in names:
        if name in raw:
            return raw[name]
    return None


def parse_config(raw: dict, label: str = "") -> FamilyConfig:
    """Validate a config dict and build the family it describes."""
    if not isinstance(raw, dict):
        raise ConfigError("$", "config must be a JSON object")
    p = _pos_int(raw, "p", 0) if "p" in raw else 0
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise ConfigError("p", "must be a prime")
    a = _pos_int(raw, "a", 1)
    s = _pos_int(raw, "s", 1)
    n = _pos_int(raw, "n", 1)
    terms_raw = raw.get("terms")
    if not isinstance(terms_raw, list) or not terms_raw:
        raise ConfigError("terms", "must be a nonempty list")
    terms = []
    for i, t in enumerate(terms_raw):
        at = f"terms[{i}]"
        if not isinstance(t, dict):
            raise ConfigError(at, "must be an object with coeff, r, u")
        r, u = t.get("r"), t.get("u")
        if not isinstance(r, list) or len(r) != s or \
                not all(isinstance(x, int) for x in r):
            raise ConfigError(f"{at}.r", f"expected {s} integer(s)")
        if not isinstance(u, list) or len(u) != n or \
                not all(isinstance(x, int) for x in u):
            raise ConfigError(f"{at}.u", f"expected {n} integer(s)")
        c = _parse_coeff(t.get("coeff"), p, a, f"{at}.coeff")
        terms.append((c, tuple(r), tuple(u)))
    label = raw.get("label", label) or "family"
    try:
        fam = make_family(p, a, terms, label)
    except ValueError as exc:
        raise ConfigError("terms", str(exc)) from exc
    kappa = _parse_kappa(raw.get("kappa", 1), p, "kappa")
    N = _pos_int(raw, "N", _pos_int(raw, "precision", 3)
                 if "precision" in raw else 3)
    d_max = _pos_int(raw, "d_max", 4)
    t_max = _pos_int(raw, "t_max", 3)
    d_x = _override(raw, "D_X", "D_x")
    d_lam = _override(raw, "D_lam", "D_lambda", "D_Λ")
    trunc = SymTrunc(t_max,
                     d_x if d_x is not None else 3,
                     d_lam if d_lam is not None else 3)
    if trunc.d_x < 1 or trunc.d_lam < 1:
        raise ConfigError("D_X", "truncation bounds must be positive")
    D_Y = _override(raw, "D_Y", "D_y")
    if D_Y is not None and (not isinstance(D_Y, int) or D_Y < 1):
        raise ConfigError("D_Y", "must be a positive integer")
    K = _pos_int(raw, "K", 3)
    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("options", "must be an object")
    return FamilyConfig(label, fam, kappa, N, d_max, trunc, D_Y, K,
                        options, raw)


def load_config(path: str) -> FamilyConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(path, str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_config(raw, stem)


# -- report plumbing ----------------------------------------------------------


def _version() -> str:
    try:
        return metadata.version("unitroots")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def _manifest(cfg: FamilyConfig, used: dict) -> dict:
    blob = json.dumps(cfg.raw, sort_keys=True,
                      separators=(",", ":")).encode("utf-8")
    kap = cfg.raw.get("kappa", 1)
    knobs = {"N": cfg.N, "d_max": cfg.d_max, "t_max": cfg.trunc.t_max,
             "D_X": cfg.trunc.d_x, "D_lam": cfg.trunc.d_lam, "K": cfg.K,
             "kappa": kap}
    knobs.update(used)
    return {"version": _version(),
            "config_sha256": hashlib.sha256(blob).hexdigest(),
            "knobs": knobs}


def _cyclo(c) -> list:
    return [int(x) for x in c.coords]


def _point_json(pt) -> dict:
    return {"degree": pt.degree, "logs": list(pt.logs),
            "coords": [list(co) for co in pt.coords]}


# -- subcommands --------------------------------------------------------------


def cmd_count(cfg: FamilyConfig):
    fam = cfg.family
    pts = enumerate_closed_points(fam.p, fam.a, fam.s, cfg.d_max)
    jobs = [pt for d in sorted(pts) for pt in pts[d]]

    q = fam.p ** fam.a

    def work(pt):
        try:
            L = fiber_rational_l(fam, pt, _EXACT_FIELD_CAP)
            return pt, L, None
        except (ValueError, ArithmeticError) as exc:
            sums = [exp_sum(fam, pt, m) for m in (1, 2)
                    if q ** (pt.degree * m) <= _SUM_FIELD_CAP]
            return pt, sums, str(exc)

    with ThreadPoolExecutor(max_workers=_WORKERS) as pool:
        done = list(pool.map(work, jobs))
    done.sort(key=lambda row: (row[0].degree, row[0].logs))
    fibers = []
    for pt, payload, err in done:
        entry = _point_json(pt)
        if err is None:
            entry["sums"] = [_cyclo(c) for c in payload.sums]
            entry["l_num"] = [_cyclo(c) for c in payload.num]
            entry["l_den"] = [_cyclo(c) for c in payload.den]
        else:
            entry["sums"] = [_cyclo(c) for c in payload]
            entry["l_unavailable"] = err
        fibers.append(entry)
    counts = {str(d): len(pts[d]) for d in sorted(pts)}
    return {"fibers": fibers, "closed_point_counts": counts}, True, {}


def _pick_point(cfg: FamilyConfig):
    fam = cfg.family
    opts = cfg.options.get("fiber", {})
    degree = opts.get("degree", 1)
    logs = tuple(opts.get("logs", [0] * fam.s))
    pts = enumerate_closed_points(fam.p, fam.a, fam.s, degree)
    for pt in pts.get(degree, ()):
        if pt.logs == logs:
            return pt
    raise ConfigError("options.fiber",
                      f"no degree-{degree} closed point with logs {list(logs)}")


def cmd_fiber(cfg: FamilyConfig):
    fam = cfg.family
    pt = _pick_point(cfg)
    target = (fam.p - 1) * cfg.N
    value, cert, op = fiber_unit_root_padic(fam, pt, cfg.N)
    trace_ords = verify_trace_formula(fam, pt, cfg.N)
    report = {"point": _point_json(pt),
              "unit_root": value.to_json(),
              "ratio_gaps": list(cert.gaps),
              "stable_prec": cert.stable_prec(),
              "trace_formula_ords": trace_ords}
    passed = cert.monotone() and all(o >= target for o in trace_ords)
    try:
        ex = fiber_unit_root_exact(fam, pt, cfg.N, _EXACT_FIELD_CAP)
    except ValueError:
        # exact route needs sums in a field beyond the cap; skip the check
        ex = None
    if ex is not None:
        agree = (value - ex.value).ord_pi()
        report["exact"] = {"l_num": [_cyclo(c) for c in ex.l.num],
                           "l_den": [_cyclo(c) for c in ex.l.den],
                           "location": ex.location,
                           "agreement_ord": agree}
        passed = passed and agree >= cert.stable_prec()
    return report, passed, {"fiber_D": op.D}


def cmd_lunit(cfg: FamilyConfig):
    series = assemble_L_unit(cfg.family, cfg.kappa, cfg.d_max, cfg.N)
    ex = extract_unit_root_of_Lunit(series)
    alt = moments_from_series(series)
    equiv = min([(x - y).ord_pi() for x, y in zip(alt, series.moments)]
                + [series.cert_prec])
    report = {"coefficients": [c.to_json() for c in series.coeffs],
              "moments": [m.to_json() for m in series.moments],
              "closed_point_counts": {str(d): series.counts[d]
                                      for d in sorted(series.counts)},
              "sweep_floors": {str(d): series.floors[d]
                               for d in sorted(series.floors)},
              "assembly_floor": series.cert_prec,
              "moment_route_agreement_ord": equiv,
              "extraction": {"unit_root": ex.value.to_json(),
                             "certified_prec": ex.certified_prec,
                             "e0": ex.evidence["e0"],
                             "ratio_gaps": ex.evidence["ratio_gaps"]}}
    passed = equiv >= series.cert_prec
    return report, passed, {}


def cmd_formula(cfg: FamilyConfig):
    res = formula_eval(cfg.family, cfg.kappa, cfg.N, degree=cfg.D_Y)
    report = {"unit_root": res.value.to_json(),
              "certified_prec": res.certified_prec,
              "trivial": res.evidence["trivial"],
              "orbit_length": res.evidence["orbit"]}
    used = {}
    if not res.evidence["trivial"]:
        report["degree_trail"] = [list(x) for x in res.evidence["degree_trail"]]
        used["D_Y_used"] = res.evidence["degree_used"]
    return report, True, used


def cmd_sympower(cfg: FamilyConfig):
    fam = cfg.family
    sr = beta_unit_root(fam, cfg.kappa, cfg.trunc, cfg.N)
    ks = default_k_sequence(fam.p, cfg.kappa, cfg.K)
    conv = convergence_check(fam, cfg.kappa, ks=ks, trunc=cfg.trunc, N=cfg.N)
    dual = det_duality_check(fam, cfg.kappa, ks=ks[:2], trunc=cfg.trunc,
                             N=cfg.N)
    report = {"unit_root": sr.value.to_json(),
              "floor": sr.floor,
              "second_fredholm_ord": sr.second_ord,
              "unique": sr.unique,
              "k_sequence": ks,
              "convergence": {"passed": conv.passed,
                              "det_ords": list(conv.det_ords),
                              "det_floor": conv.det_floor},
              "duality": {"passed": dual.passed,
                          "rows": [[lab, list(ords), fl]
                                   for lab, ords, fl in dual.rows]}}
    passed = sr.unique and conv.passed and dual.passed
    return report, passed, {"matrix_dim": sr.matrix.dim}


def cmd_verify(cfg: FamilyConfig):
    fam = cfg.family
    target = (fam.p - 1) * cfg.N
    checks = []

    tw = three_way_compare(fam, cfg.kappa, cfg.N, cfg.d_max, cfg.trunc)
    checks.append({"name": "three_way_agreement", "passed": tw.passed,
                   "min_prec": tw.min_prec,
                   "pair_ords": {f"{x}|{y}": o
                                 for (x, y), o in sorted(tw.pair_ords.items())},
                   "values": {r.route: r.value.to_json()
                              for r in tw.results.values()}})

    pts = enumerate_closed_points(fam.p, fam.a, fam.s, 1)[1]
    with ThreadPoolExecutor(max_workers=_WORKERS) as pool:
        rows = list(pool.map(
            lambda pt: (pt.logs, verify_trace_formula(fam, pt, cfg.N)), pts))
    rows.sort()
    checks.append({"name": "trace_formula_per_fiber",
                   "passed": all(o >= target for _, ords in rows
                                 for o in ords),
                   "fibers": [{"logs": list(lg), "ords": ords}
                              for lg, ords in rows]})

    ti = trace_identity_check(fam, cfg.kappa, 1, cfg.trunc, cfg.N)
    checks.append({"name": "trace_identity", "passed": ti.passed,
                   "diff_ord": ti.diff_ord, "floor": ti.floor})

    ks = default_k_sequence(fam.p, cfg.kappa, cfg.K)
    conv = convergence_check(fam, cfg.kappa, ks=ks, trunc=cfg.trunc, N=cfg.N)
    checks.append({"name": "convergence", "passed": conv.passed,
                   "det_ords": list(conv.det_ords),
                   "det_floor": conv.det_floor})

    dual = det_duality_check(fam, cfg.kappa, ks=ks[:2], trunc=cfg.trunc,
                             N=cfg.N)
    checks.append({"name": "determinant_duality", "passed": dual.passed})

    ev = eigenvector_check(fam, cfg.kappa, cfg.trunc, cfg.N)
    checks.append({"name": "eigenvector_identity", "passed": ev.passed,
                   "floor": ev.floor, "min_interior": ev.min_interior,
                   "components": len(ev.vec)})

    passed = all(c["passed"] for c in checks)
    return {"checks": checks, "passed": passed}, passed, {}


_COMMANDS = {
    "count": (cmd_count, "closed points, character sums, fiber L-polynomials"),
    "fiber": (cmd_fiber, "p-adic unit root of one fiber, with certificates"),
    "lunit": (cmd_lunit, "Euler product of powered unit roots and its root"),
    "formula": (cmd_formula, "closed-form product along the lifted "
                "coefficient orbit"),
    "sympower": (cmd_sympower, "symmetric-power operator root and its "
                 "certificates"),
    "verify": (cmd_verify, "all routes and invariant suites; exit 0 iff "
               "every check passes"),
}


# -- dispatch -----------------------------------------------------------------


def _apply_flags(cfg: FamilyConfig, args) -> FamilyConfig:
    raw = dict(cfg.raw)
    if args.precision is not None:
        raw["N"] = args.precision
    if args.dmax is not None:
        raw["d_max"] = args.dmax
    if args.tmax is not None:
        raw["t_max"] = args.tmax
    return parse_config(raw, cfg.label)


def _corpus_items():
    base = resources.files("unitroots").joinpath("corpus")
    for res in sorted(base.iterdir(), key=lambda r: r.name):
        if res.name.endswith(".json"):
            yield res.name, json.loads(res.read_text(encoding="utf-8"))


def _run_one(cmd: str, cfg: FamilyConfig):
    fn = _COMMANDS[cmd][0]
    report, passed, used = fn(cfg)
    return {"command": cmd, "family": cfg.label,
            "manifest": _manifest(cfg, used), "report": report,
            "passed": passed}, passed


def _run(args) -> tuple:
    if args.seed_corpus:
        outs, ok = [], True
        for name, raw in _corpus_items():
            cfg = _apply_flags(parse_config(raw, name.rsplit(".", 1)[0]),
                               args)
            out, passed = _run_one(args.command, cfg)
            out["config"] = name
            outs.append(out)
            ok = ok and passed
        return {"command": args.command, "corpus": outs, "passed": ok}, ok
    if not args.config:
        raise ConfigError("--config", "required unless --seed-corpus is set")
    cfg = _apply_flags(load_config(args.config), args)
    return _run_one(args.command, cfg)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="unitroots",
        description="p-adic unit roots of families of exponential sums")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, blurb) in _COMMANDS.items():
        sp = sub.add_parser(name, help=blurb)
        sp.add_argument("--config", metavar="PATH",
                        help="family config JSON")
        sp.add_argument("--precision", type=int, metavar="N",
                        help="pi-adic working precision in powers of p")
        sp.add_argument("--dmax", type=int, metavar="D",
                        help="closed-point degree bound")
        sp.add_argument("--tmax", type=int, metavar="T",
                        help="symmetric-power monomial degree bound")
        sp.add_argument("--json-out", metavar="PATH",
                        help="write the report here instead of stdout")
        sp.add_argument("--seed-corpus", action="store_true",
                        help="run every bundled corpus config")
    args = ap.parse_args(argv)
    try:
        out, passed = _run(args)
        code = 0 if passed else 1
    except ConfigError as exc:
        out = {"error": {"type": "config", "field": exc.field,
                         "message": exc.message}}
        code = 2
    except StabilizationError as exc:
        out = {"error": {"type": "insufficient stabilization",
                         "message": str(exc)}}
        code = 1
    except (ValueError, ArithmeticError) as exc:
        out = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        code = 1
    text = json.dumps(out, sort_keys=True, indent=2) + "\n"
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
