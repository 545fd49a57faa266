"""Command line front end: JSON problem files in, JSON result envelopes out.

Subcommands ``sml``, ``orbit``, ``linearize``, ``newton`` and ``jordan`` read a
problem file (``-`` for stdin), validate it against a JSON schema and print a
result envelope.  ``explain`` renders an envelope as a text report; every
subcommand also accepts ``--explain`` to print the report directly.

Exit codes: 0 success, 1 invalid input or internal error, 2 when no prime or
no strategy produced a decomposition.  Timing goes to stderr so that stdout
is byte-identical across runs.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from fractions import Fraction

import jsonschema

from . import __version__
from .decomposition import CERTIFICATES
from .errors import AllStrategiesFailed, NoPrimeFound, NonUnitEigenvalue, PadicError, ParseError
from .padic import is_prime

TOOL = "padicdml"
KINDS = ("sml", "orbit", "linearize", "newton", "jordan")

# -- schemas --------------------------------------------------------------------

_RATIONAL = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$"},
    ]
}
_POLY = {"type": "string", "minLength": 1}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _RATIONAL}}
_PRIME = {"type": "integer", "minimum": 2}
_OPTIONS = {
    "type": "object",
    "properties": {
        "precision": {"type": "integer", "minimum": 8, "maximum": 4096},
        "degree": {"type": "integer", "minimum": 1, "maximum": 200},
        "seeds": {"oneOf": [{"type": "integer"}, {"type": "array", "items": {"type": "integer"}}]},
        "n_max": {"type": "integer", "minimum": 1, "maximum": 10**6},
    },
}
_COMMON = {"version": {"type": "string"}, "options": _OPTIONS}

_PAYLOADS = {
    "sml": {
        "required": ["type", "matrix", "point", "variety"],
        "properties": {
            "type": {"enum": ["linear", "torus"]},
            "matrix": _MATRIX,
            "point": {"type": "array", "minItems": 1, "items": _RATIONAL},
            "variety": {"type": "array", "items": _POLY},
            "prime": _PRIME,
            "nmax": {"type": "integer", "minimum": 1, "maximum": 10**6},
        },
    },
    "orbit": {
        "required": ["maps", "point", "variety"],
        "properties": {
            "p": _PRIME,
            "maps": {"type": "array", "minItems": 1, "items": _POLY},
            "point": {"type": "array", "minItems": 1, "items": _RATIONAL},
            "variety": {"type": "array", "items": _POLY},
            "strategy": {"enum": ["auto", "attracting", "indifferent", "brute-force"]},
            "bounds": {
                "type": "object",
                "properties": {
                    k: {"type": "integer", "minimum": 1}
                    for k in ("M_max", "K_burn_in", "D", "N", "E_max", "n_max", "P_max")
                },
            },
        },
    },
    "linearize": {
        "required": ["p", "map", "regime", "degree"],
        "properties": {
            "p": _PRIME,
            "map": {"type": "array", "minItems": 1, "items": _POLY},
            "regime": {"enum": ["attracting", "indifferent", "auto"]},
            "degree": {"type": "integer", "minimum": 1, "maximum": 60},
            "precision": {"type": "integer", "minimum": 8, "maximum": 4096},
            "E_max": {"type": "integer", "minimum": 2},
            "threshold": {"type": "integer", "minimum": 0},
        },
    },
    "newton": {
        "required": ["p"],
        "oneOf": [{"required": ["polynomial"]}, {"required": ["coefficients"]}],
        "properties": {
            "p": _PRIME,
            "polynomial": _POLY,
            "coefficients": {"type": "array", "minItems": 1, "items": _RATIONAL},
            "precision": {"type": "integer", "minimum": 8, "maximum": 4096},
        },
    },
    "jordan": {
        "required": ["p", "matrix"],
        "properties": {
            "p": _PRIME,
            "matrix": _MATRIX,
            "precision": {"type": "integer", "minimum": 8, "maximum": 4096},
            "k_max": {"type": "integer", "minimum": 1, "maximum": 200},
        },
    },
}

_DECOMPOSITION = {
    "type": "object",
    "required": ["progressions", "exceptional", "certificate", "prime", "parameters", "diagnostics"],
    "properties": {
        "progressions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["start", "modulus"],
                "properties": {"start": {"type": "integer", "minimum": 0}, "modulus": {"type": "integer", "minimum": 1}},
                "additionalProperties": False,
            },
        },
        "exceptional": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "certificate": {"enum": list(CERTIFICATES)},
        "prime": {"type": ["integer", "null"]},
        "parameters": {"type": "object"},
        "diagnostics": {"type": "object"},
    },
    "additionalProperties": False,
}

ENVELOPE_SCHEMA = {
    "type": "object",
    "required": ["tool", "version", "command", "input_sha256", "certificate", "result"],
    "properties": {
        "tool": {"const": TOOL},
        "version": {"type": "string"},
        "command": {"enum": list(KINDS)},
        "input_sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "certificate": {"enum": list(CERTIFICATES)},
        "result": {"type": "object"},
        "timing": {"type": "object"},
    },
    "allOf": [
        {
            "if": {"properties": {"command": {"enum": ["sml", "orbit"]}}},
            "then": {"properties": {"result": _DECOMPOSITION}},
        }
    ],
    "additionalProperties": False,
}


def input_schema(kind: str, strict: bool = True) -> dict:
    """JSON schema of a problem file; strict mode rejects unknown fields."""
    body = _PAYLOADS[kind]
    schema = {"type": "object", **body, "properties": {**_COMMON, **body["properties"]}}
    if strict:
        schema["additionalProperties"] = False
        opts = dict(_OPTIONS, additionalProperties=False)
        schema["properties"]["options"] = opts
        if kind == "orbit":
            schema["properties"]["bounds"] = dict(schema["properties"]["bounds"], additionalProperties=False)
    return schema


# -- errors ---------------------------------------------------------------------

class InputError(Exception):
    """Invalid problem file; ``pointer`` is a JSON pointer to the offending value."""

    def __init__(self, message: str, pointer: str = "", kind: str = "input"):
        super().__init__(message)
        self.pointer = pointer
        self.kind = kind


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _pointer(path) -> str:
    return "".join("/" + str(part).replace("~", "~0").replace("/", "~1") for part in path)


def validate(kind: str, data, strict: bool = True) -> None:
    """Raise InputError for the first schema violation (deepest, then leftmost)."""
    validator = jsonschema.Draft202012Validator(input_schema(kind, strict))
    errors = sorted(validator.iter_errors(data), key=lambda e: (-len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        best = jsonschema.exceptions.best_match(errors) if len(errors) > 1 else errors[0]
        raise InputError(best.message, _pointer(best.absolute_path), "schema")


# -- problem construction ---------------------------------------------------------

def _rational(x, ptr: str) -> Fraction:
    from .poly import parse_rational

    try:
        return parse_rational(x)
    except ParseError as exc:
        raise InputError(str(exc), ptr, "parse") from None


def _rationals(xs, ptr: str) -> list:
    return [_rational(x, f"{ptr}/{i}") for i, x in enumerate(xs)]


def _square(M, g: int, ptr: str) -> None:
    if len(M) != g:
        raise InputError(f"matrix has {len(M)} rows, expected {g}", ptr)
    for i, row in enumerate(M):
        if len(row) != g:
            raise InputError(f"row has {len(row)} entries, expected {g}", f"{ptr}/{i}")


def _variety(texts, g: int, ptr: str) -> list:
    from .poly import parse_poly

    out = []
    for i, s in enumerate(texts):
        try:
            out.append(parse_poly(s, nvars=g, allow_t=False))
        except ParseError as exc:
            raise InputError(str(exc), f"{ptr}/{i}", "parse") from None
    return out


def _check_prime(p, ptr: str) -> None:
    if p is not None and not is_prime(p):
        raise InputError(f"{p} is not prime", ptr)


def _options(data, args) -> dict:
    """Effective global options: file values overridden by command line flags."""
    opts = dict(data.get("options", {}))
    for key, flag in (("precision", args.precision), ("degree", args.degree), ("n_max", args.nmax)):
        if flag is not None:
            opts[key] = flag
    return opts


# -- subcommands ------------------------------------------------------------------

def _run_sml(data, opts, args):
    from .problems import LinearOrbitProblem, TorusOrbitProblem
    from .sml import DEFAULT_D, DEFAULT_N, FALLBACK_WINDOW, solve_linear, solve_torus

    point = _rationals(data["point"], "/point")
    g = len(point)
    _square(data["matrix"], g, "/matrix")
    V = _variety(data["variety"], g, "/variety")
    prime = args.prime if args.prime is not None else data.get("prime")
    _check_prime(prime, "/prime")
    N = opts.get("precision", DEFAULT_N)
    D = opts.get("degree", DEFAULT_D)
    if data["type"] == "linear":
        L = [_rationals(row, f"/matrix/{i}") for i, row in enumerate(data["matrix"])]
        problem = LinearOrbitProblem.make(L, point, V, prime)
        window = args.nmax or data.get("nmax") or opts.get("n_max") or FALLBACK_WINDOW
        res = solve_linear(problem, N=N, D=D, fallback_window=window)
    else:
        for i, row in enumerate(data["matrix"]):
            for j, x in enumerate(row):
                if not isinstance(x, int):
                    raise InputError("monomial exponents must be integers", f"/matrix/{i}/{j}")
        for i, a in enumerate(point):
            if a == 0:
                raise InputError("torus points need nonzero coordinates", f"/point/{i}")
        problem = TorusOrbitProblem.make(data["matrix"], point, V, prime)
        window = args.nmax or data.get("nmax") or opts.get("n_max") or 2000
        res = solve_torus(problem, N=N, D=D, fallback_window=window)
    return res.to_json(), res.certificate


def _run_orbit(data, opts, args):
    from .orbit import solve
    from .poly import parse_map
    from .problems import Bounds, OrbitProblem

    point = _rationals(data["point"], "/point")
    g = len(point)
    if len(data["maps"]) != g:
        raise InputError(f"{len(data['maps'])} maps for a point with {g} coordinates", "/maps")
    maps = []
    for i, s in enumerate(data["maps"]):
        try:
            maps.append(parse_map([s])[0])
        except ParseError as exc:
            raise InputError(str(exc), f"/maps/{i}", "parse") from None
    V = _variety(data["variety"], g, "/variety")
    prime = args.prime if args.prime is not None else data.get("p")
    _check_prime(prime, "/p")
    b = dict(data.get("bounds", {}))
    for key, name in (("precision", "N"), ("degree", "D"), ("n_max", "n_max")):
        if key in opts and name not in b:
            b[name] = opts[key]
    if args.precision is not None:
        b["N"] = args.precision
    if args.degree is not None:
        b["D"] = args.degree
    if args.nmax is not None:
        b["n_max"] = args.nmax
    strategy = args.strategy or data.get("strategy", "auto")
    problem = OrbitProblem.make(maps, point, V, strategy, prime, Bounds(**b))
    res = solve(problem)
    return res.to_json(), res.certificate


def _run_linearize(data, opts, args):
    from .errors import NotHomothety, UnsupportedRegime
    from .linearize import LocalMap, linearize_attracting, linearize_indifferent, verify_conjugacy
    from .poly import parse_poly

    p = args.prime if args.prime is not None else data["p"]
    _check_prime(p, "/p")
    g = len(data["map"])
    D = args.degree if args.degree is not None else data["degree"]
    N = args.precision if args.precision is not None else data.get("precision", opts.get("precision", 64))
    comps = []
    for i, s in enumerate(data["map"]):
        try:
            P = parse_poly(s, nvars=g, allow_t=False)
        except ParseError as exc:
            raise InputError(str(exc), f"/map/{i}", "parse") from None
        if any(d % p == 0 for d in P.denominators()):
            raise InputError(f"coefficient denominators are divisible by {p}", f"/map/{i}")
        comps.append(P.to_multiseries(p, N))
    try:
        m = LocalMap.from_series(comps)
    except ValueError as exc:
        raise InputError(str(exc), "/map") from None
    regime = data["regime"]
    small = None
    if regime == "auto":
        try:
            conj = linearize_attracting(m, D)
        except (NotHomothety, UnsupportedRegime):
            conj, small = linearize_indifferent(m, data.get("E_max", 10), D)
    elif regime == "attracting":
        conj = linearize_attracting(m, D)
    else:
        conj, small = linearize_indifferent(m, data.get("E_max", 10), D)
    report = verify_conjugacy(m, conj, D, data.get("threshold"))
    out = {"conjugacy": conj.to_json(), "residual": report.to_json()}
    if small is not None:
        out["small_divisors"] = small.to_json()
    return out, conj.certificate


def _run_newton(data, opts, args):
    from .newton import IdenticallyZeroToPrec, polygon, strassman
    from .poly import Poly, parse_poly
    from .series import PadicSeries

    p = args.prime if args.prime is not None else data["p"]
    _check_prime(p, "/p")
    N = args.precision if args.precision is not None else data.get("precision", opts.get("precision", 64))
    if "polynomial" in data:
        try:
            P = parse_poly(data["polynomial"], nvars=1)
        except ParseError as exc:
            raise InputError(str(exc), "/polynomial", "parse") from None
        ptr = "/polynomial"
    else:
        cs = _rationals(data["coefficients"], "/coefficients")
        P = Poly(1, {(i,): c for i, c in enumerate(cs) if c})
        ptr = "/coefficients"
    if any(d % p == 0 for d in P.denominators()):
        raise InputError(f"coefficient denominators are divisible by {p}", ptr)
    if P.is_zero():
        raise InputError("the zero polynomial has no Newton polygon", ptr)
    f: PadicSeries = P.to_series(p, N)
    out = polygon(f).to_json()
    s = strassman(f)
    out["strassman_T"] = None if isinstance(s, IdenticallyZeroToPrec) else s.T
    return out, "rigorous"


def _run_jordan(data, opts, args):
    from .jordan import JordanForm, choose_d
    from .linalg import identity_p, jordan_over_Qp, matmul_p

    p = args.prime if args.prime is not None else data["p"]
    _check_prime(p, "/p")
    g = len(data["matrix"])
    _square(data["matrix"], g, "/matrix")
    L = [_rationals(row, f"/matrix/{i}") for i, row in enumerate(data["matrix"])]
    if any(x.denominator % p == 0 for row in L for x in row):
        raise InputError(f"matrix entries must be {p}-integral", "/matrix")
    N = args.precision if args.precision is not None else data.get("precision", opts.get("precision", 64))
    k_max = data.get("k_max", 20)
    jd = jordan_over_Qp(L, p, N)
    J = JordanForm.from_data(jd)
    out = {
        "p": p,
        "precision": N,
        "blocks": [
            {"eigenvalue": lam.to_json(), "rational": None if q is None else _fmt(q), "size": m}
            for lam, m, q in jd.blocks
        ],
    }
    try:
        d = choose_d(J)
    except NonUnitEigenvalue as exc:
        out.update(d=None, consistency=None, note=str(exc))
        return out, "rigorous"
    # (J^d)^k against J^(dk), entry by entry
    Jd = J.power(d)
    acc = identity_p(J.size, p, N)
    holds = True
    for k in range(1, k_max + 1):
        acc = matmul_p(acc, Jd)
        direct = J.power(d * k)
        if not all(a.agrees_with(b) for ra, rb in zip(acc, direct) for a, b in zip(ra, rb)):
            holds = False
            break
    out.update(d=d, consistency={"k_max": k_max, "holds": holds})
    return out, "rigorous"


_RUNNERS = {
    "sml": _run_sml,
    "orbit": _run_orbit,
    "linearize": _run_linearize,
    "newton": _run_newton,
    "jordan": _run_jordan,
}


# -- serialisation ----------------------------------------------------------------

def _fmt(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _plain(x):
    """JSON-ready copy: string keys, rationals as strings, tuples and sets as lists."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return [_plain(v) for v in sorted(x, key=repr)]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return _fmt(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return str(x)


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def input_hash(kind: str, data: dict, opts: dict, args) -> str:
    """sha256 of the canonical problem, the effective options and the overriding flags."""
    flags = {"prime": args.prime, "strategy": getattr(args, "strategy", None)}
    blob = json.dumps({"kind": kind, "input": data, "options": opts, "flags": flags}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _read(source: str, stdin) -> str:
    if source == "-":
        return stdin.read()
    try:
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror}", "", "io") from None


def _load(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", "", "json") from None


# -- explain ----------------------------------------------------------------------

_PATHWAYS = {
    "attracting": "attracting cycle: the orbit enters the basin of a periodic point whose multiplier is "
    "p times a unit, and each residue class is parametrised through the linearizing homothety chart",
    "indifferent": "indifferent cycle: unit multipliers, residue classes parametrised through exponentials "
    "of the multiplier logarithms",
    "preperiodic": "preperiodic orbit: the return set is read off one full cycle with exact arithmetic",
    "linear": "linear map: the orbit is interpolated by p-adic analytic functions on residue classes",
    "torus": "monomial map: the orbit is interpolated through p-adic logarithms of the coordinates",
}


def _pathway(env: dict) -> str:
    res = env["result"]
    if res["certificate"] == "brute-force-only":
        return "brute force only"
    strategy = res["parameters"].get("strategy")
    if strategy in _PATHWAYS:
        return _PATHWAYS[strategy]
    if strategy == "finite-orbit":
        return "finite orbit: every coordinate is a root of unity and the cycle is followed exactly"
    return "direct decomposition"


def _classes(res: dict) -> list:
    params = res["parameters"]
    M = params.get("M")
    N0 = params.get("N0", 0) or 0
    lines = []
    progs = [(q["start"], q["modulus"]) for q in res["progressions"]]
    if not M:
        return lines
    full = [s for s, m in progs if M % m == 0]
    zero_classes = sum(M // m for s, m in progs if M % m == 0)
    lines.append(f"residue classes: {M} modulo M = {M}, counted from N0 = {N0}")
    lines.append(f"  identically returning classes: {zero_classes}")
    lines.append(f"  classes with finitely many returns: {M - zero_classes}")
    if len(full) != len(progs):
        lines.append("  (some progressions do not divide M; see the progression list)")
    return lines


def explain(env: dict) -> str:
    """Human-readable report of a result envelope."""
    cmd = env["command"]
    res = env["result"]
    out = [f"{TOOL} {env['version']}  command: {cmd}  certificate: {env['certificate']}"]
    if cmd in ("sml", "orbit"):
        params = res["parameters"]
        out.append(f"pathway: {_pathway(env)}")
        if res["prime"] is not None:
            out.append(f"prime p = {res['prime']}")
        for key, label in (("M", "M"), ("d", "d"), ("N0", "N0"), ("N", "precision N"), ("D", "degree D")):
            if key in params:
                out.append(f"{label} = {params[key]}")
        out.extend(_classes(res))
        if res["progressions"]:
            out.append("infinite part:")
            for q in res["progressions"]:
                out.append(f"  n = {q['start']} mod {q['modulus']}, n >= {q['start']}")
        else:
            out.append("infinite part: none (the return set is finite)")
        exc = res["exceptional"]
        shown = ", ".join(map(str, exc[:20])) + (" ..." if len(exc) > 20 else "")
        out.append(f"exceptional indices: {shown if exc else 'none'}")
        out.extend(_caveats(env))
    elif cmd == "linearize":
        c = res["conjugacy"]
        out.append(f"regime: {c['regime']}  certificate: {c['certificate']}")
        r = c["radius"]
        out.append(f"radius: {r['p']}^({r['exponent']})" if r["exponent"] != "inf" else "radius: whole space (linear germ)")
        rep = res["residual"]
        out.append(f"residual through degree {rep['degree']}: valuation >= {rep['min_valuation']}, passes: {rep['passes']}")
        if c["certificate"] == "heuristic":
            out.append("caveat: the radius is an estimate; no effective lower bound on the small divisors is certified")
    elif cmd == "newton":
        for s in res["segments"]:
            out.append(f"segment: slope {s['slope']}, length {s['length']}")
        out.append(f"Strassman bound on the closed unit disk: {res['strassman_T']}")
    elif cmd == "jordan":
        for b in res["blocks"]:
            lam = b["rational"] if b["rational"] is not None else f"p-adic {b['eigenvalue']}"
            out.append(f"block: eigenvalue {lam}, size {b['size']}")
        out.append(f"d = {res['d']}")
        if res.get("consistency"):
            c = res["consistency"]
            out.append(f"(J^d)^k = J^(dk) for k <= {c['k_max']}: {c['holds']}")
    return "\n".join(out) + "\n"


def _caveats(env: dict) -> list:
    res = env["result"]
    diag = res["diagnostics"]
    cert = res["certificate"]
    out = []
    if cert == "brute-force-only":
        W = res["parameters"].get("n_max")
        out.append(f"caveat: verified only on the window [0, {W}); nothing is claimed beyond it")
        return out
    if res["parameters"].get("strategy") == "indifferent":
        out.append(
            "caveat: indifferent chart radius is estimated; certifying it needs an effective lower bound "
            "for linear forms in p-adic logarithms, which is not computed"
        )
    if cert == "heuristic":
        for key in ("unresolved", "modular_members", "identically_zero"):
            if key in diag:
                out.append(f"caveat ({key}): {diag[key]}")
        if not out:
            out.append("caveat: heuristic certificate")
    if "integer_zero_search" in diag:
        out.append(f"note: {diag['integer_zero_search']}")
    if "cross_check_window" in diag:
        out.append(f"cross-checked against exact iteration on [0, {diag['cross_check_window']})")
    return out


# -- entry points -----------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog=TOOL, description="Return sets of orbits in varieties via p-adic interpolation.")
    ap.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"{kind} problem file (JSON)")
        sp.add_argument("input", help="problem file, or - for stdin")
        sp.add_argument("--precision", type=int, help="working p-adic precision N (digits)")
        sp.add_argument("--degree", type=int, help="series truncation degree D")
        sp.add_argument("--nmax", type=int, help="brute-force window")
        sp.add_argument("--prime", type=int, help="prime to use (overrides the file)")
        sp.add_argument("--strategy", choices=["auto", "attracting", "indifferent", "brute-force"])
        sp.add_argument("--lenient", action="store_true", help="ignore unknown fields")
        sp.add_argument("--explain", action="store_true", help="print a text report instead of JSON")
        sp.add_argument("--timing", action="store_true", help="include wall time in the envelope")
    ex = sub.add_parser("explain", help="render a result envelope as text")
    ex.add_argument("input", help="envelope file, or - for stdin")
    return ap


def _error(stdout, stderr, code: int, kind: str, message: str, pointer: str | None = None, extra=None) -> int:
    err = {"kind": kind, "message": message}
    if pointer is not None:
        err["pointer"] = pointer
    if extra:
        err["diagnostics"] = extra
    stdout.write(dumps({"error": err, "exit_code": code}))
    where = f" at {pointer}" if pointer else ""
    stderr.write(f"{TOOL}: {kind} error{where}: {message}\n")
    return code


def run(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    """Run one invocation; returns the exit code."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = _parser().parse_args(argv)
    except _UsageError as exc:
        return _error(stdout, stderr, 1, "usage", str(exc))
    try:
        data = _load(_read(args.input, stdin))
        if args.command == "explain":
            try:
                jsonschema.validate(data, ENVELOPE_SCHEMA)
            except jsonschema.ValidationError as exc:
                raise InputError(exc.message, _pointer(exc.absolute_path), "schema") from None
            stdout.write(explain(data))
            return 0
        validate(args.command, data, strict=not args.lenient)
        opts = _options(data, args)
        if args.strategy and args.command != "orbit":
            raise InputError("--strategy applies to the orbit subcommand only", "", "usage")
        t0 = time.perf_counter()
        result, certificate = _RUNNERS[args.command](data, opts, args)
        elapsed = time.perf_counter() - t0
    except InputError as exc:
        return _error(stdout, stderr, 1, exc.kind, str(exc), exc.pointer)
    except (NoPrimeFound, AllStrategiesFailed) as exc:
        return _error(stdout, stderr, 2, type(exc).__name__, str(exc), None, _plain(exc.diagnostics))
    except (PadicError, ValueError, ArithmeticError) as exc:
        return _error(stdout, stderr, 1, type(exc).__name__, str(exc))
    except Exception as exc:  # noqa: BLE001 - reported, never swallowed silently
        return _error(stdout, stderr, 1, "internal", f"{type(exc).__name__}: {exc}")
    env = {
        "tool": TOOL,
        "version": __version__,
        "command": args.command,
        "input_sha256": input_hash(args.command, data, opts, args),
        "certificate": certificate,
        "result": _plain(result),
    }
    if args.timing:
        env["timing"] = {"seconds": round(elapsed, 3)}
    jsonschema.validate(env, ENVELOPE_SCHEMA)
    stderr.write(f"{TOOL}: {args.command} finished in {elapsed:.2f} s ({certificate})\n")
    stdout.write(explain(env) if args.explain else dumps(env))
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
