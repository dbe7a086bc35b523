"""``signdeg`` command line.

Every run writes ``<out>/<command>/<hash>/manifest.json`` plus one result
file.  The hash covers the command and its resolved parameters (not
``--out`` or ``--jobs``), results carry no timings, and ``signdeg rerun``
re-executes a manifest and compares output digests.

Exit codes: 0 ok, 1 a deterministic check failed (or a rerun differs),
2 malformed input, 3 a size limit was hit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import re
import sys
from datetime import datetime, timezone
from fractions import Fraction
from functools import partial
from pathlib import Path

from . import __version__
from .boolfn import (
    BooleanFunction,
    Halfspace,
    PointSet,
    block_symmetrize,
    conjunction,
    constant,
    halfspace_to_function,
    majority,
    parity,
)
from .checks import CHECKS, parallel_map
from .exactlp import to_rational
from .hardhs import build_hard_halfspace
from .rapprox import DEFAULT_TOL, ExceedsDmax, rdeg, rplus_bracket, sign_grid, verify_bracket
from .signrep import MAX_DEGREE_DOMAIN, krause_pudlak, threshold_degree, verify_degree_certificate

__all__ = ["main", "parse_rational", "parse_range", "parse_function", "UsageError", "SizeLimit"]

MAX_CUBE_DIM = 20
MAX_RAPPROX_POINTS = 1 << 12
MAX_GRID_N = 256


class UsageError(ValueError):
    """Malformed command-line input (exit 2)."""


class SizeLimit(ValueError):
    """Input beyond the supported size (exit 3)."""


# --------------------------------------------------------------------------
# Parsing helpers


_POW = re.compile(r"^\s*(-?)2\^(-?\d+)\s*$")


def parse_rational(text) -> Fraction:
    """``"a/b"``, an integer, or ``"2^t"`` / ``"2^-t"``."""
    if isinstance(text, Fraction):
        return text
    s = str(text).strip()
    m = _POW.match(s)
    try:
        if m:
            sign = -1 if m.group(1) else 1
            e = int(m.group(2))
            return sign * (Fraction(2) ** e)
        if "." in s or "e" in s.lower():
            raise ValueError
        return to_rational(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational: {text!r} (use a/b or 2^-t)") from None


def parse_range(text) -> list[int]:
    """``"a..b"`` (inclusive), ``"a,b,c"``, a mix of both, or a single integer."""
    out: list[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                a, b = part.split("..")
                lo, hi = int(a), int(b)
                if hi < lo:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"not an integer range: {text!r}") from None
    if not out:
        raise UsageError("empty range")
    return out


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from None


_KEYWORDS = ("maj", "parity", "halfspace", "hard", "conj", "kp", "grid", "const")


def _split_pair(body: str) -> tuple[str, str]:
    """Split ``A,B`` at the first comma that starts another function spec."""
    for m in re.finditer(",", body):
        rest = body[m.end():]
        head = rest.split(":", 1)[0]
        if head in _KEYWORDS or rest.endswith(".json") and "," not in rest:
            return body[: m.start()], rest
    raise UsageError(f"cannot split conjunction spec {body!r}")


def _cube_dim(n: int) -> int:
    if n < 1:
        raise UsageError("dimension must be positive")
    if n > MAX_CUBE_DIM:
        raise SizeLimit(f"cube dimension {n} exceeds {MAX_CUBE_DIM}")
    return n


def _function_from_json(path: str) -> BooleanFunction:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read function file {path}: {exc}") from None
    kind = data.get("type")
    name = data.get("name", Path(path).stem)
    try:
        if kind == "halfspace":
            h = Halfspace.from_json(data)
            return halfspace_to_function(h, PointSet.cube(_cube_dim(h.n)), name=name)
        if "points" in data or "n" in data:
            if "n" in data:
                _cube_dim(int(data["n"]))
            return BooleanFunction.from_json({"name": name, **data})
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (SizeLimit, UsageError)):
            raise
        raise UsageError(f"bad function file {path}: {exc}") from None
    raise UsageError(f"function file {path} needs 'points' or 'n' with 'values', or a halfspace")


def parse_function(spec: str) -> BooleanFunction:
    """Builtins ``maj:n``, ``parity:n``, ``const:n[,v]``, ``halfspace:w1,..,wn``
    (sign(1/2 + sum w_i x_i)), ``hard:n,k,seed``, ``grid:N``, ``conj:A,B``,
    ``kp:A``, or a path to a JSON file."""
    spec = spec.strip()
    if spec.endswith(".json"):
        return _function_from_json(spec)
    head, _, body = spec.partition(":")
    if not _ and head != "const":
        raise UsageError(f"malformed function spec {spec!r}")
    try:
        if head == "maj":
            return majority(_cube_dim(int(body)))
        if head == "parity":
            return parity(_cube_dim(int(body)))
        if head == "const":
            vals = _ints(body, "const") if body else [1]
            n = _cube_dim(vals[0]) if body else 1
            v = vals[1] if len(vals) > 1 else 1
            if v not in (1, -1):
                raise UsageError("constant value must be 1 or -1")
            return constant(n, v)
        if head == "halfspace":
            w = _ints(body, "halfspace")
            h = Halfspace.with_half_offset(w)
            return halfspace_to_function(h, PointSet.cube(_cube_dim(len(w))), name=spec)
        if head == "hard":
            n, k, seed = _ints(body, "hard")
            _cube_dim(2 * n)
            h = build_hard_halfspace(n, k, seed)
            return halfspace_to_function(h, PointSet.cube(2 * n), name=spec)
        if head == "grid":
            N = int(body)
            if N < 1:
                raise UsageError("grid size must be positive")
            if N > MAX_GRID_N:
                raise SizeLimit(f"grid size {N} exceeds {MAX_GRID_N}")
            return sign_grid(N)
        if head == "conj":
            a, b = _split_pair(body)
            f, g = parse_function(a), parse_function(b)
            if len(f) * len(g) > 1 << MAX_CUBE_DIM:
                raise SizeLimit("conjunction domain too large")
            return conjunction(f, g)
        if head == "kp":
            f = parse_function(body)
            if not f.domain.is_cube:
                raise UsageError("kp needs a cube function")
            _cube_dim(3 * f.n)
            return krause_pudlak(f)
    except (SizeLimit, UsageError):
        raise
    except ValueError as exc:
        raise UsageError(f"malformed function spec {spec!r}: {exc}") from None
    raise UsageError(f"unknown function kind {head!r}")


# --------------------------------------------------------------------------
# Output


def _dump_json(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def _dump_csv(header: list, rows: list) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode()


def _frac(x) -> str:
    x = to_rational(x)
    return f"{x.numerator}/{x.denominator}"


_VOLATILE = ("out", "jobs", "config", "handler")


def _params(ns: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(ns).items()) if k not in _VOLATILE}


def _param_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class Outcome:
    def __init__(self, payload: bytes, fmt: str, summary: str, ok: bool = True, stages: dict | None = None):
        self.payload, self.fmt, self.summary, self.ok = payload, fmt, summary, ok
        self.stages = stages or {"compute": "ok"}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_run(params: dict, outcome: Outcome, out_root: Path, started: str) -> Path:
    run_dir = out_root / params["command"] / _param_hash(params)
    run_dir.mkdir(parents=True, exist_ok=True)
    name = f"result.{outcome.fmt}"
    (run_dir / name).write_bytes(outcome.payload)
    manifest = {
        "command": params["command"],
        "params": params,
        "seeds": params.get("seeds"),
        "version": __version__,
        "started": started,
        "finished": _now(),
        "stages": outcome.stages,
        "exit_code": 0 if outcome.ok else 1,
        "outputs": [{"path": name, "sha256": hashlib.sha256(outcome.payload).hexdigest()}],
    }
    (run_dir / "manifest.json").write_bytes(_dump_json(manifest))
    return run_dir


# --------------------------------------------------------------------------
# Commands


def _degthr(p: dict) -> Outcome:
    f = parse_function(p["fn"])
    if len(f) > MAX_DEGREE_DOMAIN:
        raise SizeLimit(f"domain has {len(f)} points; limit is {MAX_DEGREE_DOMAIN}")
    cert = threshold_degree(f)
    ok = verify_degree_certificate(cert, f)
    if p["format"] == "csv":
        payload = _dump_csv(["function", "degree", "verified"], [[f.name, cert.degree, str(ok).lower()]])
    else:
        payload = _dump_json({**cert.to_json(), "verified": ok})
    return Outcome(payload, p["format"], f"degthr({f.name}) = {cert.degree}", ok,
                   {"lp": "ok", "verify": "pass" if ok else "fail"})


def _rapprox_target(p: dict) -> BooleanFunction:
    if (p.get("grid") is None) == (p.get("fn") is None):
        raise UsageError("give exactly one of --fn and --grid")
    f = parse_function(f"grid:{p['grid']}") if p.get("grid") is not None else parse_function(p["fn"])
    if len(f) > MAX_RAPPROX_POINTS:
        raise SizeLimit(f"domain has {len(f)} points; limit is {MAX_RAPPROX_POINTS}")
    return f


def _rapprox(p: dict) -> Outcome:
    f = _rapprox_target(p)
    if p["d"] is None or p["d"] < 0:
        raise UsageError("--d must be a nonnegative integer")
    tol = parse_rational(p["tol"])
    if not 0 < tol < 1:
        raise UsageError("--tol must lie in (0, 1)")
    br = rplus_bracket(f, p["d"], tol)
    if p["format"] == "csv":
        payload = _dump_csv(["function", "d", "lo", "hi"], [[f.name, p["d"], _frac(br.lo), _frac(br.hi)]])
    else:
        payload = _dump_json(br.to_json())
    checked = verify_bracket(br, f)
    summary = f"R+({f.name}, {p['d']}) in [{br.lo}, {br.hi}]" + ("" if checked else " (checker FAILED)")
    return Outcome(payload, p["format"], summary, ok=checked,
                   stages={"compute": "ok", "checker": "pass" if checked else "fail"})


def _need(p: dict, *keys) -> None:
    for k in keys:
        if p.get(k) is None:
            raise UsageError(f"--{k.replace('_', '-')} is required for verify {p['theorem']}")


def _run_check(p: dict):
    t = p["theorem"]
    jobs = p.get("jobs", 1)
    seeds = parse_range(p["seeds"]) if p.get("seeds") is not None else None
    if t == "resheto":
        _need(p, "n", "k")
        return CHECKS[t](p["n"], p["k"], parse_rational(p["eps"] or Fraction(2 * p["k"], p["n"])),
                         parse_rational(p["zeta"] or "1/5"), seeds or list(range(10)), jobs=jobs)
    if t == "moment-match":
        _need(p, "n", "k")
        return CHECKS[t](p["n"], p["k"], seeds or list(range(10)), cutoff=p["cutoff"], jobs=jobs)
    if t == "reduction":
        _need(p, "n", "k")
        d = p["d"] if p["d"] is not None else p["k"]
        return CHECKS[t](p["n"], p["k"], d, seeds or list(range(10)), cutoff=p["cutoff"],
                         battery=p["battery"], jobs=jobs)
    if t == "brs":
        return CHECKS[t](p["pairs"] or 20, p["n"] or 4, (seeds or [0])[0],
                         parse_rational(p["eps"] or "1/3"), jobs=jobs)
    if t == "converse":
        return CHECKS[t](p["pairs"] or 10, p["n"] or 3, (seeds or [0])[0],
                         parse_rational(p["tol"] or "2^-16"), jobs=jobs)
    if t == "kp-density":
        f = parse_function(p["fn"] or "parity:2")
        if not f.domain.is_cube or f.n > 2:
            raise SizeLimit("kp-density supports cube functions on at most 2 variables")
        return CHECKS[t](f, cap=p["cap"], jobs=jobs)
    if t == "parseval":
        _need(p, "n")
        if p["n"] > 16:
            raise SizeLimit("parseval check limited to n <= 16")
        return CHECKS[t](p["n"], p["trials"] or 50, (seeds or [0])[0], jobs=jobs)
    if t == "symmetrization":
        ns = parse_range(p["n_list"]) if p.get("n_list") else list(range(1, 9))
        ds = parse_range(p["d_list"]) if p.get("d_list") else [0, 1, 2, 3]
        if max(ns) > 10:
            raise SizeLimit("symmetrization check limited to n <= 10")
        return CHECKS[t](ns, ds, parse_rational(p["tol"] or "2^-12"), jobs=jobs)
    if t == "zero-law":
        Ns = parse_range(p["N"]) if p.get("N") else list(range(1, 13))
        if max(Ns) > 32:
            raise SizeLimit("zero-law check limited to N <= 32")
        return CHECKS[t](tol=parse_rational(p["tol"] or "2^-20"), jobs=jobs, Ns=Ns)
    if t == "zero-correlation":
        return CHECKS[t](p["trials"] or 200, (seeds or [0])[0])
    raise UsageError(f"unknown theorem id {t!r}")  # pragma: no cover - argparse choices


def _verify(p: dict) -> Outcome:
    rep = _run_check(p)
    if p["format"] == "csv":
        header, rows = rep.to_csv_rows()
        payload = _dump_csv(header, rows)
    else:
        payload = _dump_json(rep.to_json())
    freq = "; ".join(f"{k} {v['count']}/{v['total']}" for k, v in rep.frequencies.items())
    status = "PASS" if rep.deterministic_ok else "FAIL"
    summary = f"verify {rep.theorem}: {status} ({len(rep.rows)} rows{'; ' + freq if freq else ''})"
    return Outcome(payload, p["format"], summary, rep.deterministic_ok,
                   {"deterministic": "pass" if rep.deterministic_ok else "fail",
                    "frequencies": rep.frequencies})


def _table_sign_grid(p: dict, jobs: int):
    Ns = parse_range(p["N"] or "1..8")
    dmax = p["dmax"] if p["dmax"] is not None else max(Ns)
    tol = parse_rational(p["tol"] or "2^-20")
    if max(Ns) > 32 or dmax > 32:
        raise SizeLimit("sign-grid table limited to N, dmax <= 32")
    rows = parallel_map(partial(_sign_grid_row, dmax=dmax, tol=tol), Ns, jobs)
    header = ["N"] + [f"d={d}" for d in range(1, dmax + 1)]
    ok = all(r[1] for r in rows)
    return header, [r[0] for r in rows], ok


def _sign_grid_row(N: int, dmax: int, tol: Fraction):
    f = sign_grid(N)
    cells, his = [N], []
    for d in range(1, dmax + 1):
        br = rplus_bracket(f, d, tol)
        his.append(br.hi)
        cells.append(f"{_frac(br.lo)}..{_frac(br.hi)}")
    mono = all(b <= a + 2 * tol for a, b in zip(his, his[1:]))
    return cells, mono


def _table_maj_rdeg(p: dict, jobs: int):
    ns = parse_range(p["n"] or "1..8")
    eps = parse_rational(p["eps"] or "1/3")
    if max(ns) > 64:
        raise SizeLimit("maj-rdeg table limited to n <= 64")
    rows = []
    for n in ns:
        line = BooleanFunction(PointSet.grid([n]), [-1 if 2 * w > n else 1 for w in range(n + 1)],
                               name=f"sym(maj:{n})")
        try:
            r = rdeg(line, eps, n)
            rows.append([n, _frac(eps), r.degree])
        except ExceedsDmax:
            rows.append([n, _frac(eps), ""])
    ok = all(b[2] >= a[2] for a, b in zip(rows, rows[1:]) if a[2] != "" and b[2] != "")
    return ["n", "eps", "rdeg"], rows, ok


def _table_degthr_conj(p: dict, jobs: int):
    family = p["family"] or "maj"
    mmax = p["mmax"] if p["mmax"] is not None else 4
    builders = {"maj": majority, "parity": parity}
    if family not in builders:
        raise UsageError(f"unknown family {family!r} (maj or parity)")
    if mmax > 8 or (p["cube"] and mmax > 7):
        raise SizeLimit("degthr-conj table limited to m <= 8 (m <= 7 with --cube)")
    rows, ok = [], True
    for m in range(1, mmax + 1):
        F = conjunction(builders[family](m), builders[family](m))
        target = F if p["cube"] else block_symmetrize(F, [m, m])
        cert = threshold_degree(target)
        good = verify_degree_certificate(cert, target)
        ok = ok and good
        rows.append([m, cert.degree, "cube" if p["cube"] else "grid", len(target), str(good).lower()])
    return ["m", "degthr", "domain", "points", "verified"], rows, ok


def _table(p: dict) -> Outcome:
    kind = p["kind"]
    jobs = p.get("jobs", 1)
    build = {"sign-grid-r": _table_sign_grid, "maj-rdeg": _table_maj_rdeg,
             "degthr-conj": _table_degthr_conj}[kind]
    header, rows, ok = build(p, jobs)
    if p["format"] == "json":
        payload = _dump_json({"type": "table", "kind": kind, "header": header, "rows": rows,
                              "consistent": ok})
    else:
        payload = _dump_csv(header, rows)
    return Outcome(payload, p["format"], f"table {kind}: {len(rows)} rows", ok,
                   {"compute": "ok", "consistency": "pass" if ok else "fail"})


_COMMANDS = {"degthr": _degthr, "rapprox": _rapprox, "verify": _verify, "table": _table}


def execute(params: dict, jobs: int = 1) -> Outcome:
    return _COMMANDS[params["command"]]({**params, "jobs": jobs})


def _rerun(args) -> int:
    path = Path(args.manifest)
    try:
        manifest = json.loads(path.read_text())
        params = manifest["params"]
        expected = {o["path"]: o["sha256"] for o in manifest["outputs"]}
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: unreadable manifest {path}: {exc}", file=sys.stderr)
        return 2
    if params.get("command") not in _COMMANDS:
        print(f"error: manifest names unknown command {params.get('command')!r}", file=sys.stderr)
        return 2
    outcome = execute(params, args.jobs)
    name = f"result.{outcome.fmt}"
    digest = hashlib.sha256(outcome.payload).hexdigest()
    same = expected.get(name) == digest
    stored = path.parent / name
    if same and stored.exists():
        same = stored.read_bytes() == outcome.payload
    print(f"rerun {params['command']}: {'identical' if same else 'MISMATCH'} ({name} sha256 {digest[:16]})")
    return 0 if same else 1


# --------------------------------------------------------------------------
# Argument parsing


def _read_config(path: str) -> dict:
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signdeg", description="Exact sign-representation workbench.")
    parser.add_argument("--version", action="version", version=f"signdeg {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="results root (default $SIGNDEG_OUT or ./out)")
    common.add_argument("--config", default=None, help="key=value defaults file; flags override it")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent items")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degthr", parents=[common], help="threshold degree with certificates")
    p.add_argument("--fn", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("rapprox", parents=[common], help="certified bracket for R+(f, d)")
    p.add_argument("--fn")
    p.add_argument("--grid", type=int)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--tol", default=f"2^-{DEFAULT_TOL.denominator.bit_length() - 1}")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("verify", parents=[common], help="desk-scale theorem checks")
    p.add_argument("theorem", choices=sorted(CHECKS))
    for flag, typ in (("--n", int), ("--k", int), ("--d", int), ("--cutoff", int), ("--battery", int),
                      ("--trials", int), ("--pairs", int), ("--cap", int)):
        p.add_argument(flag, type=typ)
    for flag in ("--eps", "--zeta", "--tol", "--seeds", "--fn", "--N"):
        p.add_argument(flag)
    p.add_argument("--n-list", help="symmetrization: n values, e.g. 1..8")
    p.add_argument("--d-list", help="symmetrization: degrees, e.g. 0..3")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(battery=20)

    p = sub.add_parser("table", parents=[common], help="CSV tables")
    p.add_argument("kind", choices=("sign-grid-r", "maj-rdeg", "degthr-conj"))
    p.add_argument("--N", help="sign-grid-r: grid sizes, e.g. 16 or 1..16")
    p.add_argument("--dmax", type=int)
    p.add_argument("--n", help="maj-rdeg: sizes, e.g. 2,4,8")
    p.add_argument("--eps")
    p.add_argument("--tol")
    p.add_argument("--family")
    p.add_argument("--mmax", type=int)
    p.add_argument("--cube", action="store_true", help="degthr-conj: solve on the cube itself")
    p.add_argument("--format", choices=("json", "csv"), default="csv")

    p = sub.add_parser("rerun", help="re-execute a manifest and compare outputs")
    p.add_argument("manifest")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = _read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse usage errors exit with 2
        return int(exc.code or 0)
    try:
        if args.command == "rerun":
            return _rerun(args)
        started = _now()
        params = _params(args)
        outcome = execute(params, args.jobs)
        out_root = Path(args.out or os.environ.get("SIGNDEG_OUT") or "out")
        run_dir = _write_run(params, outcome, out_root, started)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SizeLimit as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        return 3
    print(outcome.summary)
    print(f"wrote {run_dir}")
    return 0 if outcome.ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
