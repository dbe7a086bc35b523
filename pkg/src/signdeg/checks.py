"""Desk-scale verification runs behind ``signdeg verify``.

Each check returns a :class:`CheckReport`: one row per seed, cell or
instance, a flag that is False iff some deterministic implication failed,
and aggregate frequencies for the empirical parts (which never fail a run).
Rows hold exact values only, so reports are reproducible byte for byte.
Work items are independent; ``jobs > 1`` farms them out to processes and
merges results in input order.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .boolfn import (
    BooleanFunction,
    Halfspace,
    PointSet,
    block_symmetrize,
    conjunction,
    halfspace_to_function,
    majority,
    monomial_basis,
)
from .exactlp import to_rational
from .fourier import inverse_wht, parseval_check, wht
from .hardhs import (
    EmptyClass,
    HypothesisViolated,
    _zero_correlation,
    build_moment_matched,
    build_partition,
    canonical_linear_form,
    random_reduction_polynomial,
    sample_weights,
    univariate_reduce,
    verify_spectrum_bounds,
)
from .rapprox import (
    lift_symmetric_bracket,
    rdeg,
    rplus_bracket,
    sign_grid,
    verify_bracket,
)
from .signrep import (
    brs_conjunction_polynomial,
    krause_pudlak,
    sign_represents,
    threshold_degree,
    threshold_density,
    verify_degree_certificate,
    verify_density_result,
)

__all__ = [
    "CheckReport",
    "CHECKS",
    "parallel_map",
    "check_resheto",
    "check_moment_match",
    "check_reduction",
    "check_brs",
    "check_converse",
    "check_kp_density",
    "check_parseval",
    "check_symmetrization",
    "check_zero_law",
    "check_zero_correlation",
    "random_halfspace",
]


def _frac(x) -> str:
    x = to_rational(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass
class CheckReport:
    theorem: str
    params: dict
    rows: list = field(default_factory=list)
    deterministic_ok: bool = True
    frequencies: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "type": "check_report",
            "theorem": self.theorem,
            "params": self.params,
            "deterministic_ok": self.deterministic_ok,
            "frequencies": self.frequencies,
            "rows": self.rows,
        }

    def to_csv_rows(self) -> tuple[list[str], list[list]]:
        header: list[str] = []
        for row in self.rows:
            for key in row:
                if key not in header:
                    header.append(key)
        body = [[_cell(row.get(key, "")) for key in header] for row in self.rows]
        return header, body


def _cell(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def parallel_map(fn: Callable, items: Iterable, jobs: int = 1) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def _rate(count: int, total: int) -> dict:
    return {"count": count, "total": total, "frequency": f"{count}/{total}" if total else None}


# --------------------------------------------------------------------------
# Random halfspaces and partitions


def random_halfspace(n: int, rng: random.Random, wmax: int = 3) -> Halfspace:
    """sign(1/2 + c + sum w_i x_i) with small random integers; never vanishes on the cube."""
    weights = [rng.randint(-wmax, wmax) for _ in range(n)]
    return Halfspace.with_half_offset(weights, rng.randint(-wmax, wmax))


def _resheto_row(seed: int, n: int, k: int, eps: Fraction, zeta: Fraction) -> dict:
    part = build_partition(sample_weights(n, k, seed))
    rep = verify_spectrum_bounds(part, eps, zeta)
    dev, s, _ = rep.worst_overall
    return {
        "seed": seed,
        "invariants": part.check_invariants(),
        "spectrum_ok": rep.passed,
        "worst_deviation": _frac(dev),
        "worst_class": s,
        "bound": _frac(rep.bound),
    }


def check_resheto(n: int, k: int, eps, zeta, seeds: Sequence[int], jobs: int = 1) -> CheckReport:
    """Spectrum bounds for the class indicators of random weight vectors.

    The bound itself is probabilistic and only reported; the partition
    invariants are deterministic.
    """
    eps, zeta = to_rational(eps), to_rational(zeta)
    rows = parallel_map(partial(_resheto_row, n=n, k=k, eps=eps, zeta=zeta), seeds, jobs)
    rep = CheckReport("resheto", {"n": n, "k": k, "eps": _frac(eps), "zeta": _frac(zeta),
                                  "seeds": list(seeds)}, rows)
    rep.deterministic_ok = all(r["invariants"] for r in rows)
    rep.frequencies = {"spectrum_ok": _rate(sum(r["spectrum_ok"] for r in rows), len(rows))}
    return rep


def _family_or_reason(n: int, k: int, seed: int, cutoff: int):
    part = build_partition(sample_weights(n, k, seed))
    try:
        return build_moment_matched(part, cutoff), None
    except HypothesisViolated as exc:
        return None, f"{exc.which} hypothesis fails in class {exc.s}"
    except EmptyClass as exc:
        return None, f"class {exc.s} is empty"


def _moment_row(seed: int, n: int, k: int, cutoff: int) -> dict:
    fam, reason = _family_or_reason(n, k, seed, cutoff)
    if fam is None:
        return {"seed": seed, "hypotheses": False, "verified": None, "reason": reason}
    checks = fam.verify()
    return {
        "seed": seed,
        "hypotheses": True,
        "verified": all(checks.values()),
        "checks": [name for name, ok in checks.items() if not ok],
        "max_alpha_l1": _frac(max(c.certificate.alpha_l1 for c in fam.classes)),
    }


def check_moment_match(n: int, k: int, seeds: Sequence[int], cutoff: int | None = None,
                       jobs: int = 1) -> CheckReport:
    """On every seed whose per-class hypotheses hold, all low moments must agree exactly."""
    cutoff = k if cutoff is None else cutoff
    rows = parallel_map(partial(_moment_row, n=n, k=k, cutoff=cutoff), seeds, jobs)
    rep = CheckReport("moment-match", {"n": n, "k": k, "cutoff": cutoff, "seeds": list(seeds)}, rows)
    rep.deterministic_ok = all(r["verified"] is not False for r in rows)
    rep.frequencies = {"hypotheses_pass": _rate(sum(r["hypotheses"] for r in rows), len(rows))}
    return rep


def _reduction_row(seed: int, n: int, k: int, d: int, cutoff: int, battery: int) -> dict:
    fam, reason = _family_or_reason(n, k, seed, cutoff)
    if fam is None:
        return {"seed": seed, "family": False, "passed": None, "reason": reason}
    if not all(fam.verify().values()):
        return {"seed": seed, "family": True, "passed": False, "reason": "family failed verification"}
    w = fam.partition.weights
    canonical_ok = None  # the linear identity needs cutoff >= 1
    if cutoff >= 1:
        canon = univariate_reduce(canonical_linear_form(w), fam)
        canonical_ok = canon.ok and canon.P.terms == {(1,): Fraction(1)}
    rng = random.Random(seed)
    deg = min(d, cutoff)
    failures = 0
    for _ in range(battery):
        if not univariate_reduce(random_reduction_polynomial(n, deg, rng), fam).ok:
            failures += 1
    return {
        "seed": seed,
        "family": True,
        "passed": canonical_ok is not False and failures == 0,
        "canonical": canonical_ok,
        "battery": battery,
        "degree": deg,
        "failures": failures,
    }


def check_reduction(n: int, k: int, d: int, seeds: Sequence[int], cutoff: int | None = None,
                    battery: int = 20, jobs: int = 1) -> CheckReport:
    """Univariate reduction on every verified family.

    The family matches moments up to ``cutoff`` (default k); random
    polynomials have degree ``min(d, cutoff)``.
    """
    cutoff = k if cutoff is None else cutoff
    if min(d, cutoff) + 1 > 1 << (k + 1):
        raise ValueError("need d + 1 <= 2^(k+1) residues to interpolate")
    fn = partial(_reduction_row, n=n, k=k, d=d, cutoff=cutoff, battery=battery)
    rows = parallel_map(fn, seeds, jobs)
    rep = CheckReport("reduction", {"n": n, "k": k, "d": d, "cutoff": cutoff, "battery": battery,
                                    "seeds": list(seeds)}, rows)
    rep.deterministic_ok = all(r["passed"] is not False for r in rows)
    rep.frequencies = {"verified_families": _rate(sum(r["family"] for r in rows), len(rows))}
    return rep


# --------------------------------------------------------------------------
# Conjunctions


def _cube_halfspace(n: int, rng: random.Random) -> tuple[Halfspace, BooleanFunction]:
    h = random_halfspace(n, rng)
    return h, halfspace_to_function(h, PointSet.cube(n))


def _brs_row(i: int, seed: int, nmax: int, eps: Fraction) -> dict:
    rng = random.Random(seed * 1_000_003 + i)
    nf, ng = rng.randint(1, nmax), rng.randint(1, nmax)
    hf, f = _cube_halfspace(nf, rng)
    hg, g = _cube_halfspace(ng, rng)
    rf, rg = rdeg(f, eps, nf), rdeg(g, eps, ng)
    d = max(rf.degree, rg.degree)
    poly = brs_conjunction_polynomial(rf.p, rf.q, f.domain, rg.p, rg.q, g.domain)
    conj = conjunction(f, g)
    ok_sign = sign_represents(poly, conj)
    return {
        "pair": i,
        "f": list(hf.coeffs),
        "g": list(hg.coeffs),
        "d": d,
        "output_degree": poly.degree,
        "points": len(conj),
        "sign_ok": ok_sign,
        "passed": ok_sign and poly.degree <= 2 * d,
    }


def check_brs(pairs: int = 20, nmax: int = 4, seed: int = 0, eps=Fraction(1, 3),
              jobs: int = 1) -> CheckReport:
    """Build the conjunction polynomial from eps-approximants and check its signs everywhere."""
    eps = to_rational(eps)
    rows = parallel_map(partial(_brs_row, seed=seed, nmax=nmax, eps=eps), range(pairs), jobs)
    rep = CheckReport("brs", {"pairs": pairs, "nmax": nmax, "seed": seed, "eps": _frac(eps)}, rows)
    rep.deterministic_ok = all(r["passed"] for r in rows)
    return rep


def _random_table(n: int, rng: random.Random) -> BooleanFunction:
    while True:
        vals = [rng.choice((-1, 1)) for _ in range(1 << n)]
        if any(v == -1 for v in vals):  # identically +1 (false) makes the conjunction trivial
            return BooleanFunction(PointSet.cube(n), vals, name="table:" + "".join(
                "1" if v < 0 else "0" for v in vals))


def _converse_row(i: int, seed: int, nmax: int, tol: Fraction) -> dict:
    rng = random.Random(seed * 1_000_003 + i)
    f = _random_table(rng.randint(1, nmax), rng)
    g = _random_table(rng.randint(1, nmax), rng)
    cert = threshold_degree(conjunction(f, g))
    d = cert.degree
    bf, bg = rplus_bracket(f, 4 * d, tol), rplus_bracket(g, 2 * d, tol)
    total = bf.hi + bg.hi
    return {
        "pair": i,
        "f": f.name,
        "g": g.name,
        "degthr_conj": d,
        "hi_f_4d": _frac(bf.hi),
        "hi_g_2d": _frac(bg.hi),
        "sum": _frac(total),
        "passed": total < 1 and verify_degree_certificate(cert, conjunction(f, g)),
    }


def check_converse(pairs: int = 10, nmax: int = 3, seed: int = 0, tol=Fraction(1, 2**16),
                   jobs: int = 1) -> CheckReport:
    """With d = degthr(f AND g), the witnesses must give hi(f, 4d) + hi(g, 2d) < 1."""
    tol = to_rational(tol)
    rows = parallel_map(partial(_converse_row, seed=seed, nmax=nmax, tol=tol), range(pairs), jobs)
    rep = CheckReport("converse", {"pairs": pairs, "nmax": nmax, "seed": seed, "tol": _frac(tol)}, rows)
    rep.deterministic_ok = all(r["passed"] for r in rows)
    return rep


def check_kp_density(f: BooleanFunction, cap: int | None = None, jobs: int = 1) -> CheckReport:
    """Exhaustive search showing dns(f^KP) >= 2^degthr(f) (families up to 2^degthr - 1)."""
    cert = threshold_degree(f)
    target = 1 << cert.degree
    cap = target - 1 if cap is None else cap
    kp = krause_pudlak(f)
    res = threshold_density(kp, cap, jobs=jobs)
    row = {
        "function": f.name,
        "degthr": cert.degree,
        "kp_points": len(kp),
        "cap": cap,
        "families_checked": res.families_checked,
        "exceeds_cap": res.exceeds_cap,
        "density_lower_bound": cap + 1 if res.exceeds_cap else None,
        "density": res.density,
    }
    ok = verify_degree_certificate(cert, f) and verify_density_result(res, kp)
    if cap < target:
        ok = ok and res.exceeds_cap
    else:
        ok = ok and (res.exceeds_cap or res.density >= target)
    row["passed"] = ok
    rep = CheckReport("kp-density", {"function": f.name, "cap": cap}, [row])
    rep.deterministic_ok = ok
    return rep


# --------------------------------------------------------------------------
# Fourier


def _parseval_row(t: int, n: int, seed: int) -> dict:
    rng = random.Random(seed * 1_000_003 + t)
    if t % 2 == 0:
        vals = [rng.choice((-1, 1)) for _ in range(1 << n)]
        kind = "boolean"
    else:
        vals = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(1 << n)]
        kind = "rational"
    spec = wht(vals)
    par = parseval_check(vals, spec)
    inv = inverse_wht(spec) == [Fraction(v) for v in vals]
    return {"trial": t, "kind": kind, "parseval": par, "inversion": inv, "passed": par and inv}


def check_parseval(n: int, trials: int = 50, seed: int = 0, jobs: int = 1) -> CheckReport:
    rows = parallel_map(partial(_parseval_row, n=n, seed=seed), range(trials), jobs)
    rep = CheckReport("parseval", {"n": n, "trials": trials, "seed": seed}, rows)
    rep.deterministic_ok = all(r["passed"] for r in rows)
    return rep


# --------------------------------------------------------------------------
# Symmetrization and the sign grid


def _symmetrization_row(cell: tuple[int, int], tol: Fraction, direct_limit: int) -> dict:
    n, d = cell
    F = majority(n)
    G = block_symmetrize(F, [n])
    grid = rplus_bracket(G, d, tol)
    lifted = lift_symmetric_bracket(grid, F, [n])
    basis = len(monomial_basis(F.domain, d))
    if basis <= direct_limit:
        cube, method = rplus_bracket(F, d, tol), "direct"
    else:
        cube, method = lifted, "lifted"
    overlap = max(cube.lo, grid.lo) <= min(cube.hi, grid.hi) + 2 * tol
    lifted_ok = verify_bracket(lifted, F)
    return {
        "n": n,
        "d": d,
        "cube_method": method,
        "cube": [_frac(cube.lo), _frac(cube.hi)],
        "grid": [_frac(grid.lo), _frac(grid.hi)],
        "lifted_verified": lifted_ok,
        "passed": overlap and lifted_ok,
    }


def check_symmetrization(ns: Sequence[int] = tuple(range(1, 9)), ds: Sequence[int] = (0, 1, 2, 3),
                         tol=Fraction(1, 2**12), direct_limit: int = 26, jobs: int = 1) -> CheckReport:
    """Brackets for MAJ_n on the cube and on its weight line must overlap within 2 tol.

    The cube bracket is computed directly when the monomial basis has at
    most ``direct_limit`` elements; otherwise it is the grid bracket lifted
    to the cube and re-verified exactly against the cube LP.  The lifted
    bracket is also checked in the direct cells.
    """
    tol = to_rational(tol)
    cells = [(n, d) for n in ns for d in ds]
    rows = parallel_map(partial(_symmetrization_row, tol=tol, direct_limit=direct_limit), cells, jobs)
    rep = CheckReport("symmetrization", {"n": list(ns), "d": list(ds), "tol": _frac(tol),
                                         "direct_limit": direct_limit}, rows)
    rep.deterministic_ok = all(r["passed"] for r in rows)
    return rep


def _zero_law_row(N: int, tol: Fraction) -> dict:
    f = sign_grid(N)
    his = [rplus_bracket(f, d, tol).hi for d in range(N + 1)]
    monotone = all(his[d + 1] <= his[d] + 2 * tol for d in range(N))
    zero_iff = all((his[d] == 0) == (d >= N) for d in range(N + 1))
    return {
        "N": N,
        "hi": [_frac(h) for h in his],
        "monotone": monotone,
        "zero_iff_d_ge_N": zero_iff,
        "passed": monotone and zero_iff,
    }


def check_zero_law(Nmax: int = 12, tol=Fraction(1, 2**20), jobs: int = 1,
                   Ns: Sequence[int] | None = None) -> CheckReport:
    """hi(N, d) is nonincreasing in d (within 2 tol) and vanishes exactly for d >= N."""
    tol = to_rational(tol)
    Ns = list(range(1, Nmax + 1)) if Ns is None else list(Ns)
    # largest N first so the pool is not left waiting on the slowest item
    order = sorted(Ns, reverse=True)
    by_n = dict(zip(order, parallel_map(partial(_zero_law_row, tol=tol), order, jobs)))
    rows = [by_n[N] for N in Ns]
    rep = CheckReport("zero-law", {"N": Ns, "tol": _frac(tol)}, rows)
    rep.deterministic_ok = all(r["passed"] for r in rows)
    return rep


# --------------------------------------------------------------------------
# Zero-correlation construction


def _zero_correlation_instance(rng: random.Random, dim: int):
    n = rng.randint(2, dim)
    size = rng.randint(4, 1 << n)
    pts = np.array(sorted(rng.sample(range(1 << n), size)), dtype=np.int64)
    fvals = np.array([rng.choice((-1, 1)) for _ in range(size)], dtype=np.int64)
    r = rng.randint(1, min(4, (1 << n) - 1))
    masks = rng.sample(range(1, 1 << n), r)
    chi = np.empty((size, r), dtype=np.int64)
    for c, S in enumerate(masks):
        bits = np.zeros(size, dtype=np.int64)
        v = pts & S
        while np.any(v):
            bits ^= v & 1
            v >>= 1
        chi[:, c] = 1 - 2 * bits
    return n, pts, fvals, masks, chi


def check_zero_correlation(instances: int = 200, seed: int = 0, dim: int = 6,
                           max_draws: int = 200_000) -> CheckReport:
    """Rejection-sample instances satisfying both hypotheses; each must yield a valid distribution.

    ``_zero_correlation`` verifies nonnegativity, vanishing correlations and
    sum |alpha| < 1 exactly; the row re-checks the correlations from the
    returned weights.
    """
    rng = random.Random(seed)
    rows, draws = [], 0
    while len(rows) < instances and draws < max_draws:
        draws += 1
        n, pts, fvals, masks, chi = _zero_correlation_instance(rng, dim)
        try:
            u, total, cert = _zero_correlation(fvals, chi)
        except HypothesisViolated:
            continue
        except AssertionError as exc:
            rows.append({"instance": len(rows), "n": n, "points": len(pts), "passed": False,
                         "error": str(exc)})
            continue
        signed = u * fvals.astype(object)
        zero = all(int(v) == 0 for v in (chi.T.astype(object) @ signed).tolist())
        nonneg = all(v >= 0 for v in u.tolist()) and total > 0
        rows.append({
            "instance": len(rows),
            "n": n,
            "points": len(pts),
            "characters": len(masks),
            "alpha_l1": _frac(cert.alpha_l1),
            "passed": zero and nonneg and cert.alpha_l1 < 1,
        })
    rep = CheckReport("zero-correlation", {"instances": instances, "seed": seed, "dim": dim}, rows)
    rep.deterministic_ok = len(rows) == instances and all(r["passed"] for r in rows)
    rep.frequencies = {"hypotheses_pass": _rate(len(rows), draws)}
    return rep


CHECKS = {
    "resheto": check_resheto,
    "moment-match": check_moment_match,
    "reduction": check_reduction,
    "brs": check_brs,
    "converse": check_converse,
    "kp-density": check_kp_density,
    "parseval": check_parseval,
    "symmetrization": check_symmetrization,
    "zero-law": check_zero_law,
    "zero-correlation": check_zero_correlation,
}
