"""Sign-representation: threshold degree, threshold density and conjunctions.

All answers carry certificates that are checked without re-solving: a
witness polynomial with ``f(x) p(x) >= 1`` at every point, and a Farkas
vector for every degree (or family) ruled out.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .boolfn import (
    BooleanFunction,
    Polynomial,
    PointSet,
    mask_to_subset,
    monomial_basis,
    monomial_matrix,
)
from .exactlp import (
    Feasible,
    FeasibilityOutcome,
    Infeasible,
    LinearProgram,
    check_feasible,
    verify_outcome,
)

__all__ = [
    "DegreeCertificate",
    "DensityResult",
    "NonpositiveDenominator",
    "threshold_degree",
    "degree_lp",
    "verify_degree_certificate",
    "sign_represents",
    "density_feasible",
    "threshold_density",
    "krause_pudlak",
    "brs_conjunction_polynomial",
]

MAX_DEGREE_DOMAIN = 1 << 14


class NonpositiveDenominator(ValueError):
    def __init__(self, point):
        super().__init__(f"denominator is not positive at {point}")
        self.point = point


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _sparse(vec: Sequence[Fraction]) -> list:
    return [[i, _frac(v)] for i, v in enumerate(vec) if v]


# --------------------------------------------------------------------------
# Threshold degree


@dataclass
class DegreeCertificate:
    function_id: str
    degree: int
    witness: Polynomial
    lower_certificates: list = field(default_factory=list)  # Farkas vectors for 0..degree-1

    def to_json(self) -> dict:
        return {
            "type": "degree_certificate",
            "function": self.function_id,
            "degree": self.degree,
            "witness": self.witness.to_json(),
            "lower_bound_certificates": [
                {"degree": e, "farkas": _sparse(y)} for e, y in enumerate(self.lower_certificates)
            ],
        }


def degree_lp(f: BooleanFunction, d: int) -> tuple[LinearProgram, list[tuple]]:
    """LP in the coefficients of a degree-d polynomial: f(x) p(x) >= 1 for all x."""
    basis = monomial_basis(f.domain, d)
    mat = monomial_matrix(f.domain, basis)
    vals = f.values.tolist()
    A = [[v * m for m in row] for v, row in zip(vals, mat)]
    return LinearProgram(A, [1] * len(A), nvars=len(basis)), basis


def threshold_degree(f: BooleanFunction) -> DegreeCertificate:
    """Least d with a degree-d sign-representation, with certificates for every lower d."""
    if len(f) > MAX_DEGREE_DOMAIN:
        raise ValueError(f"domain larger than {MAX_DEGREE_DOMAIN} points")
    lower = []
    prev_basis, prev_outcome = None, None
    d = 0
    while True:
        lp, basis = degree_lp(f, d)
        outcome = prev_outcome if basis == prev_basis else check_feasible(lp)
        if isinstance(outcome, Feasible):
            witness = Polynomial.from_basis(f.n, basis, outcome.point)
            return DegreeCertificate(f.name, d, witness, lower)
        lower.append(outcome.certificate)
        prev_basis, prev_outcome = basis, outcome
        d += 1


def sign_represents(p: Polynomial, f: BooleanFunction, margin: Fraction | int = 0) -> bool:
    """True iff f(x) p(x) > margin at every point (``margin=0``: strict sign agreement)."""
    vals = p.evaluate_on(f.domain)
    return all(fx * v > margin for fx, v in zip(f.values.tolist(), vals))


def verify_degree_certificate(cert: DegreeCertificate, f: BooleanFunction) -> bool:
    """Check a certificate by evaluation only: witness and every Farkas vector."""
    if cert.witness.degree > cert.degree or len(cert.lower_certificates) != cert.degree:
        return False
    vals = cert.witness.evaluate_on(f.domain)
    if not all(fx * v >= 1 for fx, v in zip(f.values.tolist(), vals)):
        return False
    for e, y in enumerate(cert.lower_certificates):
        lp, _ = degree_lp(f, e)
        if not verify_outcome(lp, Infeasible(tuple(y))):
            return False
    return True


# --------------------------------------------------------------------------
# Threshold density


@dataclass
class DensityResult:
    function_id: str
    cap: int
    family: tuple | None  # bitmasks, None when every family of size <= cap is infeasible
    coefficients: tuple | None
    families_checked: int

    @property
    def exceeds_cap(self) -> bool:
        return self.family is None

    @property
    def density(self) -> int | None:
        return None if self.family is None else len(self.family)

    def to_json(self) -> dict:
        out = {
            "type": "density_result",
            "function": self.function_id,
            "cap": self.cap,
            "families_checked": self.families_checked,
        }
        if self.family is None:
            out["status"] = "exceeds_cap"
            out["lower_bound"] = self.cap + 1
        else:
            out["status"] = "found"
            out["density"] = len(self.family)
            out["family"] = [list(mask_to_subset(m)) for m in self.family]
            out["coefficients"] = [_frac(c) for c in self.coefficients]
        return out


def _character_rows(f: BooleanFunction) -> np.ndarray:
    """Row S holds f(x) chi_S(x) over the cube."""
    n = f.n
    fv = f.values.astype(np.int64)
    return np.stack([fv * _kernels.character_table(n, S) for S in range(1 << n)])


def _density_lp(rows: np.ndarray, family: Sequence[int]) -> LinearProgram:
    A = rows[list(family)].T.tolist()
    return LinearProgram(A, [1] * len(A), nvars=len(family))


def density_feasible(f: BooleanFunction, family: Sequence[int]) -> FeasibilityOutcome:
    """Feasibility of f(x) sum_{S in family} lambda_S chi_S(x) >= 1 on the cube."""
    if not f.domain.is_cube:
        raise ValueError("density is defined on cube domains")
    if not family:
        raise ValueError("family must be nonempty")
    fv = f.values.astype(np.int64)
    A = np.stack([fv * _kernels.character_table(f.n, S) for S in family], axis=1).tolist()
    return check_feasible(LinearProgram(A, [1] * len(A), nvars=len(family)))


_WORKER_ROWS = None


def _init_worker(rows):
    global _WORKER_ROWS
    _WORKER_ROWS = rows


def _is_feasible(family) -> bool:
    return check_feasible(_density_lp(_WORKER_ROWS, family)).feasible


def threshold_density(f: BooleanFunction, cap: int, jobs: int = 1) -> DensityResult:
    """Smallest family of parities sign-representing f, searched up to ``cap``.

    Families are enumerated by cardinality, then lexicographically by bitmask
    tuple; the first feasible one is returned.  Every family examined before
    it was proved infeasible by an exactly verified Farkas vector.
    """
    if not f.domain.is_cube or f.n > 8:
        raise ValueError("threshold_density supports cube domains with n <= 8")
    if cap < 1:
        raise ValueError("cap >= 1 required")
    rows = _character_rows(f)
    checked = 0
    size_limit = min(cap, 1 << f.n)
    for size in range(1, size_limit + 1):
        families = list(itertools.combinations(range(1 << f.n), size))
        if jobs > 1:
            with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(rows,)) as pool:
                flags = list(pool.map(_is_feasible, families, chunksize=256))
            hit = next((i for i, ok in enumerate(flags) if ok), None)
            checked += len(families) if hit is None else hit + 1
            if hit is not None:
                fam = families[hit]
                out = check_feasible(_density_lp(rows, fam))
                return DensityResult(f.name, cap, fam, out.point, checked)
            continue
        for fam in families:
            checked += 1
            out = check_feasible(_density_lp(rows, fam))
            if isinstance(out, Feasible):
                return DensityResult(f.name, cap, fam, out.point, checked)
    return DensityResult(f.name, cap, None, None, checked)


def verify_density_result(result: DensityResult, f: BooleanFunction) -> bool:
    if result.family is None:
        return True
    poly_vals = np.zeros(len(f), dtype=object)
    for S, lam in zip(result.family, result.coefficients):
        poly_vals = poly_vals + _kernels.character_table(f.n, S).astype(object) * lam
    return all(fx * v > 0 for fx, v in zip(f.values.tolist(), poly_vals.tolist()))


# --------------------------------------------------------------------------
# Krause-Pudlak and Beigel-Reingold-Spielman


def krause_pudlak(f: BooleanFunction) -> BooleanFunction:
    """f^KP(x, y, z) = f(s) with s_i = x_i if z_i = 0 else y_i; variables ordered x, y, z."""
    if not f.domain.is_cube:
        raise ValueError("krause_pudlak needs a cube domain")
    n = f.n
    m = (1 << n) - 1
    idx = np.arange(1 << (3 * n), dtype=np.int64)
    x, y, z = idx & m, (idx >> n) & m, (idx >> (2 * n)) & m
    sel = (x & ~z) | (y & z)
    return BooleanFunction(PointSet.cube(3 * n), f.values[sel], name=f"kp:{f.name}")


def brs_conjunction_polynomial(
    p1: Polynomial,
    q1: Polynomial,
    X: PointSet,
    p2: Polynomial,
    q2: Polynomial,
    Y: PointSet,
) -> Polynomial:
    """q1(x) q2(y) + p1(x) q2(y) + p2(y) q1(x) on X x Y (x variables first).

    When |f - p1/q1| + |g - p2/q2| < 1 pointwise, the result sign-represents
    f AND g.
    """
    for q, dom in ((q1, X), (q2, Y)):
        for pt, v in zip(dom.points, q.evaluate_on(dom)):
            if v <= 0:
                raise NonpositiveDenominator(pt)
    total = X.dim + Y.dim
    P1, Q1 = p1.embed(total, 0), q1.embed(total, 0)
    P2, Q2 = p2.embed(total, X.dim), q2.embed(total, X.dim)
    return Q1 * Q2 + P1 * Q2 + P2 * Q1
