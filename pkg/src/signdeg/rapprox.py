"""Certified brackets for R+(f, d), the best error of f by p/q with q > 0.

Every returned bracket ``[lo, hi]`` is backed by a witness pair (p, q) with
``q >= 1`` and ``|f - p/q| <= hi`` on the domain, and (unless ``hi == 0``)
by a Farkas vector proving that no degree-d pair reaches error ``lo``.  Only
brackets are reported: the infimum need not be attained.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .boolfn import BooleanFunction, Polynomial, PointSet, monomial_basis, monomial_matrix
from .exactlp import (
    CertificateError,
    Feasible,
    FeasibilityOutcome,
    Infeasible,
    LinearProgram,
    check_feasible,
    to_rational,
    verify_outcome,
)

__all__ = [
    "ApproxBracket",
    "ExceedsDmax",
    "RdegResult",
    "DEFAULT_TOL",
    "sign_grid",
    "rplus_lp",
    "rplus_feasible",
    "witness_error",
    "rplus_bracket",
    "verify_bracket",
    "rplus_sign_grid",
    "rdeg",
    "rplus_relation_check",
    "lift_symmetric_bracket",
]

DEFAULT_TOL = Fraction(1, 2**30)


class ExceedsDmax(ValueError):
    def __init__(self, dmax):
        super().__init__(f"no degree <= {dmax} reaches the requested error")
        self.dmax = dmax


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def sign_grid(N: int) -> BooleanFunction:
    """sign(x) on {-N,...,-1, 1,...,N} (points in increasing order)."""
    if N < 1:
        raise ValueError("N >= 1 required")
    pts = list(range(-N, 0)) + list(range(1, N + 1))
    return BooleanFunction(PointSet.line(pts), [1 if v > 0 else -1 for v in pts], name=f"sign-grid:{N}")


@dataclass
class ApproxBracket:
    function_id: str
    degree: int
    lo: Fraction
    hi: Fraction
    p: Polynomial
    q: Polynomial
    lo_certificate: tuple | None  # None exactly when hi == 0
    tol: Fraction
    lp_solves: int = 0

    def to_json(self) -> dict:
        return {
            "type": "approx_bracket",
            "function": self.function_id,
            "degree": self.degree,
            "lo": _frac(self.lo),
            "hi": _frac(self.hi),
            "tol": _frac(self.tol),
            "witness": {"p": self.p.to_json(), "q": self.q.to_json()},
            "lo_certificate": None
            if self.lo_certificate is None
            else [[i, _frac(v)] for i, v in enumerate(self.lo_certificate) if v],
        }


def rplus_lp(f: BooleanFunction, d: int, eps) -> tuple[LinearProgram, list[tuple]]:
    """Variables: coefficients of p then q over monomial_basis(X, d).

    Per point: f p - (1-eps) q >= 0,  (1+eps) q - f p >= 0,  q >= 1.
    """
    system = _RplusSystem(f, d)
    return system.lp(to_rational(eps)), system.basis


class _RplusSystem:
    """The R+ constraints of (f, d) for any eps, with exact constraint generation.

    Large domains are solved on a growing subset of points: a Farkas vector
    for a subset is one for the whole system (zero weight elsewhere), and a
    candidate point is accepted only after an exact integer check of every
    constraint.
    """

    DIRECT_LIMIT = 1  # solve directly when |X| <= DIRECT_LIMIT * |basis|

    def __init__(self, f: BooleanFunction, d: int):
        self.f = f
        self.basis = monomial_basis(f.domain, d)
        self.mat = monomial_matrix(f.domain, self.basis)
        self.fvals = f.values.tolist()
        self._mat_np = None
        self._active = None  # kept across eps values: active sets barely move

    def lp(self, eps: Fraction, rows=None) -> LinearProgram:
        """Constraint ``3i + r`` is the r-th constraint at point i."""
        nb = len(self.basis)
        zeros = [0] * nb
        lo_c, hi_c = 1 - eps, 1 + eps
        A, rhs = [], []
        for idx in range(3 * len(self.mat)) if rows is None else rows:
            i, r = divmod(idx, 3)
            row, fx = self.mat[i], self.fvals[i]
            if r == 0:
                A.append([fx * m for m in row] + [-lo_c * m for m in row])
            elif r == 1:
                A.append([-fx * m for m in row] + [hi_c * m for m in row])
            else:
                A.append(zeros + list(row))
            rhs.append(1 if r == 2 else 0)
        return LinearProgram(A, rhs, nvars=2 * nb)

    def violations(self, eps: Fraction, point) -> np.ndarray:
        """Scaled integer violation of every constraint (0 where satisfied), in row order."""
        if self._mat_np is None:
            self._mat_np = np.array(self.mat, dtype=object).reshape(len(self.mat), len(self.basis))
        nb = len(self.basis)
        den = lcm(*(v.denominator for v in point))
        pn = np.array([int(v * den) for v in point[:nb]], dtype=object)
        qn = np.array([int(v * den) for v in point[nb:]], dtype=object)
        P, Q = self._mat_np @ pn, self._mat_np @ qn
        fP = np.array(self.fvals, dtype=object) * P
        a, c = eps.numerator, eps.denominator
        v = np.empty((len(self.mat), 3), dtype=object)
        v[:, 0] = (c - a) * Q - c * fP
        v[:, 1] = c * fP - (c + a) * Q
        v[:, 2] = c * (den - Q)
        v = v.reshape(-1)
        return np.where(v > 0, v, 0)

    def solve(self, eps: Fraction) -> FeasibilityOutcome:
        npts, nb = len(self.mat), len(self.basis)
        if npts <= self.DIRECT_LIMIT * nb:
            return check_feasible(self.lp(eps))
        if self._active is None:
            step = max(1, npts // (2 * nb))
            pts = sorted(set(range(0, npts, step)) | {npts - 1})
            self._active = [3 * i + r for i in pts for r in range(3)]
        active = self._active
        while True:
            out = check_feasible(self.lp(eps, active))
            if isinstance(out, Infeasible):
                y = [Fraction(0)] * (3 * npts)
                for pos, idx in enumerate(active):
                    y[idx] = out.certificate[pos]
                return Infeasible(tuple(y))
            viol = self.violations(eps, out.point)
            bad = np.flatnonzero(viol)
            if bad.size == 0:
                return out
            worst = sorted(bad.tolist(), key=lambda i: -viol[i])[: 4 * nb]
            active = sorted(set(active) | set(worst))
            self._active = active


def rplus_feasible(f: BooleanFunction, d: int, eps) -> FeasibilityOutcome:
    eps = to_rational(eps)
    if not 0 <= eps < 1:
        raise ValueError("need 0 <= eps < 1")
    return _RplusSystem(f, d).solve(eps)


def _split_witness(f: BooleanFunction, basis, point) -> tuple[Polynomial, Polynomial]:
    b = len(basis)
    return (
        Polynomial.from_basis(f.n, basis, point[:b]),
        Polynomial.from_basis(f.n, basis, point[b:]),
    )


def witness_error(f: BooleanFunction, p: Polynomial, q: Polynomial) -> Fraction:
    """max_x |f(x) - p(x)/q(x)|; raises if q < 1 somewhere."""
    pv, qv = p.evaluate_on(f.domain), q.evaluate_on(f.domain)
    worst = Fraction(0)
    for fx, a, c in zip(f.values.tolist(), pv, qv):
        if c < 1:
            raise CertificateError("denominator below 1")
        worst = max(worst, abs(fx - a / c))
    return worst


def verify_bracket(br: ApproxBracket, f: BooleanFunction) -> bool:
    """Exact re-check of a bracket: witness error and the Farkas vector at lo."""
    if not 0 <= br.lo <= br.hi <= 1 or br.hi - br.lo > br.tol:
        return False
    if max(br.p.degree, br.q.degree) > br.degree:
        return False
    try:
        if witness_error(f, br.p, br.q) > br.hi:
            return False
    except CertificateError:
        return False
    if br.hi == 0:
        return br.lo == 0
    if br.lo_certificate is None:
        return False
    lp, _ = rplus_lp(f, br.degree, br.lo)
    return verify_outcome(lp, Infeasible(tuple(br.lo_certificate)))


def _dyadic_midpoint(lo: Fraction, hi: Fraction) -> Fraction:
    """A short dyadic rational strictly inside (lo, hi), near the midpoint.

    Probing at witness errors directly would feed LPs huge denominators.
    """
    width = hi - lo
    m = 2
    while Fraction(1, 2**m) * 4 > width:
        m += 1
    mid = (lo + hi) / 2
    probe = Fraction((mid.numerator << m) // mid.denominator, 2**m)
    return probe if probe > lo else probe + Fraction(1, 2**m)


def rplus_bracket(f: BooleanFunction, d: int, tol=DEFAULT_TOL) -> ApproxBracket:
    """Bisection on eps over [0, 1] for the least feasible error.

    Feasibility is upward closed in eps, so bisection is sound.  On a
    feasible probe, ``hi`` drops to the witness's actual error (which can be
    well below the probe).
    """
    tol = to_rational(tol)
    if tol <= 0:
        raise ValueError("tol > 0 required")
    system = _RplusSystem(f, d)
    basis = system.basis
    out = system.solve(Fraction(0))
    solves = 1
    if isinstance(out, Feasible):
        p, q = _split_witness(f, basis, out.point)
        br = ApproxBracket(f.name, d, Fraction(0), Fraction(0), p, q, None, tol, solves)
        _check(br, f)
        return br
    lo, lo_cert = Fraction(0), out.certificate
    hi = Fraction(1)
    p, q = Polynomial(f.n), Polynomial.constant(f.n, 1)
    while hi - lo > tol:
        mid = _dyadic_midpoint(lo, hi)
        out = system.solve(mid)
        solves += 1
        if isinstance(out, Feasible):
            p, q = _split_witness(f, basis, out.point)
            hi = witness_error(f, p, q)
        else:
            lo, lo_cert = mid, out.certificate
    br = ApproxBracket(f.name, d, lo, hi, p, q, lo_cert, tol, solves)
    _check(br, f)
    return br


def _check(br: ApproxBracket, f: BooleanFunction) -> None:
    if not verify_bracket(br, f):
        raise CertificateError(f"bracket for {f.name} at degree {br.degree} failed verification")


def rplus_sign_grid(N: int, d: int, tol=DEFAULT_TOL) -> ApproxBracket:
    """Bracket for R+({+-1,...,+-N}, d)."""
    if d < 0:
        raise ValueError("d >= 0 required")
    return rplus_bracket(sign_grid(N), d, tol)


@dataclass
class RdegResult:
    """Least d <= dmax for which error eps is achieved by some degree-d p/q.

    This equals min{d : R+(f, d) <= eps} whenever the infimum at that degree
    is attained; otherwise it is an upper bound on it.
    """

    function_id: str
    eps: Fraction
    degree: int
    p: Polynomial
    q: Polynomial

    def to_json(self) -> dict:
        return {
            "type": "rdeg",
            "function": self.function_id,
            "eps": _frac(self.eps),
            "degree": self.degree,
            "attained": True,
            "witness": {"p": self.p.to_json(), "q": self.q.to_json()},
        }


def rdeg(f: BooleanFunction, eps, dmax: int) -> RdegResult:
    eps = to_rational(eps)
    if not 0 < eps < 1:
        raise ValueError("need 0 < eps < 1")
    for d in range(dmax + 1):
        system = _RplusSystem(f, d)
        out = system.solve(eps)
        if isinstance(out, Feasible):
            p, q = _split_witness(f, system.basis, out.point)
            return RdegResult(f.name, eps, d, p, q)
    raise ExceedsDmax(dmax)


def rplus_relation_check(f: BooleanFunction, d: int, tol=DEFAULT_TOL) -> bool:
    """hi(2d) <= hi(d) + 2 tol, the R+ consequence of R+(f,2d) <= R(f,d) <= R+(f,d)."""
    tol = to_rational(tol)
    return rplus_bracket(f, 2 * d, tol).hi <= rplus_bracket(f, d, tol).hi + 2 * tol


def lift_symmetric_bracket(br: ApproxBracket, F: BooleanFunction, blocks) -> ApproxBracket:
    """Carry a bracket for ``block_symmetrize(F, blocks)`` back to the cube of F.

    The witness is composed with the block weights ``t_b = sum_{i in b} x_i``;
    the Farkas vector is spread uniformly over each weight class.  Both are
    then re-verified exactly against the cube LP, so the returned bracket
    does not rely on the symmetrization argument.
    """
    from math import comb

    from .boolfn import block_symmetrize

    grid_f = block_symmetrize(F, blocks)
    n = F.n
    starts = [sum(blocks[:b]) for b in range(len(blocks))]
    sums = []
    for start, size in zip(starts, blocks):
        s = Polynomial(n)
        for j in range(start, start + size):
            s = s + Polynomial.variable(n, j)
        sums.append(s)

    def compose(poly: Polynomial) -> Polynomial:
        out = Polynomial(n)
        for e, c in poly.terms.items():
            term = Polynomial.constant(n, c)
            for b, k in enumerate(e):
                for _ in range(k):
                    term = (term * sums[b]).multilinear()
            out = out + term
        return out

    p, q = compose(br.p), compose(br.q)
    cert = None
    if br.lo_certificate is not None:
        idx = np.arange(len(F), dtype=np.int64)
        cell = np.zeros(len(F), dtype=np.int64)
        weights = []
        stride = 1
        for start, size in zip(starts, blocks):
            w = np.zeros(len(F), dtype=np.int64)
            for j in range(start, start + size):
                w += (idx >> j) & 1
            weights.append(w)
            cell += stride * w
            stride *= size + 1
        orbit = np.ones(len(F), dtype=object)
        for w, size in zip(weights, blocks):
            orbit = orbit * np.array([comb(size, int(t)) for t in w], dtype=object)
        y = [Fraction(0)] * (3 * len(F))
        grid_y = br.lo_certificate
        for x in range(len(F)):
            g = int(cell[x])
            for r in range(3):
                v = grid_y[3 * g + r]
                if v:
                    y[3 * x + r] = v / orbit[x]
        cert = tuple(y)
    if len(grid_f) != len(br.lo_certificate or ()) // 3 and br.lo_certificate is not None:
        raise ValueError("bracket was not computed on the symmetrized grid of F")
    lifted = ApproxBracket(F.name, br.degree, br.lo, br.hi, p, q, cert, br.tol, 0)
    _check(lifted, F)
    return lifted
