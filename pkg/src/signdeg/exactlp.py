"""Exact rational linear algebra and LP feasibility with checkable certificates.

Rationals are :class:`fractions.Fraction` (always gcd-reduced, positive
denominator).  Matrices are lists of rows, vectors are lists.

Feasibility of ``A v >= b`` (``v`` free) is decided through its Farkas
alternative ``y >= 0, A^T y = 0, b^T y = 1``: a phase-1 simplex runs on that
system (largest-coefficient entering column with a lexicographic ratio test,
or Bland's rule on request; both exclude cycling).  A zero phase-1 optimum yields the Farkas vector
``y``; a positive optimum yields simplex multipliers from which a feasible
point ``v`` is read off.  The alternative has one row per variable (plus one),
which is far smaller than the constraint count in every formulation used by
this package.  The tableau is kept in integers, each row scaled by a positive
factor and divided by its content gcd after every pivot.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence, Union

import numpy as np

Rational = Fraction
RationalVector = list
RationalMatrix = list

__all__ = [
    "Rational",
    "SingularMatrix",
    "LinearProgram",
    "Feasible",
    "Infeasible",
    "FeasibilityOutcome",
    "CertificateError",
    "to_rational",
    "mat_vec",
    "solve_linear_system",
    "is_strictly_diagonally_dominant",
    "check_feasible",
    "verify_outcome",
]


class SingularMatrix(ArithmeticError):
    """Raised when a linear system has no unique solution."""


class CertificateError(AssertionError):
    """A feasibility witness or Farkas vector failed exact verification."""


def to_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"a/b"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact arithmetic")
    return Fraction(value)


def mat_vec(A: Sequence[Sequence], x: Sequence) -> list:
    return [sum((a * v for a, v in zip(row, x)), Fraction(0)) for row in A]


# --------------------------------------------------------------------------
# Linear systems


def _integer_rows(A, b):
    """Rows of [A | b] scaled to integers (row scaling keeps the solution set)."""
    rows = []
    for row, rhs in zip(A, b):
        entries = [to_rational(a) for a in row] + [to_rational(rhs)]
        den = lcm(*(e.denominator for e in entries))
        rows.append([e.numerator * (den // e.denominator) for e in entries])
    return rows


def solve_linear_system(A: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve ``A x = b`` exactly.

    Fraction-free (Bareiss) elimination on the integer-scaled augmented
    matrix; the pivot is the first nonzero entry of the column at or below
    the diagonal.  Raises :class:`SingularMatrix` if ``A`` is singular.
    """
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("matrix must be square")
    if len(b) != n:
        raise ValueError("right-hand side has wrong length")
    if n == 0:
        return []
    M = _integer_rows(A, b)
    prev = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k] != 0), None)
        if piv is None:
            raise SingularMatrix(f"no pivot in column {k}")
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
        pk = M[k]
        akk = pk[k]
        for i in range(k + 1, n):
            row = M[i]
            aik = row[k]
            # exact division by the previous pivot (Sylvester's identity)
            M[i] = [0] * (k + 1) + [
                (akk * row[j] - aik * pk[j]) // prev for j in range(k + 1, n + 1)
            ]
        prev = akk
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        row = M[i]
        acc = Fraction(row[n])
        for j in range(i + 1, n):
            if row[j]:
                acc -= row[j] * x[j]
        x[i] = acc / row[i]
    return x


def is_strictly_diagonally_dominant(A: Sequence[Sequence]) -> bool:
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("matrix must be square")
    for i, row in enumerate(A):
        off = sum((abs(to_rational(a)) for j, a in enumerate(row) if j != i), Fraction(0))
        if not abs(to_rational(row[i])) > off:
            return False
    return True


# --------------------------------------------------------------------------
# LP feasibility


@dataclass(frozen=True)
class LinearProgram:
    """Constraints ``A[i] . v >= b[i]`` over a free vector ``v``."""

    A: tuple
    b: tuple
    nvars: int

    def __init__(self, A, b, nvars: int | None = None):
        A = tuple(tuple(to_rational(a) for a in row) for row in A)
        b = tuple(to_rational(v) for v in b)
        if len(A) != len(b):
            raise ValueError("A and b disagree on the number of constraints")
        if nvars is None:
            if not A:
                raise ValueError("nvars is required for an empty constraint set")
            nvars = len(A[0])
        if any(len(row) != nvars for row in A):
            raise ValueError("all constraint rows must have the same variable count")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "nvars", nvars)

    @property
    def nconstraints(self) -> int:
        return len(self.A)


@dataclass(frozen=True)
class Feasible:
    point: tuple

    @property
    def feasible(self) -> bool:
        return True


@dataclass(frozen=True)
class Infeasible:
    """Farkas vector ``y``: ``y >= 0``, ``y^T A = 0``, ``y^T b > 0``."""

    certificate: tuple

    @property
    def feasible(self) -> bool:
        return False


FeasibilityOutcome = Union[Feasible, Infeasible]


def verify_outcome(lp: LinearProgram, outcome: FeasibilityOutcome) -> bool:
    """Independent exact check of a feasibility outcome."""
    if isinstance(outcome, Feasible):
        v = outcome.point
        if len(v) != lp.nvars:
            return False
        return all(
            sum((a * x for a, x in zip(row, v)), Fraction(0)) >= rhs
            for row, rhs in zip(lp.A, lp.b)
        )
    if isinstance(outcome, Infeasible):
        y = outcome.certificate
        if len(y) != lp.nconstraints or any(v < 0 for v in y):
            return False
        for j in range(lp.nvars):
            if sum((yi * row[j] for yi, row in zip(y, lp.A) if yi), Fraction(0)) != 0:
                return False
        return sum((yi * rhs for yi, rhs in zip(y, lp.b) if yi), Fraction(0)) > 0
    return False


class _Tableau:
    """Integer tableau as an object array; each row is divided by its content gcd after a pivot."""

    def __init__(self, rows: list[list[int]]):
        self.T = np.array(rows, dtype=object)

    def row(self, i: int) -> list[int]:
        return self.T[i].tolist()

    def col(self, j: int) -> list[int]:
        return self.T[:, j].tolist()

    def get(self, i: int, j: int) -> int:
        return self.T[i, j]

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        prow = T[r].copy()
        col = T[:, j].copy()
        col[r] = 0
        touched = np.flatnonzero(col != 0)
        if touched.size:
            T[touched] = _normalize_rows(T[touched] * prow[j] - col[touched][:, None] * prow[None, :])
        T[r] = _normalize_rows(prow[None, :])[0]


def _normalize_rows(M: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(M, axis=1)
    g[g == 0] = 1
    return M // g[:, None]


def _phase1(tab, ncols: int, art: int, basis: list[int], rule: str = "lex") -> None:
    """Minimise the phase-1 objective in place.

    Rows ``0..len(basis)-1`` encode ``sum_j T[i, j] x_j = T[i, -1]`` with
    ``T[i, basis[i]] > 0``; the last row is the objective
    ``T[-1, ncols] * w + sum_j T[-1, j] x_j = T[-1, -1]`` with a positive
    w-coefficient and zeros on basic columns.  Columns ``art:ncols`` started
    as the identity basis.

    ``rule="lex"``: largest-coefficient entering column, lexicographic ratio
    test over ``(rhs, columns art:)``.  ``rule="bland"``: Bland's rule.  Both
    exclude cycling.
    """
    if rule not in ("lex", "bland"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    lex = rule == "lex"
    nr = len(basis)
    while True:
        reduced = tab.row(nr)[:ncols]
        enter, best = None, 0
        for j, v in enumerate(reduced):
            if v > best:
                enter, best = j, v
                if not lex:
                    break
        if enter is None:
            return
        col = tab.col(enter)
        rhs = tab.col(-1)
        leave = None
        for i in range(nr):
            a = col[i]
            if a <= 0:
                continue
            if leave is None:
                leave = i
                continue
            b = col[leave]
            lhs, rhs_ = rhs[i] * b, rhs[leave] * a
            if lhs < rhs_:
                leave = i
            elif lhs == rhs_:
                if lex:
                    for c in range(art, ncols):
                        lhs, rhs_ = tab.get(i, c) * b, tab.get(leave, c) * a
                        if lhs != rhs_:
                            if lhs < rhs_:
                                leave = i
                            break
                elif basis[i] < basis[leave]:
                    leave = i
        if leave is None:  # pragma: no cover - phase-1 objective is bounded below
            raise RuntimeError("phase-1 objective unbounded")
        tab.pivot(leave, enter)
        basis[leave] = enter


def check_feasible(lp: LinearProgram, rule: str = "lex") -> FeasibilityOutcome:
    """Decide feasibility of ``A v >= b`` exactly.

    The returned witness or Farkas vector is re-verified with
    :func:`verify_outcome` before returning.
    """
    m, k = lp.nconstraints, lp.nvars
    if m == 0:
        outcome: FeasibilityOutcome = Feasible(tuple(Fraction(0) for _ in range(k)))
        _assert_verified(lp, outcome)
        return outcome

    # Alternative system G y = e, y >= 0 with G = [A^T ; b^T], e = (0,..,0,1),
    # scaled to integers.  Columns: y_0..y_{m-1}, one artificial per row, w, rhs.
    r = k + 1
    scale = lcm(*(a.denominator for row in lp.A for a in row), *(v.denominator for v in lp.b))
    width = m + r + 2
    rows = [[0] * width for _ in range(r + 1)]
    for jj, row in enumerate(lp.A):
        for i, a in enumerate(row):
            if a:
                rows[i][jj] = int(a * scale)
    for jj, v in enumerate(lp.b):
        if v:
            rows[k][jj] = int(v * scale)
    for i in range(r):
        rows[i][m + i] = 1
    rows[k][-1] = scale
    # w = sum a_i with a_i = e_i scale - (G y)_i:  w + sum_j (sum_i G_ij) y_j = scale
    obj = rows[r]
    for j in range(m):
        obj[j] = sum(rows[i][j] for i in range(r))
    obj[m + r] = 1
    obj[-1] = scale
    basis = [m + i for i in range(r)]
    tab = _Tableau(rows)

    _phase1(tab, m + r, m, basis, rule)

    objrow = tab.row(r)
    w_coef, w_num = objrow[m + r], objrow[-1]
    if w_num == 0:
        y = [Fraction(0)] * m
        rhs = tab.col(-1)
        for i, col in enumerate(basis):
            if col < m:
                y[col] = Fraction(rhs[i], tab.get(i, col))
        outcome = Infeasible(tuple(y))
    else:
        # simplex multipliers u_i = 1 + obj[a_i]/obj[w]; u_k is positive when w > 0
        u = [1 + Fraction(objrow[m + i], w_coef) for i in range(r)]
        point = tuple(-u[i] / u[k] for i in range(k))
        outcome = Feasible(point)
    _assert_verified(lp, outcome)
    return outcome


def _assert_verified(lp, outcome):
    if not verify_outcome(lp, outcome):
        raise CertificateError(f"exact verification failed for {type(outcome).__name__}")
