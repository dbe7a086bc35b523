"""Boolean functions on finite integer point sets, halfspaces and polynomials.

Value convention: functions take values in {-1, +1} and **-1 means true**.
So ``AND`` of two functions is ``sign(1 + f + g)`` and ``MAJ_n(x) = -1``
exactly when more than half the bits are set.

Cube domains ``{0,1}^n`` are tagged and never materialised unless asked:
point index ``i`` has ``x_{j+1} = (i >> j) & 1``.  Truth tables on cubes are
stored bit-packed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import comb, lcm, prod
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .exactlp import to_rational

__all__ = [
    "PointSet",
    "BooleanFunction",
    "Halfspace",
    "Polynomial",
    "VanishingForm",
    "NotBlockSymmetric",
    "subset_mask",
    "mask_to_subset",
    "halfspace_to_function",
    "conjunction",
    "majority",
    "parity",
    "constant",
    "parity_char",
    "monomial_basis",
    "monomial_matrix",
    "symmetrize_polynomial",
    "block_symmetrize",
    "binary_entropy_bound_check",
]

MAX_CUBE_DIM = 30


class VanishingForm(ValueError):
    def __init__(self, point):
        super().__init__(f"linear form vanishes at {point}")
        self.point = point


class NotBlockSymmetric(ValueError):
    def __init__(self, first, second):
        super().__init__(f"values differ on the same weight class: {first} vs {second}")
        self.witness = (first, second)


def subset_mask(indices: Iterable[int]) -> int:
    """Bitmask of a subset of {1,...,n} given by 1-based indices."""
    mask = 0
    for i in indices:
        if i < 1:
            raise ValueError("subset elements are 1-based")
        mask |= 1 << (i - 1)
    return mask


def mask_to_subset(mask: int) -> tuple[int, ...]:
    return tuple(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)


# --------------------------------------------------------------------------
# Point sets


class PointSet:
    """An ordered set of distinct points in Z^dim, optionally the full cube."""

    def __init__(self, points: Iterable[Sequence[int]] | None = None, *, dim: int | None = None,
                 cube: bool = False):
        if cube:
            if dim is None or not 0 <= dim <= MAX_CUBE_DIM:
                raise ValueError(f"cube dimension must be in [0, {MAX_CUBE_DIM}]")
            self.dim = dim
            self.is_cube = True
            self._points = None
            return
        pts = tuple(tuple(int(c) for c in p) for p in points)
        if dim is None:
            if not pts:
                raise ValueError("dim is required for an empty point set")
            dim = len(pts[0])
        if any(len(p) != dim for p in pts):
            raise ValueError("points have inconsistent dimension")
        if len(set(pts)) != len(pts):
            raise ValueError("points must be distinct")
        self.dim = dim
        self.is_cube = False
        self._points = pts

    @classmethod
    def cube(cls, n: int) -> "PointSet":
        return cls(dim=n, cube=True)

    @classmethod
    def grid(cls, sizes: Sequence[int]) -> "PointSet":
        """``{0..sizes[0]} x ... x {0..sizes[-1]}``, first coordinate fastest."""
        ranges = [range(s + 1) for s in sizes]
        pts = [tuple(reversed(p)) for p in itertools.product(*reversed(ranges))]
        return cls(pts, dim=len(sizes))

    @classmethod
    def line(cls, values: Iterable[int]) -> "PointSet":
        return cls([(v,) for v in values], dim=1)

    def __len__(self) -> int:
        return (1 << self.dim) if self.is_cube else len(self._points)

    @property
    def points(self) -> tuple:
        if self._points is None:
            n = self.dim
            self._points = tuple(
                tuple((i >> j) & 1 for j in range(n)) for i in range(1 << n)
            )
        return self._points

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i: int):
        if self.is_cube and self._points is None:
            return tuple((i >> j) & 1 for j in range(self.dim))
        return self.points[i]

    @cached_property
    def _index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    def index(self, point: Sequence[int]) -> int:
        point = tuple(int(c) for c in point)
        if self.is_cube:
            if len(point) != self.dim or any(c not in (0, 1) for c in point):
                raise KeyError(point)
            return sum(c << j for j, c in enumerate(point))
        return self._index[point]

    def __contains__(self, point) -> bool:
        try:
            self.index(point)
        except KeyError:
            return False
        return True

    def coordinate_values(self, j: int) -> list[int]:
        """Distinct values of coordinate ``j`` (0-based), sorted."""
        if self.is_cube:
            return [0, 1]
        return sorted({p[j] for p in self._points})

    def product(self, other: "PointSet") -> "PointSet":
        """Cartesian product; points are ``(x, y)``, x varying fastest."""
        if self.is_cube and other.is_cube:
            return PointSet.cube(self.dim + other.dim)
        pts = [x + y for y in other.points for x in self.points]
        return PointSet(pts, dim=self.dim + other.dim)

    def subset(self, indices: Iterable[int]) -> "PointSet":
        return PointSet([self[i] for i in indices], dim=self.dim)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        if self.is_cube and other.is_cube:
            return self.dim == other.dim
        return self.dim == other.dim and self.points == other.points

    def __hash__(self):
        return hash((self.dim, self.is_cube, None if self.is_cube else self._points))

    def __repr__(self) -> str:
        if self.is_cube:
            return f"PointSet.cube({self.dim})"
        return f"PointSet(<{len(self)} points in Z^{self.dim}>)"


# --------------------------------------------------------------------------
# Boolean functions


class BooleanFunction:
    """A {-1,+1}-valued function on a PointSet (-1 = true)."""

    def __init__(self, domain: PointSet, values, name: str = "f"):
        vals = np.asarray(values, dtype=np.int64)
        if vals.shape != (len(domain),):
            raise ValueError(f"expected {len(domain)} values, got shape {vals.shape}")
        if not np.all((vals == 1) | (vals == -1)):
            raise ValueError("values must be +1 or -1")
        self.domain = domain
        self.name = name
        if domain.is_cube:
            self._packed = np.packbits(vals == -1, bitorder="little")
            self._plain = None
        else:
            self._packed = None
            self._plain = vals.astype(np.int8)

    @property
    def n(self) -> int:
        return self.domain.dim

    @cached_property
    def values(self) -> np.ndarray:
        """Values as an int8 array in domain order."""
        if self._plain is not None:
            return self._plain
        bits = np.unpackbits(self._packed, count=len(self.domain), bitorder="little")
        return (1 - 2 * bits.astype(np.int8)).astype(np.int8)

    def __len__(self) -> int:
        return len(self.domain)

    def __call__(self, point) -> int:
        return int(self.values[self.domain.index(point)])

    def restrict(self, indices: Sequence[int]) -> "BooleanFunction":
        idx = list(indices)
        return BooleanFunction(self.domain.subset(idx), self.values[idx], name=f"{self.name}|sub")

    def is_constant(self) -> bool:
        v = self.values
        return bool(np.all(v == v[0])) if len(v) else True

    def __eq__(self, other) -> bool:
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.domain == other.domain and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"BooleanFunction({self.name!r}, {self.domain!r})"

    def to_json(self) -> dict:
        """Cube domains store ``n`` only; other domains list their points."""
        out = {"type": "boolean_function", "name": self.name, "values": self.values.tolist()}
        if self.domain.is_cube:
            out["n"] = self.n
        else:
            out["points"] = [list(p) for p in self.domain.points]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "BooleanFunction":
        if "points" in data:
            pts = [tuple(p) for p in data["points"]]
            dom = PointSet(pts, dim=len(pts[0]) if pts else int(data.get("dim", 0)))
        else:
            dom = PointSet.cube(int(data["n"]))
        return cls(dom, data["values"], name=data.get("name", "f"))


def _cube_function(n: int, values, name: str) -> BooleanFunction:
    return BooleanFunction(PointSet.cube(n), values, name=name)


def majority(n: int) -> BooleanFunction:
    if n < 1:
        raise ValueError("n >= 1 required")
    weight = _kernels.subset_sums(np.ones(n, dtype=np.int64))
    return _cube_function(n, np.where(2 * weight > n, -1, 1), f"maj:{n}")


def parity(n: int) -> BooleanFunction:
    """chi_{1..n}: -1 exactly when an odd number of bits are set."""
    return _cube_function(n, _kernels.character_table(n, (1 << n) - 1), f"parity:{n}")


def constant(n: int, value: int = 1) -> BooleanFunction:
    return _cube_function(n, np.full(1 << n, value), f"const{value:+d}:{n}")


def parity_char(S, x: Sequence[int]) -> int:
    """chi_S(x) = (-1)^(sum of x_i over i in S); S is a bitmask or 1-based indices."""
    mask = S if isinstance(S, int) else subset_mask(S)
    total = sum(x[j] for j in range(len(x)) if mask >> j & 1)
    return -1 if total % 2 else 1


def conjunction(f: BooleanFunction, g: BooleanFunction) -> BooleanFunction:
    """(f AND g)(x, y) = sign(1 + f(x) + g(y)) on the product domain."""
    dom = f.domain.product(g.domain)
    fv = f.values.astype(np.int64)
    gv = g.values.astype(np.int64)
    # product order: x fastest, so value[ix + iy*|X|]
    table = 1 + fv[np.newaxis, :] + gv[:, np.newaxis]
    return BooleanFunction(dom, np.sign(table).reshape(-1), name=f"conj:{f.name},{g.name}")


# --------------------------------------------------------------------------
# Halfspaces


@dataclass(frozen=True)
class Halfspace:
    """sign(c0 + c1 x1 + ... + cn xn) with integer coefficients.

    A half-integer offset such as ``1/2 + sum w_i x_i`` is stored doubled:
    ``(1, 2 w_1, ..., 2 w_n)``.
    """

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("at least the constant coefficient is required")

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def with_half_offset(cls, weights: Sequence[int], offset: int = 0) -> "Halfspace":
        """sign(1/2 + offset + sum w_i x_i), stored with doubled coefficients."""
        return cls((1 + 2 * offset, *(2 * w for w in weights)))

    def form_values(self, X: PointSet) -> np.ndarray:
        """Exact values of the linear form at every point (object array if large)."""
        c0, *c = self.coeffs
        if X.dim != self.n:
            raise ValueError(f"halfspace has {self.n} variables, domain has {X.dim}")
        if X.is_cube:
            bound = sum(abs(v) for v in self.coeffs)
            if bound < _kernels.INT64_SAFE:
                return _kernels.subset_sums(np.asarray(c, dtype=np.int64)) + c0
            out = np.zeros(1 << X.dim, dtype=object)
            for j, w in enumerate(c):
                half = 1 << j
                out[half : 2 * half] = out[:half] + w
            return out + c0
        return np.array([c0 + sum(a * x for a, x in zip(c, p)) for p in X.points], dtype=object)

    def linear_polynomial(self) -> "Polynomial":
        terms = {(0,) * self.n: Fraction(self.coeffs[0])}
        for j, c in enumerate(self.coeffs[1:]):
            e = [0] * self.n
            e[j] = 1
            terms[tuple(e)] = Fraction(c)
        return Polynomial(self.n, terms)

    def to_json(self) -> dict:
        return {"type": "halfspace", "coeffs": list(self.coeffs)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Halfspace":
        return cls(tuple(int(c) for c in data["coeffs"]))


def halfspace_to_function(h: Halfspace, X: PointSet, name: str | None = None) -> BooleanFunction:
    vals = h.form_values(X)
    zero = np.flatnonzero(vals == 0)
    if zero.size:
        raise VanishingForm(X[int(zero[0])])
    signs = np.where(vals > 0, 1, -1).astype(np.int64)
    return BooleanFunction(X, signs, name=name or "halfspace:" + ",".join(map(str, h.coeffs)))


# --------------------------------------------------------------------------
# Polynomials


class Polynomial:
    """Sparse polynomial: exponent tuple -> Fraction, zero terms never stored."""

    __slots__ = ("nvars", "terms", "degree")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != nvars or any(v < 0 for v in e):
                raise ValueError(f"bad exponent vector {e} for {nvars} variables")
            c = to_rational(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
                if not clean[e]:
                    del clean[e]
        self.terms = clean
        self.degree = max((sum(e) for e in clean), default=0)

    @classmethod
    def constant(cls, nvars: int, c) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, j: int) -> "Polynomial":
        e = [0] * nvars
        e[j] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def from_basis(cls, nvars: int, basis: Sequence[tuple], coeffs: Sequence) -> "Polynomial":
        return cls(nvars, {e: c for e, c in zip(basis, coeffs) if c})

    def __call__(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            total += c * prod(x**k for x, k in zip(point, e) if k)
        return total

    def evaluate_on(self, X: PointSet) -> list[Fraction]:
        """Exact values at every point of X (integer arithmetic with one shared denominator)."""
        if not self.terms:
            return [Fraction(0)] * len(X)
        basis = list(self.terms)
        den = lcm(*(c.denominator for c in self.terms.values()))
        nums = [int(self.terms[e] * den) for e in basis]
        mat = monomial_matrix(X, basis)
        return [Fraction(sum(a * m for a, m in zip(nums, row)), den) for row in mat]

    def _binary(self, other, op):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, other)
        if other.nvars != self.nvars:
            raise ValueError("variable counts differ")
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = op(terms.get(e, Fraction(0)), c)
        return Polynomial(self.nvars, terms)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return (-self)._binary(other, lambda a, b: a + b)

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = to_rational(other)
            return Polynomial(self.nvars, {e: c * v for e, v in self.terms.items()})
        if other.nvars != self.nvars:
            raise ValueError("variable counts differ")
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial.constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "Polynomial(0)"
        parts = []
        for e in sorted(self.terms, key=_grlex_key):
            mono = "*".join(f"x{j + 1}" + (f"^{k}" if k > 1 else "") for j, k in enumerate(e) if k)
            parts.append(f"{self.terms[e]}" + (f"*{mono}" if mono else ""))
        return "Polynomial(" + " + ".join(parts) + ")"

    def embed(self, total_vars: int, offset: int) -> "Polynomial":
        """The same polynomial in variables ``offset .. offset+nvars-1`` of a larger ring."""
        pad_l, pad_r = (0,) * offset, (0,) * (total_vars - offset - self.nvars)
        return Polynomial(total_vars, {pad_l + e + pad_r: c for e, c in self.terms.items()})

    def multilinear(self, coords: Iterable[int] | None = None) -> "Polynomial":
        """Reduce exponents with x^2 = x on the given (default: all) coordinates."""
        idx = set(range(self.nvars)) if coords is None else set(coords)
        out: dict = {}
        for e, c in self.terms.items():
            e2 = tuple(min(v, 1) if j in idx else v for j, v in enumerate(e))
            out[e2] = out.get(e2, Fraction(0)) + c
        return Polynomial(self.nvars, out)

    def to_json(self) -> dict:
        return {
            "type": "polynomial",
            "nvars": self.nvars,
            "terms": [[list(e), _frac_str(self.terms[e])] for e in sorted(self.terms, key=_grlex_key)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Polynomial":
        return cls(int(data["nvars"]), {tuple(e): Fraction(c) for e, c in data["terms"]})


def _frac_str(x: Fraction) -> str:
    x = to_rational(x)
    return f"{x.numerator}/{x.denominator}"


def _grlex_key(e: tuple) -> tuple:
    return (sum(e), tuple(-v for v in e))


# --------------------------------------------------------------------------
# Monomial bases


def _exponent_caps(X: PointSet) -> list[int]:
    # x_j^r is a combination of lower powers on X when coordinate j takes r values
    if X.is_cube:
        return [1] * X.dim
    return [max(len(X.coordinate_values(j)) - 1, 0) for j in range(X.dim)]


def monomial_basis(X: PointSet, d: int) -> list[tuple]:
    """Exponent vectors of total degree <= d, reduced on X, in graded-lex order."""
    if d < 0:
        raise ValueError("d >= 0 required")
    caps = _exponent_caps(X)
    out = []
    for e in itertools.product(*(range(min(c, d) + 1) for c in caps)):
        if sum(e) <= d:
            out.append(e)
    return sorted(out, key=_grlex_key)


def monomial_matrix(X: PointSet, basis: Sequence[tuple]) -> list[list[int]]:
    """Integer matrix of monomial values: row per point, column per exponent vector."""
    if X.is_cube:
        idx = np.arange(len(X), dtype=np.int64)
        cols = []
        for e in basis:
            if any(v > 0 for v in e):
                mask = sum(1 << j for j, v in enumerate(e) if v)
                cols.append(((idx & mask) == mask).astype(np.int64))
            else:
                cols.append(np.ones(len(X), dtype=np.int64))
        if not cols:
            return [[] for _ in range(len(X))]
        return np.stack(cols, axis=1).tolist()
    rows = []
    for p in X.points:
        rows.append([prod(x**k for x, k in zip(p, e) if k) for e in basis])
    return rows


# --------------------------------------------------------------------------
# Symmetrization


def _newton_interpolate(xs: Sequence[int], ys: Sequence[Fraction]) -> Polynomial:
    """Univariate interpolating polynomial through (xs, ys)."""
    n = len(xs)
    coef = [to_rational(y) for y in ys]
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - level])
    t = Polynomial.variable(1, 0)
    out = Polynomial.constant(1, coef[-1])
    for i in range(n - 2, -1, -1):
        out = out * (t - xs[i]) + coef[i]
    return out


def interpolate(xs: Sequence[int], ys: Sequence) -> Polynomial:
    return _newton_interpolate(list(xs), list(ys))


def symmetrize_polynomial(phi: Polynomial, n: int) -> Polynomial:
    """Univariate p with E_sigma[phi(sigma x)] = p(|x|) on {0,1}^n.

    A multilinear monomial of degree j averages over its orbit to
    e_j(x)/C(n, j) = C(|x|, j)/C(n, j); p is interpolated through t = 0..n.
    """
    if phi.nvars != n:
        raise ValueError("phi must have n variables")
    by_degree: dict[int, Fraction] = {}
    for e, c in phi.multilinear().terms.items():
        j = sum(e)
        by_degree[j] = by_degree.get(j, Fraction(0)) + c
    values = [
        sum((c * Fraction(comb(t, j), comb(n, j)) for j, c in by_degree.items()), Fraction(0))
        for t in range(n + 1)
    ]
    return _newton_interpolate(list(range(n + 1)), values)


def block_symmetrize(F: BooleanFunction, blocks: Sequence[int]) -> BooleanFunction:
    """Collapse F on {0,1}^{n1} x ... x {0,1}^{nk} to the weight grid {0..n1} x ... x {0..nk}.

    Blocks are consecutive coordinate ranges of the sizes given.  Raises
    NotBlockSymmetric with a witness pair of cube points if F is not constant
    on some class of block weights.
    """
    if not F.domain.is_cube:
        raise ValueError("block_symmetrize needs a cube domain")
    if sum(blocks) != F.n or any(b < 1 for b in blocks):
        raise ValueError("block sizes must be positive and sum to the cube dimension")
    idx = np.arange(len(F), dtype=np.int64)
    cell = np.zeros(len(F), dtype=np.int64)
    stride, start = 1, 0
    for size in blocks:
        mask = ((1 << size) - 1) << start
        weight = _kernels.subset_sums(np.ones(size, dtype=np.int64))[(idx & mask) >> start]
        cell += stride * weight
        stride *= size + 1
        start += size
    vals = F.values.astype(np.int64)
    ncells = stride
    first = np.full(ncells, -1, dtype=np.int64)
    # first cube index per cell, scanning in index order
    order = np.argsort(cell, kind="stable")
    cs = cell[order]
    starts = np.flatnonzero(np.r_[True, cs[1:] != cs[:-1]])
    first[cs[starts]] = order[starts]
    bad = np.flatnonzero(vals != vals[first[cell]])
    if bad.size:
        i = int(bad[0])
        j = int(first[cell[i]])
        raise NotBlockSymmetric(F.domain[j], F.domain[i])
    grid = PointSet.grid(blocks)
    return BooleanFunction(grid, vals[first], name=f"sym({F.name})")


# --------------------------------------------------------------------------
# Entropy bound


def binary_entropy_bound_check(n: int, k: int) -> bool:
    """Decide sum_{i<=k} C(n,i) <= 2^(H(k/n) n) exactly.

    2^(n H(k/n)) = n^n / (k^k (n-k)^(n-k)), so the comparison is between
    integers (with 0^0 = 1).
    """
    if not 0 <= k <= n // 2:
        raise ValueError("need 0 <= k <= floor(n/2)")
    lhs = sum(comb(n, i) for i in range(k + 1))
    return lhs * k**k * (n - k) ** (n - k) <= n**n
