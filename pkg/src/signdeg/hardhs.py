"""Random halfspaces, residue-class partitions and moment-matching distributions.

Pipeline: weights ``w`` -> partition of the cube by ``sum w_i x_i mod 2^{k+1}``
-> exhaustive check of the low-order Fourier spectrum of each class
indicator -> a distribution on every class whose low-degree moments agree
across classes -> reduction of (x, t)-polynomials to univariate ones.

Everything here is exact.  Class distributions are stored as integer weights
``u(x)`` over a shared integer total, so ``mu_s(x) = u(x) / total``.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm
from typing import Sequence

import numpy as np

from . import _kernels
from .boolfn import (
    BooleanFunction,
    Halfspace,
    PointSet,
    Polynomial,
    halfspace_to_function,
    interpolate,
    mask_to_subset,
)
from .exactlp import (
    SingularMatrix,
    is_strictly_diagonally_dominant,
    solve_linear_system,
    to_rational,
)

__all__ = [
    "WeightVector",
    "ResidueClassPartition",
    "SpectrumReport",
    "ZeroCorrelationCertificate",
    "ClassDistribution",
    "MomentMatchedFamily",
    "ReductionResult",
    "HypothesisViolated",
    "EmptyClass",
    "DegreeExceedsCutoff",
    "sample_weights",
    "build_partition",
    "partition_from_sets",
    "verify_spectrum_bounds",
    "zero_correlation_distribution",
    "build_moment_matched",
    "univariate_reduce",
    "canonical_linear_form",
    "random_reduction_polynomial",
    "build_hard_halfspace",
    "symmetrized_hard_function",
    "weight_groups",
    "hardness_report",
]

MAX_PARTITION_DIM = 22


class HypothesisViolated(ValueError):
    """A correlation or Gram-matrix hypothesis failed; ``margin`` is the excess."""

    def __init__(self, which: str, margin: Fraction, s: int | None = None):
        where = "" if s is None else f" (class {s})"
        super().__init__(f"{which} hypothesis violated by {margin}{where}")
        self.which = which
        self.margin = margin
        self.s = s


class EmptyClass(ValueError):
    def __init__(self, s: int):
        super().__init__(f"residue class {s} is empty")
        self.s = s


class DegreeExceedsCutoff(ValueError):
    def __init__(self, degree: int, cutoff: int):
        super().__init__(f"degree {degree} exceeds the moment cutoff {cutoff}")
        self.degree = degree
        self.cutoff = cutoff


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------------
# Weights and partitions


@dataclass(frozen=True)
class WeightVector:
    """Weights ``w_1..w_n`` in ``[0, 2^{k+1})``; ``seed`` is None for hand-built vectors."""

    n: int
    k: int
    weights: tuple
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if self.n < 1 or self.k < 0:
            raise ValueError("need n >= 1 and k >= 0")
        if len(self.weights) != self.n:
            raise ValueError("expected n weights")
        if any(not 0 <= w < self.modulus for w in self.weights):
            raise ValueError("weights must lie in [0, 2^(k+1))")

    @property
    def modulus(self) -> int:
        return 1 << (self.k + 1)

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "seed": self.seed, "weights": list(self.weights)}


def sample_weights(n: int, k: int, seed: int) -> WeightVector:
    """Uniform weights in ``[0, 2^{k+1})`` from numpy's SeedSequence.

    Weight ``i`` (0-based) is built from the uint64 words
    ``SeedSequence([seed, i]).generate_state(ceil((k+1)/64), uint64)``: word
    ``t`` supplies bits ``64t .. 64t+63`` (little-endian word order) and the
    low ``k+1`` bits are kept.  Each weight gets an independent stream, so a
    prefix of a longer vector does not depend on ``n``.
    """
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    bits = k + 1
    words = (bits + 63) // 64
    mask = (1 << bits) - 1
    out = []
    for i in range(n):
        state = np.random.SeedSequence([seed, i]).generate_state(words, dtype=np.uint64)
        value = 0
        for t, word in enumerate(state.tolist()):
            value |= int(word) << (64 * t)
        out.append(value & mask)
    return WeightVector(n, k, tuple(out), seed)


class ResidueClassPartition:
    """The cube split into classes ``X_s = {x : sum w_i x_i = s mod 2^{k+1}}``."""

    def __init__(self, weights: WeightVector, residues: np.ndarray):
        self.weights = weights
        self.residues = residues
        self._spectra: dict[int, np.ndarray] = {}

    @property
    def n(self) -> int:
        return self.weights.n

    @property
    def k(self) -> int:
        return self.weights.k

    @property
    def modulus(self) -> int:
        return self.weights.modulus

    def class_indices(self, s: int) -> np.ndarray:
        return np.flatnonzero(self.residues == s % self.modulus)

    def indicator(self, s: int) -> np.ndarray:
        """f_s as a 0/1 int64 table over the cube."""
        return (self.residues == s % self.modulus).astype(np.int64)

    def sizes(self) -> list[int]:
        return np.bincount(self.residues, minlength=self.modulus).tolist()

    def spectrum(self, s: int) -> np.ndarray:
        """``2^n f_s_hat(T)`` for every mask T (unnormalised WHT, int64)."""
        s %= self.modulus
        if s not in self._spectra:
            self._spectra[s] = _kernels.fwht(self.indicator(s))
        return self._spectra[s]

    def check_invariants(self) -> bool:
        """Re-derive every residue pointwise and check |X_s| = 2^n f_s_hat(empty)."""
        n, M = self.n, self.modulus
        idx = np.arange(1 << n, dtype=np.int64)
        total = np.zeros(1 << n, dtype=np.int64)
        for j, w in enumerate(self.weights.weights):
            total += ((idx >> j) & 1) * w
        if not np.array_equal(total % M, self.residues):
            return False
        if sum(self.sizes()) != 1 << n:
            return False
        return all(int(self.spectrum(s)[0]) == size for s, size in enumerate(self.sizes()))


def build_partition(w: WeightVector) -> ResidueClassPartition:
    if w.n > MAX_PARTITION_DIM:
        raise ValueError(f"partitions are limited to n <= {MAX_PARTITION_DIM}")
    if w.k > 60:
        raise ValueError("k <= 60 required for machine-integer residues")
    residues = _kernels.subset_sums(np.asarray(w.weights, dtype=np.int64), w.modulus)
    return ResidueClassPartition(w, residues)


def partition_from_sets(sets: Sequence[Sequence[int]], n: int) -> ResidueClassPartition:
    """Partition from sets S_0..S_k of 1-based coordinates: ``w_j = sum_i 2^i [j in S_i]``."""
    if not sets:
        raise ValueError("at least one set S_0 is required")
    weights = [0] * n
    for i, S in enumerate(sets):
        for j in S:
            if not 1 <= j <= n:
                raise ValueError(f"coordinate {j} outside 1..{n}")
            weights[j - 1] |= 1 << i
    return build_partition(WeightVector(n, len(sets) - 1, tuple(weights)))


# --------------------------------------------------------------------------
# Spectrum bounds


@dataclass
class SpectrumReport:
    n: int
    k: int
    eps: Fraction
    zeta: Fraction
    max_order: int  # floor(eps n)
    exponent: int  # ceil(zeta n); the bound is 2^-exponent
    worst: list  # per class: (deviation, mask)
    passed: bool

    @property
    def bound(self) -> Fraction:
        return Fraction(1, 1 << self.exponent)

    @property
    def worst_overall(self) -> tuple[Fraction, int, int]:
        s = max(range(len(self.worst)), key=lambda i: self.worst[i][0])
        return self.worst[s][0], s, self.worst[s][1]

    def to_json(self) -> dict:
        return {
            "type": "spectrum_report",
            "n": self.n,
            "k": self.k,
            "eps": _frac(self.eps),
            "zeta": _frac(self.zeta),
            "max_order": self.max_order,
            "exponent": self.exponent,
            "exponent_rounding": "ceil(zeta*n)",
            "per_class": [
                {"s": s, "deviation": _frac(dev), "subset": list(mask_to_subset(m))}
                for s, (dev, m) in enumerate(self.worst)
            ],
            "passed": self.passed,
        }


def _popcounts(n: int) -> np.ndarray:
    return _kernels.subset_sums(np.ones(n, dtype=np.int64))


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def verify_spectrum_bounds(p: ResidueClassPartition, eps, zeta) -> SpectrumReport:
    """Check ``|f_s_hat(T) - [T empty]/2^{k+1}| <= 2^-ceil(zeta n)`` for all s and |T| <= floor(eps n)."""
    eps, zeta = to_rational(eps), to_rational(zeta)
    if eps < 0 or zeta < 0:
        raise ValueError("eps and zeta must be nonnegative")
    n, M = p.n, p.modulus
    t_max = (eps * n).numerator // (eps * n).denominator
    exponent = _ceil(zeta * n)
    low = np.flatnonzero(_popcounts(n) <= t_max)
    target = np.zeros(low.shape[0], dtype=np.int64)
    target[low == 0] = 1 << n
    worst, passed = [], True
    for s in range(M):
        # deviation = |H_s[T] M - [T empty] 2^n| / (2^n M)
        dev = np.abs(p.spectrum(s)[low] * M - target)
        i = int(np.argmax(dev))
        num = int(dev[i])
        worst.append((Fraction(num, (1 << n) * M), int(low[i])))
        if num << exponent > (1 << n) * M:
            passed = False
    return SpectrumReport(n, p.k, eps, zeta, t_max, exponent, worst, passed)


# --------------------------------------------------------------------------
# Zero-correlation distributions


@dataclass
class ZeroCorrelationCertificate:
    gram: list  # M as Fractions
    correlations: list  # gamma
    alpha: list
    normalizer: Fraction  # c with mu(x) = c (1 - f(x) sum alpha_i chi_i(x))
    alpha_l1: Fraction

    def to_json(self, include_gram: bool = True) -> dict:
        out = {
            "gamma": [_frac(g) for g in self.correlations],
            "alpha": [_frac(a) for a in self.alpha],
            "normalizer": _frac(self.normalizer),
            "alpha_l1": _frac(self.alpha_l1),
        }
        if include_gram:
            out["gram"] = [[_frac(v) for v in row] for row in self.gram]
        return out


def _zero_correlation(fvals: np.ndarray, chi: np.ndarray, s: int | None = None):
    """Core construction on integer data.

    ``fvals``: +-1 int64 of length m; ``chi``: +-1 int64 of shape (m, r).
    Returns integer weights ``u`` (object array), their total, and the
    certificate.
    """
    m, r = chi.shape
    if m == 0:
        raise ValueError("empty domain")
    gram_int = (chi.T @ chi).tolist()  # m * <chi_i, chi_j>
    corr_int = (chi.T @ fvals).tolist()  # m * <f, chi_i>
    corr_sum = sum(abs(v) for v in corr_int)
    if 2 * corr_sum >= m:
        raise HypothesisViolated("correlation", Fraction(corr_sum, m) - Fraction(1, 2), s)
    for i, row in enumerate(gram_int):
        off = sum(abs(v) for j, v in enumerate(row) if j != i)
        if 2 * off > m:
            raise HypothesisViolated("gram", Fraction(off, m) - Fraction(1, 2), s)
    gram = [[Fraction(v, m) for v in row] for row in gram_int]
    gamma = [Fraction(v, m) for v in corr_int]
    if not is_strictly_diagonally_dominant(gram):  # pragma: no cover - implied by the checks above
        raise AssertionError("dominance must follow from the gram hypothesis")
    try:
        alpha = solve_linear_system(gram_int, corr_int)
    except SingularMatrix as exc:  # pragma: no cover - Gershgorin
        raise AssertionError("diagonally dominant matrix reported singular") from exc
    alpha_l1 = sum((abs(a) for a in alpha), Fraction(0))
    if not alpha_l1 < 1:
        raise AssertionError(f"sum |alpha| = {alpha_l1} is not below 1")
    den = lcm(1, *(a.denominator for a in alpha))
    a_int = np.array([int(a * den) for a in alpha] or [0], dtype=object)[:r]
    combo = chi.astype(object) @ a_int if r else np.zeros(m, dtype=object)
    u = den - fvals.astype(object) * combo
    total = int(u.sum())
    if total <= 0 or any(v < 0 for v in u.tolist()):
        raise AssertionError("distribution weights must be nonnegative with positive total")
    resid = chi.T.astype(object) @ (u * fvals.astype(object)) if r else []
    if any(v != 0 for v in list(resid)):
        raise AssertionError("correlations did not vanish")
    cert = ZeroCorrelationCertificate(gram, gamma, alpha, Fraction(den, total), alpha_l1)
    return u, total, cert


def zero_correlation_distribution(X: PointSet, f: BooleanFunction, chis: Sequence[Sequence[int]]):
    """A distribution mu on X with E_mu[f chi_i] = 0 for every i.

    Inner products are normalised by |X|.  Requires
    ``sum_i |<f, chi_i>| < 1/2`` and ``sum_{j != i} |<chi_i, chi_j>| <= 1/2``
    for every i; both are checked exactly and raise HypothesisViolated.  The
    construction is ``mu(x) = c (1 - f(x) sum_i alpha_i chi_i(x))`` with
    ``M alpha = gamma``.  Returns ``(mu, certificate)`` with mu a list of
    Fractions in the order of X.
    """
    if f.domain != X:
        raise ValueError("f must be defined on X")
    m = len(X)
    chi = np.array([list(c) for c in chis], dtype=np.int64).reshape(len(chis), m).T
    if chi.size and not np.all(np.abs(chi) == 1):
        raise ValueError("characters must be +-1 valued")
    u, total, cert = _zero_correlation(f.values.astype(np.int64), chi)
    return [Fraction(int(v), total) for v in u.tolist()], cert


# --------------------------------------------------------------------------
# Moment matching


@dataclass
class ClassDistribution:
    s: int
    points: np.ndarray  # cube indices of X_s
    weights: np.ndarray  # object array, u(x) >= 0
    total: int
    certificate: ZeroCorrelationCertificate

    def mu(self) -> dict[int, Fraction]:
        return {int(i): Fraction(int(v), self.total) for i, v in zip(self.points, self.weights)}

    def cube_table(self, n: int) -> np.ndarray:
        out = np.zeros(1 << n, dtype=object)
        out[:] = 0
        out[self.points] = self.weights
        return out


def _family_masks(n: int, cutoff: int) -> list[int]:
    out = []
    for size in range(1, cutoff + 1):
        for combo in itertools.combinations(range(n), size):
            out.append(sum(1 << j for j in combo))
    return out


@dataclass
class MomentMatchedFamily:
    partition: ResidueClassPartition
    cutoff: int
    family: tuple  # masks of S with 1 <= |S| <= cutoff
    classes: list  # ClassDistribution per residue
    _moments: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.partition.n

    def moment_table(self, s: int) -> dict[int, Fraction]:
        """E_{mu_s}[prod_{j in U} x_j] for every mask U with |U| <= cutoff."""
        s %= self.partition.modulus
        if s not in self._moments:
            c = self.classes[s]
            sums = _kernels.superset_sums(c.cube_table(self.n))
            masks = [0, *self.family]
            self._moments[s] = {U: Fraction(int(sums[U]), c.total) for U in masks}
        return self._moments[s]

    def common_moment(self, mask: int) -> Fraction:
        values = {self.moment_table(s)[mask] for s in range(self.partition.modulus)}
        if len(values) != 1:
            raise AssertionError(f"moments of monomial {mask_to_subset(mask)} differ across classes")
        return values.pop()

    def moments_agree(self) -> bool:
        tables = [self.moment_table(s) for s in range(self.partition.modulus)]
        return all(t == tables[0] for t in tables[1:])

    def spectra_vanish(self) -> bool:
        """mu_s_hat(S) = 0 for S in the family and mu_s_hat(empty) = 2^-n, for every s."""
        for c in self.classes:
            W = _kernels.fwht(c.cube_table(self.n))
            if W[0] != c.total or any(W[S] != 0 for S in self.family):
                return False
        return True

    def verify(self) -> dict[str, bool]:
        """Every invariant, computed from the stored weights alone."""
        support = all(
            np.array_equal(c.points, self.partition.class_indices(c.s)) for c in self.classes
        )
        nonneg = all(c.total > 0 and all(v >= 0 for v in c.weights.tolist()) for c in self.classes)
        alpha = all(c.certificate.alpha_l1 < 1 for c in self.classes)
        moments = self.moments_agree()
        spectra = self.spectra_vanish()
        return {
            "support": support,
            "nonnegative": nonneg,
            "alpha_l1_below_1": alpha,
            "moments_agree": moments,
            "spectra_vanish": spectra,
            "formulations_agree": moments == spectra,
        }

    def to_json(self, include_gram: bool = False) -> dict:
        return {
            "type": "moment_matched_family",
            "weights": self.partition.weights.to_json(),
            "cutoff": self.cutoff,
            "family": [list(mask_to_subset(m)) for m in self.family],
            "classes": [
                {
                    "s": c.s,
                    "total": str(c.total),
                    "points": c.points.tolist(),
                    "weights": [str(v) for v in c.weights.tolist()],
                    "certificate": c.certificate.to_json(include_gram),
                }
                for c in self.classes
            ],
        }


def build_moment_matched(p: ResidueClassPartition, cutoff: int | None = None) -> MomentMatchedFamily:
    """One zero-correlation distribution per class, with f = 1 on X_s.

    ``cutoff`` defaults to k.  Raises EmptyClass or HypothesisViolated.
    """
    cutoff = p.k if cutoff is None else cutoff
    if cutoff < 0:
        raise ValueError("cutoff >= 0 required")
    n = p.n
    family = tuple(_family_masks(n, min(cutoff, n)))
    sizes = p.sizes()
    for s, size in enumerate(sizes):
        if size == 0:
            raise EmptyClass(s)
    classes = []
    for s in range(p.modulus):
        pts = p.class_indices(s)
        chi = np.empty((pts.shape[0], len(family)), dtype=np.int64)
        for col, S in enumerate(family):
            chi[:, col] = 1 - 2 * _kernels.parity_of_masked(pts, S)
        ones = np.ones(pts.shape[0], dtype=np.int64)
        u, total, cert = _zero_correlation(ones, chi, s)
        classes.append(ClassDistribution(s, pts, u, total, cert))
    return MomentMatchedFamily(p, cutoff, family, classes)


# --------------------------------------------------------------------------
# Univariate reduction


def _s_range(k: int) -> list[int]:
    half = 1 << k
    return list(range(-half, 0)) + list(range(1, half + 1))


def _poly_mul(a: dict, b: dict) -> dict:
    """Product of dicts keyed by (x-mask, s-power); x^2 = x on the cube."""
    out: dict = {}
    for (ma, pa), ca in a.items():
        for (mb, pb), cb in b.items():
            key = (ma | mb, pa + pb)
            out[key] = out.get(key, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


@dataclass
class ReductionResult:
    P: Polynomial  # univariate in s
    values: dict  # s -> E_{mu_s}[poly(x, l(x, s))], computed pointwise
    interpolated: Polynomial  # through the first d+1 values of s
    matches: bool  # P(s) == values[s] for every s
    interpolation_consistent: bool  # interpolated(s) == values[s] for the rest

    @property
    def ok(self) -> bool:
        return self.matches and self.interpolation_consistent and self.P == self.interpolated


def _substitute(poly: Polynomial, w: Sequence[int], M: int) -> dict:
    """poly(x, (L(x) - s)/M) expanded as {(x-mask, s-power): coeff}."""
    n = len(w)
    ell = {(1 << j, 0): Fraction(wj, M) for j, wj in enumerate(w) if wj}
    ell[(0, 1)] = Fraction(-1, M)
    powers = [{(0, 0): Fraction(1)}]
    out: dict = {}
    for e, c in poly.terms.items():
        j = e[n]
        while len(powers) <= j:
            powers.append(_poly_mul(powers[-1], ell))
        xmask = sum(1 << i for i in range(n) if e[i])
        for (m, r), v in powers[j].items():
            key = (m | xmask, r)
            out[key] = out.get(key, 0) + c * v
    return {k: v for k, v in out.items() if v}


def _class_expectation(poly: Polynomial, fam: MomentMatchedFamily, s: int) -> Fraction:
    """E_{mu_s}[poly(x, t)] with t = (L(x) - s)/M, evaluated point by point."""
    p = fam.partition
    n, M = p.n, p.modulus
    c = fam.classes[s % M]
    pts = c.points
    bits = [((pts >> j) & 1).astype(np.int64) for j in range(n)]
    L = np.zeros(pts.shape[0], dtype=np.int64)
    for j, w in enumerate(p.weights.weights):
        L += bits[j] * w
    if np.any((L - s) % M):  # pragma: no cover - class membership
        raise AssertionError("t is not an integer on X_s")
    t = (L - s) // M
    den = lcm(1, *(v.denominator for v in poly.terms.values()))
    nums = {e: int(v * den) for e, v in poly.terms.items()}
    tmax = int(np.max(np.abs(t))) if t.size else 0
    bound = sum(abs(a) * max(1, tmax) ** e[n] for e, a in nums.items())
    acc = np.zeros(pts.shape[0], dtype=np.int64 if bound < _kernels.INT64_SAFE else object)
    for e, a in nums.items():
        mono = np.ones(pts.shape[0], dtype=np.int64)
        for j in range(n):
            if e[j]:
                mono = mono * bits[j]
        if e[n]:
            mono = mono * t ** e[n]
        acc = acc + a * mono
    total = int(np.dot(acc.astype(object), c.weights))
    return Fraction(total, den * c.total)


def univariate_reduce(poly: Polynomial, fam: MomentMatchedFamily) -> ReductionResult:
    """Collapse p(x, t) to P(s) = E_{mu_s}[p(x, (sum w_i x_i - s) / 2^{k+1})].

    ``poly`` has n+1 variables, t last.  P is assembled symbolically from
    the class-independent moments and then checked against pointwise
    expectations at every s in {+-1, ..., +-2^k}.
    """
    p = fam.partition
    n, M, k = p.n, p.modulus, p.k
    if poly.nvars != n + 1:
        raise ValueError(f"polynomial must have {n + 1} variables (x then t)")
    if poly.degree > fam.cutoff:
        raise DegreeExceedsCutoff(poly.degree, fam.cutoff)
    expanded = _substitute(poly, p.weights.weights, M)
    coeffs: dict[int, Fraction] = {}
    for (mask, r), v in expanded.items():
        coeffs[r] = coeffs.get(r, Fraction(0)) + v * fam.common_moment(mask)
    P = Polynomial(1, {(r,): v for r, v in coeffs.items()})
    if P.degree > poly.degree:  # pragma: no cover - structural
        raise AssertionError("reduction raised the degree")
    s_values = _s_range(k)
    values = {s: _class_expectation(poly, fam, s) for s in s_values}
    matches = all(P((s,)) == values[s] for s in s_values)
    d = poly.degree
    head = s_values[: d + 1]
    interp = interpolate(head, [values[s] for s in head])
    consistent = all(interp((s,)) == values[s] for s in s_values[d + 1 :])
    return ReductionResult(P, values, interp, matches, consistent)


def canonical_linear_form(w: WeightVector) -> Polynomial:
    """sum w_i x_i - 2^{k+1} t, which reduces to P(s) = s."""
    n = w.n
    terms = {}
    for j, wj in enumerate(w.weights):
        e = [0] * (n + 1)
        e[j] = 1
        terms[tuple(e)] = wj
    e = [0] * (n + 1)
    e[n] = 1
    terms[tuple(e)] = -w.modulus
    return Polynomial(n + 1, terms)


def random_reduction_polynomial(n: int, d: int, rng: random.Random, max_terms: int = 12,
                                coeff_range: int = 5) -> Polynomial:
    """Random p(x, t) of total degree <= d with small integer coefficients."""
    terms = {(0,) * (n + 1): rng.randint(-coeff_range, coeff_range)}
    for _ in range(max_terms):
        deg = rng.randint(1, d) if d >= 1 else 0
        e = [0] * (n + 1)
        for _ in range(deg):
            e[rng.randrange(n + 1)] += 1
        terms[tuple(e)] = rng.randint(-coeff_range, coeff_range)
    return Polynomial(n + 1, terms)


# --------------------------------------------------------------------------
# Hard halfspace


def build_hard_halfspace(n: int, k: int, seed: int) -> Halfspace:
    """sign(1/2 + sum_{i<=n} w_i x_i - 2^{k+1} sum_{i>n} x_i) on {0,1}^{2n}, doubled coefficients."""
    w = sample_weights(n, k, seed)
    M = w.modulus
    return Halfspace((1, *(2 * v for v in w.weights), *([-2 * M] * n)))


def weight_groups(w: WeightVector) -> list[tuple[int, list[int]]]:
    """Coordinates (0-based) grouped by weight value, groups in increasing weight."""
    groups: dict[int, list[int]] = {}
    for j, v in enumerate(w.weights):
        groups.setdefault(v, []).append(j)
    return sorted(groups.items())


def symmetrized_hard_function(w: WeightVector) -> BooleanFunction:
    """The hard halfspace collapsed to per-group Hamming weights.

    Coordinates sharing a weight form one block and the whole second block
    is one more; the function is symmetric within every block, so the grid
    ``{0..n_g}^groups x {0..n}`` carries the same R+ values as the cube.
    """
    groups = weight_groups(w)
    h = Halfspace((1, *(2 * v for v, _ in groups), -2 * w.modulus))
    grid = PointSet.grid([len(js) for _, js in groups] + [w.n])
    seed = "" if w.seed is None else w.seed
    return halfspace_to_function(h, grid, name=f"sym-hard:{w.n},{w.k},{seed}")


def hardness_report(n: int, k: int, seed: int, d: int, *, tol=Fraction(1, 2**10), eps=None,
                    zeta=Fraction(1, 5), cutoff: int | None = None, battery: int = 20,
                    converse_dmax: int = 0, brackets: bool = True) -> dict:
    """Run the whole pipeline on one instance and collect a JSON-ready report.

    Stages: partition, spectrum bounds, moment matching, reduction battery,
    and (if moment matching succeeded with cutoff >= d) the bracket
    comparison ``lo(hard, d) >= lo(grid 2^k, d) - 2 tol``.  ``converse``
    records the largest e <= converse_dmax with ``lo(f, 4e) + lo(f, 2e) >= 1``,
    certifying degthr(f AND f) > e.
    """
    from .rapprox import rplus_bracket, sign_grid

    tol = to_rational(tol)
    cutoff = k if cutoff is None else cutoff
    eps = Fraction(2 * k, n) if eps is None else to_rational(eps)
    report: dict = {
        "type": "hardness_report",
        "n": n,
        "k": k,
        "seed": seed,
        "d": d,
        "parameters": {"eps": _frac(eps), "zeta": _frac(to_rational(zeta)), "cutoff": cutoff,
                       "tol": _frac(tol), "battery": battery},
        "stages": {},
        "timings": {},
    }
    stages, timings = report["stages"], report["timings"]

    t0 = time.perf_counter()
    w = sample_weights(n, k, seed)
    part = build_partition(w)
    stages["partition"] = {"passed": part.check_invariants(), "sizes": part.sizes(),
                           "weights": list(w.weights)}
    timings["partition"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    spec = verify_spectrum_bounds(part, eps, zeta)
    dev, s_worst, mask = spec.worst_overall
    stages["spectrum"] = {"passed": spec.passed, "worst_deviation": _frac(dev), "class": s_worst,
                          "subset": list(mask_to_subset(mask)), "exponent": spec.exponent}
    timings["spectrum"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    fam = None
    try:
        fam = build_moment_matched(part, cutoff)
        checks = fam.verify()
        stages["moment_matching"] = {"passed": all(checks.values()), "checks": checks,
                                     "max_alpha_l1": _frac(max(c.certificate.alpha_l1
                                                               for c in fam.classes))}
    except (HypothesisViolated, EmptyClass) as exc:
        stages["moment_matching"] = {"passed": None, "skipped": str(exc)}
    timings["moment_matching"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if fam is not None:
        rng = random.Random(seed)
        dr = min(k, cutoff)
        canonical_ok = None  # the linear identity needs cutoff >= 1
        if cutoff >= 1:
            canon = univariate_reduce(canonical_linear_form(w), fam)
            canonical_ok = canon.ok and canon.P == Polynomial.variable(1, 0)
        battery_ok = all(
            univariate_reduce(random_reduction_polynomial(n, dr, rng), fam).ok
            for _ in range(battery)
        )
        stages["reduction"] = {"passed": canonical_ok is not False and battery_ok, "canonical": canonical_ok,
                               "battery": battery}
    else:
        stages["reduction"] = {"passed": None, "skipped": "no moment-matched family"}
    timings["reduction"] = time.perf_counter() - t0

    if brackets:
        t0 = time.perf_counter()
        f = symmetrized_hard_function(w)
        if fam is not None and cutoff >= d:
            hard = rplus_bracket(f, d, tol)
            grid = rplus_bracket(sign_grid(1 << k), d, tol)
            ok = hard.lo >= grid.lo - 2 * tol
            stages["brackets"] = {"passed": ok, "hard": [_frac(hard.lo), _frac(hard.hi)],
                                  "grid": [_frac(grid.lo), _frac(grid.hi)],
                                  "violation_is_bug": True}
        else:
            stages["brackets"] = {"passed": None, "skipped": "needs a moment-matched family with cutoff >= d"}
        certified = None
        lows: dict[int, Fraction] = {}
        for e in range(converse_dmax + 1):
            for deg in (4 * e, 2 * e):
                if deg not in lows:
                    lows[deg] = rplus_bracket(f, deg, tol).lo
            lo4, lo2 = lows[4 * e], lows[2 * e]
            if lo4 + lo2 >= 1:
                certified = e
            else:
                break
        stages["converse"] = {"degthr_conj_lower_bound": None if certified is None else certified + 1,
                              "searched_up_to": converse_dmax}
        timings["brackets"] = time.perf_counter() - t0

    # the spectrum bound is probabilistic; only deterministic stages decide
    report["passed"] = all(
        st.get("passed") is not False for name, st in stages.items() if name != "spectrum"
    )
    return report
