"""Exact Fourier analysis on {0,1}^n and correlations on finite subsets."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .boolfn import BooleanFunction, PointSet
from .exactlp import to_rational

__all__ = [
    "FourierSpectrum",
    "EmptySet",
    "wht",
    "inverse_wht",
    "integer_table",
    "correlation",
    "parseval_check",
]

MAX_WHT_DIM = 24


class EmptySet(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Dense spectrum with a shared denominator: f^(S) = numerators[S] / scale."""

    n: int
    numerators: np.ndarray
    scale: int

    def __getitem__(self, mask: int) -> Fraction:
        return Fraction(int(self.numerators[mask]), self.scale)

    def __len__(self) -> int:
        return 1 << self.n

    def coefficients(self) -> list[Fraction]:
        return [Fraction(int(v), self.scale) for v in self.numerators]

    def nonzero(self) -> Iterable[tuple[int, Fraction]]:
        for mask in np.flatnonzero(self.numerators != 0):
            yield int(mask), self[int(mask)]

    def sum_of_squares(self) -> Fraction:
        total = sum(int(v) * int(v) for v in self.numerators)
        return Fraction(total, self.scale * self.scale)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FourierSpectrum):
            return NotImplemented
        return self.n == other.n and self.coefficients() == other.coefficients()

    def to_json(self) -> dict:
        return {
            "type": "spectrum",
            "n": self.n,
            "coefficients": [[m, f"{c.numerator}/{c.denominator}"] for m, c in self.nonzero()],
        }

    @classmethod
    def from_json(cls, data) -> "FourierSpectrum":
        n = int(data["n"])
        coeffs = {int(m): Fraction(c) for m, c in data["coefficients"]}
        den = lcm(*(c.denominator for c in coeffs.values())) if coeffs else 1
        nums = np.zeros(1 << n, dtype=object)
        for m, c in coeffs.items():
            nums[m] = c.numerator * (den // c.denominator)
        return cls(n, _shrink(nums), den)


def _shrink(arr: np.ndarray) -> np.ndarray:
    """Use int64 when every entry fits comfortably, otherwise Python ints."""
    if arr.dtype == np.int64:
        return arr
    if len(arr) == 0 or max(abs(int(v)) for v in arr) < _kernels.INT64_SAFE:
        return arr.astype(np.int64)
    return arr.astype(object)


def integer_table(values) -> tuple[np.ndarray, int]:
    """Scale a rational table to integers: returns (ints, D) with values = ints / D."""
    if isinstance(values, BooleanFunction):
        return values.values.astype(np.int64), 1
    arr = np.asarray(values) if not isinstance(values, np.ndarray) else values
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64), 1
    if arr.dtype.kind == "f":
        raise TypeError("floating tables are not accepted")
    fr = [to_rational(v) for v in arr.tolist()]
    den = lcm(*(v.denominator for v in fr)) if fr else 1
    ints = np.empty(len(fr), dtype=object)
    for i, v in enumerate(fr):
        ints[i] = v.numerator * (den // v.denominator)
    return _shrink(ints), den


def _transform(ints: np.ndarray, n: int) -> np.ndarray:
    if ints.dtype == np.int64:
        bound = int(np.max(np.abs(ints))) if len(ints) else 0
        if bound << n < _kernels.INT64_SAFE:
            return _kernels.fwht(ints)
        ints = ints.astype(object)
    return _kernels.fwht(ints)


def wht(values) -> FourierSpectrum:
    """Fourier spectrum of a rational-valued table on {0,1}^n.

    ``values`` is a BooleanFunction on a cube, or a length-2^n sequence of
    ints / Fractions in cube index order.  f^(S) = 2^-n sum_x f(x) chi_S(x),
    by the O(n 2^n) butterfly.
    """
    if isinstance(values, BooleanFunction) and not values.domain.is_cube:
        raise ValueError("wht needs a cube domain")
    ints, den = integer_table(values)
    size = len(ints)
    n = size.bit_length() - 1
    if size != 1 << n:
        raise ValueError("table length must be a power of two")
    if n > MAX_WHT_DIM:
        raise ValueError(f"n <= {MAX_WHT_DIM} required")
    return FourierSpectrum(n, _transform(ints, n), den << n)


def inverse_wht(spectrum: FourierSpectrum) -> list[Fraction]:
    """f(x) = sum_S f^(S) chi_S(x), exactly."""
    out = _transform(spectrum.numerators, spectrum.n)
    return [Fraction(int(v), spectrum.scale) for v in out]


def _as_callable(f) -> Callable:
    if isinstance(f, BooleanFunction):
        return f
    if isinstance(f, dict):
        return lambda p: f[tuple(p)]
    if callable(f):
        return f
    raise TypeError(f"cannot evaluate {type(f).__name__}")


def correlation(f, g, X: PointSet | Sequence[Sequence[int]]) -> Fraction:
    """<f, g>_X = |X|^-1 sum_{x in X} f(x) g(x), exactly."""
    points = list(X.points if isinstance(X, PointSet) else X)
    if not points:
        raise EmptySet("correlation over an empty set")
    fc, gc = _as_callable(f), _as_callable(g)
    total = Fraction(0)
    for p in points:
        total += to_rational(fc(p)) * to_rational(gc(p))
    return total / len(points)


def parseval_check(values, spectrum: FourierSpectrum) -> bool:
    """True iff sum_S f^(S)^2 == E_x[f(x)^2] exactly."""
    ints, den = integer_table(values)
    if len(ints) != 1 << spectrum.n:
        raise ValueError("table and spectrum sizes differ")
    mean_sq = Fraction(sum(int(v) * int(v) for v in ints), den * den * len(ints))
    return spectrum.sum_of_squares() == mean_sq
