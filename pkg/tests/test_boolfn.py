import itertools
import random
from fractions import Fraction as F
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signdeg.boolfn import (
    BooleanFunction,
    Halfspace,
    NotBlockSymmetric,
    PointSet,
    Polynomial,
    VanishingForm,
    binary_entropy_bound_check,
    block_symmetrize,
    conjunction,
    constant,
    halfspace_to_function,
    majority,
    monomial_basis,
    parity,
    parity_char,
    symmetrize_polynomial,
)
from signdeg.hardhs import build_hard_halfspace


def test_halfspace_examples():
    f = halfspace_to_function(Halfspace((1, -2)), PointSet.cube(1))
    assert f((0,)) == 1 and f((1,)) == -1
    h = build_hard_halfspace(4, 1, 0)
    assert halfspace_to_function(h, PointSet.cube(8))((0,) * 8) == 1
    with pytest.raises(VanishingForm):
        halfspace_to_function(Halfspace((-1, 1)), PointSet.line([0, 1, 2]))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6), st.integers(1, 7))
def test_halfspace_scaling_invariance(weights, scale):
    h = Halfspace.with_half_offset(weights)
    X = PointSet.cube(len(weights))
    g = Halfspace(tuple(scale * c for c in h.coeffs))
    assert halfspace_to_function(h, X) == halfspace_to_function(g, X)


def test_conjunction_examples():
    X = PointSet.line([0])
    t, fl = BooleanFunction(X, [-1]), BooleanFunction(X, [1])
    assert conjunction(t, t).values.tolist() == [-1]
    for a, b in itertools.product((t, fl), repeat=2):
        want = -1 if (a.values[0] == -1 and b.values[0] == -1) else 1
        assert conjunction(a, b).values.tolist() == [want]


def test_conjunction_is_and_exhaustively():
    rng = random.Random(0)
    for _ in range(20):
        n1, n2 = rng.randint(1, 4), rng.randint(1, 4)
        f = BooleanFunction(PointSet.cube(n1), [rng.choice((-1, 1)) for _ in range(1 << n1)])
        g = BooleanFunction(PointSet.cube(n2), [rng.choice((-1, 1)) for _ in range(1 << n2)])
        h = conjunction(f, g)
        for p in h.domain:
            x, y = p[:n1], p[n1:]
            assert (h(p) == -1) == (f(x) == -1 and g(y) == -1)


def test_majority():
    assert majority(1).values.tolist() == [1, -1]
    assert [x for x in PointSet.cube(2) if majority(2)(x) == -1] == [(1, 1)]
    m3 = majority(3)
    assert all((m3(x) == -1) == (sum(x) >= 2) for x in PointSet.cube(3))


def test_parity_char():
    assert parity_char(0, (1, 0, 1)) == 1
    assert parity_char([1], (1,)) == -1
    assert parity_char([1, 2], (1, 1)) == 1


def test_monomial_basis_examples():
    assert monomial_basis(PointSet.cube(2), 1) == [(0, 0), (1, 0), (0, 1)]
    assert monomial_basis(PointSet.cube(1), 5) == [(0,), (1,)]
    assert monomial_basis(PointSet.line([-2, -1, 1, 2]), 2) == [(0,), (1,), (2,)]


@pytest.mark.parametrize("n", range(0, 7))
def test_monomial_basis_full_degree(n):
    assert len(monomial_basis(PointSet.cube(n), n)) == sum(comb(n, i) for i in range(n + 1))


def _orbit_average(phi: Polynomial, n: int, x) -> F:
    perms = list(itertools.permutations(range(n)))
    return sum((phi(tuple(x[p[i]] for i in range(n))) for p in perms), F(0)) / len(perms)


def test_symmetrize_examples():
    x1 = Polynomial.variable(2, 0)
    p = symmetrize_polynomial(x1, 2)
    assert p == Polynomial(1, {(1,): F(1, 2)})
    assert symmetrize_polynomial(Polynomial.constant(3, 7), 3) == Polynomial.constant(1, 7)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_symmetrize_matches_orbit_average(n):
    rng = random.Random(n)
    terms = {}
    for _ in range(6):
        e = tuple(rng.randint(0, 1) for _ in range(n))
        if sum(e) <= 2:
            terms[e] = F(rng.randint(-5, 5), rng.randint(1, 4))
    phi = Polynomial(n, terms)
    p = symmetrize_polynomial(phi, n)
    assert p.degree <= phi.degree
    for x in PointSet.cube(n):
        assert p((sum(x),)) == _orbit_average(phi, n, x)


def test_block_symmetrize_examples():
    assert block_symmetrize(majority(3), [3]).values.tolist() == [1, 1, -1, -1]
    assert block_symmetrize(parity(2), [2]).values.tolist() == [1, -1, 1]
    with pytest.raises(NotBlockSymmetric):
        block_symmetrize(BooleanFunction(PointSet.cube(2), [1, -1, 1, 1]), [2])


def test_block_symmetrize_round_trip():
    F_ = conjunction(majority(3), parity(2))
    G = block_symmetrize(F_, [3, 2])
    for x in F_.domain:
        assert F_(x) == G((sum(x[:3]), sum(x[3:])))


def test_hard_function_second_block_unchanged():
    from signdeg.hardhs import sample_weights, symmetrized_hard_function

    w = sample_weights(6, 1, 0)
    G = symmetrized_hard_function(w)
    assert G.domain.coordinate_values(G.n - 1) == list(range(7))


def test_entropy_bound():
    assert binary_entropy_bound_check(2, 1)
    assert binary_entropy_bound_check(4, 0)
    for n in range(1, 21):
        for k in range(0, n // 2 + 1):
            assert binary_entropy_bound_check(n, k)


def test_polynomial_json_round_trip():
    p = Polynomial(2, {(1, 0): F(1, 3), (0, 2): F(-2)})
    assert Polynomial.from_json(p.to_json()) == p


def test_boolean_function_json_round_trip():
    for f in (majority(3), BooleanFunction(PointSet.line([-1, 1]), [1, -1], name="s")):
        g = BooleanFunction.from_json(f.to_json())
        assert g == f and g.name == f.name


def test_bit_packing_round_trip():
    vals = np.random.default_rng(0).choice([-1, 1], size=1 << 11)
    assert np.array_equal(BooleanFunction(PointSet.cube(11), vals).values, vals)


def test_constant():
    assert constant(3, -1).is_constant()
    with pytest.raises(ValueError):
        BooleanFunction(PointSet.cube(1), [1, 0])
