import random
from fractions import Fraction as F

import pytest

from signdeg.boolfn import (
    BooleanFunction,
    Halfspace,
    PointSet,
    Polynomial,
    conjunction,
    constant,
    halfspace_to_function,
    majority,
    parity,
)
from signdeg.exactlp import Feasible, Infeasible
from signdeg.rapprox import rdeg
from signdeg.signrep import (
    NonpositiveDenominator,
    brs_conjunction_polynomial,
    density_feasible,
    krause_pudlak,
    sign_represents,
    threshold_degree,
    threshold_density,
    verify_degree_certificate,
    verify_density_result,
)


def test_halfspace_degree_one_with_own_form():
    h = Halfspace.with_half_offset([1, 2, -1])
    f = halfspace_to_function(h, PointSet.cube(3))
    assert sign_represents(h.linear_polynomial(), f)
    cert = threshold_degree(f)
    assert cert.degree == 1 and verify_degree_certificate(cert, f)


def test_parity_two_needs_degree_two():
    f = parity(2)
    cert = threshold_degree(f)
    assert cert.degree == 2 and len(cert.lower_certificates) == 2
    assert verify_degree_certificate(cert, f)
    x1, x2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    assert sign_represents((1 - 2 * x1) * (1 - 2 * x2), f)


def test_constant_degree_zero():
    cert = threshold_degree(constant(3))
    assert cert.degree == 0 and cert.witness == Polynomial.constant(3, 1)


def test_certificate_tampering_detected():
    f = parity(2)
    cert = threshold_degree(f)
    y = list(cert.lower_certificates[1])
    i = next(j for j, v in enumerate(y) if v)
    y[i] *= 2  # breaks the constant column of y^T A = 0
    cert.lower_certificates[1] = tuple(y)
    assert not verify_degree_certificate(cert, f)


def test_subdomain_monotonicity():
    rng = random.Random(0)
    for _ in range(8):
        f = BooleanFunction(PointSet.cube(3), [rng.choice((-1, 1)) for _ in range(8)])
        idx = sorted(rng.sample(range(8), rng.randint(1, 7)))
        assert threshold_degree(f.restrict(idx)).degree <= threshold_degree(f).degree


def test_witness_scaling():
    f = majority(3)
    w = threshold_degree(f).witness
    assert sign_represents(w * F(3, 7), f)


def test_density_feasible_examples():
    f = parity(3)
    T = 0b111
    out = density_feasible(f, [T])
    assert isinstance(out, Feasible) and out.point[0] >= 1
    assert isinstance(density_feasible(f, [0b011]), Infeasible)
    and2 = BooleanFunction(PointSet.cube(2), [1, 1, 1, -1])
    assert isinstance(density_feasible(and2, [0, 1, 2, 3]), Feasible)


def test_density_of_character_and_and():
    assert threshold_density(parity(3), cap=2).density == 1
    and2 = BooleanFunction(PointSet.cube(2), [1, 1, 1, -1])
    res = threshold_density(and2, cap=4)
    # frozen from a float-LP oracle over all families (no 1- or 2-element family works)
    assert res.density == 3 and verify_density_result(res, and2)


def test_kp_of_parity_two_small_families():
    # the full cap-3 sweep is an acceptance criterion; here only sizes 1 and 2
    kp = krause_pudlak(parity(2))
    res = threshold_density(kp, cap=2)
    assert res.exceeds_cap and res.families_checked == 64 + 2016


def test_krause_pudlak_selector():
    f = BooleanFunction(PointSet.cube(1), [1, -1])
    kp = krause_pudlak(f)
    for x in (0, 1):
        for y in (0, 1):
            for z in (0, 1):
                assert kp((x, y, z)) == f((y if z else x,))
    g = majority(2)
    kg = krause_pudlak(g)
    for a in PointSet.cube(2):
        for b in PointSet.cube(2):
            assert kg(a + b + (0, 0)) == g(a) and kg(a + b + (1, 1)) == g(b)


def test_brs_exact_case():
    f, g = majority(3), parity(2)
    pf = threshold_degree(f)
    # exact approximants p/q = f: interpolate f by its multilinear expansion
    pts = list(f.domain)
    from signdeg.fourier import wht

    def exact(h):
        terms = {}
        for S, c in wht(h).nonzero():
            poly = Polynomial.constant(h.n, c)
            for j in range(h.n):
                if S >> j & 1:
                    poly = poly * (1 - 2 * Polynomial.variable(h.n, j))
            for e, v in poly.terms.items():
                terms[e] = terms.get(e, 0) + v
        return Polynomial(h.n, terms)

    p1, p2 = exact(f), exact(g)
    one = lambda n: Polynomial.constant(n, 1)  # noqa: E731
    poly = brs_conjunction_polynomial(p1, one(3), f.domain, p2, one(2), g.domain)
    assert sign_represents(poly, conjunction(f, g))
    assert pf.degree == 1 and len(pts) == 8


def test_brs_nonpositive_denominator():
    X = PointSet.cube(1)
    q = Polynomial.variable(1, 0)
    with pytest.raises(NonpositiveDenominator):
        brs_conjunction_polynomial(q, q, X, q, Polynomial.constant(1, 1), X)


def test_brs_with_lp_approximants_four_bit_halfspaces():
    f = halfspace_to_function(Halfspace.with_half_offset([2, -1, 1, 3], -2), PointSet.cube(4))
    g = halfspace_to_function(Halfspace.with_half_offset([-1, -1, 2, 1], 0), PointSet.cube(4))
    rf, rg = rdeg(f, F(1, 3), 4), rdeg(g, F(1, 3), 4)
    d = max(rf.degree, rg.degree)
    poly = brs_conjunction_polynomial(rf.p, rf.q, f.domain, rg.p, rg.q, g.domain)
    h = conjunction(f, g)
    assert len(h) == 256 and sign_represents(poly, h) and poly.degree <= 2 * d


def test_degree_certificate_json():
    cert = threshold_degree(parity(2))
    data = cert.to_json()
    assert data["degree"] == 2 and len(data["lower_bound_certificates"]) == 2
