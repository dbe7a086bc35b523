import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from signdeg.exactlp import (
    Feasible,
    Infeasible,
    LinearProgram,
    SingularMatrix,
    check_feasible,
    is_strictly_diagonally_dominant,
    mat_vec,
    solve_linear_system,
    to_rational,
    verify_outcome,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def test_to_rational_rejects_float():
    with pytest.raises(TypeError):
        to_rational(0.5)
    assert to_rational("3/6") == F(1, 2)


def test_solve_identity():
    assert solve_linear_system([[1, 0], [0, 1]], [3, F(-1, 2)]) == [3, F(-1, 2)]


def test_solve_two_by_two():
    assert solve_linear_system([[2, 1], [1, 2]], [1, 1]) == [F(1, 3), F(1, 3)]


def test_solve_singular():
    with pytest.raises(SingularMatrix):
        solve_linear_system([[1, 1], [1, 1]], [1, 2])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8).flatmap(
    lambda n: st.tuples(st.lists(st.lists(rationals, min_size=n, max_size=n), min_size=n, max_size=n),
                        st.lists(rationals, min_size=n, max_size=n))))
def test_solve_round_trip(data):
    A, b = data
    try:
        x = solve_linear_system(A, b)
    except SingularMatrix:
        return
    assert mat_vec(A, x) == b


def test_solve_round_trip_dim_50():
    rng = random.Random(5)
    n = 50
    A = [[F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)] for _ in range(n)]
    b = [F(rng.randint(-9, 9)) for _ in range(n)]
    assert mat_vec(A, solve_linear_system(A, b)) == b


def test_dominance_examples():
    assert is_strictly_diagonally_dominant([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert not is_strictly_diagonally_dominant([[1, 1], [1, 1]])
    assert is_strictly_diagonally_dominant([[1, F(1, 4)], [F(1, 4), 1]])


@pytest.mark.parametrize("n", [5, 20, 100])
def test_dominant_matrices_are_solvable(n):
    rng = random.Random(n)
    A = []
    for i in range(n):
        row = [F(rng.randint(-3, 3), rng.randint(1, 4)) for _ in range(n)]
        row[i] = sum(abs(v) for j, v in enumerate(row) if j != i) + F(1, rng.randint(1, 9))
        A.append(row)
    assert is_strictly_diagonally_dominant(A)
    b = [F(rng.randint(-5, 5)) for _ in range(n)]
    assert mat_vec(A, solve_linear_system(A, b)) == b


def test_empty_lp_is_feasible_at_origin():
    out = check_feasible(LinearProgram([], [], nvars=3))
    assert out == Feasible((0, 0, 0))


def test_contradiction_pair():
    lp = LinearProgram([[1], [-1]], [1, 0])
    out = check_feasible(lp)
    assert isinstance(out, Infeasible)
    y = out.certificate
    assert y[0] == y[1] > 0  # proportional to (1, 1)
    assert verify_outcome(lp, Infeasible((F(1), F(1))))


def test_verify_rejects_bad_certificates():
    lp = LinearProgram([[1], [-1]], [1, 0])
    assert not verify_outcome(lp, Infeasible((F(1), F(2))))
    assert not verify_outcome(lp, Infeasible((F(-1), F(-1))))
    assert not verify_outcome(lp, Feasible((F(0),)))
    assert verify_outcome(LinearProgram([[1]], [1]), Feasible((F(1),)))


def _random_lp(rng, m, k):
    A = [[F(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(k)] for _ in range(m)]
    b = [F(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(m)]
    return LinearProgram(A, b, nvars=k)


@pytest.mark.parametrize("rule", ["lex", "bland"])
def test_random_systems_certificates(rule):
    rng = random.Random(17)
    kinds = set()
    for _ in range(60):
        lp = _random_lp(rng, 10, 3)
        out = check_feasible(lp, rule=rule)
        assert verify_outcome(lp, out)
        kinds.add(type(out))
    assert kinds == {Feasible, Infeasible}


def test_pivot_rules_agree_on_feasibility():
    rng = random.Random(3)
    for _ in range(40):
        lp = _random_lp(rng, rng.randint(1, 25), rng.randint(1, 6))
        assert check_feasible(lp, "lex").feasible == check_feasible(lp, "bland").feasible


def test_determinism():
    rng = random.Random(11)
    lp = _random_lp(rng, 30, 6)
    assert check_feasible(lp) == check_feasible(lp)


def test_unknown_rule():
    with pytest.raises(ValueError):
        check_feasible(LinearProgram([[1]], [1]), rule="dantzig")


def test_degenerate_system_terminates():
    # many redundant constraints through one vertex
    A = [[1, 0], [0, 1], [1, 1], [2, 2], [1, -1], [-1, 1], [3, 1]]
    b = [0, 0, 0, 0, 0, 0, 0]
    for rule in ("lex", "bland"):
        lp = LinearProgram(A, b)
        assert verify_outcome(lp, check_feasible(lp, rule))
