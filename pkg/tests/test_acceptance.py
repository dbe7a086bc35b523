"""Acceptance criteria C1..C12.

Each test records PASS/FAIL with a one-line detail in the ``criteria``
fixture; the lines are printed in the terminal summary.
"""

import json
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from signdeg.boolfn import (
    PointSet,
    binary_entropy_bound_check,
    constant,
    halfspace_to_function,
    parity,
)
from signdeg.checks import (
    check_brs,
    check_converse,
    check_kp_density,
    check_moment_match,
    check_parseval,
    check_reduction,
    check_symmetrization,
    check_zero_correlation,
    check_zero_law,
    random_halfspace,
)
from signdeg.cli import main
from signdeg.exactlp import Feasible, Infeasible, LinearProgram, check_feasible, verify_outcome
from signdeg.fourier import inverse_wht, parseval_check, wht
from signdeg.signrep import sign_represents, threshold_degree, verify_degree_certificate

pytestmark = pytest.mark.slow


def _record(criteria, cid, ok, detail):
    criteria[cid] = (bool(ok), detail)
    assert ok, detail


# -- C1 --------------------------------------------------------------------


def _random_lp(rng: random.Random) -> LinearProgram:
    nvars = rng.randint(1, 12)
    m = rng.randint(1, 40)
    A = [[rng.randint(-5, 5) for _ in range(nvars)] for _ in range(m)]
    kind = rng.random()
    if kind < 0.4:
        # planted feasible point
        v = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(nvars)]
        b = [sum(a * x for a, x in zip(row, v)) - rng.randint(0, 3) for row in A]
    elif kind < 0.7:
        # a nonnegative combination of rows sums to zero with a positive right side
        y = [rng.randint(0, 3) for _ in range(m - 1)]
        last = [-sum(y[i] * A[i][j] for i in range(m - 1)) for j in range(nvars)]
        A[-1] = last
        b = [rng.randint(-4, 4) for _ in range(m - 1)]
        b.append(-sum(yi * bi for yi, bi in zip(y, b)) + rng.randint(1, 5))
    else:
        b = [rng.randint(-10, 10) for _ in range(m)]
    return LinearProgram(A, b, nvars)


def test_c1_certificate_soundness(criteria):
    rng = random.Random(2024)
    counts = {"feasible": 0, "infeasible": 0}
    bad = 0
    start = time.perf_counter()
    for _ in range(1000):
        lp = _random_lp(rng)
        out = check_feasible(lp)
        counts["feasible" if isinstance(out, Feasible) else "infeasible"] += 1
        if not verify_outcome(lp, out):
            bad += 1
    elapsed = time.perf_counter() - start
    ok = bad == 0 and counts["feasible"] > 0 and counts["infeasible"] > 0
    _record(criteria, "C1", ok, f"1000 LPs, {counts['feasible']} feasible / {counts['infeasible']} "
                               f"infeasible, {bad} unverified, {elapsed:.1f}s")


# -- C2 --------------------------------------------------------------------


def test_c2_threshold_degree_ground_truths(criteria):
    rng = random.Random(7)
    start = time.perf_counter()
    halfspaces = 0
    failures = []
    while halfspaces < 50:
        n = rng.randint(1, 10)
        h = random_halfspace(n, rng)
        f = halfspace_to_function(h, PointSet.cube(n))
        if f.is_constant():
            continue
        halfspaces += 1
        cert = threshold_degree(f)
        own = sign_represents(h.linear_polynomial(), f)
        if not (cert.degree == 1 and own and verify_degree_certificate(cert, f)):
            failures.append(h.coeffs)
    for n in range(1, 5):
        cert = threshold_degree(parity(n))
        if cert.degree != n or len(cert.lower_certificates) != n or not verify_degree_certificate(cert, parity(n)):
            failures.append(f"parity:{n}")
    for v in (1, -1):
        cert = threshold_degree(constant(4, v))
        if cert.degree != 0 or not verify_degree_certificate(cert, constant(4, v)):
            failures.append(f"const:{v}")
    elapsed = time.perf_counter() - start
    _record(criteria, "C2", not failures,
            f"50 halfspaces degthr 1, parity n<=4 degthr n, constants 0; {len(failures)} failures, {elapsed:.1f}s")


# -- C3, C4 ----------------------------------------------------------------


def test_c3_brs_construction(criteria):
    rep = check_brs(pairs=20, nmax=4)
    degs = sorted({r["output_degree"] for r in rep.rows})
    _record(criteria, "C3", rep.deterministic_ok and len(rep.rows) == 20,
            f"20 halfspace pairs, sign-representation exhaustive; output degrees {degs}")


def test_c4_converse_consistency(criteria):
    rep = check_converse(pairs=10, nmax=3)
    ds = [r["degthr_conj"] for r in rep.rows]
    _record(criteria, "C4", rep.deterministic_ok and len(rep.rows) == 10,
            f"10 pairs, hi(f,4d)+hi(g,2d) < 1 at d = degthr(f AND g) in {sorted(set(ds))}")


# -- C5, C6 ----------------------------------------------------------------


def test_c5_sign_grid_zero_law(criteria):
    start = time.perf_counter()
    rep = check_zero_law(Nmax=12, tol=Fraction(1, 2**20))
    elapsed = time.perf_counter() - start
    ok = rep.deterministic_ok and len(rep.rows) == 12
    _record(criteria, "C5", ok and elapsed < 600,
            f"N=1..12 at tol 2^-20: monotone, zero iff d >= N; {elapsed:.1f}s")


def test_c6_symmetrization_transfer(criteria):
    start = time.perf_counter()
    rep = check_symmetrization(range(1, 9), (0, 1, 2, 3), Fraction(1, 2**12))
    elapsed = time.perf_counter() - start
    direct = sum(r["cube_method"] == "direct" for r in rep.rows)
    _record(criteria, "C6", rep.deterministic_ok and len(rep.rows) == 32,
            f"MAJ_n n<=8, d<=3, tol 2^-12: 32 cells overlap ({direct} direct cube LPs, "
            f"{32 - direct} lifted and re-verified); {elapsed:.1f}s")


# -- C7 --------------------------------------------------------------------


def test_c7_zero_correlation(criteria):
    rep = check_zero_correlation(instances=200)
    worst = max(Fraction(r["alpha_l1"]) for r in rep.rows)
    _record(criteria, "C7", rep.deterministic_ok,
            f"200 instances passing both hypotheses, zero correlations exact; max sum|alpha| = "
            f"{float(worst):.4f}; hypotheses pass rate {rep.frequencies['hypotheses_pass']['frequency']}")


# -- C8, C9 ----------------------------------------------------------------

GRID_89 = [(n, k) for n in (10, 12, 14) for k in (1, 2)]
CUTOFF = 1


@pytest.fixture(scope="module")
def moment_reports():
    return {(n, k): check_moment_match(n, k, range(50), cutoff=CUTOFF) for n, k in GRID_89}


def test_c8_moment_matching(criteria, moment_reports):
    ok = True
    parts = []
    for (n, k), rep in moment_reports.items():
        passing = [r for r in rep.rows if r["hypotheses"]]
        ok &= all(r["verified"] for r in passing)
        parts.append(f"({n},{k}) {len(passing)}/50")
    _record(criteria, "C8", ok, f"cutoff {CUTOFF}; verified families per (n,k): " + ", ".join(parts))


def test_c9_univariate_reduction(criteria, moment_reports):
    ok = True
    checked = 0
    for (n, k), mrep in moment_reports.items():
        seeds = [r["seed"] for r in mrep.rows if r["hypotheses"] and r["verified"]]
        if not seeds:
            continue
        rep = check_reduction(n, k, k, seeds, cutoff=CUTOFF, battery=20)
        ok &= rep.deterministic_ok and all(r["passed"] and r["canonical"] for r in rep.rows)
        checked += len(rep.rows)
    _record(criteria, "C9", ok and checked > 0,
            f"{checked} verified families, 20 random polynomials of degree min(k, {CUTOFF}) each, "
            f"canonical form gives P(s) = s")


# -- C10 -------------------------------------------------------------------


def test_c10_krause_pudlak_density(criteria):
    start = time.perf_counter()
    rep = check_kp_density(parity(2), cap=3)
    elapsed = time.perf_counter() - start
    row = rep.rows[0]
    _record(criteria, "C10", rep.deterministic_ok and row["density_lower_bound"] >= 4,
            f"parity(2)^KP on 64 points: {row['families_checked']} families of size <= 3 infeasible, "
            f"dns >= {row['density_lower_bound']}; {elapsed:.1f}s")


# -- C11 -------------------------------------------------------------------


def _character_matrix(n):
    idx = np.arange(1 << n)
    par = np.zeros((1 << n, 1 << n), dtype=np.int64)
    for j in range(n):
        par ^= np.outer((idx >> j) & 1, (idx >> j) & 1)
    return 1 - 2 * par


def test_c11_fourier_suite(criteria):
    rng = np.random.default_rng(11)
    oracle_ok = True
    for i in range(100):
        n = 1 + i % 8
        vals = rng.choice([-1, 1], size=1 << n)
        expect = _character_matrix(n) @ vals  # 2^n f^(S), definitional
        spec = wht(vals.tolist())
        oracle_ok &= all(spec[S] == Fraction(int(expect[S]), 1 << n) for S in range(1 << n))
        oracle_ok &= parseval_check(vals.tolist(), spec)
        oracle_ok &= inverse_wht(spec) == [Fraction(int(v)) for v in vals]
    parseval_rep = check_parseval(10, trials=20)
    entropy_ok = all(binary_entropy_bound_check(n, k) for n in range(1, 21) for k in range(n // 2 + 1))
    big = np.random.default_rng(20).choice([-1, 1], size=1 << 20)
    start = time.perf_counter()
    spec20 = wht(big)
    elapsed = time.perf_counter() - start
    big_ok = spec20.sum_of_squares() == 1 and elapsed < 10
    ok = oracle_ok and parseval_rep.deterministic_ok and entropy_ok and big_ok
    _record(criteria, "C11", ok,
            f"100 functions n<=8 match the character-matrix oracle, Parseval and inversion exact; "
            f"entropy bound for all n<=20; wht n=20 in {elapsed:.2f}s")


# -- C12 -------------------------------------------------------------------

CLI_RUNS = [
    ["degthr", "--fn", "maj:3"],
    ["degthr", "--fn", "conj:halfspace:1,2,-1,parity:2", "--format", "csv"],
    ["rapprox", "--grid", "8", "--d", "2", "--tol", "2^-20"],
    ["rapprox", "--fn", "maj:4", "--d", "1"],
    ["verify", "resheto", "--n", "12", "--k", "1", "--eps", "1/4", "--zeta", "1/5", "--seeds", "0..9"],
    ["verify", "moment-match", "--n", "10", "--k", "1", "--seeds", "0..9"],
    ["verify", "reduction", "--n", "12", "--k", "1", "--d", "2", "--seeds", "0..9"],
    ["verify", "parseval", "--n", "8", "--trials", "50"],
    ["verify", "brs", "--pairs", "3"],
    ["verify", "converse", "--pairs", "2"],
    ["verify", "kp-density", "--fn", "parity:1"],
    ["verify", "symmetrization", "--n-list", "1..4", "--d-list", "0..2"],
    ["verify", "zero-law", "--N", "1..5", "--tol", "2^-16"],
    ["verify", "zero-correlation", "--trials", "20"],
    ["table", "sign-grid-r", "--N", "1..6", "--dmax", "6", "--tol", "2^-12"],
    ["table", "maj-rdeg", "--n", "2,4,8"],
    ["table", "degthr-conj", "--mmax", "4"],
]


def _run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    line = [ln for ln in out.splitlines() if ln.startswith("wrote ")]
    return code, out, line[-1][len("wrote "):] if line else None


def test_c12_cli_reproducibility(criteria, tmp_path, capsys):
    failures = []
    for argv in CLI_RUNS:
        code_a, _, dir_a = _run_cli(argv + ["--out", str(tmp_path / "a")], capsys)
        code_b, _, dir_b = _run_cli(argv + ["--out", str(tmp_path / "b")], capsys)
        if code_a != 0 or code_b != 0 or dir_a is None or dir_b is None:
            failures.append(f"{argv[:2]} exit {code_a}/{code_b}")
            continue
        ma = json.loads(open(f"{dir_a}/manifest.json").read())
        mb = json.loads(open(f"{dir_b}/manifest.json").read())
        name = ma["outputs"][0]["path"]
        if open(f"{dir_a}/{name}", "rb").read() != open(f"{dir_b}/{name}", "rb").read():
            failures.append(f"{argv[:2]} outputs differ")
        if ma["params"] != mb["params"] or ma["outputs"] != mb["outputs"]:
            failures.append(f"{argv[:2]} manifests differ")
        code_r, out_r, _ = _run_cli(["rerun", f"{dir_a}/manifest.json"], capsys)
        if code_r != 0 or "identical" not in out_r:
            failures.append(f"{argv[:2]} rerun mismatch")
    _record(criteria, "C12", not failures,
            f"{len(CLI_RUNS)} commands run twice and rerun from manifest; "
            + ("all byte-identical" if not failures else "; ".join(failures)))
