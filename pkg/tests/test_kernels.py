import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signdeg import _kernels


def _naive_wht(a):
    n = len(a).bit_length() - 1
    return [sum(int(a[x]) * (-1) ** bin(x & S).count("1") for x in range(1 << n)) for S in range(1 << n)]


@given(st.integers(0, 7).flatmap(lambda n: st.lists(st.integers(-50, 50), min_size=1 << n, max_size=1 << n)))
@settings(max_examples=60, deadline=None)
def test_fwht_matches_definition(vals):
    a = np.array(vals, dtype=np.int64)
    assert _kernels.fwht(a).tolist() == _naive_wht(a)
    assert _kernels._fwht_numpy(a).tolist() == _naive_wht(a)


def test_fwht_object_arrays():
    a = np.array([10**30, -1, 3, 2**70], dtype=object)
    assert _kernels.fwht(a).tolist() == _naive_wht(a)


def test_fwht_rejects_bad_length():
    with pytest.raises(ValueError):
        _kernels.fwht(np.zeros(6, dtype=np.int64))


@given(st.lists(st.integers(0, 1000), min_size=0, max_size=10), st.integers(0, 64))
@settings(max_examples=60, deadline=None)
def test_subset_sums(weights, modulus):
    out = _kernels.subset_sums(weights, modulus)
    ref = _kernels._subset_sums_numpy(np.array(weights, dtype=np.int64), modulus)
    assert out.tolist() == ref.tolist()
    for x in range(1 << len(weights)):
        v = sum(w for j, w in enumerate(weights) if x >> j & 1)
        assert out[x] == (v % modulus if modulus else v)


@given(st.lists(st.integers(0, 2**20), max_size=50), st.integers(0, 2**20))
@settings(max_examples=60, deadline=None)
def test_parity_of_masked(indices, mask):
    idx = np.array(indices, dtype=np.int64)
    expect = [bin(i & mask).count("1") % 2 for i in indices]
    assert _kernels.parity_of_masked(idx, mask).tolist() == expect
    assert _kernels._popcount_parity_numpy(idx, mask).tolist() == expect


def test_character_table():
    assert _kernels.character_table(2, 0b11).tolist() == [1, -1, -1, 1]


def test_superset_sums():
    rng = np.random.default_rng(0)
    a = rng.integers(-5, 5, size=32)
    out = _kernels.superset_sums(a)
    for U in range(32):
        assert out[U] == sum(a[x] for x in range(32) if x & U == U)


@pytest.mark.skipif(not _kernels.USE_NUMBA, reason="numba not available")
def test_numba_and_numpy_agree_on_large_inputs():
    rng = np.random.default_rng(1)
    a = rng.integers(-1000, 1000, size=1 << 14)
    assert np.array_equal(_kernels._fwht_numba(a), _kernels._fwht_numpy(a))
    w = rng.integers(0, 1 << 20, size=14)
    assert np.array_equal(_kernels._subset_sums_numba(w, np.int64(97)), _kernels._subset_sums_numpy(w, 97))
    idx = np.arange(1 << 14, dtype=np.int64)
    assert np.array_equal(_kernels._popcount_parity_numba(idx, np.int64(0x2A5B)),
                          _kernels._popcount_parity_numpy(idx, 0x2A5B))


_PROBE = """
import json, numpy as np
from signdeg import _kernels, wht, threshold_degree
from signdeg.boolfn import majority
from signdeg.hardhs import build_partition, sample_weights
rng = np.random.default_rng(5)
a = rng.integers(-9, 9, size=1 << 10)
p = build_partition(sample_weights(10, 2, 3))
print(json.dumps({
    "numba": _kernels.USE_NUMBA,
    "fwht": _kernels.fwht(a).tolist(),
    "sizes": p.sizes(),
    "spectrum": p.spectrum(1).tolist(),
    "degthr": threshold_degree(majority(3)).degree,
}))
"""


def _probe(pure: bool) -> dict:
    env = dict(os.environ)
    env.pop("SIGNDEG_PURE_NUMPY", None)
    if pure:
        env["SIGNDEG_PURE_NUMPY"] = "1"
    out = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_pure_numpy_switch_gives_identical_results():
    pure = _probe(True)
    fast = _probe(False)
    assert pure.pop("numba") is False
    fast.pop("numba")
    assert pure == fast
