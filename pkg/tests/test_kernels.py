import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from owpuzzle import _kernels, _pykernels
from owpuzzle.dist import SeededRng

try:
    from owpuzzle import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def _setup(n, k, rows, seed):
    rng = SeededRng(seed)
    xs = np.unique(rng.integers(0, 1 << n, size=min(1 << n, 300)))
    w = rng.random(len(xs)) + 0.01
    w /= w.sum()
    abc = rng.integers(0, 1 << n, size=(rows, 3))
    A, B, C = (abc[:, i].copy() for i in range(3))
    Y = rng.integers(0, 1 << k, size=rows)
    return xs, w, A, B, C, Y, rng


@needs_c
@given(st.integers(1, 20), st.data(), st.integers(0, 2**32))
def test_backends_bit_identical(n, data, seed):
    k = data.draw(st.integers(1, n))
    xs, w, A, B, C, Y, rng = _setup(n, k, 17, seed)
    for mod in (_pykernels, _ckernels):
        assert mod.gf_mul(int(A[0]), int(B[0]), n) == _pykernels.gf_mul(int(A[0]), int(B[0]), n)
    X = xs[rng.integers(0, len(xs), size=17)]
    assert np.array_equal(_pykernels.hash_each(X, A, B, C, n, k), _ckernels.hash_each(X, A, B, C, n, k))
    assert np.array_equal(_pykernels.hash_table(xs, A, B, C, n, k), _ckernels.hash_table(xs, A, B, C, n, k))
    ex = np.where(rng.random(17) < 0.5, X, -1)
    m_py = _pykernels.preimage_mass(xs, w, n, k, A, B, C, Y, ex)
    m_c = _ckernels.preimage_mass(xs, w, n, k, A, B, C, Y, ex)
    assert np.array_equal(m_py, m_c)
    U = rng.random(17)
    assert np.array_equal(_pykernels.posterior_sample(xs, w, n, k, A, B, C, Y, U),
                          _ckernels.posterior_sample(xs, w, n, k, A, B, C, Y, U))


def test_posterior_sample_empty_and_hit():
    n, k = 3, 3
    xs = np.array([1, 5], dtype=np.int64)
    w = np.array([0.5, 0.5])
    A = np.zeros(2, dtype=np.int64)
    B = np.ones(2, dtype=np.int64)
    C = np.zeros(2, dtype=np.int64)
    # identity hash: y = x
    Y = np.array([5, 2], dtype=np.int64)
    out = _kernels.posterior_sample(xs, w, n, k, A, B, C, Y, np.array([0.3, 0.3]))
    assert out.tolist() == [1, -1]


def test_backend_selected():
    assert _kernels.BACKEND in ("cython", "python")
    if _ckernels is not None:
        assert _kernels.BACKEND == "cython"


def test_forced_python_backend():
    env = dict(os.environ, OWPUZZLE_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import owpuzzle; print(owpuzzle.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
