import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvquotient import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not installed")


def _sorted_triplets(r, c, v):
    order = np.lexsort((v, c, r))
    return r[order], c[order], v[order]


@needs_numba
@pytest.mark.parametrize("n", [1, 2, 9])
def test_lattice_triplets_twins_agree(n):
    vd = np.array([5.05, 5.05])
    cd = np.array([2.475, -2.475])
    a = _sorted_triplets(*_kernels.lattice_triplets_np(n, vd, cd))
    b = _sorted_triplets(*_kernels.lattice_triplets_nb(n, vd, cd))
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 1000), period=st.integers(1, 13))
def test_fold_twins_agree(seed, period):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, 100, 500)
    cols = rng.integers(0, 100, 500)
    vals = rng.normal(size=500)
    a = _kernels.fold_triplets_np(rows, cols, vals, period)
    b = _kernels.fold_triplets_nb(rows, cols, vals, period)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 1000), m=st.integers(2, 4))
def test_product_moment_twins_agree(seed, m):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(m, m))
    chol = np.linalg.cholesky(a @ a.T + m * np.eye(m))
    z = rng.normal(size=(1000, m))
    d_idx = np.array([0, 0])
    u_idx = np.array([1, m - 1])
    signs = np.array([1.0, -1.0])
    p1, s1 = _kernels.product_moments_np(z, chol, d_idx, u_idx, signs, 1)
    p2, s2 = _kernels.product_moments_nb(z, chol, d_idx, u_idx, signs, 1)
    assert p1 == pytest.approx(p2, rel=1e-10)
    assert s1 == pytest.approx(s2, rel=1e-10)


def test_product_moments_direct_oracle():
    rng = np.random.default_rng(0)
    chol = np.array([[2.0, 0.0], [0.5, 1.5]])
    z = rng.normal(size=(200, 2))
    x = z @ chol.T
    p, s = _kernels.product_moments(z, chol, [0], [1], [1.0], 1)
    assert p == pytest.approx(float(np.sum(x[:, 0] * x[:, 1])))
    assert s == pytest.approx(float(np.sum(x[:, 1] ** 2)))


def test_numpy_fallback_selected_by_environment():
    code = (
        "import numpy as np\n"
        "from cvquotient import _kernels\n"
        "from cvquotient.quotient import build_dual_rail, quotient_covariance\n"
        "from cvquotient.states import SqueezerSpec\n"
        "print(_kernels.USE_NUMBA)\n"
        "q = quotient_covariance(build_dual_rail(7, SqueezerSpec(0.1, 2.0)))\n"
        "print(repr(float(q.sum())))\n"
    )
    env = dict(os.environ, CVQUOTIENT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    flag, total = out.stdout.split()
    assert flag == "False"

    from cvquotient.quotient import build_dual_rail, quotient_covariance
    from cvquotient.states import SqueezerSpec
    q = quotient_covariance(build_dual_rail(7, SqueezerSpec(0.1, 2.0)))
    assert float(total) == pytest.approx(float(q.sum()), rel=1e-12)
