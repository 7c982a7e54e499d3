import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hankel_mineig.eigen import JacobiNotConverged, smallest_eigs_of_H, symmetric_eigen
from hankel_mineig.inversion import TruncatedInverse


def test_two_by_two():
    assert np.allclose(symmetric_eigen([[2.0, 1.0], [1.0, 2.0]]), [1.0, 3.0], rtol=0, atol=1e-15)


def test_diagonal():
    assert list(symmetric_eigen(np.diag([3.0, -1.0, 2.0]))) == [-1.0, 2.0, 3.0]


def test_inverse_of_small_hankel():
    M = np.array([[240.0, -12.0], [-12.0, 2.0]]) / 336.0
    tr, det = np.trace(M), np.linalg.det(M)
    top = (tr + math.sqrt(tr * tr - 4 * det)) / 2
    assert symmetric_eigen(M)[-1] == pytest.approx(top, rel=1e-14)
    assert top == pytest.approx(0.7160819, abs=1e-7)


def test_rejects_asymmetric():
    with pytest.raises(ValueError):
        symmetric_eigen([[1.0, 2.0], [2.0 + 1e-16 * 4, 1.0]])


def test_non_convergence_reported():
    with pytest.raises(JacobiNotConverged):
        symmetric_eigen([[1.0, 1.0], [1.0, 2.0]], max_sweeps=0)


# integer grids times a scale keep squares clear of underflow
sym_mats = st.tuples(
    st.integers(1, 12).flatmap(lambda n: arrays(np.int64, (n, n), elements=st.integers(-1000, 1000))),
    st.sampled_from([1e-6, 1e-3, 1.0, 1e3]),
).map(lambda t: (np.triu(t[0]) + np.triu(t[0], 1).T) * t[1])


@given(sym_mats)
@settings(max_examples=60, deadline=None)
def test_trace_conservation(M):
    ev = symmetric_eigen(M)
    scale = np.linalg.norm(M)
    assert abs(ev.sum() - np.trace(M)) <= 1e-12 * scale
    assert np.allclose(ev, np.linalg.eigvalsh(M), rtol=0, atol=1e-12 * scale)


@given(sym_mats, st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_orthogonal_similarity(M, seed):
    n = M.shape[0]
    Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, n)))
    C = Q @ M @ Q.T
    C = np.triu(C) + np.triu(C, 1).T
    scale = np.linalg.norm(M)
    assert np.allclose(symmetric_eigen(C), symmetric_eigen(M), rtol=0, atol=1e-12 * scale)


def block(M):
    M = np.asarray(M, dtype=float)
    return TruncatedInverse(M.shape[0], M, M[:-1, :-1].copy())


def test_smallest_eigs_conversion():
    M = np.diag([0.5, 0.25, 0.125])
    res = smallest_eigs_of_H(block(M), 2)
    assert res.lambdas == [2.0, 4.0]
    # dropping the last row/col loses nothing here
    assert res.trunc_err == [0.0, 0.0]


def test_one_by_one_full():
    res = smallest_eigs_of_H(TruncatedInverse(1, np.array([[0.5]]), np.empty((0, 0))), 1, full=True)
    assert res.lambdas == [2.0] and res.trunc_err == [0.0]


def test_s_bounds():
    with pytest.raises(ValueError):
        smallest_eigs_of_H(block(np.eye(3)), 3)


def test_converges_with_degenerate_spectrum():
    M = np.array([[0, 0, 1.5, 1.5], [0, 1.5, 1.5, 1.5], [1.5, 1.5, 1.5, 1.5], [1.5, 1.5, 1.5, 1.5]])
    assert np.allclose(symmetric_eigen(M), np.linalg.eigvalsh(M), rtol=0, atol=1e-14 * np.linalg.norm(M))
