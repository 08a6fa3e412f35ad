import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import complex_gaussian
from mimotopo.errors import SingularMatrixError
from mimotopo.precoder import (
    MRT,
    ZF,
    build_precoder,
    mrt_precoder,
    normalize_columns,
    solve_small_complex,
    zf_precoder,
)


def test_normalize_scalar_column():
    Hn = normalize_columns(np.array([[2.0], [0.0]]))
    assert np.array_equal(Hn.entries, np.array([[1.0], [0.0]]))
    assert Hn.column_norms[0] == 2.0


def test_normalize_unit_columns_unchanged():
    H = np.eye(3, 2)
    assert np.array_equal(normalize_columns(H).entries, H)


def test_normalize_round_trip(rng):
    H = complex_gaussian(rng, (8, 4))
    Hn = normalize_columns(H)
    assert np.allclose(np.linalg.norm(Hn.entries, axis=0), 1.0, rtol=1e-12)
    assert np.allclose(Hn.entries * Hn.column_norms, H, rtol=1e-12, atol=0)


def test_normalize_zero_column():
    with pytest.raises(ValueError, match="zero channel column"):
        normalize_columns(np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_mrt_conjugates():
    Hn = normalize_columns(np.array([[1j], [0]]))
    assert mrt_precoder(Hn).entries[0, 0] == -1j
    real = normalize_columns(np.array([[3.0, 1.0], [4.0, -1.0]]))
    assert np.array_equal(mrt_precoder(real).entries, real.entries)
    assert mrt_precoder(real).kind == MRT


def test_mrt_diagonal_is_column_norm(rng):
    H = complex_gaussian(rng, (16, 4)) * rng.uniform(0.1, 10, size=4)
    G = mrt_precoder(normalize_columns(H)).entries
    diag = np.diagonal(G.T @ H)
    assert np.allclose(diag, np.linalg.norm(H, axis=0), rtol=1e-12, atol=0)
    assert np.allclose(diag.imag, 0, atol=1e-12 * np.linalg.norm(H, axis=0).max())


def test_zf_orthonormal_equals_mrt():
    Q, _ = np.linalg.qr(complex_gaussian(np.random.default_rng(0), (6, 3)))
    # plain-transpose Gram Q^T conj(Q) = conj(Q^H Q) = I
    Hn = normalize_columns(Q)
    assert np.allclose(zf_precoder(Hn).entries, mrt_precoder(Hn).entries, atol=1e-12)


def test_zf_single_user_equals_mrt(rng):
    Hn = normalize_columns(complex_gaussian(rng, (8, 1)))
    assert np.allclose(zf_precoder(Hn).entries, mrt_precoder(Hn).entries, rtol=0, atol=1e-12)


def test_zf_identity_product(rng):
    Hn = normalize_columns(complex_gaussian(rng, (4, 2)))
    G = zf_precoder(Hn)
    assert G.kind == ZF
    assert np.allclose(G.entries.T @ Hn.entries, np.eye(2), rtol=0, atol=1e-10)


def test_zf_batched_matches_single(rng):
    H = complex_gaussian(rng, (5, 8, 4))
    batched = zf_precoder(normalize_columns(H)).entries
    for i in range(5):
        single = zf_precoder(normalize_columns(H[i])).entries
        assert np.allclose(batched[i], single, rtol=1e-13, atol=0)


def test_zf_zero_interference_and_diagonal(rng):
    for M in (4, 8, 16, 64):
        H = complex_gaussian(rng, (M, 4)) * rng.uniform(1e-4, 1e-2, size=4)
        G = zf_precoder(normalize_columns(H)).entries
        P = G.T @ H
        norms = np.linalg.norm(H, axis=0)
        off = np.abs(P[~np.eye(4, dtype=bool)].reshape(4, 3))
        assert np.all(off <= 1e-9 * norms[None, :].repeat(4, 0)[~np.eye(4, dtype=bool)].reshape(4, 3))
        assert np.allclose(np.diagonal(P), norms, rtol=1e-9, atol=0)


def test_zf_scale_equivariance(rng):
    H = complex_gaussian(rng, (8, 4))
    c = 3.7 * np.exp(1j * 0.9)
    a = zf_precoder(normalize_columns(H)).entries.T @ normalize_columns(H).entries
    b = zf_precoder(normalize_columns(c * H)).entries.T @ normalize_columns(c * H).entries
    assert np.allclose(a, b, atol=1e-12)


def test_zf_normalize_option(rng):
    Hn = normalize_columns(complex_gaussian(rng, (8, 4)))
    G = zf_precoder(Hn, normalize=True)
    assert np.allclose(G.column_norms, 1.0, rtol=1e-12)
    assert np.all(zf_precoder(Hn).column_norms >= 1.0 - 1e-12)


def test_zf_requires_m_ge_k(rng):
    with pytest.raises(SingularMatrixError, match="M >= K"):
        zf_precoder(normalize_columns(complex_gaussian(rng, (2, 4))))


def test_zf_ill_conditioned():
    h = np.array([1.0, 1j, 0.5])
    H = np.stack([h, h + 1e-9, np.array([0, 0, 1.0])], axis=1)
    with pytest.raises(SingularMatrixError) as info:
        zf_precoder(normalize_columns(H))
    assert info.value.condition > 1e12


def test_zf_ill_conditioned_batch_index(rng):
    H = complex_gaussian(rng, (3, 4, 2))
    H[2, :, 1] = H[2, :, 0]
    with pytest.raises(SingularMatrixError) as info:
        zf_precoder(normalize_columns(H))
    assert info.value.index == (2,)


def test_build_precoder_unknown():
    with pytest.raises(ValueError):
        build_precoder("MMSE", normalize_columns(np.eye(2)))


def test_solve_identity(rng):
    B = complex_gaussian(rng, (4, 4))
    assert np.array_equal(solve_small_complex(np.eye(4), B), B)


def test_solve_diagonal():
    X = solve_small_complex(np.diag([2.0, 4.0]), np.eye(2))
    assert np.allclose(X, np.diag([0.5, 0.25]), rtol=0, atol=1e-15)


def test_solve_residual(rng):
    A = complex_gaussian(rng, (4, 4)) + 3 * np.eye(4)
    B = complex_gaussian(rng, (4, 4))
    X = solve_small_complex(A, B)
    assert np.linalg.norm(A @ X - B) < 1e-12
    assert np.allclose(X, np.linalg.solve(A, B), rtol=1e-12, atol=1e-13)


def test_solve_needs_pivoting():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.array_equal(solve_small_complex(A, np.array([2.0, 3.0])), np.array([3.0, 2.0]))


def test_solve_singular():
    with pytest.raises(SingularMatrixError):
        solve_small_complex(np.array([[1.0, 2.0], [2.0, 4.0]]), np.eye(2))
    with pytest.raises(SingularMatrixError):
        solve_small_complex(np.zeros((3, 3)), np.eye(3))


def test_solve_shape_errors():
    with pytest.raises(ValueError):
        solve_small_complex(np.ones((2, 3)), np.ones((2, 1)))
    with pytest.raises(ValueError):
        solve_small_complex(np.eye(65), np.eye(65))


def test_solve_max_size(rng):
    A = complex_gaussian(rng, (64, 64)) + 8 * np.eye(64)
    B = complex_gaussian(rng, (64, 64))
    X = solve_small_complex(A, B)
    assert np.linalg.norm(A @ X - B) <= 1e-10 * np.linalg.norm(B)


def _conditioned(n, log_cond, seed):
    r = np.random.default_rng(seed)
    U, _ = np.linalg.qr(complex_gaussian(r, (n, n)))
    V, _ = np.linalg.qr(complex_gaussian(r, (n, n)))
    A = (U * np.logspace(0, -log_cond, n)) @ V.conj().T
    return A, complex_gaussian(r, (n, n))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 12), log_cond=st.floats(0, 5), seed=st.integers(0, 2**32 - 1))
def test_solve_residual_property(n, log_cond, seed):
    A, B = _conditioned(n, log_cond, seed)
    X = solve_small_complex(A, B)
    assert np.linalg.norm(A @ X - B) <= 1e-10 * np.linalg.norm(B)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 12), log_cond=st.floats(0, 8), seed=st.integers(0, 2**32 - 1))
def test_solve_backward_stable(n, log_cond, seed):
    # up to cond 1e8 the residual floor is ~eps * cond * |B|, so check normwise backward error
    A, B = _conditioned(n, log_cond, seed)
    X = solve_small_complex(A, B)
    eps = np.finfo(float).eps
    assert np.linalg.norm(A @ X - B) <= 4 * n * eps * np.linalg.norm(A, 2) * np.linalg.norm(X)


@settings(max_examples=40, deadline=None)
@given(M=st.sampled_from([4, 8, 16, 64]), K=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_zf_identity_property(M, K, seed):
    Hn = normalize_columns(complex_gaussian(np.random.default_rng(seed), (M, K)))
    G = zf_precoder(Hn).entries
    assert np.allclose(G.T @ Hn.entries, np.eye(K), rtol=0, atol=1e-10)
