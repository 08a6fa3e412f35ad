"""Column-normalized channels and MRT / ZF precoders.

All functions accept a single ``(M, K)`` matrix or a stack ``(..., M, K)``.
The transpose in the ZF Gram matrix is a plain transpose (no conjugation):
``G = conj(Hn) @ inv(Hn.T @ conj(Hn))``, which makes ``G.T @ Hn`` the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError

MRT = "MRT"
ZF = "ZF"
PRECODER_KINDS = (MRT, ZF)

MAX_SOLVE_SIZE = 64
DEFAULT_CONDITION_LIMIT = 1e12


def _entries(H) -> np.ndarray:
    return np.asarray(getattr(H, "entries", H), dtype=complex)


@dataclass(frozen=True)
class NormalizedChannelMatrix:
    entries: np.ndarray
    column_norms: np.ndarray
    source: object = None


@dataclass(frozen=True)
class PrecodingMatrix:
    entries: np.ndarray
    kind: str

    @property
    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.entries, axis=-2)


def normalize_columns(H) -> NormalizedChannelMatrix:
    """Scale every column of ``H`` to unit Euclidean norm."""
    entries = _entries(H)
    if entries.ndim < 2:
        raise ValueError(f"channel must be at least 2-D, got shape {entries.shape}")
    norms = np.linalg.norm(entries, axis=-2)
    if not np.all(norms > 0):
        bad = np.argwhere(~(norms > 0))[0]
        raise ValueError(f"zero channel column at index {tuple(bad.tolist())}: UE has no channel")
    return NormalizedChannelMatrix(entries / norms[..., None, :], norms, H)


def mrt_precoder(Hn: NormalizedChannelMatrix) -> PrecodingMatrix:
    return PrecodingMatrix(np.conj(_entries(Hn)), MRT)


def solve_small_complex(A, B, pivot_tol: float = 1e-14) -> np.ndarray:
    """Solve ``A @ X = B`` by Gaussian elimination with partial pivoting.

    ``A`` is ``(..., n, n)`` and ``B`` is ``(..., n, r)`` or ``(..., n)``; the
    leading batch dimensions broadcast. A pivot smaller than ``pivot_tol``
    times the largest entry of its matrix raises :class:`SingularMatrixError`.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    n = A.shape[-1]
    if n > MAX_SOLVE_SIZE:
        raise ValueError(f"solve_small_complex handles n <= {MAX_SOLVE_SIZE}, got {n}")
    vector = B.ndim == A.ndim - 1
    if vector:
        B = B[..., None]
    if B.shape[-2] != n:
        raise ValueError(f"B has {B.shape[-2]} rows, A is {n}x{n}")
    batch = np.broadcast_shapes(A.shape[:-2], B.shape[:-2])
    r = B.shape[-1]
    a = np.broadcast_to(A, batch + (n, n)).reshape(-1, n, n).copy()
    b = np.broadcast_to(B, batch + (n, r)).reshape(-1, n, r).copy()
    rows = np.arange(a.shape[0])
    scale = np.abs(a).max(axis=(1, 2), initial=0.0)

    for j in range(n):
        p = j + np.argmax(np.abs(a[:, j:, j]), axis=1)
        a[rows, j], a[rows, p] = a[rows, p], a[rows, j].copy()
        b[rows, j], b[rows, p] = b[rows, p], b[rows, j].copy()
        pivot = a[:, j, j]
        small = ~(np.abs(pivot) > pivot_tol * scale)
        if np.any(small):
            i = int(np.argmax(small))
            where = np.unravel_index(i, batch) if batch else ()
            raise SingularMatrixError(
                f"matrix{' at batch index ' + str(where) if batch else ''} is singular to "
                f"working precision (pivot {abs(pivot[i]):.3e} in column {j})",
                index=where,
            )
        factors = a[:, j + 1:, j] / pivot[:, None]
        a[:, j + 1:, j:] -= factors[:, :, None] * a[:, None, j, j:]
        b[:, j + 1:] -= factors[:, :, None] * b[:, None, j]

    x = np.empty_like(b)
    for i in range(n - 1, -1, -1):
        acc = np.einsum("bj,bjr->br", a[:, i, i + 1:], x[:, i + 1:])
        x[:, i] = (b[:, i] - acc) / a[:, i, i][:, None]
    x = x.reshape(batch + (n, r))
    return x[..., 0] if vector else x


def gram_matrix(Hn) -> np.ndarray:
    """``Hn.T @ conj(Hn)`` (plain transpose), shape ``(..., K, K)``."""
    H = _entries(Hn)
    return np.swapaxes(H, -1, -2) @ np.conj(H)


def zf_precoder(
    Hn: NormalizedChannelMatrix,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
    normalize: bool = False,
) -> PrecodingMatrix:
    """Zero-forcing precoder ``conj(Hn) @ inv(Hn.T @ conj(Hn))``.

    Columns are left unnormalized unless ``normalize`` is set. Raises
    :class:`SingularMatrixError` when ``M < K`` or when the Gram matrix
    condition number exceeds ``condition_limit``.
    """
    H = _entries(Hn)
    M, K = H.shape[-2:]
    if M < K:
        raise SingularMatrixError(f"zero-forcing needs M >= K, got M={M}, K={K}")
    gram = gram_matrix(H)
    cond = np.linalg.cond(gram)
    bad = ~(cond <= condition_limit)
    if np.any(bad):
        where = tuple(np.argwhere(bad)[0].tolist()) if bad.ndim else ()
        c = float(cond[where]) if bad.ndim else float(cond)
        raise SingularMatrixError(
            f"Gram matrix{' at batch index ' + str(where) if where else ''} is ill-conditioned "
            f"(condition number {c:.3e} > {condition_limit:.1e})",
            condition=c,
            index=where,
        )
    eye = np.broadcast_to(np.eye(K, dtype=complex), gram.shape)
    G = np.conj(H) @ solve_small_complex(gram, eye)
    if normalize:
        G = G / np.linalg.norm(G, axis=-2)[..., None, :]
    return PrecodingMatrix(G, ZF)


def build_precoder(kind: str, Hn: NormalizedChannelMatrix, **kwargs) -> PrecodingMatrix:
    if kind == MRT:
        return mrt_precoder(Hn)
    if kind == ZF:
        return zf_precoder(Hn, **kwargs)
    raise ValueError(f"unknown precoder kind {kind!r}, expected one of {PRECODER_KINDS}")
