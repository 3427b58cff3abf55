"""Shared test utilities. Oracles here deliberately use numpy/LAPACK or
naive loops so they stay independent of the package's own kernels."""

import numpy as np


def np_haar(rng, n):
    """Haar orthogonal matrix via numpy's QR (independent of the package)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def make_matrix(rng, m, n, sigma):
    """Dense m x n matrix with prescribed singular values."""
    sigma = np.asarray(sigma, dtype=np.float64)
    u = np_haar(rng, m)[:, :n]
    v = np_haar(rng, n)
    return (u * sigma) @ v.T, u, v


def naive_matmul(a, b):
    """Triple-loop product, the reference for the BLAS-backed kernel."""
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for l in range(k):
                acc += a[i, l] * b[l, j]
            out[i, j] = acc
    return out


def naive_gram(x):
    """Triple-loop x' x, independent route for orthonormality checks."""
    return naive_matmul(x.T.copy(), x)


def rel_resid(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(a)
