"""Dense kernels: matrix product, blocked Householder QR, column-pivoted QR,
one-sided Jacobi SVD, and spectral norm estimation.

All routines operate on float64 ndarrays and return new arrays; inputs are
never modified. QR-family factorizations use the sign convention that the
triangular factor has a nonnegative diagonal (reflector signs are flipped
after the reduction), so diagonals are directly usable as singular value
estimates.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ParameterError, ShapeError
from .rng import GaussianStream, gaussian_matrix
from .validation import as_matrix, require_tall

__all__ = [
    "QrFactors",
    "CpqrFactors",
    "SvdFactors",
    "matmul",
    "qr",
    "cpqr",
    "jacobi_svd",
    "spectral_norm",
]

_EPS = np.finfo(np.float64).eps

# internal seed for power iteration starts and orthonormal basis completion;
# fixed so every call is deterministic
_INTERNAL_SEED = 0x5EED_BA5E


@dataclass
class QrFactors:
    """Thin QR decomposition ``a = q @ r``.

    ``q`` is m x n with orthonormal columns, ``r`` is n x n upper
    triangular with a nonnegative diagonal.
    """

    q: np.ndarray
    r: np.ndarray


@dataclass
class CpqrFactors:
    """Column-pivoted QR: ``a[:, perm] = q @ r``.

    ``perm`` holds the original column index placed at each pivot position,
    i.e. the permutation matrix is ``I[:, perm]``. Diagonal magnitudes of
    ``r`` are nonincreasing.
    """

    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray

    def permutation_matrix(self):
        return np.eye(len(self.perm))[:, self.perm]


@dataclass
class SvdFactors:
    """Thin SVD ``a = u @ diag(sigma) @ v.T`` with sigma sorted nonincreasing."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def split(self, k):
        """Views of the factors partitioned at index ``k``:
        (u_k, u_perp, sigma_k, sigma_perp, v_k, v_perp)."""
        return (
            self.u[:, :k],
            self.u[:, k:],
            self.sigma[:k],
            self.sigma[k:],
            self.v[:, :k],
            self.v[:, k:],
        )

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


def matmul(a, b, transpose_a=False, transpose_b=False):
    """Matrix product with optional transposition of either operand.

    Delegates to the BLAS-backed ``@`` operator, which executes
    cache-blocked. Raises ShapeError naming both effective shapes when the
    inner dimensions disagree.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if transpose_a:
        a = a.T
    if transpose_b:
        b = b.T
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"inner dimensions disagree: {a.shape[0]}x{a.shape[1]} times "
            f"{b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def _reflector(x):
    """LAPACK-style Householder reflector for a column ``x``.

    Returns (tau, beta) and overwrites ``x[1:]`` with the reflector tail
    (implicit leading 1). tau == 0 means the column is already reduced.
    """
    alpha = x[0]
    sq = x[1:] @ x[1:]
    if sq == 0.0:
        return 0.0, alpha
    norm = np.sqrt(alpha * alpha + sq)
    beta = -norm if alpha >= 0.0 else norm
    tau = (beta - alpha) / beta
    x[1:] /= alpha - beta
    return tau, beta


def _build_t(v, taus):
    """Upper-triangular T with (I - v1 t1 v1') ... (I - vb tb vb') = I - V T V'."""
    b = v.shape[1]
    t = np.zeros((b, b))
    vtv = v.T @ v
    for i in range(b):
        t[i, i] = taus[i]
        if i > 0:
            t[:i, i] = -taus[i] * (t[:i, :i] @ vtv[:i, i])
    return t


def _fix_signs(q, r):
    """Flip (column of q, row of r) pairs so diag(r) >= 0."""
    d = np.sign(np.diag(r)).copy()
    d[d == 0.0] = 1.0
    r *= d[:, None]
    q *= d[None, :]
    return q, r


def _factor_panel(panel, taus):
    """Householder-reduce a contiguous panel in place.

    Reflector tails land below the diagonal. The per-column projection and
    rank-1 update stay on single-threaded numpy paths on purpose: threaded
    BLAS level-2 calls at these sizes lose badly to synchronization
    overhead, and erratically so on busy machines.
    """
    rows, b = panel.shape
    w_buf = np.empty(b)
    scratch = np.empty_like(panel)
    for j in range(b):
        col = panel[j:, j]
        alpha = col[0]
        sq = col[1:] @ col[1:]
        if sq == 0.0:
            taus[j] = 0.0
            continue
        norm = np.sqrt(alpha * alpha + sq)
        beta = -norm if alpha >= 0.0 else norm
        taus[j] = (beta - alpha) / beta
        col[1:] /= alpha - beta
        if j + 1 < b:
            col[0] = 1.0
            sub = panel[j:, j + 1 :]
            w = np.einsum("i,ij->j", col, sub, out=w_buf[: b - j - 1])
            w *= taus[j]
            tmp = scratch[: rows - j, : b - j - 1]
            np.multiply.outer(col, w, out=tmp)
            sub -= tmp
        col[0] = beta


def qr(a, block_size=32):
    """Thin QR via blocked Householder reflections (compact-WY).

    Parameters
    ----------
    a : (m, n) array, m >= n
    block_size : panel width for the compact-WY update; panels narrower
        than the block fall back to the unblocked path automatically.

    Returns
    -------
    QrFactors with ``q`` m x n orthonormal and ``r`` n x n upper triangular,
    diag(r) >= 0.
    """
    a = require_tall(as_matrix(a, "a"), "a")
    if block_size < 1:
        raise ParameterError(f"block_size must be >= 1, got {block_size}")
    m, n = a.shape
    work = np.array(a, dtype=np.float64, order="F")
    panels = []
    for j0 in range(0, n, block_size):
        j1 = min(j0 + block_size, n)
        taus = np.empty(j1 - j0)
        panel = np.array(work[j0:, j0:j1], order="F")
        _factor_panel(panel, taus)
        work[j0:, j0:j1] = panel
        v = np.tril(panel, -1)
        np.fill_diagonal(v, 1.0)
        t = _build_t(v, taus)
        panels.append((j0, v, t))
        if j1 < n:
            w = v.T @ work[j0:, j1:]
            work[j0:, j1:] -= v @ (t.T @ w)
    q = np.zeros((m, n), order="F")
    np.fill_diagonal(q, 1.0)
    for j0, v, t in reversed(panels):
        w = v.T @ q[j0:, :]
        q[j0:, :] -= v @ (t @ w)
    r = np.triu(work[:n, :])
    q, r = _fix_signs(q, r)
    return QrFactors(q=q, r=r)


def cpqr(a):
    """Column-pivoted QR (Householder, greedy 2-norm pivoting).

    At each step the remaining column with the largest trailing 2-norm is
    swapped into pivot position (lowest index wins ties). Trailing norms
    are downdated and recomputed whenever the downdate falls below 0.1x
    the reference value, guarding against cancellation.

    Returns CpqrFactors with ``a[:, perm] = q @ r`` and nonincreasing
    |diag(r)|.
    """
    a = require_tall(as_matrix(a, "a"), "a")
    m, n = a.shape
    work = np.array(a, dtype=np.float64, order="F")
    perm = np.arange(n)
    taus = np.empty(n)
    partial = np.linalg.norm(work, axis=0)
    reference = partial.copy()
    for k in range(n):
        pivot = k + int(np.argmax(partial[k:]))
        if pivot != k:
            work[:, [k, pivot]] = work[:, [pivot, k]]
            perm[[k, pivot]] = perm[[pivot, k]]
            partial[[k, pivot]] = partial[[pivot, k]]
            reference[[k, pivot]] = reference[[pivot, k]]
        col = work[k:, k]
        tau, beta = _reflector(col)
        taus[k] = tau
        if tau != 0.0 and k + 1 < n:
            col[0] = 1.0
            w = col @ work[k:, k + 1 :]
            work[k:, k + 1 :] -= np.multiply.outer(tau * col, w)
        col[0] = beta
        if k + 1 < n:
            sq = partial[k + 1 :] ** 2 - work[k, k + 1 :] ** 2
            np.clip(sq, 0.0, None, out=sq)
            downdated = np.sqrt(sq)
            stale = downdated < 0.1 * reference[k + 1 :]
            if stale.any():
                idx = np.nonzero(stale)[0] + k + 1
                fresh = np.linalg.norm(work[k + 1 :, idx], axis=0)
                downdated[stale] = fresh
                reference[idx] = fresh
            partial[k + 1 :] = downdated
    q = np.zeros((m, n), order="F")
    np.fill_diagonal(q, 1.0)
    for k in range(n - 1, -1, -1):
        if taus[k] == 0.0:
            continue
        v = work[k:, k].copy()
        v[0] = 1.0
        w = v @ q[k:, :]
        q[k:, :] -= np.multiply.outer(taus[k] * v, w)
    r = np.triu(work[:n, :])
    q, r = _fix_signs(q, r)
    return CpqrFactors(q=q, r=r, perm=perm)


def _round_robin_rounds(slots):
    """Column pairings of a round-robin tournament over ``slots`` players."""
    order = list(range(slots))
    rounds = []
    for _ in range(slots - 1):
        ps = np.array(order[: slots // 2])
        qs = np.array(order[: slots // 2 - 1 : -1])
        rounds.append((ps, qs))
        order = [order[0], order[-1]] + order[1:-1]
    return rounds


def _complete_orthonormal(u, columns):
    """Fill ``u[:, columns]`` with an orthonormal complement of the rest."""
    m = u.shape[0]
    good = np.ones(u.shape[1], dtype=bool)
    good[columns] = False
    basis = u[:, good]
    g = gaussian_matrix(GaussianStream(_INTERNAL_SEED), m, len(columns))
    for _ in range(2):
        g -= basis @ (basis.T @ g)
    u[:, columns] = qr(g).q


def jacobi_svd(a, tol=1e-14, max_sweeps=60):
    """One-sided Jacobi SVD, used as the accuracy oracle.

    Plane rotations are applied to column pairs (round-robin ordering,
    disjoint pairs rotated in a single vectorized step) until every
    off-diagonal Gram entry satisfies ``|g_ij| <= tol * sqrt(g_ii * g_jj)``.

    Returns SvdFactors; raises ConvergenceError carrying the sweep count
    and the worst remaining off-diagonal ratio if ``max_sweeps`` full
    sweeps do not reach the criterion.
    """
    a = require_tall(as_matrix(a, "a"), "a")
    m, n = a.shape
    w = np.array(a, dtype=np.float64, order="F")
    v = np.zeros((n, n), order="F")
    np.fill_diagonal(v, 1.0)
    if n == 1:
        rounds = []
    else:
        rounds = _round_robin_rounds(n + (n % 2))
    converged = n == 1
    for sweep in range(max_sweeps):
        rotated = False
        for ps, qs in rounds:
            keep = (ps < n) & (qs < n)
            ps_, qs_ = ps[keep], qs[keep]
            wp = w[:, ps_]
            wq = w[:, qs_]
            app = np.einsum("ij,ij->j", wp, wp)
            aqq = np.einsum("ij,ij->j", wq, wq)
            apq = np.einsum("ij,ij->j", wp, wq)
            live = np.abs(apq) > tol * np.sqrt(app * aqq)
            if not live.any():
                continue
            rotated = True
            ps_, qs_ = ps_[live], qs_[live]
            app, aqq, apq = app[live], aqq[live], apq[live]
            wp, wq = wp[:, live], wq[:, live]
            # classical stable rotation: zero the (p, q) Gram entry
            tau = (aqq - app) / (2.0 * apq)
            t = np.where(
                tau == 0.0, 1.0, np.sign(tau) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            )
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            w[:, ps_] = c * wp - s * wq
            w[:, qs_] = s * wp + c * wq
            vp = v[:, ps_]
            vq = v[:, qs_]
            v[:, ps_] = c * vp - s * vq
            v[:, qs_] = s * vp + c * vq
        if not rotated:
            converged = True
            break
    if not converged and rounds:
        gram = w.T @ w
        d = np.sqrt(np.diag(gram))
        scale = np.multiply.outer(d, d)
        scale[scale == 0.0] = 1.0
        off = np.abs(gram / scale)
        np.fill_diagonal(off, 0.0)
        raise ConvergenceError(
            f"one-sided Jacobi did not converge in {max_sweeps} sweeps "
            f"(max off-diagonal ratio {off.max():.3e})",
            sweeps=max_sweeps,
            max_offdiag=float(off.max()),
        )
    sigma = np.sqrt(np.einsum("ij,ij->j", w, w))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    w = w[:, order]
    v = v[:, order]
    u = np.zeros((m, n), order="F")
    cutoff = m * _EPS * sigma[0]
    nonzero = sigma > cutoff
    u[:, nonzero] = w[:, nonzero] / sigma[nonzero]
    dead = np.nonzero(~nonzero)[0]
    if dead.size:
        _complete_orthonormal(u, dead)
    return SvdFactors(u=u, sigma=sigma, v=v)


def spectral_norm(a, tol=1e-8, max_iter=500):
    """Largest singular value.

    Power iteration on ``a.T @ a`` from a seeded random start, stopping when
    the estimate's relative change drops below ``tol``. Matrices with
    ``min(m, n) <= 32`` go through :func:`jacobi_svd` for an exact answer.
    If ``max_iter`` is exhausted the best estimate is returned and a
    RuntimeWarning flags the non-convergence.
    """
    a = as_matrix(a, "a")
    if tol <= 0.0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    m, n = a.shape
    if min(m, n) <= 32:
        work = a if m >= n else a.T
        return float(jacobi_svd(work).sigma[0])
    v = gaussian_matrix(GaussianStream(_INTERNAL_SEED), n, 1)[:, 0]
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        av = a @ v
        new = np.linalg.norm(av)
        if new == 0.0:
            return 0.0
        v = a.T @ av
        v /= np.linalg.norm(v)
        if abs(new - estimate) <= tol * new:
            return float(new)
        estimate = new
    warnings.warn(
        f"spectral norm power iteration did not converge in {max_iter} iterations; "
        f"returning best estimate {estimate:.6e}",
        RuntimeWarning,
        stacklevel=2,
    )
    return float(estimate)
