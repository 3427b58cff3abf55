"""QLP factorizations: the randomized algorithm and Stewart's pivoted
baseline, plus rank-k truncation and the operation-count models.

The randomized path computes, for an m x n input A (m >= n):

    omega = gaussian(m, n)
    qbar  = qr(A' omega).q          # n x n orthogonal
    q     = qr(A qbar).q            # m x n, spans range(A)
    p, r  = qr(A' q)                # third QR on the projected matrix
    l     = r'

Since qbar is square orthogonal, range(A qbar) = range(A), so q captures
the full range and A = q l p' holds to roundoff (not just approximately).
Everything is built from matrix products and unpivoted QR, i.e. level-3
style operations.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import NotApplicableError, ParameterError
from .kernels import cpqr, qr
from .rng import GaussianStream, gaussian_matrix
from .validation import as_matrix, require_finite, require_tall

__all__ = [
    "QlpFactors",
    "QlpBlocks",
    "rand_qlp",
    "pivoted_qlp",
    "rank_k_approx",
    "flops_rand_qlp",
    "flops_cpqr",
]


class QlpBlocks(NamedTuple):
    """Views of a QLP factorization partitioned at split index k."""

    q1: np.ndarray
    q2: np.ndarray
    l11: np.ndarray
    l21: np.ndarray
    l22: np.ndarray
    p1: np.ndarray
    p2: np.ndarray


@dataclass
class QlpFactors:
    """Factorization ``a = q @ l @ p.T``.

    q is m x n orthonormal, l is n x n lower triangular with nonnegative
    diagonal, p is n x n orthonormal. ``seed`` records the RNG seed of the
    randomized algorithm (None for the pivoted baseline), from which the
    sketch matrix can be regenerated on demand.
    """

    q: np.ndarray
    l: np.ndarray
    p: np.ndarray
    seed: Optional[int] = None

    @property
    def shape(self):
        return self.q.shape

    def reconstruct(self):
        # same association as rank_k_approx so full-rank truncation is
        # bit-identical to the full product
        return self.q @ (self.l @ self.p.T)

    def diag_estimates(self):
        """Diagonal magnitudes of L sorted descending: the singular value
        estimates in presentation order."""
        return np.sort(np.abs(np.diag(self.l)))[::-1]

    def blocks(self, k):
        n = self.l.shape[0]
        if not 1 <= k < n:
            raise ParameterError(f"split index must satisfy 1 <= k < {n}, got {k}")
        return QlpBlocks(
            q1=self.q[:, :k],
            q2=self.q[:, k:],
            l11=self.l[:k, :k],
            l21=self.l[k:, :k],
            l22=self.l[k:, k:],
            p1=self.p[:, :k],
            p2=self.p[:, k:],
        )

    def omega_head(self, k):
        """First k columns of the sketch matrix, regenerated from the seed.

        Column-major prefix generation makes an m x k redraw identical to
        slicing the full m x n sketch.
        """
        if self.seed is None:
            raise NotApplicableError(
                "no sketch seed recorded (deterministic factorization)"
            )
        m, n = self.q.shape
        if not 1 <= k <= n:
            raise ParameterError(f"k must satisfy 1 <= k <= {n}, got {k}")
        return gaussian_matrix(GaussianStream(self.seed), m, k)


def _as_stream(stream):
    if isinstance(stream, GaussianStream):
        return stream.fresh()
    return GaussianStream(stream)


def rand_qlp(a, stream, block_size=32):
    """Randomized QLP decomposition.

    Parameters
    ----------
    a : (m, n) array, m >= n, all entries finite.
    stream : GaussianStream or int seed. The sketch is a pure function of
        the stream's *seed* (the stream is rewound before drawing), so the
        result is reproducible from the recorded ``seed`` alone.
    block_size : QR panel width, forwarded to the QR kernel.

    Returns
    -------
    QlpFactors with exact reconstruction up to roundoff.
    """
    a = require_finite(require_tall(as_matrix(a, "a"), "a"), "a")
    stream = _as_stream(stream)
    m, n = a.shape
    omega = gaussian_matrix(stream, m, n)
    qbar = qr(a.T @ omega, block_size).q
    q = qr(a @ qbar, block_size).q
    pf = qr(a.T @ q, block_size)
    return QlpFactors(q=q, l=pf.r.T.copy(), p=pf.q, seed=stream.seed)


def pivoted_qlp(a):
    """Stewart's pivoted QLP: a CPQR of A followed by a CPQR of the
    transposed triangular factor.

    With ``A Pi1 = Q1 R1`` and ``R1' Pi2 = Q2 R2`` the composition gives
    ``A = (Q1 Pi2) R2' (Pi1 Q2)'``, so L = R2' comes out exactly lower
    triangular and its diagonal (in pivot order) estimates the singular
    values.
    """
    a = require_finite(require_tall(as_matrix(a, "a"), "a"), "a")
    first = cpqr(a)
    second = cpqr(first.r.T)
    q = first.q[:, second.perm]
    l = second.r.T.copy()
    p = np.empty_like(second.q)
    p[first.perm, :] = second.q
    return QlpFactors(q=q, l=l, p=p, seed=None)


def rank_k_approx(f, k):
    """Rank-k approximation from QLP factors: ``q @ l[:, :k] @ p[:, :k].T``."""
    n = f.l.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k must satisfy 1 <= k <= {n}, got {k}")
    return f.q @ (f.l[:, :k] @ f.p[:, :k].T)


def _check_counts(m, n):
    if not (m >= n >= 1):
        raise ParameterError(f"need m >= n >= 1, got m={m}, n={n}")


def flops_rand_qlp(m, n):
    """Operation count model for the randomized QLP: 8mn^2 + 3n^3 - 2n^2."""
    _check_counts(m, n)
    m, n = int(m), int(n)
    return 8 * m * n**2 + 3 * n**3 - 2 * n**2


def flops_cpqr(m, n):
    """Operation count model for CPQR: 2mn^2 + n^3 + 4(m^2 n - m n^2)."""
    _check_counts(m, n)
    m, n = int(m), int(n)
    return 2 * m * n**2 + n**3 + 4 * (m**2 * n - m * n**2)
