"""Approximation quality metrics: subspace distances, singular value
comparison tables, and rank-k error curves with their optimal baselines."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .decompositions import rank_k_approx
from .errors import ParameterError
from .kernels import jacobi_svd, spectral_norm
from .validation import as_matrix, require_orthonormal

__all__ = [
    "SvComparison",
    "ApproxErrorCurve",
    "subspace_distance",
    "relative_error",
    "sv_compare",
    "lowrank_error_curve",
    "write_sv_comparison_csv",
    "write_error_curve_csv",
]


_EXACT_COLS = 64


def subspace_distance(x, y):
    """Distance between the column spans of two orthonormal bases.

    Computed as the largest singular value of ``y - x (x' y)``, the stable
    form of ``(I - x x') y``. For equal-dimension subspaces this is the
    sine of the largest canonical angle. Inputs must have orthonormal
    columns (checked to 1e-8); the result is clamped into [0, 1].

    The residual's top singular value comes from the Jacobi oracle when y
    has at most 64 columns (exact); wider subspaces fall back to power
    iteration, whose underestimate can be noticeable when many canonical
    angles coincide.
    """
    x = require_orthonormal(x, "x")
    y = require_orthonormal(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ParameterError(
            f"bases live in different spaces: {x.shape[0]} vs {y.shape[0]} rows"
        )
    resid = y - x @ (x.T @ y)
    if resid.shape[1] <= _EXACT_COLS:
        s = jacobi_svd(resid).sigma[0]
    else:
        s = spectral_norm(resid, tol=1e-12, max_iter=2000)
    return float(min(max(s, 0.0), 1.0))


def relative_error(reference, estimate):
    """|estimate - reference| / reference, with the zero-reference rule:
    0 when both are zero, inf when only the reference is."""
    if reference == 0.0:
        return 0.0 if estimate == 0.0 else math.inf
    return abs(estimate - reference) / reference


@dataclass
class SvComparison:
    """One row of a singular value comparison: oracle value at ``index``
    against each algorithm's estimate."""

    index: int
    reference: float
    estimates: dict
    relative_errors: dict


def sv_compare(oracle, estimates):
    """Compare estimated singular values against the oracle, per index.

    Parameters
    ----------
    oracle : SvdFactors or a bare reference vector (sorted nonincreasing)
    estimates : list of (name, vector) pairs; each vector must have the
        same length as the oracle spectrum and be sorted descending.
    """
    reference = np.asarray(getattr(oracle, "sigma", oracle), dtype=np.float64)
    n = len(reference)
    named = []
    for name, vec in estimates:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (n,):
            raise ParameterError(
                f"estimate '{name}' has length {vec.size}, expected {n}"
            )
        named.append((name, vec))
    rows = []
    for i in range(n):
        est = {name: float(vec[i]) for name, vec in named}
        rel = {name: relative_error(float(reference[i]), e) for name, e in est.items()}
        rows.append(
            SvComparison(
                index=i, reference=float(reference[i]), estimates=est, relative_errors=rel
            )
        )
    return rows


@dataclass
class ApproxErrorCurve:
    """Rank-k approximation errors over a grid of ranks, with the optimal
    (best-possible) baselines computed from the oracle spectrum."""

    ks: list
    frobenius: list
    spectral: list
    optimal_frobenius: list
    optimal_spectral: list


def lowrank_error_curve(a, factors, ks, oracle):
    """Evaluate ||a - a_k||_F and ||a - a_k||_2 for each rank in ``ks``.

    The optimal baselines are sqrt(sum_{i>k} sigma_i^2) and sigma_{k+1}
    from the oracle spectrum.
    """
    a = as_matrix(a, "a")
    n = factors.l.shape[0]
    ks = list(ks)
    if not ks or any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
        raise ParameterError("ks must be nonempty and strictly increasing")
    if ks[0] < 1 or ks[-1] > n:
        raise ParameterError(f"ks must lie within [1, {n}], got {ks}")
    sigma = np.asarray(oracle.sigma, dtype=np.float64)
    tail_sq = np.concatenate([np.cumsum(sigma[::-1] ** 2)[::-1], [0.0]])
    frob, spec, opt_f, opt_s = [], [], [], []
    for k in ks:
        diff = a - rank_k_approx(factors, k)
        frob.append(float(np.linalg.norm(diff)))
        spec.append(float(spectral_norm(diff, tol=1e-8, max_iter=1000)))
        opt_f.append(float(np.sqrt(tail_sq[k])))
        opt_s.append(float(sigma[k]) if k < n else 0.0)
    return ApproxErrorCurve(
        ks=ks,
        frobenius=frob,
        spectral=spec,
        optimal_frobenius=opt_f,
        optimal_spectral=opt_s,
    )


def write_error_curve_csv(curve, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "frob", "frob_opt", "spec", "spec_opt"])
        for row in zip(
            curve.ks, curve.frobenius, curve.optimal_frobenius, curve.spectral,
            curve.optimal_spectral,
        ):
            writer.writerow([row[0]] + [repr(v) for v in row[1:]])


def write_sv_comparison_csv(rows, path):
    names = list(rows[0].estimates) if rows else []
    header = ["i", "sigma_ref"]
    header += [f"sigma_{name}" for name in names]
    header += [f"relerr_{name}" for name in names]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            record = [row.index, repr(row.reference)]
            record += [repr(row.estimates[name]) for name in names]
            record += [repr(row.relative_errors[name]) for name in names]
            writer.writerow(record)
