"""Input validation helpers.

Every public entry point funnels its array arguments through these so the
rest of the code can assume float64, 2-D, and (where required) finiteness
or orthonormality.
"""

import numpy as np

from .errors import ContractError, NonFiniteError, ShapeError

__all__ = ["as_matrix", "require_tall", "require_finite", "require_orthonormal"]


def as_matrix(x, name="a"):
    """Coerce ``x`` to a 2-D float64 ndarray."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ShapeError(f"{name} must be nonempty, got shape {a.shape}")
    return a


def require_tall(a, name="a"):
    """Raise unless ``a`` has at least as many rows as columns."""
    m, n = a.shape
    if m < n:
        raise ShapeError(f"{name} must have rows >= cols, got {m}x{n}")
    return a


def require_finite(a, name="a"):
    if not np.isfinite(a).all():
        raise NonFiniteError(f"{name} contains non-finite entries")
    return a


def require_orthonormal(x, name="x", tol=1e-8):
    """Raise unless the columns of ``x`` are orthonormal to within ``tol``."""
    x = as_matrix(x, name)
    gram = x.T @ x
    dev = np.abs(gram - np.eye(x.shape[1])).max()
    if dev > tol:
        raise ContractError(
            f"{name} does not have orthonormal columns: max |X'X - I| = {dev:.3e} > {tol:.1e}"
        )
    return x
