"""Deterministic synthetic test matrices with known ground-truth factors,
plus a Matrix Market reader for external inputs.

A matrix is built as ``a = u @ diag(sigma) @ v.T`` from Haar-random
orthogonal factors, with an optional additive Gaussian perturbation for the
noisy low-rank profile. The construction factors are retained so noiseless
instances come with their exact SVD.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ParameterError, ParseError
from .kernels import SvdFactors, qr
from .rng import GaussianStream, gaussian_matrix

__all__ = [
    "KINDS",
    "SpectrumSpec",
    "TestMatrix",
    "random_orthogonal",
    "sigma_profile",
    "build",
    "matrix_market_read",
]

KINDS = ("noisy-low-rank", "fast-decay", "s-shaped", "linear", "custom")
NOISE_MODES = ("spectral", "entry", "fro")

_DEFAULT_MEM_CAP = 2 * 1024**3


@dataclass
class SpectrumSpec:
    """Declarative description of a synthetic singular value profile.

    kind selects the profile; ``k`` is the gap/rank index (required for
    noisy-low-rank); ``noise_level`` scales the additive perturbation of
    the noisy profile relative to sigma_k and is ignored by the noiseless
    kinds. ``params`` holds kind-specific knobs:

    - noisy-low-rank: ramp_start (1.0), ramp_end (1e-3), noise_mode
      ("spectral" scales the perturbation to unit spectral norm, "entry"
      leaves i.i.d. unit-variance entries, "fro" scales to unit Frobenius
      norm)
    - s-shaped: ceil (1.0), floor (0.01), midpoint (n/2), steepness (20/n)
    - linear: start (1.0), end (1e-3)
    - custom: values (explicit nonincreasing spectrum)
    """

    kind: str
    n: int
    k: int = None
    noise_level: float = 0.05
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown spectrum kind {self.kind!r}; choose from {KINDS}")
        if self.n < 2:
            raise ParameterError(f"n must be >= 2, got {self.n}")
        if self.kind == "noisy-low-rank":
            if self.k is None or not 1 <= self.k < self.n:
                raise ParameterError(
                    f"noisy-low-rank needs 1 <= k < n, got k={self.k}, n={self.n}"
                )
            if self.noise_level < 0:
                raise ParameterError(f"noise_level must be >= 0, got {self.noise_level}")
            mode = self.params.get("noise_mode", "spectral")
            if mode not in NOISE_MODES:
                raise ParameterError(f"noise_mode must be one of {NOISE_MODES}, got {mode!r}")
        if self.k is not None and not 1 <= self.k < self.n:
            raise ParameterError(f"k must satisfy 1 <= k < n, got k={self.k}, n={self.n}")
        if self.kind == "custom":
            values = self.params.get("values")
            if values is None or len(values) != self.n:
                raise ParameterError("custom spectrum needs params['values'] of length n")

    def to_dict(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "k": self.k,
            "noise_level": self.noise_level,
            "params": dict(self.params),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data):
        return cls(
            kind=data["kind"],
            n=int(data["n"]),
            k=None if data.get("k") is None else int(data["k"]),
            noise_level=float(data.get("noise_level", 0.05)),
            params=dict(data.get("params", {})),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass
class TestMatrix:
    """A generated matrix together with the ground truth of its noiseless
    part and the seed that produced it."""

    a: np.ndarray
    u_true: np.ndarray
    sigma_true: np.ndarray
    v_true: np.ndarray
    spec: SpectrumSpec
    seed: int

    @property
    def is_exact(self):
        """True when the construction factors are the exact SVD of ``a``."""
        return self.spec.kind != "noisy-low-rank" or self.spec.noise_level == 0.0

    def construction_factors(self):
        return SvdFactors(u=self.u_true, sigma=self.sigma_true, v=self.v_true)


def random_orthogonal(stream, n):
    """Haar-distributed n x n orthogonal matrix (QR of a Gaussian draw;
    the nonnegative-diagonal sign convention makes the distribution Haar)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if n == 1:
        stream.normals(1)
        return np.ones((1, 1))
    return qr(gaussian_matrix(stream, n, n)).q


def sigma_profile(spec):
    """Ground-truth singular values for a spectrum description."""
    n = spec.n
    idx = np.arange(1, n + 1, dtype=np.float64)
    if spec.kind == "noisy-low-rank":
        start = float(spec.params.get("ramp_start", 1.0))
        end = float(spec.params.get("ramp_end", 1e-3))
        sigma = np.zeros(n)
        sigma[: spec.k] = np.linspace(start, end, spec.k)
    elif spec.kind == "fast-decay":
        sigma = idx**-2.0
    elif spec.kind == "s-shaped":
        ceil = float(spec.params.get("ceil", 1.0))
        floor = float(spec.params.get("floor", 0.01))
        midpoint = float(spec.params.get("midpoint", n / 2.0))
        steepness = float(spec.params.get("steepness", 20.0 / n))
        sigma = floor + (ceil - floor) / (1.0 + np.exp(steepness * (idx - midpoint)))
    elif spec.kind == "linear":
        start = float(spec.params.get("start", 1.0))
        end = float(spec.params.get("end", 1e-3))
        sigma = np.linspace(start, end, n)
    else:
        sigma = np.asarray(spec.params["values"], dtype=np.float64)
    if (sigma < 0).any() or (np.diff(sigma) > 0).any():
        raise ParameterError("spectrum must be nonnegative and nonincreasing")
    return sigma


def build(spec, seed):
    """Construct the matrix for a spectrum description, deterministically
    for a given (spec, seed) pair."""
    stream = GaussianStream(seed)
    n = spec.n
    u = random_orthogonal(stream, n)
    v = random_orthogonal(stream, n)
    sigma = sigma_profile(spec)
    a = (u * sigma) @ v.T
    if spec.kind == "noisy-low-rank" and spec.noise_level > 0.0:
        g = gaussian_matrix(stream, n, n)
        mode = spec.params.get("noise_mode", "spectral")
        if mode == "spectral":
            # i.i.d. N(0, 1/n) entries have spectral norm ~2 for large n
            g /= 2.0 * np.sqrt(n)
        elif mode == "fro":
            g /= np.linalg.norm(g)
        a = a + spec.noise_level * sigma[spec.k - 1] * g
    return TestMatrix(a=a, u_true=u, sigma_true=sigma, v_true=v, spec=spec, seed=int(seed))


def _parse_header(line, path):
    tokens = line.strip().lower().split()
    if len(tokens) < 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
        raise ParseError("not a Matrix Market file (bad banner)", lineno=1, path=path)
    layout, fld, symmetry = tokens[2], tokens[3], tokens[4]
    if layout not in ("coordinate", "array"):
        raise ParseError(f"unsupported layout {layout!r}", lineno=1, path=path)
    if fld != "real":
        raise ParseError(f"unsupported field {fld!r} (only 'real')", lineno=1, path=path)
    if symmetry not in ("general", "symmetric"):
        raise ParseError(
            f"unsupported symmetry {symmetry!r} (only 'general'/'symmetric')",
            lineno=1,
            path=path,
        )
    return layout, symmetry


def _parse_float(token, lineno, path):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"bad numeric value {token!r}", lineno=lineno, path=path) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", lineno=lineno, path=path)
    return value


def matrix_market_read(path, mem_cap=_DEFAULT_MEM_CAP):
    """Read a Matrix Market file (coordinate or array, real, general or
    symmetric) into a dense array.

    1-based indices are converted, duplicate coordinate entries are summed,
    and symmetric storage is mirrored. Files whose dense size would exceed
    ``mem_cap`` bytes raise CapacityError; malformed content raises
    ParseError carrying the line number.
    """
    path = str(path)
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError("empty file", lineno=1, path=path)
    layout, symmetry = _parse_header(lines[0], path)

    body = [
        (i + 1, line.strip())
        for i, line in enumerate(lines)
        if i > 0 and line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        raise ParseError("missing size line", lineno=len(lines), path=path)
    lineno, size_line = body[0]
    tokens = size_line.split()
    expected = 3 if layout == "coordinate" else 2
    if len(tokens) != expected:
        raise ParseError(
            f"size line needs {expected} integers, got {len(tokens)}",
            lineno=lineno,
            path=path,
        )
    try:
        dims = [int(t) for t in tokens]
    except ValueError:
        raise ParseError("size line is not integral", lineno=lineno, path=path) from None
    rows, cols = dims[0], dims[1]
    if rows < 1 or cols < 1:
        raise ParseError(f"bad dimensions {rows}x{cols}", lineno=lineno, path=path)
    if symmetry == "symmetric" and rows != cols:
        raise ParseError("symmetric matrix must be square", lineno=lineno, path=path)
    if rows * cols * 8 > mem_cap:
        raise CapacityError(
            f"dense {rows}x{cols} needs {rows * cols * 8} bytes, cap is {mem_cap}"
        )
    a = np.zeros((rows, cols), order="F")

    if layout == "coordinate":
        nnz = dims[2]
        entries = body[1:]
        if len(entries) != nnz:
            raise ParseError(
                f"expected {nnz} entries, found {len(entries)}",
                lineno=entries[-1][0] if entries else lineno,
                path=path,
            )
        for entry_lineno, line in entries:
            tokens = line.split()
            if len(tokens) != 3:
                raise ParseError("entry needs 'i j value'", lineno=entry_lineno, path=path)
            try:
                i, j = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise ParseError(
                    "entry indices are not integral", lineno=entry_lineno, path=path
                ) from None
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise ParseError(
                    f"index ({i}, {j}) out of range for {rows}x{cols}",
                    lineno=entry_lineno,
                    path=path,
                )
            value = _parse_float(tokens[2], entry_lineno, path)
            a[i - 1, j - 1] += value
            if symmetry == "symmetric" and i != j:
                a[j - 1, i - 1] += value
    else:
        values = []
        for entry_lineno, line in body[1:]:
            for token in line.split():
                values.append((entry_lineno, token))
        if symmetry == "symmetric":
            needed = rows * (rows + 1) // 2
        else:
            needed = rows * cols
        if len(values) != needed:
            raise ParseError(
                f"expected {needed} array values, found {len(values)}",
                lineno=values[-1][0] if values else lineno,
                path=path,
            )
        it = iter(values)
        if symmetry == "general":
            for j in range(cols):
                for i in range(rows):
                    entry_lineno, token = next(it)
                    a[i, j] = _parse_float(token, entry_lineno, path)
        else:
            for j in range(cols):
                for i in range(j, rows):
                    entry_lineno, token = next(it)
                    value = _parse_float(token, entry_lineno, path)
                    a[i, j] = value
                    a[j, i] = value
    return a
