"""Seeded Gaussian sampling on a counter-based uniform generator.

The uniform source is Philox (counter-based, so the stream is a pure
function of the 64-bit seed and draw position), and normals come from an
explicit Box-Muller transform rather than a rejection method. This keeps
the sample sequence reproducible bit-for-bit for a given seed: value ``2i``
and ``2i+1`` of the output depend only on uniforms ``2i`` and ``2i+1``, so
a shorter draw is a prefix of a longer one from the same stream position.
"""

import numpy as np

from .errors import ParameterError

__all__ = ["GaussianStream", "gaussian_matrix"]


class GaussianStream:
    """Deterministic stream of standard normal samples.

    Parameters
    ----------
    seed : int
        64-bit key of the underlying Philox counter generator. Streams
        with the same seed produce identical samples; consecutive draws
        from one instance advance the counter and do not repeat.
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._uniform = np.random.Generator(np.random.Philox(key=self.seed & (2**64 - 1)))

    def normals(self, count):
        """Return ``count`` i.i.d. N(0, 1) samples, advancing the stream."""
        if count < 1:
            raise ParameterError(f"count must be >= 1, got {count}")
        pairs = (count + 1) // 2
        u = self._uniform.random(2 * pairs)
        # u in [0, 1): flip the radius argument so log never sees zero
        r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        theta = 2.0 * np.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:count]

    def fresh(self):
        """A new stream with the same seed, rewound to the start."""
        return GaussianStream(self.seed)

    def __repr__(self):
        return f"GaussianStream(seed={self.seed})"


def gaussian_matrix(stream, rows, cols):
    """Draw a ``rows x cols`` matrix of i.i.d. standard normals.

    Entries fill in column-major order, so the first k columns of an
    ``m x n`` draw equal an ``m x k`` draw from the same stream position.
    """
    if rows < 1 or cols < 1:
        raise ParameterError(f"matrix dimensions must be >= 1, got {rows}x{cols}")
    values = stream.normals(rows * cols)
    return values.reshape((rows, cols), order="F")
