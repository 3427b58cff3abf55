import numpy as np
import pytest

from randqlp import GaussianStream, ParameterError, gaussian_matrix


def test_same_seed_identical():
    a = gaussian_matrix(GaussianStream(42), 2, 2)
    b = gaussian_matrix(GaussianStream(42), 2, 2)
    assert np.array_equal(a, b)


def test_seed_sensitivity():
    a = gaussian_matrix(GaussianStream(42), 2, 2)
    b = gaussian_matrix(GaussianStream(43), 2, 2)
    assert not np.array_equal(a, b)


def test_consecutive_draws_advance():
    s = GaussianStream(7)
    a = gaussian_matrix(s, 3, 3)
    b = gaussian_matrix(s, 3, 3)
    assert not np.array_equal(a, b)


def test_fresh_rewinds():
    s = GaussianStream(7)
    first = gaussian_matrix(s, 4, 2)
    again = gaussian_matrix(s.fresh(), 4, 2)
    assert np.array_equal(first, again)


def test_column_major_fill():
    values = GaussianStream(5).normals(6)
    mat = gaussian_matrix(GaussianStream(5), 3, 2)
    assert np.array_equal(mat.ravel(order="F"), values)


def test_prefix_property():
    # an m x k draw equals the first k columns of an m x n draw
    full = gaussian_matrix(GaussianStream(11), 9, 7)
    head = gaussian_matrix(GaussianStream(11), 9, 4)
    assert np.array_equal(full[:, :4], head)


def test_moments():
    samples = GaussianStream(42).normals(100_000)
    assert abs(samples.mean()) < 0.02
    assert abs(samples.var() - 1.0) < 0.03


def test_all_finite():
    samples = GaussianStream(0).normals(50_000)
    assert np.isfinite(samples).all()


@pytest.mark.parametrize("rows,cols", [(0, 3), (3, 0), (-1, 2)])
def test_bad_dimensions(rows, cols):
    with pytest.raises(ParameterError):
        gaussian_matrix(GaussianStream(0), rows, cols)
