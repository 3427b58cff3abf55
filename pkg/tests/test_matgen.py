import numpy as np
import pytest

from randqlp import (
    CapacityError,
    GaussianStream,
    ParameterError,
    ParseError,
    SpectrumSpec,
    build,
    jacobi_svd,
    matrix_market_read,
    random_orthogonal,
    sigma_profile,
)

EPS = np.finfo(np.float64).eps


# ------------------------------------------------------ random_orthogonal


def test_random_orthogonal_scalar():
    assert np.array_equal(random_orthogonal(GaussianStream(0), 1), [[1.0]])


@pytest.mark.parametrize("n", [2, 5, 17])
def test_random_orthogonal_orthonormal(n):
    q = random_orthogonal(GaussianStream(123), n)
    assert np.abs(q.T @ q - np.eye(n)).max() <= 64 * n * EPS


def test_random_orthogonal_distinct_seeds():
    a = random_orthogonal(GaussianStream(1), 6)
    b = random_orthogonal(GaussianStream(2), 6)
    assert np.linalg.norm(a - b) > 0.1


# ------------------------------------------------------------------ build


def test_fast_decay_profile_values():
    spec = SpectrumSpec("fast-decay", n=4)
    assert np.allclose(sigma_profile(spec), [1.0, 0.25, 1.0 / 9.0, 0.0625])


def test_noiseless_build_matches_oracle():
    spec = SpectrumSpec("noisy-low-rank", n=40, k=8, noise_level=0.0)
    tm = build(spec, 3)
    assert tm.is_exact
    f = jacobi_svd(tm.a)
    nz = tm.sigma_true > 0
    assert (np.abs(f.sigma[nz] - tm.sigma_true[nz]) / tm.sigma_true[nz]).max() <= 1e-10
    assert f.sigma[~nz].max() <= 1e-10 * tm.sigma_true[0]


def test_s_shaped_profile_endpoints():
    spec = SpectrumSpec("s-shaped", n=1000)
    sigma = sigma_profile(spec)
    assert sigma.max() <= 1.0 + 1e-9
    assert abs(sigma.min() - 0.01) <= 0.1 * 0.01
    assert (np.diff(sigma) <= 0).all()


def test_build_deterministic():
    spec = SpectrumSpec("noisy-low-rank", n=30, k=6)
    a = build(spec, 11).a
    b = build(spec, 11).a
    assert np.array_equal(a, b)
    assert not np.array_equal(a, build(spec, 12).a)


@pytest.mark.parametrize("seed", range(10))
def test_noisy_low_rank_gap(seed):
    # noise floor sits near 0.05 * sigma_k, leaving a visible gap at k
    spec = SpectrumSpec("noisy-low-rank", n=300, k=60)
    tm = build(spec, seed)
    sigma = np.linalg.svd(tm.a, compute_uv=False)
    assert sigma[59] / sigma[60] >= 5.0


def test_noise_modes_differ():
    base = dict(kind="noisy-low-rank", n=30, k=6)
    a = build(SpectrumSpec(**base, params={"noise_mode": "spectral"}), 5).a
    b = build(SpectrumSpec(**base, params={"noise_mode": "entry"}), 5).a
    c = build(SpectrumSpec(**base, params={"noise_mode": "fro"}), 5).a
    assert not np.array_equal(a, b)
    assert not np.array_equal(b, c)


def test_custom_profile_and_validation():
    values = [3.0, 2.0, 1.0]
    spec = SpectrumSpec("custom", n=3, params={"values": values})
    assert np.array_equal(sigma_profile(spec), values)
    with pytest.raises(ParameterError):
        sigma_profile(SpectrumSpec("custom", n=3, params={"values": [1.0, 2.0, 3.0]}))


def test_spec_validation():
    with pytest.raises(ParameterError):
        SpectrumSpec("noisy-low-rank", n=10)  # k required
    with pytest.raises(ParameterError):
        SpectrumSpec("nope", n=10)
    with pytest.raises(ParameterError):
        SpectrumSpec("fast-decay", n=1)
    with pytest.raises(ParameterError):
        SpectrumSpec("noisy-low-rank", n=10, k=5, params={"noise_mode": "bogus"})


def test_spec_json_round_trip():
    spec = SpectrumSpec("noisy-low-rank", n=50, k=10, noise_level=0.02,
                        params={"ramp_end": 1e-4})
    copy = SpectrumSpec.from_json(spec.to_json())
    assert copy == spec


# --------------------------------------------------------- matrix market


def mm_write(path, text):
    path.write_text(text)
    return str(path)


def test_mm_coordinate_basic(tmp_path):
    path = mm_write(
        tmp_path / "a.mtx",
        "%%MatrixMarket matrix coordinate real general\n"
        "% comment line\n"
        "2 2 2\n"
        "1 1 3.0\n"
        "2 2 4.0\n",
    )
    a = matrix_market_read(path)
    assert np.array_equal(a, [[3.0, 0.0], [0.0, 4.0]])


def test_mm_duplicates_summed(tmp_path):
    path = mm_write(
        tmp_path / "d.mtx",
        "%%MatrixMarket matrix coordinate real general\n"
        "2 2 3\n"
        "1 1 1.0\n"
        "1 1 2.0\n"
        "2 1 5.0\n",
    )
    a = matrix_market_read(path)
    assert a[0, 0] == 3.0
    assert a[1, 0] == 5.0


def test_mm_symmetric_mirrored(tmp_path):
    path = mm_write(
        tmp_path / "s.mtx",
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "3 3 2\n"
        "2 1 7.0\n"
        "3 3 2.0\n",
    )
    a = matrix_market_read(path)
    assert a[1, 0] == 7.0 and a[0, 1] == 7.0 and a[2, 2] == 2.0


def test_mm_array_general(tmp_path):
    path = mm_write(
        tmp_path / "arr.mtx",
        "%%MatrixMarket matrix array real general\n"
        "2 2\n1.0\n2.0\n3.0\n4.0\n",
    )
    a = matrix_market_read(path)
    assert np.array_equal(a, [[1.0, 3.0], [2.0, 4.0]])  # column-major


def test_mm_array_symmetric(tmp_path):
    path = mm_write(
        tmp_path / "arrs.mtx",
        "%%MatrixMarket matrix array real symmetric\n"
        "2 2\n1.0\n5.0\n9.0\n",
    )
    a = matrix_market_read(path)
    assert np.array_equal(a, [[1.0, 5.0], [5.0, 9.0]])


@pytest.mark.parametrize(
    "field", ["pattern", "complex", "integer"]
)
def test_mm_rejects_non_real_fields(tmp_path, field):
    path = mm_write(
        tmp_path / "p.mtx",
        f"%%MatrixMarket matrix coordinate {field} general\n1 1 1\n1 1 1\n",
    )
    with pytest.raises(ParseError):
        matrix_market_read(path)


def test_mm_index_out_of_range_reports_line(tmp_path):
    path = mm_write(
        tmp_path / "oor.mtx",
        "%%MatrixMarket matrix coordinate real general\n"
        "2 2 1\n"
        "3 1 1.0\n",
    )
    with pytest.raises(ParseError) as info:
        matrix_market_read(path)
    assert info.value.lineno == 3


def test_mm_bad_value_reports_line(tmp_path):
    path = mm_write(
        tmp_path / "bad.mtx",
        "%%MatrixMarket matrix coordinate real general\n"
        "1 1 1\n"
        "1 1 abc\n",
    )
    with pytest.raises(ParseError) as info:
        matrix_market_read(path)
    assert info.value.lineno == 3


def test_mm_capacity_error(tmp_path):
    path = mm_write(
        tmp_path / "big.mtx",
        "%%MatrixMarket matrix coordinate real general\n"
        "100 100 1\n"
        "1 1 1.0\n",
    )
    with pytest.raises(CapacityError):
        matrix_market_read(path, mem_cap=1000)
