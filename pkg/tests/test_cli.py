import csv
import json

import numpy as np
import pytest

from randqlp import SpectrumSpec, read_matrix, write_matrix
from randqlp.cli import main


def write_spec(tmp_path, spec, name="spec.json"):
    path = tmp_path / name
    path.write_text(spec.to_json())
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# -------------------------------------------------------------------- gen


def test_gen_round_trip(tmp_path):
    spec_path = write_spec(tmp_path, SpectrumSpec("fast-decay", n=100))
    out = tmp_path / "out"
    assert main(["gen", "--spec", spec_path, "--seed", "1", "--out", str(out)]) == 0
    a = read_matrix(out / "matrix.rqlp")
    assert a.shape == (100, 100)
    sigma_rows = read_rows(out / "sigma.csv")
    sigma_true = np.array([float(r[1]) for r in sigma_rows[1:]])
    sigma = np.linalg.svd(a, compute_uv=False)
    assert (np.abs(sigma - sigma_true) / sigma_true).max() <= 1e-10
    assert json.loads((out / "spec.json").read_text())["kind"] == "fast-decay"


def test_gen_refuses_overwrite(tmp_path, capsys):
    spec_path = write_spec(tmp_path, SpectrumSpec("fast-decay", n=10))
    out = tmp_path / "out"
    assert main(["gen", "--spec", spec_path, "--out", str(out)]) == 0
    assert main(["gen", "--spec", spec_path, "--out", str(out)]) == 2
    assert "--force" in capsys.readouterr().err
    assert main(["gen", "--spec", spec_path, "--out", str(out), "--force"]) == 0


def test_gen_deterministic_bytes(tmp_path):
    spec_path = write_spec(tmp_path, SpectrumSpec("noisy-low-rank", n=60, k=12))
    outs = []
    for name in ("o1", "o2"):
        out = tmp_path / name
        assert main(
            ["gen", "--spec", spec_path, "--seed", "1", "--out", str(out)]
        ) == 0
        outs.append(out)
    for fname in ("matrix.rqlp", "sigma.csv"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


# -------------------------------------------------------------- decompose


def test_decompose_identity_all_algorithms(tmp_path):
    inp = tmp_path / "identity.rqlp"
    write_matrix(inp, np.eye(50))
    out = tmp_path / "out"
    assert main(["decompose", "--input", str(inp), "--out", str(out)]) == 0
    residuals = json.loads((out / "residuals.json").read_text())
    assert set(residuals) == {"randqlp", "pqlp", "cpqr", "svd"}
    for alg, res in residuals.items():
        assert res <= 1e-12, alg
        diag = np.array([float(r[1]) for r in read_rows(out / alg / "diag.csv")[1:]])
        assert np.abs(diag - 1.0).max() <= 1e-12
    assert (out / "randqlp" / "q.rqlp").exists()
    assert (out / "timings.json").exists()
    sv_rows = read_rows(out / "sv_compare.csv")
    assert sv_rows[0][:2] == ["i", "sigma_ref"]
    assert "sigma_randqlp" in sv_rows[0] and "relerr_pqlp" in sv_rows[0]
    assert len(sv_rows) == 51


def test_decompose_unknown_algorithm_usage_error(tmp_path, capsys):
    inp = tmp_path / "m.rqlp"
    write_matrix(inp, np.eye(4))
    code = main(
        ["decompose", "--input", str(inp), "--algs", "qqr", "--out", str(tmp_path / "o")]
    )
    assert code == 2
    assert "unknown algorithm" in capsys.readouterr().err


def test_decompose_seed_reproducible(tmp_path):
    rng = np.random.default_rng(2)
    inp = tmp_path / "m.rqlp"
    write_matrix(inp, rng.standard_normal((40, 30)))
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert main(
            [
                "decompose",
                "--input",
                str(inp),
                "--algs",
                "randqlp",
                "--seed",
                "7",
                "--out",
                str(out),
            ]
        ) == 0
        outs.append(out)
    assert (
        (outs[0] / "randqlp" / "diag.csv").read_bytes()
        == (outs[1] / "randqlp" / "diag.csv").read_bytes()
    )
    assert (
        (outs[0] / "randqlp" / "l.rqlp").read_bytes()
        == (outs[1] / "randqlp" / "l.rqlp").read_bytes()
    )


def test_decompose_reads_matrix_market(tmp_path):
    mtx = tmp_path / "m.mtx"
    mtx.write_text(
        "%%MatrixMarket matrix coordinate real general\n"
        "3 2 2\n"
        "1 1 2.0\n"
        "3 2 1.0\n"
    )
    out = tmp_path / "out"
    assert main(
        ["decompose", "--input", str(mtx), "--algs", "cpqr", "--out", str(out)]
    ) == 0
    diag = [float(r[1]) for r in read_rows(out / "cpqr" / "diag.csv")[1:]]
    assert diag == [2.0, 1.0]


def test_decompose_missing_input(tmp_path):
    code = main(
        ["decompose", "--input", str(tmp_path / "nope.rqlp"), "--out", str(tmp_path / "o")]
    )
    assert code == 1


# ------------------------------------------------------------------ bounds


def test_bounds_exact_rank_k_no_violations(tmp_path):
    spec = SpectrumSpec("noisy-low-rank", n=40, k=8, noise_level=0.0)
    spec_path = write_spec(tmp_path, spec)
    out = tmp_path / "out"
    code = main(
        [
            "bounds",
            "--spec",
            spec_path,
            "--matrix-seed",
            "100",
            "--seeds",
            "0..4",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["reports"] == 5
    assert summary["violations"] == 0
    report = json.loads((out / "bound_report_0.json").read_text())
    assert report["k"] == 8
    assert report["applicable_phi"] is True


def test_bounds_threaded_sweep(tmp_path):
    spec = SpectrumSpec("s-shaped", n=40)
    spec_path = write_spec(tmp_path, spec)
    out = tmp_path / "out"
    code = main(
        [
            "bounds",
            "--spec",
            spec_path,
            "--matrix-seed",
            "3",
            "--seeds",
            "1,2",
            "--k",
            "10",
            "--out",
            str(out),
            "--threads",
            "2",
        ]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["reports"] == 2 and summary["violations"] == 0


def test_bounds_singular_sketch_recorded_without_aborting(tmp_path, monkeypatch):
    import randqlp.cli as cli
    from randqlp import SingularSketchError

    real = cli._bounds_for_seed

    def flaky(a, oracle, k, seed):
        if seed == 1:
            raise SingularSketchError("leading sketch block is numerically singular")
        return real(a, oracle, k, seed)

    monkeypatch.setattr(cli, "_bounds_for_seed", flaky)
    spec_path = write_spec(tmp_path, SpectrumSpec("fast-decay", n=30))
    out = tmp_path / "out"
    code = main(
        [
            "bounds",
            "--spec",
            spec_path,
            "--matrix-seed",
            "9",
            "--seeds",
            "0..2",
            "--k",
            "5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["reports"] == 2
    assert "1" in summary["errors"]
    assert (out / "bound_report_0.json").exists()
    assert not (out / "bound_report_1.json").exists()


def test_bounds_k_out_of_range_usage_error(tmp_path, capsys):
    spec_path = write_spec(tmp_path, SpectrumSpec("fast-decay", n=20))
    code = main(
        [
            "bounds",
            "--spec",
            spec_path,
            "--seeds",
            "0",
            "--k",
            "20",
            "--out",
            str(tmp_path / "o"),
        ]
    )
    assert code == 2
    assert "k must satisfy" in capsys.readouterr().err


# ------------------------------------------------------------------- bench


def test_bench_single_size_single_repeat(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(
        [
            "bench",
            "--sizes",
            "64",
            "--algs",
            "randqlp,cpqr",
            "--repeats",
            "1",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    rows = read_rows(out)
    assert rows[0] == ["n", "alg", "seconds", "flops_model"]
    assert len(rows) == 3
    assert rows[1][0] == "64" and rows[1][1] == "randqlp"
    assert int(rows[1][3]) > 0
    assert rows[2][3] != ""  # cpqr has a flops model too


def test_bench_rejects_bad_sizes():
    assert main(["bench", "--sizes", "1", "--repeats", "1"]) == 2
