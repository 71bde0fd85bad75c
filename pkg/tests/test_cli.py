import os

from pbcd.cli import main


def test_generate_solve_round_trip(tmp_path, capsys):
    outdir = str(tmp_path / "gen")
    rc = main(["generate", "--source", "generate-lasso", "--m", "10", "--n",
               "8", "--sparsity", "0.4", "--lam", "0.3", "--problem-seed",
               "5", "--outdir", outdir])
    assert rc == 0
    out = capsys.readouterr().out
    assert "max_blocks_per_component" in out
    assert os.path.exists(os.path.join(outdir, "matrix.mtx"))
    rc = main(["solve", "--source", "load-matrix",
               "--matrix", os.path.join(outdir, "matrix.mtx"),
               "--rhs", os.path.join(outdir, "rhs.vec"),
               "--lam", "0.3", "--modes", "rcd", "--batch-sizes", "2",
               "--seeds", "0", "--gap-rtol", "1e-4",
               "--outdir", str(tmp_path / "solve")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "converged" in out
    assert os.path.exists(os.path.join(str(tmp_path / "solve"),
                                       "trace_rcd_b2_s0.csv"))


def test_compare_writes_summary(tmp_path, capsys):
    outdir = str(tmp_path / "cmp")
    rc = main(["compare", "--source", "generate-lasso", "--m", "12", "--n",
               "10", "--sparsity", "0.3", "--lam", "0.4", "--problem-seed",
               "1", "--modes", "rcd,rcd-coordwise", "--batch-sizes", "2",
               "--seeds", "0,1", "--gap-rtol", "1e-3", "--outdir", outdir,
               "--trace-stride", "10"])
    assert rc == 0
    assert os.path.exists(os.path.join(outdir, "summary.csv"))
    out = capsys.readouterr().out
    assert "updates_per_dim_rcd" in out


def test_bounds_subcommand(tmp_path, capsys):
    out_csv = str(tmp_path / "curve.csv")
    rc = main(["bounds", "--num-blocks", "10", "--batch-size", "2",
               "--radius", "1.0", "--initial-gap", "1.0",
               "--strong-convexity", "0.5", "--eb-const", "2.0",
               "--eb-quad", "0.0", "--eps", "0.01", "--rho", "0.1",
               "--k-max", "100", "--out", out_csv])
    assert rc == 0
    out = capsys.readouterr().out
    assert "strongly convex per-iteration factor: 0.9" in out
    assert "theta=" in out
    assert "2314 (sublinear)" in out
    assert os.path.exists(out_csv)


def test_gebp_fit_subcommand(capsys):
    rc = main(["gebp-fit", "--source", "generate-lasso", "--m", "12", "--n",
               "8", "--sparsity", "0.5", "--lam", "0.5", "--problem-seed",
               "4", "--samples", "40"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "fitted error-bound coefficients" in out
    assert "max violation" in out


def test_input_error_exit_code(capsys):
    rc = main(["solve", "--source", "generate-lasso", "--m", "5", "--n", "10",
               "--sparsity", "0.01"])
    assert rc == 2
    assert "input error" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path, capsys):
    path = tmp_path / "exp.ini"
    path.write_text("""
[problem]
source = generate-lasso
m = 10
n = 8
sparsity = 0.4
lam = 0.3
problem_seed = 2

[solve]
seeds = 0
modes = rcd
batch_sizes = 2
gap_rtol = 1e-3
""")
    outdir = str(tmp_path / "run")
    rc = main(["solve", "--config", str(path), "--outdir", outdir,
               "--batch-sizes", "4"])
    assert rc == 0
    assert os.path.exists(os.path.join(outdir, "trace_rcd_b4_s0.csv"))
