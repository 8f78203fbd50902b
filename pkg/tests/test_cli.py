import csv
import math

import pytest

from plate_spectra import cli


def run(*args):
    return cli.main([str(a) for a in args])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def modes_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("modes")
    assert run("modes", "--out", out, "--n-max", 40) == 0
    return out


@pytest.fixture(scope="module")
def predict_dirs(tmp_path_factory):
    dirs = {}
    for alpha in ("0.1", "0.01"):
        out = tmp_path_factory.mktemp(f"predict{alpha}")
        assert run("predict", "--out", out, "--alpha", alpha, "--n-max", 31) == 0
        dirs[alpha] = out
    return dirs


def test_dispersion_csv(tmp_path):
    assert run("dispersion", "--out", tmp_path, "--r-lo", 0, "--r-hi", 3, "--r-steps", 13) == 0
    raw = (tmp_path / "dispersion.csv").read_bytes()
    assert raw.startswith(b"r,lambda1,branch,check1,status\r\n")
    rows = read_rows(tmp_path / "dispersion.csv")
    assert len(rows) == 13
    for row in rows:
        assert row["status"] == "ok"
        assert float(row["lambda1"]) <= float(row["check1"]) + 1e-9
        assert float(row["check1"]) == pytest.approx(float(row["r"]) ** 2 + 4)


def test_dispersion_at_minimum(tmp_path, minimum):
    run("dispersion", "--out", tmp_path, "--r-lo", minimum.kappa, "--r-hi", minimum.kappa, "--r-steps", 1)
    (row,) = read_rows(tmp_path / "dispersion.csv")
    assert float(row["lambda1"]) == pytest.approx(1.887837, abs=1e-5)


def test_dispersion_prints_seventeen_digits(tmp_path):
    run("dispersion", "--out", tmp_path, "--r-lo", 0.5, "--r-hi", 0.5, "--r-steps", 1)
    (row,) = read_rows(tmp_path / "dispersion.csv")
    assert row["lambda1"] == format(float(row["lambda1"]), ".17g")
    assert len(row["lambda1"].replace(".", "").lstrip("0")) == 17


def test_dispersion_rerun_identical(tmp_path):
    args = ("dispersion", "--r-lo", 0.1, "--r-hi", 2.5, "--r-steps", 9)
    run(*args, "--out", tmp_path / "a")
    run(*args, "--out", tmp_path / "b")
    assert (tmp_path / "a" / "dispersion.csv").read_bytes() == (tmp_path / "b" / "dispersion.csv").read_bytes()


def test_dispersion_records_failed_rows(tmp_path):
    # beyond the supported radius the solver refuses; the row is kept
    assert run("dispersion", "--out", tmp_path, "--r-lo", 3.5, "--r-hi", 5, "--r-steps", 2) == cli.EXIT_SOLVER
    rows = read_rows(tmp_path / "dispersion.csv")
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"] == "DomainError" and rows[1]["lambda1"] == ""


def test_minimum_report(capsys):
    assert run("minimum") == 0
    out = capsys.readouterr().out
    assert "kappa  = 0.632138" in out
    assert "Lambda = 1.887837" in out
    assert "rayleigh(r=1) = 2.000000000000000" in out
    assert out.rstrip().endswith("PASS")


def test_minimum_coarse_config_same_values(capsys):
    assert run("minimum", "--scan-points", 20, "--fd-step", 4e-3) == 0
    out = capsys.readouterr().out
    assert "kappa  = 0.632138" in out


def test_modes_csv(modes_dir):
    raw = (modes_dir / "modes.csv").read_bytes()
    assert raw.startswith(b"n,mu_series,mu_quadrature,rel_diff,log_envelope,ratio_to_envelope,status\r\n")
    rows = read_rows(modes_dir / "modes.csv")
    assert [int(r["n"]) for r in rows] == list(range(41))
    for r in rows:
        assert r["status"] == "ok"
        assert float(r["mu_series"]) >= 0 and float(r["mu_quadrature"]) >= 0
        if int(r["n"]) <= 30:
            assert float(r["rel_diff"]) <= 1e-6
        if int(r["n"]) < 2:
            assert r["log_envelope"] == "" and r["ratio_to_envelope"] == ""


def test_modes_ratios_inside_bracket(modes_dir, disk_consts):
    from plate_spectra import model_operator as mo

    rows = {int(r["n"]): r for r in read_rows(modes_dir / "modes.csv")}
    report = mo.bound_check(disk_consts, range(10, 41))
    for b in report.rows:
        ratio = float(rows[b.n]["ratio_to_envelope"])
        assert ratio == pytest.approx(b.ratio, rel=1e-12)
        assert b.lower <= ratio <= b.upper


def test_predict_csv(predict_dirs, minimum):
    rows = read_rows(predict_dirs["0.1"] / "predict.csv")
    header = list(rows[0].keys())
    assert header == ["l", "lambda_l_K", "kappa_l_alpha", "log_gap", "neg2klogk_ratio", "w_minus_env", "w_plus_env"]
    kappas = [float(r["kappa_l_alpha"]) for r in rows]
    assert all(b >= a for a, b in zip(kappas, kappas[1:]))
    assert all(k <= minimum.lambda_cap for k in kappas)
    # distinct levels are strictly ordered where the gap is resolvable
    assert kappas[0] < kappas[1] < kappas[3]
    ratios = {int(r["l"]): float(r["neg2klogk_ratio"]) for r in rows if r["neg2klogk_ratio"]}
    assert abs(ratios[60] - 1) < abs(ratios[20] - 1)


def test_predict_log_gap_shift(predict_dirs):
    a = read_rows(predict_dirs["0.1"] / "predict.csv")
    b = read_rows(predict_dirs["0.01"] / "predict.csv")
    for ra, rb in zip(a, b):
        assert float(ra["log_gap"]) - float(rb["log_gap"]) == pytest.approx(2 * math.log(10), abs=1e-12)


def test_predict_rejects_zero_alpha(tmp_path):
    assert run("predict", "--out", tmp_path, "--alpha", 0) == cli.EXIT_SOLVER


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nr-lo = 0.5\nr_hi = 1.5\nr_steps = 3\nout = " + str(tmp_path / "fromfile") + "\n")
    assert run("dispersion", "--config", cfg) == 0
    rows = read_rows(tmp_path / "fromfile" / "dispersion.csv")
    assert [float(r["r"]) for r in rows] == [0.5, 1.0, 1.5]
    assert run("dispersion", "--config", cfg, "--r-steps", 5) == 0
    assert len(read_rows(tmp_path / "fromfile" / "dispersion.csv")) == 5


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("seed = 4\n")
    with pytest.raises(SystemExit) as info:
        run("dispersion", "--config", cfg)
    assert info.value.code == 2


@pytest.mark.parametrize("flags", [("--alpha", 1.5), ("--n-max", 500), ("--precision-bits", 64)])
def test_invalid_settings_rejected(flags):
    with pytest.raises(SystemExit):
        run("modes", *flags)


def test_hidden_flag_not_in_help(capsys):
    with pytest.raises(SystemExit):
        run("verify", "--help")
    assert "corrupt" not in capsys.readouterr().out


@pytest.mark.slow
def test_verify_precision_robust(tmp_path):
    def pass_set(bits):
        out = tmp_path / str(bits)
        code = run("verify", "--out", out, "--precision-bits", bits)
        lines = (out / "verify.txt").read_text().splitlines()
        return code, {line.split()[1] for line in lines if line.startswith("PASS")}

    code100, set100 = pass_set(100)
    code160, set160 = pass_set(160)
    assert code100 == code160 == 0
    assert set100 == set160 == {name for name, _ in cli.VERIFY_CHECKS}


@pytest.mark.slow
def test_verify_negative_control(tmp_path):
    assert run("verify", "--out", tmp_path, "--corrupt-p2", 1.01) == cli.EXIT_CHECK
    lines = (tmp_path / "verify.txt").read_text().splitlines()
    failed = [line.split()[1] for line in lines if line.startswith("FAIL")]
    assert failed == ["modes_dual_method"]
