"""Acceptance criteria, one test each, at their stated tolerances.

Each test records a ``PASS``/``FAIL`` line that is printed in the pytest
terminal summary (and immediately with ``-s``).
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from plate_spectra import asymptotics as asy
from plate_spectra import band, fd_oracle
from plate_spectra import model_operator as mo
from plate_spectra import profiles as pr


def record(log, number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    log.append(line)
    print(line)
    assert ok, line


def test_criterion_01_spectral_minimum(acceptance_log):
    band.find_minimum.cache_clear()
    band.hat_root.cache_clear()
    start = time.perf_counter()
    m = band.find_minimum()
    elapsed = time.perf_counter() - start
    ok = (
        abs(m.kappa - 0.632138) <= 1e-5
        and abs(m.lambda_cap - 1.887837) <= 1e-5
        and abs(m.q - 0.849748) <= 1e-4
        and elapsed < 10
    )
    record(
        acceptance_log, 1, ok, f"kappa={m.kappa:.8f} Lambda={m.lambda_cap:.8f} q={m.q:.8f} in {elapsed:.2f}s"
    )


def test_criterion_02_rayleigh_testcase(acceptance_log):
    value = band.rayleigh_quotient_testcase()
    record(acceptance_log, 2, abs(value - 2) <= 1e-10, f"quotient={value:.15f}")


def test_criterion_03_check_branch(acceptance_log):
    worst, orders = 0.0, []
    for r in (0.0, 1.0):
        exact = np.array([r * r + 4, r * r + 16])
        by_n = {n: fd_oracle.lowest_eigs(fd_oracle.assemble(r, n, "check"), 2) for n in (128, 256, 512)}
        worst = max(worst, float(np.max(np.abs(by_n[512] - exact))))
        for k in range(2):
            orders.append(fd_oracle.observed_order([by_n[n][k] for n in (128, 256, 512)], exact[k]))
    ok = worst <= 5e-3 and min(orders) >= 1.9
    record(acceptance_log, 3, ok, f"max_err(n=512)={worst:.2e} min_order={min(orders):.3f}")


def test_criterion_04_cross_oracle_band(acceptance_log):
    start = time.perf_counter()
    worst = 0.0
    for r in np.linspace(0.2, 2.0, 20):
        secular = band.lowest_branch(float(r)).lam
        fd = fd_oracle.lowest_eigs(fd_oracle.assemble(float(r), 1024, "full_h4"), 1)[0]
        worst = max(worst, abs(secular - fd))
    elapsed = time.perf_counter() - start
    record(acceptance_log, 4, worst <= 1e-4 and elapsed < 120, f"max|secular-fd|={worst:.2e} in {elapsed:.1f}s")


def test_criterion_05_dual_method(acceptance_log, minimum):
    mo._ftilde_table.cache_clear()
    start = time.perf_counter()
    worst = 0.0
    for profile in (pr.disk(1.0), pr.annulus(1.0, 0.5, 1.0)):
        consts = mo.model_constants(profile, minimum)
        for n in range(31):
            series = mo.mu_series(consts, n, bits=128)
            quad = mo.mu_quadrature(consts, n, bits=128)
            worst = max(worst, abs(series - quad) / quad)
    elapsed = time.perf_counter() - start
    record(acceptance_log, 5, worst <= 1e-6 and elapsed < 60, f"max_rel_diff={worst:.2e} in {elapsed:.1f}s")


def test_criterion_06_psd(acceptance_log, minimum):
    lowest = math.inf
    for profile in (pr.disk(1.0), pr.annulus(1.0, 0.5, 1.0), pr.bump(1.0)):
        spectrum = mo.mu_values(mo.model_constants(profile, minimum), 40)
        lowest = min(lowest, min(spectrum.mu))
    record(acceptance_log, 6, lowest >= -1e-13, f"min mu_n (n<=40, disk/annulus/bump)={lowest:.3e}")


def test_criterion_07_appendix_bracket(acceptance_log, disk_consts):
    report = mo.bound_check(disk_consts, range(10, 41))
    ratios = [r.ratio for r in report.rows]
    outside = [r.n for r in report.rows if not r.inside]
    record(
        acceptance_log,
        7,
        not outside,
        f"ratio in [{min(ratios):.5f}, {max(ratios):.5f}], upper={report.upper:.5f}, outside={outside}",
    )


def test_criterion_08_accumulation_trend(acceptance_log, minimum, disk_consts):
    spectrum = mo.mu_values(disk_consts, 31)
    env = asy.make_envelope(disk_consts.profile, minimum)
    report = asy.envelope_check(spectrum, env, minimum, 0.1, 0.1, range(20, 61))
    ratios = [r.ratio for r in report.rows]
    ok = 0.5 <= min(ratios) and max(ratios) <= 1.1 and report.trend_toward_one
    record(acceptance_log, 8, ok, f"g_k/(-2k ln k): k=20 {ratios[0]:.4f}, k=60 {ratios[-1]:.4f}")


def test_criterion_09_varrho_limit(acceptance_log, minimum):
    env = asy.make_envelope(pr.disk(1.0), minimum)
    grid = np.linspace(-50.0, -500.0, 46)
    ok, devs = True, []
    for which in ("minus", "plus"):
        rep = asy.varrho_limit_check(env, 2.0, grid, which)
        devs.append(rep.deviation[-1])
        ok = ok and rep.monotone and rep.deviation[-1] <= 0.05
    record(acceptance_log, 9, ok, f"|rho(tau)/rho(2tau)-1| at log tau=-500: minus {devs[0]:.5f}, plus {devs[1]:.5f}")


def _cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "plate_spectra", *args], cwd=cwd, capture_output=True, check=False
    )


def test_criterion_10_determinism(acceptance_log, tmp_path):
    commands = {
        "verify": ["verify"],
        "dispersion": ["dispersion", "--r-lo", "0", "--r-hi", "3", "--r-steps", "31"],
        "modes": ["modes", "--n-max", "30", "--profile", "annulus:a=1,t1=0.5,t2=1"],
        "predict": ["predict", "--alpha", "0.1", "--n-max", "31"],
    }
    files = {"verify": "verify.txt", "dispersion": "dispersion.csv", "modes": "modes.csv", "predict": "predict.csv"}
    mismatched, codes = [], {}
    for name, args in commands.items():
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / name / run
            proc = _cli([*args, "--out", str(out)], tmp_path)
            codes.setdefault(name, set()).add(proc.returncode)
            outputs.append(((out / files[name]).read_bytes(), proc.stdout))
        if outputs[0] != outputs[1]:
            mismatched.append(name)
    ok = not mismatched and all(c == {0} for c in codes.values())
    record(acceptance_log, 10, ok, f"byte-identical reruns for {sorted(commands)}; mismatched={mismatched}")


def test_criterion_11_leading_term_algebra(acceptance_log, minimum, disk_consts):
    spectrum = mo.mu_values(disk_consts, 30)
    worst_identity = worst_shift = 0.0
    for l in range(1, len(spectrum.ordered) + 1):
        for alpha in (0.5, 0.1, 0.01):
            g = asy.predict_eigenvalue(spectrum, minimum, l, alpha).log_gap
            exact = 2 * math.log(alpha) + 2 * math.log(minimum.lambda_cap * math.pi) + 2 * spectrum.log_ordered[l - 1]
            worst_identity = max(worst_identity, abs(g - exact))
        shift = (
            asy.predict_eigenvalue(spectrum, minimum, l, 0.1).log_gap
            - asy.predict_eigenvalue(spectrum, minimum, l, 0.01).log_gap
        )
        worst_shift = max(worst_shift, abs(shift - 2 * math.log(10)))
    ok = worst_identity <= 1e-12 and worst_shift <= 1e-12
    record(
        acceptance_log,
        11,
        ok,
        f"log-gap identity err={worst_identity:.1e}, 2 ln(alpha) shift err={worst_shift:.1e} (criteria 5-8 cover lambda_l(K))",
    )
