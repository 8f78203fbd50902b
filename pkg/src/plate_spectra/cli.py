"""Command-line front end.

    plate-spectra dispersion --r-lo 0.2 --r-hi 2 --r-steps 20 --out run/
    plate-spectra minimum
    plate-spectra modes --profile annulus:a=1,t1=0.5,t2=1 --n-max 40
    plate-spectra predict --alpha 0.1
    plate-spectra verify --config run.cfg

Settings come from flags, optionally layered over a key=value file given
with --config (flags win). Exit status: 0 pass, 1 check failure,
2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import band, fd_oracle
from . import model_operator as mo
from .errors import DomainError
from .profiles import parse_profile

EXIT_OK, EXIT_CHECK, EXIT_SOLVER = 0, 1, 2

GOLDEN = {"kappa": (0.632138, 1e-5), "lambda": (1.887837, 1e-5), "q": (0.849748, 1e-4)}
MINIMUM_TOL = 1e-4
DUAL_TOL = 1e-6


@dataclass(frozen=True)
class RunConfig:
    profile: str = "disk:a=1"
    alpha: float = 0.1
    n_max: int = 40
    r_lo: float = 0.2
    r_hi: float = 2.0
    r_steps: int = 20
    out: str = "."
    precision_bits: int = 128
    eps: float = 0.1
    scan_points: int = 80
    fd_step: float = 1e-3
    corrupt_p2: float | None = None

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise DomainError(f"alpha={self.alpha} outside [0, 1)")
        if not 0 <= self.n_max <= 200:
            raise DomainError(f"n_max={self.n_max} outside [0, 200]")
        if self.precision_bits < 100:
            raise DomainError(f"precision_bits={self.precision_bits} < 100")
        if self.r_steps < 1 or self.r_lo < 0 or self.r_hi < self.r_lo:
            raise DomainError("r sweep needs 0 <= r_lo <= r_hi and r_steps >= 1")
        if not 0 < self.eps < 1:
            raise DomainError(f"eps={self.eps} outside (0, 1)")
        if self.scan_points < 8:
            raise DomainError(f"scan_points={self.scan_points} < 8")

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def r_grid(self) -> np.ndarray:
        if self.r_steps == 1:
            return np.array([self.r_lo])
        return np.linspace(self.r_lo, self.r_hi, self.r_steps)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELDS[name].type
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment, dashes equal underscores."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _FIELDS:
            raise DomainError(f"{path}:{lineno}: unknown setting {line!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for name in _FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig(**values)


# -- output helpers ---------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


# -- commands ---------------------------------------------------------------


def cmd_dispersion(cfg: RunConfig) -> int:
    rows, failed = [], False
    for r in cfg.r_grid():
        r = float(r)
        try:
            bp = band.lowest_branch(r)
            rows.append([r, bp.lam, bp.branch_tag, r * r + 4, "ok"])
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            failed = True
            rows.append([r, None, "", r * r + 4, type(exc).__name__])
    write_csv(cfg.out_dir / "dispersion.csv", ["r", "lambda1", "branch", "check1", "status"], rows)
    return EXIT_SOLVER if failed else EXIT_OK


def _minimum(cfg: RunConfig) -> band.SpectralMinimum:
    return band.find_minimum(scan_points=cfg.scan_points, fd_step=cfg.fd_step)


def cmd_minimum(cfg: RunConfig) -> int:
    try:
        m = _minimum(cfg)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"minimum: solver failure: {exc}")
        return EXIT_SOLVER
    print(f"kappa  = {m.kappa:.12f} +- {m.kappa_err:.2e}")
    print(f"Lambda = {m.lambda_cap:.12f} +- {m.lambda_err:.2e}")
    print(f"q      = {m.q:.12f} +- {m.q_err:.2e}")
    print(f"rayleigh(r=1) = {band.rayleigh_quotient_testcase():.15f}")
    ok = all(
        abs(v - GOLDEN[k][0]) <= MINIMUM_TOL for k, v in (("kappa", m.kappa), ("lambda", m.lambda_cap), ("q", m.q))
    )
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CHECK


def _constants(cfg: RunConfig):
    profile = parse_profile(cfg.profile)
    consts = mo.model_constants(profile, _minimum(cfg))
    series_consts = consts
    if cfg.corrupt_p2 is not None:
        # negative control: only the series sees the altered constant
        series_consts = dataclasses.replace(consts, p2=consts.p2 * cfg.corrupt_p2)
    return consts, series_consts


def mode_rows(cfg: RunConfig, n_max: int | None = None):
    """(n, series, quadrature, rel_diff, log_env, ratio, status) per mode."""
    consts, series_consts = _constants(cfg)
    n_max = cfg.n_max if n_max is None else n_max
    rows = []
    for n in range(n_max + 1):
        status, res = "ok", None
        try:
            res = mo.mu_series_sum(series_consts, n, cfg.precision_bits)
        except (ArithmeticError, ValueError) as exc:
            status = type(exc).__name__
        quad = mo.mu_quadrature_mp(consts, n, cfg.precision_bits).real
        rel = None
        if res is not None and quad != 0:
            rel = float(abs(res.value - quad) / abs(quad))
        series = float(res.value) if res is not None else None
        sign = res.sign if res is not None else 0
        log_env = ratio = None
        if n >= 2:
            log_env = mo.log_envelope(consts.profile, consts.a_kappa, n)
            if sign > 0:
                ratio = math.exp(float(res.log_abs) - log_env)
        rows.append((n, series, float(quad), rel, log_env, ratio, status))
    return rows


def cmd_modes(cfg: RunConfig) -> int:
    rows = mode_rows(cfg)
    header = ["n", "mu_series", "mu_quadrature", "rel_diff", "log_envelope", "ratio_to_envelope", "status"]
    write_csv(cfg.out_dir / "modes.csv", header, [list(r) for r in rows])
    if any(r[6] != "ok" for r in rows):
        return EXIT_SOLVER
    bad = [r for r in rows if r[3] is None or r[3] > DUAL_TOL or r[1] < -mo.PSD_TOL]
    return EXIT_CHECK if bad else EXIT_OK


def predict_rows(cfg: RunConfig, alpha: float | None = None):
    alpha = cfg.alpha if alpha is None else alpha
    m = _minimum(cfg)
    profile = parse_profile(cfg.profile)
    consts = mo.model_constants(profile, m)
    spectrum = mo.mu_values(consts, cfg.n_max, cfg.precision_bits)
    env = asy.make_envelope(profile, m)
    rows = []
    for l, lam_k in enumerate(spectrum.ordered, start=1):
        pred = asy.predict_eigenvalue(spectrum, m, l, alpha)
        ratio = pred.log_gap / (-2 * l * math.log(l)) if l >= 2 else None
        lo_t, hi_t = (1 + cfg.eps) * l, (1 - cfg.eps) * l
        wm = asy.log_w(env, "minus", lo_t) if lo_t > env.t0 else None
        wp = asy.log_w(env, "plus", hi_t) if hi_t > env.t0 else None
        rows.append((l, lam_k, pred.predicted, pred.log_gap, ratio, wm, wp))
    return rows


def cmd_predict(cfg: RunConfig) -> int:
    if not 0 < cfg.alpha < 1:
        print(f"predict: alpha={cfg.alpha} must lie in (0, 1)")
        return EXIT_SOLVER
    header = ["l", "lambda_l_K", "kappa_l_alpha", "log_gap", "neg2klogk_ratio", "w_minus_env", "w_plus_env"]
    write_csv(cfg.out_dir / "predict.csv", header, [list(r) for r in predict_rows(cfg)])
    return EXIT_OK


# -- verify -----------------------------------------------------------------


def _check_minimum(cfg):
    m = _minimum(cfg)
    got = {"kappa": m.kappa, "lambda": m.lambda_cap, "q": m.q}
    ok = all(abs(got[k] - v) <= tol for k, (v, tol) in GOLDEN.items())
    return ok, f"kappa={m.kappa:.9f} Lambda={m.lambda_cap:.9f} q={m.q:.9f}"


def _check_rayleigh(cfg):
    v = band.rayleigh_quotient_testcase()
    return abs(v - 2) <= 1e-10, f"quotient={v:.12f}"


def _check_check_branch(cfg):
    worst, orders = 0.0, []
    for r in (0.0, 1.0):
        exact = np.array([r * r + 4, r * r + 16])
        worst = max(worst, float(np.max(np.abs(fd_oracle.lowest_eigs(fd_oracle.assemble(r, 512, "check"), 2) - exact))))
        series = [fd_oracle.lowest_eigs(fd_oracle.assemble(r, n, "check"), 2) for n in (128, 256, 512)]
        for k in range(2):
            orders.append(fd_oracle.observed_order([s[k] for s in series], exact[k]))
    return worst <= 5e-3 and min(orders) >= 1.9, f"max_err={worst:.3e} min_order={min(orders):.3f}"


def _check_band_agreement(cfg):
    worst = 0.0
    for r in np.linspace(0.2, 2.0, 20):
        secular = band.lowest_branch(float(r)).lam
        fd = min(fd_oracle.hat_eigs(float(r), 1024, 1)[0], r * r + 4)
        worst = max(worst, abs(secular - fd))
    return worst <= 1e-4, f"max_diff={worst:.3e}"


def _check_dual(cfg):
    rows = mode_rows(cfg, n_max=min(cfg.n_max, 30))
    rel = [r[3] for r in rows]
    if any(v is None for v in rel):
        return False, "series failed"
    return max(rel) <= DUAL_TOL, f"max_rel_diff={max(rel):.3e}"


def _check_psd(cfg):
    consts, _ = _constants(cfg)
    spectrum = mo.mu_values(consts, cfg.n_max, cfg.precision_bits)
    low = min(spectrum.mu)
    return low >= -mo.PSD_TOL, f"min_mu={low:.3e}"


def _check_bracket(cfg):
    consts, _ = _constants(cfg)
    report = mo.bound_check(consts, range(10, 41))
    out = sum(not r.inside for r in report.rows)
    ratios = [r.ratio for r in report.rows]
    return out == 0, f"outside={out} ratio_range=[{min(ratios):.6f}, {max(ratios):.6f}] upper={report.upper:.6f}"


def _check_accumulation(cfg):
    m = _minimum(cfg)
    profile = parse_profile(cfg.profile)
    consts = mo.model_constants(profile, m)
    spectrum = mo.mu_values(consts, max(cfg.n_max, 31), cfg.precision_bits)
    report = asy.envelope_check(spectrum, asy.make_envelope(profile, m), m, cfg.alpha or 0.1, cfg.eps, range(20, 61))
    ratios = [r.ratio for r in report.rows]
    ok = 0.5 <= min(ratios) and max(ratios) <= 1.1 and report.trend_toward_one
    return ok, f"ratio(20)={ratios[0]:.6f} ratio(60)={ratios[-1]:.6f}"


def _check_varrho(cfg):
    m = _minimum(cfg)
    env = asy.make_envelope(parse_profile(cfg.profile), m)
    grid = np.linspace(-50.0, -500.0, 46)
    dev = []
    ok = True
    for which in ("minus", "plus"):
        rep = asy.varrho_limit_check(env, 2.0, grid, which)
        dev.append(rep.deviation[-1])
        ok = ok and rep.monotone and rep.deviation[-1] <= 0.05
    return ok, f"deviation(-500)={max(dev):.6f}"


def _check_alpha_shift(cfg):
    m = _minimum(cfg)
    consts = mo.model_constants(parse_profile(cfg.profile), m)
    spectrum = mo.mu_values(consts, min(cfg.n_max, 20), cfg.precision_bits)
    alpha = cfg.alpha or 0.1
    worst = 0.0
    for l in range(1, len(spectrum.ordered) + 1):
        g1 = asy.predict_eigenvalue(spectrum, m, l, alpha).log_gap
        g2 = asy.predict_eigenvalue(spectrum, m, l, alpha / 10).log_gap
        worst = max(worst, abs(g1 - g2 - 2 * math.log(10)))
    return worst <= 1e-12, f"max_shift_err={worst:.3e}"


VERIFY_CHECKS = (
    ("spectral_minimum", _check_minimum),
    ("rayleigh_testcase", _check_rayleigh),
    ("check_branch_fd", _check_check_branch),
    ("secular_vs_fd", _check_band_agreement),
    ("modes_dual_method", _check_dual),
    ("modes_psd", _check_psd),
    ("modes_bracket", _check_bracket),
    ("accumulation_trend", _check_accumulation),
    ("varrho_limit", _check_varrho),
    ("alpha_log_shift", _check_alpha_shift),
)


def cmd_verify(cfg: RunConfig) -> int:
    lines, status = [], EXIT_OK
    for name, check in VERIFY_CHECKS:
        try:
            ok, detail = check(cfg)
            lines.append(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
            if not ok and status == EXIT_OK:
                status = EXIT_CHECK
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            lines.append(f"ERROR {name} {type(exc).__name__}: {exc}")
            status = EXIT_SOLVER
    text = "\n".join(lines) + "\n"
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "verify.txt").write_text(text)
    sys.stdout.write(text)
    return status


COMMANDS = {
    "dispersion": cmd_dispersion,
    "minimum": cmd_minimum,
    "modes": cmd_modes,
    "predict": cmd_predict,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file; flags override it")
    common.add_argument("--profile", help="disk:a=1 | annulus:a=1,t1=0.5,t2=1 | bump:a=1 | table:path=f.csv")
    common.add_argument("--alpha", type=float, help="coupling strength in [0, 1)")
    common.add_argument("--n-max", dest="n_max", type=int, help="highest angular mode")
    common.add_argument("--r-lo", dest="r_lo", type=float)
    common.add_argument("--r-hi", dest="r_hi", type=float)
    common.add_argument("--r-steps", dest="r_steps", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--precision-bits", dest="precision_bits", type=int)
    common.add_argument("--eps", type=float, help="envelope argument margin")
    common.add_argument("--scan-points", dest="scan_points", type=int, help="coarse scan size for the minimum")
    common.add_argument("--fd-step", dest="fd_step", type=float, help="difference step for q")
    common.add_argument("--corrupt-p2", dest="corrupt_p2", type=float, help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="plate-spectra", description="Trapped-mode spectra of a perturbed elastic plate.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "dispersion": "tabulate the lowest band function lambda_1(r)",
        "minimum": "locate the band minimum (kappa, Lambda, q)",
        "modes": "eigenvalues mu_n of the model operator by two methods",
        "predict": "leading-term eigenvalues and accumulation envelopes",
        "verify": "run all cross-checks",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except (DomainError, ValueError, OSError) as exc:
        parser.error(str(exc))
    return COMMANDS[args.command](cfg)
