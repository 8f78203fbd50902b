"""Dispersion branches and spectral minimum of the cross-section operator.

At xi = (0, r) the h4 block of A(xi) splits into a scalar "check" part with
eigenvalues r^2 + 4k^2 and a coupled "hat" part acting on (u2, u3) =
(i r d1, d2). With beta^2 = lam - r^2 and gamma^2 = lam/2 - r^2 the hat
solutions (u2 even, u3 odd) are spanned by

    gamma mode:  d1 = cos(gamma t),  d2 = -gamma sin(gamma t)
    beta mode:   d1 = cos(beta t),   d2 = (r^2/beta) sin(beta t)

The d-functions weight them so that d2'(+-pi/2) = 0 holds identically;
the remaining stress-free condition d1' + d2 = 0 at t = pi/2 is the
secular residual S. It factors as

    S(lam, r) = -(2/r) gamma^2 beta R(lam, r),
    R(lam, r) = r^2 cos(pi beta/2) s(gamma) + gamma^2 cos(pi gamma/2) s(beta),

with s(x) = sin(pi x/2)/x. The factor gamma^2 vanishes on the constant
h3 mode (lam = 2 r^2) and R is analytic in lam on both sides of lam = r^2,
so roots are searched on R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import fd_oracle
from .errors import BracketError, DegenerateMinimumError, DomainError
from .numerics import Interval, integrate

__all__ = [
    "trig_even",
    "trig_odd",
    "BranchPoint",
    "EigenfunctionData",
    "SpectralMinimum",
    "d_functions",
    "branch_eigenfunction",
    "secular_residual",
    "reduced_secular",
    "hat_root",
    "lowest_branch",
    "ground_state",
    "rayleigh_quotient",
    "rayleigh_quotient_testcase",
    "golden_section",
    "find_minimum",
]

HALF_PI = 0.5 * math.pi
R_MAX = 4.0
ROOT_XTOL = 1e-15
ROOT_RTOL = 1e-15


def trig_even(x_sq, t):
    """cos(x t) continued to x^2 < 0 as cosh(|x| t)."""
    x_sq = np.asarray(x_sq, dtype=float)
    t = np.asarray(t, dtype=float)
    x = np.sqrt(np.abs(x_sq))
    out = np.where(x_sq >= 0, np.cos(x * t), np.cosh(x * t))
    return float(out) if out.ndim == 0 else out


def trig_odd(x_sq, t):
    """sin(x t)/x continued through x = 0 (value t) and to x^2 < 0."""
    x_sq = np.asarray(x_sq, dtype=float)
    t = np.asarray(t, dtype=float)
    x = np.sqrt(np.abs(x_sq))
    safe = np.where(x == 0, 1.0, x)
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.where(x_sq > 0, np.sin(x * t) / safe, np.sinh(x * t) / safe)
    out = np.where(x_sq == 0, t * np.ones_like(out), out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BranchPoint:
    r: float
    lam: float
    branch_tag: str  # "hat(1)" or "check(1)"


@dataclass(frozen=True)
class EigenfunctionData:
    """(d1, d2) = coef_gamma * gamma-mode + coef_beta * beta-mode at (r, lam)."""

    r: float
    lam: float
    coef_gamma: float
    coef_beta: float

    @property
    def beta_sq(self) -> float:
        return self.lam - self.r**2

    @property
    def gamma_sq(self) -> float:
        return 0.5 * self.lam - self.r**2

    @property
    def beta(self) -> float:
        return math.sqrt(self.beta_sq) if self.beta_sq >= 0 else math.nan

    def d1(self, t):
        return self.coef_gamma * trig_even(self.gamma_sq, t) + self.coef_beta * trig_even(self.beta_sq, t)

    def d2(self, t):
        g2, b2, r2 = self.gamma_sq, self.beta_sq, self.r**2
        return -self.coef_gamma * g2 * trig_odd(g2, t) + self.coef_beta * r2 * trig_odd(b2, t)

    def d1p(self, t):
        g2, b2 = self.gamma_sq, self.beta_sq
        return -self.coef_gamma * g2 * trig_odd(g2, t) - self.coef_beta * b2 * trig_odd(b2, t)

    def d2p(self, t):
        g2, b2, r2 = self.gamma_sq, self.beta_sq, self.r**2
        return -self.coef_gamma * g2 * trig_even(g2, t) + self.coef_beta * r2 * trig_even(b2, t)

    def d1pp(self, t):
        g2, b2 = self.gamma_sq, self.beta_sq
        return -self.coef_gamma * g2 * trig_even(g2, t) - self.coef_beta * b2 * trig_even(b2, t)

    def d2pp(self, t):
        g2, b2, r2 = self.gamma_sq, self.beta_sq, self.r**2
        return self.coef_gamma * g2 * g2 * trig_odd(g2, t) - self.coef_beta * r2 * b2 * trig_odd(b2, t)

    def psi(self, t):
        """Components (u1, u2, u3) = (0, i r d1, d2) of the unnormalised eigenfunction."""
        d1 = np.asarray(self.d1(t))
        return np.zeros_like(d1, dtype=complex), 1j * self.r * d1, np.asarray(self.d2(t), dtype=complex)

    def ode_residual(self, t) -> np.ndarray:
        """(row 2, row 3) of (A^(4)(r) - lam) applied to (i r d1, d2), divided by i r in row 2."""
        r, lam = self.r, self.lam
        d1, d1p, d1pp = self.d1(t), self.d1p(t), self.d1pp(t)
        d2, d2p, d2pp = self.d2(t), self.d2p(t), self.d2pp(t)
        row2 = -d1pp + 2 * r * r * d1 - d2p - lam * d1
        row3 = r * r * d1p - 2 * d2pp + r * r * d2 - lam * d2
        return np.vstack([row2, row3])


@dataclass(frozen=True)
class SpectralMinimum:
    kappa: float
    lambda_cap: float
    q: float
    kappa_err: float = 0.0
    lambda_err: float = 0.0
    q_err: float = 0.0


def d_functions(r: float, lam: float) -> EigenfunctionData:
    """The eigenfunction components d1, d2 with the classical weights.

    Weights are r beta cos(pi beta/2) on the gamma mode and
    (gamma^2 beta / r) cos(pi gamma/2) on the beta mode; gamma^2 may take
    either sign.
    """
    if r <= 0:
        raise DomainError(f"r={r} must be positive")
    if lam <= r * r:
        raise DomainError(f"lam={lam} <= r^2={r * r}: below branch cut for beta")
    beta = math.sqrt(lam - r * r)
    g2 = 0.5 * lam - r * r
    a = r * beta * math.cos(HALF_PI * beta)
    b = g2 * beta / r * trig_even(g2, HALF_PI)
    return EigenfunctionData(float(r), float(lam), a, b)


def branch_eigenfunction(r: float, lam: float) -> EigenfunctionData:
    """Eigenfunction weighted so that int_J d1 = 0.

    Equivalent to :func:`d_functions` up to a scalar on the hat branch but
    stays nondegenerate where both classical weights vanish (e.g. r = 1,
    lam = 2) and for lam < r^2.
    """
    if r <= 0:
        raise DomainError(f"r={r} must be positive")
    b2 = lam - r * r
    g2 = 0.5 * lam - r * r
    return EigenfunctionData(float(r), float(lam), -trig_odd(b2, HALF_PI), trig_odd(g2, HALF_PI))


def secular_residual(lam: float, r: float, normalized: bool = False) -> float:
    """S = d1'(pi/2) + d2(pi/2) from :func:`d_functions`.

    ``normalized`` divides by the sum of magnitudes of the four mode
    contributions, which makes |S| comparable across (lam, r).
    """
    ef = d_functions(r, lam)
    s = ef.d1p(HALF_PI) + ef.d2(HALF_PI)
    if not normalized:
        return float(s)
    g2, b2, r2 = ef.gamma_sq, ef.beta_sq, r * r
    og, ob = trig_odd(g2, HALF_PI), trig_odd(b2, HALF_PI)
    scale = 2 * abs(ef.coef_gamma * g2 * og) + abs(ef.coef_beta * b2 * ob) + abs(ef.coef_beta * r2 * ob)
    return float(s / scale) if scale > 0 else float(s)


def reduced_secular(lam, r: float):
    """R(lam, r); vectorised in ``lam``."""
    lam = np.asarray(lam, dtype=float)
    b2 = lam - r * r
    g2 = 0.5 * lam - r * r
    out = r * r * trig_even(b2, HALF_PI) * trig_odd(g2, HALF_PI) + g2 * trig_even(g2, HALF_PI) * trig_odd(
        b2, HALF_PI
    )
    return float(out) if np.ndim(out) == 0 else out


def _scan_step(r: float) -> tuple[float, float]:
    """Half the smallest spacing of coarse oracle eigenvalues, and the lowest one."""
    ev = fd_oracle.hat_eigs(r, 64, 3)
    gaps = np.diff(np.concatenate([[0.0], ev]))
    return min(0.5 * float(gaps.min()), 0.25), float(ev[0])


@lru_cache(maxsize=8192)
def hat_root(r: float) -> float:
    """Lowest root of R(., r), i.e. the bottom of the hat branch."""
    if r < 0:
        raise DomainError(f"r={r} must be nonnegative")
    step, lam_fd = _scan_step(r)
    # R(0, r) = 0 identically (both modes coincide); the oracle eigenvalue is
    # a Ritz upper bound, so half of it is safely below the branch
    lo = 0.5 * lam_fd
    hi = max(r * r + 4.0, 1.25 * lam_fd) + step
    grid = np.arange(lo, hi + step, step)
    vals = reduced_secular(grid, r)
    hits = np.nonzero(vals == 0.0)[0]
    changes = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    first_hit = hits[0] if hits.size else grid.size
    if changes.size and changes[0] < first_hit:
        i = changes[0]
        return brentq(reduced_secular, grid[i], grid[i + 1], args=(r,), xtol=ROOT_XTOL, rtol=ROOT_RTOL)
    if hits.size:
        return float(grid[first_hit])
    raise BracketError(f"no hat root bracketed for r={r} in [{lo:.6g}, {hi:.6g}]")


def lowest_branch(r: float, r_max: float = R_MAX) -> BranchPoint:
    """Ground state lam_1(r) = min(hat root, r^2 + 4); ties go to the hat branch."""
    if not 0 <= r <= r_max:
        raise DomainError(f"r={r} outside [0, {r_max}]")
    lam_hat = hat_root(float(r))
    check = r * r + 4.0
    if lam_hat <= check:
        return BranchPoint(float(r), lam_hat, "hat(1)")
    return BranchPoint(float(r), check, "check(1)")


def ground_state(xi) -> BranchPoint:
    """lam_1 at a wave vector; only |xi| matters."""
    return lowest_branch(math.hypot(*xi))


def rayleigh_quotient(r: float, v2, v3, dv2, dv3, rel_tol: float = 1e-13) -> float:
    """Hat-block form divided by the L2 norm, for callables on J (complex allowed)."""
    iv = Interval(-HALF_PI, HALF_PI)

    def energy(t):
        coupling = dv2(t) + 1j * r * v3(t)
        return 2 * (r * r * abs(v2(t)) ** 2 + abs(dv3(t)) ** 2 + 0.5 * abs(coupling) ** 2)

    def mass(t):
        return abs(v2(t)) ** 2 + abs(v3(t)) ** 2

    return integrate(energy, iv, rel_tol) / integrate(mass, iv, rel_tol)


def rayleigh_quotient_testcase(scale: float = 1.0) -> float:
    """Quotient at r = 1 for u = (0, 1 - (pi/2) cos t, i (pi/2) sin t)."""
    c = scale * HALF_PI
    return rayleigh_quotient(
        1.0,
        lambda t: scale - c * math.cos(t),
        lambda t: 1j * c * math.sin(t),
        lambda t: c * math.sin(t),
        lambda t: 1j * c * math.cos(t),
    )


def golden_section(fn, lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    """Minimiser of a unimodal ``fn`` on [lo, hi] to bracket width ``tol``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = fn(x2)
    return 0.5 * (lo + hi)


def _branch_slope(r: float, h: float = 1e-5) -> float:
    """d lam_hat / dr by implicit differentiation of R(lam, r) = 0."""
    lam = hat_root(r)
    dr = (reduced_secular(lam, r + h) - reduced_secular(lam, r - h)) / (2 * h)
    dl = (reduced_secular(lam + h, r) - reduced_secular(lam - h, r)) / (2 * h)
    return -dr / dl


@lru_cache(maxsize=16)
def find_minimum(r_max: float = R_MAX, scan_points: int = 80, fd_step: float = 1e-3) -> SpectralMinimum:
    """Locate (kappa, Lambda, q) for lam_1(kappa + e) = Lambda + q^2 e^2 + O(e^3).

    A coarse scan brackets the minimum, golden-section search narrows it,
    and the stationary point is polished as the root of the implicit
    branch slope. q comes from a Richardson-extrapolated second difference
    with steps ``fd_step`` and ``fd_step/2``.
    """
    grid = np.linspace(0.0, r_max, scan_points + 1)[1:]
    vals = np.array([lowest_branch(r, r_max).lam for r in grid])
    i = int(np.argmin(vals))
    if i == 0 or i == grid.size - 1:
        raise BracketError(f"minimum of lam_1 sits at the scan boundary r={grid[i]}")
    lo, hi = grid[i - 1], grid[i + 1]

    kappa_gs = golden_section(hat_root, lo, hi, tol=1e-4 * (hi - lo))
    lo, hi = kappa_gs - 0.01 * (hi - lo), kappa_gs + 0.01 * (hi - lo)
    try:
        kappa = brentq(_branch_slope, lo, hi, xtol=1e-13, rtol=1e-15)
        kappa_2h = brentq(_branch_slope, lo, hi, args=(2e-5,), xtol=1e-13, rtol=1e-15)
    except ValueError as exc:
        raise BracketError(f"branch slope has no sign change on [{lo}, {hi}]") from exc
    lam_cap = hat_root(kappa)
    if lowest_branch(kappa, r_max).branch_tag != "hat(1)":
        raise BracketError("minimum is not attained on the hat branch")

    def second_difference(h):
        return (hat_root(kappa + h) - 2 * lam_cap + hat_root(kappa - h)) / (h * h)

    coarse = second_difference(fd_step)
    fine = second_difference(0.5 * fd_step)
    curvature = (4 * fine - coarse) / 3
    if curvature <= 0:
        raise DegenerateMinimumError(f"degenerate minimum: lam_1''(kappa) = {curvature}")
    q = math.sqrt(0.5 * curvature)
    # the slope difference error is O(h^2), so the 2h root overshoots it fourfold
    kappa_err = max(abs(kappa_2h - kappa) / 3, 1e-12)
    return SpectralMinimum(
        kappa=float(kappa),
        lambda_cap=float(lam_cap),
        q=q,
        kappa_err=kappa_err,
        lambda_err=q * q * kappa_err**2 + 1e-14,
        q_err=abs(q - math.sqrt(0.5 * fine)),
    )
