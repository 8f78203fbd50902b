"""The compact model operator K on the minimal circle |xi| = kappa.

For a radial profile K is a convolution on the circle with kernel

    k(s, t) = C1/(2 pi) * sum_m p_m (kappa^2 c)^m
              * sum_k (a^2 kappa^2 (c - 1))^k / (2^k (k!)^2) * ft_k,
    c = cos(s - t),  C1 = a^2 kappa / (Lambda p q),

so its eigenvalues are the Fourier coefficients mu_n = int k(0, t) e^{int} dt,
each of multiplicity 2 except mu_0. They are computed twice: by an
exact-rational/extended-precision series and by a trapezoidal rule on a
contour shifted into the complex plane, where the integrand no longer
oscillates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import mpmath
import numpy as np

from . import band
from .band import SpectralMinimum
from .errors import DomainError, PrecisionFloorError, PSDViolation, TruncationError
from .numerics import Interval, SignedLogSum, gauss_legendre, integrate, log_sum_signed
from .profiles import RadialProfile

__all__ = [
    "ModelConstants",
    "ModeSpectrum",
    "BoundRow",
    "BoundReport",
    "model_constants",
    "kernel",
    "kernel_truncation",
    "inner_lsum",
    "mu_quadrature",
    "mu_quadrature_parts",
    "mu_quadrature_mp",
    "mu_series",
    "mu_series_log",
    "mu_series_sum",
    "mu_values",
    "log_envelope",
    "ordered_spectrum",
    "bound_check",
]

PSD_TOL = 1e-13
SERIES_TAIL_BITS = 120
_J = Interval(-band.HALF_PI, band.HALF_PI)


@dataclass(frozen=True)
class ModelConstants:
    p: float
    p0: float
    p1: float
    p2: float
    minimum: SpectralMinimum = field(repr=False)
    profile: RadialProfile

    @property
    def c1(self) -> float:
        m = self.minimum
        return self.profile.a**2 * m.kappa / (m.lambda_cap * self.p * m.q)

    @property
    def weights(self) -> tuple[float, float, float]:
        """p_m kappa^(2m), m = 0, 1, 2."""
        k2 = self.minimum.kappa**2
        return (self.p0, self.p1 * k2, self.p2 * k2 * k2)

    @property
    def a_kappa(self) -> float:
        return self.profile.a * self.minimum.kappa


@dataclass(frozen=True)
class ModeSpectrum:
    mu: tuple
    ordered: tuple
    mode_index: tuple  # angular index n of each ordered entry
    log_mu: tuple = ()

    @property
    def log_ordered(self) -> tuple:
        """ln lambda_l(K) in the order of ``ordered``."""
        return tuple(self.log_mu[n] for n in self.mode_index)


def model_constants(
    profile: RadialProfile,
    minimum: SpectralMinimum | None = None,
    rel_tol: float = 1e-11,
    scale: float = 1.0,
    nodes: int | None = None,
) -> ModelConstants:
    """p-constants from d1, d2 at r = kappa.

    ``scale`` multiplies d1 and d2 (the result for mu_n must not depend on
    it). ``nodes`` switches from adaptive quadrature to a fixed
    Gauss-Legendre rule.
    """
    minimum = minimum or band.find_minimum()
    ef = band.d_functions(minimum.kappa, minimum.lambda_cap)
    kappa = minimum.kappa

    def sq(fn):
        if nodes is not None:
            return gauss_legendre(lambda t: (scale * fn(t)) ** 2, _J, nodes)
        return integrate(lambda t: (scale * fn(t)) ** 2, _J, rel_tol)

    p = kappa**2 * sq(ef.d1) + sq(ef.d2)
    p0 = 2 * sq(ef.d2p)
    p1 = sq(lambda t: ef.d1p(t) + ef.d2(t))
    p2 = 2 * sq(ef.d1)
    return ModelConstants(p, p0, p1, p2, minimum, profile)


def _tail_ratio_ok(x: float, k: int) -> bool:
    return x <= 0.5 * (k + 1) ** 2


def kernel_truncation(consts: ModelConstants, rel: float = 1e-16) -> int:
    """Smallest K whose tail majorant (a kappa)^(2K) ft_K/(K!)^2 is below
    ``rel`` times the k = 0 term."""
    x = consts.a_kappa**2
    f0 = consts.profile.ftilde(0)
    log_x = math.log(x) if x > 0 else -math.inf
    for k in range(1, 10_000):
        log_t = k * log_x + math.log(consts.profile.ftilde(k)) - 2 * math.lgamma(k + 1)
        if _tail_ratio_ok(x, k) and log_t + math.log(2) <= math.log(rel * f0):
            return k
    raise TruncationError("kernel series does not converge", 10_000)


def kernel(consts: ModelConstants, s, t, truncation_K: int | None = None):
    """k(s, t) in double precision; vectorised in ``s`` and ``t``.

    With |c - 1| <= 2 every omitted term is majorised by
    (a kappa)^(2k) ft_k/(k!)^2, and the tail by twice its first term.
    """
    required = kernel_truncation(consts)
    if truncation_K is None:
        truncation_K = required
    elif truncation_K < required:
        raise TruncationError(f"truncation K={truncation_K} leaves tail above 1e-16", required)
    c = np.cos(np.asarray(s, dtype=float) - np.asarray(t, dtype=float))
    w = consts.a_kappa**2 * (c - 1.0) / 2.0
    acc = np.zeros_like(c)
    for k in range(truncation_K, -1, -1):
        coef = consts.profile.ftilde(k) / math.factorial(k) ** 2
        acc = acc * w + coef
    kc = consts.minimum.kappa**2 * c
    poly = consts.p0 + consts.p1 * kc + consts.p2 * kc * kc
    out = consts.c1 / (2 * math.pi) * poly * acc
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def _ftilde_table(profile: RadialProfile, count: int, prec: int) -> tuple:
    with mpmath.workprec(prec):
        return tuple(+profile.ftilde_mp(k) for k in range(count))


def _contour_height(n: int, a_kappa: float) -> float:
    # saddle point of |k(0, z) e^{inz}| on Im z = y: no oscillation left
    return max(0.0, 2.0 * math.log(2 * n / a_kappa)) if n > 0 else 0.0


def _horner_order(w_max: float, bits: int) -> int:
    """Terms needed so that |w|^K/(K!)^2 falls 2^-(bits+16) below the peak term."""
    log_w = math.log(max(w_max, 1e-300))
    peak = max(k * log_w - 2 * math.lgamma(k + 1) for k in range(0, int(math.sqrt(w_max)) + 2))
    target = peak - (bits + 16) * math.log(2)
    k = 1
    while not (_tail_ratio_ok(w_max, k) and k * log_w - 2 * math.lgamma(k + 1) < target):
        k += 1
    return k


def mu_quadrature_mp(consts: ModelConstants, n: int, bits: int = 128, nodes: int | None = None) -> mpmath.mpc:
    """Trapezoidal approximation of int_0^2pi k(0, t) e^{int} dt as an mpc.

    The rule runs on the shifted line t + iy (periodic, analytic integrand,
    so the integral is unchanged) at ``bits`` of working precision.
    """
    if n < 0:
        raise DomainError(f"n={n} < 0")
    nodes = nodes or max(256, 8 * n)
    ak = consts.a_kappa
    y = _contour_height(n, ak)
    w_max = ak * ak * (math.cosh(y) + 1.0) / 2.0
    order = _horner_order(w_max, bits)
    with mpmath.workprec(bits + 24):
        ft = _ftilde_table(consts.profile, order + 1, bits + 24)
        coefs = [ft[k] / mpmath.factorial(k) ** 2 for k in range(order + 1)]
        ak2 = mpmath.mpf(ak) ** 2
        k2 = mpmath.mpf(consts.minimum.kappa) ** 2
        p0, p1, p2 = (mpmath.mpf(v) for v in (consts.p0, consts.p1, consts.p2))
        step = 2 * mpmath.pi / nodes
        total = mpmath.mpc(0)
        for j in range(nodes):
            z = mpmath.mpc(step * j, y)
            c = mpmath.cos(z)
            w = ak2 * (c - 1) / 2
            acc = coefs[order]
            for k in range(order - 1, -1, -1):
                acc = acc * w + coefs[k]
            kc = k2 * c
            total += (p0 + (p1 + p2 * kc) * kc) * acc * mpmath.exp(1j * n * z)
        return total * mpmath.mpf(consts.c1) / nodes


def mu_quadrature_parts(consts: ModelConstants, n: int, bits: int = 128, nodes: int | None = None):
    """(Re, Im) of :func:`mu_quadrature_mp` as floats."""
    total = mu_quadrature_mp(consts, n, bits, nodes)
    return float(total.real), float(total.imag)


def mu_quadrature(consts: ModelConstants, n: int, bits: int = 128, nodes: int | None = None) -> float:
    return float(mu_quadrature_mp(consts, n, bits, nodes).real)


def inner_lsum(k: int, n: int, m: int) -> Fraction:
    """Exact sum_{l<=k/2} 2^(-n-2l) C(k+n-m, 2l+n-m) C(2l+n, l) for n >= 2."""
    big = k + n - m
    return sum(
        (Fraction(comb(big, 2 * l + n - m) * comb(2 * l + n, l), 2 ** (n + 2 * l)) for l in range(k // 2 + 1)),
        Fraction(0),
    )


def _low_order_lsum(k: int, n: int, m: int) -> Fraction:
    """Signed l-sum of the low-order (n in {0, 1}) index set."""
    j = -((n - m) // 2)  # ceil((m - n)/2)
    lo = (abs(j) + j) // 2
    hi = (k - n + m) // 2
    sign = -1 if (k + n + m) % 2 else 1
    return sum(
        (Fraction(sign * comb(k, 2 * l + n - m) * comb(2 * l + n, l), 2 ** (2 * l + n)) for l in range(lo, hi + 1)),
        Fraction(0),
    )


def _log_frac(x: Fraction):
    return mpmath.log(abs(x.numerator)) - mpmath.log(x.denominator)


def _series_terms(consts: ModelConstants, n: int, k_max: int, prec: int):
    """Signed log-magnitude terms in the fixed order m, then k."""
    ft = _ftilde_table(consts.profile, n + k_max + 1, prec)
    terms = []
    with mpmath.workprec(prec):
        log_ak = mpmath.log(mpmath.mpf(consts.a_kappa))
        log_c1 = mpmath.log(mpmath.mpf(consts.c1))
        log2 = mpmath.log(2)
        for m, weight in enumerate(consts.weights):
            if weight == 0:
                continue
            log_w = log_c1 + mpmath.log(mpmath.mpf(weight))
            for k in range(k_max + 1):
                if n >= 2:
                    big = n + k - m
                    lsum = inner_lsum(k, n, m) * (-1) ** k
                else:
                    big = k
                    lsum = _low_order_lsum(k, n, m)
                if lsum == 0:
                    continue
                log_mag = (
                    log_w
                    + 2 * big * log_ak
                    + mpmath.log(ft[big])
                    - big * log2
                    - 2 * mpmath.loggamma(big + 1)
                    + _log_frac(lsum)
                )
                terms.append((1 if lsum > 0 else -1, log_mag))
    return terms


def _series_tail_log(consts: ModelConstants, n: int, k_max: int) -> float:
    """log of a bound on all omitted terms k > k_max (every m).

    Each l-sum is at most 2^big, so a term is at most
    C1 p_m kappa^2m (a kappa)^(2 big) ft_big/(big!)^2; once consecutive
    bounds shrink by 1/2 the tail is at most twice the first of them.
    """
    x = consts.a_kappa**2
    worst = -math.inf
    for m, weight in enumerate(consts.weights):
        if weight == 0:
            continue
        big = (n + k_max + 1 - m) if n >= 2 else k_max + 1
        if not _tail_ratio_ok(x, big):
            return math.inf
        lt = (
            math.log(consts.c1 * weight)
            + big * math.log(x)
            + math.log(consts.profile.ftilde(big))
            - 2 * math.lgamma(big + 1)
            + math.log(2)
        )
        worst = max(worst, lt)
    return worst + math.log(3)


def mu_series_sum(consts: ModelConstants, n: int, bits: int = 128) -> SignedLogSum:
    """mu_n from the explicit double series, as an extended-precision signed log.

    The k-range is extended until the rigorous tail bound is below
    2^-120 of the computed sum. Raises PrecisionFloorError when
    cancellation leaves fewer than half of ``bits`` significant.
    """
    if n < 0:
        raise DomainError(f"n={n} < 0")
    if bits < 100:
        raise DomainError(f"bits={bits} < 100")
    prec = bits + 32
    k_max = 8
    while True:
        terms = _series_terms(consts, n, k_max, prec)
        res = log_sum_signed(terms, bits)
        if res.is_zero:
            raise PrecisionFloorError(f"mu_{n} series cancelled to zero", res.log_abs)
        if res.rel_err > mpmath.ldexp(1, -bits // 2):
            raise PrecisionFloorError(f"mu_{n} series lost too many bits to cancellation", res.log_abs)
        tail = _series_tail_log(consts, n, k_max)
        if tail <= float(res.log_abs) - SERIES_TAIL_BITS * math.log(2):
            return res
        k_max *= 2
        if k_max > 4096:
            raise TruncationError(f"mu_{n} series tail bound not met", k_max)


def mu_series(consts: ModelConstants, n: int, bits: int = 128) -> float:
    """mu_n from the explicit double series (0.0 once it underflows)."""
    return float(mu_series_sum(consts, n, bits).value)


def mu_series_log(consts: ModelConstants, n: int, bits: int = 128) -> tuple[int, float]:
    """(sign, ln|mu_n|) from the series; usable far below the double range."""
    res = mu_series_sum(consts, n, bits)
    return res.sign, float(res.log_abs)


def mu_values(consts: ModelConstants, n_max: int, bits: int = 128) -> ModeSpectrum:
    """mu_0..mu_n_max from the series, ordered with log values kept."""
    sums = [mu_series_sum(consts, n, bits) for n in range(n_max + 1)]
    mu = [float(r.value) for r in sums]
    log_mu = [float(r.log_abs) if r.sign > 0 else -math.inf for r in sums]
    return ordered_spectrum(mu, log_mu)


def ordered_spectrum(mu, log_mu=None) -> ModeSpectrum:
    """Eigenvalues of K in non-increasing order with multiplicities.

    mu_0 counts once and every other mu_n twice; ties keep lower n first.
    ``log_mu`` carries ln mu_n for entries too small for a double.
    """
    vals = []
    for n, v in enumerate(mu):
        v = float(v)
        if not math.isfinite(v):
            raise PSDViolation(f"mu_{n} = {v} is not finite")
        if v < -PSD_TOL:
            raise PSDViolation(f"PSD violation, upstream bug: mu_{n} = {v!r}")
        vals.append(max(v, 0.0))
    if log_mu is None:
        logs = [math.log(v) if v > 0 else -math.inf for v in vals]
    else:
        logs = [float(x) for x in log_mu]
        if len(logs) != len(vals):
            raise DomainError("mu and log_mu differ in length")
    keyed = [(logs[0], 0)] if vals else []
    for n in range(1, len(vals)):
        keyed += [(logs[n], n), (logs[n], n)]
    keyed.sort(key=lambda p: (-p[0], p[1]))
    return ModeSpectrum(
        tuple(vals),
        tuple(vals[n] for _, n in keyed),
        tuple(n for _, n in keyed),
        tuple(logs),
    )


@dataclass(frozen=True)
class BoundRow:
    n: int
    mu: float
    log_envelope: float
    ratio: float
    lower: float
    upper: float

    @property
    def inside(self) -> bool:
        return self.lower <= self.ratio <= self.upper


@dataclass(frozen=True)
class BoundReport:
    c1: float
    c2: float
    c3: float
    upper: float
    rows: tuple

    @property
    def all_inside(self) -> bool:
        return all(r.inside for r in self.rows)


def log_envelope(profile: RadialProfile, a_kappa: float, n: int) -> float:
    """ln e_n with e_n = (2n)^3 f_2n (a kappa e / 2n)^(2n)."""
    two_n = 2 * n
    return 3 * math.log(two_n) + profile.log_moment(two_n) + two_n * (math.log(a_kappa) + 1 - math.log(two_n))


def bound_check(consts: ModelConstants, n_range, mu=None) -> BoundReport:
    """Compare mu_n/e_n with the explicit two-sided constants.

    ``mu`` may map n to a precomputed value; missing ones come from the
    series. A negative lower constant (small n) is reported as is.
    """
    a = consts.profile.a
    ak = consts.a_kappa
    c1 = consts.c1
    p = (consts.p0, consts.p1, consts.p2)
    c2 = sum(p[m] * 2**m * a ** (-2 * m) for m in range(3))
    c3 = consts.p2 / a**4
    growth = math.exp(0.25 + ak * ak)
    upper = c1 * c2 * growth / (4 * math.pi)
    rows = []
    for n in n_range:
        if n < 2:
            raise DomainError("bound_check needs n >= 2")
        if mu is not None and n in mu:
            value = mu[n]
            log_mu = math.log(value) if value > 0 else -math.inf
        else:
            res = mu_series_sum(consts, n)
            value = float(res.value)
            log_mu = float(res.log_abs) if res.sign > 0 else -math.inf
        le = log_envelope(consts.profile, ak, n)
        ratio = math.exp(log_mu - le)
        lower = (c1 * c3 - 4 * c1 * c2 * ak * ak * growth / n) / (16 * math.pi * math.exp(1 / (6 * n)))
        rows.append(BoundRow(n, value, le, ratio, lower, upper))
    return BoundReport(c1, c2, c3, upper, tuple(rows))
