"""Small-coupling eigenvalue predictions and accumulation envelopes.

Below the threshold Lambda the perturbed plate has eigenvalues
kappa_l(alpha) = Lambda - alpha^2 (Lambda pi lambda_l(K))^2 + o(alpha^2), and
their accumulation at Lambda is squeezed between the envelopes

    w_-(t) = t^4 f_t^2 (a kappa e / t)^(2t),   w_+(t) = t^8 f_t^2 (a kappa e / t)^(2t).

Both underflow any float for moderate t, so everything here works with
ln w and ln tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .band import SpectralMinimum
from .errors import DomainError
from .model_operator import ModeSpectrum
from .profiles import RadialProfile

__all__ = [
    "AsymptoticEnvelope",
    "EigenvaluePrediction",
    "make_envelope",
    "log_w",
    "inverse_w",
    "varrho",
    "varrho_limit_check",
    "predict_eigenvalue",
    "envelope_check",
    "counting_consistency",
]

_POWERS = {"minus": 4.0, "plus": 8.0}
T_SCAN = (3.0, 1000.0)
T0_MARGIN = 1.1
INVERSE_XTOL = 1e-12


def _log_w(profile: RadialProfile, a_kappa: float, which: str, t: float) -> float:
    return _POWERS[which] * math.log(t) + 2 * profile.log_moment(t) + 2 * t * (math.log(a_kappa) + 1 - math.log(t))


@dataclass(frozen=True)
class AsymptoticEnvelope:
    profile: RadialProfile
    minimum: SpectralMinimum
    t0: float

    @property
    def a_kappa(self) -> float:
        return self.profile.a * self.minimum.kappa

    def log_w_minus(self, t: float) -> float:
        return log_w(self, "minus", t)

    def log_w_plus(self, t: float) -> float:
        return log_w(self, "plus", t)


@dataclass(frozen=True)
class EigenvaluePrediction:
    """Leading term of kappa_l(alpha); the o(alpha^2) remainder is not modelled."""

    l: int
    alpha: float
    predicted: float
    log_gap: float  # ln(Lambda - predicted), -inf at alpha = 0


def _last_rise(profile: RadialProfile, a_kappa: float, which: str, points: int = 400) -> float | None:
    """Largest t in the scan window where d/dt ln w changes sign."""
    grid = np.geomspace(*T_SCAN, points)
    h = 1e-4
    slope = np.array(
        [
            (_log_w(profile, a_kappa, which, t + h) - _log_w(profile, a_kappa, which, max(t - h, 3.0)))
            / (t + h - max(t - h, 3.0))
            for t in grid
        ]
    )
    flips = np.nonzero(np.sign(slope[:-1]) != np.sign(slope[1:]))[0]
    if flips.size == 0:
        return None if slope[-1] < 0 else T_SCAN[1]
    return float(grid[flips[-1] + 1])


def make_envelope(profile: RadialProfile, minimum: SpectralMinimum) -> AsymptoticEnvelope:
    """Envelope pair with t0 beyond the last stationary point of either."""
    ak = profile.a * minimum.kappa
    rises = [_last_rise(profile, ak, w) for w in _POWERS]
    rises = [r for r in rises if r is not None]
    t0 = max([T_SCAN[0], *(T0_MARGIN * r for r in rises)])
    if t0 >= T_SCAN[1]:
        raise DomainError("envelopes are not decreasing anywhere in the scan window")
    return AsymptoticEnvelope(profile, minimum, t0)


def log_w(env: AsymptoticEnvelope, which: str, t: float) -> float:
    """ln w_minus(t) or ln w_plus(t) for t > t0."""
    if which not in _POWERS:
        raise DomainError(f"which={which!r} is neither 'minus' nor 'plus'")
    if not t > env.t0:
        raise DomainError(f"t={t} not above t0={env.t0}")
    return _log_w(env.profile, env.a_kappa, which, float(t))


def inverse_w(env: AsymptoticEnvelope, which: str, log_tau: float) -> float:
    """t > t0 with ln w(t) = log_tau."""
    top = _log_w(env.profile, env.a_kappa, which, env.t0)
    if not log_tau < top:
        raise DomainError(f"log_tau={log_tau} not below ln w(t0)={top}")

    def gap(t):
        return _log_w(env.profile, env.a_kappa, which, t) - log_tau

    lo, hi = env.t0, 2.0 * env.t0
    while gap(hi) > 0:
        lo, hi = hi, 2.0 * hi
    return brentq(gap, lo, hi, xtol=INVERSE_XTOL, rtol=4 * np.finfo(float).eps)


def varrho(env: AsymptoticEnvelope, which: str, log_tau: float) -> float:
    """rho(tau) = 1 / w^-1(tau)."""
    return 1.0 / inverse_w(env, which, log_tau)


@dataclass(frozen=True)
class VarrhoReport:
    c: float
    which: str
    log_tau: tuple
    ratio: tuple

    @property
    def deviation(self) -> tuple:
        return tuple(abs(r - 1.0) for r in self.ratio)

    @property
    def tail_max_deviation(self) -> float:
        dev = self.deviation
        return max(dev[len(dev) // 2 :])

    @property
    def monotone(self) -> bool:
        dev = self.deviation
        return all(b <= a for a, b in zip(dev, dev[1:]))


def varrho_limit_check(env: AsymptoticEnvelope, c: float, log_tau_grid, which: str = "plus") -> VarrhoReport:
    """Tabulate rho(tau)/rho(c tau) = w^-1(c tau)/w^-1(tau) along the grid."""
    if c <= 0:
        raise DomainError(f"c={c} must be positive")
    shift = math.log(c)
    ratios = []
    for lt in log_tau_grid:
        ratios.append(1.0 if shift == 0 else inverse_w(env, which, lt + shift) / inverse_w(env, which, lt))
    return VarrhoReport(c, which, tuple(float(x) for x in log_tau_grid), tuple(ratios))


def predict_eigenvalue(spectrum: ModeSpectrum, minimum: SpectralMinimum, l: int, alpha: float) -> EigenvaluePrediction:
    """Lambda - alpha^2 (Lambda pi lambda_l(K))^2 for 1-based ``l``."""
    if not 1 <= l <= len(spectrum.ordered):
        raise DomainError(f"l={l} outside computed spectrum 1..{len(spectrum.ordered)}")
    if not 0 <= alpha < 1:
        raise DomainError(f"alpha={alpha} outside [0, 1)")
    lam = minimum.lambda_cap
    log_lk = spectrum.log_ordered[l - 1]
    if alpha == 0 or log_lk == -math.inf:
        return EigenvaluePrediction(l, alpha, lam, -math.inf)
    log_gap = 2 * math.log(alpha) + 2 * math.log(lam * math.pi) + 2 * log_lk
    return EigenvaluePrediction(l, alpha, lam - math.exp(log_gap), log_gap)


@dataclass(frozen=True)
class EnvelopeRow:
    k: int
    log_gap: float
    log_w_minus: float
    log_w_plus: float

    @property
    def ratio(self) -> float:
        """g_k / (-2 k ln k)."""
        return self.log_gap / (-2 * self.k * math.log(self.k))

    @property
    def contained(self) -> bool:
        return self.log_w_minus <= self.log_gap <= self.log_w_plus


@dataclass(frozen=True)
class EnvelopeReport:
    alpha: float
    eps: float
    rows: tuple

    @property
    def trend_toward_one(self) -> bool:
        first, last = self.rows[0], self.rows[-1]
        return abs(last.ratio - 1) < abs(first.ratio - 1)


def envelope_check(
    spectrum: ModeSpectrum,
    env: AsymptoticEnvelope,
    minimum: SpectralMinimum,
    alpha: float,
    eps: float,
    k_range,
) -> EnvelopeReport:
    """Leading-term gaps against w_-((1+eps)k) and w_+((1-eps)k).

    This mixes two limits (alpha -> 0 at fixed k, k -> inf at fixed alpha),
    so it is a consistency check between regimes, not a bound.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps={eps} outside (0, 1)")
    rows = []
    for k in k_range:
        if k < 2:
            raise DomainError("envelope_check needs k >= 2")
        g = predict_eigenvalue(spectrum, minimum, k, alpha).log_gap
        lo_t, hi_t = (1 + eps) * k, (1 - eps) * k
        lwm = log_w(env, "minus", lo_t) if lo_t > env.t0 else math.nan
        lwp = log_w(env, "plus", hi_t) if hi_t > env.t0 else math.nan
        rows.append(EnvelopeRow(k, g, lwm, lwp))
    return EnvelopeReport(alpha, eps, tuple(rows))


@dataclass(frozen=True)
class CountingRow:
    log_tau: float
    count: int
    inverse: float

    @property
    def ratio(self) -> float:
        return self.count / self.inverse


def counting_consistency(
    spectrum: ModeSpectrum, env: AsymptoticEnvelope, minimum: SpectralMinimum, alpha: float, k_range
) -> tuple:
    """#{k : Lambda - kappa_k > tau} against w_+^-1(tau), tau between consecutive gaps."""
    gaps = [predict_eigenvalue(spectrum, minimum, l, alpha).log_gap for l in range(1, len(spectrum.ordered) + 1)]
    rows = []
    for k in k_range:
        if not 1 <= k < len(gaps):
            raise DomainError(f"k={k} outside the computed spectrum")
        # midpoint between the k-th and (k+1)-th gap
        log_tau = 0.5 * (gaps[k - 1] + gaps[k]) if gaps[k] < gaps[k - 1] else gaps[k - 1] - 1e-9
        count = sum(1 for g in gaps if g > log_tau)
        rows.append(CountingRow(log_tau, count, inverse_w(env, "plus", log_tau)))
    return tuple(rows)
