"""Adaptive quadrature and extended-precision signed summation.

Quadrature delegates to QUADPACK (``scipy.integrate.quad``, 21-point
Gauss-Kronrod with epsilon-algorithm extrapolation). Summation runs in
``mpmath`` at a caller-chosen mantissa width with Neumaier compensation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np
from scipy import integrate as _spi

from .errors import DomainError, IntegrationError

__all__ = [
    "Interval",
    "integrate",
    "gauss_legendre",
    "HighPrecisionSum",
    "SignedLogSum",
    "log_sum_signed",
]

_MIN_QUADPACK_RTOL = 50 * np.finfo(float).eps


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


def integrate(
    fn: Callable[[float], float],
    iv: Interval,
    rel_tol: float = 1e-10,
    points: Sequence[float] | None = None,
    limit: int = 400,
) -> float:
    """Integrate ``fn`` over ``iv`` to relative tolerance ``rel_tol``.

    ``points`` lists interior break points (kinks, jumps) of a
    piecewise-smooth integrand. Raises IntegrationError carrying the best
    estimate when the error estimate stays above the tolerance.
    """
    if not 1e-15 < rel_tol < 1e-3:
        raise DomainError(f"rel_tol={rel_tol} outside (1e-15, 1e-3)")
    lo, hi = iv.lo, iv.hi
    brk = None
    if points is not None:
        brk = sorted({float(p) for p in points if lo < p < hi})
        if not brk:
            brk = None
    kwargs = dict(epsabs=0.0, epsrel=max(rel_tol, _MIN_QUADPACK_RTOL), limit=limit, full_output=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        if brk is not None and math.isfinite(hi):
            out = _spi.quad(fn, lo, hi, points=brk, **kwargs)
        elif brk is not None:
            # QUADPACK refuses break points on infinite ranges; split by hand
            edges = [lo, *brk]
            val = err = 0.0
            for a, b in zip(edges, edges[1:]):
                v, e, *_ = _spi.quad(fn, a, b, **kwargs)
                val, err = val + v, err + e
            v, e, *_ = _spi.quad(fn, edges[-1], hi, **kwargs)
            out = (val + v, err + e, {})
        else:
            out = _spi.quad(fn, lo, hi, **kwargs)
    value, abserr = float(out[0]), float(out[1])
    if not math.isfinite(value) or abserr > rel_tol * abs(value) and abserr > 1e-300:
        raise IntegrationError("quadrature did not converge", value, abserr)
    return value


def gauss_legendre(fn: Callable[[np.ndarray], np.ndarray], iv: Interval, nodes: int) -> float:
    """Fixed-order Gauss-Legendre rule; ``fn`` must accept arrays."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * iv.width
    mid = 0.5 * (iv.lo + iv.hi)
    return float(half * np.dot(w, fn(mid + half * x)))


@dataclass(frozen=True)
class SignedLogSum:
    """Result of a signed log-domain sum.

    ``sign`` is 0 when the sum is indistinguishable from zero; ``log_abs``
    is then the log of the magnitude bound.
    """

    sign: int
    log_abs: mpmath.mpf
    log_err: mpmath.mpf
    bits: int

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def value(self) -> mpmath.mpf:
        if self.sign == 0:
            return mpmath.mpf(0)
        with mpmath.workprec(self.bits + 16):
            return self.sign * mpmath.exp(self.log_abs)

    @property
    def rel_err(self) -> mpmath.mpf:
        if self.sign == 0:
            return mpmath.inf
        with mpmath.workprec(self.bits + 16):
            return mpmath.exp(self.log_err - self.log_abs)


@dataclass(frozen=True)
class HighPrecisionSum:
    """Fixed-order collection of (sign, log|term|) pairs."""

    terms: tuple
    required_bits: int = 128

    def __post_init__(self):
        if self.required_bits < 100:
            raise DomainError(f"required_bits={self.required_bits} < 100")

    @property
    def working_bits(self) -> int:
        n = max(len(self.terms), 1)
        return self.required_bits + math.ceil(math.log2(n + 1)) + 16

    def evaluate(self) -> SignedLogSum:
        live = [(int(s), lm) for s, lm in self.terms if s != 0]
        if not live:
            return SignedLogSum(0, mpmath.ninf, mpmath.ninf, self.required_bits)
        # rounding ln|term| shifts the term by a relative |ln|term||*ulp
        log_scale = max(abs(float(lm)) for _, lm in live)
        prec = self.working_bits + math.ceil(math.log2(1.0 + log_scale))
        with mpmath.workprec(prec):
            live = [(s, mpmath.mpf(lm)) for s, lm in live]
            shift = max(lm for _, lm in live)
            total = mpmath.mpf(0)
            comp = mpmath.mpf(0)
            abs_total = mpmath.mpf(0)
            for s, lm in live:
                v = s * mpmath.exp(lm - shift)
                t = total + v
                if abs(total) >= abs(v):
                    comp += (total - t) + v
                else:
                    comp += (v - t) + total
                total = t
                abs_total += abs(v)
            total += comp
            # exp() and each addition contribute O(1) ulp per term, plus the
            # argument rounding of ln|term| and of the shift
            err = abs_total * (len(live) + 4 + 2 * (log_scale + 1)) * mpmath.ldexp(1, -prec)
            if abs(total) <= err:
                return SignedLogSum(0, mpmath.log(err) + shift, mpmath.log(err) + shift, self.required_bits)
            sign = 1 if total > 0 else -1
            return SignedLogSum(
                sign, mpmath.log(abs(total)) + shift, mpmath.log(err) + shift, self.required_bits
            )


def log_sum_signed(terms: Iterable[tuple[int, object]], required_bits: int = 128) -> SignedLogSum:
    """Sum ``sign * exp(log_mag)`` over ``terms`` in the given order.

    Log magnitudes may be floats, strings or ``mpmath.mpf``; supply them at
    least at ``required_bits`` precision if full accuracy is wanted.
    """
    return HighPrecisionSum(tuple(terms), required_bits).evaluate()
