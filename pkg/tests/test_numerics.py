import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plate_spectra.errors import DomainError, IntegrationError
from plate_spectra.numerics import HighPrecisionSum, Interval, gauss_legendre, integrate, log_sum_signed


def test_interval_rejects_empty():
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)


@pytest.mark.parametrize(
    "fn, lo, hi, exact",
    [
        (math.sin, 0.0, math.pi, 2.0),
        (lambda x: math.exp(-x), 0.0, math.inf, 1.0),
        (lambda x: 1.0 / math.sqrt(x), 0.0, 1.0, 2.0),
    ],
)
def test_integrate_known_values(fn, lo, hi, exact):
    assert integrate(fn, Interval(lo, hi), 1e-12) == pytest.approx(exact, rel=1e-12)


def test_integrate_break_points_on_infinite_range():
    step = lambda x: math.exp(-x) if x > 1.0 else 0.0  # noqa: E731
    assert integrate(step, Interval(0.0, math.inf), 1e-12, points=[1.0]) == pytest.approx(math.exp(-1), rel=1e-12)


def test_integrate_reports_failure_with_estimate():
    with pytest.raises(IntegrationError) as info:
        integrate(lambda x: math.sin(1.0 / x) / x, Interval(1e-9, 1.0), 1e-12, limit=5)
    assert math.isfinite(info.value.estimate)


def test_integrate_rejects_silly_tolerance():
    with pytest.raises(DomainError):
        integrate(math.sin, Interval(0, 1), 1e-17)


def test_gauss_legendre_exact_for_polynomials():
    # 5 nodes integrate degree 9 exactly
    assert gauss_legendre(lambda x: x**9 + x**8, Interval(0.0, 1.0), 5) == pytest.approx(0.1 + 1 / 9, rel=1e-14)


def _exact_sum(values):
    return sum((Fraction(v) for v in values), Fraction(0))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-(10**30), max_value=10**30), min_size=1, max_size=40))
def test_log_sum_matches_exact_rational_sum(values):
    exact = _exact_sum(values)
    with mpmath.workprec(200):
        terms = [((v > 0) - (v < 0), mpmath.log(abs(v)) if v else mpmath.mpf(0)) for v in values]
        res = log_sum_signed(terms, 128)
        if exact == 0:
            assert res.is_zero
        else:
            assert res.sign == (1 if exact > 0 else -1)
            assert abs(res.value - exact) <= mpmath.mpf(2) ** -110 * abs(exact) + abs(res.value) * res.rel_err


def test_log_sum_survives_heavy_cancellation():
    # 1e40 + 1 - 1e40 needs more than double precision
    with mpmath.workprec(200):
        big = mpmath.log(mpmath.mpf(10) ** 40)
        res = log_sum_signed([(1, big), (1, mpmath.mpf(0)), (-1, big)], 160)
        assert res.sign == 1
        assert abs(res.value - 1) < mpmath.mpf(10) ** -6


def test_log_sum_handles_tiny_magnitudes():
    res = log_sum_signed([(1, -5000.0), (-1, -5001.0)], 128)
    assert float(res.log_abs) == pytest.approx(-5000 + math.log1p(-math.exp(-1)), abs=1e-12)


def test_high_precision_sum_requires_enough_bits():
    with pytest.raises(DomainError):
        HighPrecisionSum(((1, 0.0),), required_bits=64)


def test_empty_sum_is_zero():
    assert log_sum_signed([], 128).is_zero
