import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plate_spectra import band, fd_oracle as fd
from plate_spectra.errors import DomainError


@pytest.mark.parametrize("r", [0.0, 1.0, 2.5])
def test_check_sector_matches_closed_form(r):
    vals = fd.lowest_eigs(fd.assemble(r, 512, "check"), 2)
    np.testing.assert_allclose(vals, [r * r + 4, r * r + 16], atol=5e-3)


@pytest.mark.parametrize("r", [0.0, 1.0])
def test_check_sector_second_order(r):
    series = [fd.lowest_eigs(fd.assemble(r, n, "check"), 1)[0] for n in (128, 256, 512)]
    assert fd.observed_order(series, r * r + 4) >= 1.9
    assert fd.observed_order(series) >= 1.9


def test_unprojected_sectors_expose_constant_modes():
    r = 0.7
    hat = fd.lowest_eigs(fd.assemble(r, 128, "hat", project=False), 4)
    check = fd.lowest_eigs(fd.assemble(r, 128, "check", project=False), 1)
    assert check[0] == pytest.approx(r * r, abs=1e-10)
    assert np.min(np.abs(hat - 2 * r * r)) < 1e-10


def test_hat_sector_at_minimum(minimum):
    assert fd.hat_eigs(minimum.kappa, 1024, 1)[0] == pytest.approx(1.887837, abs=1e-3)


def test_full_sector_is_union_of_blocks():
    r = 0.9
    full = fd.lowest_eigs(fd.assemble(r, 128, "full_h4"), 4)
    parts = np.sort(np.concatenate([fd.hat_eigs(r, 128, 4), fd.lowest_eigs(fd.assemble(r, 128, "check"), 4)]))
    np.testing.assert_allclose(full, parts[:4], rtol=1e-10)


def test_sparse_path_agrees_with_dense():
    r = 0.6
    dense = fd.hat_eigs(r, 2048, 2)
    sparse = fd.hat_eigs(r, 4096, 2)
    np.testing.assert_allclose(dense, sparse, atol=5e-6)


@pytest.mark.parametrize("r", [0.5, 0.632138, 1.5])
def test_hat_converges_to_secular_root_at_second_order(r):
    exact = band.hat_root(r)
    series = [fd.hat_eigs(r, n, 1)[0] for n in (128, 256, 512, 1024)]
    errs = np.array(series) - exact
    assert np.all(errs > 0)  # Ritz values bound from above
    assert fd.observed_order(series, exact) >= 1.9


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=3.0),
    st.lists(st.floats(min_value=-1, max_value=1), min_size=17, max_size=17),
    st.lists(st.floats(min_value=-1, max_value=1), min_size=17, max_size=17),
)
def test_matrix_form_equals_reduced_form(r, v2_half, w3_half):
    """x^T A x on the half interval is half the exact form on J."""
    n = 32
    m = n // 2
    v2_half = np.array(v2_half)
    w3_half = np.array(w3_half)
    w3_half[0] = 0.0
    disc = fd.assemble(r, n, "hat", project=False)
    x = np.concatenate([v2_half, w3_half[1:]])
    # even v2, odd v3 = i w3 on the full grid
    v2 = np.concatenate([v2_half[:0:-1], v2_half])
    w3 = np.concatenate([-w3_half[:0:-1], w3_half])
    assert v2.size == n + 1 and m + 1 == v2_half.size
    full = fd.reduced_form(r, v2, 1j * w3)
    assert 2 * disc.form(x) == pytest.approx(full, rel=1e-12, abs=1e-12)


def test_reduced_form_is_rayleigh_numerator():
    # exact eigenfunction at r = 1, lambda = 2, sampled finely
    t = np.linspace(-math.pi / 2, math.pi / 2, 4001)
    v2 = 1 - (math.pi / 2) * np.cos(t)
    v3 = 1j * (math.pi / 2) * np.sin(t)
    h = t[1] - t[0]
    mass = np.trapezoid(np.abs(v2) ** 2 + np.abs(v3) ** 2, dx=h)
    assert fd.reduced_form(1.0, v2, v3) / mass == pytest.approx(2.0, abs=1e-5)


@pytest.mark.parametrize("n", [30, 33])
def test_assemble_rejects_bad_grid(n):
    with pytest.raises(DomainError):
        fd.assemble(1.0, n)


def test_assemble_rejects_unknown_sector():
    with pytest.raises(DomainError):
        fd.assemble(1.0, 64, "diagonal")


def test_discretization_is_immutable():
    disc = fd.assemble(1.0, 64)
    with pytest.raises(AttributeError):
        disc.r = 2.0
