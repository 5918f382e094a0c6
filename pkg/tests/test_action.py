import io
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from rydberg_wkb import potential as pot
from rydberg_wkb.action import (SCAN_COLUMNS, action_integral, action_scan,
                                born_contour_integral, coulomb_action, turning_points,
                                write_scan_csv)
from rydberg_wkb.errors import DomainError, NoBoundRegionError
from rydberg_wkb.params import Channel, channels_for
from rydberg_wkb.spectrum import solve_level

ALPHA = 1 / 137.036


# Turning points -------------------------------------------------------------

def test_s_wave_outer_point(hydrogen):
    tp = turning_points(Channel(0, 0.5), -1 / 9, hydrogen)
    assert tp.r_minus is None
    assert tp.r_plus == pytest.approx(18.0, rel=1e-12)


def test_f_wave_inner_point_near_threshold(rb, hydrogen):
    tp = turning_points(Channel(3, 3.5), -1e-8, hydrogen)
    assert tp.r_minus == pytest.approx(3.5**2 / 2, rel=1e-6)
    # core polarization pulls the Rb point in slightly
    tp = turning_points(Channel(3, 3.5), -1e-8, rb)
    assert tp.r_minus == pytest.approx(3.5**2 / 2, rel=3e-2)


def test_p_wave_inner_point(rb):
    tp = turning_points(Channel(1, 1.5), -1e-6, rb)
    assert tp.r_minus == pytest.approx(0.03472, rel=1e-2)


def test_d_wave_inner_point_inside_core(rb):
    tp = turning_points(Channel(2, 2.5), -1e-6, rb)
    assert 0.1 < tp.r_minus < 0.2 < rb.r_c(2)


@pytest.mark.parametrize("l,j", [(0, 0.5), (1, 0.5), (1, 1.5), (2, 1.5), (2, 2.5), (3, 3.5)])
@pytest.mark.parametrize("x", [5.0, 30.0, 100.0])
def test_turning_point_residuals_and_sign(rb, l, j, x):
    ch = Channel(l, j)
    E = -1 / x**2
    tp = turning_points(ch, E, rb)
    for res in tp.residuals:
        assert res < 1e-10 * max(1.0, abs(E))
    r_p = tp.r_plus
    assert pot.q_function(r_p * (1 - 1e-9), ch, E, rb) < 0 < pot.q_function(r_p * (1 + 1e-9), ch, E, rb)
    lo = tp.r_minus if tp.r_minus is not None else 1e-6
    if tp.r_minus is not None:
        assert pot.q_function(lo * (1 - 1e-9), ch, E, rb) > 0
        assert lo < r_p
    inner = np.geomspace(lo, r_p, 300)[1:-1]
    assert np.all(pot.q_function(inner, ch, E, rb) < 0)


def test_no_bound_region(rb):
    with pytest.raises(NoBoundRegionError):
        turning_points(Channel(1, 1.5), 0.0, rb)
    with pytest.raises(NoBoundRegionError):
        turning_points(Channel(2, 2.5), -1e4, rb)


# Action integral -------------------------------------------------------------

def test_coulomb_s_action(hydrogen):
    assert action_integral(Channel(0, 0.5), -1 / 16, hydrogen).nu == pytest.approx(4.0, abs=1e-10)


def test_coulomb_p_action_without_fs(hydrogen_no_fs):
    ev = action_integral(Channel(1, 1.5), -1 / 25, hydrogen_no_fs)
    assert ev.nu == pytest.approx(3.5, abs=1e-10)
    assert ev.abs_err_estimate < 1e-9


@pytest.mark.parametrize("n", [5, 17, 80])
def test_coulomb_closure_with_so(hydrogen, n):
    for l in (1, 2, 3):
        for ch in channels_for(l, include_so=True):
            E = -1 / n**2
            d = -2 * ALPHA**2 * float(pot.g_so(ch.j, l))
            nu = action_integral(ch, E, hydrogen).nu
            assert nu == pytest.approx(coulomb_action(ch, E, hydrogen), abs=1e-9)
            assert nu == pytest.approx(born_contour_integral(-E, 1, (l + 0.5) ** 2, d), abs=1e-9)


def test_d_state_closure_at_eigenvalue(rb):
    ch = Channel(2, 2.5)
    level = solve_level(57, ch, rb)
    assert 1 / math.sqrt(-level.E) == pytest.approx(55.653, abs=2e-3)
    assert abs(action_integral(ch, level.E, rb).nu - (57 - 3 + 0.5)) < 1e-9


@pytest.mark.parametrize("ch", [c for l in (0, 1, 2) for c in channels_for(l)], ids=lambda c: c.label)
def test_monotone_in_energy(rb, ch):
    x = np.linspace(6.0, 90.0, 50)
    nu = [action_integral(ch, -1 / xi**2, rb).nu for xi in x]
    assert np.all(np.diff(nu) > 0)


@pytest.mark.parametrize("ch", [Channel(0, 0.5), Channel(1, 0.5), Channel(2, 2.5)], ids=lambda c: c.label)
def test_tolerance_halving_is_within_estimate(rb, ch):
    E = -1 / 40**2
    a = action_integral(ch, E, rb, tol=1e-9)
    b = action_integral(ch, E, rb, tol=5e-10)
    assert abs(a.nu - b.nu) <= max(a.abs_err_estimate, 1e-13)


def test_panel_split_at_cutoff_matters(rb):
    # an integration that ignores the jump at r_so would disagree with a brute-force quad
    ch, E = Channel(1, 1.5), -1 / 30**2
    ev = action_integral(ch, E, rb)
    tp = ev.turning_points
    f = lambda r: math.sqrt(max(-pot.q_function(r, ch, E, rb), 0.0))
    pts = sorted({rb.cutoff(1), rb.r_c(1)})
    ref = sum(quad(f, a, b, limit=500, epsabs=1e-13, epsrel=1e-13)[0]
              for a, b in zip([tp.r_minus] + pts, pts + [tp.r_plus])) / math.pi
    assert ev.nu == pytest.approx(ref, abs=1e-8)


# Closed forms ----------------------------------------------------------------

def test_coulomb_action_examples(hydrogen):
    assert coulomb_action(Channel(0, 0.5), -1 / 49, hydrogen) == pytest.approx(7.0, abs=1e-14)
    p = hydrogen.with_(alpha_fs=0.0)
    assert coulomb_action(Channel(2, 1.5), -1 / 100, p) == pytest.approx(10 - 2.5, abs=1e-14)


def test_coulomb_action_so_term(hydrogen):
    ch = Channel(1, 1.5)
    no_so = coulomb_action(ch, -1 / 100, hydrogen, include_so=False)
    with_so = coulomb_action(ch, -1 / 100, hydrogen)
    assert no_so == pytest.approx(8.5, abs=1e-14)
    # D = -2 alpha^2 g enters as B D / (2 C^{3/2})
    assert with_so - no_so == pytest.approx(-2 * ALPHA**2 * 0.5 / (2 * 1.5**3), rel=1e-12)


def test_coulomb_action_rejects_positive_energy(hydrogen):
    with pytest.raises(DomainError):
        coulomb_action(Channel(0, 0.5), 0.1, hydrogen)


def test_born_examples():
    assert born_contour_integral(1, 1, 0.25, 0) == pytest.approx(0.5, abs=1e-15)
    assert born_contour_integral(1, 2, 1, 0.01) == pytest.approx(1.01, abs=1e-15)


def test_born_against_quadrature():
    A, B, C = 1 / 25, 1.0, 2.25
    f = lambda r: -A + 2 * B / r - C / r**2
    r1 = brentq(f, 0.5, B / A)
    r2 = brentq(f, B / A, 100.0)
    val, _ = quad(lambda r: math.sqrt(max(f(r), 0.0)), r1, r2, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert val / math.pi == pytest.approx(born_contour_integral(A, B, C, 0.0), abs=1e-9)


def test_born_domain_and_warning():
    with pytest.raises(DomainError):
        born_contour_integral(-1, 1, 1, 0)
    with pytest.warns(UserWarning, match="not small"):
        born_contour_integral(1, 1, 1, 0.5)


# Scans -----------------------------------------------------------------------

def test_scan_pure_coulomb(hydrogen):
    x = np.linspace(5, 60, 12)
    scan = action_scan(Channel(0, 0.5), -1 / x**2, hydrogen)
    assert scan.slope == pytest.approx(1.0, abs=1e-9)
    assert scan.intercept == pytest.approx(0.0, abs=1e-8)
    assert scan.max_residual < 1e-9
    assert [e.inv_sqrt_neg_E for e in scan.evaluations] == pytest.approx(list(x))


def test_scan_fine_structure_shift_is_order_alpha_squared(rb):
    x = np.linspace(20, 80, 7)
    a = action_scan(Channel(1, 0.5), -1 / x**2, rb)
    b = action_scan(Channel(1, 1.5), -1 / x**2, rb)
    # intercept is Delta - (l + 1/2); j = 3/2 has the smaller defect
    shift = a.intercept - b.intercept
    assert ALPHA**2 < shift < 1000 * ALPHA**2
    assert np.max(np.abs(np.array([e.nu for e in a.evaluations])
                         - np.array([e.nu for e in b.evaluations]) - shift)) < 1e-6


def test_scan_parallel_matches_serial(rb):
    E = -1 / np.linspace(20, 40, 5) ** 2
    serial = action_scan(Channel(2, 2.5), E, rb)
    parallel = action_scan(Channel(2, 2.5), E, rb, workers=2)
    assert [e.nu for e in serial.evaluations] == [e.nu for e in parallel.evaluations]


def test_scan_error_carries_energy(rb):
    with pytest.raises(NoBoundRegionError, match=r"E=-20000"):
        action_scan(Channel(2, 2.5), [-1e-4, -2e4], rb)


def test_scan_csv(hydrogen):
    scan = action_scan(Channel(1, 1.5), [-1 / 100, -1 / 400], hydrogen)
    buf = io.StringIO()
    write_scan_csv(scan, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# slope=")
    assert lines[1] == ",".join(SCAN_COLUMNS)
    assert len(lines) == 4
