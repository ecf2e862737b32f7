import functools
import math

import mpmath
import numpy as np
import pytest

from nikhp import precision
from nikhp.asymptotics import (DegreeSchedule, boundary_product, connection_check,
                               connection_matrices, diagonal_schedule, fit_boundary_constants,
                               joukowski_inverse, laurent_fit, miracle_residual, rate_report,
                               ratio_report, staircase_schedule, type_i_ratio_report,
                               weak_report)
from nikhp.hermite_pade import solve_type_i, solve_type_ii
from nikhp.measures import Interval, chebyshev, legendre, nikishin_system
from nikhp.potential import interaction_matrix, solve_vector_equilibrium

from oracles import ARCSINE_NTH_ROOT_AT_3, BOUNDARY_PRODUCT_M1, RATE_AT_3, RATIO_AT_2


@pytest.fixture(scope="module")
def arcsine_eq():
    return solve_vector_equilibrium([(-1, 1)], interaction_matrix([1]), G=1000)


@pytest.fixture(scope="module")
def pair_eq():
    return solve_vector_equilibrium([(-1, 1), (2, 3)], interaction_matrix([0.5, 0.5]), G=600)


def memo(solver):
    return functools.lru_cache(maxsize=None)(solver)


# -- schedules ---------------------------------------------------------------------


def test_diagonal_schedule():
    s = diagonal_schedule(2, range(2, 5))
    assert [str(n) for n in s] == ["(2,2)", "(3,3)", "(4,4)"]
    assert s.max_total == 8 and s.diameter == 0


def test_staircase_schedule():
    s = staircase_schedule(3, 4, 7)
    assert [n.components for n in s] == [(2, 1, 1), (2, 2, 1), (2, 2, 2), (3, 2, 2)]
    assert all(n[1] - n[3] <= 1 for n in s)


def test_schedule_rejects_increasing_index():
    with pytest.raises(ValueError):
        DegreeSchedule(((1, 2),), (0.5, 0.5), 1)
    with pytest.raises(ValueError):
        DegreeSchedule(((4, 1),), (0.5, 0.5), 1)


# -- connection identities -----------------------------------------------------------


def test_miracle_at_two(reference_system):
    z = mpmath.mpc(5, 2)
    s = reference_system
    direct = s.s_hat(1, 2, z) - s.s_hat(1, 1, z) * s.s_hat(2, 2, z) + s.s_hat(2, 1, z)
    assert abs(direct) < mpmath.mpf(10) ** -30
    assert miracle_residual(s, 2, z) < mpmath.mpf(10) ** -30


@pytest.mark.parametrize("z", [mpmath.mpc(0.5, 1), mpmath.mpc(-2, 0.5), -3,
                               mpmath.mpc(2.5, -1), mpmath.mpc(5, 2)])
def test_connection_reference(reference_system, z):
    fam = solve_type_ii(reference_system, (3, 2))
    res = connection_check(fam, reference_system, 2, z)
    assert res.max() < precision.identity_tolerance()
    psi2 = fam.psi(2, z)
    alt = reference_system.s_hat(2, 2, z) * fam.phi(1, z) - fam.phi(2, z)
    assert abs(psi2 - alt) < precision.identity_tolerance() * max(abs(psi2), 1)


def test_connection_three_measures(three_system):
    fam = solve_type_ii(three_system, (3, 2, 1))
    for j in (2, 3):
        assert connection_check(fam, three_system, j, mpmath.mpc(0.5, 1.5)).max() \
            < precision.identity_tolerance()


def test_connection_matrices_inverse(three_system):
    D, Dinv = connection_matrices(three_system, mpmath.mpc(-1.5, 0.7))
    eye = D * Dinv
    for i in range(3):
        for k in range(3):
            assert abs(eye[i, k] - (1 if i == k else 0)) < mpmath.mpf(10) ** -50


def test_connection_rejects_support_point(reference_system):
    fam = solve_type_ii(reference_system, (2, 1))
    with pytest.raises(ValueError):
        connection_check(fam, reference_system, 2, mpmath.mpf("2.5"))


# -- weak asymptotics -------------------------------------------------------------------


def test_weak_single_measure(chebyshev_m1, arcsine_eq):
    rep = weak_report(chebyshev_m1, diagonal_schedule(1, [5, 10, 20]), arcsine_eq, [3],
                      k_constants=False)
    ks = [r for r in rep.rows if r.quantity == "kolmogorov_1"]
    assert ks[-1].measured < 0.06
    assert rep.flags["kolmogorov_trend_1"]
    fam = solve_type_ii(chebyshev_m1, (20,))
    root = abs(fam.Q(3)) ** (mpmath.mpf(1) / 20)
    assert abs(root / mpmath.mpf(ARCSINE_NTH_ROOT_AT_3) - 1) < 0.05


def test_weak_trend_reference(reference_system, pair_eq):
    rep = weak_report(reference_system, diagonal_schedule(2, range(2, 9)), pair_eq,
                      {1: [5, mpmath.mpc(0, 2)], 2: [-3, 6]}, solver=memo(solve_type_ii),
                      psi_tolerance=0.25)
    assert rep.flags["kolmogorov_trend_1"] and rep.flags["kolmogorov_trend_2"]
    assert rep.flags["psi_last"]


# -- rate ------------------------------------------------------------------------------------


def test_rate_single_measure(chebyshev_m1, arcsine_eq):
    rep = rate_report(chebyshev_m1, diagonal_schedule(1, range(3, 31, 3)), 1, [3], arcsine_eq)
    last = rep.rows[-1]
    assert last.measured < 0
    assert abs(last.measured / float(mpmath.mpf(RATE_AT_3)) - 1) < 0.1
    assert last.predicted == pytest.approx(float(mpmath.mpf(RATE_AT_3)), rel=1e-3)
    assert rep.flags["negative"]


def test_rate_negative_reference(reference_system, pair_eq):
    rep = rate_report(reference_system, diagonal_schedule(2, range(2, 7)), 2,
                      [5, mpmath.mpc(0.5, 1.5)], pair_eq, solver=memo(solve_type_ii),
                      tolerance=0.5)
    assert rep.flags["negative"]
    assert rep.flags["upper_bound"]


def test_rate_needs_prediction(chebyshev_m1):
    with pytest.raises(ValueError):
        rate_report(chebyshev_m1, diagonal_schedule(1, [3]), 1, [3], None)


# -- ratio --------------------------------------------------------------------------------------


@pytest.mark.parametrize("gen", [chebyshev, legendre])
def test_ratio_single_measure(gen):
    s = nikishin_system([gen(-1, 1, 64)])
    fam30, fam31 = solve_type_ii(s, (30,)), solve_type_ii(s, (31,))
    r = fam31.Q(2) / fam30.Q(2)
    assert abs(r - mpmath.mpf(RATIO_AT_2)) < 1e-2


def test_ratio_boundary_single(chebyshev_m1):
    est, rep = ratio_report(chebyshev_m1, diagonal_schedule(1, range(8, 17)), 1,
                            [mpmath.mpc(0.5, 1), -2], solver=memo(solve_type_ii))
    vals = est.boundary[1]
    assert all(abs(v / float(BOUNDARY_PRODUCT_M1) - 1) < 0.02 for v in vals)
    assert est.normalization_ok
    assert rep.flags["deltas_decrease_last3"]


def test_ratio_real_off_support(chebyshev_m1):
    est, _ = ratio_report(chebyshev_m1, diagonal_schedule(1, [5, 6]), 1, [2, -3],
                          boundary_points=0)
    assert all(abs(v.imag) < 1e-12 for v in est.values[1])


def test_ratio_length_one_schedule(chebyshev_m1):
    est, rep = ratio_report(chebyshev_m1, diagonal_schedule(1, [4]), 1, [2],
                            boundary_points=0)
    assert est.deltas == []
    rep = type_i_ratio_report(chebyshev_m1, diagonal_schedule(1, [4]), 1, [2])
    assert rep.rows == []


def test_type_i_ratio_stabilises(reference_system):
    rep = type_i_ratio_report(reference_system, diagonal_schedule(2, range(2, 7)), 1,
                              [mpmath.mpc(0.5, 1), 4], solver=memo(solve_type_i))
    assert rep.flags["A_stabilises"] and rep.flags["form_stabilises"]


def test_type_i_ratio_single_measure(chebyshev_m1):
    rep = type_i_ratio_report(chebyshev_m1, diagonal_schedule(1, range(4, 12)), 1,
                              [mpmath.mpc(0.5, 1)], solver=memo(solve_type_i))
    assert rep.flags["A_stabilises"]


# -- ratio helpers -----------------------------------------------------------------------------


def test_joukowski_inverse_exterior():
    iv = Interval(-1, 1)
    for z in (2, -3, 0.5j, 0.3 + 1e-9j):
        w = joukowski_inverse(iv, z)
        assert abs(w) >= 1 - 1e-12
        assert abs((w + 1 / w) / 2 - z) < 1e-9


def test_boundary_product_closed_form():
    iv = Interval(-1, 1)
    fit = laurent_fit(lambda z: (z + mpmath.sqrt(z - 1) * mpmath.sqrt(z + 1)) / 2, iv, 1, 4)
    for x in (-0.6, 0.0, 0.7):
        assert boundary_product([fit], 1, x) == pytest.approx(0.25, rel=1e-6)


def test_fit_boundary_constants_cancels():
    logs = np.array([0.3, -0.2, 0.1])
    c = fit_boundary_constants(logs)
    full = np.concatenate([[1.0], c, [1.0]])
    for k in range(3):
        assert math.log(full[k + 1] ** 2 / (full[k] * full[k + 2])) + logs[k] == \
            pytest.approx(0, abs=1e-12)
