import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from nikhp import precision
from nikhp.hermite_pade import (QuadratureInsufficient, at_system_probe,
                                certify_perfectness, h_type_i, h_type_ii, pade_numerator,
                                psi, remainder_phi, solve_type_i, solve_type_ii,
                                type_i_form)
from nikhp.measures import Interval, angelesco_system, chebyshev, legendre, nikishin_system

from oracles import A11_CONSTANT, PHI_CHEBYSHEV_1_AT_2, Q11_C0, Q11_C1, mp

TIGHT = mpmath.mpf(10) ** -60


def coeffs(p):
    return [mpmath.nstr(c, 12) for c in p.coefficients]


# -- type II ---------------------------------------------------------------------


def test_chebyshev_degree_two(chebyshev_m1):
    Q = solve_type_ii(chebyshev_m1, [2]).Q
    assert abs(Q.coefficients[0] + mpmath.mpf(0.5)) < TIGHT
    assert abs(Q.coefficients[1]) < TIGHT and Q.coefficients[2] == 1


def test_index_10_is_centred(reference_system):
    Q = solve_type_ii(reference_system, (1, 0)).Q
    assert Q.degree == 1 and abs(Q.coefficients[0]) < TIGHT


def test_index_11_against_moment_oracle(reference_system):
    Q = solve_type_ii(reference_system, (1, 1)).Q
    assert abs(Q.coefficients[0] - mp(Q11_C0)) < mpmath.mpf(10) ** -35
    assert abs(Q.coefficients[1] - mp(Q11_C1)) < mpmath.mpf(10) ** -35
    assert all(-1 < x < 1 for x in solve_type_ii(reference_system, (1, 1)).q_zeros())


@pytest.mark.parametrize("n", [(1, 0), (0, 1), (2, 1), (1, 2), (3, 3), (5, 2), (0, 4)])
def test_type_ii_residuals(reference_system, n):
    fam = solve_type_ii(reference_system, n)
    assert fam.Q.degree == sum(n) and fam.Q.leading == 1
    assert max(r.relative for r in fam.residuals()) < precision.residual_tolerance()


def test_quadrature_too_small():
    s = nikishin_system([chebyshev(-1, 1, 8), legendre(2, 3, 8)])
    with pytest.raises(QuadratureInsufficient):
        solve_type_ii(s, (3, 2))


def test_wrong_index_length(reference_system):
    with pytest.raises(ValueError):
        solve_type_ii(reference_system, (1, 1, 1))


def test_angelesco_zeros_split():
    s = angelesco_system([legendre(-1, "-0.2", 40), legendre("0.2", 1, 40)])
    fam = solve_type_ii(s, (2, 1))
    zs = list(fam.q_zeros())
    assert sum(1 for x in zs if -1 < x < -0.2) == 2
    assert sum(1 for x in zs if 0.2 < x < 1) == 1


# -- Pade numerators and remainders ---------------------------------------------------


def test_pade_numerator_linear(chebyshev_m1):
    P = pade_numerator(solve_type_ii(chebyshev_m1, [1]), 1)
    assert P.degree == 0 and abs(P.coefficients[0] - 1) < TIGHT


def test_pade_numerator_quadratic(chebyshev_m1):
    P = pade_numerator(solve_type_ii(chebyshev_m1, [2]), 1)
    assert P.degree == 1 and abs(P.coefficients[1] - 1) < TIGHT
    assert abs(P.coefficients[0]) < TIGHT


def test_pade_numerator_degree_for_empty_block(reference_system):
    fam = solve_type_ii(reference_system, (3, 0))
    assert fam.P[1].degree == 2


def test_phi_closed_form(chebyshev_m1):
    fam = solve_type_ii(chebyshev_m1, [1])
    assert abs(remainder_phi(fam, 1, 2) - mp(PHI_CHEBYSHEV_1_AT_2)) < mpmath.mpf(10) ** -40


@pytest.mark.parametrize("n", [(2, 1), (3, 2)])
def test_phi_two_representations(reference_system, n):
    fam = solve_type_ii(reference_system, n)
    z = mpmath.mpc(5, 1)
    for j in (1, 2):
        direct = fam.Q(z) * reference_system.s_hat(1, j, z) - fam.P[j - 1](z)
        assert abs(fam.phi(j, z) - direct) < precision.identity_tolerance() * abs(direct) * 1e8


@pytest.mark.parametrize("n", [(2, 1), (3, 3)])
def test_phi_decay(reference_system, n):
    fam = solve_type_ii(reference_system, n)
    for j in (1, 2):
        a = abs(mpmath.mpf(10) ** (3 * (n[j - 1] + 1)) * fam.phi(j, mpmath.mpf(1000)))
        b = abs(mpmath.mpf(10) ** (4 * (n[j - 1] + 1)) * fam.phi(j, mpmath.mpf(10000)))
        # bounded: no growth as z moves out by a decade
        assert b / a < 2


# -- second-kind functions ---------------------------------------------------------


def test_psi_one_equals_phi_one(reference_system):
    fam = solve_type_ii(reference_system, (2, 1))
    assert abs(psi(fam, 1, 4) - fam.phi(1, 4)) < TIGHT


def test_psi_decay(reference_system):
    fam = solve_type_ii(reference_system, (2, 2))
    a = abs(mpmath.mpf(1000) ** 3 * fam.psi(1, mpmath.mpf(1000)))
    b = abs(mpmath.mpf(10000) ** 3 * fam.psi(1, mpmath.mpf(10000)))
    assert 0.5 < b / a < 2


def test_psi_sign_changes(reference_system):
    assert len(solve_type_ii(reference_system, (1, 1)).psi_zeros(1)) == 1


def test_h_first_is_one(reference_system):
    fam = solve_type_ii(reference_system, (2, 1))
    assert abs(h_type_ii(fam, 1, mpmath.mpc(3, 1)) - 1) < TIGHT


def test_rel3_and_rel4(reference_system):
    fam = solve_type_ii(reference_system, (2, 1))
    for k in (1, 2):
        assert max(r.relative for r in fam.rel3_residuals(k)) < precision.residual_tolerance()
    diff, size = fam.rel4_residual(1, mpmath.mpc(5, 1))
    assert diff < precision.identity_tolerance() * size


def test_k_constants_positive(reference_system):
    fam = solve_type_ii(reference_system, (3, 2))
    assert fam.K(1) > 0 and fam.K(2) > 0


# -- type I ----------------------------------------------------------------------------


def test_type_i_single_degree_one(chebyshev_m1):
    fam = solve_type_i(chebyshev_m1, [1])
    assert fam.a[1].coefficients == (1,)
    assert fam.a[0].is_zero()


def test_type_i_chebyshev_degree_two(chebyshev_m1):
    fam = solve_type_i(chebyshev_m1, [2])
    a1, a0 = fam.a[1], fam.a[0]
    assert a1.degree == 1 and a1.leading == 1 and abs(a1.coefficients[0]) < TIGHT
    assert a0.degree == 0 and abs(a0.coefficients[0] + 1) < TIGHT


def test_type_i_index_11_oracle(reference_system):
    fam = solve_type_i(reference_system, (1, 1))
    assert fam.a[2].coefficients == (1,)
    assert abs(fam.a[1].coefficients[0] - mp(A11_CONSTANT)) < mpmath.mpf(10) ** -35


@pytest.mark.parametrize("n", [(1, 1), (2, 1), (3, 2), (2, 0), (0, 3), (4, 4)])
def test_type_i_residuals(reference_system, n):
    fam = solve_type_i(reference_system, n)
    res = fam.orthogonality_residuals()
    assert len(res) == sum(n) - 1
    assert max((r.relative for r in res), default=0) < precision.residual_tolerance()
    for j in (1, 2):
        if n[j - 1]:
            assert fam.a[j].degree == n[j - 1] - 1


def test_type_i_order_at_infinity(reference_system):
    # the form a_0 + a_1 s_1 + a_2 s_2 decays like z^-(|n|)
    fam = solve_type_i(reference_system, (2, 1))
    a = abs(mpmath.mpf(100) ** 3 * type_i_form(fam, 0, mpmath.mpf(100)))
    b = abs(mpmath.mpf(1000) ** 3 * type_i_form(fam, 0, mpmath.mpf(1000)))
    assert 0.5 < b / a < 2


def test_form_last_is_polynomial(reference_system):
    fam = solve_type_i(reference_system, (2, 2))
    z = mpmath.mpc(0.3, 2)
    assert type_i_form(fam, 2, z) == fam.a[2](z)


def test_form_sign_changes_21(reference_system):
    assert len(solve_type_i(reference_system, (2, 1)).form_zeros(1)) == 2


def test_orto_identities(reference_system):
    fam = solve_type_i(reference_system, (2, 1))
    tol = precision.residual_tolerance()
    assert max(r.relative for r in fam.orto1_residuals(1)) < tol
    diff, size = fam.orto2_residual(0, mpmath.mpc(5, 2))
    assert diff < precision.identity_tolerance() * size
    star = solve_type_i(reference_system, (1, 1)).orto1_star_residuals(0)
    assert len(star) == 1 and star[0].relative < tol


def test_h_last_is_one(reference_system):
    fam = solve_type_i(reference_system, (2, 2))
    assert abs(h_type_i(fam, 2, mpmath.mpc(0.5, 1)) - 1) < TIGHT


@settings(max_examples=12, deadline=None)
@given(st.integers(1, 5), st.integers(0, 5))
def test_decreasing_indices_zero_counts(reference_system, a, b):
    n1, n2 = max(a, b), min(a, b)
    if n1 == 0:
        return
    fam2 = solve_type_ii(reference_system, (n1, n2))
    fam1 = solve_type_i(reference_system, (n1, n2))
    assert len(fam2.q_zeros()) == n1 + n2
    assert len(fam2.psi_zeros(1)) == n2
    assert len(fam1.form_zeros(1)) == n1 + n2 - 1
    assert len(fam1.form_zeros(2)) == max(n2 - 1, 0)


# -- certification and probe ---------------------------------------------------------------


def test_single_measure_perfect(chebyshev_m1):
    rep = certify_perfectness(chebyshev_m1, 5)
    assert rep.passed and len(rep.rows) == 5


def test_reference_budget_six(reference_system):
    rep = certify_perfectness(reference_system, 6)
    assert rep.passed and len(rep.rows) == 27
    assert not rep.failures


def test_certificate_reports_failure_on_threshold(reference_system):
    rep = certify_perfectness(reference_system, 2, threshold=mpmath.mpf(2))
    assert not rep.passed


def test_probe_counts_bounded(reference_system):
    rep = at_system_probe(reference_system, (1, 1), 100, Interval("2.5", "2.9"))
    assert rep.passed and rep.bound == 1


def test_probe_seeded(reference_system):
    iv = Interval("1.5", "4")
    a = at_system_probe(reference_system, (1, 2, 2), 15, iv, seed=7)
    b = at_system_probe(reference_system, (1, 2, 2), 15, iv, seed=7)
    assert a.counts == b.counts and a.passed


def test_probe_rejects_first_support(reference_system):
    with pytest.raises(ValueError):
        at_system_probe(reference_system, (1, 1), 3, Interval("-0.5", "0.5"))
