import mpmath
import pytest
from hypothesis import given, strategies as st

from nikhp.measures import Interval
from nikhp.polynomials import (IndexError_, MultiIndex, Polynomial, all_indices,
                               chebyshev_to_monomial, chebyshev_vandermonde, clenshaw)


def test_multi_index_tails():
    n = MultiIndex((2, 1))
    assert (n.total, n.tail(1), n.tail(2), n.tail(3)) == (3, 3, 1, 0)
    assert n.bump(1) == MultiIndex((3, 1))
    assert str(n) == "(2,1)"
    assert n.is_decreasing() and not MultiIndex((1, 2)).is_decreasing()


@pytest.mark.parametrize("comps", [(), (0, 0), (-1, 2)])
def test_multi_index_invalid(comps):
    with pytest.raises(IndexError_):
        MultiIndex(comps)


@pytest.mark.parametrize("m,budget,count", [(1, 5, 5), (2, 6, 27), (3, 2, 9)])
def test_all_indices_count(m, budget, count):
    idx = list(all_indices(m, budget))
    assert len(idx) == count
    assert len(set(idx)) == count


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6),
       st.floats(-2, 2, allow_nan=False))
def test_evaluation_paths_agree(coeffs, x):
    p = Polynomial(coeffs)
    ref = sum(c * mpmath.mpf(x) ** i for i, c in enumerate(coeffs))
    assert abs(p(mpmath.mpf(x)) - ref) < mpmath.mpf(10) ** -50


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=5))
def test_from_roots_vanishes(roots):
    p = Polynomial.from_roots([mpmath.mpf(r) for r in roots])
    assert p.degree == len(roots) and p.leading == 1
    plain = Polynomial(p.coefficients)
    for r in roots:
        assert abs(plain(mpmath.mpf(r))) < mpmath.mpf(10) ** -60


def test_chebyshev_conversion():
    iv = Interval(2, 3)
    coeffs = [mpmath.mpf(c) for c in ("0.5", "-1", "0.25", "2")]
    p = chebyshev_to_monomial(coeffs, iv)
    plain = Polynomial(p.coefficients)
    for x in (mpmath.mpf("2.1"), mpmath.mpf("2.75"), mpmath.mpf(5)):
        assert abs(plain(x) - clenshaw(coeffs, iv.to_reference(x))) < mpmath.mpf(10) ** -60
        assert abs(p(x) - plain(x)) < mpmath.mpf(10) ** -60


def test_vandermonde_is_chebyshev():
    t = mpmath.mpf("0.3")
    vals = chebyshev_vandermonde(t, 6)
    assert all(abs(v - mpmath.chebyt(i, t)) < mpmath.mpf(10) ** -70 for i, v in enumerate(vals))


def test_arithmetic_and_derivative():
    p = Polynomial([1, 2, 3])
    q = Polynomial([0, 1])
    assert (p * q).coefficients == (0, 1, 2, 3)
    assert (p - p).is_zero()
    assert p.derivative().coefficients == (2, 6)
    assert p.monic().leading == 1
    with pytest.raises(ZeroDivisionError):
        Polynomial([]).monic()
