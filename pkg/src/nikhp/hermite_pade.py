"""Type I and type II Hermite-Padé polynomials of Nikishin and Angelesco
systems, their second-kind functions, and perfectness certification.

Linear systems are assembled in a Chebyshev basis adapted to the support of
the first measure, row-normalised, and solved by QR at working precision.  The
smallest singular value of the normalised matrix is the normality margin.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import precision
from .measures import (DomainError, Interval, Measure, NikishinSystem,
                       QuadratureError, cauchy_transform)
from .polynomials import (MultiIndex, Polynomial, all_indices, chebyshev_to_monomial,
                          chebyshev_vandermonde)
from .zeros import CountMismatch, ZeroList, form_zeros, poly_real_zeros

mpf = mpmath.mpf


class NormalityFailure(RuntimeError):
    """The multi-index is not normal at the working precision."""

    def __init__(self, message: str, margin=None):
        super().__init__(message)
        self.margin = margin


class QuadratureInsufficient(QuadratureError):
    """The system quadrature is too small for the requested degree."""


def _as_index(n, m: int) -> MultiIndex:
    idx = n if isinstance(n, MultiIndex) else MultiIndex(tuple(n))
    if idx.m != m:
        raise ValueError(f"multi-index {idx} has {idx.m} components, system has {m}")
    return idx


def minimum_nq(total: int) -> int:
    """Smallest admissible system quadrature size for degree-``total`` solves."""
    return total + 8


def _check_nq(system, total: int):
    if system.nq < minimum_nq(total):
        raise QuadratureInsufficient(
            f"Nq = {system.nq} is too small for |n| = {total}; need >= {minimum_nq(total)}")


def hull(intervals: Sequence[Interval]) -> Interval:
    return Interval(min(i.a for i in intervals), max(i.b for i in intervals))


def _normalised_solve(rows: list, rhs: list):
    """Row-normalise, solve by QR, and return (solution, smallest singular value)."""
    scaled_rows, scaled_rhs = [], []
    for r, b in zip(rows, rhs):
        s = max(abs(v) for v in r)
        if s == 0:
            raise NormalityFailure("zero row in the orthogonality system", mpf(0))
        scaled_rows.append([v / s for v in r])
        scaled_rhs.append(b / s)
    A = mpmath.matrix(scaled_rows)
    sv = mpmath.svd_r(A, compute_uv=False)
    margin = min(sv[i] for i in range(sv.rows))
    if not margin > precision.rank_tolerance():
        raise NormalityFailure(
            f"orthogonality matrix is numerically singular (margin {mpmath.nstr(margin, 5)})",
            margin)
    x, _ = mpmath.qr_solve(A, mpmath.matrix(scaled_rhs))
    return [x[i] for i in range(x.rows)], margin


def polynomial_part(p: Polynomial, moments: Sequence) -> Polynomial:
    """Polynomial part at infinity of ``p(z) * sum_k moments[k] / z^(k+1)``.

    Equivalently ``int (p(z) - p(x)) / (z - x) ds(x)`` when ``moments`` are the
    moments of s.  The coefficient of z^i is ``sum_{k>i} p_k mu_{k-1-i}``.
    """
    q = p.coefficients
    out = []
    for i in range(len(q) - 1):
        out.append(mpmath.fsum(q[k] * moments[k - 1 - i] for k in range(i + 1, len(q))))
    return Polynomial(out)


@dataclass
class Residual:
    """One defining integral: absolute value and value relative to the
    integral of the absolute integrand."""

    label: str
    absolute: mpmath.mpf
    relative: mpmath.mpf


def _residual(label: str, measure: Measure, f: Callable, values: Sequence | None = None):
    if values is None:
        values = [f(x) for x in measure.nodes]
    terms = [w * v for w, v in zip(measure.signed_weights, values)]
    total = mpmath.fsum(terms)
    scale = mpmath.fsum(abs(t) for t in terms)
    rel = abs(total) / scale if scale else mpf(0)
    return Residual(label, abs(total), rel)


# ---------------------------------------------------------------------------
# Type II


class TypeIIFamily:
    """Solved type II data for one multi-index.

    ``Q`` is monic of degree |n|.  Second-kind functions, the polynomials
    ``Q_{n,k}`` and the constants ``K_{n,j}`` are computed lazily (Nikishin
    systems only).
    """

    def __init__(self, system, index: MultiIndex, Q: Polynomial, margin):
        self.system = system
        self.index = index
        self.Q = Q
        self.margin = margin
        self._psi_nodes: dict[int, list] = {}
        self._zero_lists: dict[int, ZeroList] = {}

    @property
    def is_nikishin(self) -> bool:
        return isinstance(self.system, NikishinSystem)

    def measure(self, j: int) -> Measure:
        """The measure defining the j-th orthogonality block."""
        if self.is_nikishin:
            return self.system.measure(1, j)
        return self.system.measures[j - 1]

    @functools.cached_property
    def P(self) -> list[Polynomial]:
        return [pade_numerator(self, j) for j in range(1, self.system.m + 1)]

    def residuals(self) -> list[Residual]:
        out = []
        Q_nodes_cache = {}
        for j in range(1, self.system.m + 1):
            mu = self.measure(j)
            key = id(mu.nodes)
            if key not in Q_nodes_cache:
                Q_nodes_cache[key] = [self.Q(x) for x in mu.nodes]
            qv = Q_nodes_cache[key]
            for nu in range(self.index[j]):
                vals = [x**nu * q for x, q in zip(mu.nodes, qv)]
                out.append(_residual(f"typeII j={j} nu={nu}", mu, None, vals))
        return out

    # -- second-kind functions (Nikishin) --------------------------------

    def _require_nikishin(self):
        if not self.is_nikishin:
            raise TypeError("second-kind functions are defined for Nikishin systems")

    def psi_at_nodes(self, k: int) -> list:
        """Values of ``Psi_{n,k}`` at the quadrature nodes of sigma_{k+1}."""
        self._require_nikishin()
        if k not in self._psi_nodes:
            nodes = self.system.sigma(k + 1).nodes
            if k == 0:
                self._psi_nodes[k] = [self.Q(x) for x in nodes]
            else:
                sigma = self.system.sigma(k)
                inner = self.psi_at_nodes(k - 1)
                self._psi_nodes[k] = [
                    cauchy_transform(sigma, x, factor=lambda t, k=k: self.psi(k - 1, t),
                                     factor_at_nodes=inner) for x in nodes]
        return self._psi_nodes[k]

    def psi(self, k: int, z):
        return psi(self, k, z)

    def phi(self, j: int, z):
        return remainder_phi(self, j, z)

    def _psi_expected(self, k: int):
        """Admissible sign-change counts of Psi_{n,k} on Delta_{k+1}."""
        N = self.index.tail(k + 1)
        if self.index.is_decreasing():
            return N
        return {max(N - 1, 0), N}

    def psi_zeros(self, k: int) -> ZeroList:
        """Sign changes of ``Psi_{n,k}`` on Delta_{k+1}, 1 <= k <= m-1."""
        self._require_nikishin()
        if k not in self._zero_lists:
            interval = self.system.interval(k + 1)
            self._zero_lists[k] = form_zeros(lambda x: self.psi(k, x), interval,
                                             self._psi_expected(k))
        return self._zero_lists[k]

    def q_zeros(self) -> ZeroList:
        if 0 not in self._zero_lists:
            interval = (self.system.interval(1) if self.is_nikishin
                        else hull([g.interval for g in self.system.measures]))
            self._zero_lists[0] = poly_real_zeros(self.Q, interval)
        return self._zero_lists[0]

    @functools.cached_property
    def zero_polys(self) -> list[Polynomial]:
        """``[Q_{n,0}, Q_{n,1}, ..., Q_{n,m+1}]`` with ``Q_{n,1} = Q_n``."""
        self._require_nikishin()
        m = self.system.m
        polys = [Polynomial.one(), self.Q]
        for k in range(1, m):
            polys.append(Polynomial.from_roots(self.psi_zeros(k).points))
        polys.append(Polynomial.one())
        return polys

    def q_poly(self, k: int) -> Polynomial:
        return self.zero_polys[k]

    def h(self, k: int, z):
        return h_type_ii(self, k, z)

    def K(self, j: int):
        """``K_{n,j} = |int Q_{n,j}^2 |H_{n,j}| dsigma_j / |Q_{n,j-1} Q_{n,j+1}||^(-1/2)``."""
        return self.K_integral(j) ** mpf(-0.5)

    def K_integral(self, j: int):
        # Q_{n,j}^2 H_{n,j} / (Q_{n,j-1} Q_{n,j+1}) = Q_{n,j} Psi_{n,j-1} / Q_{n,j+1}
        sigma = self.system.sigma(j)
        psi_vals = self.psi_at_nodes(j - 1)
        Qj, Qnext = self.q_poly(j), self.q_poly(j + 1)
        terms = [w * abs(Qj(x) * p / Qnext(x))
                 for x, w, p in zip(sigma.nodes, sigma.weights, psi_vals)]
        return mpmath.fsum(terms)

    def rel3_residuals(self, k: int) -> list[Residual]:
        """``int x^nu Q_{n,k} H_{n,k} dsigma_k / (Q_{n,k-1} Q_{n,k+1})`` for nu < N_{n,k}."""
        sigma = self.system.sigma(k)
        psi_vals = self.psi_at_nodes(k - 1)
        Qnext = self.q_poly(k + 1)
        base = [p / Qnext(x) for x, p in zip(sigma.nodes, psi_vals)]
        return [_residual(f"rel3 k={k} nu={nu}", sigma, None,
                          [x**nu * b for x, b in zip(sigma.nodes, base)])
                for nu in range(self.index.tail(k))]

    def rel4_residual(self, k: int, z):
        """``H_{n,k+1}(z)`` minus its integral representation over sigma_k."""
        sigma = self.system.sigma(k)
        psi_vals = self.psi_at_nodes(k - 1)
        Qk, Qnext = self.q_poly(k), self.q_poly(k + 1)
        factor = [Qk(x) * p / Qnext(x) for x, p in zip(sigma.nodes, psi_vals)]
        rhs = cauchy_transform(
            sigma, z, factor=lambda x: Qk(x) * self.psi(k - 1, x) / Qnext(x),
            factor_at_nodes=factor)
        lhs = self.h(k + 1, z)
        return abs(lhs - rhs), abs(lhs)


def _type_ii_rows(system, n: MultiIndex, H: Interval):
    """Rows ``int T_nu Q ds_j`` split into unknown part and right-hand side."""
    N = n.total
    rows, rhs = [], []
    nikishin = isinstance(system, NikishinSystem)
    for j in range(1, n.m + 1):
        if n[j] == 0:
            continue
        mu = system.measure(1, j) if nikishin else system.measures[j - 1]
        test_iv = mu.interval
        basis = [chebyshev_vandermonde(H.to_reference(x), N + 1) for x in mu.nodes]
        tests = [chebyshev_vandermonde(test_iv.to_reference(x), n[j]) for x in mu.nodes]
        w = mu.signed_weights
        for nu in range(n[j]):
            row = [mpmath.fsum(w[q] * tests[q][nu] * basis[q][i] for q in range(len(w)))
                   for i in range(N + 1)]
            rows.append(row[:N])
            rhs.append(-row[N])
    return rows, rhs


def solve_type_ii(system, n) -> TypeIIFamily:
    """Monic type II polynomial ``Q_n`` of a Nikishin or Angelesco system.

    Parameters
    ----------
    system : NikishinSystem or AngelescoSystem
    n : MultiIndex or sequence of int

    Returns
    -------
    TypeIIFamily

    Raises
    ------
    NormalityFailure
        When the orthogonality matrix has a singular value below ``2**(-P/2)``.

    Examples
    --------
    >>> from nikhp.measures import chebyshev, nikishin_system
    >>> import mpmath
    >>> s = nikishin_system([chebyshev(-1, 1, 24, scale=1 / mpmath.pi)])
    >>> fam = solve_type_ii(s, [2])
    >>> [mpmath.nstr(mpmath.chop(c, 1e-60), 10) for c in fam.Q.coefficients]
    ['-0.5', '0.0', '1.0']
    """
    n = _as_index(n, system.m)
    N = n.total
    _check_nq(system, N)
    if isinstance(system, NikishinSystem):
        H = system.interval(1)
    else:
        H = hull([g.interval for g in system.measures])
    rows, rhs = _type_ii_rows(system, n, H)
    coeffs, margin = _normalised_solve(rows, rhs)
    Q = chebyshev_to_monomial(coeffs + [mpf(1)], H).monic()
    if Q.degree != N:
        raise NormalityFailure(f"deg Q = {Q.degree} != |n| = {N}", margin)
    return TypeIIFamily(system, n, Q, margin)


def pade_numerator(family: TypeIIFamily, j: int) -> Polynomial:
    """``P_{n,j}(z) = int (Q_n(z) - Q_n(x)) / (z - x) ds_{1,j}(x)``."""
    mu = family.measure(j)
    return polynomial_part(family.Q, mu.moments(family.Q.degree + 1))


def remainder_phi(family: TypeIIFamily, j: int, z):
    """``Phi_{n,j}(z) = int Q_n(x) ds_{1,j}(x) / (z - x)``."""
    mu = family.measure(j)
    return cauchy_transform(mu, z, factor=family.Q)


def psi(family: TypeIIFamily, k: int, z):
    """``Psi_{n,0} = Q_n`` and ``Psi_{n,k}(z) = int Psi_{n,k-1} dsigma_k / (z - x)``."""
    family._require_nikishin()
    if k == 0:
        return family.Q(z)
    if not 1 <= k <= family.system.m:
        raise ValueError(f"k must lie in 0..{family.system.m}")
    sigma = family.system.sigma(k)
    nodes_vals = family.psi_at_nodes(k - 1)
    return cauchy_transform(sigma, z, factor=lambda t: psi(family, k - 1, t),
                            factor_at_nodes=nodes_vals)


def h_type_ii(family: TypeIIFamily, k: int, z):
    """``H_{n,k} = Q_{n,k-1} Psi_{n,k-1} / Q_{n,k}`` for 1 <= k <= m+1."""
    denom = family.q_poly(k)(z)
    if denom == 0:
        raise DomainError(f"z is a zero of Q_(n,{k})")
    return family.q_poly(k - 1)(z) * psi(family, k - 1, z) / denom


# ---------------------------------------------------------------------------
# Type I


class TypeIFamily:
    """Solved type I data for one multi-index of a Nikishin system.

    ``a[j]`` for j = 0..m are the polynomials ``a_{n,j}``; the last non-empty
    one is monic.
    """

    def __init__(self, system: NikishinSystem, index: MultiIndex, a: list[Polynomial],
                 margin):
        self.system = system
        self.index = index
        self.a = a
        self.margin = margin
        self._form_nodes: dict[int, list] = {}
        self._zero_lists: dict[int, ZeroList] = {}

    def form(self, k: int, z):
        return type_i_form(self, k, z)

    def form_at_nodes(self, k: int) -> list:
        """``A-form_{n,k}`` at the nodes of sigma_k (1 <= k <= m)."""
        if k not in self._form_nodes:
            sigma = self.system.sigma(k)
            vals = [self.a[k](x) for x in sigma.nodes]
            for j in range(k + 1, self.system.m + 1):
                fac = self.system.factor(k, j)
                vals = [v + self.a[j](x) * f for v, x, f in zip(vals, sigma.nodes, fac)]
            self._form_nodes[k] = vals
        return self._form_nodes[k]

    def _form_expected(self, k: int):
        N = self.index.tail(k)
        if self.index.is_decreasing():
            return max(N - 1, 0)
        return None

    def form_zeros(self, k: int) -> ZeroList:
        """Sign changes of ``A-form_{n,k}`` on Delta_k."""
        if k not in self._zero_lists:
            interval = self.system.interval(k)
            if self.index.tail(k) == 0:
                # the form vanishes identically; A_{n,k} is taken as 1
                zl = ZeroList(interval, ())
            elif k == self.system.m:
                zl = poly_real_zeros(self.a[k], interval)
                exp = self._form_expected(k)
                if exp is not None and len(zl) != exp:
                    raise CountMismatch(f"a_(n,m) has {len(zl)} zeros on {interval}",
                                        zl, exp)
            else:
                zl = form_zeros(lambda x: self.form(k, x), interval, self._form_expected(k))
            self._zero_lists[k] = zl
        return self._zero_lists[k]

    @functools.cached_property
    def zero_polys(self) -> list[Polynomial]:
        """``[A_{n,0}, A_{n,1}, ..., A_{n,m+1}]``."""
        m = self.system.m
        polys = [Polynomial.one()]
        for k in range(1, m + 1):
            polys.append(Polynomial.from_roots(self.form_zeros(k).points))
        polys.append(Polynomial.one())
        return polys

    def a_poly(self, k: int) -> Polynomial:
        return self.zero_polys[k]

    def h(self, k: int, z):
        return h_type_i(self, k, z)

    def orthogonality_residuals(self) -> list[Residual]:
        """The defining conditions ``int x^nu A-form_{n,1} dsigma_1`` for nu <= |n|-2."""
        sigma = self.system.sigma(1)
        vals = self.form_at_nodes(1)
        return [_residual(f"typeI nu={nu}", sigma, None,
                          [x**nu * v for x, v in zip(sigma.nodes, vals)])
                for nu in range(self.index.total - 1)]

    def orto1_residuals(self, k: int) -> list[Residual]:
        """``int x^nu A-form_{n,k} dsigma_k / A_{n,k-1}`` for nu <= N_{n,k} - 2."""
        sigma = self.system.sigma(k)
        prev = self.a_poly(k - 1)
        base = [v / prev(x) for x, v in zip(sigma.nodes, self.form_at_nodes(k))]
        return [_residual(f"orto1 k={k} nu={nu}", sigma, None,
                          [x**nu * b for x, b in zip(sigma.nodes, base)])
                for nu in range(self.index.tail(k) - 1)]

    def orto1_star_residuals(self, k: int) -> list[Residual]:
        """``int x^nu A_{n,k+1} H_{n,k+1} dsigma_{k+1} / (A_{n,k} A_{n,k+2})``
        for nu <= N_{n,k+1} - 2, with H evaluated from its definition."""
        j = k + 1
        sigma = self.system.sigma(j)
        forms = self.form_at_nodes(j)
        A_k, A_j, A_next = self.a_poly(k), self.a_poly(j), self.a_poly(j + 1)
        base = []
        for x, v in zip(sigma.nodes, forms):
            H = A_next(x) * v / A_j(x)
            base.append(A_j(x) * H / (A_k(x) * A_next(x)))
        return [_residual(f"orto1* k={k} nu={nu}", sigma, None,
                          [x**nu * b for x, b in zip(sigma.nodes, base)])
                for nu in range(self.index.tail(j) - 1)]

    def orto2_residual(self, k: int, z):
        """``H_{n,k}(z)`` minus its integral over sigma_{k+1}; returns (abs diff, |H|)."""
        j = k + 1
        sigma = self.system.sigma(j)
        A_k, A_j = self.a_poly(k), self.a_poly(j)
        vals = [A_j(x) * v / A_k(x) for x, v in zip(sigma.nodes, self.form_at_nodes(j))]
        rhs = cauchy_transform(sigma, z,
                               factor=lambda x: A_j(x) * self.form(j, x) / A_k(x),
                               factor_at_nodes=vals)
        lhs = self.h(k, z)
        return abs(lhs - rhs), abs(lhs)


def _type_i_columns(system: NikishinSystem, n: MultiIndex):
    """Column blocks ``int T_nu T_i ds_{1,j}`` for the homogeneous type I system."""
    H = system.interval(1)
    N = n.total
    rows = [[] for _ in range(N - 1)]
    layout = []
    for j in range(1, n.m + 1):
        if n[j] == 0:
            continue
        mu = system.measure(1, j)
        basis = [chebyshev_vandermonde(H.to_reference(x), max(N - 1, n[j])) for x in mu.nodes]
        w = mu.signed_weights
        for i in range(n[j]):
            layout.append((j, i))
            for nu in range(N - 1):
                rows[nu].append(mpmath.fsum(w[q] * basis[q][nu] * basis[q][i]
                                            for q in range(len(w))))
    return rows, layout


def solve_type_i(system: NikishinSystem, n) -> TypeIFamily:
    """Type I Hermite-Padé polynomials ``a_{n,0}, ..., a_{n,m}``.

    The last ``a_{n,j}`` with ``n_j > 0`` (``a_{n,m}`` for indices with
    ``n_m > 0``) is made monic.

    Raises
    ------
    NormalityFailure
        On a rank-deficient system or a degree drop ``deg a_{n,j} < n_j - 1``.
    """
    if not isinstance(system, NikishinSystem):
        raise TypeError("type I solver expects a Nikishin system")
    n = _as_index(n, system.m)
    N = n.total
    _check_nq(system, N)
    H = system.interval(1)
    last = max(j for j in range(1, n.m + 1) if n[j] > 0)
    rows, layout = _type_i_columns(system, n)
    pivot = layout.index((last, n[last] - 1))
    if N == 1:
        values = [mpf(1)]
        margin = mpf(1)
    else:
        reduced = [[v for c, v in enumerate(r) if c != pivot] for r in rows]
        rhs = [-r[pivot] for r in rows]
        sol, margin = _normalised_solve(reduced, rhs)
        values = sol[:pivot] + [mpf(1)] + sol[pivot:]
    cheb = {j: [mpf(0)] * n[j] for j in range(1, n.m + 1)}
    for (j, i), v in zip(layout, values):
        cheb[j][i] = v
    polys = {j: (chebyshev_to_monomial(cheb[j], H) if n[j] else Polynomial([]))
             for j in range(1, n.m + 1)}
    lead = polys[last].leading
    a = [None] + [Polynomial([c / lead for c in polys[j].coefficients],
                             cheb=(tuple(c / lead for c in cheb[j]), H) if n[j] else None)
                  for j in range(1, n.m + 1)]
    for j in range(1, n.m + 1):
        if n[j] == 0:
            continue
        scale = max(abs(c) for c in cheb[j]) if any(cheb[j]) else mpf(0)
        if a[j].degree != n[j] - 1 or abs(cheb[j][-1]) <= precision.rank_tolerance() * scale:
            raise NormalityFailure(f"deg a_(n,{j}) < n_{j} - 1 at index {n}", margin)
    a0 = Polynomial([])
    for j in range(1, n.m + 1):
        if n[j]:
            a0 = a0 - polynomial_part(a[j], system.measure(1, j).moments(n[j]))
    a[0] = a0
    return TypeIFamily(system, n, a, margin)


def type_i_form(family: TypeIFamily, k: int, z):
    """``A-form_{n,k}(z) = a_{n,k}(z) + sum_{j>k} a_{n,j}(z) s_hat_{k+1,j}(z)``."""
    m = family.system.m
    if not 0 <= k <= m:
        raise ValueError(f"k must lie in 0..{m}")
    total = family.a[k](z)
    for j in range(k + 1, m + 1):
        if family.index[j] == 0:
            continue
        total += family.a[j](z) * family.system.s_hat(k + 1, j, z)
    return total


def h_type_i(family: TypeIFamily, k: int, z):
    """``H_{n,k} = A_{n,k+1} A-form_{n,k} / A_{n,k}`` for 0 <= k <= m."""
    denom = family.a_poly(k)(z)
    if denom == 0:
        raise DomainError(f"z is a zero of A_(n,{k})")
    return family.a_poly(k + 1)(z) * type_i_form(family, k, z) / denom


# ---------------------------------------------------------------------------
# Certification and AT-system probe


@dataclass
class CertificateRow:
    index: MultiIndex
    type_ii_margin: object
    type_i_margin: object
    passed: bool
    message: str = ""


@dataclass
class PerfectnessReport:
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]


def certify_perfectness(system: NikishinSystem, budget: int,
                        threshold=None) -> PerfectnessReport:
    """Solve both types for every non-zero index with ``|n| <= budget``.

    A row passes when both solves succeed and both margins exceed
    ``threshold`` (default ``2**(-P/2)``).
    """
    threshold = precision.rank_tolerance() if threshold is None else threshold
    report = PerfectnessReport()
    for n in all_indices(system.m, budget):
        m2 = m1 = None
        msg = ""
        try:
            m2 = solve_type_ii(system, n).margin
            m1 = solve_type_i(system, n).margin
            ok = m2 > threshold and m1 > threshold
        except (NormalityFailure, QuadratureError) as exc:
            ok, msg = False, str(exc)
        report.rows.append(CertificateRow(n, m2, m1, ok, msg))
    return report


@dataclass
class ProbeReport:
    index: MultiIndex
    counts: list
    bound: int

    @property
    def passed(self) -> bool:
        return all(c <= self.bound for c in self.counts)

    @property
    def violations(self) -> list:
        return [i for i, c in enumerate(self.counts) if c > self.bound]


def at_system_probe(system: NikishinSystem, n, trials: int, probe_interval: Interval,
                    seed: int = 0) -> ProbeReport:
    """Count sign changes of random forms ``p_0 + sum_k p_k s_hat_{1,k}``.

    ``n`` lists the degree budgets ``(n_0, n_1, ..., n_m)`` with
    ``deg p_k <= n_k - 1``; a length-m index means ``n_0 = 0``.  Every count
    should stay at or below ``|n| - 1``.
    """
    comps = tuple(n.components if isinstance(n, MultiIndex) else n)
    if len(comps) == system.m:
        comps = (0,) + comps
    if len(comps) != system.m + 1:
        raise ValueError(f"probe index needs {system.m} or {system.m + 1} components")
    index = MultiIndex(comps)
    if not probe_interval.disjoint(system.interval(1)):
        raise ValueError("probe interval must avoid the first support")
    rng = np.random.default_rng(seed)
    grid = probe_interval.chebyshev_points(8 * index.total + 64)
    transforms = {k: [system.s_hat(1, k, x) for x in grid]
                  for k in range(1, system.m + 1) if comps[k]}
    counts = []
    for _ in range(trials):
        polys = [Polynomial([mpf(float(c)) for c in rng.standard_normal(d)]) for d in comps]
        vals = []
        for i, x in enumerate(grid):
            v = polys[0](x)
            for k in transforms:
                v += polys[k](x) * transforms[k][i]
            vals.append(v)
        nonzero = [v for v in vals if v != 0]
        counts.append(sum(1 for u, v in zip(nonzero, nonzero[1:]) if (u > 0) != (v > 0)))
    return ProbeReport(index, counts, index.total - 1)
