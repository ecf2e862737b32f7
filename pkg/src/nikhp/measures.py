"""Measures on real intervals, Gauss quadrature, Cauchy transforms and
Nikishin / Angelesco systems built from them.

All arithmetic runs at the global mpmath precision (see :mod:`nikhp.precision`).
A measure carries its own quadrature rule; Cauchy transforms are evaluated from
that rule unless the evaluation point is close to the support, in which case an
adaptive tanh-sinh integration over a graded mesh is used instead.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import precision

mpf = mpmath.mpf

NEAR_FRACTION = mpf("0.05")


class MeasureError(ValueError):
    """Invalid measure definition or violated support condition."""


class QuadratureError(RuntimeError):
    """Quadrature rule could not be built at the working precision."""


class DomainError(ValueError):
    """Evaluation point lies on the support where the function is not defined."""


def to_mpf(value) -> mpmath.mpf:
    """Parse numbers and decimal strings without passing through floats."""
    if isinstance(value, mpmath.mpf):
        return value
    if isinstance(value, str):
        return mpf(value.strip())
    if isinstance(value, (int, np.integer)):
        return mpf(int(value))
    return mpf(value)


@dataclass(frozen=True)
class Interval:
    a: mpmath.mpf
    b: mpmath.mpf

    def __post_init__(self):
        a, b = to_mpf(self.a), to_mpf(self.b)
        if not (mpmath.isfinite(a) and mpmath.isfinite(b)):
            raise MeasureError("interval endpoints must be finite")
        if not a < b:
            raise MeasureError(f"interval needs a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self):
        return self.b - self.a

    @property
    def center(self):
        return (self.a + self.b) / 2

    @property
    def radius(self):
        return (self.b - self.a) / 2

    def contains(self, x) -> bool:
        return self.a <= x <= self.b

    def disjoint(self, other: "Interval") -> bool:
        return self.b < other.a or other.b < self.a

    def distance(self, z) -> mpmath.mpf:
        """Euclidean distance from a complex point to the segment."""
        z = mpmath.mpc(z)
        x = z.real
        if x < self.a:
            return abs(z - self.a)
        if x > self.b:
            return abs(z - self.b)
        return abs(z.imag)

    def to_reference(self, x):
        return (2 * x - self.a - self.b) / (self.b - self.a)

    def from_reference(self, t):
        return self.center + self.radius * t

    def chebyshev_points(self, count: int) -> list:
        """Interior Chebyshev points of the first kind, increasing."""
        pts = []
        for i in range(count):
            t = -mpmath.cos(mpmath.pi * (2 * i + 1) / (2 * count))
            pts.append(self.from_reference(t))
        return pts

    def __str__(self):
        return f"[{mpmath.nstr(self.a, 8)}, {mpmath.nstr(self.b, 8)}]"


# ---------------------------------------------------------------------------
# Gauss rules from three-term recurrences


def jacobi_recurrence(alpha, beta, n: int):
    """Monic recurrence coefficients and mass of the Jacobi weight on [-1, 1].

    Returns ``(a, b, mu0)`` with ``p_{k+1} = (x - a_k) p_k - b_k p_{k-1}``.
    """
    alpha, beta = to_mpf(alpha), to_mpf(beta)
    if alpha <= -1 or beta <= -1:
        raise MeasureError("Jacobi exponents must exceed -1")
    ab = alpha + beta
    mu0 = (mpf(2) ** (ab + 1) * mpmath.gamma(alpha + 1) * mpmath.gamma(beta + 1)
           / mpmath.gamma(ab + 2))
    a, b = [], []
    for k in range(n):
        if k == 0:
            a.append((beta - alpha) / (ab + 2))
            b.append(mu0)
            continue
        s = 2 * k + ab
        a.append((beta**2 - alpha**2) / (s * (s + 2)))
        if k == 1:
            b.append(4 * (1 + alpha) * (1 + beta) / ((2 + ab) ** 2 * (3 + ab)))
        else:
            b.append(4 * k * (k + alpha) * (k + beta) * (k + ab)
                     / (s**2 * (s + 1) * (s - 1)))
    return a, b, mu0


def stieltjes_recurrence(nodes: Sequence, weights: Sequence, n: int):
    """Discretised Stieltjes procedure for a positive discrete measure."""
    if n > len(nodes):
        raise QuadratureError("discrete measure has too few points for the rule")
    mu0 = mpmath.fsum(weights)
    p_prev = [mpf(0)] * len(nodes)
    p_cur = [mpf(1)] * len(nodes)
    norm_prev = None
    norm_cur = mu0
    a, b = [], [mu0]
    for k in range(n):
        ak = mpmath.fsum(w * x * p * p for x, w, p in zip(nodes, weights, p_cur)) / norm_cur
        a.append(ak)
        if k > 0:
            b.append(norm_cur / norm_prev)
        bk = b[k] if k > 0 else mpf(0)
        p_next = [(x - ak) * p - bk * q for x, p, q in zip(nodes, p_cur, p_prev)]
        p_prev, p_cur = p_cur, p_next
        norm_prev = norm_cur
        norm_cur = mpmath.fsum(w * p * p for w, p in zip(weights, p_cur))
    return a, b[:n], mu0


def gauss_from_recurrence(a: Sequence, b: Sequence, mu0, n: int):
    """Nodes and weights of the n-point Gauss rule from monic recurrence data.

    Nodes are seeded from the double-precision Jacobi matrix eigenvalues and
    polished by Newton iteration on the recurrence at working precision.
    """
    if n < 1:
        raise QuadratureError("rule size must be at least 1")
    d = np.array([float(v) for v in a[:n]])
    e = np.array([math.sqrt(float(v)) for v in b[1:n]])
    if n == 1:
        guesses = [a[0]]
    else:
        guesses = [mpf(float(v)) for v in eigh_tridiagonal(d, e, eigvals_only=True)]
    eps = mpmath.ldexp(1, -precision.get_precision() + 6)

    def evaluate(x):
        p_prev, p = mpf(0), mpf(1)
        dp_prev, dp = mpf(0), mpf(0)
        for k in range(n):
            bk = b[k] if k > 0 else mpf(0)
            p_next = (x - a[k]) * p - bk * p_prev
            dp_next = p + (x - a[k]) * dp - bk * dp_prev
            p_prev, p = p, p_next
            dp_prev, dp = dp, dp_next
        return p, dp

    nodes = []
    for x in guesses:
        for _ in range(100):
            p, dp = evaluate(x)
            if dp == 0:
                raise QuadratureError("vanishing derivative during node polish")
            step = p / dp
            x -= step
            if abs(step) <= eps * (1 + abs(x)):
                break
        else:
            raise QuadratureError("Newton polish of Gauss nodes did not converge")
        nodes.append(x)
    nodes.sort()
    for u, v in zip(nodes, nodes[1:]):
        if not v - u > eps:
            raise QuadratureError(
                f"{n}-point rule collapsed at {precision.get_precision()} bits")
    weights = []
    for x in nodes:
        # orthonormal recurrence: sum of squares gives the Christoffel function
        q_prev, q = mpf(0), 1 / mpmath.sqrt(mu0)
        total = q * q
        for k in range(n - 1):
            bk = mpmath.sqrt(b[k]) if k > 0 else mpf(0)
            q_next = ((x - a[k]) * q - bk * q_prev) / mpmath.sqrt(b[k + 1])
            q_prev, q = q, q_next
            total += q * q
        weights.append(1 / total)
    return nodes, weights


@functools.lru_cache(maxsize=256)
def _gauss_jacobi_reference(alpha: str, beta: str, n: int, prec: int):
    a, b, mu0 = jacobi_recurrence(mpf(alpha), mpf(beta), n)
    return tuple(gauss_from_recurrence(a, b, mu0, n))


def gauss_jacobi(alpha, beta, n: int):
    """Gauss-Jacobi rule for (1-t)^alpha (1+t)^beta on [-1, 1]."""
    nodes, weights = _gauss_jacobi_reference(
        mpmath.nstr(to_mpf(alpha), 40), mpmath.nstr(to_mpf(beta), 40), n,
        precision.get_precision())
    return list(nodes), list(weights)


# ---------------------------------------------------------------------------
# Measures


@dataclass(frozen=True, eq=False)
class Measure:
    """Constant-sign measure ``sign * density(x) dx`` on an interval.

    ``weights`` are positive magnitudes; the sign is applied by
    :func:`integrate` and :func:`cauchy_transform`.  ``factor`` holds, for
    product measures, the signed values at the nodes of the Cauchy transform
    used as a weight (see :func:`product_measure`).
    """

    interval: Interval
    density: Callable
    density_class: str
    nodes: tuple
    weights: tuple
    sign: int = 1
    params: dict = field(default_factory=dict)
    factor: tuple | None = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise MeasureError("sign must be +1 or -1")
        if not self.nodes or len(self.nodes) != len(self.weights):
            raise MeasureError("quadrature rule is empty or inconsistent")
        if any(not w > 0 for w in self.weights):
            raise MeasureError("quadrature weights must be positive (density > 0)")
        if any(not (self.interval.a < x < self.interval.b) for x in self.nodes):
            raise MeasureError("quadrature nodes must lie inside the interval")

    @property
    def size(self) -> int:
        return len(self.nodes)

    @functools.cached_property
    def mass(self):
        return self.sign * mpmath.fsum(self.weights)

    @functools.cached_property
    def signed_weights(self) -> tuple:
        if self.sign == 1:
            return self.weights
        return tuple(-w for w in self.weights)

    def signed_density(self, x):
        return self.sign * self.density(x)

    def moments(self, count: int) -> list:
        """Signed moments int x^i dsigma for i < count."""
        out = []
        powers = list(self.signed_weights)
        for _ in range(count):
            out.append(mpmath.fsum(powers))
            powers = [p * x for p, x in zip(powers, self.nodes)]
        return out

    def __repr__(self):
        s = "-" if self.sign < 0 else ""
        return f"Measure({s}{self.density_class} on {self.interval}, Nq={self.size})"


def _jacobi_density(interval: Interval, alpha, beta, scale):
    def density(x):
        t = interval.to_reference(x)
        return scale * (1 - t) ** alpha * (1 + t) ** beta
    return density


def _hermite_log_interpolant(xs, ys):
    """Piecewise cubic Hermite interpolant with three-point slopes."""
    n = len(xs)
    slopes = []
    for i in range(n):
        if i == 0:
            slopes.append((ys[1] - ys[0]) / (xs[1] - xs[0]))
        elif i == n - 1:
            slopes.append((ys[-1] - ys[-2]) / (xs[-1] - xs[-2]))
        else:
            h0, h1 = xs[i] - xs[i - 1], xs[i + 1] - xs[i]
            d0, d1 = (ys[i] - ys[i - 1]) / h0, (ys[i + 1] - ys[i]) / h1
            slopes.append((h1 * d0 + h0 * d1) / (h0 + h1))

    def value(x):
        lo, hi = 0, n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if xs[mid] <= x:
                lo = mid
            else:
                hi = mid
        h = xs[hi] - xs[lo]
        s = (x - xs[lo]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * ys[lo] + h10 * h * slopes[lo] + h01 * ys[hi]
                + h11 * h * slopes[hi])

    return value


def build_quadrature(density_class: str, interval: Interval, nq: int, **params):
    """Build ``(nodes, weights, density)`` for a density class on an interval.

    Classes: ``jacobi`` (params ``alpha``, ``beta``), ``legendre``,
    ``chebyshev`` (jacobi -1/2, -1/2), ``polynomial-modulated`` (jacobi
    exponents plus ``coefficients`` of a positive polynomial in x, ascending)
    and ``tabulated`` (``table``: sequence of (x, w) pairs spanning the
    interval).  Every class accepts a positive ``scale`` factor.
    """
    if nq < 1:
        raise QuadratureError("Nq must be at least 1")
    scale = to_mpf(params.get("scale", 1))
    if not scale > 0:
        raise MeasureError("scale must be positive")
    half = interval.radius

    if density_class in ("jacobi", "legendre", "chebyshev"):
        if density_class == "legendre":
            alpha = beta = mpf(0)
        elif density_class == "chebyshev":
            alpha = beta = mpf(-0.5)
        else:
            alpha, beta = to_mpf(params["alpha"]), to_mpf(params["beta"])
        t, w = gauss_jacobi(alpha, beta, nq)
        nodes = [interval.from_reference(x) for x in t]
        weights = [v * half * scale for v in w]
        return nodes, weights, _jacobi_density(interval, alpha, beta, scale)

    if density_class == "polynomial-modulated":
        alpha, beta = to_mpf(params.get("alpha", 0)), to_mpf(params.get("beta", 0))
        coeffs = [to_mpf(c) for c in params["coefficients"]]
        extra = (len(coeffs) - 1 + 1) // 2
        t, w = gauss_jacobi(alpha, beta, nq + extra)
        nodes = [interval.from_reference(x) for x in t]
        base = _jacobi_density(interval, alpha, beta, scale)

        def modulation(x):
            return mpmath.polyval(coeffs[::-1], x)

        weights = []
        for x, v in zip(nodes, w):
            q = modulation(x)
            if not q > 0:
                raise MeasureError("modulating polynomial is not positive on the interval")
            weights.append(v * half * scale * q)
        return nodes, weights, lambda x: base(x) * modulation(x)

    if density_class == "tabulated":
        table = [(to_mpf(x), to_mpf(w)) for x, w in params["table"]]
        if len(table) < 2:
            raise MeasureError("tabulated density needs at least two rows")
        xs = [x for x, _ in table]
        if any(not u < v for u, v in zip(xs, xs[1:])):
            raise MeasureError("table abscissae must be strictly increasing")
        if xs[0] != interval.a or xs[-1] != interval.b:
            raise MeasureError("table must span the interval exactly")
        positive = [w for _, w in table if w > 0]
        if not positive:
            raise MeasureError("tabulated density has no positive values")
        floor = min(positive) * mpf("1e-6")
        ys = [mpmath.log(max(w, floor)) for _, w in table]
        log_density = _hermite_log_interpolant(xs, ys)

        def density(x):
            return scale * mpmath.exp(log_density(x))

        per_cell = max(16, -(-2 * nq // (len(xs) - 1)) + 8)
        gt, gw = gauss_jacobi(0, 0, per_cell)
        fine_t, fine_w = [], []
        for lo, hi in zip(xs, xs[1:]):
            c, r = (lo + hi) / 2, (hi - lo) / 2
            for u, v in zip(gt, gw):
                x = c + r * u
                fine_t.append(interval.to_reference(x))
                fine_w.append(v * r * density(x) / half)
        a, b, mu0 = stieltjes_recurrence(fine_t, fine_w, nq)
        t, w = gauss_from_recurrence(a, b, mu0, nq)
        nodes = [interval.from_reference(x) for x in t]
        weights = [v * half for v in w]
        return nodes, weights, density

    raise MeasureError(f"unknown density class {density_class!r}")


def make_measure(interval: Interval, density_class: str, nq: int, **params) -> Measure:
    nodes, weights, density = build_quadrature(density_class, interval, nq, **params)
    stored = {k: v for k, v in params.items()}
    return Measure(interval, density, density_class, tuple(nodes), tuple(weights),
                   1, stored)


def jacobi(a, b, alpha, beta, nq: int = 64, scale=1) -> Measure:
    return make_measure(Interval(a, b), "jacobi", nq, alpha=alpha, beta=beta, scale=scale)


def legendre(a, b, nq: int = 64, scale=1) -> Measure:
    return make_measure(Interval(a, b), "legendre", nq, scale=scale)


def chebyshev(a, b, nq: int = 64, scale=1) -> Measure:
    """(1-t^2)^(-1/2) dx on [a, b]; total mass pi * (b - a) / 2 * scale."""
    return make_measure(Interval(a, b), "chebyshev", nq, scale=scale)


def integrate(measure: Measure, f: Callable):
    """Quadrature approximation of the signed integral of f."""
    total = []
    for x, w in zip(measure.nodes, measure.signed_weights):
        try:
            v = f(x)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"integrand failed at node {mpmath.nstr(x, 10)}") from exc
        if not mpmath.isfinite(v):
            raise DomainError(f"integrand not finite at node {mpmath.nstr(x, 10)}")
        total.append(w * v)
    return mpmath.fsum(total)


def _graded_points(interval: Interval, z):
    """Break points refining geometrically toward the projection of z."""
    z = mpmath.mpc(z)
    a, b = interval.a, interval.b
    x0 = min(max(z.real, a), b)
    d = interval.distance(z)
    pts = {a, b}
    if a < x0 < b:
        pts.add(x0)
    step = max(d, mpmath.ldexp(1, -precision.get_precision() // 2) * interval.length)
    while step < interval.length:
        for p in (x0 - step, x0 + step):
            if a < p < b:
                pts.add(p)
        step *= 4
    return sorted(pts)


def _adaptive_cauchy(measure: Measure, z, factor: Callable | None):
    tol = precision.near_tolerance()

    def integrand(x):
        v = measure.signed_density(x) / (z - x)
        return v if factor is None else v * factor(x)

    pts = _graded_points(measure.interval, z)
    total, err = mpmath.quad(integrand, pts, error=True, maxdegree=8)
    if err > tol * max(abs(total), mpmath.eps):
        total, err = mpmath.quad(integrand, pts, error=True, maxdegree=12)
    return total


def is_near(interval: Interval, z) -> bool:
    return interval.distance(z) < NEAR_FRACTION * interval.length


def cauchy_transform(measure: Measure, z, factor: Callable | None = None,
                     factor_at_nodes: Sequence | None = None):
    """Evaluate ``int factor(x) dsigma(x) / (z - x)``.

    ``factor_at_nodes`` short-circuits evaluation of ``factor`` at the
    quadrature nodes.  Points within ``0.05 * length`` of the interval switch
    to adaptive integration, which needs the callable ``factor``.
    """
    interval = measure.interval
    zc = mpmath.mpmathify(z)
    if interval.distance(zc) == 0:
        raise DomainError(f"z = {zc} lies on the support {interval}")
    real_input = not isinstance(zc, mpmath.mpc) or zc.imag == 0
    if is_near(interval, zc):
        if factor is None and factor_at_nodes is not None:
            raise DomainError("near-interval evaluation needs a callable factor")
        value = _adaptive_cauchy(measure, zc, factor)
    else:
        if factor_at_nodes is None and factor is not None:
            factor_at_nodes = [factor(x) for x in measure.nodes]
        if factor_at_nodes is None:
            terms = [w / (zc - x) for x, w in zip(measure.nodes, measure.signed_weights)]
        else:
            terms = [w * f / (zc - x) for x, w, f in
                     zip(measure.nodes, measure.signed_weights, factor_at_nodes)]
        value = mpmath.fsum(terms)
    if real_input and isinstance(value, mpmath.mpc):
        return value.real
    return value


def _support_sign(alpha: Interval, beta: Interval) -> int:
    # hat sigma_beta(x) = int dsigma_beta(t) / (x - t) is negative left of beta
    return -1 if alpha.b < beta.a else 1


def product_measure(sigma_a: Measure, sigma_b: Measure) -> Measure:
    """The measure ``hat(sigma_b)(x) dsigma_a(x)`` on the interval of sigma_a."""
    if not sigma_a.interval.disjoint(sigma_b.interval):
        raise MeasureError(
            f"supports {sigma_a.interval} and {sigma_b.interval} intersect")
    values = [cauchy_transform(sigma_b, x) for x in sigma_a.nodes]
    sign = sigma_a.sign * sigma_b.sign * _support_sign(sigma_a.interval, sigma_b.interval)
    if any((v > 0) != (sign * sigma_a.sign > 0) for v in values):
        raise MeasureError("Cauchy transform changed sign on the first support")
    weights = tuple(w * abs(v) for w, v in zip(sigma_a.weights, values))

    def density(x):
        return sigma_a.density(x) * abs(cauchy_transform(sigma_b, x))

    return Measure(sigma_a.interval, density, "product", sigma_a.nodes, weights, sign,
                   {"outer": sigma_a, "inner": sigma_b}, tuple(values))


# ---------------------------------------------------------------------------
# Systems of measures


class NikishinSystem:
    """Nikishin system generated by ``sigma_1..sigma_m`` (1-based indices).

    ``measure(j, k)`` is ``s_{j,k}``: for ``j <= k`` the forward chain
    ``<sigma_j, ..., sigma_k>`` and for ``j > k`` the reversed chain
    ``<sigma_j, sigma_{j-1}, ..., sigma_k>``.
    """

    def __init__(self, generators: Sequence[Measure], spec: dict | None = None):
        self.generators = tuple(generators)
        self.spec = spec
        m = self.m
        self._measures: dict[tuple[int, int], Measure] = {}
        for j in range(1, m + 1):
            self._measures[(j, j)] = self.generators[j - 1]
        for width in range(1, m):
            for j in range(1, m - width + 1):
                k = j + width
                self._measures[(j, k)] = product_measure(
                    self.sigma(j), self._measures[(j + 1, k)])
                self._measures[(k, j)] = product_measure(
                    self.sigma(k), self._measures[(k - 1, j)])

    @property
    def m(self) -> int:
        return len(self.generators)

    @property
    def nq(self) -> int:
        return min(g.size for g in self.generators)

    def sigma(self, j: int) -> Measure:
        return self.generators[j - 1]

    def interval(self, j: int) -> Interval:
        return self.generators[j - 1].interval

    def measure(self, j: int, k: int) -> Measure:
        return self._measures[(j, k)]

    def s_hat(self, j: int, k: int, z):
        """Cauchy transform of ``s_{j,k}``; ``s_hat(1, 0)`` is the constant 1."""
        if k == 0:
            return mpf(1)
        return cauchy_transform(self._measures[(j, k)], z)

    def factor(self, j: int, k: int) -> tuple:
        """Values of ``s_hat(j+1, k)`` at the nodes of sigma_j (ones if k == j)."""
        if k == j:
            return tuple(mpf(1) for _ in self.sigma(j).nodes)
        return self._measures[(j, k)].factor

    def __repr__(self):
        return "NikishinSystem(" + ", ".join(repr(g) for g in self.generators) + ")"


class AngelescoSystem:
    """Measures on pairwise disjoint intervals."""

    def __init__(self, measures: Sequence[Measure], spec: dict | None = None):
        self.measures = tuple(measures)
        self.spec = spec
        if not self.measures:
            raise MeasureError("an Angelesco system needs at least one measure")
        for i, u in enumerate(self.measures):
            for v in self.measures[i + 1:]:
                if not u.interval.disjoint(v.interval):
                    raise MeasureError(
                        f"Angelesco intervals {u.interval} and {v.interval} intersect")

    @property
    def m(self) -> int:
        return len(self.measures)

    @property
    def nq(self) -> int:
        return min(g.size for g in self.measures)

    def interval(self, j: int) -> Interval:
        return self.measures[j - 1].interval


def nikishin_system(generators: Sequence[Measure], spec: dict | None = None) -> NikishinSystem:
    if len(generators) == 0:
        raise MeasureError("a Nikishin system needs at least one generator")
    for j, (u, v) in enumerate(zip(generators, generators[1:]), start=1):
        if not u.interval.disjoint(v.interval):
            raise MeasureError(
                f"Delta_{j} = {u.interval} and Delta_{j + 1} = {v.interval} intersect")
    return NikishinSystem(generators, spec)


def angelesco_system(measures: Sequence[Measure], spec: dict | None = None) -> AngelescoSystem:
    return AngelescoSystem(measures, spec)


def default_nq(max_degree: int) -> int:
    return 4 * max_degree + 16
