"""Real zeros of polynomials and linear forms, interlacing and zero-counting
measures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import mpmath
import numpy as np
from numpy.polynomial import chebyshev as npcheb

from . import precision
from .measures import Interval
from .polynomials import Polynomial

mpf = mpmath.mpf


class CountMismatch(RuntimeError):
    """Located number of sign changes differs from the expected count."""

    def __init__(self, message: str, found: "ZeroList", expected):
        super().__init__(message)
        self.found = found
        self.expected = expected


class MultipleRoot(RuntimeError):
    """A root failed the simplicity test."""


@dataclass(frozen=True)
class ZeroList:
    interval: Interval
    points: tuple
    simple: bool = True

    def __post_init__(self):
        pts = tuple(self.points)
        if any(not u < v for u, v in zip(pts, pts[1:])):
            raise ValueError("zero list must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def min_gap(self):
        if len(self.points) < 2:
            return None
        return min(v - u for u, v in zip(self.points, self.points[1:]))


def _simplicity_threshold(scale):
    return mpmath.ldexp(1, -precision.get_precision() // 2) * scale


def _sample_scale(f: Callable, interval: Interval, count: int = 64):
    return max(abs(f(x)) for x in interval.chebyshev_points(count))


def poly_real_zeros(p: Polynomial, interval: Interval, check_simple: bool = True) -> ZeroList:
    """Real roots of p inside the open interval.

    Seeds come from the colleague-matrix eigenvalues of p's Chebyshev
    expansion in double precision; each seed is polished by Newton's method at
    working precision with a bisection fallback.

    Examples
    --------
    >>> zs = poly_real_zeros(Polynomial(["-0.5", 0, 1]), Interval(-1, 1))
    >>> [float(x) for x in zs]
    [-0.7071067811865476, 0.7071067811865476]
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no isolated roots")
    deg = p.degree
    if deg == 0:
        return ZeroList(interval, ())
    pts = interval.chebyshev_points(deg + 1)
    vals = [p(x) for x in pts]
    scale = max(abs(v) for v in vals)
    # Chebyshev interpolation in the reference variable, normalised to O(1)
    ts = np.array([float(interval.to_reference(x)) for x in pts])
    ys = np.array([float(v / scale) for v in vals])
    coeffs = npcheb.chebfit(ts, ys, deg)
    seeds = npcheb.chebroots(coeffs)
    dp = p.derivative()
    eps = mpmath.ldexp(1, -precision.get_precision() + 8) * interval.length
    roots = []
    for s in seeds:
        if abs(s.imag) > 1e-4 or not (-1.001 <= s.real <= 1.001):
            continue
        x = interval.from_reference(mpf(float(s.real)))
        x = min(max(x, interval.a), interval.b)
        x = _newton_polish(p, dp, x, interval, eps, _simplicity_threshold(scale))
        if x is not None and interval.a < x < interval.b:
            roots.append(x)
    roots.sort()
    unique = []
    merge = max(4 * eps, mpmath.ldexp(1, -precision.get_precision() // 4) * interval.length)
    for r in roots:
        if not unique or r - unique[-1] > merge:
            unique.append(r)
    simple = True
    if check_simple:
        thr = _simplicity_threshold(scale)
        simple = all(abs(dp(r)) > thr for r in unique)
    return ZeroList(interval, tuple(unique), simple)


def _newton_polish(p, dp, x, interval: Interval, eps, tiny=None):
    h = interval.length * mpf("1e-6")
    for _ in range(200):
        d = dp(x)
        if d == 0:
            break
        step = p(x) / d
        x_new = x - step
        if abs(step) <= eps:
            return x_new
        if abs(step) > interval.length:
            break
        x = x_new
    # bisection fallback on a small bracket around the seed
    lo, hi = max(interval.a, x - h), min(interval.b, x + h)
    flo, fhi = p(lo), p(hi)
    if flo * fhi > 0:
        # even-multiplicity root: Newton converges only linearly
        if tiny is not None and interval.a < x < interval.b and abs(p(x)) <= tiny:
            return x
        return None
    return _illinois(p, lo, hi, flo, fhi, eps)


def _illinois(f: Callable, lo, hi, flo, fhi, eps):
    """Regula falsi with the Illinois modification, bisection-safeguarded."""
    side = 0
    for it in range(2000):
        if flo == 0:
            return lo
        if fhi == 0:
            return hi
        if hi - lo <= eps:
            break
        if it % 8 == 7:
            x = (lo + hi) / 2
        else:
            x = (lo * fhi - hi * flo) / (fhi - flo)
            if not lo < x < hi:
                x = (lo + hi) / 2
        fx = f(x)
        if fx == 0:
            return x
        if (fx > 0) == (fhi > 0):
            hi, fhi = x, fx
            if side == 1:
                flo /= 2
            side = 1
        else:
            lo, flo = x, fx
            if side == -1:
                fhi /= 2
            side = -1
    return (lo + hi) / 2


def _matches(count: int, expected) -> bool:
    if expected is None:
        return True
    if isinstance(expected, int):
        return count == expected
    return count in set(expected)


def _scan(f: Callable, interval: Interval, grid: int, eps):
    xs = interval.chebyshev_points(grid)
    vals = [f(x) for x in xs]
    roots = []
    i = 0
    while i < len(xs):
        if vals[i] == 0:
            roots.append(xs[i])
            i += 1
            continue
        if i + 1 < len(xs) and vals[i + 1] != 0 and (vals[i] > 0) != (vals[i + 1] > 0):
            roots.append(_illinois(f, xs[i], xs[i + 1], vals[i], vals[i + 1], eps))
        i += 1
    scale = max(abs(v) for v in vals)
    return sorted(roots), scale


def form_zeros(f: Callable, interval: Interval, expected=None,
               grid: int | None = None, raise_on_mismatch: bool = True,
               derivative: Callable | None = None) -> ZeroList:
    """Sign changes of a real continuous function on the interval.

    Parameters
    ----------
    f : callable
        Real-valued evaluator.
    interval : Interval
    expected : int, collection of int or None
        Admissible counts.  ``None`` accepts whatever is found.
    grid : int, optional
        Scan size; defaults to ``8 * expected + 64``.

    Raises
    ------
    CountMismatch
        If the count is still inadmissible after one retry on a 4x grid.
    """
    base = expected if isinstance(expected, int) else max(expected or [0])
    size = grid or 8 * base + 64
    eps = mpmath.ldexp(1, -precision.get_precision() + 8) * interval.length
    roots, scale = _scan(f, interval, size, eps)
    if not _matches(len(roots), expected):
        roots, scale = _scan(f, interval, 4 * size, eps)
    simple = True
    if roots:
        thr = _simplicity_threshold(scale)
        h = mpmath.ldexp(1, -precision.get_precision() // 4) * interval.length
        for r in roots:
            if derivative is not None:
                d = abs(derivative(r))
            else:
                d = abs(f(min(r + h, interval.b)) - f(max(r - h, interval.a))) / (2 * h)
            if not d > thr:
                simple = False
    cleaned = []
    for r in roots:
        if not cleaned or r > cleaned[-1]:
            cleaned.append(r)
    zl = ZeroList(interval, tuple(cleaned), simple)
    if not _matches(len(zl), expected) and raise_on_mismatch:
        raise CountMismatch(
            f"found {len(zl)} sign changes on {interval}, expected {expected}", zl, expected)
    return zl


@dataclass(frozen=True)
class InterlaceResult:
    ok: bool
    witness: tuple | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def interlace_check(z1: Iterable, z2: Iterable) -> InterlaceResult:
    """Strict interlacing of two sorted point sets.

    Between two consecutive points of either list there must be exactly one
    point of the other.  A shared point is a violation.

    Examples
    --------
    >>> interlace_check([1, 3], [2, 4]).ok
    True
    >>> interlace_check([1, 2], [3, 4]).witness
    (1, 2)
    """
    p1 = list(z1.points if isinstance(z1, ZeroList) else z1)
    p2 = list(z2.points if isinstance(z2, ZeroList) else z2)
    if abs(len(p1) - len(p2)) > 1:
        return InterlaceResult(False, None, "lengths differ by more than one")
    common = set(p1) & set(p2)
    if common:
        x = min(common)
        return InterlaceResult(False, (x, x), "shared zero")
    merged = sorted([(x, 0) for x in p1] + [(x, 1) for x in p2])
    for (x, a), (y, b) in zip(merged, merged[1:]):
        if a == b:
            return InterlaceResult(False, (x, y), "consecutive points from one list")
    return InterlaceResult(True)


@dataclass(frozen=True)
class CountingMeasure:
    """Uniform probability measure on a finite point set."""

    points: tuple
    weight: Fraction

    @property
    def mass(self) -> Fraction:
        return self.weight * len(self.points)

    def breakpoints(self) -> np.ndarray:
        return np.array([float(x) for x in self.points])

    def cdf(self, x: np.ndarray, left: bool = False) -> np.ndarray:
        pts = self.breakpoints()
        side = "left" if left else "right"
        return np.searchsorted(pts, x, side=side) * float(self.weight)


def counting_measure(z) -> CountingMeasure:
    pts = tuple(z.points if isinstance(z, ZeroList) else z)
    if not pts:
        raise ValueError("counting measure of an empty zero list")
    return CountingMeasure(tuple(sorted(pts)), Fraction(1, len(pts)))


def kolmogorov_distance(mu1, mu2) -> float:
    """Sup-distance between the distribution functions of two measures.

    Both arguments need ``breakpoints()`` and ``cdf(x, left)``; the CDFs are
    piecewise linear or piecewise constant between breakpoints, so checking
    both one-sided limits at the merged breakpoints is exact.
    """
    xs = np.union1d(mu1.breakpoints(), mu2.breakpoints())
    d_right = np.abs(mu1.cdf(xs) - mu2.cdf(xs))
    d_left = np.abs(mu1.cdf(xs, left=True) - mu2.cdf(xs, left=True))
    return float(max(d_right.max(), d_left.max()))
