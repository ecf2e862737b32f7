"""Multi-indices and real polynomials at working precision."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import mpmath

from .measures import Interval, to_mpf

mpf = mpmath.mpf


class IndexError_(ValueError):
    """Invalid multi-index."""


@dataclass(frozen=True)
class MultiIndex:
    """A multi-index ``n = (n_1, ..., n_m)`` of non-negative integers.

    Examples
    --------
    >>> n = MultiIndex((2, 1))
    >>> n.total, n.tail(1), n.tail(2), n.tail(3)
    (3, 3, 1, 0)
    >>> n.bump(2)
    MultiIndex(components=(2, 2))
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(int(c) for c in self.components)
        if not comps:
            raise IndexError_("multi-index needs at least one component")
        if any(c < 0 for c in comps):
            raise IndexError_(f"negative component in {comps}")
        if sum(comps) < 1:
            raise IndexError_("multi-index must be non-zero")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, *components) -> "MultiIndex":
        if len(components) == 1 and not isinstance(components[0], int):
            components = tuple(components[0])
        return cls(tuple(components))

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def total(self) -> int:
        return sum(self.components)

    def __getitem__(self, j: int) -> int:
        """1-based component access."""
        return self.components[j - 1]

    def tail(self, k: int) -> int:
        """``N_{n,k} = n_k + ... + n_m`` (1-based; zero past m)."""
        if k < 1:
            raise IndexError_("tail index starts at 1")
        return sum(self.components[k - 1:])

    def bump(self, ell: int) -> "MultiIndex":
        """``n^ell``: add one to component ell (1-based)."""
        comps = list(self.components)
        comps[ell - 1] += 1
        return MultiIndex(tuple(comps))

    def is_decreasing(self) -> bool:
        """True if ``n_1 >= n_2 >= ... >= n_m``."""
        return all(u >= v for u, v in zip(self.components, self.components[1:]))

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.components) + ")"


def all_indices(m: int, max_total: int) -> Iterator[MultiIndex]:
    """Every non-zero multi-index of length m with total at most max_total."""

    def rec(prefix, remaining, slots):
        if slots == 0:
            yield prefix
            return
        for c in range(remaining + 1):
            yield from rec(prefix + (c,), remaining - c, slots - 1)

    for total in range(1, max_total + 1):
        for comps in rec((), total, m):
            if sum(comps) == total:
                yield MultiIndex(comps)


class Polynomial:
    """Real polynomial with mpf coefficients in ascending order.

    Trailing zero coefficients are stripped, so ``degree`` is exact; the zero
    polynomial has degree -1.
    """

    __slots__ = ("coefficients", "roots", "cheb")

    def __init__(self, coefficients: Sequence, roots: Sequence | None = None,
                 cheb: tuple | None = None):
        coeffs = [to_mpf(c) if not isinstance(c, mpmath.mpf) else c for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients = tuple(coeffs)
        # optional stable evaluation data: monic roots, or (chebyshev coeffs, interval)
        self.roots = tuple(roots) if roots is not None else None
        self.cheb = cheb

    @classmethod
    def one(cls) -> "Polynomial":
        return cls([1])

    @classmethod
    def from_roots(cls, roots: Sequence) -> "Polynomial":
        coeffs = [mpf(1)]
        for r in roots:
            new = [mpf(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                new[i + 1] += c
                new[i] -= r * c
            coeffs = new
        return cls(coeffs, roots=roots)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self):
        return self.coefficients[-1] if self.coefficients else mpf(0)

    def is_zero(self) -> bool:
        return not self.coefficients

    def monic(self) -> "Polynomial":
        if self.is_zero():
            raise ZeroDivisionError("zero polynomial cannot be made monic")
        lead = self.leading
        cheb = None
        if self.cheb is not None:
            cheb = (tuple(c / lead for c in self.cheb[0]), self.cheb[1])
        roots = self.roots if self.leading == 1 else None
        return Polynomial([c / lead for c in self.coefficients], roots=roots, cheb=cheb)

    def __call__(self, z):
        if self.roots is not None:
            acc = self.leading
            for r in self.roots:
                acc = acc * (z - r)
            return acc
        if self.cheb is not None:
            return clenshaw(self.cheb[0], self.cheb[1].to_reference(z))
        acc = mpf(0)
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial([i * c for i, c in enumerate(self.coefficients)][1:])

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        return Polynomial([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                           for i in range(n)])

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coefficients])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial([c * other for c in self.coefficients])
        if self.is_zero() or other.is_zero():
            return Polynomial([])
        out = [mpf(0)] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def to_strings(self, dps: int) -> list[str]:
        return [mpmath.nstr(c, dps, strip_zeros=False, min_fixed=1, max_fixed=0)
                for c in self.coefficients]

    def __repr__(self):
        terms = ", ".join(mpmath.nstr(c, 8) for c in self.coefficients)
        return f"Polynomial([{terms}])"


def clenshaw(coefficients: Sequence, t):
    """Evaluate ``sum c_i T_i(t)``."""
    b1 = b2 = 0
    for c in reversed(coefficients[1:]):
        b1, b2 = 2 * t * b1 - b2 + c, b1
    c0 = coefficients[0] if coefficients else 0
    return t * b1 - b2 + c0


def chebyshev_vandermonde(t, count: int) -> list:
    """``[T_0(t), ..., T_{count-1}(t)]`` by the three-term recurrence."""
    out = []
    prev, cur = mpf(1), t
    for i in range(count):
        if i == 0:
            out.append(mpf(1))
        elif i == 1:
            out.append(t)
        else:
            prev, cur = cur, 2 * t * cur - prev
            out.append(cur)
    return out


def chebyshev_to_monomial(coefficients: Sequence, interval: Interval) -> Polynomial:
    """Convert ``sum c_i T_i(t)``, ``t`` the affine image of x in interval,
    to ascending monomial coefficients in x."""
    # monomial coefficients of T_i in t
    basis = [[mpf(1)], [mpf(0), mpf(1)]]
    while len(basis) < len(coefficients):
        a, b = basis[-1], basis[-2]
        nxt = [mpf(0)] + [2 * c for c in a]
        for i, c in enumerate(b):
            nxt[i] -= c
        basis.append(nxt)
    in_t = [mpf(0)] * max(1, len(coefficients))
    for c, row in zip(coefficients, basis):
        for i, v in enumerate(row):
            in_t[i] += c * v
    # t = alpha * x + beta
    alpha = 2 / interval.length
    beta = -(interval.a + interval.b) / interval.length
    lin = Polynomial([beta, alpha])
    result = Polynomial([])
    power = Polynomial.one()
    for c in in_t:
        result = result + power * c
        power = power * lin
    return Polynomial(result.coefficients, cheb=(tuple(coefficients), interval))
