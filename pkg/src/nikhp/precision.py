"""Global working precision and the tolerances derived from it."""

from __future__ import annotations

import contextlib
import math

import mpmath

DEFAULT_PRECISION = 256

mpmath.mp.prec = DEFAULT_PRECISION


def set_precision(bits: int) -> None:
    if bits < 64:
        raise ValueError(f"precision must be at least 64 bits, got {bits}")
    mpmath.mp.prec = int(bits)


def get_precision() -> int:
    return mpmath.mp.prec


@contextlib.contextmanager
def working_precision(bits: int):
    """Temporarily switch the global mpmath precision (single-threaded use only)."""
    old = mpmath.mp.prec
    set_precision(bits)
    try:
        yield
    finally:
        mpmath.mp.prec = old


def decimal_digits(bits: int | None = None) -> float:
    bits = get_precision() if bits is None else bits
    return bits * math.log10(2)


def rank_tolerance():
    """Smallest admissible singular value, 2**(-P/2)."""
    return mpmath.ldexp(1, -get_precision() // 2)


def residual_tolerance():
    """Orthogonality residual bound 10**(-P/3 bits in decimal)."""
    return mpmath.mpf(10) ** (-int(decimal_digits() / 3))


def identity_tolerance():
    """Bound for exact algebraic identities, 10**(-P/4 bits in decimal)."""
    return mpmath.mpf(10) ** (-int(decimal_digits() / 4))


def quadrature_tolerance():
    """Moment reproduction bound 10**(-0.8 P / log2(10))."""
    return mpmath.mpf(10) ** (-0.8 * decimal_digits())


def near_tolerance():
    """Relative accuracy target for adaptive near-interval Cauchy transforms."""
    return mpmath.mpf(10) ** (-(get_precision() / 4) * 0.3)
