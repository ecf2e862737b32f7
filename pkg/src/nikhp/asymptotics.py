"""Empirical harnesses for weak asymptotics, convergence rates, connection
identities and ratio asymptotics of type II Hermite-Padé polynomials."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import precision
from .hermite_pade import TypeIIFamily, solve_type_i, solve_type_ii
from .measures import Interval, NikishinSystem
from .polynomials import MultiIndex
from .potential import EquilibriumSolution, xi_function, u_function
from .zeros import counting_measure, kolmogorov_distance

mpf = mpmath.mpf


# ---------------------------------------------------------------------------
# Schedules


@dataclass(frozen=True)
class DegreeSchedule:
    """Sequence of decreasing multi-indices with limit proportions p."""

    indices: tuple
    proportions: tuple
    diameter: int

    def __post_init__(self):
        idx = tuple(i if isinstance(i, MultiIndex) else MultiIndex(tuple(i))
                    for i in self.indices)
        if not idx:
            raise ValueError("schedule must be non-empty")
        for n in idx:
            if not n.is_decreasing():
                raise ValueError(f"schedule index {n} is not decreasing")
            if n[1] - n[n.m] > self.diameter:
                raise ValueError(f"schedule index {n} exceeds diameter {self.diameter}")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @property
    def max_total(self) -> int:
        return max(n.total for n in self.indices)


def diagonal_schedule(m: int, ks: Sequence[int]) -> DegreeSchedule:
    """Indices ``(k, ..., k)`` for k in ks."""
    return DegreeSchedule(tuple(MultiIndex((k,) * m) for k in ks), (1 / m,) * m, 0)


def staircase_schedule(m: int, first_total: int, last_total: int) -> DegreeSchedule:
    """Indices with totals first..last, filled one component at a time (d = 1)."""
    out = []
    for t in range(first_total, last_total + 1):
        q, r = divmod(t, m)
        out.append(MultiIndex(tuple(q + 1 if j < r else q for j in range(m))))
    return DegreeSchedule(tuple(out), (1 / m,) * m, 1 if m > 1 else 0)


def _point(z):
    return mpmath.mpmathify(z)


def _cplx(z) -> complex:
    z = mpmath.mpmathify(z)
    return complex(z)


def _rel_log_error(measured: float, predicted: float) -> float:
    if predicted == 0:
        return abs(measured)
    return abs(measured / predicted - 1)


@dataclass
class Row:
    total: int
    index: str
    quantity: str
    point: str
    measured: float
    predicted: float
    rel_error: float
    passed: bool | None

    def as_tuple(self):
        return (self.total, self.index, self.quantity, self.point, self.measured,
                self.predicted, self.rel_error, self.passed)


CSV_HEADER = ("total", "index", "quantity", "point", "measured", "predicted",
              "rel_error", "pass")


def _fmt_point(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}j"


@dataclass
class Report:
    rows: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values()) if self.flags else True


def _default_solver(kind: str):
    return solve_type_ii if kind == "II" else solve_type_i


# ---------------------------------------------------------------------------
# Weak asymptotics


def weak_report(system: NikishinSystem, schedule: DegreeSchedule,
                equilibrium: EquilibriumSolution, test_points: dict | Sequence,
                solver: Callable | None = None, psi_tolerance: float | None = None,
                k_constants: bool = True) -> Report:
    """Zero distributions, nth-root second-kind functions and K constants
    along a schedule, compared with the vector equilibrium data.

    ``test_points`` maps j to points off ``Delta_j`` and ``Delta_{j+1}``; a plain
    sequence is used for every j.
    """
    if equilibrium is None:
        raise ValueError("an equilibrium solution is required")
    solver = solver or solve_type_ii
    m = system.m
    pts = test_points if isinstance(test_points, dict) else {j: list(test_points)
                                                            for j in range(1, m + 1)}
    rep = Report()
    ks_first, ks_last = {}, {}
    psi_last = []
    for t, n in enumerate(schedule):
        fam = solver(system, n)
        N = n.total
        for j in range(1, m + 1):
            poly = fam.q_poly(j)
            if poly.degree < 1:
                continue
            zl = fam.q_zeros() if j == 1 else fam.psi_zeros(j - 1)
            d = kolmogorov_distance(counting_measure(zl), equilibrium.lambdas[j - 1])
            rep.rows.append(Row(N, str(n), f"kolmogorov_{j}", "", d, 0.0, d, None))
            ks_first.setdefault(j, d)
            ks_last[j] = d
            for z in pts.get(j, []):
                val = abs(fam.psi(j, _point(z)))
                measured = float(mpmath.log(val)) / N
                predicted = u_function(equilibrium, j, _cplx(z))
                err = _rel_log_error(measured, predicted)
                rep.rows.append(Row(N, str(n), f"psi_{j}", _fmt_point(z), measured,
                                    predicted, err, None))
                if t == len(schedule) - 1:
                    psi_last.append(err)
            if k_constants:
                K = fam.K(j)
                measured = -float(mpmath.log(K)) / N
                P = equilibrium.P
                predicted = -sum(equilibrium.omegas[k] / P[k] for k in range(j))
                rep.rows.append(Row(N, str(n), f"K_{j}", "", measured, predicted,
                                    _rel_log_error(measured, predicted), None))
    for j in ks_first:
        rep.flags[f"kolmogorov_trend_{j}"] = ks_last[j] < ks_first[j]
    if psi_tolerance is not None and psi_last:
        rep.flags["psi_last"] = max(psi_last) < psi_tolerance
    rep.flags.setdefault("nonempty", bool(rep.rows))
    return rep


# ---------------------------------------------------------------------------
# Connection identities


@dataclass
class ConnectionResidual:
    miracle: mpmath.mpf
    con1: mpmath.mpf
    con2: mpmath.mpf
    inversion: mpmath.mpf

    def max(self):
        return max(self.miracle, self.con1, self.con2, self.inversion)


def miracle_residual(system: NikishinSystem, j: int, z):
    """``|sum_{i=0}^{j} (-1)^i s_hat_{1,j-i} s_hat_{j,j-i+1}|``, scaled by the largest term.

    Empty chains are 1: ``s_hat_{1,0} = s_hat_{j,j+1} = 1``.
    """
    terms = []
    for i in range(j + 1):
        left = mpf(1) if i == j else system.s_hat(1, j - i, z)
        right = mpf(1) if i == 0 else system.s_hat(j, j - i + 1, z)
        terms.append((-1) ** i * left * right)
    return abs(mpmath.fsum(terms)) / max(abs(t) for t in terms)


def connection_matrices(system: NikishinSystem, z):
    """Lower-triangular D with Psi = D Phi and its inverse from the reversed
    formula, as mpmath matrices (rows and columns 1..m)."""
    m = system.m
    D = mpmath.matrix(m, m)
    Dinv = mpmath.matrix(m, m)
    for j in range(1, m + 1):
        for k in range(2, j + 1):
            D[j - 1, k - 2] = (-1) ** k * system.s_hat(j, k, z)
            Dinv[j - 1, k - 2] = (-1) ** k * system.s_hat(k, j, z)
        D[j - 1, j - 1] += (-1) ** (j + 1)
        Dinv[j - 1, j - 1] += (-1) ** (j + 1)
    return D, Dinv


def connection_check(family: TypeIIFamily, system: NikishinSystem, j: int, z) -> ConnectionResidual:
    """Relative residuals of the miracle identity, both connection formulas
    and of ``D D^{-1} Psi = Psi`` at one point."""
    m = system.m
    if not 2 <= j <= m:
        raise ValueError(f"j must lie in 2..{m}")
    z = _point(z)
    for k in range(1, m + 1):
        if system.interval(k).distance(z) == 0:
            raise ValueError(f"z lies on Delta_{k}")
    Psi = [family.psi(k, z) for k in range(1, m + 1)]
    Phi = [family.phi(k, z) for k in range(1, m + 1)]
    D, Dinv = connection_matrices(system, z)

    def rel(lhs, parts):
        scale = max([abs(lhs)] + [abs(p) for p in parts]) or 1
        return abs(lhs - mpmath.fsum(parts)) / scale

    c1 = [D[j - 1, k] * Phi[k] for k in range(j)]
    c2 = [Dinv[j - 1, k] * Psi[k] for k in range(j)]
    psi_vec = mpmath.matrix(Psi)
    back = D * (Dinv * psi_vec)
    inv = max(abs(back[i] - Psi[i]) / max(abs(Psi[i]), mpmath.eps) for i in range(m))
    return ConnectionResidual(miracle_residual(system, j, z), rel(Psi[j - 1], c1),
                              rel(Phi[j - 1], c2), inv)


# ---------------------------------------------------------------------------
# Convergence rate


def rate_report(system: NikishinSystem, schedule: DegreeSchedule, j: int,
                test_points: Sequence, equilibrium: EquilibriumSolution | None,
                solver: Callable | None = None, tolerance: float = 0.1,
                sign_from: int = 3, predictor: Callable | None = None) -> Report:
    """``r = log|s_hat_{1,j} - P_{n,j}/Q_n| / |n|`` against ``V^{lambda_1} + xi_j``.

    The remainder is evaluated as ``Phi_{n,j} / Q_n`` (no subtraction).  A
    ``predictor(z)`` may replace the equilibrium prediction (closed forms).
    """
    solver = solver or solve_type_ii
    rep = Report()
    if predictor is None:
        if equilibrium is None:
            raise ValueError("need an equilibrium solution or a predictor")

        def predictor(z):
            return (equilibrium.potential(1, z) + xi_function(equilibrium, j, z)[0])

    neg_ok = True
    last_ok = True
    upper_ok = True
    floor = precision.get_precision() - 20
    for t, n in enumerate(schedule):
        fam = solver(system, n)
        N = n.total
        mu = fam.measure(j)
        for z in test_points:
            zz = _point(z)
            phi = fam.phi(j, zz)
            terms = max(abs(w * fam.Q(x)) for x, w in zip(mu.nodes, mu.weights))
            beyond = phi == 0 or mpmath.log(abs(phi) / terms, 2) < -floor
            r = float(mpmath.log(abs(phi / fam.Q(zz)))) / N if phi != 0 else float("-inf")
            pred = float(predictor(_cplx(z)))
            err = _rel_log_error(r, pred)
            if N >= sign_from and not beyond:
                neg_ok &= r < 0
            final = t == len(schedule) - 1
            passed = None
            if final:
                passed = bool(err < tolerance) if not beyond else None
                if not beyond:
                    last_ok &= err < tolerance
                    upper_ok &= r <= pred + 0.1 * abs(pred)
            rep.rows.append(Row(N, str(n), "rate" + (" beyond-floor" if beyond else ""),
                                _fmt_point(z), r, pred, err, passed))
    rep.flags["negative"] = neg_ok
    rep.flags["last_within_tolerance"] = last_ok
    rep.flags["upper_bound"] = upper_ok
    return rep


# ---------------------------------------------------------------------------
# Ratio asymptotics


def joukowski_inverse(interval: Interval, z: complex) -> complex:
    """Exterior branch ``|w| > 1`` of ``z = c + r (w + 1/w) / 2``."""
    c, r = float(interval.center), float(interval.radius)
    t = (complex(z) - c) / r
    w = t + np.sqrt(t - 1) * np.sqrt(t + 1)
    if abs(w) < 1:
        w = 1 / w
    return w


@dataclass
class LaurentFit:
    """``R(z) ~ w^d * sum_i c_i w^{-i}`` in the exterior variable of an interval."""

    interval: Interval
    degree_shift: int
    coefficients: np.ndarray

    def __call__(self, z) -> complex:
        w = joukowski_inverse(self.interval, z)
        return complex(w ** self.degree_shift
                       * np.polynomial.polynomial.polyval(1 / w, self.coefficients))


def laurent_fit(f: Callable, interval: Interval, degree_shift: int, terms: int,
                rho: float = 1.4, samples: int = 256) -> LaurentFit:
    """Fit ``f / w^d`` by its Laurent coefficients on the circle ``|w| = rho``."""
    c, r = interval.center, interval.radius
    theta = 2 * np.pi * np.arange(samples) / samples
    w = rho * np.exp(1j * theta)
    vals = np.empty(samples, dtype=complex)
    for i, wi in enumerate(w):
        z = c + r * mpmath.mpc(wi.real, wi.imag) * (1 + 1 / mpmath.mpc(wi.real, wi.imag) ** 2) / 2
        vals[i] = complex(f(z)) / wi ** degree_shift
    coeffs = np.array([np.mean(vals * w ** i) for i in range(terms + 1)])
    return LaurentFit(interval, degree_shift, coeffs)


def boundary_product(fits: Sequence, k: int, x: float, eps_ladder=(1e-2, 1e-3, 1e-4)):
    """``|F_k(x)|^2 / |F_{k-1} F_{k+1}(x)|`` on the k-th interval (1-based), with
    ``|F_k(x)|^2`` taken as ``F_k(x + i eps) F_k(x - i eps)`` and linear
    extrapolation in eps from the two smallest rungs."""
    m = len(fits)
    vals = []
    for eps in eps_ladder:
        prod = fits[k - 1](complex(x, eps)) * fits[k - 1](complex(x, -eps))
        vals.append(prod)
    e1, e2 = eps_ladder[-2], eps_ladder[-1]
    sq = vals[-1] - e2 * (vals[-2] - vals[-1]) / (e1 - e2)
    den = 1.0
    if k > 1:
        den *= abs(fits[k - 2](complex(x, 0)))
    if k < m:
        den *= abs(fits[k](complex(x, 0)))
    return abs(sq) / den


def fit_boundary_constants(logs: np.ndarray) -> np.ndarray:
    """Positive ``c_k`` making ``c_k^2 / (c_{k-1} c_{k+1})`` cancel the mean
    log-product ``logs[k]`` (``c_0 = c_{m+1} = 1``)."""
    m = logs.shape[0]
    T = np.zeros((m, m))
    for k in range(m):
        T[k, k] = 2
        if k > 0:
            T[k, k - 1] = -1
        if k + 1 < m:
            T[k, k + 1] = -1
    return np.exp(np.linalg.solve(T, -logs))


@dataclass
class RatioLimitEstimate:
    ell: int
    points: list
    values: dict
    deltas: list
    boundary: dict = field(default_factory=dict)
    constants: list = field(default_factory=list)
    normalization_ok: bool = True


def _interior_points(interval: Interval, count: int) -> list[float]:
    a, b = float(interval.a), float(interval.b)
    return [a + (b - a) * (i + 1) / (count + 1) for i in range(count)]


def _ratio_polys(fam_n, fam_l, k: int, kind: str):
    if kind == "II":
        return fam_l.q_poly(k), fam_n.q_poly(k)
    return fam_l.a_poly(k), fam_n.a_poly(k)


def ratio_report(system: NikishinSystem, schedule: DegreeSchedule, ell: int,
                 test_points: Sequence, solver: Callable | None = None,
                 boundary_points: int = 5, boundary_tolerance: float = 0.05,
                 kind: str = "II", fit_rho: float = 1.4) -> tuple[RatioLimitEstimate, Report]:
    """Ratios ``Q_{n^l,k} / Q_{n,k}`` along the schedule.

    Checks Cauchy stabilisation at ``test_points`` and the boundary condition
    on every ``Delta_k`` for the final ratio, after smoothing it by a
    truncated Laurent fit in the exterior Joukowski variable of ``Delta_k``.
    """
    solver = solver or _default_solver(kind)
    m = system.m
    rep = Report()
    values: dict = {k: [] for k in range(1, m + 1)}
    last_pair = None
    for n in schedule:
        nl = n.bump(ell)
        fn, fl = solver(system, n), solver(system, nl)
        last_pair = (n, fn, fl)
        for k in range(1, m + 1):
            num, den = _ratio_polys(fn, fl, k, kind)
            row = []
            for z in test_points:
                zz = _point(z)
                row.append(complex(num(zz) / den(zz)))
            values[k].append(row)
    deltas = []
    for t in range(1, len(schedule)):
        d = max(abs(values[k][t][i] - values[k][t - 1][i])
                for k in range(1, m + 1) for i in range(len(test_points)))
        deltas.append(d)
        rep.rows.append(Row(schedule.indices[t].total, str(schedule.indices[t]), "delta",
                            "", d, 0.0, d, None))
    est = RatioLimitEstimate(ell, list(test_points),
                             {k: values[k][-1] for k in values}, deltas)
    if len(deltas) >= 3:
        rep.flags["deltas_decrease_last3"] = deltas[-3] > deltas[-2] > deltas[-1]
    if len(deltas) >= 4:
        rep.flags["stabilisation"] = deltas[-1] < deltas[2]
    if last_pair is None or kind != "II" or boundary_points == 0:
        return est, rep
    n, fn, fl = last_pair
    fits = []
    for k in range(1, m + 1):
        num, den = _ratio_polys(fn, fl, k, kind)
        shift = num.degree - den.degree
        terms = max(2, den.degree)
        fits.append(laurent_fit(lambda z, num=num, den=den: num(z) / den(z),
                                system.interval(k), shift, terms, rho=fit_rho))
        big = float(system.interval(k).b) + 100 * float(system.interval(k).length)
        lead = (num(mpf(big)) / den(mpf(big))) / mpf(big) ** shift
        est.normalization_ok &= lead > 0
    logs = []
    spreads = []
    for k in range(1, m + 1):
        xs = _interior_points(system.interval(k), boundary_points)
        prods = np.array([boundary_product(fits, k, x) for x in xs])
        mean = float(np.exp(np.mean(np.log(prods))))
        spread = float(np.max(np.abs(prods / mean - 1)))
        est.boundary[k] = [float(p) for p in prods]
        logs.append(math.log(mean))
        spreads.append(spread)
        for x, p in zip(xs, prods):
            rep.rows.append(Row(n.total, str(n), f"boundary_{k}", f"{x:.6g}", float(p), mean,
                                abs(p / mean - 1), bool(abs(p / mean - 1) < boundary_tolerance)))
    est.constants = list(fit_boundary_constants(np.array(logs)))
    rep.flags["boundary"] = max(spreads) < boundary_tolerance
    rep.flags["normalization"] = est.normalization_ok
    return est, rep


def type_i_ratio_report(system: NikishinSystem, schedule: DegreeSchedule, ell: int,
                        test_points: Sequence, solver: Callable | None = None) -> Report:
    """Stabilisation of ``A_{n^l,k} / A_{n,k}`` and of the form ratios."""
    solver = solver or solve_type_i
    m = system.m
    rep = Report()
    poly_vals: list = []
    form_vals: list = []
    for n in schedule:
        bumped, base = solver(system, n.bump(ell)), solver(system, n)
        prow, frow = [], []
        for k in range(1, m + 1):
            num, den = bumped.a_poly(k), base.a_poly(k)
            for z in test_points:
                zz = _point(z)
                prow.append(complex(num(zz) / den(zz)))
                frow.append(complex(bumped.form(k, zz) / base.form(k, zz)))
        poly_vals.append(prow)
        form_vals.append(frow)
    deltas, fdeltas = [], []
    for t in range(1, len(schedule)):
        d = max(abs(u - v) for u, v in zip(poly_vals[t], poly_vals[t - 1]))
        fd = max(abs(u - v) for u, v in zip(form_vals[t], form_vals[t - 1]))
        deltas.append(d)
        fdeltas.append(fd)
        n = schedule.indices[t]
        rep.rows.append(Row(n.total, str(n), "delta_A", "", d, 0.0, d, None))
        rep.rows.append(Row(n.total, str(n), "delta_form", "", fd, 0.0, fd, None))
    if len(deltas) >= 2:
        rep.flags["A_stabilises"] = deltas[-1] < deltas[0]
        rep.flags["form_stabilises"] = fdeltas[-1] < fdeltas[0]
    return rep
