"""Logarithmic potentials of piecewise-constant densities and solvers for
vector and scalar (external field) equilibrium problems.

Measures are discretised on Chebyshev-spaced cells with a constant density
per cell.  Cell-to-cell log-kernel integrals use the closed form for nearby
cells and a 4x4 Gauss-Legendre tensor rule otherwise.  Everything here runs in
double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

NEAR_FACTOR = 16.0
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


class EquilibriumError(RuntimeError):
    """Solver did not reach the KKT tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _as_pair(interval) -> tuple[float, float]:
    if hasattr(interval, "a"):
        return float(interval.a), float(interval.b)
    a, b = interval
    return float(a), float(b)


def chebyshev_edges(a: float, b: float, cells: int) -> np.ndarray:
    """Cell edges ``c - r cos(pi i / G)``, i = 0..G."""
    c, r = (a + b) / 2, (b - a) / 2
    edges = c - r * np.cos(np.pi * np.arange(cells + 1) / cells)
    edges[0], edges[-1] = a, b
    return edges


@dataclass
class GridMeasure:
    """Piecewise-constant density on cells; ``weights[i]`` is the cell mass."""

    edges: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.edges.shape[0] != self.weights.shape[0] + 1:
            raise ValueError("need one more edge than weights")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")

    @property
    def support(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def nodes(self) -> np.ndarray:
        return (self.edges[:-1] + self.edges[1:]) / 2

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def breakpoints(self) -> np.ndarray:
        return self.edges

    def cdf(self, x, left: bool = False) -> np.ndarray:
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return np.interp(x, self.edges, cum, left=0.0, right=cum[-1])

    def coarsen(self, factor: int) -> "GridMeasure":
        """Merge consecutive groups of ``factor`` cells."""
        if self.size % factor:
            raise ValueError("cell count must be divisible by the factor")
        return GridMeasure(self.edges[::factor],
                           self.weights.reshape(-1, factor).sum(axis=1))

    def potential(self, z) -> float:
        return log_potential(self, z)


@dataclass
class ExactMeasure:
    """A measure given by its distribution function, sampled for distances."""

    cdf_function: Callable
    samples: np.ndarray

    def breakpoints(self) -> np.ndarray:
        return self.samples

    def cdf(self, x, left: bool = False) -> np.ndarray:
        return self.cdf_function(np.asarray(x, dtype=float))


def arcsine_cdf(a: float, b: float) -> Callable:
    c, r = (a + b) / 2, (b - a) / 2

    def F(x):
        t = np.clip((np.asarray(x, dtype=float) - c) / r, -1.0, 1.0)
        return 0.5 + np.arcsin(t) / np.pi

    return F


def arcsine_measure(a: float = -1.0, b: float = 1.0, samples: int = 20001) -> ExactMeasure:
    """Equilibrium (arcsine) distribution of [a, b] for distance computations."""
    return ExactMeasure(arcsine_cdf(a, b), chebyshev_edges(a, b, samples - 1))


def arcsine_grid(a: float, b: float, cells: int) -> GridMeasure:
    """Arcsine measure with exact cell masses on Chebyshev cells."""
    edges = chebyshev_edges(a, b, cells)
    F = arcsine_cdf(a, b)
    return GridMeasure(edges, np.diff(F(edges)))


# ---------------------------------------------------------------------------
# Kernels


def _H(u, y):
    """Antiderivative in u of log sqrt(u^2 + y^2)."""
    u = np.asarray(u, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    r2 = u * u + y * y
    with np.errstate(divide="ignore", invalid="ignore"):
        logterm = np.where(r2 > 0, 0.5 * u * np.log(np.where(r2 > 0, r2, 1.0)), 0.0)
        atan = np.where(y > 0, y * np.arctan(u / np.where(y > 0, y, 1.0)), 0.0)
    return logterm - u + atan


def _F(u):
    """Second antiderivative of log|u|: u^2 log|u| / 2 - 3 u^2 / 4."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(u != 0, np.log(np.abs(np.where(u != 0, u, 1.0))), 0.0)
    return 0.5 * u * u * lg - 0.75 * u * u


def _gauss_points(edges: np.ndarray):
    lo, hi = edges[:-1], edges[1:]
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    pts = mid[:, None] + half[:, None] * GL_NODES[None, :]
    return pts, GL_WEIGHTS / 2.0


def kernel_matrix(edges_a: np.ndarray, edges_b: np.ndarray) -> np.ndarray:
    """Cell-averaged ``log 1/|x - y|`` between every pair of cells."""
    pa, wa = _gauss_points(edges_a)
    pb, wb = _gauss_points(edges_b)
    K = np.zeros((pa.shape[0], pb.shape[0]))
    for p in range(len(GL_NODES)):
        for q in range(len(GL_NODES)):
            diff = np.abs(pa[:, p][:, None] - pb[:, q][None, :])
            with np.errstate(divide="ignore"):
                K -= wa[p] * wb[q] * np.log(diff)
    a0, a1 = edges_a[:-1][:, None], edges_a[1:][:, None]
    b0, b1 = edges_b[:-1][None, :], edges_b[1:][None, :]
    ha, hb = a1 - a0, b1 - b0
    gap = np.maximum(np.maximum(b0 - a1, a0 - b1), 0.0)
    near = gap < NEAR_FACTOR * np.maximum(ha, hb)
    ii, jj = np.nonzero(near)
    if ii.size:
        A0, A1 = edges_a[:-1][ii], edges_a[1:][ii]
        B0, B1 = edges_b[:-1][jj], edges_b[1:][jj]
        integral = _F(A1 - B0) - _F(A0 - B0) - _F(A1 - B1) + _F(A0 - B1)
        K[ii, jj] = -integral / ((A1 - A0) * (B1 - B0))
    return K


def cell_potentials(edges: np.ndarray, z: complex) -> np.ndarray:
    """Average of ``log 1/|z - t|`` over each cell, for one point z."""
    z = complex(z)
    x, y = z.real, abs(z.imag)
    lo, hi = edges[:-1], edges[1:]
    h = hi - lo
    dist = np.where(x < lo, lo - x, np.where(x > hi, x - hi, 0.0))
    dist = np.hypot(dist, y)
    near = dist < NEAR_FACTOR * h
    out = np.empty_like(h)
    if np.any(near):
        out[near] = -(_H(hi[near] - x, y) - _H(lo[near] - x, y)) / h[near]
    far = ~near
    if np.any(far):
        pts, w = _gauss_points(edges)
        pts = pts[far]
        r = np.hypot(pts - x, y)
        out[far] = -(np.log(r) * w[None, :]).sum(axis=1)
    return out


def log_potential(mu: GridMeasure, z) -> float:
    """``V(z) = int log 1/|z - t| dmu(t)`` for a grid measure.

    Examples
    --------
    >>> round(log_potential(arcsine_grid(-1, 1, 2000), 0.0), 6)
    0.693147
    """
    return float(np.dot(mu.weights, cell_potentials(mu.edges, z)))


# ---------------------------------------------------------------------------
# Interaction matrix


@dataclass(frozen=True)
class InteractionMatrix:
    entries: np.ndarray
    p: tuple
    P: tuple

    @property
    def m(self) -> int:
        return len(self.p)

    def leading_minors(self) -> list[float]:
        return [float(np.linalg.det(self.entries[:r, :r])) for r in range(1, self.m + 1)]


def interaction_matrix(p: Sequence) -> InteractionMatrix:
    """Tridiagonal matrix with diagonal ``P_j^2`` and off-diagonal ``-P_j P_{j+1} / 2``.

    ``P_j = p_j + ... + p_m`` are tail sums of the limit proportions.

    Examples
    --------
    >>> interaction_matrix([0.5, 0.5]).entries.tolist()
    [[1.0, -0.25], [-0.25, 0.25]]
    """
    p = tuple(float(v) for v in p)
    m = len(p)
    if m == 0:
        raise ValueError("need at least one proportion")
    if m == 1:
        if not math.isclose(p[0], 1.0, abs_tol=1e-12):
            raise ValueError("a single proportion must equal 1")
    elif any(not 0 < v < 1 for v in p):
        raise ValueError("proportions must lie in (0, 1)")
    if not math.isclose(sum(p), 1.0, abs_tol=1e-12):
        raise ValueError("proportions must sum to 1")
    if any(u < v - 1e-15 for u, v in zip(p, p[1:])):
        raise ValueError("proportions must be non-increasing")
    P = tuple(sum(p[j:]) for j in range(m))
    C = np.zeros((m, m))
    for j in range(m):
        C[j, j] = P[j] ** 2
        if j + 1 < m:
            C[j, j + 1] = C[j + 1, j] = -P[j] * P[j + 1] / 2
    mat = InteractionMatrix(C, p, P)
    if any(d <= 0 for d in mat.leading_minors()):
        raise ValueError("interaction matrix is not positive definite")
    return mat


# ---------------------------------------------------------------------------
# Quadratic programme over products of simplices


def project_simplex(v: np.ndarray, mass: float) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum w = mass}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - mass
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


@dataclass
class _QP:
    """min w^T M w + 2 b^T w over blocks summing to given masses."""

    M: np.ndarray
    b: np.ndarray
    blocks: list
    masses: list

    def energy(self, w):
        return float(w @ self.M @ w + 2 * self.b @ w)

    def field(self, w):
        """Half-gradient: the combined cell potentials ``M w + b``."""
        return self.M @ w + self.b

    def project(self, v):
        out = np.empty_like(v)
        for sl, mass in zip(self.blocks, self.masses):
            out[sl] = project_simplex(v[sl], mass)
        return out

    def constants(self, w):
        """Per-block equilibrium constant: median field on charged cells."""
        g = self.field(w)
        out = []
        for sl, mass in zip(self.blocks, self.masses):
            ws, gs = w[sl], g[sl]
            thresh = mass / (10 * ws.size)
            sel = ws > thresh
            if not np.any(sel):
                sel = ws > 0
            out.append(float(np.median(gs[sel])))
        return out

    def kkt_residual(self, w, omegas=None) -> float:
        g = self.field(w)
        omegas = self.constants(w) if omegas is None else omegas
        worst = 0.0
        for sl, mass, om in zip(self.blocks, self.masses, omegas):
            ws, gs = w[sl], g[sl]
            charged = ws > mass * 1e-12
            if np.any(charged):
                worst = max(worst, float(np.max(np.abs(gs[charged] - om))))
            worst = max(worst, float(max(0.0, om - np.min(gs))))
        return worst

    def kkt_start(self, max_rounds: int = 60):
        """Equality-constrained solves on a shrinking/growing active set."""
        n = self.M.shape[0]
        active = np.ones(n, dtype=bool)
        w = None
        for _ in range(max_rounds):
            idx = np.nonzero(active)[0]
            nb = len(self.blocks)
            A = np.zeros((idx.size + nb, idx.size + nb))
            rhs = np.zeros(idx.size + nb)
            A[:idx.size, :idx.size] = self.M[np.ix_(idx, idx)]
            rhs[:idx.size] = -self.b[idx]
            for k, (sl, mass) in enumerate(zip(self.blocks, self.masses)):
                members = ((idx >= sl.start) & (idx < sl.stop)).astype(float)
                A[:idx.size, idx.size + k] = -members
                A[idx.size + k, :idx.size] = members
                rhs[idx.size + k] = mass
            try:
                sol = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                return None
            cand = np.zeros(n)
            cand[idx] = sol[:idx.size]
            omegas = sol[idx.size:]
            negative = cand < 0
            if np.any(negative):
                # drop the offending cells and re-solve
                active &= ~negative
                continue
            g = self.field(cand)
            grow = np.zeros(n, dtype=bool)
            for sl, om in zip(self.blocks, omegas):
                grow[sl] = (~active[sl]) & (g[sl] < om - 1e-9)
            w = cand
            if not np.any(grow):
                break
            active |= grow
        return w

    def solve(self, tol: float, max_iter: int, log: list):
        w = self.kkt_start()
        if w is None or np.any(w < 0):
            w = np.concatenate([np.full(sl.stop - sl.start, mass / (sl.stop - sl.start))
                                for sl, mass in zip(self.blocks, self.masses)])
        w = self.project(w)
        E = self.energy(w)
        res = self.kkt_residual(w)
        log.append((0, E, res))
        grad = 2 * self.field(w)
        step = 1.0 / max(1e-12, float(np.abs(np.diag(self.M)).max()))
        it = 0
        while res > tol and it < max_iter:
            it += 1
            while True:
                cand = self.project(w - step * grad)
                Ec = self.energy(cand)
                if Ec <= E or step < 1e-30:
                    break
                step /= 2
            s = cand - w
            new_grad = 2 * self.field(cand)
            yv = new_grad - grad
            sy = float(s @ yv)
            w, grad, E = cand, new_grad, Ec
            res = self.kkt_residual(w)
            if it % 100 == 0 or res <= tol:
                log.append((it, E, res))
            step = float(s @ s) / sy if sy > 0 else step * 2
        return w, res, it


# ---------------------------------------------------------------------------
# Solutions


@dataclass
class EquilibriumSolution:
    """Discrete vector equilibrium measure with its constants.

    ``omegas`` are the constants of the combined potentials
    ``W_j = sum_k c_jk V^{lambda_k}``; ``omegas_scalar`` are the per-component
    constants obtained by inverting ``omega'_j = P_j^2 w_j - P_j P_{j-1} w_{j-1}``
    with ``omega' = omegas``.
    """

    lambdas: list
    omegas: list
    omegas_scalar: list
    matrix: InteractionMatrix | np.ndarray
    kkt_residual: float
    iterations: int
    log: list = field(default_factory=list)
    cell_fields: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.lambdas)

    @property
    def P(self) -> tuple:
        if isinstance(self.matrix, InteractionMatrix):
            return self.matrix.P
        return tuple(math.sqrt(self.matrix[j, j]) for j in range(self.m))

    def potential(self, j: int, z) -> float:
        """``V^{lambda_j}(z)``, 1-based j."""
        return log_potential(self.lambdas[j - 1], z)

    def combined_potential(self, j: int, z) -> float:
        C = self.matrix.entries if isinstance(self.matrix, InteractionMatrix) else self.matrix
        return sum(C[j - 1, k] * self.potential(k + 1, z) for k in range(self.m)
                   if C[j - 1, k] != 0)

    def u(self, j: int, z) -> float:
        return u_function(self, j, z)

    def xi(self, j: int, z):
        return xi_function(self, j, z)

    def report_rows(self) -> list[tuple]:
        rows = []
        for j, (lam, W) in enumerate(zip(self.lambdas, self.cell_fields), start=1):
            for x, w, v in zip(lam.nodes, lam.weights, W):
                rows.append((j, float(x), float(w), float(v)))
        return rows


def _scalar_constants(omegas: Sequence, P: Sequence) -> list[float]:
    out = []
    prev = 0.0
    for j, om in enumerate(omegas):
        Pprev = P[j - 1] if j > 0 else 0.0
        val = (om + P[j] * Pprev * prev) / P[j] ** 2
        out.append(val)
        prev = val
    return out


def solve_vector_equilibrium(E: Sequence, C, G: int = 2000, tol: float = 1e-6,
                             max_iter: int = 100000) -> EquilibriumSolution:
    """Vector equilibrium measure of intervals E_j under interaction matrix C.

    Minimises ``sum_{j,k} c_jk I(mu_j, mu_k)`` over probability measures by a
    KKT active-set warm start followed by monotone projected gradient with
    Barzilai-Borwein steps.

    Raises
    ------
    EquilibriumError
        If the KKT residual stays above ``tol``.
    """
    matrix = C
    Cm = C.entries if isinstance(C, InteractionMatrix) else np.asarray(C, dtype=float)
    m = Cm.shape[0]
    intervals = [_as_pair(e) for e in E]
    if len(intervals) != m:
        raise ValueError("one interval per matrix row is required")
    if G < 2:
        raise ValueError("grid size too small")
    for j in range(m):
        for k in range(j + 1, m):
            (a, b), (c, d) = intervals[j], intervals[k]
            overlap = not (b < c or d < a)
            if overlap and Cm[j, k] < 0:
                raise ValueError(f"negative coupling between intersecting sets {j + 1}, {k + 1}")
    edges = [chebyshev_edges(a, b, G) for a, b in intervals]
    n = m * G
    M = np.zeros((n, n))
    for j in range(m):
        for k in range(j, m):
            if Cm[j, k] == 0:
                continue
            K = kernel_matrix(edges[j], edges[k])
            M[j * G:(j + 1) * G, k * G:(k + 1) * G] = Cm[j, k] * K
            if k != j:
                M[k * G:(k + 1) * G, j * G:(j + 1) * G] = Cm[j, k] * K.T
    M = (M + M.T) / 2
    blocks = [slice(j * G, (j + 1) * G) for j in range(m)]
    qp = _QP(M, np.zeros(n), blocks, [1.0] * m)
    log: list = []
    w, res, iters = qp.solve(tol, max_iter, log)
    if res > tol:
        raise EquilibriumError(f"KKT residual {res:.3e} above {tol:.1e} after {iters} steps", res)
    omegas = qp.constants(w)
    g = qp.field(w)
    lambdas = [GridMeasure(edges[j], w[blocks[j]]) for j in range(m)]
    P = (matrix.P if isinstance(matrix, InteractionMatrix)
         else tuple(math.sqrt(Cm[j, j]) for j in range(m)))
    return EquilibriumSolution(lambdas, omegas, _scalar_constants(omegas, P), matrix, res,
                               iters, log, [g[sl] for sl in blocks])


def solve_external_field_equilibrium(E, phi: Callable, G: int = 2000, tol: float = 1e-6,
                                     max_iter: int = 100000):
    """Probability measure with ``V^lambda + phi = w`` on its support and ``>= w`` on E.

    Returns
    -------
    (GridMeasure, float)
    """
    a, b = _as_pair(E)
    edges = chebyshev_edges(a, b, G)
    pts, wts = _gauss_points(edges)
    field_avg = np.array([sum(wt * float(phi(x)) for x, wt in zip(row, wts)) for row in pts])
    M = kernel_matrix(edges, edges)
    M = (M + M.T) / 2
    qp = _QP(M, field_avg, [slice(0, G)], [1.0])
    log: list = []
    w, res, iters = qp.solve(tol, max_iter, log)
    if res > tol:
        raise EquilibriumError(f"KKT residual {res:.3e} above {tol:.1e}", res)
    return GridMeasure(edges, w), qp.constants(w)[0]


def u_function(sol: EquilibriumSolution, j: int, z) -> float:
    """``U_j = P_j V^{lambda_j} - P_{j+1} V^{lambda_{j+1}} - 2 sum_{k<=j} omega_k / P_k``."""
    m, P = sol.m, sol.P
    if not 1 <= j <= m:
        raise ValueError(f"j must lie in 1..{m}")
    val = P[j - 1] * sol.potential(j, z)
    if j < m:
        val -= P[j] * sol.potential(j + 1, z)
    val -= 2 * sum(sol.omegas[k] / P[k] for k in range(j))
    return val


def xi_function(sol: EquilibriumSolution, j: int, z) -> tuple[float, int]:
    """``xi_j = max_{k<=j} U_k`` and the (1-based) k attaining it."""
    values = [u_function(sol, k, z) for k in range(1, j + 1)]
    k = int(np.argmax(values))
    return values[k], k + 1
