"""
Torus integrals of trigonometric kernels against the free resolvent at K = 0.

Every integrand here has the form P(p)/(ℰ_0(p) − z) with P a cosine polynomial
of degree ≤ 4 per axis. With ℰ_0(p) − z = 2(a − cos p1), a = (4 − z)/2 − cos p2,
the p1 integral is exact (Poisson moments) and only a smooth periodic p2
integral remains. Near a band edge that integrand peaks at p2 = 0 (below) or
p2 = π (above); a Möbius reparametrisation of the circle spreads the peak so
the periodic trapezoid keeps converging geometrically.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np
from numpy.polynomial import chebyshev, legendre

from spectrum import config
from spectrum.errors import SectorIndexError, SpectralDomainError
from spectrum.models import QuadratureMethod, QuadratureSpec, SideTag

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)

DEFAULT_SPEC = QuadratureSpec()

# Coefficient of −ln(dist)/(8π) per basis function, and parity under p → p + (π, π)
LOG_WEIGHTS = np.array([1.0, 2.0, 2.0, 2.0])
PARITY = np.array([1.0, -1.0, 1.0, 1.0])

ENTRY_ORDER = ((1, 1), (1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (2, 4), (3, 3), (3, 4), (4, 4))
QUADRATURE_ENTRIES = ((1, 1), (1, 3), (1, 4), (3, 3), (3, 4), (4, 4))


class QuadratureResult(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class GreensMatrix:
    """Symmetric 4×4 matrix a_ij(z) of the ees sector."""
    z: float
    a: np.ndarray

    def entry(self, i: int, j: int) -> float:
        return float(self.a[i - 1, j - 1])


# ─── Kernel tables ───
# A table P[m, n] stands for Σ P[m, n] cos(m p2) cos(n p1).

def _table(entries: dict[tuple[int, int], float]) -> np.ndarray:
    P = np.zeros((5, 5))
    for (m, n), v in entries.items():
        P[m, n] = v
    return P


def _unit(k: int) -> np.ndarray:
    e = np.zeros(k + 1)
    e[k] = 1.0
    return e


def _product(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Product of two cosine tables, truncated back to degree 4 per axis."""
    out = np.zeros((9, 9))
    for (a, b), x in np.ndenumerate(A):
        if x == 0.0:
            continue
        for (c, d), y in np.ndenumerate(B):
            if y == 0.0:
                continue
            rows = chebyshev.chebmul(_unit(a), _unit(c))
            cols = chebyshev.chebmul(_unit(b), _unit(d))
            out[: len(rows), : len(cols)] += x * y * np.outer(rows, cols)
    if np.any(out[5:, :]) or np.any(out[:, 5:]):
        raise ValueError("kernel product exceeds degree 4")
    return out[:5, :5]


# 2π·α_i for the ees basis
EES_KERNELS = (
    _table({(0, 0): 1.0}),
    _table({(0, 1): 1.0, (1, 0): 1.0}),
    _table({(0, 2): 1.0, (2, 0): 1.0}),
    _table({(1, 1): 2.0}),
)
OOS_SQUARED = _table({(0, 0): 0.25, (0, 2): -0.25, (2, 0): -0.25, (2, 2): 0.25})
EA_KERNELS = (
    _table({(0, 1): 1.0, (1, 0): -1.0}),
    _table({(0, 2): 1.0, (2, 0): -1.0}),
)


def _ees_table(i: int, j: int) -> np.ndarray:
    if not (1 <= i <= 4 and 1 <= j <= 4):
        raise SectorIndexError(f"Green's entry indices must be in 1..4, got ({i}, {j})")
    return _product(EES_KERNELS[i - 1], EES_KERNELS[j - 1])


SECTOR_TABLES = np.stack([
    OOS_SQUARED,
    _product(EA_KERNELS[0], EA_KERNELS[0]),
    _product(EA_KERNELS[0], EA_KERNELS[1]),
    _product(EA_KERNELS[1], EA_KERNELS[1]),
])


# ─── Closed forms ───

def poisson_moment(a: float, n: int) -> float:
    """∫_{−π}^{π} cos(n t)/(a − cos t) dt for a > 1."""
    if a <= 1.0 + 1e-14:
        raise SpectralDomainError(f"Poisson moment needs a > 1, got a = {a}")
    if n < 0:
        raise SectorIndexError(f"moment order must be non-negative, got {n}")
    root = math.sqrt((a - 1.0) * (a + 1.0))
    beta = 1.0 / (a + root)
    return TWO_PI * beta ** n / root


def edge_constants() -> dict[str, float]:
    """Band-edge values of the oos and ea integrals at z = 0."""
    pi = math.pi
    return {
        "c_oos": 1.0 - 8.0 / (3.0 * pi),
        "g11": (4.0 - pi) / (2.0 * pi),
        "g12": (16.0 - 5.0 * pi) / (2.0 * pi),
        "g22": 2.0 * (16.0 - 5.0 * pi) / pi,
    }


def parity_signs() -> np.ndarray:
    """σ with a_ij(z) = −σ_i σ_j a_ij(8 − z)."""
    return PARITY.copy()


def asymptotic_constants() -> tuple[np.ndarray, np.ndarray]:
    """Constant terms C_ij and log weights w of a_ij(z) ≈ −w_i w_j ln(−z)/(8π) + C_ij as z ↗ 0."""
    pi = math.pi
    c = 5.0 * LN2
    C = np.empty((4, 4))
    values = {
        (1, 1): c / (8.0 * pi),
        (1, 2): (c - pi) / (4.0 * pi),
        (1, 3): (c - 4.0 * pi + 8.0) / (4.0 * pi),
        (1, 4): (c - 4.0) / (4.0 * pi),
        (2, 2): (c - pi) / (2.0 * pi),
        (2, 3): (c - 4.0 * pi + 8.0) / (2.0 * pi),
        (2, 4): (c - 4.0) / (2.0 * pi),
        (3, 3): (c - 20.0 * pi + 176.0 / 3.0) / (2.0 * pi),
        (3, 4): (c + 4.0 * pi - 52.0 / 3.0) / (2.0 * pi),
        (4, 4): (c - 2.0 * pi + 8.0 / 3.0) / (2.0 * pi),
    }
    for (i, j), v in values.items():
        C[i - 1, j - 1] = C[j - 1, i - 1] = v
    return C, LOG_WEIGHTS.copy()


def asymptotic_reference(entry: tuple[int, int], side: SideTag, z: float, printed: bool = False) -> float:
    """
    Two-term threshold asymptote of a_ij.

    Above the band the exact reflection a_ij(z) = −σ_iσ_j a_ij(8 − z) fixes the
    signs; printed=True instead negates every constant and slope uniformly.
    """
    i, j = entry
    if not (1 <= i <= 4 and 1 <= j <= 4):
        raise SectorIndexError(f"Green's entry indices must be in 1..4, got {entry}")
    C, w = asymptotic_constants()
    slope = w[i - 1] * w[j - 1] / (8.0 * math.pi)
    if side == SideTag.BELOW:
        return -slope * math.log(-z) + C[i - 1, j - 1]
    sign = 1.0 if printed else PARITY[i - 1] * PARITY[j - 1]
    return sign * (slope * math.log(z - 8.0) - C[i - 1, j - 1])


# ─── Quadrature engines ───

def _check_outside(z: float, allow_edges: bool) -> None:
    inside = (0.0 < z < 8.0) if allow_edges else (0.0 <= z <= 8.0)
    if inside or not math.isfinite(z):
        raise SpectralDomainError(f"spectral parameter z = {z} lies in the band [0, 8]")


def _moments(delta: np.ndarray, below: bool) -> np.ndarray:
    """Poisson moments M_n = s_n β^n/√(a² − 1), n = 0..4, from δ = |a| − 1."""
    root = np.sqrt(delta * (2.0 + delta))
    beta = 1.0 / (1.0 + delta + root)
    w = 1.0 / root
    powers = beta[None, :] ** np.arange(5)[:, None]
    if below:
        return powers * w
    signs = -((-1.0) ** np.arange(5))         # (−1)^{n+1}
    return signs[:, None] * powers * w


def _outer_values(tables: np.ndarray, x2: np.ndarray, delta: np.ndarray, below: bool) -> np.ndarray:
    """p2-integrand Σ_mn P[m,n] cos(m p2)·π M_n(p2) for each table; shape (T, N)."""
    cos_m = chebyshev.chebvander(x2, 4)            # (N, 5): T_m(cos p2) = cos(m p2)
    moments = _moments(delta, below)               # (5, N)
    return math.pi * np.einsum("km,tmn,nk->tk", cos_m, tables, moments)


def _graded_trapezoid(tables: np.ndarray, z: float, spec: QuadratureSpec) -> tuple[np.ndarray, float]:
    below = z < 0.0
    dist = -z if below else z - 8.0
    kappa = min(1.0, (dist / 4.0) ** 0.25)
    n_points = spec.initial_points
    previous: Optional[np.ndarray] = None
    error = math.inf
    for _ in range(spec.max_doublings + 1):
        t = -math.pi + TWO_PI * np.arange(n_points) / n_points
        s, c = np.sin(t / 2.0), np.cos(t / 2.0)
        den = c * c + kappa * kappa * s * s
        half_sin_sq = kappa * kappa * s * s / den         # sin²((p2 − p_edge)/2)
        cos_2theta = (c * c - kappa * kappa * s * s) / den
        x2 = cos_2theta if below else -cos_2theta
        delta = dist / 2.0 + 2.0 * half_sin_sq
        values = _outer_values(tables, x2, delta, below) * (kappa / den)
        current = values.sum(axis=1) * (TWO_PI / n_points)
        if previous is not None:
            error = float(np.max(np.abs(current - previous)))
            if error <= spec.rel_tol * max(float(np.max(np.abs(current))), 1e-300):
                return current, error
        previous = current
        n_points *= 2
    logger.warning(f"semi-analytic quadrature at z={z} stopped at {n_points // 2} points, delta={error:.3e}")
    return previous, error


def _edge_gauss_legendre(tables: np.ndarray, z: float, spec: QuadratureSpec) -> tuple[np.ndarray, float]:
    """Exact band edge: the even outer integrand is analytic on [0, π]."""
    below = z <= 0.0
    n_points = spec.initial_points
    previous: Optional[np.ndarray] = None
    error = math.inf
    for _ in range(spec.max_doublings + 1):
        xi, wts = legendre.leggauss(n_points)
        p2 = 0.5 * math.pi * (xi + 1.0)
        half = np.sin(p2 / 2.0) if below else np.cos(p2 / 2.0)
        delta = 2.0 * half * half
        values = _outer_values(tables, np.cos(p2), delta, below)
        current = 2.0 * (values @ wts) * (0.5 * math.pi)
        if previous is not None:
            error = float(np.max(np.abs(current - previous)))
            if error <= spec.rel_tol * max(float(np.max(np.abs(current))), 1e-300):
                return current, error
        previous = current
        n_points *= 2
    logger.warning(f"edge quadrature at z={z} stopped at {n_points // 2} points, delta={error:.3e}")
    return previous, error


def integrate_torus_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                       spec: QuadratureSpec = DEFAULT_SPEC) -> QuadratureResult:
    """Periodic trapezoid over T², doubling the grid until successive values agree."""
    n_points = spec.initial_points
    previous: Optional[float] = None
    error = math.inf
    for _ in range(spec.max_doublings + 1):
        if n_points > config.TRAPEZOID_2D_MAX_POINTS:
            break
        grid = -math.pi + TWO_PI * np.arange(n_points) / n_points
        p1, p2 = np.meshgrid(grid, grid, indexing="ij")
        current = float(np.sum(f(p1, p2))) * (TWO_PI / n_points) ** 2
        if previous is not None:
            error = abs(current - previous)
            if error <= spec.rel_tol * max(abs(current), 1e-300):
                return QuadratureResult(current, error)
        previous = current
        n_points *= 2
    logger.warning(f"2D trapezoid stopped before convergence, delta={error:.3e}")
    return QuadratureResult(previous, error)


def _trapezoid_kernels(tables: np.ndarray, z: float, spec: QuadratureSpec) -> np.ndarray:
    out = np.empty(len(tables))
    for k, P in enumerate(tables):
        def integrand(p1, p2, P=P):
            energy = 4.0 - 2.0 * np.cos(p1) - 2.0 * np.cos(p2)
            return chebyshev.chebval2d(np.cos(p2), np.cos(p1), P) / (energy - z)
        out[k] = integrate_torus_2d(integrand, spec).value
    return out


def kernel_integrals(tables: np.ndarray, z: float, spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """∫_{T²} P_t(p)/(ℰ_0(p) − z) dp for a stack of cosine tables P_t."""
    tables = np.asarray(tables, dtype=float)
    if tables.ndim == 2:
        tables = tables[None]
    if spec.method == QuadratureMethod.TRAPEZOID_2D:
        return _trapezoid_kernels(tables, z, spec)
    if z == 0.0 or z == 8.0:
        return _edge_gauss_legendre(tables, z, spec)[0]
    return _graded_trapezoid(tables, z, spec)[0]


# ─── Green's entries ───

_QUAD_TABLES = np.stack([_ees_table(i, j) for i, j in QUADRATURE_ENTRIES])
_ALL_TABLES = np.stack([_ees_table(i, j) for i, j in ENTRY_ORDER])


@lru_cache(maxsize=config.GREENS_CACHE_SIZE)
def _greens_array(z: float, spec: QuadratureSpec, use_identities: bool) -> tuple[float, ...]:
    scale = 1.0 / (8.0 * math.pi ** 2)
    if not use_identities:
        values = kernel_integrals(_ALL_TABLES, z, spec) * scale
        return tuple(float(v) for v in values)
    a11, a13, a14, a33, a34, a44 = (float(v) for v in kernel_integrals(_QUAD_TABLES, z, spec) * scale)
    h = (4.0 - z) / 2.0
    a12 = h * a11 - 0.25
    a22 = h * a12
    a23 = h * a13
    a24 = h * a14
    return (a11, a12, a13, a14, a22, a23, a24, a33, a34, a44)


def greens_matrix(z: float, spec: QuadratureSpec = DEFAULT_SPEC,
                  use_identities: Optional[bool] = None) -> GreensMatrix:
    """All ten a_ij(z); a12, a22, a23, a24 come from the linear identities unless disabled."""
    _check_outside(z, allow_edges=False)
    if use_identities is None:
        use_identities = config.USE_RABCD_IDENTITIES
    values = _greens_array(float(z), spec, bool(use_identities))
    a = np.empty((4, 4))
    for (i, j), v in zip(ENTRY_ORDER, values):
        a[i - 1, j - 1] = a[j - 1, i - 1] = v
    return GreensMatrix(z=float(z), a=a)


def greens_entry(i: int, j: int, z: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """a_ij(z) = ½ ∫ α_i α_j /(ℰ_0 − z), by direct quadrature."""
    table = _ees_table(i, j)
    _check_outside(z, allow_edges=False)
    return float(kernel_integrals(table, z, spec)[0]) / (8.0 * math.pi ** 2)


# ─── oos and ea sectors ───

@lru_cache(maxsize=config.GREENS_CACHE_SIZE)
def _sector_array(z: float, spec: QuadratureSpec) -> tuple[float, float, float, float]:
    raw = kernel_integrals(SECTOR_TABLES, z, spec)
    c_oos = raw[0] / (2.0 * math.pi ** 2)
    g11, g12, g22 = raw[1:] / (8.0 * math.pi ** 2)
    return float(c_oos), float(g11), float(g12), float(g22)


def oos_integral(z: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """c_oos(z), so that Δ^oos(z) = 1 + μ c_oos(z); band edges allowed."""
    _check_outside(z, allow_edges=True)
    return _sector_array(float(z), spec)[0]


def ea_integrals(z: float, spec: QuadratureSpec = DEFAULT_SPEC) -> tuple[float, float, float]:
    """(g11, g12, g22) of the two ea kernels; band edges allowed."""
    _check_outside(z, allow_edges=True)
    return _sector_array(float(z), spec)[1:]
