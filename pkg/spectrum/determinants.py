"""
Sector determinants at K = 0 and the outward scan that turns their zeros into
eigenvalues.

A zero of Δ^sector(z) off the band [0, 8] is exactly a discrete eigenvalue of
the fiber Hamiltonian restricted to that sector. The scan walks away from a
band edge, brackets sign changes and polishes each bracket with brentq.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from spectrum import config
from spectrum.errors import RankBoundError, ScanConfigurationError, SpectralDomainError
from spectrum.lattice import reflect_couplings
from spectrum.models import (
    SECTOR_RANK,
    CouplingTriple,
    EigenvalueList,
    QuadratureSpec,
    ScanConfig,
    SectorTag,
    SideTag,
    SpectralReport,
)
from spectrum.torus_integrals import (
    DEFAULT_SPEC,
    asymptotic_constants,
    ea_integrals,
    greens_matrix,
    oos_integral,
)

logger = logging.getLogger(__name__)

BAND_LO = 0.0
BAND_HI = 8.0

SECTOR_ORDER = (SectorTag.EES, SectorTag.OOS, SectorTag.EA)
SIDE_ORDER = (SideTag.BELOW, SideTag.ABOVE)


# ─── Determinants ───

def delta_oos(mu: float, z: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    if mu == 0.0:
        return 1.0
    return 1.0 + mu * oos_integral(z, spec)


def delta_ea(lam: float, mu: float, z: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    if lam == 0.0 and mu == 0.0:
        return 1.0
    g11, g12, g22 = ea_integrals(z, spec)
    return (1.0 + lam * g11) * (1.0 + mu * g22) - lam * mu * g12 * g12


def coupling_diagonal(c: CouplingTriple) -> np.ndarray:
    """Column couplings (2γ, λ, μ, μ) of the ees determinant."""
    return np.array([2.0 * c.gamma, c.lam, c.mu, c.mu])


def _det3(m: np.ndarray) -> float:
    return (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))


def det4(m: np.ndarray) -> float:
    """4×4 determinant by cofactor expansion along the first row."""
    total = 0.0
    for j in range(4):
        if m[0, j] == 0.0:
            continue
        minor = np.delete(m[1:], j, axis=1)
        total += (-1.0) ** j * m[0, j] * _det3(minor)
    return float(total)


def delta_ees(c: CouplingTriple, z: float, spec: QuadratureSpec = DEFAULT_SPEC,
              use_identities: Optional[bool] = None) -> float:
    """det(I + A(z)·diag(2γ, λ, μ, μ)) with A the ees Green's matrix."""
    if c.gamma == 0.0 and c.lam == 0.0 and c.mu == 0.0:
        if 0.0 <= z <= 8.0:
            raise SpectralDomainError(f"spectral parameter z = {z} lies in the band [0, 8]")
        return 1.0
    A = greens_matrix(z, spec, use_identities).a
    return det4(np.eye(4) + A * coupling_diagonal(c)[None, :])


def sector_determinant(sector: SectorTag, c: CouplingTriple, z: float,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    if sector == SectorTag.OOS:
        return delta_oos(c.mu, z, spec)
    if sector == SectorTag.EA:
        return delta_ea(c.lam, c.mu, z, spec)
    return delta_ees(c, z, spec)


def sector_is_trivial(sector: SectorTag, c: CouplingTriple) -> bool:
    """The sector potential vanishes, so its determinant is identically 1."""
    if sector == SectorTag.OOS:
        return c.mu == 0.0
    if sector == SectorTag.EA:
        return c.lam == 0.0 and c.mu == 0.0
    return c.gamma == 0.0 and c.lam == 0.0 and c.mu == 0.0


def norm_bound(c: CouplingTriple) -> float:
    """Upper bound on ‖V‖; no eigenvalue lies farther than this from the band."""
    return abs(c.gamma) + 2.0 * abs(c.lam) + 4.0 * abs(c.mu)


# ─── Edge behaviour ───

def log_slope_coefficient(c: CouplingTriple, side: SideTag) -> float:
    """
    Q with Δ^ees(z) ≈ −Q·ln(dist)/(4π) + const as z approaches the band edge.

    The Green's matrix near the lower edge is C − w wᵀ ln(−z)/(8π); by the
    matrix determinant lemma Δ^ees is affine in the logarithm and
    Q = ½(det M − det(M − w wᵀ D)) with M = I + C D. Above the band the same
    formula applies to the reflected couplings.
    """
    if side == SideTag.ABOVE:
        c = reflect_couplings(c)
    C, w = asymptotic_constants()
    D = np.diag(coupling_diagonal(c))
    M = np.eye(4) + C @ D
    return 0.5 * (det4(M) - det4(M - np.outer(w, w) @ D))


def edge_constant_determinant(c: CouplingTriple, side: SideTag) -> float:
    if side == SideTag.ABOVE:
        c = reflect_couplings(c)
    C, _ = asymptotic_constants()
    return det4(np.eye(4) + C @ np.diag(coupling_diagonal(c)))


def _sign(x: float, tol: float = 0.0) -> int:
    if x > tol:
        return 1
    if x < -tol:
        return -1
    return 0


def edge_limit_sign(sector: SectorTag, c: CouplingTriple, side: SideTag,
                    spec: QuadratureSpec = DEFAULT_SPEC) -> int:
    """Sign of Δ^sector(z) as z tends to the band edge from outside; 0 when undetermined."""
    edge = BAND_LO if side == SideTag.BELOW else BAND_HI
    if sector in (SectorTag.OOS, SectorTag.EA):
        return _sign(sector_determinant(sector, c, edge, spec), 1e-12)
    q = log_slope_coefficient(c, side)
    if abs(q) > 1e-12:
        return _sign(q)
    return _sign(edge_constant_determinant(c, side), 1e-12)


# ─── Scan ───

def scan_distances(cfg: ScanConfig):
    """Distances from the edge: log-spaced up to initial_step, then growing steps capped at max_step."""
    d = cfg.edge_offset
    while d < cfg.initial_step:
        yield d
        d *= cfg.growth
    d = cfg.initial_step
    step = cfg.initial_step
    while True:
        yield d
        step = min(step * cfg.growth, cfg.max_step)
        d += step


def find_eigenvalues(sector: SectorTag, c: CouplingTriple, side: SideTag,
                     cfg: ScanConfig = ScanConfig(),
                     spec: QuadratureSpec = DEFAULT_SPEC) -> EigenvalueList:
    """Zeros of Δ^sector on one side of the band, sorted by z."""
    if sector_is_trivial(sector, c):
        return EigenvalueList(sector=sector, side=side)

    direction = -1.0 if side == SideTag.BELOW else 1.0
    edge = BAND_LO if side == SideTag.BELOW else BAND_HI

    def at(d: float) -> float:
        return sector_determinant(sector, c, edge + direction * d, spec)

    reach = norm_bound(c)
    roots: list[float] = []
    tangencies: list[float] = []
    history: list[tuple[float, float]] = []

    for steps, d in enumerate(scan_distances(cfg)):
        if steps > config.MAX_SCAN_STEPS:
            raise ScanConfigurationError(
                f"{sector.value}/{side.value} scan for {c.as_tuple()} did not reach the far field "
                f"after {config.MAX_SCAN_STEPS} steps"
            )
        value = at(d)
        if value == 0.0:
            roots.append(d)
        elif history and history[-1][1] != 0.0 and (value > 0.0) != (history[-1][1] > 0.0):
            roots.append(brentq(at, history[-1][0], d, xtol=cfg.bisect_tol))
        elif len(history) >= 2:
            tangent = _tangency(at, history[-2], history[-1], (d, value), cfg)
            if tangent is not None:
                tangencies.append(edge + direction * tangent)
        history.append((d, value))
        if d > reach + 1.0 or (d > reach and abs(value - 1.0) < cfg.far_cutoff):
            break

    unresolved = 0
    limit = edge_limit_sign(sector, c, side, spec)
    first = _sign(history[0][1])
    if limit != 0 and first != 0 and first != limit:
        unresolved = 1
        logger.warning(f"{sector.value}/{side.value} root of {c.as_tuple()} within {cfg.edge_offset:g} of the edge")

    values = sorted(edge + direction * d for d in roots)
    if tangencies:
        logger.warning(f"{sector.value}/{side.value} possible double roots of {c.as_tuple()} near {tangencies}")

    count = len(values) + unresolved
    if count > SECTOR_RANK[sector]:
        raise RankBoundError(
            f"{count} {side.value}-band zeros of Δ^{sector.value} for {c.as_tuple()} "
            f"exceed rank {SECTOR_RANK[sector]}"
        )

    return EigenvalueList(
        sector=sector,
        side=side,
        values=tuple(values),
        edge_unresolved=unresolved,
        tangency_flags=tuple(sorted(tangencies)),
        boundary_proximity=_near_boundary(roots, unresolved),
    )


def _tangency(at, left, middle, right, cfg: ScanConfig) -> Optional[float]:
    """Distance of a sign-preserving |Δ| dip below tangency_window, if any."""
    (d0, f0), (d1, f1), (d2, f2) = left, middle, right
    if not (abs(f1) < abs(f0) and abs(f1) < abs(f2)):
        return None
    if (f0 > 0.0) != (f1 > 0.0) or (f1 > 0.0) != (f2 > 0.0):
        return None
    # only dips that already look shallow are worth polishing
    if abs(f1) > math.sqrt(cfg.tangency_window):
        return None
    res = minimize_scalar(lambda d: abs(at(d)), bounds=(d0, d2), method="bounded",
                          options={"xatol": cfg.bisect_tol})
    if res.fun < cfg.tangency_window:
        return float(res.x)
    return None


def _near_boundary(distances: list[float], unresolved: int) -> bool:
    if unresolved:
        return True
    ds = sorted(distances)
    if ds and ds[0] < config.PROXIMITY_FLAG:
        return True
    return any(b - a < config.PROXIMITY_FLAG for a, b in zip(ds, ds[1:]))


def spectral_report(c: CouplingTriple, cfg: ScanConfig = ScanConfig(),
                    spec: QuadratureSpec = DEFAULT_SPEC,
                    workers: int = config.DEFAULT_THREADS) -> SpectralReport:
    """All six (sector, side) eigenvalue lists for one coupling triple."""
    pairs = [(sector, side) for side in SIDE_ORDER for sector in SECTOR_ORDER]
    if workers <= 1:
        lists = [find_eigenvalues(sector, c, side, cfg, spec) for sector, side in pairs]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(pairs))) as pool:
            lists = list(pool.map(lambda pair: find_eigenvalues(pair[0], c, pair[1], cfg, spec), pairs))
    report = SpectralReport(couplings=c, lists=tuple(lists))
    logger.debug(f"spectrum of {c.as_tuple()}: m={report.m} n={report.n}")
    return report
