"""
Finite-lattice oracle for the fiber Hamiltonian H(K) = H_0(K) + V.

Two unitarily equivalent builds are provided: the momentum grid
p_n = −π + 2πn/L with kernel v(p_m − p_n)/L², and the relative-coordinate
lattice Z_L² with hopping −cos(K_i/2) and the local potential v̂(x). Bosonic
states are the even functions f(p) = f(−p); every count below is taken on
that subspace.

On the even subspace H is a diagonal plus at most seven rank-one terms, so
counts outside the band follow exactly from the inertia of a 7×7 matrix.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh

from spectrum import config
from spectrum.errors import GridCapacityError, RankBoundError
from spectrum.lattice import (
    dispersion_grid,
    essential_band,
    even_rank_one_terms,
    minimal_image,
    position_potential,
    support_sites,
    symmetrize,
)
from spectrum.models import (
    TOTAL_RANK,
    CouplingTriple,
    EssentialBand,
    GridSpec,
    MinimaxTable,
    Quasimomentum,
    Representation,
    SectorTag,
    SideTag,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FiberMatrix:
    """Dense fiber matrix on all L² grid functions."""
    K: Quasimomentum
    couplings: CouplingTriple
    L: int
    representation: Representation
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EvenBasis:
    """
    Orthonormal basis of even grid functions: column a is
    scale[a]·(e_rep[a] + e_partner[a]), with partner = rep at the four fixed points.
    """
    L: int
    rep: np.ndarray
    partner: np.ndarray
    scale: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.rep)

    def project(self, matrix: np.ndarray) -> np.ndarray:
        r, q, s = self.rep, self.partner, self.scale
        block = (matrix[np.ix_(r, r)] + matrix[np.ix_(r, q)]
                 + matrix[np.ix_(q, r)] + matrix[np.ix_(q, q)])
        return block * np.outer(s, s)

    def lift(self, y: np.ndarray) -> np.ndarray:
        """Full-grid vectors (L², k) from even-basis coefficients (d, k)."""
        y = np.asarray(y)
        flat = y.ndim == 1
        y = y[:, None] if flat else y
        out = np.zeros((self.L * self.L, y.shape[1]), dtype=y.dtype)
        np.add.at(out, self.rep, y * self.scale[:, None])
        np.add.at(out, self.partner, y * self.scale[:, None])
        return out[:, 0] if flat else out


@dataclass(frozen=True)
class StructuredFiber:
    """Even-subspace fiber as diag(D) + U diag(weights) Uᵀ."""
    K: Quasimomentum
    couplings: CouplingTriple
    L: int
    diag: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray

    def _inertia_count(self, diag: np.ndarray, weights: np.ndarray, z: float) -> int:
        # #eig(D + U S Uᵀ) < z = n_+(S⁻¹ + Uᵀ(D − z)⁻¹U) − n_+(S⁻¹), valid for z < min D
        if len(weights) == 0:
            return 0
        scaled = self.vectors / (diag - z)[:, None]
        T = np.diag(1.0 / weights) + scaled.T @ self.vectors
        eig = np.linalg.eigvalsh(T)
        return int(np.sum(eig > 0.0)) - int(np.sum(weights > 0.0))

    def count_below(self, z: float) -> int:
        if z >= float(self.diag.min()):
            raise ValueError(f"inertia count needs z below the grid band, got {z}")
        return self._inertia_count(self.diag, self.weights, z)

    def count_above(self, z: float) -> int:
        if z <= float(self.diag.max()):
            raise ValueError(f"inertia count needs z above the grid band, got {z}")
        return self._inertia_count(-self.diag, -self.weights, -z)

    def _bisect(self, count, k: int, lo: float, hi: float, rising: bool, tol: float = 1e-13) -> float:
        """Point where count(x) ≥ k switches; rising when count grows with x."""
        for _ in range(200):
            if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
                break
            mid = 0.5 * (lo + hi)
            if (count(mid) >= k) == rising:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def eigenvalues_below(self, cut: float) -> list[float]:
        """Ascending eigenvalues smaller than cut (cut below the grid band)."""
        floor = cut - _weight_norm(self.couplings) - 1.0
        return [self._bisect(self.count_below, k, floor, cut, rising=True)
                for k in range(1, self.count_below(cut) + 1)]

    def eigenvalues_above(self, cut: float) -> list[float]:
        """Ascending eigenvalues larger than cut (cut above the grid band)."""
        ceiling = cut + _weight_norm(self.couplings) + 1.0
        values = [self._bisect(self.count_above, k, cut, ceiling, rising=False)
                  for k in range(1, self.count_above(cut) + 1)]
        return sorted(values)


def _weight_norm(c: CouplingTriple) -> float:
    return abs(c.gamma) + 2.0 * abs(c.lam) + 4.0 * abs(c.mu)


# ─── Grids ───

def momentum_grid(L: int) -> np.ndarray:
    return -math.pi + 2.0 * math.pi * np.arange(L) / L


def _flat_momenta(L: int) -> tuple[np.ndarray, np.ndarray]:
    grid = momentum_grid(L)
    p1, p2 = np.meshgrid(grid, grid, indexing="ij")
    return p1.ravel(), p2.ravel()


def even_subspace_basis(L: int) -> EvenBasis:
    """Basis of functions with f(p) = f(−p); the same index map serves x → −x on Z_L²."""
    neg = (-np.arange(L)) % L
    idx = np.arange(L * L)
    n1, n2 = np.divmod(idx, L)
    mirror = neg[n1] * L + neg[n2]
    keep = idx <= mirror
    rep, partner = idx[keep], mirror[keep]
    scale = np.where(rep == partner, 0.5, 1.0 / math.sqrt(2.0))
    return EvenBasis(L=L, rep=rep, partner=partner, scale=scale)


def grid_edge_margin(K: Quasimomentum, L: int) -> float:
    """Ten times the dispersion step next to the band edge."""
    c = max(math.cos(K.k1 / 2.0), math.cos(K.k2 / 2.0))
    return max(10.0 * 2.0 * c * (1.0 - math.cos(2.0 * math.pi / L)), config.MARGIN_FLOOR)


# ─── Builders ───

def _full_rank_terms(p1: np.ndarray, p2: np.ndarray, c: CouplingTriple):
    """All thirteen separable terms of v(p − q) on the full grid."""
    c1, s1, c2, s2 = np.cos(p1), np.sin(p1), np.cos(p2), np.sin(p2)
    vectors = [np.ones_like(p1), c1, s1, c2, s2,
               np.cos(2.0 * p1), np.sin(2.0 * p1), np.cos(2.0 * p2), np.sin(2.0 * p2),
               c1 * c2, c1 * s2, s1 * c2, s1 * s2]
    weights = [c.gamma] + [c.lam] * 4 + [c.mu] * 4 + [2.0 * c.mu] * 4
    return np.stack(vectors, axis=1), np.array(weights)


def _check_grid(grid: GridSpec) -> None:
    if grid.L * grid.L > config.DENSE_CAP:
        raise GridCapacityError(f"dense fiber of dimension {grid.L ** 2} exceeds cap {config.DENSE_CAP}")


def build_momentum_fiber(K: Quasimomentum, c: CouplingTriple, grid: GridSpec) -> FiberMatrix:
    _check_grid(grid)
    L = grid.L
    p1, p2 = _flat_momenta(L)
    U, w = _full_rank_terms(p1, p2, c)
    matrix = (U * (w / (L * L))) @ U.T
    matrix[np.diag_indices_from(matrix)] += dispersion_grid(K, p1, p2)
    return FiberMatrix(K=K, couplings=c, L=L, representation=Representation.MOMENTUM, matrix=matrix)


def build_position_fiber(K: Quasimomentum, c: CouplingTriple, grid: GridSpec) -> FiberMatrix:
    _check_grid(grid)
    L = grid.L
    ring = np.roll(np.eye(L), 1, axis=1) + np.roll(np.eye(L), -1, axis=1)
    eye = np.eye(L)
    matrix = (4.0 * np.eye(L * L)
              - math.cos(K.k1 / 2.0) * np.kron(ring, eye)
              - math.cos(K.k2 / 2.0) * np.kron(eye, ring))
    for x in support_sites():
        x1, x2 = minimal_image(x, L)
        i = (x1 % L) * L + (x2 % L)
        matrix[i, i] += position_potential(x, c)
    return FiberMatrix(K=K, couplings=c, L=L, representation=Representation.POSITION, matrix=matrix)


def build_fiber(K: Quasimomentum, c: CouplingTriple, grid: GridSpec) -> FiberMatrix:
    if grid.representation == Representation.POSITION:
        return build_position_fiber(K, c, grid)
    return build_momentum_fiber(K, c, grid)


def build_structured_fiber(K: Quasimomentum, c: CouplingTriple, L: int) -> StructuredFiber:
    """Diagonal ℰ_K plus the seven even rank-one terms, in the even basis."""
    basis = even_subspace_basis(L)
    p1, p2 = _flat_momenta(L)
    p1, p2 = p1[basis.rep], p2[basis.rep]
    vectors, weights = even_rank_one_terms(p1, p2, c)
    keep = [k for k, s in enumerate(weights) if s != 0.0]
    U = np.stack([vectors[k] * 2.0 * basis.scale for k in keep], axis=1) if keep else np.zeros((len(p1), 0))
    S = np.array([weights[k] for k in keep]) / (L * L)
    return StructuredFiber(K=K, couplings=c, L=L, diag=dispersion_grid(K, p1, p2), vectors=U, weights=S)


# ─── Spectra ───

def eigenvalues_dense(M: FiberMatrix, even: bool = False) -> np.ndarray:
    """All eigenvalues of the fiber (or of its even part), ascending."""
    if M.dimension > config.DENSE_CAP:
        raise GridCapacityError(f"dense fiber of dimension {M.dimension} exceeds cap {config.DENSE_CAP}")
    matrix = even_subspace_basis(M.L).project(M.matrix) if even else M.matrix
    return eigh(matrix, eigvals_only=True)


def count_outside_band(eigs, band: EssentialBand, margin: float) -> tuple[int, int]:
    eigs = np.asarray(eigs)
    m = int(np.sum(eigs < band.lo - margin))
    n = int(np.sum(eigs > band.hi + margin))
    if m + n > TOTAL_RANK:
        raise RankBoundError(f"{m}+{n} eigenvalues outside the band exceed rank {TOTAL_RANK}")
    return m, n


def oracle_counts(K: Quasimomentum, c: CouplingTriple, L: int, margin: Optional[float] = None) -> tuple[int, int]:
    """(m, n) of the even fiber at K from the structured inertia count."""
    fiber = build_structured_fiber(K, c, L)
    band = essential_band(K)
    margin = grid_edge_margin(K, L) if margin is None else margin
    m = fiber.count_below(band.lo - margin)
    n = fiber.count_above(band.hi + margin)
    if m + n > TOTAL_RANK:
        raise RankBoundError(f"{m}+{n} eigenvalues outside the band exceed rank {TOTAL_RANK}")
    return m, n


def oracle_eigenvalues(K: Quasimomentum, c: CouplingTriple, L: int,
                       margin: Optional[float] = None) -> tuple[list[float], list[float]]:
    fiber = build_structured_fiber(K, c, L)
    band = essential_band(K)
    margin = grid_edge_margin(K, L) if margin is None else margin
    return fiber.eigenvalues_below(band.lo - margin), fiber.eigenvalues_above(band.hi + margin)


def minimax_table(K: Quasimomentum, c: CouplingTriple, L: int) -> MinimaxTable:
    """First seven variational values e_n ≤ ℰ_min(K) and E_n ≥ ℰ_max(K)."""
    fiber = build_structured_fiber(K, c, L)
    band = essential_band(K)
    below = fiber.eigenvalues_below(float(fiber.diag.min()) - 1e-12)
    above = fiber.eigenvalues_above(float(fiber.diag.max()) + 1e-12)
    e = [min(below[n], band.lo) if n < len(below) else band.lo for n in range(TOTAL_RANK)]
    top = sorted(above, reverse=True)
    E = [max(top[n], band.hi) if n < len(top) else band.hi for n in range(TOTAL_RANK)]
    return MinimaxTable(K=K, e=tuple(e), E=tuple(E), band=band)


# ─── Sector projection at K = 0 ───

def _sector_weights(f: np.ndarray, L: int) -> dict[SectorTag, float]:
    grid = f.reshape(L, L)
    total = float(np.sum(grid * grid))
    return {tag: float(np.sum(symmetrize(grid, tag) ** 2)) / total for tag in SectorTag}


def sector_project(vector: np.ndarray, L: int) -> Optional[SectorTag]:
    """Sector carrying at least SECTOR_WEIGHT_MIN of the norm, or None if ambiguous."""
    weights = _sector_weights(np.asarray(vector, dtype=float), L)
    tag, weight = max(weights.items(), key=lambda kv: kv[1])
    if weight >= config.SECTOR_WEIGHT_MIN:
        return tag
    logger.warning(f"ambiguous sector projection {{{', '.join(f'{t.value}: {w:.3f}' for t, w in weights.items())}}}")
    return None


def sector_project_cluster(vectors: np.ndarray, L: int) -> list[SectorTag]:
    """Tags of a degenerate cluster (orthonormal columns), as a multiset."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    tags: list[SectorTag] = []
    for tag in SectorTag:
        traced = sum(float(np.sum(symmetrize(V[:, k].reshape(L, L), tag) ** 2)) for k in range(V.shape[1]))
        tags.extend([tag] * int(round(traced)))
    return tags


def sector_counts(c: CouplingTriple, L: int, margin: Optional[float] = None) -> dict[tuple[SectorTag, SideTag], int]:
    """Per-sector counts at K = 0 from dense eigenvectors of the even fiber."""
    K = Quasimomentum()
    fiber = build_momentum_fiber(K, c, GridSpec(L=L))
    basis = even_subspace_basis(L)
    values, vectors = eigh(basis.project(fiber.matrix))
    band = essential_band(K)
    margin = grid_edge_margin(K, L) if margin is None else margin
    counts = {(tag, side): 0 for tag in SectorTag for side in SideTag}
    for side, mask in ((SideTag.BELOW, values < band.lo - margin), (SideTag.ABOVE, values > band.hi + margin)):
        idx = np.flatnonzero(mask)
        start = 0
        while start < len(idx):
            stop = start + 1
            while stop < len(idx) and values[idx[stop]] - values[idx[stop - 1]] < config.DEGENERACY_TOL:
                stop += 1
            cluster = basis.lift(vectors[:, idx[start:stop]])
            for tag in sector_project_cluster(cluster, L):
                counts[(tag, side)] += 1
            start = stop
    return counts


def check_variational_monotonicity(c: CouplingTriple, K: Quasimomentum, L: int,
                                   gammas) -> tuple[bool, float]:
    """Lowering γ never raises any e_n; returns (passed, worst violation)."""
    worst = 0.0
    previous: Optional[tuple[float, ...]] = None
    for gamma in sorted(gammas, reverse=True):
        table = minimax_table(K, CouplingTriple.of(gamma, c.lam, c.mu), L)
        if previous is not None:
            worst = max(worst, max(a - b for a, b in zip(table.e, previous)))
        previous = table.e
    return worst <= 1e-12, worst
