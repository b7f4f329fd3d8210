"""
Lattice core: dispersion relations, band geometry, potential symbols and the
sector basis functions of the even subspace.

Scalar functions take the pydantic value types; the *_grid variants take
numpy arrays and are what the integrators and the oracle call in bulk.
"""
import math

import numpy as np

from spectrum.errors import SectorIndexError
from spectrum.models import (
    CouplingTriple,
    EssentialBand,
    MomentumPoint,
    Quasimomentum,
    SectorTag,
    wrap_angle,  # noqa: F401  re-exported
)

TWO_PI = 2.0 * math.pi

# |x| = 1 shell and the 8-site |x| = 2 shell, including the diagonal neighbours
NEAREST = ((1, 0), (-1, 0), (0, 1), (0, -1))
NEXT_NEAREST = ((2, 0), (-2, 0), (0, 2), (0, -2), (1, 1), (1, -1), (-1, 1), (-1, -1))


def support_sites() -> list[tuple[int, int]]:
    """The 13 relative positions where the pair potential is non-zero."""
    return [(0, 0), *NEAREST, *NEXT_NEAREST]


def reflect_couplings(c: CouplingTriple) -> CouplingTriple:
    """Bipartite partner: the above-band problem of c is the below-band problem of −c."""
    return c.reflected()


# ─── Dispersion ───

def single_dispersion(p: MomentumPoint) -> float:
    return (1.0 - math.cos(p.p1)) + (1.0 - math.cos(p.p2))


def fiber_dispersion(K: Quasimomentum, p: MomentumPoint) -> float:
    return 2.0 * ((1.0 - math.cos(K.k1 / 2.0) * math.cos(p.p1))
                  + (1.0 - math.cos(K.k2 / 2.0) * math.cos(p.p2)))


def dispersion_grid(K: Quasimomentum, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    return 2.0 * ((1.0 - math.cos(K.k1 / 2.0) * np.cos(p1))
                  + (1.0 - math.cos(K.k2 / 2.0) * np.cos(p2)))


def essential_band(K: Quasimomentum) -> EssentialBand:
    c1 = math.cos(K.k1 / 2.0)
    c2 = math.cos(K.k2 / 2.0)
    # K_i = −π gives cos = 6e-17 rather than 0; clamp so the degenerate band stays a point
    c1 = 0.0 if abs(c1) < 1e-15 else c1
    c2 = 0.0 if abs(c2) < 1e-15 else c2
    return EssentialBand(lo=2.0 * ((1.0 - c1) + (1.0 - c2)), hi=2.0 * ((1.0 + c1) + (1.0 + c2)))


# ─── Potential ───

def potential_symbol(p: MomentumPoint, c: CouplingTriple) -> float:
    return float(potential_symbol_grid(np.asarray(p.p1), np.asarray(p.p2), c))


def potential_symbol_grid(p1: np.ndarray, p2: np.ndarray, c: CouplingTriple) -> np.ndarray:
    c1, c2 = np.cos(p1), np.cos(p2)
    return (c.gamma
            + c.lam * (c1 + c2)
            + c.mu * (np.cos(2.0 * p1) + np.cos(2.0 * p2))
            + 2.0 * c.mu * c1 * c2)


def position_potential(x: tuple[int, int], c: CouplingTriple) -> float:
    r = abs(x[0]) + abs(x[1])
    if r == 0:
        return c.gamma
    if r == 1:
        return c.lam / 2.0
    if r == 2:
        return c.mu / 2.0
    return 0.0


def minimal_image(x: tuple[int, int], L: int) -> tuple[int, int]:
    """Representative of x on Z_L² closest to the origin."""
    def fold(a: int) -> int:
        a = a % L
        return a - L if a > L // 2 else a
    return fold(x[0]), fold(x[1])


def even_rank_one_terms(p1: np.ndarray, p2: np.ndarray, c: CouplingTriple):
    """
    Rank-one decomposition of the potential on even functions.

    Returns (vectors, weights): seven kernel vectors u_k(p) and weights s_k with
    v(p − q) = Σ s_k u_k(p) u_k(q) on the even subspace.
    """
    c1, c2 = np.cos(p1), np.cos(p2)
    vectors = [
        np.ones_like(p1),
        c1,
        c2,
        np.cos(2.0 * p1),
        np.cos(2.0 * p2),
        c1 * c2,
        np.sin(p1) * np.sin(p2),
    ]
    weights = [c.gamma, c.lam, c.lam, c.mu, c.mu, 2.0 * c.mu, 2.0 * c.mu]
    return vectors, weights


# ─── Sector bases ───

def sector_basis_ees(i: int, p: MomentumPoint) -> float:
    """Orthonormal basis α_i of the ees part of the potential range."""
    c1, c2 = math.cos(p.p1), math.cos(p.p2)
    if i == 1:
        return 1.0 / TWO_PI
    if i == 2:
        return (c1 + c2) / TWO_PI
    if i == 3:
        return (math.cos(2.0 * p.p1) + math.cos(2.0 * p.p2)) / TWO_PI
    if i == 4:
        return c1 * c2 / math.pi
    raise SectorIndexError(f"ees basis index must be 1..4, got {i}")


def sector_kernel(tag: SectorTag, j: int, p: MomentumPoint) -> float:
    """Unnormalised kernel factor of the oos and ea sector potentials."""
    if tag == SectorTag.EES:
        return sector_basis_ees(j, p)
    if tag == SectorTag.OOS and j == 1:
        return math.sin(p.p1) * math.sin(p.p2)
    if tag == SectorTag.EA and j == 1:
        return math.cos(p.p1) - math.cos(p.p2)
    if tag == SectorTag.EA and j == 2:
        return math.cos(2.0 * p.p1) - math.cos(2.0 * p.p2)
    raise SectorIndexError(f"no kernel {j} in sector {tag.value}")


def symmetrize(f: np.ndarray, tag: SectorTag) -> np.ndarray:
    """
    Sector component of an even grid function f[n1, n2] on p_n = −π + 2πn/L.

    Uses the index maps p → (p2, p1) and p → (p1, −p2); the grid is closed
    under both because it contains −π and 0.
    """
    L = f.shape[0]
    neg = (-np.arange(L)) % L           # index of −p_n
    swapped = f.T
    flipped = f[:, neg]                 # f(p1, −p2)
    flipped_swapped = flipped.T         # f(−p2, p1)
    if tag == SectorTag.EES:
        return (f + swapped + flipped + flipped_swapped) / 4.0
    if tag == SectorTag.OOS:
        return (f + swapped - flipped - flipped_swapped) / 4.0
    return (f - swapped) / 2.0
