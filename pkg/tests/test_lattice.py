"""
Unit tests for the lattice core: dispersion, band edges, potential symbol and sector bases.
"""
import math
import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from spectrum.errors import SectorIndexError
from spectrum.lattice import (
    essential_band,
    even_rank_one_terms,
    fiber_dispersion,
    minimal_image,
    position_potential,
    potential_symbol,
    potential_symbol_grid,
    reflect_couplings,
    sector_basis_ees,
    sector_kernel,
    single_dispersion,
    support_sites,
    symmetrize,
    wrap_angle,
)
from spectrum.models import CouplingTriple, MomentumPoint, Quasimomentum, SectorTag


class TestDispersion:
    """Free fiber dispersion and the essential band."""

    def test_band_at_zero_is_zero_to_eight(self):
        band = essential_band(Quasimomentum())
        assert (band.lo, band.hi) == (0.0, 8.0), f"Got {band}"

    def test_band_collapses_at_corner(self):
        band = essential_band(Quasimomentum(k1=math.pi, k2=math.pi))
        assert band.lo == pytest.approx(4.0) and band.hi == pytest.approx(4.0)
        assert band.width == pytest.approx(0.0, abs=1e-12)

    def test_band_symmetric_about_four(self):
        band = essential_band(Quasimomentum(k1=0.7, k2=-2.1))
        assert band.lo + band.hi == pytest.approx(8.0), f"Band not symmetric: {band}"

    def test_fiber_dispersion_matches_two_particle_sum(self):
        K = Quasimomentum(k1=0.4, k2=1.3)
        p = MomentumPoint(p1=0.9, p2=-0.2)
        q1 = MomentumPoint(p1=K.k1 / 2 + p.p1, p2=K.k2 / 2 + p.p2)
        q2 = MomentumPoint(p1=K.k1 / 2 - p.p1, p2=K.k2 / 2 - p.p2)
        expected = single_dispersion(q1) + single_dispersion(q2)
        assert fiber_dispersion(K, p) == pytest.approx(expected, rel=1e-12)

    def test_dispersion_range_at_zero(self):
        K = Quasimomentum()
        assert fiber_dispersion(K, MomentumPoint(p1=0.0, p2=0.0)) == pytest.approx(0.0)
        assert fiber_dispersion(K, MomentumPoint(p1=math.pi, p2=math.pi)) == pytest.approx(8.0)


class TestPotential:
    """Potential symbol and its position-space form."""

    def test_symbol_at_origin(self):
        c = CouplingTriple.of(1.5, -2.0, 0.5)
        # γ + 2λ + 2μ + 2μ
        expected = 1.5 - 4.0 + 4 * 0.5
        assert potential_symbol(MomentumPoint(p1=0.0, p2=0.0), c) == pytest.approx(expected)

    def test_position_potential_shells(self):
        c = CouplingTriple.of(3.0, 2.0, -4.0)
        assert position_potential((0, 0), c) == 3.0
        assert all(position_potential(x, c) == 1.0 for x in [(1, 0), (0, -1)])
        assert all(position_potential(x, c) == -2.0 for x in [(2, 0), (1, 1), (-1, 1)])
        assert position_potential((2, 1), c) == 0.0

    def test_support_has_thirteen_sites(self):
        sites = support_sites()
        assert len(sites) == 13 and len(set(sites)) == 13

    def test_symbol_is_fourier_transform_of_position_potential(self):
        c = CouplingTriple.of(0.3, -1.1, 0.7)
        p1, p2 = 0.37, -1.9
        series = sum(position_potential(x, c) * math.cos(x[0] * p1 + x[1] * p2) for x in support_sites())
        assert potential_symbol(MomentumPoint(p1=p1, p2=p2), c) == pytest.approx(series, rel=1e-12)

    def test_even_rank_one_terms_reproduce_even_part(self):
        c = CouplingTriple.of(0.8, 1.2, -0.6)
        rng = np.random.default_rng(7)
        p = rng.uniform(-math.pi, math.pi, size=(2, 6))
        q = rng.uniform(-math.pi, math.pi, size=(2, 6))
        vp, w = even_rank_one_terms(p[0], p[1], c)
        vq, _ = even_rank_one_terms(q[0], q[1], c)
        separable = sum(s * a * b for s, a, b in zip(w, vp, vq))
        even = 0.5 * (potential_symbol_grid(p[0] - q[0], p[1] - q[1], c)
                      + potential_symbol_grid(p[0] + q[0], p[1] + q[1], c))
        assert np.allclose(separable, even, atol=1e-12), f"max err {np.max(np.abs(separable - even))}"

    def test_reflection_negates_all_couplings(self):
        c = reflect_couplings(CouplingTriple.of(1.0, -2.0, 3.0))
        assert c.as_tuple() == (-1.0, 2.0, -3.0)


class TestAngles:
    """Angle reduction and minimal images."""

    def test_wrap_angle_half_open(self):
        assert wrap_angle(math.pi) == pytest.approx(-math.pi)
        assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)

    def test_wrap_angle_arrays_match_models(self):
        xs = np.array([-7.0, -math.pi, 0.3, math.pi, 9.5])
        wrapped = wrap_angle(xs)
        assert np.all((wrapped >= -math.pi) & (wrapped < math.pi))
        for x, w in zip(xs, wrapped):
            assert Quasimomentum(k1=float(x)).k1 == pytest.approx(w, abs=1e-15)

    def test_quasimomentum_is_reduced(self):
        K = Quasimomentum(k1=2 * math.pi + 0.5, k2=-math.pi)
        assert K.k1 == pytest.approx(0.5) and K.k2 == pytest.approx(-math.pi)

    def test_minimal_image(self):
        assert minimal_image((7, -1), 8) == (-1, -1)
        assert minimal_image((4, 3), 8) == (4, 3)


class TestSectorBases:
    """Orthonormal ees basis and sector projections."""

    def test_ees_basis_orthonormal(self):
        L = 64
        grid = -math.pi + 2 * math.pi * np.arange(L) / L
        cell = (2 * math.pi / L) ** 2
        values = np.array([[[sector_basis_ees(i, MomentumPoint(p1=a, p2=b)) for b in grid] for a in grid]
                           for i in range(1, 5)])
        gram = np.einsum("iab,jab->ij", values, values) * cell
        assert np.allclose(gram, np.eye(4), atol=1e-12), f"Gram matrix:\n{gram}"

    def test_bad_index_raises(self):
        with pytest.raises(SectorIndexError):
            sector_basis_ees(5, MomentumPoint(p1=0.0, p2=0.0))
        with pytest.raises(SectorIndexError):
            sector_kernel(SectorTag.OOS, 2, MomentumPoint(p1=0.0, p2=0.0))

    def test_symmetrize_splits_sector_functions(self):
        L = 16
        grid = -math.pi + 2 * math.pi * np.arange(L) / L
        P1, P2 = np.meshgrid(grid, grid, indexing="ij")
        oos = np.sin(P1) * np.sin(P2)
        ea = np.cos(P1) - np.cos(P2)
        ees = np.cos(P1) * np.cos(P2)
        assert np.allclose(symmetrize(oos, SectorTag.OOS), oos)
        assert np.allclose(symmetrize(oos, SectorTag.EES), 0.0)
        assert np.allclose(symmetrize(ea, SectorTag.EA), ea)
        assert np.allclose(symmetrize(ees, SectorTag.EES), ees)
        assert np.allclose(symmetrize(ees, SectorTag.EA), 0.0)
