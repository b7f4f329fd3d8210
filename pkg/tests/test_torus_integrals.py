"""
Unit tests for the torus integrals: Poisson moments, Green's entries, edge constants
and threshold asymptotics.
"""
import math
import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from spectrum.errors import SectorIndexError, SpectralDomainError
from spectrum.models import QuadratureMethod, QuadratureSpec, SideTag
from spectrum.torus_integrals import (
    ENTRY_ORDER,
    _ees_table,
    asymptotic_reference,
    ea_integrals,
    edge_constants,
    greens_entry,
    greens_matrix,
    integrate_torus_2d,
    kernel_integrals,
    oos_integral,
    parity_signs,
    poisson_moment,
)


class TestPoissonMoments:
    """Closed-form 1D moments."""

    def test_zeroth_moment(self):
        assert poisson_moment(2.0, 0) == pytest.approx(2 * math.pi / math.sqrt(3.0), rel=1e-14)

    def test_first_moment(self):
        beta = 2.0 - math.sqrt(3.0)
        assert poisson_moment(2.0, 1) == pytest.approx(2 * math.pi * beta / math.sqrt(3.0), rel=1e-13)

    def test_moment_matches_trapezoid(self):
        t = -math.pi + 2 * math.pi * np.arange(512) / 512
        numeric = float(np.sum(np.cos(3 * t) / (1.3 - np.cos(t)))) * (2 * math.pi / 512)
        assert poisson_moment(1.3, 3) == pytest.approx(numeric, rel=1e-10)

    def test_rejects_band_values(self):
        with pytest.raises(SpectralDomainError):
            poisson_moment(1.0, 0)
        with pytest.raises(SectorIndexError):
            poisson_moment(2.0, -1)


class TestGreensMatrix:
    """a_ij(z) outside the band."""

    def test_symmetric(self):
        G = greens_matrix(-0.7)
        assert np.allclose(G.a, G.a.T), "Green's matrix should be symmetric"

    def test_inside_band_raises(self):
        for z in (0.0, 3.0, 8.0):
            with pytest.raises(SpectralDomainError):
                greens_matrix(z)

    def test_identities_match_direct_quadrature(self):
        z = -0.4
        with_ids = greens_matrix(z, use_identities=True).a
        direct = greens_matrix(z, use_identities=False).a
        assert np.allclose(with_ids, direct, rtol=1e-9, atol=1e-12), f"max err {np.max(np.abs(with_ids - direct))}"

    def test_entry_matches_matrix(self):
        G = greens_matrix(-2.5, use_identities=False)
        for i, j in ENTRY_ORDER:
            assert greens_entry(i, j, -2.5) == pytest.approx(G.entry(i, j), rel=1e-10)

    def test_reflection_across_band_centre(self):
        sigma = parity_signs()
        below = greens_matrix(-0.3).a
        above = greens_matrix(8.3).a
        assert np.allclose(below, -np.outer(sigma, sigma) * above, rtol=1e-9, atol=1e-12)

    def test_far_field_a11(self):
        z = -1e6
        expected = (1 / (2 * abs(z))) * (1 - 4 / abs(z) + 20 / z ** 2)
        assert greens_matrix(z).entry(1, 1) == pytest.approx(expected, rel=1e-12)

    def test_semi_analytic_matches_2d_trapezoid(self):
        spec_2d = QuadratureSpec(method=QuadratureMethod.TRAPEZOID_2D, rel_tol=1e-11)
        table = _ees_table(3, 4)
        fast = kernel_integrals(table, -1.5)[0]
        slow = kernel_integrals(table, -1.5, spec_2d)[0]
        assert fast == pytest.approx(slow, rel=1e-9)

    def test_integrate_torus_2d_constant(self):
        result = integrate_torus_2d(lambda p1, p2: np.ones_like(p1))
        assert result.value == pytest.approx(4 * math.pi ** 2)


class TestThresholds:
    """Band-edge constants and the logarithmic asymptote."""

    def test_oos_edge_constant(self):
        assert oos_integral(0.0) == pytest.approx(edge_constants()["c_oos"], rel=1e-9)

    def test_ea_edge_constants(self):
        g11, g12, g22 = ea_integrals(0.0)
        k = edge_constants()
        assert g11 == pytest.approx(k["g11"], rel=1e-9)
        assert g12 == pytest.approx(k["g12"], rel=1e-9)
        assert g22 == pytest.approx(k["g22"], rel=1e-9)

    def test_oos_edge_value_makes_threshold_root(self):
        s = 3 * math.pi / (3 * math.pi - 8)
        assert 1.0 - s * oos_integral(0.0) == pytest.approx(0.0, abs=1e-9)

    def test_oos_reflection(self):
        assert oos_integral(8.0) == pytest.approx(-oos_integral(0.0), rel=1e-9)

    @pytest.mark.parametrize("entry", [(1, 1), (1, 2), (2, 4), (3, 3), (4, 4)])
    def test_below_band_asymptote(self, entry):
        z = -1e-7
        value = greens_matrix(z).entry(*entry)
        ref = asymptotic_reference(entry, SideTag.BELOW, z)
        assert value == pytest.approx(ref, abs=1e-4), f"a{entry} = {value}, asymptote {ref}"

    def test_above_band_asymptote(self):
        z = 8.0 + 1e-7
        value = greens_matrix(z).entry(1, 2)
        ref = asymptotic_reference((1, 2), SideTag.ABOVE, z)
        assert value == pytest.approx(ref, abs=1e-4)

    def test_asymptote_bad_index(self):
        with pytest.raises(SectorIndexError):
            asymptotic_reference((0, 1), SideTag.BELOW, -1.0)
