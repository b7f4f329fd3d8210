"""
Unit tests for the sector determinants and the outward eigenvalue scan.
"""
import math
import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from spectrum.classifier import big_q
from spectrum.determinants import (
    delta_ea,
    delta_ees,
    delta_oos,
    det4,
    edge_limit_sign,
    find_eigenvalues,
    log_slope_coefficient,
    norm_bound,
    scan_distances,
    sector_determinant,
    sector_is_trivial,
    spectral_report,
)
from spectrum.errors import SpectralDomainError
from spectrum.models import CouplingTriple, ScanConfig, SectorTag, SideTag, Sign


class TestDeterminants:
    """Closed forms of the three sector determinants."""

    def test_det4_matches_numpy(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(4, 4))
        assert det4(m) == pytest.approx(np.linalg.det(m), rel=1e-12)

    def test_trivial_couplings_give_one(self):
        zero = CouplingTriple()
        assert delta_ees(zero, -1.0) == 1.0
        assert delta_oos(0.0, -1.0) == 1.0
        assert delta_ea(0.0, 0.0, 9.0) == 1.0

    def test_trivial_ees_still_checks_band(self):
        with pytest.raises(SpectralDomainError):
            delta_ees(CouplingTriple(), 4.0)

    def test_far_field_tends_to_one(self):
        c = CouplingTriple.of(2.0, -3.0, 1.5)
        for sector in SectorTag:
            value = sector_determinant(sector, c, -1e6)
            assert value == pytest.approx(1.0, abs=1e-4), f"{sector.value}: Δ(-1e6) = {value}"

    def test_ees_reflection(self):
        c = CouplingTriple.of(1.2, -0.7, 0.4)
        below = delta_ees(c, -0.6)
        above = delta_ees(c.reflected(), 8.6)
        assert below == pytest.approx(above, rel=1e-9)

    def test_sector_is_trivial(self):
        c = CouplingTriple.of(1.0, 0.0, 0.0)
        assert sector_is_trivial(SectorTag.OOS, c)
        assert sector_is_trivial(SectorTag.EA, c)
        assert not sector_is_trivial(SectorTag.EES, c)

    def test_norm_bound(self):
        assert norm_bound(CouplingTriple.of(-1.0, 2.0, -0.5)) == pytest.approx(7.0)


class TestEdgeBehaviour:
    """Logarithmic slope of Δ^ees at the band edges."""

    def test_slope_of_pure_on_site(self):
        assert log_slope_coefficient(CouplingTriple.of(3.0, 0.0, 0.0), SideTag.BELOW) == pytest.approx(3.0)

    @pytest.mark.parametrize("triple", [(1.0, -2.0, 0.5), (-3.0, 4.0, -1.0), (0.5, 0.5, 2.0)])
    def test_slope_matches_cubic(self, triple):
        c = CouplingTriple.of(*triple)
        assert log_slope_coefficient(c, SideTag.BELOW) == pytest.approx(big_q(c, Sign.MINUS), rel=1e-9)
        assert log_slope_coefficient(c, SideTag.ABOVE) == pytest.approx(big_q(c, Sign.PLUS), rel=1e-9)

    def test_edge_sign_of_attractive_on_site(self):
        # Δ^ees → −∞ at the lower edge for γ < 0
        assert edge_limit_sign(SectorTag.EES, CouplingTriple.of(-1.0, 0.0, 0.0), SideTag.BELOW) == -1


class TestScan:
    """Distance schedule and eigenvalue search."""

    def test_distances_increase_and_cover(self):
        cfg = ScanConfig()
        ds = []
        for d in scan_distances(cfg):
            ds.append(d)
            if d > 10.0:
                break
        assert ds[0] == cfg.edge_offset
        assert all(b > a for a, b in zip(ds, ds[1:])), "distances must be strictly increasing"
        steps = [b - a for a, b in zip(ds, ds[1:]) if a >= cfg.initial_step]
        assert max(steps) <= cfg.max_step + 1e-12

    def test_trivial_sector_has_no_roots(self):
        result = find_eigenvalues(SectorTag.OOS, CouplingTriple.of(5.0, 1.0, 0.0), SideTag.BELOW)
        assert result.count == 0 and result.values == ()

    def test_weak_repulsive_on_site_binds_above(self):
        c = CouplingTriple.of(1.0, 0.0, 0.0)
        above = find_eigenvalues(SectorTag.EES, c, SideTag.ABOVE)
        below = find_eigenvalues(SectorTag.EES, c, SideTag.BELOW)
        assert below.count == 0, f"Expected no bound state below, got {below.values}"
        assert above.count == 1
        assert 8.0 < above.values[0] < 8.001, f"Root {above.values[0]} should hug the upper edge"

    def test_root_zeroes_determinant(self):
        c = CouplingTriple.of(-3.0, 0.0, 0.0)
        result = find_eigenvalues(SectorTag.EES, c, SideTag.BELOW)
        assert result.count == 1
        assert delta_ees(c, result.values[0]) == pytest.approx(0.0, abs=1e-8)

    def test_oos_root_below_threshold(self):
        s = 3 * math.pi / (3 * math.pi - 8)
        weak = find_eigenvalues(SectorTag.OOS, CouplingTriple.of(0.0, 0.0, -0.9 * s), SideTag.BELOW)
        strong = find_eigenvalues(SectorTag.OOS, CouplingTriple.of(0.0, 0.0, -1.2 * s), SideTag.BELOW)
        assert weak.count == 0 and strong.count == 1


class TestSpectralReport:
    """Totals across sectors for reference coupling triples."""

    def test_nearest_neighbour_attraction(self):
        report = spectral_report(CouplingTriple.of(0.0, -1.0, 0.0), workers=2)
        assert (report.m, report.n) == (1, 0), f"Got ({report.m}, {report.n})"

    def test_on_site_repulsion(self):
        report = spectral_report(CouplingTriple.of(1.0, 0.0, 0.0), workers=1)
        assert (report.m, report.n) == (0, 1)

    def test_strong_attraction_splits_across_sectors(self):
        report = spectral_report(CouplingTriple.of(-5.0, -11.0, 0.0))
        assert report.m == 3
        assert report.get(SectorTag.EES, SideTag.BELOW).count == 2
        assert report.get(SectorTag.EA, SideTag.BELOW).count == 1

    def test_rank_never_exceeded(self):
        report = spectral_report(CouplingTriple.of(-20.0, -20.0, 20.0))
        assert report.m + report.n <= 7

    def test_reflected_couplings_swap_sides(self):
        rng = np.random.default_rng(21)
        for gamma, lam, mu in rng.uniform(-5.0, 5.0, size=(4, 3)):
            c = CouplingTriple.of(float(gamma), float(lam), float(mu))
            report = spectral_report(c, workers=1)
            mirrored = spectral_report(c.reflected(), workers=1)
            assert (mirrored.m, mirrored.n) == (report.n, report.m), f"{c.as_tuple()}"

    @pytest.mark.parametrize("triple", [(1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (-5.0, -11.0, 0.0), (-20.0, -20.0, 20.0)])
    def test_finer_initial_step_keeps_counts(self, triple):
        c = CouplingTriple.of(*triple)
        coarse = spectral_report(c, ScanConfig(), workers=1)
        fine = spectral_report(c, ScanConfig(initial_step=ScanConfig().initial_step / 10), workers=1)
        assert (fine.m, fine.n) == (coarse.m, coarse.n), f"coarse {(coarse.m, coarse.n)}, fine {(fine.m, fine.n)}"
