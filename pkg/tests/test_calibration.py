"""
Unit tests for self-calibration of component labels.
Stub solvers stand in for the determinant scan so the tests stay fast.
"""
import json
import logging
import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from spectrum.calibration import component_ids, parse_component, sample_component, self_calibrate
from spectrum.classifier import classify, components_of
from spectrum.errors import CalibrationError
from spectrum.models import CouplingTriple, SectorTag, Sign, SideTag


def printed_solver(sector: SectorTag, c: CouplingTriple, side: SideTag) -> int:
    """Counts exactly what the printed labels predict."""
    label = classify(c).for_side(side)
    return {SectorTag.OOS: label.alpha, SectorTag.EA: label.beta, SectorTag.EES: label.zeta}[sector]


class TestComponents:
    """Component naming and sampling."""

    def test_twenty_components(self):
        ids = component_ids()
        assert len(ids) == 20 and len(set(ids)) == 20
        assert "C-4" in ids and "S+1" in ids

    def test_parse_component(self):
        assert parse_component("A+2") == (SectorTag.EA, Sign.PLUS, 2)
        assert parse_component("C-0") == (SectorTag.EES, Sign.MINUS, 0)

    def test_samples_lie_in_component(self):
        rng = np.random.default_rng(5)
        points = sample_component("S-1", 4, rng)
        assert len(points) == 4
        for c in points:
            assert components_of(classify(c).minus)[SectorTag.OOS] == "S-1", f"{c.as_tuple()} outside S-1"


class TestSelfCalibrate:
    """Label assignment from solver counts."""

    def test_printed_solver_keeps_labels(self):
        result = self_calibrate(printed_solver, samples_per_component=3, seed=1, workers=1,
                                components=["S-1", "A-1", "C+0"])
        assert result.labels == {"S-1": 1, "A-1": 1, "C+0": 0}
        assert result.discrepancies == []

    def test_relabelled_component_is_logged(self, caplog):
        with caplog.at_level(logging.WARNING, logger="spectrum.calibration.discrepancy"):
            result = self_calibrate(lambda sector, c, side: 0, samples_per_component=2, seed=2,
                                    workers=1, components=["S-1"])
        assert result.labels["S-1"] == 0
        assert len(result.discrepancies) == 1
        records = [r for r in caplog.records if r.name == "spectrum.calibration.discrepancy"]
        payload = json.loads(records[-1].message)
        assert payload["component"] == "S-1" and payload["calibrated_label"] == 0

    def test_non_constant_counts_raise(self):
        counter = iter(range(1000))

        def flaky(sector, c, side):
            return next(counter) % 2

        with pytest.raises(CalibrationError) as info:
            self_calibrate(flaky, samples_per_component=4, seed=3, workers=1, components=["C-1"])
        assert info.value.component == "C-1"

    def test_seed_is_reproducible(self):
        a = self_calibrate(printed_solver, samples_per_component=2, seed=9, workers=1, components=["A+0"])
        b = self_calibrate(printed_solver, samples_per_component=2, seed=9, workers=1, components=["A+0"])
        assert a == b

    def test_predict_uses_calibrated_labels(self):
        result = self_calibrate(lambda sector, c, side: 0, samples_per_component=2, seed=4,
                                workers=1, components=["C+1"])
        counts = result.predict(CouplingTriple.of(1.0, 0.0, 0.0))
        # C+1 is relabelled to 0, every other component keeps its printed index
        assert (counts.m, counts.n) == (0, 0)


class TestDeterminantCalibration:
    """Calibration against the real determinant scan."""

    COMPONENTS = ["C-0", "C-1", "C-2", "A-0", "S-1"]

    def test_no_relabelling_and_seed_independent(self):
        first = self_calibrate(samples_per_component=2, seed=11, workers=2, components=self.COMPONENTS)
        second = self_calibrate(samples_per_component=2, seed=12, workers=2, components=self.COMPONENTS)
        assert first.discrepancies == [], f"relabelled: {[d.component for d in first.discrepancies]}"
        assert second.discrepancies == []
        assert first.labels == second.labels
        assert set(first.labels) == set(self.COMPONENTS)
