"""
Tests for the verification checks, run on reduced grids and sample sizes.
"""
import math
import os
import sys

# Add project root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from spectrum.classifier import predicted_counts
from spectrum.models import CouplingTriple, Quasimomentum, SideTag
from spectrum.verification import (
    CHECKS,
    SATURATED_FIXTURE,
    VerifyOptions,
    check_bound_k_equality,
    check_classifier_constants,
    check_dft_equivalence,
    check_disc_k_vs_0,
    check_exact_counts,
    check_gap_monotonicity,
    check_green_identities,
    check_log_slope,
    check_oos_threshold,
    check_rank_bounds,
    check_simple_lemmas,
    check_threshold_asymptotics,
    run_checks,
    simple_lemma_grid,
    verify_theorems,
)


OPTIONS = VerifyOptions(L=16, oracle_L=32, workers=2, samples_per_component=2, rank_samples=5)


class TestClosedFormChecks:
    """Checks that compare integrals and constants with closed forms."""

    def test_green_identities(self):
        record = check_green_identities(OPTIONS)
        assert record.passed, f"worst relative error {record.margin}"

    def test_green_identities_cover_symmetry_and_reflection(self):
        record = check_green_identities(OPTIONS)
        assert set(record.detail) == {"linear", "symmetry", "reflection"}
        for kind, error in record.detail.items():
            assert error < 1e-10, f"{kind} relation off by {error}"

    def test_threshold_asymptotics(self):
        record = check_threshold_asymptotics(OPTIONS)
        assert record.passed, f"worst error {record.margin}"

    def test_oos_threshold(self):
        record = check_oos_threshold(OPTIONS)
        assert record.passed, f"threshold off by {record.margin}"

    def test_classifier_constants(self):
        record = check_classifier_constants(OPTIONS)
        assert record.passed, f"detail: {record.detail}"
        assert record.detail["ordered"]

    def test_classifier_constants_report_expanded_q(self):
        record = check_classifier_constants(OPTIONS)
        dev = record.detail["q_expanded_max_dev"]
        assert math.isfinite(dev), f"Got {dev}"
        assert dev == max(record.detail["q_expanded_max_dev_by_sign"].values())

    def test_log_slope(self):
        record = check_log_slope(OPTIONS)
        assert record.passed, f"worst relative slope error {record.margin}"
        assert len(record.detail["samples"]) == 10


class TestLatticeChecks:
    """Checks that run the oracle or the determinant scan."""

    def test_dft_equivalence(self):
        record = check_dft_equivalence(OPTIONS)
        assert record.passed, f"max eigenvalue difference {record.margin}"

    def test_simple_lemma_grid_shape(self):
        below = simple_lemma_grid(SideTag.BELOW)
        above = simple_lemma_grid(SideTag.ABOVE)
        assert len(below) == 9
        assert above == [(-g, -l) for g, l in below]

    def test_simple_lemmas(self):
        record = check_simple_lemmas(OPTIONS)
        assert record.passed, f"mismatches: {record.detail['mismatches']}"

    def test_theorems_on_saturated_fixture(self):
        predicted = predicted_counts(SATURATED_FIXTURE)
        K = [Quasimomentum(k1=0.5, k2=-1.0), Quasimomentum(k1=2.0, k2=0.3)]
        record = verify_theorems(SATURATED_FIXTURE, K, 24, predicted)
        assert record.lower_bounds_hold, f"samples: {record.samples}"
        assert record.equality_holds

    def test_weak_coupling_lower_bound(self):
        record = verify_theorems(CouplingTriple.of(-6.0, 0.0, 0.0), [Quasimomentum(k1=1.0, k2=1.0)], 16)
        assert record.base == (1, 0)
        assert record.lower_bounds_hold
        assert record.equality_holds is None

    def test_rank_bounds(self):
        record = check_rank_bounds(OPTIONS)
        assert record.passed, f"failures: {record.detail['failures']}"

    def test_disc_k_vs_0(self):
        record = check_disc_k_vs_0(OPTIONS)
        assert record.passed, f"failures: {record.detail['failures']}"

    def test_gap_monotonicity(self):
        record = check_gap_monotonicity(OPTIONS)
        assert record.passed, f"gap grows by {record.margin}"

    def test_exact_counts(self):
        options = VerifyOptions(L=16, oracle_L=64, workers=2, samples_per_component=2)
        record = check_exact_counts(options)
        assert record.passed, f"detail: {record.detail}"


class TestSaturatedEquality:
    """The equality check runs on the triple the search locates."""

    def test_located_triple_is_checked(self, monkeypatch):
        located = CouplingTriple.of(-20.0, -20.0, -20.0)
        monkeypatch.setattr("spectrum.verification.find_saturated_triple", lambda **kwargs: located)
        record = check_bound_k_equality(VerifyOptions(L=48))
        assert record.detail["couplings"] == located.as_tuple()
        assert record.detail["located"]
        assert record.detail["cell"] == (7, 0)
        assert record.passed, f"detail: {record.detail}"

    def test_falls_back_to_fixture(self, monkeypatch):
        monkeypatch.setattr("spectrum.verification.find_saturated_triple", lambda **kwargs: None)
        record = check_bound_k_equality(VerifyOptions(L=24))
        assert record.detail["couplings"] == SATURATED_FIXTURE.as_tuple()
        assert not record.detail["located"]
        assert record.detail["cell"] == (3, 4)

    def test_unsaturated_triple_fails(self, monkeypatch):
        monkeypatch.setattr("spectrum.verification.find_saturated_triple",
                            lambda **kwargs: CouplingTriple.of(1.0, 0.0, 0.0))
        record = check_bound_k_equality(OPTIONS)
        assert not record.passed
        assert "error" in record.detail


class TestRunChecks:
    """Dispatcher behaviour."""

    def test_order_preserved(self):
        names = ["oos_threshold", "classifier_constants"]
        records = run_checks(OPTIONS, names)
        assert [r.name for r in records] == names
        assert all(r.passed for r in records)

    def test_every_check_registered(self):
        assert set(CHECKS) == {
            "green_identities", "threshold_asymptotics", "oos_threshold", "classifier_constants",
            "exact_counts", "rank_bounds", "disc_k_vs_0", "gap_monotonicity", "log_slope",
            "dft_equivalence", "simple_lemmas", "bound_k_equality",
        }

    def test_exception_becomes_failed_record(self, monkeypatch):
        def broken(options):
            raise RuntimeError("boom")

        monkeypatch.setitem(CHECKS, "oos_threshold", broken)
        (record,) = run_checks(OPTIONS, ["oos_threshold"])
        assert not record.passed
        assert record.detail["error"] == "boom"
