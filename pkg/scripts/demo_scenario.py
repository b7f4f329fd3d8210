"""
Demo scenario: walks the library end to end WITHOUT the command line.
Classifies a few reference couplings, solves the sector determinants at K = 0
and compares with the finite-lattice oracle.

Usage:
  python scripts/demo_scenario.py
"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from spectrum.classifier import classify, predicted_counts
from spectrum.determinants import spectral_report
from spectrum.models import CouplingTriple, Quasimomentum
from spectrum.oracle import oracle_counts, oracle_eigenvalues

SCENARIOS = [
    ("weak on-site repulsion", CouplingTriple.of(1.0, 0.0, 0.0)),
    ("nearest-neighbour attraction", CouplingTriple.of(0.0, -1.0, 0.0)),
    ("strong mixed attraction", CouplingTriple.of(-5.0, -11.0, 0.0)),
    ("saturated cell", CouplingTriple.of(-20.0, -20.0, 20.0)),
]
GRID_L = 48


def show(title: str, c: CouplingTriple) -> None:
    print(f"\n{'=' * 60}")
    print(f"  {title}: (γ, λ, μ) = {c.as_tuple()}")
    print("=" * 60)

    # ─── Step 1: region labels ───
    labels = classify(c)
    counts = predicted_counts(c)
    print(f"[Labels] below (α, β, ζ) = ({labels.minus.alpha}, {labels.minus.beta}, {labels.minus.zeta})"
          f"  above = ({labels.plus.alpha}, {labels.plus.beta}, {labels.plus.zeta})")
    print(f"[Labels] predicted (m, n) = ({counts.m}, {counts.n})")

    # ─── Step 2: determinant zeros ───
    report = spectral_report(c)
    for item in report.lists:
        if item.count:
            values = ", ".join(f"{v:.6f}" for v in item.values)
            extra = f" (+{item.edge_unresolved} at the edge)" if item.edge_unresolved else ""
            print(f"[Δ {item.sector.value:>3} {item.side.value:>5}] {values}{extra}")
    print(f"[Δ] total (m, n) = ({report.m}, {report.n})")

    # ─── Step 3: lattice oracle ───
    below, above = oracle_eigenvalues(Quasimomentum(), c, GRID_L)
    print(f"[Oracle L={GRID_L}] below: {[round(v, 4) for v in below]}  above: {[round(v, 4) for v in above]}")
    moved = oracle_counts(Quasimomentum(k1=1.0, k2=0.5), c, GRID_L)
    print(f"[Oracle K=(1.0, 0.5)] (m, n) = {moved}")


def main():
    print("\n" + "=" * 60)
    print("  DEMO: two-boson bound states on the square lattice")
    print("=" * 60)
    for title, c in SCENARIOS:
        show(title, c)
    print("\nDone.")


if __name__ == "__main__":
    main()
