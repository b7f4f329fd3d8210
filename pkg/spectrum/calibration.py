"""
Self-calibration of region labels against the determinant solver.

The eigenvalue count is constant on every connected component of the
partition, so sampling a few interior points per component and counting
zeros of the sector determinant gives the component's true label. Labels
that disagree with the printed index are logged on the discrepancy logger
as one JSON object per line.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from spectrum import config
from spectrum.classifier import classify, components_of, is_interior, predicted_counts
from spectrum.determinants import find_eigenvalues
from spectrum.errors import CalibrationError
from spectrum.models import (
    CouplingTriple,
    EaGeometry,
    PredictedCounts,
    QuadratureSpec,
    ScanConfig,
    SectorTag,
    Sign,
    SideTag,
)

logger = logging.getLogger(__name__)
discrepancy_log = logging.getLogger("spectrum.calibration.discrepancy")

Solver = Callable[[SectorTag, CouplingTriple, SideTag], int]

_PREFIX_SECTOR = {"S": SectorTag.OOS, "A": SectorTag.EA, "C": SectorTag.EES}
_PREFIX_SIZE = {"S": 2, "A": 3, "C": 5}


class Discrepancy(BaseModel):
    component: str
    printed_label: int
    calibrated_label: int
    samples: list[tuple[float, float, float]]


class CalibrationResult(BaseModel):
    """Component → calibrated count map with the evidence behind it."""
    model_config = ConfigDict(frozen=True)

    labels: dict[str, int]
    discrepancies: list[Discrepancy] = Field(default_factory=list)
    unsampled: list[str] = Field(default_factory=list)
    seed: int
    geometry: EaGeometry

    def predict(self, c: CouplingTriple) -> PredictedCounts:
        return predicted_counts(c, self.labels, self.geometry)


def component_ids() -> list[str]:
    """All components of the oos, ea and ees partitions on both sides."""
    ids = []
    for sign in ("-", "+"):
        for prefix, size in _PREFIX_SIZE.items():
            ids.extend(f"{prefix}{sign}{k}" for k in range(size))
    return ids


def parse_component(component: str) -> tuple[SectorTag, Sign, int]:
    prefix, sign, index = component[0], component[1], int(component[2:])
    return _PREFIX_SECTOR[prefix], (Sign.MINUS if sign == "-" else Sign.PLUS), index


def sample_component(component: str, n: int, rng: np.random.Generator,
                     geometry: EaGeometry = EaGeometry.EDGE,
                     box: float = config.CALIBRATION_BOX,
                     max_draws: int = 200_000) -> list[CouplingTriple]:
    """Up to n interior points of a component, by rejection sampling in the box |c_i| ≤ box."""
    sector, sign, _ = parse_component(component)
    found: list[CouplingTriple] = []
    for _ in range(max_draws):
        if len(found) >= n:
            break
        c = CouplingTriple.of(*(float(x) for x in rng.uniform(-box, box, size=3)))
        label = classify(c, geometry)
        side_label = label.minus if sign == Sign.MINUS else label.plus
        if components_of(side_label)[sector] != component:
            continue
        if is_interior(c, geometry):
            found.append(c)
    if len(found) < n:
        logger.warning(f"only {len(found)}/{n} interior samples found for {component}")
    return found


def _determinant_solver(cfg: ScanConfig, spec: QuadratureSpec) -> Solver:
    def solve(sector: SectorTag, c: CouplingTriple, side: SideTag) -> int:
        return find_eigenvalues(sector, c, side, cfg, spec).count
    return solve


def self_calibrate(solver: Optional[Solver] = None,
                   samples_per_component: int = config.CALIBRATION_SAMPLES,
                   seed: int = config.DEFAULT_SEED,
                   workers: int = config.DEFAULT_THREADS,
                   geometry: EaGeometry = EaGeometry.EDGE,
                   cfg: ScanConfig = ScanConfig(),
                   spec: QuadratureSpec = QuadratureSpec(),
                   components: Optional[list[str]] = None) -> CalibrationResult:
    """
    Count eigenvalues at interior samples of every component and store the
    common count as that component's label.

    Raises CalibrationError when the samples of one component disagree.
    """
    solver = solver or _determinant_solver(cfg, spec)
    rng = np.random.default_rng(seed)
    components = components or component_ids()

    jobs: list[tuple[str, CouplingTriple]] = []
    unsampled: list[str] = []
    for component in components:
        points = sample_component(component, samples_per_component, rng, geometry)
        if not points:
            unsampled.append(component)
        jobs.extend((component, c) for c in points)

    def run(job: tuple[str, CouplingTriple]) -> int:
        component, c = job
        sector, sign, _ = parse_component(component)
        return solver(sector, c, SideTag.BELOW if sign == Sign.MINUS else SideTag.ABOVE)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        counts = list(pool.map(run, jobs))

    by_component: dict[str, dict[int, list[tuple[float, float, float]]]] = {}
    for (component, c), count in zip(jobs, counts):
        by_component.setdefault(component, {}).setdefault(count, []).append(c.as_tuple())

    labels: dict[str, int] = {}
    discrepancies: list[Discrepancy] = []
    for component in components:
        _, _, printed = parse_component(component)
        observed = by_component.get(component)
        if not observed:
            labels[component] = printed
            continue
        if len(observed) > 1:
            raise CalibrationError(component, observed)
        calibrated = next(iter(observed))
        labels[component] = calibrated
        if calibrated != printed:
            item = Discrepancy(component=component, printed_label=printed,
                               calibrated_label=calibrated, samples=observed[calibrated])
            discrepancies.append(item)
            discrepancy_log.warning(json.dumps(item.model_dump()))

    logger.info(f"calibrated {len(labels)} components, {len(discrepancies)} relabelled, "
                f"{len(unsampled)} without samples")
    return CalibrationResult(labels=labels, discrepancies=discrepancies,
                             unsampled=unsampled, seed=seed, geometry=geometry)
