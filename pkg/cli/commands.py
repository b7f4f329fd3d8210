"""
The five command-line operations. Each takes parsed inputs plus a RunConfig,
writes machine-readable output to the given stream and returns an exit code.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, TextIO

import numpy as np

from cli.output import (
    CLASSIFY_COLUMNS,
    ORACLE_COLUMNS,
    PHASE_COLUMNS,
    SPECTRUM_COLUMNS,
    SWEEP_COLUMNS,
    VERIFY_COLUMNS,
    write_csv,
    write_json,
)
from cli.settings import RunConfig
from spectrum.calibration import CalibrationResult, self_calibrate
from spectrum.classifier import (
    classifier_constants,
    classify,
    ea_edge_curve,
    gamma_surface,
    lambda_curve,
    predicted_counts,
    q0_poly,
)
from spectrum.determinants import spectral_report
from spectrum.errors import SpectralDomainError
from spectrum.lattice import essential_band
from spectrum.models import CouplingTriple, OutputFormat, Quasimomentum, Sign
from spectrum.oracle import oracle_counts, oracle_eigenvalues
from spectrum.verification import CHECKS, VerifyOptions, run_checks

logger = logging.getLogger(__name__)

MAX_RESOLUTION = 2000
COUPLING_NAMES = ("gamma", "lambda", "mu")


class UsageError(ValueError):
    """Malformed command input; mapped to exit code 2."""


def _calibration(run: RunConfig) -> Optional[CalibrationResult]:
    if not run.calibrate:
        return None
    return self_calibrate(samples_per_component=run.samples, seed=run.seed, workers=run.threads,
                          geometry=run.geometry, cfg=run.scan_config(), spec=run.quadrature_spec())


def _predict(c: CouplingTriple, run: RunConfig, calibration: Optional[CalibrationResult]):
    if calibration is not None:
        return calibration.predict(c)
    return predicted_counts(c, geometry=run.geometry)


def _inputs(c: CouplingTriple, run: RunConfig, **extra) -> dict:
    return {"gamma": c.gamma, "lambda": c.lam, "mu": c.mu, **extra,
            "config": run.model_dump(mode="json")}


# ─── classify ───

def cmd_classify(c: CouplingTriple, run: RunConfig, stream: TextIO) -> int:
    labels = classify(c, run.geometry)
    counts = _predict(c, run, _calibration(run))
    boundary = any(labels.minus.on_boundary.values()) or any(labels.plus.on_boundary.values())
    if run.format == OutputFormat.JSON:
        per_sector = []
        for label in (labels.minus, labels.plus):
            per_sector.append({
                "sign": label.sign.value, "alpha": label.alpha, "beta": label.beta, "zeta": label.zeta,
                "on_boundary": {tag.value: flag for tag, flag in label.on_boundary.items()},
            })
        write_json({"inputs": _inputs(c, run), "per_sector": per_sector,
                    "totals": {"m": counts.m, "n": counts.n, "source": counts.source.value}}, stream)
    else:
        m, p = labels.minus, labels.plus
        write_csv([[c.gamma, c.lam, c.mu, m.alpha, m.beta, m.zeta, p.alpha, p.beta, p.zeta,
                    counts.m, counts.n, boundary, counts.source.value]], CLASSIFY_COLUMNS, stream)
    return 0


# ─── spectrum ───

def cmd_spectrum(c: CouplingTriple, K: Quasimomentum, run: RunConfig, stream: TextIO) -> int:
    grid = run.grid_spec()
    band = essential_band(K)
    oracle_below, oracle_above = oracle_eigenvalues(K, c, grid.L)
    rows: list[list] = []
    per_sector: list[dict] = []
    totals: dict = {"band": [band.lo, band.hi],
                    "oracle_m": len(oracle_below), "oracle_n": len(oracle_above)}

    if K.is_zero():
        report = spectral_report(c, run.scan_config(), run.quadrature_spec(), run.threads)
        totals.update({"m": report.m, "n": report.n})
        for item in report.lists:
            per_sector.append(item.model_dump(mode="json"))
            rows.extend(["determinant", item.sector.value, item.side.value, v] for v in item.values)
            if item.edge_unresolved:
                rows.append(["determinant", item.sector.value, item.side.value, float("nan")])
                logger.warning(f"{item.sector.value}/{item.side.value}: {item.edge_unresolved} root(s) unresolved at the edge")

    rows.extend(["oracle", "", "below", v] for v in oracle_below)
    rows.extend(["oracle", "", "above", v] for v in oracle_above)

    if run.format == OutputFormat.JSON:
        write_json({"inputs": _inputs(c, run, K=[K.k1, K.k2]), "per_sector": per_sector, "totals": totals,
                    "oracle": {"below": oracle_below, "above": oracle_above}}, stream)
    else:
        write_csv(rows, SPECTRUM_COLUMNS, stream)
    return 0


# ─── sweep ───

def sweep_rows(x_name: str, y_name: str, x_range: tuple[float, float], y_range: tuple[float, float],
               resolution: tuple[int, int], fixed: float, run: RunConfig,
               oracle_stride: int = 0) -> list[list]:
    """One row per grid point in x-major order; oracle columns every oracle_stride points."""
    if x_name == y_name or {x_name, y_name} - set(COUPLING_NAMES):
        raise UsageError(f"sweep axes must be two different names from {COUPLING_NAMES}")
    nx, ny = resolution
    if not (1 <= nx <= MAX_RESOLUTION and 1 <= ny <= MAX_RESOLUTION):
        raise UsageError(f"resolution must be between 1 and {MAX_RESOLUTION} per axis")
    if not all(math.isfinite(v) for v in (*x_range, *y_range, fixed)):
        raise UsageError("sweep ranges must be finite")
    (fixed_name,) = set(COUPLING_NAMES) - {x_name, y_name}

    grid = run.grid_spec()
    calibration = _calibration(run)
    xs = np.linspace(x_range[0], x_range[1], nx)
    ys = np.linspace(y_range[0], y_range[1], ny)
    points = [(i, j, float(x), float(y)) for i, x in enumerate(xs) for j, y in enumerate(ys)]

    def row(point) -> list:
        i, j, x, y = point
        values = {x_name: x, y_name: y, fixed_name: fixed}
        c = CouplingTriple.of(values["gamma"], values["lambda"], values["mu"])
        pred = _predict(c, run, calibration)
        report = spectral_report(c, run.scan_config(), run.quadrature_spec(), workers=1)
        out = [x, y, c.gamma, c.lam, c.mu, pred.m, pred.n, report.m, report.n,
               (pred.m, pred.n) == (report.m, report.n)]
        if oracle_stride:
            if i % oracle_stride == 0 and j % oracle_stride == 0:
                out.extend(oracle_counts(Quasimomentum(), c, grid.L))
            else:
                out.extend([None, None])
        return out

    with ThreadPoolExecutor(max_workers=run.threads) as pool:
        return list(pool.map(row, points))


def cmd_sweep(x_name: str, y_name: str, x_range: tuple[float, float], y_range: tuple[float, float],
              resolution: tuple[int, int], fixed: float, run: RunConfig, stream: TextIO,
              oracle_stride: int = 0) -> int:
    rows = sweep_rows(x_name, y_name, x_range, y_range, resolution, fixed, run, oracle_stride)
    columns = SWEEP_COLUMNS + (ORACLE_COLUMNS if oracle_stride else [])
    if run.format == OutputFormat.JSON:
        write_json({"inputs": {"x": x_name, "y": y_name, "fixed": fixed, "config": run.model_dump(mode="json")},
                    "rows": [dict(zip(columns, r)) for r in rows],
                    "totals": {"points": len(rows), "agree": sum(1 for r in rows if r[9])}}, stream)
    else:
        write_csv(rows, columns, stream)
    return 0


# ─── phase diagram ───

NAN_ROW = ("", float("nan"), float("nan"))


def _branch(name: str, xs, f) -> list[tuple]:
    rows = []
    for x in xs:
        try:
            rows.append((name, float(x), float(f(float(x)))))
        except SpectralDomainError:
            continue
    rows.append(NAN_ROW)
    return rows


def phase_rows(sign: Sign, which: str, run: RunConfig, span: float = 25.0,
               points: int = 200, mu: Optional[float] = None) -> list[tuple]:
    """Boundary samples with a NaN row closing every branch."""
    k = classifier_constants()
    eps = 1e-3
    flip = -1.0 if sign == Sign.PLUS else 1.0
    if which == "tau":
        # branches over I_1, I_2, I_3; plus-side intervals are the mirrored ones
        edges = [(k.mu0_plus, span), (k.mu0_minus, k.mu0_plus), (-span, k.mu0_minus)]
        rows = []
        for j, (a, b) in enumerate(edges, start=1):
            lo, hi = sorted((flip * (a + eps), flip * (b - eps)))
            rows += _branch(f"tau{j}", np.linspace(lo, hi, points), lambda m: lambda_curve(m, sign))
        return rows
    if which == "gamma_slice":
        if mu is None:
            raise UsageError("gamma_slice needs a fixed --mu")
        if q0_poly(mu, sign) == 0.0:
            raise SpectralDomainError(f"μ = {mu} is a root of Q_0; the γ-surface degenerates")
        pole = lambda_curve(mu, sign)
        rows = _branch("left", np.linspace(-span, pole - eps, points), lambda l: gamma_surface(l, mu, sign))
        rows += _branch("right", np.linspace(pole + eps, span, points), lambda l: gamma_surface(l, mu, sign))
        return rows
    if which == "A_boundary":
        pole = k.nu_star if run.geometry.value == "edge" else k.mu_star
        rows = []
        for name, (a, b) in (("left", (-span, -pole - eps)), ("right", (-pole + eps, span))):
            xs = np.linspace(a, b, points)
            rows += _branch(name, flip * xs if sign == Sign.PLUS else xs,
                            lambda m: flip * ea_edge_curve(flip * m, run.geometry))
        return rows
    if which == "S_threshold":
        return [("S", -flip * k.s_threshold, float("nan")), NAN_ROW]
    raise UsageError(f"unknown boundary family {which!r}")


def cmd_phase_diagram(sign: Sign, which: str, run: RunConfig, stream: TextIO,
                      span: float = 25.0, points: int = 200, mu: Optional[float] = None) -> int:
    rows = phase_rows(sign, which, run, span, points, mu)
    if run.format == OutputFormat.JSON:
        write_json({"inputs": {"sign": sign.value, "which": which, "mu": mu},
                    "rows": [dict(zip(PHASE_COLUMNS, r)) for r in rows]}, stream)
    else:
        write_csv(rows, PHASE_COLUMNS, stream)
    return 0


# ─── verify ───

def cmd_verify(run: RunConfig, stream: TextIO, names: Optional[list[str]] = None,
               rank_samples: int = 200) -> int:
    unknown = set(names or []) - set(CHECKS)
    if unknown:
        raise UsageError(f"unknown checks: {sorted(unknown)}")
    options = VerifyOptions(
        L=min(run.grid_spec().L, 48), oracle_L=run.grid, seed=run.seed, workers=run.threads,
        samples_per_component=run.samples, rank_samples=rank_samples,
        spec=run.quadrature_spec(), scan=run.scan_config(), geometry=run.geometry,
    )
    records = run_checks(options, names)
    passed = all(r.passed for r in records)
    if run.format == OutputFormat.JSON:
        write_json({"inputs": {"config": run.model_dump(mode="json"), "checks": names or list(CHECKS)},
                    "checks": [r.model_dump(mode="json") for r in records],
                    "totals": {"passed": sum(r.passed for r in records), "failed": sum(not r.passed for r in records)}},
                   stream)
    else:
        write_csv([[r.name, r.passed, r.margin] for r in records], VERIFY_COLUMNS, stream)
    return 0 if passed else 1
