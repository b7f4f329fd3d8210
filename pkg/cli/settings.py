"""
Run configuration for the command line.

Precedence: library defaults (which already include TWOBOSON_* environment
overrides) < config file < command-line flags. Config files are plain
`key = value` lines read with dotenv_values.
"""
import logging
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field

from spectrum import config
from spectrum.models import EaGeometry, GridSpec, OutputFormat, QuadratureSpec, ScanConfig

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    rel_tol: float = Field(config.QUAD_REL_TOL, gt=0.0)
    edge_offset: float = Field(config.EDGE_OFFSET, gt=0.0, lt=1.0)
    far_cutoff: float = Field(config.FAR_CUTOFF, gt=0.0)
    initial_step: float = Field(config.INITIAL_STEP, gt=0.0)
    growth: float = Field(config.STEP_GROWTH, gt=1.0)
    max_step: float = Field(config.MAX_STEP, gt=0.0)
    bisect_tol: float = Field(config.BISECT_TOL, gt=0.0)
    tangency_window: float = Field(config.TANGENCY_WINDOW, gt=0.0)
    grid: int = Field(config.GRID_L, ge=8)
    threads: int = Field(config.DEFAULT_THREADS, ge=1)
    format: OutputFormat = OutputFormat.CSV
    seed: int = config.DEFAULT_SEED
    geometry: EaGeometry = EaGeometry.EDGE
    calibrate: bool = False
    samples: int = Field(config.CALIBRATION_SAMPLES, ge=1)

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(rel_tol=self.rel_tol)

    def scan_config(self) -> ScanConfig:
        return ScanConfig(
            edge_offset=self.edge_offset,
            far_cutoff=self.far_cutoff,
            initial_step=self.initial_step,
            growth=self.growth,
            max_step=self.max_step,
            bisect_tol=self.bisect_tol,
            tangency_window=self.tangency_window,
        )

    def grid_spec(self) -> GridSpec:
        return GridSpec(L=self.grid)


def read_config_file(path: Optional[str]) -> dict[str, Any]:
    if not path:
        return {}
    file = Path(path)
    if not file.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    values = {k.strip(): v for k, v in dotenv_values(file).items() if v is not None}
    logger.info(f"Loaded {len(values)} settings from {file}")
    return values


def load_run_config(config_file: Optional[str] = None, **overrides: Any) -> RunConfig:
    """Merge the config file and non-None flag values over the defaults; pydantic validates the result."""
    merged = read_config_file(config_file)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**merged)
