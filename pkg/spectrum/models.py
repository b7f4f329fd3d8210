"""
Shared value types for the two-boson spectrum library.

Couplings and momenta flow in → integrals and determinants → eigenvalue lists
and region labels flow out. Value types are frozen pydantic models so they can
key caches and cross thread boundaries freely.
"""
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from spectrum import config


def wrap_angle(x):
    """Reduce angles (scalar or numpy array) modulo 2π into [−π, π)."""
    r = np.mod(np.asarray(x, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    r = np.where(r >= math.pi, -math.pi, r)
    return float(r) if r.ndim == 0 else r


class SectorTag(str, Enum):
    EES = "ees"
    OOS = "oos"
    EA = "ea"


class SideTag(str, Enum):
    BELOW = "below"
    ABOVE = "above"


class Sign(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


class QuadratureMethod(str, Enum):
    SEMI_ANALYTIC_1D = "semi_analytic_1d"
    TRAPEZOID_2D = "trapezoid_2d"


class Representation(str, Enum):
    MOMENTUM = "momentum"
    POSITION = "position"


class LabelSource(str, Enum):
    PRINTED = "paper_labels"
    SELF_CALIBRATED = "self_calibrated"


class EaGeometry(str, Enum):
    """Boundary curve used for the ea partition."""
    EDGE = "edge"           # zero set of Δ^ea at the band edge
    PRINTED = "printed"     # pole μ*, offset +8, taken literally


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


# Per-side rank of each sector potential
SECTOR_RANK = {SectorTag.EES: 4, SectorTag.OOS: 1, SectorTag.EA: 2}
TOTAL_RANK = 7

# Below-band counts use the minus-sign geometry, above-band the plus-sign one
SIDE_SIGN = {SideTag.BELOW: Sign.MINUS, SideTag.ABOVE: Sign.PLUS}


class CouplingTriple(BaseModel):
    """On-site, nearest- and next-nearest-neighbour strengths (γ, λ, μ)."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False, populate_by_name=True)

    gamma: float = 0.0
    lam: float = Field(0.0, alias="lambda")
    mu: float = 0.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.gamma, self.lam, self.mu)

    def reflected(self) -> "CouplingTriple":
        return CouplingTriple(gamma=-self.gamma, lam=-self.lam, mu=-self.mu)

    @classmethod
    def of(cls, gamma: float, lam: float, mu: float) -> "CouplingTriple":
        return cls(gamma=gamma, lam=lam, mu=mu)


class Quasimomentum(BaseModel):
    """Total quasimomentum K on the torus."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    k1: float = 0.0
    k2: float = 0.0

    @field_validator("k1", "k2")
    @classmethod
    def _wrap(cls, v: float) -> float:
        return wrap_angle(v)

    def is_zero(self) -> bool:
        return self.k1 == 0.0 and self.k2 == 0.0


class MomentumPoint(BaseModel):
    """A point p of the torus T²."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    p1: float
    p2: float

    @field_validator("p1", "p2")
    @classmethod
    def _wrap(cls, v: float) -> float:
        return wrap_angle(v)


class EssentialBand(BaseModel):
    """The interval [ℰ_min(K), ℰ_max(K)] of the free fiber spectrum."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    lo: float
    hi: float

    @model_validator(mode="after")
    def _ordered(self) -> "EssentialBand":
        if self.lo > self.hi:
            raise ValueError(f"band lower edge {self.lo} exceeds upper edge {self.hi}")
        return self

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def edge(self, side: SideTag) -> float:
        return self.lo if side == SideTag.BELOW else self.hi

    def contains(self, z: float) -> bool:
        return self.lo <= z <= self.hi


class QuadratureSpec(BaseModel):
    """How torus integrals are evaluated."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    method: QuadratureMethod = QuadratureMethod.SEMI_ANALYTIC_1D
    initial_points: int = Field(config.QUAD_INITIAL_POINTS, ge=8)
    rel_tol: float = Field(config.QUAD_REL_TOL, gt=0.0)
    max_doublings: int = Field(config.QUAD_MAX_DOUBLINGS, ge=1, le=16)


class ScanConfig(BaseModel):
    """Schedule of the outward determinant scan from a band edge."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    edge_offset: float = Field(config.EDGE_OFFSET, gt=0.0, lt=1.0)
    far_cutoff: float = Field(config.FAR_CUTOFF, gt=0.0)
    initial_step: float = Field(config.INITIAL_STEP, gt=0.0)
    growth: float = Field(config.STEP_GROWTH, gt=1.0)
    max_step: float = Field(config.MAX_STEP, gt=0.0)
    bisect_tol: float = Field(config.BISECT_TOL, gt=0.0)
    tangency_window: float = Field(config.TANGENCY_WINDOW, gt=0.0)


class EigenvalueList(BaseModel):
    """Discrete eigenvalues of one sector on one side of the band."""
    model_config = ConfigDict(frozen=True)

    sector: SectorTag
    side: SideTag
    values: tuple[float, ...] = ()
    edge_unresolved: int = Field(0, ge=0)       # roots closer to the edge than edge_offset
    tangency_flags: tuple[float, ...] = ()      # |Δ| minima that may hide a double root
    boundary_proximity: bool = False

    @computed_field
    @property
    def count(self) -> int:
        return len(self.values) + self.edge_unresolved

    @model_validator(mode="after")
    def _sorted_and_bounded(self) -> "EigenvalueList":
        if list(self.values) != sorted(self.values):
            raise ValueError("eigenvalues must be sorted")
        if self.count > SECTOR_RANK[self.sector]:
            raise ValueError(
                f"{self.count} {self.side.value}-band eigenvalues exceed rank "
                f"{SECTOR_RANK[self.sector]} of sector {self.sector.value}"
            )
        return self


class SpectralReport(BaseModel):
    """Per-sector eigenvalues at K = 0 on both sides of the band [0, 8]."""
    model_config = ConfigDict(frozen=True)

    couplings: CouplingTriple
    lists: tuple[EigenvalueList, ...]

    def get(self, sector: SectorTag, side: SideTag) -> EigenvalueList:
        for item in self.lists:
            if item.sector == sector and item.side == side:
                return item
        return EigenvalueList(sector=sector, side=side)

    @computed_field
    @property
    def m(self) -> int:
        return sum(item.count for item in self.lists if item.side == SideTag.BELOW)

    @computed_field
    @property
    def n(self) -> int:
        return sum(item.count for item in self.lists if item.side == SideTag.ABOVE)

    @model_validator(mode="after")
    def _rank(self) -> "SpectralReport":
        if self.m + self.n > TOTAL_RANK:
            raise ValueError(f"m+n = {self.m + self.n} exceeds the potential rank {TOTAL_RANK}")
        return self


class RegionLabel(BaseModel):
    """Sector indices (α, β, ζ) for one sign of the region geometry."""
    model_config = ConfigDict(frozen=True)

    sign: Sign
    alpha: int = Field(ge=0, le=1)
    beta: int = Field(ge=0, le=2)
    zeta: int = Field(ge=0, le=4)
    on_boundary: dict[SectorTag, bool] = Field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.alpha + self.beta + self.zeta


class RegionLabels(BaseModel):
    """Labels for both signs: minus counts below the band, plus above."""
    model_config = ConfigDict(frozen=True)

    minus: RegionLabel
    plus: RegionLabel

    def for_side(self, side: SideTag) -> RegionLabel:
        return self.minus if side == SideTag.BELOW else self.plus


class PredictedCounts(BaseModel):
    """Predicted number of eigenvalues below (m) and above (n) the band."""
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=0, le=TOTAL_RANK)
    n: int = Field(ge=0, le=TOTAL_RANK)
    source: LabelSource = LabelSource.PRINTED

    @model_validator(mode="after")
    def _rank(self) -> "PredictedCounts":
        if self.m + self.n > TOTAL_RANK:
            raise ValueError(f"predicted m+n = {self.m + self.n} exceeds {TOTAL_RANK}")
        return self


class GridSpec(BaseModel):
    """Finite torus discretisation used by the oracle."""
    model_config = ConfigDict(frozen=True)

    L: int = Field(config.GRID_L, ge=8)
    representation: Representation = Representation.MOMENTUM

    @field_validator("L")
    @classmethod
    def _even(cls, v: int) -> int:
        if v % 2:
            raise ValueError(f"grid size L must be even, got {v}")
        return v


class MinimaxTable(BaseModel):
    """First seven minimax values below (e) and above (E) the band at K."""
    model_config = ConfigDict(frozen=True)

    K: Quasimomentum
    e: tuple[float, ...]
    E: tuple[float, ...]
    band: EssentialBand

    def gap_below(self, n: int = 1) -> float:
        """ℰ_min(K) − e_n(K)."""
        return self.band.lo - self.e[n - 1]
