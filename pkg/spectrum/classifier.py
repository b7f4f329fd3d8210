"""
Region classifier: which connected component of coupling space a triple lies
in, and how many eigenvalues each sector contributes there.

Below-band counts use the minus geometry. Above-band counts are obtained by
reflecting the couplings (γ, λ, μ) → (−γ, −λ, −μ), so every plus-side set is
the point reflection of its minus-side partner.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional

import numpy as np

from spectrum import config
from spectrum.errors import SpectralDomainError
from spectrum.lattice import reflect_couplings
from spectrum.models import (
    CouplingTriple,
    EaGeometry,
    LabelSource,
    PredictedCounts,
    RegionLabel,
    RegionLabels,
    SectorTag,
    Sign,
    SideTag,
)

logger = logging.getLogger(__name__)

PI = math.pi
Q0_LEAD = (16.0 - 5.0 * PI) / (4.0 * PI)
Q1_LEAD = 2.0 * (16.0 - 5.0 * PI) / PI


@dataclass(frozen=True)
class ClassifierConstants:
    mu0_minus: float
    mu0_plus: float
    mu1_minus: float
    mu1_plus: float
    mu1_printed: tuple[float, float]
    mu_star: float          # pole of the printed ea curve
    nu_star: float          # pole of the band-edge ea curve
    s_threshold: float      # oos threshold 3π/(3π − 8)


@lru_cache(maxsize=1)
def classifier_constants() -> ClassifierConstants:
    """Roots of Q_0 and Q_1 and the oos/ea thresholds, evaluated from their closed forms."""
    denom0 = 3.0 * (16.0 - 5.0 * PI)
    root0 = math.sqrt(666.0 * PI ** 2 - 4128.0 * PI + 6400.0)
    denom1 = 12.0 * (16.0 - 5.0 * PI)
    root1 = math.sqrt(801.0 * PI ** 2 - 4512.0 * PI + 6400.0)
    printed1 = math.sqrt(1161.0 * PI ** 2 - 5664.0 * PI + 6400.0)
    consts = ClassifierConstants(
        mu0_minus=(-80.0 + 24.0 * PI - root0) / denom0,
        mu0_plus=(-80.0 + 24.0 * PI + root0) / denom0,
        mu1_minus=(-80.0 + 21.0 * PI - root1) / denom1,
        mu1_plus=(-80.0 + 21.0 * PI + root1) / denom1,
        mu1_printed=((-80.0 + 21.0 * PI - printed1) / denom1, (-80.0 + 21.0 * PI + printed1) / denom1),
        mu_star=4.0 * (4.0 - PI) / (32.0 - 9.0 * PI),
        nu_star=2.0 * (4.0 - PI) / (16.0 - 5.0 * PI),
        s_threshold=3.0 * PI / (3.0 * PI - 8.0),
    )
    logger.warning(
        f"Q_1 roots from discriminant 1161π²−5664π+6400 are {consts.mu1_printed[0]:.4f}, "
        f"{consts.mu1_printed[1]:.4f}; using {consts.mu1_minus:.4f}, {consts.mu1_plus:.4f} "
        f"which make Q_1(0) = 1"
    )
    return consts


def _flip(mu: float, sign: Sign) -> float:
    return -mu if sign == Sign.PLUS else mu


# ─── Polynomials ───

def q0_poly(mu: float, sign: Sign = Sign.MINUS) -> float:
    k = classifier_constants()
    x = _flip(mu, sign)
    return Q0_LEAD * (x - k.mu0_minus) * (x - k.mu0_plus)


def q1_poly(mu: float, sign: Sign = Sign.MINUS) -> float:
    k = classifier_constants()
    x = _flip(mu, sign)
    return Q1_LEAD * (x - k.mu1_minus) * (x - k.mu1_plus)


def big_q(c: CouplingTriple, sign: Sign = Sign.MINUS) -> float:
    """Q^±(γ, λ, μ) = (γ ∓ 4)(λ Q_0 ∓ Q_1) − 8 Q_0."""
    q0 = q0_poly(c.mu, sign)
    q1 = q1_poly(c.mu, sign)
    if sign == Sign.MINUS:
        return (c.gamma + 4.0) * (c.lam * q0 + q1) - 8.0 * q0
    return (c.gamma - 4.0) * (c.lam * q0 - q1) - 8.0 * q0


def big_q_expanded(c: CouplingTriple, sign: Sign = Sign.MINUS) -> float:
    """The expanded cubic as printed alongside the factored form; kept for comparison only."""
    g, l, m = c.as_tuple()
    s = 1.0 if sign == Sign.MINUS else -1.0       # value of "∓"
    pi2 = PI * PI
    k = (3720.0 * PI - 585.0 * pi2 - 5888.0)
    return (s * (g + 2.0 * l + 4.0 * m)
            + 0.5 * g * l
            + (39.0 * PI - 104.0) / (3.0 * PI) * g * m
            + (153.0 * PI - 448.0) / (6.0 * PI) * l * m
            + (15.0 * PI - 40.0) / (3.0 * PI) * m * m
            + s * ((18.0 * PI - 52.0) / (3.0 * PI) * g * l * m
                   + 2.0 * (900.0 * PI - 135.0 * pi2 - 1472.0) / (9.0 * pi2) * g * m * m
                   + k / (9.0 * pi2) * l * m * m)
            + k / (32.0 * pi2) * g * l * m * m)


def lambda_curve(mu: float, sign: Sign = Sign.MINUS) -> float:
    q0 = q0_poly(mu, sign)
    if q0 == 0.0:
        raise SpectralDomainError(f"λ-curve has a pole at μ = {mu}")
    q1 = q1_poly(mu, sign)
    return -q1 / q0 if sign == Sign.MINUS else q1 / q0


def gamma_surface(lam: float, mu: float, sign: Sign = Sign.MINUS) -> float:
    q0 = q0_poly(mu, sign)
    q1 = q1_poly(mu, sign)
    denom = lam * q0 + q1 if sign == Sign.MINUS else lam * q0 - q1
    if denom == 0.0:
        raise SpectralDomainError(f"(λ, μ) = ({lam}, {mu}) lies on a τ curve; γ-surface undefined")
    return 8.0 * q0 / denom + (-4.0 if sign == Sign.MINUS else 4.0)


def _near(a: float, b: float) -> bool:
    return abs(a - b) <= config.BOUNDARY_REL_TOL * max(1.0, abs(a), abs(b))


# ─── Sector classifiers ───

def _oos_minus(mu: float) -> tuple[int, bool]:
    s = classifier_constants().s_threshold
    return (1 if mu < -s else 0), _near(mu, -s)


def classify_oos(mu: float) -> tuple[int, int]:
    """(α⁺, α⁻); the threshold μ = ±3π/(3π − 8) itself belongs to the 0-sets."""
    return _oos_minus(-mu)[0], _oos_minus(mu)[0]


def ea_edge_curve(mu: float, geometry: EaGeometry = EaGeometry.EDGE) -> float:
    """Boundary λ(μ) of the below-band ea partition in the chosen geometry."""
    k = classifier_constants()
    if geometry == EaGeometry.EDGE:
        if mu == -k.nu_star:
            raise SpectralDomainError("ea boundary has a pole at μ = −ν*")
        return -8.0 + 4.0 / (mu + k.nu_star)
    if mu == -k.mu_star:
        raise SpectralDomainError("ea boundary has a pole at μ = −μ*")
    return 4.0 / (mu + k.mu_star) + 8.0


def _ea_minus(lam: float, mu: float, geometry: EaGeometry) -> tuple[int, bool]:
    k = classifier_constants()
    pole = k.nu_star if geometry == EaGeometry.EDGE else k.mu_star
    if mu == -pole:
        return 1, True
    curve = ea_edge_curve(mu, geometry)
    upper = lam >= curve
    boundary = _near(lam, curve) or _near(mu, -pole)
    if mu > -pole:
        return (0 if upper else 1), boundary
    return (1 if upper else 2), boundary


def classify_ea(lam: float, mu: float, geometry: EaGeometry = EaGeometry.EDGE) -> tuple[int, int]:
    """(β⁺, β⁻) from the three-piece ea partition."""
    return _ea_minus(-lam, -mu, geometry)[0], _ea_minus(lam, mu, geometry)[0]


def _d_region(lam: float, mu: float) -> tuple[int, Optional[int], bool]:
    """
    Minus-side D-region of (λ, μ): returns (α, τ, boundary) where τ is the curve
    index j when (λ, μ) lies on τ_j and None otherwise.
    """
    k = classifier_constants()
    if mu == k.mu0_plus:
        return 2, None, True
    if mu == k.mu0_minus:
        return 3, None, True
    if mu > k.mu0_plus:
        j = 1
    elif mu > k.mu0_minus:
        j = 2
    else:
        j = 3
    curve = lambda_curve(mu)
    boundary = _near(lam, curve) or _near(mu, k.mu0_plus) or _near(mu, k.mu0_minus)
    if lam == curve:
        return j, j, True
    return (j if lam > curve else j + 1), None, boundary


def _ees_minus(c: CouplingTriple) -> tuple[int, bool]:
    alpha, tau, boundary = _d_region(c.lam, c.mu)
    if tau is not None:
        return tau, True
    surface = gamma_surface(c.lam, c.mu)
    boundary = boundary or _near(c.gamma, surface)
    if c.gamma >= surface:
        return alpha - 1, boundary
    return alpha, boundary


def classify_ees(c: CouplingTriple) -> tuple[int, int]:
    """(ζ⁺, ζ⁻) from the D-region of (λ, μ) and the side of the γ-surface."""
    return _ees_minus(reflect_couplings(c))[0], _ees_minus(c)[0]


# ─── Composition ───

def _label(c: CouplingTriple, sign: Sign, geometry: EaGeometry) -> RegionLabel:
    native = c if sign == Sign.MINUS else reflect_couplings(c)
    alpha, b_oos = _oos_minus(native.mu)
    beta, b_ea = _ea_minus(native.lam, native.mu, geometry)
    zeta, b_ees = _ees_minus(native)
    return RegionLabel(
        sign=sign, alpha=alpha, beta=beta, zeta=zeta,
        on_boundary={SectorTag.OOS: b_oos, SectorTag.EA: b_ea, SectorTag.EES: b_ees},
    )


def classify(c: CouplingTriple, geometry: EaGeometry = EaGeometry.EDGE) -> RegionLabels:
    return RegionLabels(minus=_label(c, Sign.MINUS, geometry), plus=_label(c, Sign.PLUS, geometry))


def component_id(prefix: str, sign: Sign, index: int) -> str:
    """Name of a connected component, e.g. "C-2" or "A+1"."""
    return f"{prefix}{'-' if sign == Sign.MINUS else '+'}{index}"


def components_of(label: RegionLabel) -> dict[SectorTag, str]:
    return {
        SectorTag.OOS: component_id("S", label.sign, label.alpha),
        SectorTag.EA: component_id("A", label.sign, label.beta),
        SectorTag.EES: component_id("C", label.sign, label.zeta),
    }


def predicted_counts(c: CouplingTriple, calibrated: Optional[Mapping[str, int]] = None,
                     geometry: EaGeometry = EaGeometry.EDGE) -> PredictedCounts:
    """(m, n) from the region labels, or from a calibrated component → count map."""
    labels = classify(c, geometry)
    if calibrated is None:
        return PredictedCounts(m=labels.minus.total, n=labels.plus.total, source=LabelSource.PRINTED)
    # components missing from the map keep their printed index
    m = sum(calibrated.get(cid, int(cid[2:])) for cid in components_of(labels.minus).values())
    n = sum(calibrated.get(cid, int(cid[2:])) for cid in components_of(labels.plus).values())
    return PredictedCounts(m=m, n=n, source=LabelSource.SELF_CALIBRATED)


def region_cell(c: CouplingTriple, geometry: EaGeometry = EaGeometry.EDGE) -> tuple[int, int]:
    """Indices (m, n) of the cell G_mn containing c."""
    counts = predicted_counts(c, geometry=geometry)
    return counts.m, counts.n


def simple_lemma_counts(gamma: float, lam: float, side: SideTag) -> int:
    """
    ees count at μ = 0 from the closed-form thresholds.

    Below: none when γλ + 4λ + 2γ ≥ 0 and λ > −2, two when it is positive and
    λ < −2, one otherwise. Above: the same with the signs of γ and λ reversed.
    """
    if side == SideTag.ABOVE:
        gamma, lam = -gamma, -lam
    q = gamma * lam + 4.0 * lam + 2.0 * gamma
    if lam > -2.0:
        return 0 if q >= 0.0 else 1
    if lam < -2.0:
        return 2 if q > 0.0 else 1
    return 1


def is_interior(c: CouplingTriple, geometry: EaGeometry = EaGeometry.EDGE,
                step: float = config.INTERIOR_STEP) -> bool:
    """Every ±step·max(1, |x|) perturbation of each coupling keeps both labels."""
    base = classify(c, geometry)
    coords = list(c.as_tuple())
    for axis, direction in itertools.product(range(3), (-1.0, 1.0)):
        moved = coords.copy()
        moved[axis] += direction * step * max(1.0, abs(moved[axis]))
        other = classify(CouplingTriple.of(*moved), geometry)
        for sign in (Sign.MINUS, Sign.PLUS):
            a, b = (base.minus, other.minus) if sign == Sign.MINUS else (base.plus, other.plus)
            if (a.alpha, a.beta, a.zeta) != (b.alpha, b.beta, b.zeta):
                return False
    return True


def find_saturated_triple(box: float = 20.0, resolution: int = 9,
                          geometry: EaGeometry = EaGeometry.EDGE) -> Optional[CouplingTriple]:
    """First interior grid triple (in sweep order) whose cell has m + n = 7."""
    axis = np.linspace(-box, box, resolution)
    for gamma, lam, mu in itertools.product(axis, axis, axis):
        c = CouplingTriple.of(float(gamma), float(lam), float(mu))
        m, n = region_cell(c, geometry)
        if m + n == 7 and is_interior(c, geometry):
            logger.info(f"saturated cell G_{m}{n} at {c.as_tuple()}")
            return c
    return None
