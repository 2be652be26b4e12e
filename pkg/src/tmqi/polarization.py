"""Two-photon polarization state, projections and CHSH estimation.

The retrieved pair is modelled as ``cos(t)|HH> + sin(t)|VV>`` with the
HH/VV coherence scaled by a factor ``mu``. Detector 1 is the transmitted
(H) port of each polarizing beam splitter and counts as outcome +1;
detector 2 is the reflected port, outcome -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateModelError, EmptyTableError, InvalidArgumentError, NoSolutionError


@dataclass(frozen=True)
class PairState:
    theta_schmidt: float = math.pi / 4
    coherence: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta_schmidt <= math.pi / 2:
            raise InvalidArgumentError("theta_schmidt must lie in [0, pi/2]")
        if not 0.0 <= self.coherence <= 1.0:
            raise InvalidArgumentError("coherence must lie in [0, 1]")

    def density_matrix(self) -> np.ndarray:
        """4x4 density operator in the basis HH, HV, VH, VV."""
        c, s = math.cos(self.theta_schmidt), math.sin(self.theta_schmidt)
        rho = np.zeros((4, 4))
        rho[0, 0] = c * c
        rho[3, 3] = s * s
        rho[0, 3] = rho[3, 0] = self.coherence * c * s
        return rho


@dataclass(frozen=True)
class AnalyzerSettings:
    theta_s: float
    theta_as: float

    def __post_init__(self) -> None:
        # analyzer has period pi
        object.__setattr__(self, "theta_s", self.theta_s % math.pi)
        object.__setattr__(self, "theta_as", self.theta_as % math.pi)


@dataclass(frozen=True)
class ChshSettings:
    theta_s: float
    theta_s_prime: float
    theta_as: float
    theta_as_prime: float

    @classmethod
    def canonical(cls) -> "ChshSettings":
        return cls(0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)

    def pairs(self) -> tuple[AnalyzerSettings, ...]:
        """The four setting pairs in estimator order."""
        return (
            AnalyzerSettings(self.theta_s, self.theta_as),
            AnalyzerSettings(self.theta_s, self.theta_as_prime),
            AnalyzerSettings(self.theta_s_prime, self.theta_as),
            AnalyzerSettings(self.theta_s_prime, self.theta_as_prime),
        )


CANONICAL = ChshSettings.canonical()
CHSH_SIGNS = (1, -1, 1, 1)


@dataclass(frozen=True)
class CoincidenceTable:
    """Counts indexed ``c<stokes detector><anti-Stokes detector>``."""

    c11: int = 0
    c12: int = 0
    c21: int = 0
    c22: int = 0

    def __post_init__(self) -> None:
        for v in (self.c11, self.c12, self.c21, self.c22):
            if int(v) != v or v < 0:
                raise InvalidArgumentError(f"counts must be non-negative integers, got {v!r}")

    @property
    def total(self) -> int:
        return self.c11 + self.c12 + self.c21 + self.c22

    def as_list(self) -> list[int]:
        return [self.c11, self.c12, self.c21, self.c22]

    @classmethod
    def from_matrix(cls, mat) -> "CoincidenceTable":
        return cls(int(mat[0][0]), int(mat[0][1]), int(mat[1][0]), int(mat[1][1]))

    def scaled(self, k: int) -> "CoincidenceTable":
        return CoincidenceTable(self.c11 * k, self.c12 * k, self.c21 * k, self.c22 * k)


def calibrate_coherence(v0: float, theta_schmidt: float) -> float:
    """Coherence giving a canonical-angle CHSH value of ``2*sqrt(2)*v0``."""
    s2 = math.sin(2.0 * theta_schmidt)
    if not 0.0 < theta_schmidt < math.pi / 2 or s2 <= 0.0:
        raise DegenerateModelError("sin(2 theta) = 0: state carries no coherence to calibrate")
    if v0 < 0.5:
        raise NoSolutionError(f"v0={v0} < 0.5 would need negative coherence")
    if v0 > 1.0:
        raise InvalidArgumentError("v0 must be <= 1")
    mu = (2.0 * v0 - 1.0) / s2
    if mu > 1.0 + 1e-12:
        raise NoSolutionError(
            f"v0={v0} exceeds the ceiling (1 + sin 2theta)/2 = {(1 + s2) / 2:.6f} for this theta"
        )
    return min(mu, 1.0)


def _arm(theta: float, detector: int) -> tuple[float, float]:
    if detector == 1:
        return math.cos(theta), math.sin(theta)
    if detector == 2:
        return -math.sin(theta), math.cos(theta)  # theta + pi/2
    raise InvalidArgumentError(f"detector index must be 1 or 2, got {detector!r}")


def joint_probability(state: PairState, settings: AnalyzerSettings, a: int, b: int) -> float:
    cs, ss = _arm(settings.theta_s, a)
    ca, sa = _arm(settings.theta_as, b)
    c, s = math.cos(state.theta_schmidt), math.sin(state.theta_schmidt)
    return (
        c * c * cs * cs * ca * ca
        + s * s * ss * ss * sa * sa
        + 2.0 * state.coherence * c * s * cs * ss * ca * sa
    )


def stokes_marginal(state: PairState, theta_s: float, a: int) -> float:
    cs, ss = _arm(theta_s, a)
    c, s = math.cos(state.theta_schmidt), math.sin(state.theta_schmidt)
    return c * c * cs * cs + s * s * ss * ss


def correlation_from_state(state: PairState, settings: AnalyzerSettings) -> float:
    ts, ta = 2.0 * settings.theta_s, 2.0 * settings.theta_as
    return math.cos(ts) * math.cos(ta) + state.coherence * math.sin(
        2.0 * state.theta_schmidt
    ) * math.sin(ts) * math.sin(ta)


def chsh_from_state(state: PairState, settings: ChshSettings = CANONICAL) -> float:
    es = [correlation_from_state(state, p) for p in settings.pairs()]
    return abs(sum(sign * e for sign, e in zip(CHSH_SIGNS, es)))


def correlation_from_counts(table: CoincidenceTable) -> tuple[float, float]:
    """Correlation estimate and its Poisson 1-sigma error."""
    n = table.total
    if n == 0:
        raise EmptyTableError("coincidence table is empty")
    agree = table.c11 + table.c22
    disagree = table.c12 + table.c21
    e = (agree - disagree) / n
    var = (agree * (1.0 - e) ** 2 + disagree * (1.0 + e) ** 2) / (n * n)
    return e, math.sqrt(var)


def chsh_from_counts(
    tables: Sequence[CoincidenceTable], signs: Sequence[int] = CHSH_SIGNS
) -> tuple[float, float]:
    """CHSH value and error from four tables in estimator order.

    Tables are treated as statistically independent, so the per-table
    variances add.
    """
    if len(tables) != 4 or len(signs) != 4:
        raise InvalidArgumentError("need exactly four tables and four signs")
    total = 0.0
    var = 0.0
    for i, (table, sign) in enumerate(zip(tables, signs)):
        try:
            e, sig = correlation_from_counts(table)
        except EmptyTableError as exc:
            raise EmptyTableError(f"table {i} is empty") from exc
        total += sign * e
        var += sig * sig
    return abs(total), math.sqrt(var)
