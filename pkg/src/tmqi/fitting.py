"""One-parameter weighted least-squares fits of Bell-parameter data.

Fits run a coarse logarithmic scan to bracket the minimum and then refine
with golden-section search on the log of the parameter. The 1-sigma error
comes from the numerical curvature of the chi-square at the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, DegreesOfFreedomError, InvalidArgumentError, UnidentifiableError
from .noise_model import ChannelParams, DecayKind, DecayModel, V1Convention, bell_parameter, bell_vs_time

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DataPoint:
    x: float
    s: float
    sigma: float


@dataclass(frozen=True)
class DataSeries:
    points: tuple[DataPoint, ...]

    def __post_init__(self):
        pts = tuple(p if isinstance(p, DataPoint) else DataPoint(*p) for p in self.points)
        if not pts:
            raise InvalidArgumentError("data series is empty")
        for p in pts:
            if not p.sigma > 0:
                raise InvalidArgumentError(f"sigma must be > 0 (x={p.x})")
        xs = [p.x for p in pts]
        if len(set(xs)) != len(xs):
            raise InvalidArgumentError("x values must be distinct")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_arrays(cls, x, s, sigma) -> "DataSeries":
        return cls(tuple(DataPoint(float(a), float(b), float(c)) for a, b, c in zip(x, s, sigma)))

    @property
    def x(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    @property
    def s(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def sigma(self) -> np.ndarray:
        return np.array([p.sigma for p in self.points])

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class FitResult:
    value: float
    std_error: float
    chi2_per_dof: float
    n_iterations: int
    trace: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "chi2_per_dof": self.chi2_per_dof,
            "n_iterations": self.n_iterations,
        }


@dataclass(frozen=True)
class ResidualReport:
    residuals: tuple[float, ...]
    chi2: float
    chi2_per_dof: float


def residual_report(
    series: DataSeries, model: Callable[[float], float], n_params: int = 1
) -> ResidualReport:
    n = len(series)
    if n <= n_params:
        raise DegreesOfFreedomError(f"{n} points leave no degrees of freedom for {n_params} parameters")
    res = tuple((p.s - model(p.x)) / p.sigma for p in series.points)
    chi2 = float(sum(r * r for r in res))
    return ResidualReport(res, chi2, chi2 / (n - n_params))


def _chi2(series: DataSeries, model: Callable[[float], float]) -> float:
    return float(sum(((p.s - model(p.x)) / p.sigma) ** 2 for p in series.points))


def minimize_log_scalar(
    objective: Callable[[float], float],
    lo: float,
    hi: float,
    n_scan: int = 241,
    rtol: float = 1e-10,
    max_iter: int = 500,
) -> tuple[float, int, list[float]]:
    """Minimise ``objective`` over a positive parameter in ``[lo, hi]``.

    Returns the minimiser, the number of golden-section iterations and the
    trace of the best objective value after each iteration.
    """
    grid = np.geomspace(lo, hi, n_scan)
    vals = [objective(float(g)) for g in grid]
    if not all(math.isfinite(v) for v in vals):
        vals = [v if math.isfinite(v) else math.inf for v in vals]
    i = int(np.argmin(vals))
    if i == 0 or i == n_scan - 1:
        raise ConvergenceError(
            f"objective minimum lies at the search boundary ({grid[i]:.4g}); parameter unbounded"
        )
    a, b = math.log(grid[i - 1]), math.log(grid[i + 1])
    f = lambda u: objective(math.exp(u))  # noqa: E731
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    trace = [min(fc, fd)]
    it = 0
    while abs(b - a) > rtol:
        it += 1
        if it > max_iter:
            raise ConvergenceError(f"golden-section search did not converge in {max_iter} iterations")
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        trace.append(min(fc, fd, trace[-1]))
    u_best = c if fc <= fd else d
    return math.exp(u_best), it, trace


def _std_error(objective: Callable[[float], float], x: float) -> float:
    h = 1e-4 * abs(x)
    f0 = objective(x)
    curv = (objective(x + h) - 2.0 * f0 + objective(x - h)) / (h * h)
    if not curv > 0:
        return math.inf
    # chi2 rises by 1 at one standard deviation
    return math.sqrt(2.0 / curv)


def _finish(series, objective, value, it, trace) -> FitResult:
    dof = len(series) - 1
    chi2 = objective(value)
    return FitResult(
        value=value,
        std_error=_std_error(objective, value),
        chi2_per_dof=chi2 / dof if dof > 0 else 0.0,
        n_iterations=it,
        trace=tuple(trace),
    )


def fit_beta_ratio(
    series: DataSeries,
    fixed: ChannelParams,
    v1_convention: V1Convention | str = V1Convention.USE_V0,
    orientation: str = "write_to_read",
) -> FitResult:
    """Fit the collection solid-angle ratio to S-vs-m data.

    ``orientation="write_to_read"`` reports ``beta_w / beta_r`` (the way the
    fitted ratio is usually quoted); ``"read_to_write"`` fits ``beta_ratio``
    itself. A single point is accepted and gives the exact inversion.
    """
    if orientation not in ("write_to_read", "read_to_write"):
        raise InvalidArgumentError(f"unknown orientation {orientation!r}")
    ms = [p.x for p in series.points]
    for m in ms:
        if m != int(m) or m < 1:
            raise InvalidArgumentError(f"mode numbers must be positive integers, got {m}")
    if all(m == 1 for m in ms):
        raise UnidentifiableError("all points at m = 1: the noise ratio does not enter the model")

    def model_for(q: float) -> Callable[[float], float]:
        ratio = 1.0 / q if orientation == "write_to_read" else q
        params = fixed.with_(beta_ratio=ratio)
        return lambda m: bell_parameter(params, int(m), v1_convention)

    objective = lambda q: _chi2(series, model_for(q))  # noqa: E731
    value, it, trace = minimize_log_scalar(objective, 1e-4, 1e4)
    return _finish(series, objective, value, it, trace)


def fit_lifetime(
    series: DataSeries,
    fixed: ChannelParams,
    m: int,
    kind: DecayKind | str = DecayKind.GAUSSIAN,
    v1_convention: V1Convention | str = V1Convention.USE_V0,
) -> FitResult:
    """Fit the storage lifetime (microseconds) to S-vs-t data."""
    kind = DecayKind(kind)
    if kind is DecayKind.NONE:
        raise InvalidArgumentError("decay kind 'none' has no lifetime to fit")
    if len(series) < 2:
        raise UnidentifiableError("lifetime fit needs at least two time points")
    if all(p.x == 0 for p in series.points):
        raise UnidentifiableError("all points at t = 0: lifetime does not enter the model")
    for p in series.points:
        if p.x < 0:
            raise InvalidArgumentError(f"storage time must be >= 0, got {p.x}")

    def objective(tau: float) -> float:
        decay = DecayModel(kind, tau)
        return _chi2(series, lambda t: bell_vs_time(fixed, m, decay, t, v1_convention))

    value, it, trace = minimize_log_scalar(objective, 1e-3, 1e6)
    return _finish(series, objective, value, it, trace)
