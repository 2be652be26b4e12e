"""Closed-form detection, visibility and Bell-parameter model.

All quantities are per collection channel. ``beta_ratio`` is the
read-to-write solid-angle fraction ratio (``beta_r / beta_w``); the
write-to-read orientation used when quoting fitted ratios is its reciprocal.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

from .errors import DegenerateModelError, InvalidArgumentError, NoSolutionError

S_MAX = 2.0 * math.sqrt(2.0)
CHI_VALIDITY_LIMIT = 0.1


class V1Convention(str, enum.Enum):
    """How the single-mode visibility entering the multimode formula is set."""

    USE_V0 = "use_v0"
    USE_EXACT_V1 = "use_exact_v1"


class SuppressionMode(str, enum.Enum):
    RATIO_ONLY = "ratio_only"
    FULL_TERM = "full_term"


class DecayKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"
    NONE = "none"


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ChannelParams:
    """Physical parameters of one photon-collection channel.

    Attributes
    ----------
    chi : float
        Pair-creation probability per write pulse.
    gamma : float
        Intrinsic retrieval efficiency of a single spin-wave mode.
    eta_w, eta_r : float
        Stokes and anti-Stokes detection efficiencies.
    xi_se : float
        Branching ratio of the read transition.
    beta_ratio : float
        Read-to-write collection solid-angle ratio ``beta_r / beta_w``.
    v0 : float
        Single-mode base visibility.
    theta_schmidt : float
        Asymmetry angle of the retrieved pair state, radians.
    beta_w_abs : float, optional
        Absolute write solid-angle fraction; only used to report ``N_s``.
    """

    chi: float
    gamma: float
    xi_se: float
    beta_ratio: float
    v0: float
    theta_schmidt: float = 0.81 * math.pi / 4
    eta_w: float = 1.0
    eta_r: float = 1.0
    beta_w_abs: float | None = None

    def __post_init__(self) -> None:
        for name in ("chi", "gamma", "eta_w", "eta_r", "xi_se", "v0"):
            _check_unit(name, getattr(self, name))
        if not self.beta_ratio >= 0.0 or not math.isfinite(self.beta_ratio):
            raise InvalidArgumentError(f"beta_ratio must be finite and >= 0, got {self.beta_ratio!r}")
        if not 0.0 <= self.theta_schmidt <= math.pi / 2:
            raise InvalidArgumentError("theta_schmidt must lie in [0, pi/2]")
        if self.beta_w_abs is not None and not 0.0 < self.beta_w_abs <= 1.0:
            raise InvalidArgumentError("beta_w_abs must lie in (0, 1]")
        if self.chi > CHI_VALIDITY_LIMIT:
            warnings.warn(
                f"chi={self.chi} is outside the chi << 1 regime of the first-order model",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def write_to_read_ratio(self) -> float:
        """``beta_w / beta_r``, the orientation in which fitted ratios are quoted."""
        if self.beta_ratio == 0.0:
            return math.inf
        return 1.0 / self.beta_ratio

    @property
    def n_spin_excitations(self) -> float | None:
        """Total spin excitations per write pulse, ``chi / beta_w``, if known."""
        if self.beta_w_abs is None:
            return None
        return self.chi / self.beta_w_abs

    def with_(self, **changes) -> "ChannelParams":
        return replace(self, **changes)


# Parameters quoted with the S-vs-m fits. Detection efficiencies are not
# published and cancel out of the visibility, so they default to 1.
CH1 = ChannelParams(chi=0.01, gamma=0.158, xi_se=0.093, beta_ratio=1 / 1.7, v0=0.91)
CH2 = ChannelParams(chi=0.01, gamma=0.167, xi_se=0.093, beta_ratio=1.0, v0=0.91)
PRESETS = {"CH1": CH1, "CH2": CH2}


@dataclass(frozen=True)
class DecayModel:
    kind: DecayKind = DecayKind.GAUSSIAN
    tau: float | None = None  # microseconds

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DecayKind(self.kind))
        if self.kind is not DecayKind.NONE:
            if self.tau is None or not self.tau > 0 or not math.isfinite(self.tau):
                raise InvalidArgumentError("decay lifetime tau must be > 0")

    def factor(self, t: float) -> float:
        """Fraction of retrieval efficiency left after storage time ``t``."""
        if t < 0:
            raise InvalidArgumentError(f"storage time must be >= 0, got {t!r}")
        if self.kind is DecayKind.NONE:
            return 1.0
        x = t / self.tau
        if self.kind is DecayKind.EXPONENTIAL:
            return math.exp(-x)
        return math.exp(-x * x)


@dataclass(frozen=True)
class ProbabilityBreakdown:
    signal: float
    imperfect_retrieval_noise: float
    multimode_noise: float

    @property
    def total(self) -> float:
        return self.signal + self.imperfect_retrieval_noise + self.multimode_noise

    @property
    def noise(self) -> float:
        return self.imperfect_retrieval_noise + self.multimode_noise


def _check_modes(m: int) -> None:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise InvalidArgumentError(f"mode number must be a positive integer, got {m!r}")


def excitation_probability(chi: float, m: int) -> float:
    """Probability that an ``m``-pulse write train creates a pair, linearised."""
    _check_unit("chi", chi)
    _check_modes(m)
    p = m * chi
    if p > 1.0:
        warnings.warn(f"m*chi = {p} exceeds 1; clamped", RuntimeWarning, stacklevel=2)
        return 1.0
    return p


def p_stokes(params: ChannelParams) -> float:
    return params.chi * params.eta_w


def p_antistokes(params: ChannelParams, m: int) -> ProbabilityBreakdown:
    _check_modes(m)
    scatter = params.chi * params.beta_ratio * params.xi_se * params.eta_r
    return ProbabilityBreakdown(
        signal=params.chi * params.gamma * params.eta_r,
        imperfect_retrieval_noise=(1.0 - params.gamma) * scatter,
        multimode_noise=(m - 1) * scatter,
    )


def p_coincidence(params: ChannelParams, m: int) -> tuple[float, float]:
    """Return ``(true_part, accidental_part)`` of the Stokes/anti-Stokes coincidence."""
    true_part = params.chi * params.gamma * params.eta_w * params.eta_r
    accidental = p_stokes(params) * p_antistokes(params, m).total
    return true_part, accidental


def visibility_exact(params: ChannelParams, m: int) -> float:
    true_part, accidental = p_coincidence(params, m)
    if true_part <= 0.0:
        raise DegenerateModelError("true coincidence probability is zero; visibility undefined")
    return params.v0 * true_part / (true_part + 2.0 * accidental)


def multimode_noise_coefficient(params: ChannelParams) -> float:
    """Per-extra-mode noise term ``2 chi xi_se beta_ratio / gamma``."""
    if params.gamma == 0.0:
        raise DegenerateModelError("gamma = 0: no retrieved signal")
    return 2.0 * params.chi * params.xi_se * params.beta_ratio / params.gamma


def visibility_approx(
    params: ChannelParams, m: int, v1_convention: V1Convention | str = V1Convention.USE_V0
) -> float:
    _check_modes(m)
    conv = V1Convention(v1_convention)
    coeff = multimode_noise_coefficient(params)
    v1 = params.v0 if conv is V1Convention.USE_V0 else visibility_exact(params, 1)
    return v1 / (1.0 + coeff * (m - 1))


def bell_parameter(
    params: ChannelParams, m: int, v1_convention: V1Convention | str = V1Convention.USE_V0
) -> float:
    return S_MAX * visibility_approx(params, m, v1_convention)


UNBOUNDED = math.inf


def max_modes(
    params: ChannelParams,
    threshold: float = 2.0,
    v1_convention: V1Convention | str = V1Convention.USE_V0,
) -> int | float:
    """Largest ``m`` whose Bell parameter stays above ``threshold``.

    Returns 0 if even a single mode fails and :data:`UNBOUNDED` (``inf``)
    when the multimode noise term vanishes.
    """
    if not threshold > 0:
        raise InvalidArgumentError("threshold must be > 0")
    s1 = bell_parameter(params, 1, v1_convention)
    if not s1 > threshold:
        return 0
    coeff = multimode_noise_coefficient(params)
    if coeff == 0.0:
        return UNBOUNDED
    # S(m) > thr  <=>  (m - 1) < (S(1)/thr - 1) / coeff
    est = (s1 / threshold - 1.0) / coeff
    if est >= 2.0**52:
        # m itself is no longer resolvable in floating point
        return UNBOUNDED
    m = int(math.floor(est)) + 1
    # guard the floor against rounding at the boundary
    while m > 1 and not bell_parameter(params, m, v1_convention) > threshold:
        m -= 1
    while bell_parameter(params, m + 1, v1_convention) > threshold:
        m += 1
    return m


def noise_suppression_factor(
    a: ChannelParams, b: ChannelParams, mode: SuppressionMode | str = SuppressionMode.RATIO_ONLY
) -> float:
    """How many times less multimode noise channel ``a`` carries than ``b``."""
    mode = SuppressionMode(mode)
    if mode is SuppressionMode.RATIO_ONLY:
        if a.beta_ratio == 0.0:
            raise DegenerateModelError("reference channel has zero beta_ratio")
        return b.beta_ratio / a.beta_ratio
    try:
        ka = a.beta_ratio * a.xi_se / a.gamma
        kb = b.beta_ratio * b.xi_se / b.gamma
        return kb / ka
    except ZeroDivisionError as exc:
        raise DegenerateModelError("noise coefficient is zero or undefined") from exc


def bell_vs_time(
    params: ChannelParams,
    m: int,
    decay: DecayModel,
    t: float,
    v1_convention: V1Convention | str = V1Convention.USE_V0,
) -> float:
    d = decay.factor(t)
    gamma_t = params.gamma * d
    if gamma_t == 0.0 and params.gamma > 0.0 and m > 1 and params.chi * params.xi_se * params.beta_ratio > 0:
        # fully decayed: signal vanishes against the multimode noise
        return 0.0
    return bell_parameter(params.with_(gamma=gamma_t), m, v1_convention)


def invert_gamma_for_bell(params: ChannelParams, m: int, s_target: float) -> float:
    """Retrieval efficiency at which the (``use_v0``) Bell parameter equals ``s_target``."""
    _check_modes(m)
    s_top = S_MAX * params.v0
    noise = 2.0 * params.chi * (m - 1) * params.xi_se * params.beta_ratio
    if noise == 0.0:
        if math.isclose(s_target, s_top, rel_tol=1e-12, abs_tol=0.0):
            return params.gamma
        raise NoSolutionError(f"S = {s_top:.6g} for every gamma; target {s_target} unreachable")
    if not 0.0 < s_target < s_top:
        raise NoSolutionError(f"target S must lie in (0, {s_top:.6g}), got {s_target}")
    gamma = noise / (s_top / s_target - 1.0)
    if gamma > 1.0:
        raise NoSolutionError(f"target S={s_target} needs gamma={gamma:.4g} > 1")
    return gamma
