"""Event-level simulation of the write-train / feed-forward readout protocol.

Each trial applies ``m`` write pulses. Every pulse creates a pair with
probability ``chi``; the earliest detected Stokes photon heralds its spin
wave, which is read out while later heralds are dropped. The readout yields
the correlated anti-Stokes photon with probability ``gamma`` plus a Poisson
number of unpolarized noise photons from the other stored spin waves.

Randomness is addressed by ``(seed, trial, draw)`` (see :mod:`tmqi.rng`),
so results do not depend on chunking, worker count or backend.
"""

from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from . import rng
from .errors import InsufficientStatisticsError, InvalidArgumentError, ResourceLimitError
from .noise_model import ChannelParams
from .polarization import (
    CANONICAL,
    AnalyzerSettings,
    ChshSettings,
    CoincidenceTable,
    PairState,
    calibrate_coherence,
    chsh_from_counts,
    chsh_from_state,
    correlation_from_state,
    joint_probability,
    stokes_marginal,
)

if os.environ.get("TMQI_PURE_PYTHON"):
    from . import _kernel_py as _kernel
else:
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        from . import _kernel_py as _kernel

BACKEND: str = _kernel.BACKEND
CHUNK_TRIALS = 1 << 16
DEFAULT_EVENT_BUDGET = 10**10


class Schedule(str, enum.Enum):
    ROUND_ROBIN = "round_robin"
    PER_BLOCK = "per_block"


_SCHEDULE_CODE = {Schedule.ROUND_ROBIN: 0, Schedule.PER_BLOCK: 1}


@dataclass(frozen=True)
class SimConfig:
    params: ChannelParams
    m: int
    n_trials: int
    seed: int = 0
    settings: ChshSettings = CANONICAL
    setting_schedule: Schedule = Schedule.ROUND_ROBIN

    def __post_init__(self) -> None:
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgumentError(f"m must be >= 1, got {self.m!r}")
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise InvalidArgumentError(f"n_trials must be >= 1, got {self.n_trials!r}")
        if not 0 <= self.seed <= rng.MASK64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "setting_schedule", Schedule(self.setting_schedule))

    @property
    def noise_mean(self) -> float:
        """Mean number of noise photons reaching the anti-Stokes mode per readout."""
        p = self.params
        return p.chi * p.beta_ratio * p.xi_se * ((1.0 - p.gamma) + (self.m - 1))

    def state(self) -> PairState:
        p = self.params
        return PairState(p.theta_schmidt, calibrate_coherence(p.v0, p.theta_schmidt))

    def setting_of(self, trial: int) -> int:
        if self.setting_schedule is Schedule.ROUND_ROBIN:
            return trial % 4
        return (trial * 4) // self.n_trials


@dataclass
class TrialRecord:
    stokes_hits: list[tuple[int, int]] = field(default_factory=list)
    readout_bin: int | None = None
    as_signal_hit: int | None = None
    as_noise_hits: list[int] = field(default_factory=list)

    @property
    def herald(self) -> tuple[int, int] | None:
        return first_herald(self.stokes_hits)

    def coincidences(self) -> list[tuple[int, int]]:
        h = self.herald
        if h is None:
            return []
        clicks = ([self.as_signal_hit] if self.as_signal_hit is not None else []) + self.as_noise_hits
        return [(h[1], b) for b in clicks]


@dataclass
class SimResult:
    tables: list[CoincidenceTable]
    noise_tables: list[CoincidenceTable]
    n_trials: int
    n_heralds: int
    n_readouts: int
    per_bin_stokes_counts: list[int]
    as_detection_given_herald: int
    trials_per_setting: list[int]

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "n_heralds": self.n_heralds,
            "n_readouts": self.n_readouts,
            "as_detection_given_herald": self.as_detection_given_herald,
            "per_bin_stokes_counts": list(self.per_bin_stokes_counts),
            "trials_per_setting": list(self.trials_per_setting),
            "tables": [t.as_list() for t in self.tables],
            "noise_tables": [t.as_list() for t in self.noise_tables],
        }


def first_herald(stokes_hits: Iterable[tuple[int, int]]) -> tuple[int, int] | None:
    """Earliest Stokes detection; detector 1 wins a same-bin double click."""
    hits = list(stokes_hits)
    if not hits:
        return None
    return min(hits, key=lambda h: (h[0], h[1]))


def _setting_probs(state: PairState, setting: AnalyzerSettings) -> tuple[float, tuple[float, float]]:
    """P(Stokes on detector 1) and P(anti-Stokes on detector 1 | Stokes detector)."""
    p1 = stokes_marginal(state, setting.theta_s, 1)
    cond = []
    for a in (1, 2):
        marg = stokes_marginal(state, setting.theta_s, a)
        cond.append(joint_probability(state, setting, a, 1) / marg if marg > 0.0 else 0.5)
    return p1, (cond[0], cond[1])


def run_trial(stream: rng.TrialStream, config: SimConfig, setting: AnalyzerSettings) -> TrialRecord:
    """Scalar reference implementation of one trial.

    Consumes the same draw indices as the compiled and numpy kernels.
    """
    p = config.params
    m = config.m
    p1, cond = _setting_probs(config.state(), setting)
    rec = TrialRecord()
    for i in range(m):
        if stream.uniform(3 * i) < p.chi:
            a = 1 if stream.uniform(3 * i + 1) < p1 else 2
            if stream.uniform(3 * i + 2) < p.eta_w:
                rec.stokes_hits.append((i + 1, a))
    herald = first_herald(rec.stokes_hits)
    if herald is None:
        return rec
    rec.readout_bin = herald[0]
    a = herald[1]
    base = 3 * m
    if stream.uniform(base) < p.gamma:
        b = 1 if stream.uniform(base + 1) < cond[a - 1] else 2
        if stream.uniform(base + 2) < p.eta_r:
            rec.as_signal_hit = b
    lam = config.noise_mean
    u = stream.uniform(base + 3)
    k = 0
    prob = math.exp(-lam)
    cdf = prob
    while u >= cdf:
        k += 1
        prob = prob * lam / k
        cdf += prob
        if prob == 0.0:
            break
    for j in range(k):
        if stream.uniform(base + 4 + 2 * j) < p.eta_r:
            rec.as_noise_hits.append(1 if stream.uniform(base + 5 + 2 * j) < 0.5 else 2)
    return rec


def _tables(arr: np.ndarray) -> list[CoincidenceTable]:
    return [CoincidenceTable.from_matrix(arr[s]) for s in range(4)]


def simulate(
    config: SimConfig,
    workers: int = 1,
    event_budget: int = DEFAULT_EVENT_BUDGET,
    event_log: IO[str] | None = None,
) -> SimResult:
    """Run ``config.n_trials`` trials and tally coincidences per setting pair.

    ``event_log``, if given, receives one JSON line per heralded trial. It is
    produced by the scalar reference path and is slow for large runs.
    """
    if config.n_trials * config.m > event_budget:
        raise ResourceLimitError(
            f"n_trials*m = {config.n_trials * config.m} exceeds budget {event_budget}"
        )
    p = config.params
    state = config.state()
    probs = [_setting_probs(state, s) for s in config.settings.pairs()]
    stokes_p1 = np.array([pr[0] for pr in probs], dtype=np.float64)
    cond_p1 = np.array([pr[1] for pr in probs], dtype=np.float64)
    lam = config.noise_mean
    key = rng.run_key(config.seed)
    sched = _SCHEDULE_CODE[config.setting_schedule]

    def work(start: int) -> tuple:
        stop = min(start + CHUNK_TRIALS, config.n_trials)
        return _kernel.simulate_chunk(
            key, start, stop, config.n_trials, config.m, sched,
            p.chi, p.eta_w, p.gamma, p.eta_r, lam, math.exp(-lam), stokes_p1, cond_p1,
        )

    starts = range(0, config.n_trials, CHUNK_TRIALS)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]

    tables = sum(pt[0] for pt in parts)
    noise = sum(pt[1] for pt in parts)
    per_bin = sum(pt[2] for pt in parts)
    per_setting = sum(pt[3] for pt in parts)
    n_heralds = sum(pt[4] for pt in parts)
    clicks = sum(pt[5] for pt in parts)

    if event_log is not None:
        write_event_log(config, event_log)

    return SimResult(
        tables=_tables(tables),
        noise_tables=_tables(noise),
        n_trials=config.n_trials,
        n_heralds=n_heralds,
        # every herald fires exactly one read pulse
        n_readouts=n_heralds,
        per_bin_stokes_counts=[int(c) for c in per_bin],
        as_detection_given_herald=clicks,
        trials_per_setting=[int(c) for c in per_setting],
    )


def iter_trials(config: SimConfig, trials: Iterable[int] | None = None):
    """Yield ``(trial, setting index, TrialRecord)`` via the scalar path."""
    pairs = config.settings.pairs()
    for t in trials if trials is not None else range(config.n_trials):
        s = config.setting_of(t)
        yield t, s, run_trial(rng.TrialStream(config.seed, t), config, pairs[s])


def write_event_log(config: SimConfig, out: IO[str]) -> None:
    for t, s, rec in iter_trials(config):
        if rec.readout_bin is None:
            continue
        line = {
            "trial": t,
            "setting": s,
            "readout_bin": rec.readout_bin,
            "coincidences": [list(c) for c in rec.coincidences()],
        }
        out.write(json.dumps(line, separators=(",", ":")) + "\n")


def expected_chsh(config: SimConfig) -> float:
    """CHSH value expected from the event model: noise clicks dilute the signal."""
    p = config.params
    lam = config.noise_mean
    s_state = chsh_from_state(config.state(), config.settings)
    if p.gamma + lam == 0.0:
        return 0.0
    return s_state * p.gamma / (p.gamma + lam)


def expected_rates(config: SimConfig) -> dict[str, float]:
    p = config.params
    lam = config.noise_mean
    return {
        "stokes_per_bin": p.chi * p.eta_w,
        "herald": 1.0 - (1.0 - p.chi * p.eta_w) ** config.m,
        "antistokes_given_herald": (p.gamma + lam) * p.eta_r,
        "noise_mean": lam,
    }


def chsh_experiment(config: SimConfig, workers: int = 1, result: SimResult | None = None):
    """Simulate and estimate CHSH; returns ``(s, sigma_s, expected)``."""
    if result is None:
        result = simulate(config, workers=workers)
    totals = [t.total for t in result.tables]
    if min(totals) == 0:
        i = int(np.argmin(totals))
        setting = config.settings.pairs()[i]
        raise InsufficientStatisticsError(
            f"table {i} (theta_s={math.degrees(setting.theta_s):g} deg, "
            f"theta_as={math.degrees(setting.theta_as):g} deg) has {totals[i]} coincidences"
        )
    s, sigma = chsh_from_counts(result.tables)
    return s, sigma, expected_chsh(config)


def trials_for_sigma(params: ChannelParams, m: int, sigma_target: float, safety: float = 1.3) -> int:
    """Rough trial count giving a CHSH standard error near ``sigma_target``."""
    cfg = SimConfig(params, m, 1)
    rates = expected_rates(cfg)
    per_trial = rates["herald"] * rates["antistokes_given_herald"]
    if per_trial <= 0:
        raise InsufficientStatisticsError("coincidence rate is zero")
    lam = cfg.noise_mean
    dilution = params.gamma / (params.gamma + lam)
    state = cfg.state()
    # sigma_E^2 = (1 - E^2)/N per table; four tables each see a quarter of the trials
    es = [correlation_from_state(state, pr) * dilution for pr in cfg.settings.pairs()]
    var_per_coinc = sum(1 - e * e for e in es)
    n_coinc = 4 * var_per_coinc / sigma_target**2
    return int(math.ceil(safety * n_coinc / per_trial))
