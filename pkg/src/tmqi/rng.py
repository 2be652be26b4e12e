"""Counter-based random stream keyed by ``(seed, trial, draw)``.

Every uniform variate is a pure function of the run seed, the trial index
and a per-trial draw counter, built from the splitmix64 finaliser. Trials
can therefore be evaluated in any order, in any chunking, by any backend,
and still consume exactly the same numbers.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DRAW_STEP = 0xD1B54A32D192ED03
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def run_key(seed: int) -> int:
    if not 0 <= seed <= MASK64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return mix64(seed + GOLDEN)


def trial_key(key: int, trial: int) -> int:
    return mix64(key ^ ((trial * GOLDEN) & MASK64))


def uniform(tkey: int, draw: int) -> float:
    return (mix64(tkey + (draw + 1) * DRAW_STEP) >> 11) * INV_2_53


class TrialStream:
    """Random stream of a single trial; draws are addressed explicitly."""

    __slots__ = ("seed", "trial", "_tkey")

    def __init__(self, seed: int, trial: int):
        self.seed = seed
        self.trial = trial
        self._tkey = trial_key(run_key(seed), trial)

    def uniform(self, draw: int) -> float:
        return uniform(self._tkey, draw)


# numpy versions; uint64 arithmetic wraps modulo 2**64 without warnings

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)


def mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * np.uint64(MIX1)
    z = (z ^ (z >> _U27)) * np.uint64(MIX2)
    return z ^ (z >> _U31)


def trial_keys_np(key: int, trials: np.ndarray) -> np.ndarray:
    t = trials.astype(np.uint64) * np.uint64(GOLDEN)
    return mix64_np(np.uint64(key) ^ t)


def uniform_np(tkeys: np.ndarray, draw) -> np.ndarray:
    """Uniforms for every trial key at draw index ``draw`` (scalar or array)."""
    d = (np.array(draw, dtype=np.uint64, ndmin=1) + np.uint64(1)) * np.uint64(DRAW_STEP)
    return (mix64_np(tkeys + d) >> _U11).astype(np.float64) * INV_2_53
