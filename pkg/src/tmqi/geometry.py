"""Gaussian-beam propagation through the collection optics.

Beam diameters are 1/e^2 intensity full widths. The source waist sits at
the source plane (z = 0) and elements are applied in order along z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

from .errors import InvalidArgumentError

MM = 1e-3


@dataclass(frozen=True)
class FreeSpace:
    length: float

    def __post_init__(self):
        if not self.length >= 0:
            raise InvalidArgumentError("free-space length must be >= 0")


@dataclass(frozen=True)
class ThinLens:
    focal_length: float

    def __post_init__(self):
        if self.focal_length == 0 or not math.isfinite(self.focal_length):
            raise InvalidArgumentError("focal length must be finite and nonzero")


Element = Union[FreeSpace, ThinLens]


@dataclass(frozen=True)
class BeamPath:
    wavelength: float
    source_waist_radius: float
    elements: tuple[Element, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.wavelength > 0:
            raise InvalidArgumentError("wavelength must be > 0")
        if not self.source_waist_radius > 0:
            raise InvalidArgumentError("source waist radius must be > 0")
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def total_length(self) -> float:
        return sum(e.length for e in self.elements if isinstance(e, FreeSpace))

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.source_waist_radius**2 / self.wavelength


@dataclass(frozen=True)
class ChannelGeometry:
    write_aperture_diameter: float
    read_aperture_diameter: float

    def __post_init__(self):
        if not (self.write_aperture_diameter > 0 and self.read_aperture_diameter > 0):
            raise InvalidArgumentError("aperture diameters must be > 0")


def _radius(q: complex, wavelength: float) -> float:
    # Im(1/q) = -lambda / (pi w^2)
    return math.sqrt(-wavelength / (math.pi * (1.0 / q).imag))


def propagate_beam(path: BeamPath, z: float) -> float:
    """Beam diameter at distance ``z`` from the source plane."""
    total = path.total_length
    if not 0.0 <= z <= total * (1 + 1e-12):
        raise InvalidArgumentError(f"z={z} outside the path [0, {total}]")
    q = complex(0.0, path.rayleigh_range)
    pos = 0.0
    for el in path.elements:
        if isinstance(el, ThinLens):
            q = 1.0 / (1.0 / q - 1.0 / el.focal_length)
            continue
        step = min(el.length, z - pos)
        if step <= 0.0:
            break
        q += step
        pos += step
        if pos >= z:
            break
    return 2.0 * _radius(q, path.wavelength)


def beam_profile(path: BeamPath, n: int = 101) -> list[tuple[float, float]]:
    total = path.total_length
    zs = [total * i / (n - 1) for i in range(n)]
    return [(z, propagate_beam(path, z)) for z in zs]


def solid_angle_ratio(geometry: ChannelGeometry) -> float:
    """Write-to-read collection solid-angle ratio, ``(A_w / A_r)^2``."""
    return (geometry.write_aperture_diameter / geometry.read_aperture_diameter) ** 2


@dataclass(frozen=True)
class ChannelPreset:
    name: str
    geometry: ChannelGeometry
    path: BeamPath | None = None
    # quoted beam diameters at named planes, metres; data, not model output
    quoted_diameters: dict = field(default_factory=dict)


WAVELENGTH = 795e-9


def channel_presets() -> tuple[ChannelPreset, ChannelPreset]:
    """Asymmetric (CH1) and symmetric (CH2) collection channels.

    The focusing lens is taken to sit directly at the write collimator
    output; its exact position is not given.
    """
    ch1_path = BeamPath(
        wavelength=WAVELENGTH,
        source_waist_radius=1.3 * MM,
        elements=(ThinLens(2.4), FreeSpace(2.45), FreeSpace(1.25)),
    )
    ch1 = ChannelPreset(
        "CH1",
        ChannelGeometry(2.6 * MM, 1.2 * MM),
        ch1_path,
        {"write_collimator": 2.6 * MM, "read_collimator": 1.2 * MM, "atoms": 1.3 * MM},
    )
    ch2 = ChannelPreset("CH2", ChannelGeometry(1.2 * MM, 1.2 * MM))
    return ch1, ch2
