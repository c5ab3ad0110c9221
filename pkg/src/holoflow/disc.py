"""Unit-disc primitives: points, boundary angles, sampling schedules.

All values are immutable after construction and safe to share between
concurrent sweeps.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from . import config

TWO_PI = 2.0 * math.pi


def canonical_angle(theta: float) -> float:
    """Reduce an angle into [0, 2*pi)."""
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    if theta >= TWO_PI:   # fmod rounding at the seam
        theta -= TWO_PI
    return theta


@dataclass(frozen=True)
class DiscPoint:
    """A point strictly inside the unit disc."""

    value: complex

    def __post_init__(self):
        if not abs(self.value) < 1.0:
            raise ValueError(f"point {self.value} is not strictly inside the unit disc")

    def __complex__(self) -> complex:
        return self.value


def _snap_unit(w: complex) -> complex:
    """Round components within a few ulp of 0 or +-1 to the exact value.

    Radial probes divide by gaps as small as 2^-48; a stray 1e-16
    component in e^{i pi} would otherwise pollute every extrapolation.
    """
    re, im = w.real, w.imag
    for exact in (-1.0, 0.0, 1.0):
        if abs(re - exact) < 4e-16:
            re = exact
        if abs(im - exact) < 4e-16:
            im = exact
    w = complex(re, im)
    return w / abs(w)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the unit circle, stored by its canonical angle."""

    theta: float
    value: complex = field(init=False)

    def __post_init__(self):
        theta = canonical_angle(float(self.theta))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "value", _snap_unit(cmath.exp(1j * theta)))

    @classmethod
    def from_complex(cls, w: complex, tol: float = 1e-9) -> "BoundaryPoint":
        r = abs(w)
        if abs(r - 1.0) > tol:
            raise ValueError(f"|{w}| = {r} is not on the unit circle")
        return cls(cmath.phase(w))

    def __complex__(self) -> complex:
        return self.value


@dataclass(frozen=True)
class RadialSchedule:
    """Dyadic radii r_k = 1 - scale * 2**-k for k in [k_min, k_max].

    Dyadic gaps make log(1 - r_k) exactly linear in k, which keeps slope
    fits on log-log probes clean.  The gap never drops below 2**-48.
    """

    k_min: int
    k_max: int
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.scale <= 1.0:
            raise ValueError("scale must lie in (0, 1]")
        if self.k_max < self.k_min:
            raise ValueError("k_max must be >= k_min")
        if self.k_min < 0:
            raise ValueError("k_min must be nonnegative")
        floor = 2.0 ** (-config.SCHEDULE_FLOOR_LOG2)
        if self.scale * 2.0 ** (-self.k_max) < floor:
            raise ValueError(
                f"gap at k_max={self.k_max} falls below the 2^-{config.SCHEDULE_FLOOR_LOG2} floor"
            )
        if self.scale * 2.0 ** (-self.k_min) >= 1.0:
            raise ValueError("first radius is not inside (0, 1)")

    @property
    def ks(self):
        return range(self.k_min, self.k_max + 1)

    def gaps(self) -> list[float]:
        """The exact gaps 1 - r_k."""
        return [self.scale * 2.0 ** (-k) for k in self.ks]

    def radii(self) -> list[float]:
        return [1.0 - g for g in self.gaps()]

    def __len__(self) -> int:
        return self.k_max - self.k_min + 1


DEFAULT_SCHEDULE = RadialSchedule(k_min=4, k_max=40)


@dataclass(frozen=True)
class StolzRay:
    """Straight approach path anchor * (1 - (1-r) e^{i psi}) toward a boundary point.

    psi = 0 is the radius; |psi| close to pi/2 grazes the circle.
    """

    anchor: BoundaryPoint
    psi: float = 0.0

    def __post_init__(self):
        if not abs(self.psi) < math.pi / 2.0 - 1e-9:
            raise ValueError("approach angle must stay strictly inside (-pi/2, pi/2)")

    def point(self, r: float) -> complex:
        return self.anchor.value * (1.0 - (1.0 - r) * cmath.exp(1j * self.psi))


def stolz_points(ray: StolzRay, sched: RadialSchedule) -> list[DiscPoint]:
    """Sample the ray at the schedule radii; every sample must stay inside the disc."""
    pts = []
    for r in sched.radii():
        z = ray.point(r)
        if abs(z) >= 1.0:
            raise ValueError(
                f"ray psi={ray.psi} exits the disc at r={r}; reduce |psi| or start deeper"
            )
        pts.append(DiscPoint(z))
    return pts


def cayley(z: complex) -> complex:
    """(1+z)/(1-z): maps the disc onto the right half-plane, 0 to 1."""
    if z == 1:
        raise ZeroDivisionError("cayley map has a pole at z = 1")
    return (1.0 + z) / (1.0 - z)


def hyperbolic_distance(z, w) -> float:
    """Poincare distance k(z, w) = atanh |(z-w)/(1 - conj(w) z)| (nats)."""
    zc = complex(z)
    wc = complex(w)
    if not (abs(zc) < 1.0 and abs(wc) < 1.0):
        raise ValueError("hyperbolic distance needs points strictly inside the disc")
    rho = abs((zc - wc) / (1.0 - wc.conjugate() * zc))
    return math.atanh(rho)
