"""Contact arcs on the unit circle.

An open arc is a contact arc when the generator extends through it
tangentially: Re(conj(z) G(z)) = 0 with G != 0 along the arc.  Tangency is
tested by radial extrapolation of Re(conj(s) G(r s)), so generators
without a closed-form continuation are handled uniformly.  The circle flow
traverses each arc from its initial to its final endpoint; life-times and
endpoint classes follow from the flow and the Koenigs boundary values.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .disc import TWO_PI, BoundaryPoint, RadialSchedule, canonical_angle
from .flow import BoundaryOrbit, boundary_flow
from .generators import GeneratorSpec
from .koenigs import KoenigsEvaluator

__all__ = [
    "ContactArcReport",
    "HerglotzMassReport",
    "detect_arcs",
    "endpoint_classify",
    "herglotz_mass",
    "life_time",
    "radial_tangency",
]

TANGENCY_SCHED = RadialSchedule(6, 22)


def _tangency_samples(gen: GeneratorSpec, thetas: np.ndarray,
                      sched: RadialSchedule) -> tuple[np.ndarray, np.ndarray]:
    """(re_limit, im_max) of conj(s) G(r s) per angle, vectorized."""
    radii = np.asarray(sched.radii())
    sigma = np.exp(1j * thetas)
    zs = (sigma[:, None] * radii[None, :]).ravel()
    vals = gen.G_many(zs).reshape(len(thetas), len(radii))
    zg = np.conj(sigma)[:, None] * vals
    re = zg.real
    # Richardson ladder along the radial axis (gap ratio 2, orders 1..4)
    level = re[:, -6:]
    for m in range(1, 5):
        f = 2.0 ** m
        level = (f * level[:, 1:] - level[:, :-1]) / (f - 1.0)
    re_limit = level[:, -1]
    im_max = np.max(np.abs(zg.imag[:, len(radii) // 2:]), axis=1)
    return re_limit, im_max


def radial_tangency(gen: GeneratorSpec, theta: float,
                    sched: RadialSchedule = TANGENCY_SCHED) -> tuple[float, float]:
    """(extrapolated Re(conj(s) G(r s)), max |Im(conj(s) G(r s))| on the tail).

    A vanishing real limit with nonvanishing imaginary magnitude flags
    membership in a contact arc.
    """
    re_limit, im_max = _tangency_samples(gen, np.array([float(theta)]), sched)
    return float(re_limit[0]), float(im_max[0])


def _is_tangent(gen: GeneratorSpec, theta: float,
                sched: RadialSchedule = TANGENCY_SCHED) -> bool:
    re_limit, im_max = radial_tangency(gen, theta, sched)
    return abs(re_limit) < config.TANGENCY_RE_TOL and im_max > config.TANGENCY_IM_MIN


@dataclass
class ContactArcReport:
    start: float                  # canonical angle of the arc's low end
    length: float                 # in (0, 2*pi)
    orientation: int              # +1: flow increases theta; -1: decreases
    x0: BoundaryPoint             # initial point w.r.t. the flow
    x1: BoundaryPoint             # final point
    g_x0: complex
    g_x1: complex | None          # None encodes the infinity tag
    x0_class: str = "unclassified"   # fixed-point | contact-point
    x1_class: str = "unclassified"   # dw-point | absorbed-into-disc
    life_times: dict = field(default_factory=dict)

    @property
    def end(self) -> float:
        return self.start + self.length

    def contains(self, theta: float, margin: float = 0.0) -> bool:
        t = canonical_angle(theta)
        lo, hi = self.start + margin, self.end - margin
        return lo < t < hi or lo < t + TWO_PI < hi

    def interior_angles(self, n: int) -> np.ndarray:
        pad = min(self.length / (n + 1), self.length / 8)
        return self.start + np.linspace(pad, self.length - pad, n)

    def to_json_dict(self) -> dict:
        return {
            "start": self.start,
            "length": self.length,
            "orientation": self.orientation,
            "x0": [self.x0.value.real, self.x0.value.imag],
            "x1": [self.x1.value.real, self.x1.value.imag],
            "x0_class": self.x0_class,
            "x1_class": self.x1_class,
            "g_x0": [self.g_x0.real, self.g_x0.imag],
            "g_x1": None if self.g_x1 is None else [self.g_x1.real, self.g_x1.imag],
            "life_times": {str(k): v for k, v in self.life_times.items()},
        }


_FINE_SCHED = RadialSchedule(6, 30, scale=2.0 ** -14)


def _bisect_edge(gen: GeneratorSpec, inside: float, outside: float) -> float:
    """Angle of the arc edge between a tangent angle and a non-tangent one.

    Two stages: the default radial schedule localizes the edge to ~1e-3;
    probes closer than that need radial gaps below the angular distance to
    the edge, hence the rescaled fine schedule.
    """
    for sched, tol in ((TANGENCY_SCHED, 1e-3), (_FINE_SCHED, config.ARC_ENDPOINT_TOL / 4)):
        while abs(outside - inside) > tol:
            mid = 0.5 * (inside + outside)
            if _is_tangent(gen, mid, sched):
                inside = mid
            else:
                outside = mid
    return 0.5 * (inside + outside)


def _edge_g_estimate(gen: GeneratorSpec, edge: float, into_arc: float):
    """Limit of G along the arc toward an edge: (value or None-if-infinite)."""
    us = into_arc * 2.0 ** -np.arange(2, 26, dtype=float)
    vals = gen.G_many(np.exp(1j * (edge + us)))
    mags = np.abs(vals)
    if mags[-1] > config.INFINITY_MAG and mags[-1] > mags[-2]:
        return None
    # growth exponent in the distance-to-edge: negative means blow-up
    lx = np.log(np.abs(us[-8:]))
    ly = np.log(mags[-8:] + 1e-300)
    xc = lx - lx.mean()
    slope = float(np.dot(xc, ly - ly.mean()) / np.dot(xc, xc))
    if slope < -0.05 and mags[-1] > 10 * mags[0]:
        return None
    from .extrapolate import geometric_limit
    est = geometric_limit(vals)
    return complex(est.limit)


def detect_arcs(gen: GeneratorSpec, resolution: int = config.ARC_SCAN_RESOLUTION,
                classify_endpoints: bool = True) -> list[ContactArcReport]:
    """Scan the circle for maximal contact arcs.

    The theta grid is filtered by the radial tangency test, contiguous
    hits merge (with wrap-around), and the edges are bisected to
    config.ARC_ENDPOINT_TOL radians.
    """
    if resolution < 256:
        raise ValueError("resolution must be at least 256")
    thetas = np.linspace(0.0, TWO_PI, resolution, endpoint=False)
    re_limit, im_max = _tangency_samples(gen, thetas, TANGENCY_SCHED)
    hits = (np.abs(re_limit) < config.TANGENCY_RE_TOL) & (im_max > config.TANGENCY_IM_MIN)
    if not np.any(hits):
        return []
    # contiguous runs with wrap-around
    idx = np.where(hits)[0]
    runs = []
    run_start = idx[0]
    prev = idx[0]
    for i in idx[1:]:
        if i != prev + 1:
            runs.append((run_start, prev))
            run_start = i
        prev = i
    runs.append((run_start, prev))
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == resolution - 1:
        first = runs.pop(0)
        runs[-1] = (runs[-1][0], first[1] + resolution)
    step = TWO_PI / resolution

    reports = []
    for lo_i, hi_i in runs:
        if hi_i - lo_i < 2:
            continue
        lo_ang = thetas[lo_i % resolution] + TWO_PI * (lo_i // resolution)
        hi_ang = thetas[hi_i % resolution] + TWO_PI * (hi_i // resolution)
        low = _bisect_edge(gen, lo_ang, lo_ang - step)
        high = _bisect_edge(gen, hi_ang, hi_ang + step)
        length = high - low
        if length <= 0 or length >= TWO_PI:
            length = min(max(length, step), TWO_PI - 1e-9)
        mid = 0.5 * (low + high)
        w = cmath.exp(1j * mid)
        orientation = 1 if (w.conjugate() * gen.G(w)).imag > 0 else -1
        g_low = _edge_g_estimate(gen, low, length / 4)
        g_high = _edge_g_estimate(gen, high, -length / 4)
        if orientation > 0:
            x0, x1, g0, g1 = BoundaryPoint(low), BoundaryPoint(high), g_low, g_high
        else:
            x0, x1, g0, g1 = BoundaryPoint(high), BoundaryPoint(low), g_high, g_low
        report = ContactArcReport(
            start=canonical_angle(low), length=length, orientation=orientation,
            x0=x0, x1=x1,
            g_x0=0j if g0 is None else g0,   # initial-point limit exists finitely
            g_x1=g1,
        )
        reports.append(report)
    if classify_endpoints:
        for rep in reports:
            endpoint_classify(gen, rep)
    return reports


def endpoint_classify(gen: GeneratorSpec, arc: ContactArcReport) -> ContactArcReport:
    """Attach endpoint classes to a detected arc.

    Initial point: a boundary fixed point exactly when the Koenigs boundary
    value is infinite, else a plain contact point.  Final point: the
    Denjoy-Wolff point exactly when G vanishes there, else the orbit gets
    absorbed into the disc.
    """
    K = KoenigsEvaluator(gen)
    bval = K.boundary_value(arc.x0)
    if bval.inconclusive:
        arc.x0_class = "unclassified"
    else:
        arc.x0_class = "fixed-point" if bval.infinite else "contact-point"
    if arc.x0_class == "fixed-point" and abs(arc.g_x0) > 1e-6:
        raise AssertionError(
            f"fixed initial point with G(x0) = {arc.g_x0}; tangency data corrupt"
        )
    g1 = arc.g_x1
    if g1 is not None and abs(g1) < 1e-6:
        arc.x1_class = "dw-point"
    else:
        arc.x1_class = "absorbed-into-disc"
    return arc


class CorruptArc(RuntimeError):
    pass


def life_time(gen: GeneratorSpec, arc: ContactArcReport, theta_start: float,
              t_max: float = 50.0) -> tuple[float, BoundaryOrbit]:
    """Time for the boundary orbit of theta_start to traverse to the arc's end.

    Returns (t1, orbit); t1 = inf is the infinity tag (the orbit keeps
    approaching the final endpoint, which then must be the Denjoy-Wolff
    point).  The start angle must be strictly inside the arc.
    """
    lo, hi = arc.start, arc.end
    t = canonical_angle(theta_start)
    if not (lo < t < hi or lo < t + TWO_PI < hi):
        raise ValueError("theta_start must lie strictly inside the arc")
    if t + TWO_PI < hi:
        t += TWO_PI
    bounds = (lo - 10 * config.ARC_ENDPOINT_TOL, hi + 10 * config.ARC_ENDPOINT_TOL)
    orbit = boundary_flow(gen, t, t_max, theta_bounds=bounds)
    target = hi if arc.orientation > 0 else lo
    dist = abs(orbit.stop_theta - target)
    if orbit.stop_reason == "arc-endpoint":
        if dist > 100 * config.ARC_ENDPOINT_TOL:
            raise CorruptArc(
                f"flow left the arc at {orbit.stop_theta:.6f}, far from the endpoint {target:.6f}"
            )
        return orbit.stop_time, orbit
    if orbit.stop_reason in ("null-point", "time-limit"):
        moved_toward = dist < abs(canonical_angle(theta_start) - canonical_angle(target)) + 1e-9
        if arc.x1_class == "dw-point" or moved_toward:
            return math.inf, orbit
    raise CorruptArc(f"boundary flow stopped unexpectedly: {orbit.stop_reason}")


@dataclass
class HerglotzMassReport:
    interval: tuple[float, float]
    radii: list[float]
    masses: list[float]
    decreasing_to_zero: bool

    def __post_init__(self):
        if any(m < -1e-12 for m in self.masses):
            raise AssertionError("negative Herglotz mass; p is not admissible")


def herglotz_mass(gen: GeneratorSpec, arc_interval: tuple[float, float],
                  r_list=(0.9, 0.99, 0.999), n_nodes: int = 4096) -> HerglotzMassReport:
    """(1/2 pi) integral of Re p(r e^{i theta}) over the interval, per radius.

    A decreasing-to-zero trend supports the absence of boundary measure on
    the arc, which is what tangency forces.
    """
    if gen.p is None and gen.tau is None:
        raise ValueError("herglotz_mass needs Berkson-Porta data (tau, p)")
    p = gen.p if gen.p is not None else gen.herglotz_part()
    from . import expr as _expr
    from . import kernel as _kernel
    tape = _expr.compile_tape(p.ast)
    a, b = arc_interval
    if b <= a:
        b += TWO_PI
    thetas = np.linspace(a, b, n_nodes)
    masses = []
    for r in r_list:
        vals = _kernel.eval_tape_many(tape, r * np.exp(1j * thetas))
        masses.append(float(np.trapezoid(vals.real, thetas) / TWO_PI))
    decreasing = all(m2 <= m1 + 1e-12 for m1, m2 in zip(masses, masses[1:]))
    return HerglotzMassReport((a, b), list(r_list), masses,
                              decreasing_to_zero=decreasing and masses[-1] < 1e-3)
