"""Semigroup flows: the ODE d(phi_t)/dt = G(phi_t) and its variational factor.

Also the circle flow on contact arcs, Denjoy-Wolff estimation, and the
semigroup-law residual used as an integration diagnostic.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import config, kernel
from .disc import BoundaryPoint
from .generators import GeneratorSpec

__all__ = [
    "BoundaryOrbit",
    "DWEstimate",
    "Trajectory",
    "VariationalState",
    "boundary_flow",
    "dw_estimate",
    "integrate_flow",
    "semigroup_residual",
    "variational_flow",
    "variational_at_times",
]


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    accepted: int
    rejected: int
    max_step_error: float
    truncated: bool = False
    n_completed: int = 0

    def __post_init__(self):
        done = self.points if not self.truncated else self.points[:self.n_completed]
        if len(done) and np.max(np.abs(done)) >= 1.0:
            raise AssertionError("trajectory left the unit disc")

    @property
    def final(self) -> complex:
        return complex(self.points[-1])


@dataclass
class VariationalState:
    phi: complex
    dphi: complex

    def __post_init__(self):
        if not abs(self.dphi) > 0.0:
            raise AssertionError("flow derivative vanished; univalence violated numerically")


def _check_tol(tol: float):
    if not 1e-13 <= tol <= 1e-3:
        raise ValueError("tol must lie in [1e-13, 1e-3]")


def _as_complex(z) -> complex:
    return complex(z)


def integrate_flow(gen: GeneratorSpec, z0, T: float, tol: float = config.FLOW_DEFAULT_TOL,
                   times=None) -> Trajectory:
    """Integrate the flow from z0 up to time T with dense output.

    times (optional) requests specific output instants; by default a
    uniform grid is produced.  A step-size underflow near the boundary
    returns the completed part with the truncation flag set.
    """
    _check_tol(tol)
    if T < 0:
        raise ValueError("T must be nonnegative")
    z0 = _as_complex(z0)
    if times is None:
        if T == 0:
            times = np.array([0.0])
        else:
            times = np.linspace(0.0, T, 129)
    times = np.asarray(times, dtype=float)
    phis, _, acc, rej, max_err, status, n_done = kernel.integrate_tape(
        gen.g_tape, None, z0, times, tol, config.DISC_GUARD, config.STEP_UNDERFLOW,
    )
    truncated = status == kernel.STATUS_TRUNCATED
    return Trajectory(times, phis, acc, rej, max_err,
                      truncated=truncated, n_completed=n_done if truncated else len(times))


def flow_point(gen: GeneratorSpec, z0, t: float, tol: float = config.FLOW_DEFAULT_TOL) -> complex:
    """phi_t(z0) without trajectory bookkeeping."""
    if t == 0:
        return _as_complex(z0)
    phis, _, _, _, _, status, _ = kernel.integrate_tape(
        gen.g_tape, None, _as_complex(z0), np.array([float(t)]), tol,
        config.DISC_GUARD, config.STEP_UNDERFLOW,
    )
    if status != kernel.STATUS_OK:
        raise ArithmeticError(f"flow truncated before t={t}")
    return complex(phis[0])


def variational_flow(gen: GeneratorSpec, z0, T: float,
                     tol: float = config.FLOW_DEFAULT_TOL) -> VariationalState:
    """Joint flow of phi and phi' = d phi_t / dz, with phi'_0 = 1."""
    _check_tol(tol)
    z0 = _as_complex(z0)
    if T == 0:
        return VariationalState(z0, 1.0 + 0j)
    phis, dphis, *_rest, status, _ = kernel.integrate_tape(
        gen.g_tape, gen.gp_tape, z0, np.array([float(T)]), tol,
        config.DISC_GUARD, config.STEP_UNDERFLOW,
    )
    if status != kernel.STATUS_OK:
        raise ArithmeticError(f"variational flow truncated before t={T}")
    return VariationalState(complex(phis[0]), complex(dphis[0]))


def variational_at_times(gen: GeneratorSpec, z0, times,
                         tol: float = config.FLOW_DEFAULT_TOL):
    """(phi, dphi) arrays along one orbit at several times."""
    _check_tol(tol)
    times = np.asarray(times, dtype=float)
    phis, dphis, *_rest, status, n_done = kernel.integrate_tape(
        gen.g_tape, gen.gp_tape, _as_complex(z0), times, tol,
        config.DISC_GUARD, config.STEP_UNDERFLOW,
    )
    if status != kernel.STATUS_OK:
        raise ArithmeticError(f"variational flow truncated after {n_done} of {len(times)} targets")
    return phis, dphis


def semigroup_residual(gen: GeneratorSpec, z, t: float, s: float,
                       tol: float = config.FLOW_DEFAULT_TOL) -> float:
    """|phi_{t+s}(z) - phi_t(phi_s(z))| with inner integrations at tol/10."""
    if t < 0 or s < 0:
        raise ValueError("t and s must be nonnegative")
    inner = max(1e-13, tol / 10.0)
    lhs = flow_point(gen, z, t + s, inner)
    mid = flow_point(gen, z, s, inner)
    rhs = flow_point(gen, mid, t, inner)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Denjoy-Wolff estimation

@dataclass
class DWEstimate:
    value: complex
    converged: bool
    per_seed: list = field(default_factory=list)
    matches_tau: bool | None = None
    note: str = ""


def _polish_interior(gen: GeneratorSpec, z: complex) -> complex:
    for _ in range(60):
        g = gen.G(z)
        gp = gen.Gp(z)
        if abs(gp) == 0:
            break
        step = g / gp
        z_new = z - step
        if abs(z_new) >= 1.0:
            break
        z = z_new
        if abs(step) < 1e-15:
            break
    return z


def _polish_boundary_angle(gen: GeneratorSpec, theta: float) -> float:
    """Minimize |G(e^{i theta})| locally (golden-section)."""
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = theta - 0.35, theta + 0.35

    def f(th):
        return abs(gen.G(cmath.exp(1j * th)))

    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(90):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def dw_estimate(gen: GeneratorSpec, t_max: float = config.DW_T_MAX,
                tol: float = 1e-10) -> DWEstimate:
    """Common limit of the flow from several seeds, polished on G.

    Orbits are advanced checkpoint by checkpoint until three consecutive
    checkpoints agree to config.DW_STABLE_TOL or t_max elapses.  Interior
    limits are polished by Newton on G; orbits pressing into the boundary
    are polished by minimizing |G| on the circle near the landing angle.
    """
    seeds = [0.45 * cmath.exp(2j * math.pi * (k / config.DW_SEEDS + 0.041)) * (1.0 + 0.13 * (k % 3))
             for k in range(config.DW_SEEDS)]
    finals = []
    stabilized_all = True
    for z0 in seeds:
        z = z0
        prev = [z0]
        stabilized = False
        t = 0.0
        while t < t_max:
            step = min(2.0, t_max - t)
            try:
                z = flow_point(gen, z, step, tol)
            except ArithmeticError:
                break   # pressed into the boundary guard; keep the last point
            t += step
            prev.append(z)
            if len(prev) >= 4 and all(
                abs(prev[-i] - prev[-i - 1]) < config.DW_STABLE_TOL for i in (1, 2, 3)
            ):
                stabilized = True
                break
        finals.append((z, stabilized))
        stabilized_all = stabilized_all and stabilized

    polished = []
    for z, _st in finals:
        if abs(z) < 0.995 and abs(gen.Gp(z)) > 1e-12:
            polished.append(_polish_interior(gen, z))
        else:
            theta = _polish_boundary_angle(gen, cmath.phase(z))
            polished.append(cmath.exp(1j * theta))
    arr = np.asarray(polished)
    spread = float(np.max(np.abs(arr - arr[0]))) if len(arr) else math.inf
    value = complex(arr.mean()) if spread < 1e-6 else complex(arr[0])
    if abs(value) > 0.999999:
        value = value / abs(value)
    converged = spread < 1e-6
    note = "" if converged else f"seed limits spread {spread:.2e}; inconclusive"
    matches = None
    if gen.tau is not None:
        matches = abs(value - gen.tau) < 1e-6
    return DWEstimate(value, converged, [z for z, _ in finals], matches, note)


# ---------------------------------------------------------------------------
# circle flow on contact arcs

@dataclass
class BoundaryOrbit:
    times: np.ndarray
    thetas: np.ndarray
    stop_reason: str            # "time-limit" | "tangency-violation" | "null-point" | "endpoint"
    stop_time: float
    stop_theta: float
    tangency_at_stop: float


class NotOnContactArc(ValueError):
    def __init__(self, theta, re_limit):
        self.theta = theta
        self.re_limit = re_limit
        super().__init__(
            f"theta={theta:.6f} is not on a contact arc: lim Re(conj(s) G(r s)) = {re_limit:.3e}"
        )


def _circle_fields(gen: GeneratorSpec, theta: float) -> tuple[float, float, float]:
    """(speed, tangency residual, |G|) of the circle flow at angle theta."""
    w = cmath.exp(1j * theta)
    g = gen.G(w)
    zg = w.conjugate() * g
    return zg.imag, abs(zg.real), abs(g)


def boundary_flow(gen: GeneratorSpec, theta0: float, T: float,
                  tol: float = 1e-10, verify: bool = True,
                  theta_bounds: tuple[float, float] | None = None) -> BoundaryOrbit:
    """Integrate theta' = Im(conj(e^{i theta}) G(e^{i theta})) on the circle.

    Starts only from verified contact-arc angles (radial tangency residual
    below config.TANGENCY_RE_TOL) unless verify=False.  Stops when the
    tangency residual grows past config.BFLOW_TANGENCY_STOP, when |G|
    drops below config.BFLOW_G_ZERO, when theta leaves theta_bounds, or at
    the time limit.
    """
    from .contact import radial_tangency   # local import: contact builds on flow

    if verify:
        re_lim, im_mag = radial_tangency(gen, theta0)
        if abs(re_lim) > config.TANGENCY_RE_TOL or im_mag < config.TANGENCY_IM_MIN:
            raise NotOnContactArc(theta0, re_lim)

    from .quadrature import adaptive

    ts = [0.0]
    ys = [float(theta0)]
    t, y = 0.0, float(theta0)
    v0, re0, _g0 = _circle_fields(gen, y)
    h = min(0.05 / (1.0 + abs(v0)), T if T > 0 else 0.05, 0.05)
    reason, stop_res = "time-limit", re0

    def rhs(th: float) -> float:
        w = cmath.exp(1j * th)
        return (w.conjugate() * gen.G(w)).imag

    def admissible(th: float) -> tuple[bool, float, float]:
        _speed, re_res, g_abs = _circle_fields(gen, th)
        ok = re_res <= config.BFLOW_TANGENCY_STOP
        if theta_bounds is not None:
            ok = ok and theta_bounds[0] - 1e-12 <= th <= theta_bounds[1] + 1e-12
        return ok, re_res, g_abs

    while t < T:
        h = min(h, T - t)
        if h < 1e-14:
            break
        k1 = rhs(y)
        k2 = rhs(y + h * 0.2 * k1)
        k3 = rhs(y + h * (3 / 40 * k1 + 9 / 40 * k2))
        k4 = rhs(y + h * (44 / 45 * k1 - 56 / 15 * k2 + 32 / 9 * k3))
        k5 = rhs(y + h * (19372 / 6561 * k1 - 25360 / 2187 * k2 + 64448 / 6561 * k3 - 212 / 729 * k4))
        k6 = rhs(y + h * (9017 / 3168 * k1 - 355 / 33 * k2 + 46732 / 5247 * k3 + 49 / 176 * k4 - 5103 / 18656 * k5))
        y_new = y + h * (35 / 384 * k1 + 500 / 1113 * k3 + 125 / 192 * k4 - 2187 / 6784 * k5 + 11 / 84 * k6)
        k7 = rhs(y_new)
        err = abs(h * (71 / 57600 * k1 - 71 / 16695 * k3 + 71 / 1920 * k4
                       - 17253 / 339200 * k5 + 22 / 525 * k6 - 1 / 40 * k7))
        if not math.isfinite(y_new) or (err > tol and h > 1e-13):
            h = max(1e-13, 0.5 * h)
            continue

        ok, re_res, g_abs = admissible(y_new)
        if not ok:
            # the step crossed the edge of the admissible arc: bisect the
            # angle, then recover the arrival time by quadrature of 1/speed
            lo_th, hi_th = y, y_new
            for _ in range(80):
                mid = 0.5 * (lo_th + hi_th)
                if admissible(mid)[0]:
                    lo_th = mid
                else:
                    hi_th = mid
            direction = 1.0 if y_new >= y else -1.0
            if abs(lo_th - y) > 0:
                t += abs(adaptive(lambda th: 1.0 / rhs(th), y, lo_th, rel_tol=1e-9).real) \
                    if direction > 0 else \
                    abs(adaptive(lambda th: 1.0 / rhs(th), lo_th, y, rel_tol=1e-9).real)
            y = lo_th
            ts.append(t)
            ys.append(y)
            _, stop_res, g_abs = admissible(y)
            reason = "arc-endpoint"
            break

        t += h
        y = y_new
        ts.append(t)
        ys.append(y)
        stop_res = re_res
        if g_abs < config.BFLOW_G_ZERO:
            reason = "null-point"
            break
        h *= min(3.0, max(0.3, 0.9 * (tol / (err + 1e-300)) ** 0.2))

    return BoundaryOrbit(np.asarray(ts), np.asarray(ys), reason, t, y, stop_res)
