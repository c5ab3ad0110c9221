"""Koenigs linearizers.

For a boundary Denjoy-Wolff point the Koenigs function satisfies
h'(z) G(z) = 1 with h(0) = 0, so h(z) is the path integral of 1/G from 0.
For an interior Denjoy-Wolff point tau it satisfies
h'(z) G(z) = G'(tau) h(z) with h(tau) = 0, h'(tau) = 1 and is computed as
(z - tau) exp( integral of [G'(tau)/G - 1/(. - tau)] from tau to z ).
"""
from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass

import numpy as np

from . import config
from .disc import BoundaryPoint, RadialSchedule
from .flow import dw_estimate, flow_point
from .generators import GeneratorSpec
from .quadrature import segment_integral

__all__ = ["BoundaryValue", "KoenigsEvaluator"]


@dataclass
class BoundaryValue:
    value: complex | None
    infinite: bool
    inconclusive: bool
    gamma: float
    samples: np.ndarray

    @property
    def is_fixed_point(self) -> bool:
        """Infinite boundary value of h marks a boundary fixed point of the flow."""
        return self.infinite


class KoenigsEvaluator:
    """Case-tagged evaluator of the Koenigs function with a quadrature cache.

    Caches accumulate along radial rays so schedules pay one short segment
    per new radius.  Clone an evaluator for lock-free parallel sweeps.
    """

    def __init__(self, gen: GeneratorSpec, case: str | None = None):
        self.gen = gen
        tau = gen.tau
        if tau is None:
            est = dw_estimate(gen)
            if not est.converged:
                raise ValueError("cannot classify the Denjoy-Wolff point; estimation inconclusive")
            tau = est.value
        self.tau = complex(tau)
        if case is None:
            case = "boundary" if abs(self.tau) > 1.0 - 1e-9 else "interior"
        if case not in ("boundary", "interior"):
            raise ValueError("case must be 'boundary' or 'interior'")
        self.case = case
        self._lock = threading.Lock()
        self._ray_cache: dict[int, list[tuple[float, complex]]] = {}
        self._point_cache: dict[complex, complex] = {}
        if case == "interior":
            self._gp_tau = gen.Gp(self.tau)
            if abs(self._gp_tau) < 1e-14:
                raise ValueError("G'(tau) vanished; interior linearizer undefined")
            self._psi_tau = -gen.Gpp(self.tau) / (2.0 * self._gp_tau)

    def clone(self) -> "KoenigsEvaluator":
        other = KoenigsEvaluator.__new__(KoenigsEvaluator)
        other.__dict__.update(self.__dict__)
        other._lock = threading.Lock()
        other._ray_cache = {k: list(v) for k, v in self._ray_cache.items()}
        other._point_cache = dict(self._point_cache)
        return other

    # -- boundary case ------------------------------------------------------
    def _inv_g(self, z: complex) -> complex:
        g = self.gen.G(z)
        return 1.0 / g

    def _boundary_value_at(self, z: complex) -> complex:
        key = complex(z)
        with self._lock:
            if key in self._point_cache:
                return self._point_cache[key]
        r = abs(z)
        base = 0j
        start = 0j
        if r > 1e-14:
            angle_key = round(cmath.phase(z) * 1e12)
            with self._lock:
                ray = self._ray_cache.setdefault(angle_key, [])
                below = [(rr, vv) for rr, vv in ray if rr <= r + 1e-15]
            if below:
                rr, vv = max(below, key=lambda item: item[0])
                start = z * (rr / r)
                base = vv
        seg = segment_integral(self._inv_g, start, z)
        value = base + seg.value
        with self._lock:
            self._point_cache[key] = value
            if r > 1e-14:
                self._ray_cache.setdefault(angle_key, []).append((r, value))
        return value

    # -- interior case ------------------------------------------------------
    def _psi(self, z: complex) -> complex:
        d = z - self.tau
        if abs(d) < 1e-7:
            return self._psi_tau
        return self._gp_tau / self.gen.G(z) - 1.0 / d

    def _interior_value_at(self, z: complex) -> complex:
        if z == self.tau:
            return 0j
        key = complex(z)
        with self._lock:
            if key in self._point_cache:
                return self._point_cache[key]
        seg = segment_integral(self._psi, self.tau, z)
        value = (z - self.tau) * cmath.exp(seg.value)
        with self._lock:
            self._point_cache[key] = value
        return value

    # -- public api ---------------------------------------------------------
    def value(self, z) -> complex:
        z = complex(z)
        if self.case == "boundary":
            return self._boundary_value_at(z)
        return self._interior_value_at(z)

    def derivative(self, z) -> complex:
        z = complex(z)
        if self.case == "boundary":
            return 1.0 / self.gen.G(z)
        if abs(z - self.tau) < 1e-9:
            return 1.0 + 0j
        return self._gp_tau * self.value(z) / self.gen.G(z)

    def multiplier(self) -> complex:
        """G'(tau) for the interior case (the linearization rate)."""
        if self.case != "interior":
            raise ValueError("multiplier is an interior-case quantity")
        return self._gp_tau

    def defining_residual(self, z) -> float:
        """Residual of the defining ODE at z (both cases)."""
        z = complex(z)
        if self.case == "boundary":
            return abs(self.derivative(z) * self.gen.G(z) - 1.0)
        return abs(self.derivative(z) * self.gen.G(z) - self._gp_tau * self.value(z))

    def abel_residual(self, z, t: float, tol: float = 1e-11) -> float:
        if t < 0:
            raise ValueError("t must be nonnegative")
        z = complex(z)
        if t == 0:
            return 0.0
        zt = flow_point(self.gen, z, t, tol)
        if self.case == "boundary":
            return abs(self.value(zt) - self.value(z) - t)
        return abs(self.value(zt) - cmath.exp(self._gp_tau * t) * self.value(z))

    def boundary_value(self, x: BoundaryPoint, sched: RadialSchedule | None = None) -> BoundaryValue:
        """Radial limit of h at x via the fitted-order extrapolation.

        Model: h(r) = h(x) + c (1-r)^gamma; the gamma fit comes from the
        decade of samples before the three finest.  A non-positive gamma
        (differences not shrinking) or magnitudes past config.INFINITY_MAG
        with increasing trend emit the infinity tag.
        """
        sched = sched or RadialSchedule(6, 40)
        vals = np.array([self.value(r * x.value) for r in sched.radii()])
        mags = np.abs(vals)
        if mags[-1] > config.INFINITY_MAG and mags[-1] > mags[-2] > mags[-3]:
            return BoundaryValue(None, True, False, -math.inf, vals)
        d = np.diff(vals)
        with np.errstate(divide="ignore", invalid="ignore"):
            gammas = np.log2(np.abs(d[:-1]) / np.abs(d[1:]))
        window = gammas[-11:-1] if len(gammas) > 11 else gammas
        window = window[np.isfinite(window)]
        if len(window) == 0:
            return BoundaryValue(complex(vals[-1]), False, False, math.inf, vals)
        gamma = float(np.median(window))
        if gamma <= 0.0:
            return BoundaryValue(None, True, False, gamma, vals)
        if float(np.ptp(window)) > 1.0 and mags[-1] < config.INFINITY_MAG:
            return BoundaryValue(None, False, True, gamma, vals)
        # h(x) = (2^g v_K - v_{K-1}) / (2^g - 1) from the finest pair; the
        # coarser pair only cross-checks the fit
        w = 2.0 ** gamma
        est1 = (w * vals[-1] - vals[-2]) / (w - 1.0)
        est2 = (w * vals[-2] - vals[-3]) / (w - 1.0)
        if abs(est1 - est2) > 1e-2 * (1.0 + abs(est1)):
            return BoundaryValue(complex(est1), False, True, gamma, vals)
        return BoundaryValue(complex(est1), False, False, gamma, vals)
