"""Limit estimation along geometric schedules.

Values sampled on dyadic gaps g_k = g0 2^-k typically behave like
v_k = L + c g_k^mu.  The helpers here fit mu from successive differences,
extrapolate L, and report drift diagnostics when no such model fits
(rotating phase, logarithmic growth, oscillation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class LimitEstimate:
    limit: complex
    converged: bool
    fitted_order: float
    error_estimate: float
    drift: str                 # "", "modulus-drift", "phase-drift", "oscillation"
    values: np.ndarray

    @property
    def real_limit(self) -> float:
        return float(self.limit.real)


def geometric_limit(values, min_order: float = 0.05,
                    phase_tol: float = 1e-3) -> LimitEstimate:
    """Extrapolate a sequence sampled on gaps halving at each index.

    Fits the decay order from the last few difference ratios, applies the
    matching one-term Richardson correction, and classifies failures:
    differences that do not shrink mean modulus or phase drift.
    """
    v = np.asarray(values, dtype=np.complex128)
    if len(v) < 4:
        raise ValueError("need at least 4 values to extrapolate")
    d = np.diff(v)
    mags = np.abs(d)
    tiny = float(np.max(np.abs(v))) * 1e-14 + 1e-300
    if mags[-1] < tiny and mags[-2] < tiny:
        return LimitEstimate(complex(v[-1]), True, math.inf, float(mags[-1]), "", v)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = mags[1:] / mags[:-1]
    tail = ratios[-4:]
    tail = tail[np.isfinite(tail) & (tail > 0)]
    if len(tail) == 0:
        return LimitEstimate(complex(v[-1]), False, 0.0, float("inf"), "modulus-drift", v)
    mu = float(np.median(-np.log2(tail)))

    if mu <= min_order:
        drift = "modulus-drift"
        if mu < -min_order:
            # differences grow: check for pure rotation at stable modulus
            if np.allclose(np.abs(v[-4:]), np.abs(v[-1]), rtol=1e-3):
                drift = "phase-drift"
        else:
            drift = "oscillation"
        return LimitEstimate(complex(v[-1]), False, mu, float(mags[-1]), drift, v)

    rho = 2.0 ** (-mu)
    limit = complex(v[-1] + d[-1] * rho / (1.0 - rho))
    err = abs(d[-1]) * rho / (1.0 - rho)

    # a stable modulus with rotating phase is not a limit: inspect the
    # residual phases of the last few values
    phases = np.angle(v[-3:] - limit)
    drift = ""
    if abs(limit) > 0:
        rel_wobble = np.abs(v[-3:] - limit) / abs(limit)
        if np.all(rel_wobble < 1e-12):
            pass
        else:
            spread = np.ptp(phases)
            if spread > math.pi and err > 1e-6 * abs(limit):
                drift = "oscillation"
    converged = drift == ""
    return LimitEstimate(limit, converged, mu, float(err), drift, v)


def richardson_refine(values) -> complex:
    """Classical Richardson ladder for gap-ratio-2 sequences (first order assumed)."""
    level = list(np.asarray(values, dtype=np.complex128))
    m = 1
    while len(level) > 1:
        factor = 2.0 ** m
        level = [(factor * level[i + 1] - level[i]) / (factor - 1.0) for i in range(len(level) - 1)]
        m += 1
    return complex(level[0])


def window_slopes(log_x, log_y, window: int):
    """Least-squares slopes of log_y against log_x over sliding windows."""
    lx = np.asarray(log_x, dtype=float)
    ly = np.asarray(log_y, dtype=float)
    if len(lx) < window:
        raise ValueError("not enough samples for one window")
    slopes = []
    for i in range(len(lx) - window + 1):
        xs = lx[i:i + window]
        ys = ly[i:i + window]
        xc = xs - xs.mean()
        denom = float(np.dot(xc, xc))
        slopes.append(float(np.dot(xc, ys - ys.mean()) / denom))
    return np.asarray(slopes)


def tail_exponent(terms, decade_fraction: float = 0.5) -> float:
    """Fitted exponent e of |t_n| ~ C n^e over the trailing part of a sequence."""
    t = np.abs(np.asarray(terms, dtype=float))
    n = len(t)
    if n < 6:
        raise ValueError("need at least 6 terms for a tail fit")
    start = max(2, int(n * (1.0 - decade_fraction)))
    idx = np.arange(start, n)
    vals = t[start:]
    keep = vals > 0
    if keep.sum() < 3:
        return -math.inf   # identically zero tail: converges trivially
    lx = np.log(idx[keep].astype(float) + 1.0)
    ly = np.log(vals[keep])
    xc = lx - lx.mean()
    return float(np.dot(xc, ly - ly.mean()) / np.dot(xc, xc))


def sum_verdict(terms, exp_converges: float, exp_diverges: float) -> tuple[str, float]:
    """Three-valued series verdict from a tail-exponent fit plus partial sums.

    The band between the exponent thresholds is resolved by the growth of
    the partial sums over the trailing decade: clean logarithmic growth is
    divergence, Cauchy-stable sums are convergence.
    """
    t = np.abs(np.asarray(terms, dtype=float))
    if len(t) == 0 or np.all(t == 0):
        return "converges", -math.inf
    e = tail_exponent(t)
    if e < exp_converges:
        return "converges", e
    if e > exp_diverges:
        return "diverges", e
    sums = np.cumsum(t)
    n = len(sums)
    lo = max(1, n // 2)
    growth = sums[-1] - sums[lo - 1]
    if growth < 1e-12 * max(sums[-1], 1e-300):
        return "converges", e
    # fit partial sums against log n: log-divergence shows as a clean line
    ln = np.log(np.arange(lo, n + 1, dtype=float))
    seg = sums[lo - 1:]
    xc = ln - ln.mean()
    slope = float(np.dot(xc, seg - seg.mean()) / np.dot(xc, xc))
    resid = seg - (seg.mean() + slope * xc)
    if slope > 0 and np.max(np.abs(resid)) < 0.05 * abs(slope) * (ln[-1] - ln[0] + 1e-9):
        return "diverges", e
    return "inconclusive", e
