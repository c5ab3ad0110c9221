"""Pure-Python evaluation/integration kernel.

Reference implementation of the tape stack machine and the adaptive
Dormand-Prince 5(4) stepper.  The compiled kernel (_kernel_c) mirrors this
module operation for operation; parity is enforced by tests.  Poles and
overflows produce non-finite values here (never exceptions) so the stepper
can react by halving the step.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

_NAN = complex(float("nan"), float("nan"))

# opcodes, kept in sync with expr.compile_tape
OP_CONST, OP_Z, OP_NEG, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW, OP_LOG, OP_EXP, OP_SQRT = range(11)


def _safe_pow(a: complex, b: complex) -> complex:
    if a == 0:
        if b.imag == 0.0 and b.real > 0.0:
            return 0j
        return _NAN
    try:
        return cmath.exp(b * cmath.log(a))
    except OverflowError:
        return _NAN


def eval_tape(code, consts, z: complex) -> complex:
    stack = [0j] * 16
    sp = 0
    n = len(code)
    i = 0
    while i < n:
        op = code[i]
        arg = code[i + 1]
        i += 2
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_Z:
            stack[sp] = z
            sp += 1
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            b = stack[sp]
            stack[sp - 1] = stack[sp - 1] / b if b != 0 else _NAN
        elif op == OP_POW:
            sp -= 1
            stack[sp - 1] = _safe_pow(stack[sp - 1], stack[sp])
        elif op == OP_LOG:
            a = stack[sp - 1]
            stack[sp - 1] = cmath.log(a) if a != 0 else _NAN
        elif op == OP_EXP:
            try:
                stack[sp - 1] = cmath.exp(stack[sp - 1])
            except OverflowError:
                stack[sp - 1] = _NAN
        elif op == OP_SQRT:
            stack[sp - 1] = cmath.sqrt(stack[sp - 1])
        if sp >= len(stack) - 2:
            stack.extend([0j] * len(stack))
    return stack[0]


def eval_tape_many(code, consts, zs):
    out = np.empty(len(zs), dtype=np.complex128)
    for i, z in enumerate(zs):
        out[i] = eval_tape(code, consts, complex(z))
    return out


# Dormand-Prince 5(4) tableau (FSAL).
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

STATUS_OK = 0
STATUS_TRUNCATED = 1


def _finite(w: complex) -> bool:
    return math.isfinite(w.real) and math.isfinite(w.imag)


def integrate(codeG, constsG, codeGp, constsGp, z0, times, tol, guard, hmin):
    """Integrate phi' = G(phi) (and optionally the variational factor) to each time.

    times must be strictly increasing and positive.  Returns
    (phis, dphis, accepted, rejected, max_err, status, n_done).
    The variational factor solves d(phi')/dt = G'(phi) phi' from 1 when the
    derivative tape is supplied, else dphis stays all-ones.
    """
    n_times = len(times)
    phis = np.empty(n_times, dtype=np.complex128)
    dphis = np.ones(n_times, dtype=np.complex128)
    with_var = codeGp is not None

    t = 0.0
    phi = complex(z0)
    dphi = 1.0 + 0j
    accepted = 0
    rejected = 0
    max_err = 0.0
    err_prev = 1.0

    def f(p, d):
        g = eval_tape(codeG, constsG, p)
        if with_var:
            return g, eval_tape(codeGp, constsGp, p) * d
        return g, 0j

    k1p, k1d = f(phi, dphi)
    g0 = abs(k1p)
    h = min(0.1 / (1.0 + g0), 0.1)

    for idx in range(n_times):
        t_target = float(times[idx])
        while t < t_target:
            if h < hmin:
                for j in range(idx, n_times):
                    phis[j] = phi
                    dphis[j] = dphi
                return phis, dphis, accepted, rejected, max_err, STATUS_TRUNCATED, idx
            remaining = t_target - t
            if remaining < hmin:
                t = t_target
                break
            clipped = remaining < h
            hs = remaining if clipped else h

            y2p = phi + hs * _A21 * k1p
            y2d = dphi + hs * _A21 * k1d
            k2p, k2d = f(y2p, y2d)
            y3p = phi + hs * (_A31 * k1p + _A32 * k2p)
            y3d = dphi + hs * (_A31 * k1d + _A32 * k2d)
            k3p, k3d = f(y3p, y3d)
            y4p = phi + hs * (_A41 * k1p + _A42 * k2p + _A43 * k3p)
            y4d = dphi + hs * (_A41 * k1d + _A42 * k2d + _A43 * k3d)
            k4p, k4d = f(y4p, y4d)
            y5p = phi + hs * (_A51 * k1p + _A52 * k2p + _A53 * k3p + _A54 * k4p)
            y5d = dphi + hs * (_A51 * k1d + _A52 * k2d + _A53 * k3d + _A54 * k4d)
            k5p, k5d = f(y5p, y5d)
            y6p = phi + hs * (_A61 * k1p + _A62 * k2p + _A63 * k3p + _A64 * k4p + _A65 * k5p)
            y6d = dphi + hs * (_A61 * k1d + _A62 * k2d + _A63 * k3d + _A64 * k4d + _A65 * k5d)
            k6p, k6d = f(y6p, y6d)
            ynp = phi + hs * (_B1 * k1p + _B3 * k3p + _B4 * k4p + _B5 * k5p + _B6 * k6p)
            ynd = dphi + hs * (_B1 * k1d + _B3 * k3d + _B4 * k4d + _B5 * k5d + _B6 * k6d)
            k7p, k7d = f(ynp, ynd)

            bad = not (_finite(ynp) and _finite(k7p))
            if with_var:
                bad = bad or not (_finite(ynd) and _finite(k7d))
            if not bad:
                # the disc guard: never project, just retry shorter
                for yp in (y2p, y3p, y4p, y5p, y6p, ynp):
                    if abs(yp) >= 1.0 - guard:
                        bad = True
                        break
            if bad:
                h = 0.5 * hs
                rejected += 1
                continue

            # per-step control: phi is disc-bounded so its scale is 1; the
            # variational factor is controlled relative to its magnitude
            # (per-unit-step control would drown in the eps*|G'|*h roundoff
            # floor next to pole-type boundary points)
            ep = hs * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p + _E6 * k6p + _E7 * k7p)
            err = abs(ep)
            if with_var:
                ed = hs * (_E1 * k1d + _E3 * k3d + _E4 * k4d + _E5 * k5d + _E6 * k6d + _E7 * k7d)
                scale = abs(ynd)
                err = max(err, abs(ed) / (scale if scale > 1.0 else 1.0))

            limit = tol
            if err <= limit or hs <= hmin * 2.0:
                t = t_target if clipped else t + hs
                phi = ynp
                dphi = ynd
                k1p, k1d = k7p, k7d      # FSAL
                accepted += 1
                if err > max_err:
                    max_err = err
                if not clipped:
                    e_rel = err / limit if limit > 0 else 0.0
                    if e_rel < 1e-10:
                        fac = 5.0
                    else:
                        fac = 0.9 * e_rel ** -0.17 * err_prev ** 0.06
                        fac = min(5.0, max(0.2, fac))
                    err_prev = max(e_rel, 1e-10)
                    h = hs * fac
            else:
                rejected += 1
                fac = max(0.2, 0.9 * (err / limit) ** -0.2)
                h = hs * fac
        phis[idx] = phi
        dphis[idx] = dphi

    return phis, dphis, accepted, rejected, max_err, STATUS_OK, n_times
