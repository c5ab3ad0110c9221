# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation/integration kernel.

Operation-for-operation twin of _kernel_py; see that module for the
reference semantics.  Tapes are postfix (op, arg) pairs over a constant
pool; the stepper is the Dormand-Prince 5(4) pair with FSAL, a PI step
controller and a hard unit-disc guard.
"""

import numpy as np

from libc.math cimport isfinite

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double complex csqrt(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)

DEF STACK_CAP = 128

cdef enum:
    OP_CONST, OP_Z, OP_NEG, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW, OP_LOG, OP_EXP, OP_SQRT

DEF _ST_OK = 0
DEF _ST_TRUNC = 1

STATUS_OK = _ST_OK
STATUS_TRUNCATED = _ST_TRUNC

cdef double complex _NAN_C = float("nan") + 1j * float("nan")


cdef inline double complex _safe_pow(double complex a, double complex b) noexcept nogil:
    if creal(a) == 0.0 and cimag(a) == 0.0:
        if cimag(b) == 0.0 and creal(b) > 0.0:
            return 0
        return _NAN_C
    return cexp(b * clog(a))


cdef double complex _eval(const int[::1] code, const double complex[::1] consts,
                          double complex z) noexcept nogil:
    cdef double complex stack[STACK_CAP]
    cdef Py_ssize_t sp = 0, i = 0, n = code.shape[0]
    cdef int op, arg
    cdef double complex a, b
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
            if creal(b) == 0.0 and cimag(b) == 0.0:
                stack[sp - 1] = _NAN_C
            else:
                stack[sp - 1] = stack[sp - 1] / b
        elif op == OP_POW:
            sp -= 1
            stack[sp - 1] = _safe_pow(stack[sp - 1], stack[sp])
        elif op == OP_LOG:
            a = stack[sp - 1]
            if creal(a) == 0.0 and cimag(a) == 0.0:
                stack[sp - 1] = _NAN_C
            else:
                stack[sp - 1] = clog(a)
        elif op == OP_EXP:
            stack[sp - 1] = cexp(stack[sp - 1])
        elif op == OP_SQRT:
            stack[sp - 1] = csqrt(stack[sp - 1])
    return stack[0]


def eval_tape(code, consts, z):
    cdef int[::1] c = np.ascontiguousarray(code, dtype=np.int32)
    cdef double complex[::1] k = np.ascontiguousarray(consts, dtype=np.complex128)
    return complex(_eval(c, k, z))


def eval_tape_many(code, consts, zs):
    cdef int[::1] c = np.ascontiguousarray(code, dtype=np.int32)
    cdef double complex[::1] k = np.ascontiguousarray(consts, dtype=np.complex128)
    zarr = np.ascontiguousarray(zs, dtype=np.complex128)
    cdef double complex[::1] zv = zarr
    out = np.empty(zarr.shape[0], dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(zv.shape[0]):
            ov[i] = _eval(c, k, zv[i])
    return out


cdef inline bint _finite_c(double complex w) noexcept nogil:
    return isfinite(creal(w)) and isfinite(cimag(w))


def integrate(codeG, constsG, codeGp, constsGp, z0, times, double tol,
              double guard, double hmin):
    """See _kernel_py.integrate."""
    cdef int[::1] cg = np.ascontiguousarray(codeG, dtype=np.int32)
    cdef double complex[::1] kg = np.ascontiguousarray(constsG, dtype=np.complex128)
    cdef bint with_var = codeGp is not None
    cdef int[::1] cgp = cg
    cdef double complex[::1] kgp = kg
    if with_var:
        cgp = np.ascontiguousarray(codeGp, dtype=np.int32)
        kgp = np.ascontiguousarray(constsGp, dtype=np.complex128)

    tarr = np.ascontiguousarray(times, dtype=np.float64)
    cdef double[::1] tv = tarr
    cdef Py_ssize_t n_times = tv.shape[0]
    phis = np.empty(n_times, dtype=np.complex128)
    dphis = np.ones(n_times, dtype=np.complex128)
    cdef double complex[::1] pv = phis
    cdef double complex[::1] dv = dphis

    cdef double t = 0.0, h, hs, remaining, max_err = 0.0, err_prev = 1.0
    cdef double err, limit, fac, e_rel, scale, t_target
    cdef bint clipped
    cdef double complex phi = z0, dphi = 1
    cdef long accepted = 0, rejected = 0
    cdef Py_ssize_t idx, j
    cdef int status = _ST_OK
    cdef Py_ssize_t n_done = n_times
    cdef bint bad

    cdef double complex k1p, k1d, k2p, k2d, k3p, k3d, k4p, k4d
    cdef double complex k5p, k5d, k6p, k6d, k7p, k7d
    cdef double complex y2p, y2d, y3p, y3d, y4p, y4d, y5p, y5d, y6p, y6d, ynp, ynd
    cdef double complex ep, ed

    cdef double A21 = 1.0 / 5
    cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
    cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
    cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187
    cdef double A53 = 64448.0 / 6561, A54 = -212.0 / 729
    cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247
    cdef double A64 = 49.0 / 176, A65 = -5103.0 / 18656
    cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192
    cdef double B5 = -2187.0 / 6784, B6 = 11.0 / 84
    cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
    cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

    with nogil:
        k1p = _eval(cg, kg, phi)
        if with_var:
            k1d = _eval(cgp, kgp, phi) * dphi
        else:
            k1d = 0
        h = 0.1 / (1.0 + cabs(k1p))
        if h > 0.1:
            h = 0.1

        for idx in range(n_times):
            if status == _ST_TRUNC:
                break
            t_target = tv[idx]
            while t < t_target:
                if h < hmin:
                    status = _ST_TRUNC
                    n_done = idx
                    for j in range(idx, n_times):
                        pv[j] = phi
                        dv[j] = dphi
                    break
                remaining = t_target - t
                if remaining < hmin:
                    t = t_target
                    break
                clipped = remaining < h
                hs = remaining if clipped else h

                y2p = phi + hs * A21 * k1p
                y2d = dphi + hs * A21 * k1d
                k2p = _eval(cg, kg, y2p)
                k2d = _eval(cgp, kgp, y2p) * y2d if with_var else 0
                y3p = phi + hs * (A31 * k1p + A32 * k2p)
                y3d = dphi + hs * (A31 * k1d + A32 * k2d)
                k3p = _eval(cg, kg, y3p)
                k3d = _eval(cgp, kgp, y3p) * y3d if with_var else 0
                y4p = phi + hs * (A41 * k1p + A42 * k2p + A43 * k3p)
                y4d = dphi + hs * (A41 * k1d + A42 * k2d + A43 * k3d)
                k4p = _eval(cg, kg, y4p)
                k4d = _eval(cgp, kgp, y4p) * y4d if with_var else 0
                y5p = phi + hs * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p)
                y5d = dphi + hs * (A51 * k1d + A52 * k2d + A53 * k3d + A54 * k4d)
                k5p = _eval(cg, kg, y5p)
                k5d = _eval(cgp, kgp, y5p) * y5d if with_var else 0
                y6p = phi + hs * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p)
                y6d = dphi + hs * (A61 * k1d + A62 * k2d + A63 * k3d + A64 * k4d + A65 * k5d)
                k6p = _eval(cg, kg, y6p)
                k6d = _eval(cgp, kgp, y6p) * y6d if with_var else 0
                ynp = phi + hs * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p)
                ynd = dphi + hs * (B1 * k1d + B3 * k3d + B4 * k4d + B5 * k5d + B6 * k6d)
                k7p = _eval(cg, kg, ynp)
                k7d = _eval(cgp, kgp, ynp) * ynd if with_var else 0

                bad = not (_finite_c(ynp) and _finite_c(k7p))
                if with_var and not bad:
                    bad = not (_finite_c(ynd) and _finite_c(k7d))
                if not bad:
                    if (cabs(y2p) >= 1.0 - guard or cabs(y3p) >= 1.0 - guard or
                            cabs(y4p) >= 1.0 - guard or cabs(y5p) >= 1.0 - guard or
                            cabs(y6p) >= 1.0 - guard or cabs(ynp) >= 1.0 - guard):
                        bad = True
                if bad:
                    h = 0.5 * hs
                    rejected += 1
                    continue

                # per-step control; see _kernel_py for the rationale
                ep = hs * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p)
                err = cabs(ep)
                if with_var:
                    ed = hs * (E1 * k1d + E3 * k3d + E4 * k4d + E5 * k5d + E6 * k6d + E7 * k7d)
                    scale = cabs(ynd)
                    if scale < 1.0:
                        scale = 1.0
                    if cabs(ed) / scale > err:
                        err = cabs(ed) / scale

                limit = tol
                if err <= limit or hs <= hmin * 2.0:
                    t = t_target if clipped else t + hs
                    phi = ynp
                    dphi = ynd
                    k1p = k7p
                    k1d = k7d
                    accepted += 1
                    if err > max_err:
                        max_err = err
                    if not clipped:
                        e_rel = err / limit if limit > 0 else 0.0
                        if e_rel < 1e-10:
                            fac = 5.0
                        else:
                            fac = 0.9 * e_rel ** -0.17 * err_prev ** 0.06
                            if fac > 5.0:
                                fac = 5.0
                            elif fac < 0.2:
                                fac = 0.2
                        if e_rel > 1e-10:
                            err_prev = e_rel
                        else:
                            err_prev = 1e-10
                        h = hs * fac
                else:
                    rejected += 1
                    fac = 0.9 * (err / limit) ** -0.2
                    if fac < 0.2:
                        fac = 0.2
                    h = hs * fac
            if status != _ST_TRUNC:
                pv[idx] = phi
                dv[idx] = dphi

    return phis, dphis, accepted, rejected, max_err, status, n_done
