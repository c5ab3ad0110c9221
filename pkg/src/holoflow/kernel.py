"""Backend selection for the evaluation/integration kernel.

The compiled extension is preferred when importable; HOLOFLOW_BACKEND can
force either implementation ("compiled" or "python").  Both expose the
same functions over the same tape format.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernel_py
from .expr import Tape

_requested = os.environ.get("HOLOFLOW_BACKEND", "auto").lower()

_impl = None
if _requested in ("auto", "compiled"):
    try:
        from . import _kernel_c as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = None
if _impl is None:
    _impl = _kernel_py

BACKEND = "compiled" if _impl is not _kernel_py else "python"

STATUS_OK = _kernel_py.STATUS_OK
STATUS_TRUNCATED = _kernel_py.STATUS_TRUNCATED


def get_backend(name: str | None = None):
    """Return a kernel module by name ("python"/"compiled"), default the active one."""
    if name is None or name == BACKEND:
        return _impl
    if name == "python":
        return _kernel_py
    if name == "compiled":
        from . import _kernel_c
        return _kernel_c
    raise ValueError(f"unknown backend {name!r}")


def eval_tape(tape: Tape, z: complex) -> complex:
    if tape.stack_size > 120:
        raise ValueError("expression too deep for the kernel stack")
    return _impl.eval_tape(tape.code, tape.consts, complex(z))


def eval_tape_many(tape: Tape, zs) -> np.ndarray:
    if tape.stack_size > 120:
        raise ValueError("expression too deep for the kernel stack")
    return _impl.eval_tape_many(tape.code, tape.consts, np.asarray(zs, dtype=np.complex128))


def integrate_tape(tape_g: Tape, tape_gp: Tape | None, z0: complex, times, tol: float,
                   guard: float, hmin: float):
    """Low-level flow integration; see _kernel_py.integrate for the contract."""
    times = np.asarray(times, dtype=np.float64)
    if len(times) and np.any(np.diff(times) < 0):
        raise ValueError("times must be nondecreasing")
    code_gp = tape_gp.code if tape_gp is not None else None
    consts_gp = tape_gp.consts if tape_gp is not None else None
    return _impl.integrate(
        tape_g.code, tape_g.consts, code_gp, consts_gp,
        complex(z0), times, float(tol), float(guard), float(hmin),
    )
