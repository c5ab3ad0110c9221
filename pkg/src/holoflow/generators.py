"""Infinitesimal generators of one-parameter semigroups on the disc.

A generator is assembled either from its Berkson-Porta data (Denjoy-Wolff
point tau and a Herglotz function p, giving G(z) = (z - tau)(conj(tau) z - 1) p(z))
or from a direct expression for G.  The gallery wires up the closed-form
families used throughout the test suite.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import config, expr, kernel
from .disc import BoundaryPoint, RadialSchedule

__all__ = [
    "BlaschkeHyperbolic",
    "GeneratorSpec",
    "HerglotzSpec",
    "ValidationReport",
    "berkson_porta_eval",
    "blaschke_log_eval",
    "gallery",
    "gallery_names",
    "herglotz_validate",
    "load_generator",
]


# ---------------------------------------------------------------------------
# Blaschke products with zeros on (0, 1), handled in hyperbolic coordinates

@dataclass(frozen=True)
class BlaschkeHyperbolic:
    """Finite Blaschke product with real zeros x_n = tanh(a_n / 2).

    The coordinates a_n = 2 k(0, x_n) grow so fast in the oscillation
    examples that x_n is not representable in doubles; evaluation on the
    real radius therefore works entirely in the coordinate
    s = log((1+z)/(1-z)), where each factor (z - x_n)/(1 - x_n z) equals
    sign(s - a_n) tanh(|s - a_n| / 2).
    """

    coords: tuple[float, ...]

    def __post_init__(self):
        a = self.coords
        if not a or any(x <= 0 for x in a):
            raise ValueError("hyperbolic coordinates must be positive")
        if any(a[i + 1] <= a[i] for i in range(len(a) - 1)):
            raise ValueError("hyperbolic coordinates must be strictly increasing")

    @property
    def n_zeros(self) -> int:
        return len(self.coords)

    def log_eval(self, s: float) -> tuple[int, float]:
        """(sign, log|B|) at the real point z = tanh(s/2), s > 0.

        Returns log|B| = -inf when s hits a zero exactly.
        """
        if s <= 0:
            raise ValueError("log_eval needs s > 0")
        sign = 1
        log_abs = 0.0
        for a in self.coords:
            d = s - a
            if d == 0.0:
                return sign, float("-inf")
            if d < 0:
                sign = -sign
            # log tanh(|d|/2), stable for large |d|
            log_abs += math.log(math.tanh(abs(d) / 2.0))
        return sign, log_abs

    def kept_zeros(self, a_cap: float = 30.0) -> list[float]:
        """Zeros x_n with a_n <= a_cap, materialized as doubles."""
        return [math.tanh(a / 2.0) for a in self.coords if a <= a_cap]

    def ast(self, a_cap: float = 30.0) -> expr.Ast:
        """Truncated product as an expression tree for complex evaluation.

        Dropped far-out factors each sit within ~e^-60 of -1 on any
        representable grid, so only their sign survives; an odd number of
        dropped factors flips the product's sign.
        """
        xs = self.kept_zeros(a_cap)
        node = None
        for x in xs:
            factor = expr.mk_div(
                expr.mk_sub(expr.Z, expr.num(x)),
                expr.mk_sub(expr.ONE, expr.mk_mul(expr.num(x), expr.Z)),
            )
            node = factor if node is None else expr.mk_mul(node, factor)
        if node is None:
            node = expr.ONE
        if (self.n_zeros - len(xs)) % 2:
            node = expr.mk_neg(node)
        return node

    def moebius_log_abs_p(self, s: float) -> float:
        """log|p| for p = (1 + B)/(1 - B) at z = tanh(s/2), in the log domain."""
        sign, la = self.log_eval(s)
        if la == float("-inf"):
            return 0.0   # B = 0, p = 1
        # |1 -/+ B| for B = sign * e^la with la <= 0
        plus = math.log1p(math.exp(la)) if sign > 0 else math.log(-math.expm1(la))
        minus = math.log(-math.expm1(la)) if sign > 0 else math.log1p(math.exp(la))
        return plus - minus

    def oscillation_stat(self, j: int) -> float:
        """(-1)^(j+1) log|p(z_j)| / log(1 - z_j) at the hyperbolic midpoint of
        the j-th pair of zeros (1-based), for p = (1 + B)/(1 - B)."""
        if not 1 <= j < self.n_zeros:
            raise ValueError("j must index a consecutive pair of zeros")
        a = self.coords
        s = 0.5 * (a[j - 1] + a[j])
        log_p = self.moebius_log_abs_p(s)
        # log(1 - tanh(s/2)) = log 2 - s - log1p(e^-s), exact in s
        log_gap = math.log(2.0) - s - math.log1p(math.exp(-s))
        return (-1.0) ** (j + 1) * log_p / log_gap


def blaschke_log_eval(blaschke: BlaschkeHyperbolic, s: float) -> tuple[int, float]:
    return blaschke.log_eval(s)


def factorial_coords(n: int) -> tuple[float, ...]:
    return tuple(float(math.factorial(k)) for k in range(1, n + 1))


# ---------------------------------------------------------------------------
# Herglotz data

@dataclass(frozen=True)
class HerglotzSpec:
    """Holomorphic p with Re p >= 0, carried as an expression tree.

    kind records how the spec was assembled (constant, expression,
    moebius-of-blaschke, power, product); blaschke is kept when the spec
    wraps (1 + B)/(1 - B) so radial probes can use the log-domain path.
    """

    ast: expr.Ast
    kind: str = "expression"
    blaschke: BlaschkeHyperbolic | None = None

    @classmethod
    def constant(cls, c: complex) -> "HerglotzSpec":
        if complex(c).real < 0:
            raise ValueError("constant Herglotz part needs Re c >= 0")
        return cls(expr.num(c), kind="constant")

    @classmethod
    def from_text(cls, text: str) -> "HerglotzSpec":
        return cls(expr.parse(text), kind="expression")

    @classmethod
    def moebius_of_blaschke(cls, blaschke: BlaschkeHyperbolic, a_cap: float = 30.0) -> "HerglotzSpec":
        b = blaschke.ast(a_cap)
        ast = expr.mk_div(expr.mk_add(expr.ONE, b), expr.mk_sub(expr.ONE, b))
        return cls(ast, kind="moebius-of-blaschke", blaschke=blaschke)

    @classmethod
    def power(cls, base: "HerglotzSpec", beta: float) -> "HerglotzSpec":
        if not abs(beta) <= 1:
            raise ValueError("powers of a Herglotz function stay Herglotz only for |beta| <= 1")
        return cls(expr.mk_pow(base.ast, expr.num(beta)), kind="power", blaschke=base.blaschke)

    @classmethod
    def product(cls, factors: Sequence["HerglotzSpec"]) -> "HerglotzSpec":
        node = None
        for f in factors:
            node = f.ast if node is None else expr.mk_mul(node, f.ast)
        if node is None:
            raise ValueError("empty product")
        return cls(node, kind="product")

    def __call__(self, z: complex) -> complex:
        return expr.evaluate(self.ast, z, checked=False)


@dataclass
class ValidationReport:
    valid: bool
    min_re: float
    worst_point: complex
    grid: tuple[int, int]
    tol: float

    def __str__(self):
        verdict = "valid" if self.valid else "invalid"
        return f"{verdict}: min Re p = {self.min_re:.3e} at {self.worst_point:.6f} (tol {self.tol:g})"


def herglotz_validate(p: HerglotzSpec, grid_density: int = 32,
                      tol: float = config.HERGLOTZ_TOL) -> ValidationReport:
    """Minimum of Re p over a polar grid; verdict against -tol."""
    n_r = max(4, grid_density)
    n_t = max(8, 2 * grid_density)
    radii = np.linspace(0.05, 1.0 - 2.0 ** -20, n_r)
    angles = np.linspace(0.0, 2.0 * math.pi, n_t, endpoint=False)
    tape = expr.compile_tape(p.ast)
    zs = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    vals = kernel.eval_tape_many(tape, zs)
    if not np.all(np.isfinite(vals)):
        bad = zs[~np.isfinite(vals)][0]
        raise ArithmeticError(f"Herglotz evaluation failed at grid point {bad}")
    re = vals.real
    i_min = int(np.argmin(re))
    return ValidationReport(
        valid=bool(re[i_min] >= -tol),
        min_re=float(re[i_min]),
        worst_point=complex(zs[i_min]),
        grid=(n_r, n_t),
        tol=tol,
    )


# ---------------------------------------------------------------------------
# Generator specification

def _bp_ast(tau: complex, p_ast: expr.Ast) -> expr.Ast:
    """(z - tau)(conj(tau) z - 1) p(z) as an expression tree."""
    left = expr.mk_sub(expr.Z, expr.num(tau))
    right = expr.mk_sub(expr.mk_mul(expr.num(complex(tau).conjugate()), expr.Z), expr.ONE)
    return expr.mk_mul(expr.mk_mul(left, right), p_ast)


@dataclass
class GeneratorSpec:
    """An infinitesimal generator with evaluators for G and G'.

    At least one of (tau, p) or a direct expression for G must be present;
    when both are given they are cross-checked on an interior grid.
    """

    tau: complex | None = None
    p: HerglotzSpec | None = None
    direct_g: expr.Ast | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)
    radial_log_abs_hook: Callable[[float], float] | None = None
    notes: str = ""

    def __post_init__(self):
        if self.p is None and self.direct_g is None:
            raise ValueError("need (tau, p) Berkson-Porta data or a direct expression for G")
        if self.p is not None and self.tau is None:
            raise ValueError("Berkson-Porta data needs the Denjoy-Wolff point tau")
        if self.tau is not None and abs(self.tau) > 1 + 1e-12:
            raise ValueError("tau must satisfy |tau| <= 1")
        self._g_ast = self.direct_g if self.direct_g is not None else _bp_ast(self.tau, self.p.ast)
        self._gp_ast = expr.differentiate(self._g_ast)
        self._gpp_ast = None
        self._g_tape = expr.compile_tape(self._g_ast)
        self._gp_tape = expr.compile_tape(self._gp_ast)
        if self.p is not None and self.direct_g is not None:
            self._check_agreement()

    def _check_agreement(self, n: int = 64, tol: float = 1e-9):
        rng = np.random.default_rng(7)
        zs = 0.9 * np.sqrt(rng.uniform(0.01, 1.0, n)) * np.exp(2j * math.pi * rng.uniform(0, 1, n))
        bp = expr.compile_tape(_bp_ast(self.tau, self.p.ast))
        a = kernel.eval_tape_many(self._g_tape, zs)
        b = kernel.eval_tape_many(bp, zs)
        worst = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))
        if worst > tol:
            raise ValueError(
                f"direct G and Berkson-Porta assembly disagree (max rel err {worst:.2e})"
            )

    # -- evaluation ---------------------------------------------------------
    @property
    def g_ast(self) -> expr.Ast:
        return self._g_ast

    @property
    def gp_ast(self) -> expr.Ast:
        return self._gp_ast

    @property
    def g_tape(self) -> expr.Tape:
        return self._g_tape

    @property
    def gp_tape(self) -> expr.Tape:
        return self._gp_tape

    def G(self, z: complex) -> complex:
        return kernel.eval_tape(self._g_tape, z)

    def G_many(self, zs) -> np.ndarray:
        return kernel.eval_tape_many(self._g_tape, zs)

    def Gp(self, z: complex) -> complex:
        return kernel.eval_tape(self._gp_tape, z)

    def Gpp(self, z: complex) -> complex:
        if self._gpp_ast is None:
            self._gpp_ast = expr.differentiate(self._gp_ast)
            self._gpp_tape = expr.compile_tape(self._gpp_ast)
        return kernel.eval_tape(self._gpp_tape, z)

    def herglotz_part(self) -> HerglotzSpec:
        """p from the Berkson-Porta factorization; divides direct G when needed."""
        if self.p is not None:
            return self.p
        if self.tau is None:
            raise ValueError("cannot factor out the Denjoy-Wolff terms without tau")
        denom = _bp_ast(self.tau, expr.ONE)
        return HerglotzSpec(expr.mk_div(self._g_ast, denom), kind="expression")

    def validate(self, grid_density: int = 32) -> ValidationReport:
        return herglotz_validate(self.herglotz_part(), grid_density)

    def radial_log_abs_G(self, x: BoundaryPoint, sched: RadialSchedule) -> np.ndarray:
        """log|G(r_k x)| at schedule radii, preferring the log-domain hook."""
        if self.radial_log_abs_hook is not None and abs(x.value - 1.0) < 1e-12:
            gaps = np.asarray(sched.gaps())
            return np.array([self.radial_log_abs_hook(_s_of_gap(g)) for g in gaps])
        zs = np.asarray([r * x.value for r in sched.radii()])
        vals = self.G_many(zs)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(vals))


def _s_of_gap(gap: float) -> float:
    """s = log((1+r)/(1-r)) for r = 1 - gap, stable for tiny gaps."""
    return math.log(2.0 - gap) - math.log(gap)


def berkson_porta_eval(gen: GeneratorSpec, z) -> complex:
    """G(z); named after the representation used to assemble it."""
    return gen.G(complex(z))


# ---------------------------------------------------------------------------
# gallery of closed-form families

def _fmt(v: float) -> str:
    return repr(float(v))


def _const_str(c: complex) -> str:
    return f"({_fmt(c.real)}+{_fmt(c.imag)}*i)"


def _sector_p_text(alpha: float, rotation: complex = 1.0) -> str:
    scale = 1.0 / (2.0 * (1.0 - alpha))
    head = _const_str(rotation * scale) if rotation != 1.0 else _fmt(scale)
    return f"{head}*((1+z)/(1-z))^{_fmt(alpha)}"


def _gallery_blaschke(params) -> GeneratorSpec:
    n = int(params.get("n", 8))
    coords = params.get("coords")
    blaschke = BlaschkeHyperbolic(tuple(coords) if coords else factorial_coords(n))
    p = HerglotzSpec.moebius_of_blaschke(blaschke)
    spec = GeneratorSpec(
        tau=0j, p=p, name="blaschke_osc", params={"n": blaschke.n_zeros},
        radial_log_abs_hook=lambda s: blaschke.moebius_log_abs_p(s),
        notes="oscillating orders at x=1; log-domain radial path for the full product",
    )
    return spec


def _gallery_prescribed(params) -> GeneratorSpec:
    ap = float(params.get("alpha_plus", 0.5))
    am = float(params.get("alpha_minus", -0.5))
    if not (-1.0 <= am <= ap <= 1.0):
        raise ValueError("need -1 <= alpha_minus <= alpha_plus <= 1")
    n = int(params.get("n", 8))
    blaschke = BlaschkeHyperbolic(factorial_coords(n))
    p_star = HerglotzSpec.moebius_of_blaschke(blaschke)
    osc = HerglotzSpec.power(p_star, (ap - am) / 2.0)
    trend = HerglotzSpec.from_text(f"((1-z)/(1+z))^{_fmt((ap + am) / 2.0)}")
    p = HerglotzSpec.product([osc, trend])
    return GeneratorSpec(tau=0j, p=p, name="prescribed_alphas",
                         params={"alpha_plus": ap, "alpha_minus": am})


def _gallery_no_reg_sing(params) -> GeneratorSpec:
    alpha = float(params.get("alpha", 0.5))
    if not (-1.0 < alpha < 1.0) or alpha == 0.0:
        raise ValueError("alpha must lie in (-1,1) without 0")
    n = int(params.get("n", 8))
    blaschke = BlaschkeHyperbolic(factorial_coords(n))
    # self-map with a doubly-logarithmic radial sweep toward z = 1:
    # F(z) = (w-1)/(w+1), w = 1 + log(1 + (1+z)/(1-z)); Re w > 1 keeps F in the disc
    f_text = "(log(1+(1+z)/(1-z)))/(2+log(1+(1+z)/(1-z)))"
    f_ast = expr.parse(f_text)
    p_star = HerglotzSpec.moebius_of_blaschke(blaschke)
    composed = expr.substitute(p_star.ast, f_ast)
    p_ast = expr.mk_mul(
        expr.parse(f"((1-z)/(1+z))^{_fmt(alpha)}"),
        expr.mk_pow(composed, expr.num(1.0 - abs(alpha))),
    )
    return GeneratorSpec(tau=0j, p=HerglotzSpec(p_ast, kind="product"),
                         name="no_reg_sing", params={"alpha": alpha},
                         notes="order alpha at x=1 but no regular singularity")


def _gallery_strip_wobble(params) -> GeneratorSpec:
    alpha = float(params.get("alpha", 0.5))
    if not (-1.0 < alpha < 1.0) or alpha == 0.0:
        raise ValueError("alpha must lie in (-1,1) without 0")
    a = float(params.get("a", math.asinh(math.pi * (1.0 - abs(alpha)) / 2.0)))
    c = 2.0 * a / math.pi
    # sin(c log H) written through exponentials; H = (1+z)/(1-z)
    e_plus = f"exp(i*{_fmt(c)}*log((1+z)/(1-z)))"
    e_minus = f"exp(-i*{_fmt(c)}*log((1+z)/(1-z)))"
    p_text = f"((1-z)/(1+z))^{_fmt(alpha)}*exp(({e_plus}-{e_minus})/(2*i))"
    return GeneratorSpec(tau=0j, p=HerglotzSpec.from_text(p_text),
                         name="strip_wobble", params={"alpha": alpha, "a": a},
                         notes="radial order alpha at x=1; no angular limit of the ratio")


_INVENTED = "invented for testing: closed-form order-alpha family"


def _gallery_sector(params) -> GeneratorSpec:
    alpha = float(params.get("alpha", 0.5))
    if not (-1.0 <= alpha < 1.0) or alpha == 0.0:
        raise ValueError("sector needs alpha in [-1,1) without 0")
    return GeneratorSpec(
        tau=1.0 + 0j, p=HerglotzSpec.from_text(_sector_p_text(alpha)),
        name="sector", params={"alpha": alpha}, notes=_INVENTED,
    )


def _gallery_arc_to_dw(params) -> GeneratorSpec:
    alpha = float(params.get("alpha", 0.5))
    if not (0.0 < alpha < 1.0):
        raise ValueError("arc_to_dw needs alpha in (0,1)")
    rot = cmath.exp(1j * math.pi * (1.0 - alpha) / 2.0)
    return GeneratorSpec(
        tau=1.0 + 0j,
        p=HerglotzSpec.from_text(_sector_p_text(alpha, rotation=rot)),
        name="arc_to_dw", params={"alpha": alpha},
        notes="rotated order-alpha family; upper semicircle is a contact arc ending at tau",
    )


def _gallery_contact(params) -> GeneratorSpec:
    alpha = float(params.get("alpha", 0.5))
    if not (0.0 < alpha < 1.0):
        raise ValueError("contact_alpha needs alpha in (0,1)")
    # principal branch already gives G(0) = -i e^{i pi alpha / 2}
    p_text = f"-i*((i-z)/(1-i*z))^{_fmt(alpha)}"
    return GeneratorSpec(tau=1.0 + 0j, p=HerglotzSpec.from_text(p_text),
                         name="contact_alpha", params={"alpha": alpha})


def _gallery_loglinear(params) -> GeneratorSpec:
    g_text = "-0.5*(1-z^2)*log((1+z)/(1-z))"
    p_text = "(1-z^2)*log((1+z)/(1-z))/(2*z)"
    return GeneratorSpec(tau=0j, p=HerglotzSpec.from_text(p_text),
                         direct_g=expr.parse(g_text), name="loglinear")


_GALLERY: dict[str, Callable[[dict], GeneratorSpec]] = {
    "blaschke_osc": _gallery_blaschke,
    "prescribed_alphas": _gallery_prescribed,
    "no_reg_sing": _gallery_no_reg_sing,
    "strip_wobble": _gallery_strip_wobble,
    "contact_alpha": _gallery_contact,
    "loglinear": _gallery_loglinear,
    "sector": _gallery_sector,
    "slit": lambda params: GeneratorSpec(
        tau=1.0 + 0j, p=HerglotzSpec.from_text(_sector_p_text(-1.0)),
        name="slit", params={"alpha": -1.0}, notes=_INVENTED),
    "parabolic": lambda params: GeneratorSpec(
        tau=1.0 + 0j, p=HerglotzSpec.constant(1.0), direct_g=expr.parse("(1-z)^2"),
        name="parabolic"),
    "dilation": lambda params: GeneratorSpec(
        tau=0j, p=HerglotzSpec.constant(1.0), direct_g=expr.parse("-z"),
        name="dilation"),
    "hyperbolic": lambda params: GeneratorSpec(
        tau=1.0 + 0j, p=HerglotzSpec.from_text("(1+z)/(2*(1-z))"),
        name="hyperbolic"),
    "arc_to_dw": _gallery_arc_to_dw,
}


def gallery_names() -> list[str]:
    return sorted(_GALLERY)


def gallery(name: str, params: dict | None = None, **kw) -> GeneratorSpec:
    """Construct a registry generator; unknown names and out-of-range parameters reject."""
    if name not in _GALLERY:
        raise KeyError(f"unknown gallery generator {name!r}; known: {', '.join(gallery_names())}")
    merged = dict(params or {})
    merged.update(kw)
    return _GALLERY[name](merged)


# ---------------------------------------------------------------------------
# JSON generator files

def load_generator(source) -> GeneratorSpec:
    """Build a GeneratorSpec from a JSON file path, JSON text, or dict.

    Exactly one definition style is required:
      {"tau": [re, im], "p_expr": "..."}   Berkson-Porta data
      {"g_expr": "..."}                    direct expression (tau optional)
      {"gallery": {"name": "...", "params": {...}}}
    """
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            data = json.loads(text)
        else:
            with open(text, "r", encoding="utf-8") as fh:
                data = json.load(fh)

    styles = [k for k in ("p_expr", "g_expr", "gallery") if data.get(k) is not None]
    if len(styles) != 1:
        raise ValueError(f"exactly one of p_expr / g_expr / gallery required, got {styles or 'none'}")

    if "gallery" in styles:
        entry = data["gallery"]
        return gallery(entry["name"], entry.get("params") or {})

    tau = None
    if data.get("tau") is not None:
        re_im = data["tau"]
        tau = complex(float(re_im[0]), float(re_im[1]))
    if "p_expr" in styles:
        if tau is None:
            raise ValueError("p_expr requires tau")
        return GeneratorSpec(tau=tau, p=HerglotzSpec.from_text(data["p_expr"]), name="file")
    return GeneratorSpec(tau=tau, direct_g=expr.parse(data["g_expr"]), name="file")
