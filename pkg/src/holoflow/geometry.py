"""Planar image-domain descriptions and boundary-shape criteria.

Domains are boundary chains (segments, rays, parametric pieces) plus an
optional exact membership fast path for the canonical shapes (slit plane,
sector, strip, comb).  The criteria implemented here decide, from the
shape of the domain near a boundary point, whether the matching boundary
point of the disc carries a fractional singularity: Dini-smooth corner
detection, locally-dense boundary sets, cone containment, per-annulus
complement openings (whose summability characterizes regular poles), and
square-summable strip-subdivision defects (angular derivative at +infinity).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import config
from .disc import TWO_PI, canonical_angle
from .extrapolate import sum_verdict

__all__ = [
    "BertilssonReport",
    "CornerReport",
    "PlanarDomain",
    "Ray",
    "Segment",
    "Parametric",
    "SubdivisionReport",
    "bertilsson_alphas",
    "comb_domain",
    "dini_corner",
    "load_domain",
    "locally_dense",
    "membership",
    "polygon_domain",
    "rw_subdivision",
    "sector_domain",
    "sector_test",
    "slit_plane",
    "strip_domain",
    "strip_image_of_sector",
    "strip_transform",
]


# ---------------------------------------------------------------------------
# boundary chain pieces

@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def points(self, n: int) -> np.ndarray:
        t = np.linspace(0.0, 1.0, n)
        return self.a + t * (self.b - self.a)

    def circle_hits(self, w0: complex, rho: float) -> list[complex]:
        return _line_circle(self.a, self.b - self.a, 0.0, 1.0, w0, rho)

    def distance(self, w: complex) -> float:
        return _seg_distance(self.a, self.b - self.a, 0.0, 1.0, w)

    def crossings(self, w: complex, direction: complex) -> int:
        return _line_cross(self.a, self.b - self.a, 0.0, 1.0, w, direction)


@dataclass(frozen=True)
class Ray:
    anchor: complex
    direction: complex          # unit-ish; extends to t = +inf

    def points(self, n: int, t_max: float = 64.0) -> np.ndarray:
        t = np.geomspace(1e-9, t_max, n)
        return self.anchor + t * self.direction

    def circle_hits(self, w0: complex, rho: float) -> list[complex]:
        return _line_circle(self.anchor, self.direction, 0.0, math.inf, w0, rho)

    def distance(self, w: complex) -> float:
        return _seg_distance(self.anchor, self.direction, 0.0, math.inf, w)

    def crossings(self, w: complex, direction: complex) -> int:
        return _line_cross(self.anchor, self.direction, 0.0, math.inf, w, direction)


@dataclass(frozen=True)
class Parametric:
    fn: Callable[[float], complex]
    t0: float
    t1: float
    samples: int = 512

    def points(self, n: int | None = None) -> np.ndarray:
        t = np.linspace(self.t0, self.t1, n or self.samples)
        return np.asarray([self.fn(float(x)) for x in t])

    def circle_hits(self, w0: complex, rho: float) -> list[complex]:
        pts = self.points()
        d = np.abs(pts - w0) - rho
        hits = []
        for i in np.where(np.diff(np.sign(d)) != 0)[0]:
            t_lo = self.t0 + (self.t1 - self.t0) * i / (len(pts) - 1)
            t_hi = self.t0 + (self.t1 - self.t0) * (i + 1) / (len(pts) - 1)
            for _ in range(60):
                tm = 0.5 * (t_lo + t_hi)
                if (abs(self.fn(tm) - w0) - rho) * (abs(self.fn(t_lo) - w0) - rho) <= 0:
                    t_hi = tm
                else:
                    t_lo = tm
            hits.append(self.fn(0.5 * (t_lo + t_hi)))
        return hits

    def distance(self, w: complex) -> float:
        return float(np.min(np.abs(self.points() - w)))

    def crossings(self, w: complex, direction: complex) -> int:
        pts = self.points()
        n = 0
        for a, b in zip(pts[:-1], pts[1:]):
            n += _line_cross(a, b - a, 0.0, 1.0, w, direction)
        return n


def _line_circle(anchor, direction, t_lo, t_hi, w0, rho):
    # |anchor + t d - w0|^2 = rho^2
    d = direction
    f = anchor - w0
    a = (d * d.conjugate()).real
    b = 2.0 * (f * d.conjugate()).real
    c = (f * f.conjugate()).real - rho * rho
    disc = b * b - 4 * a * c
    if disc < 0 or a == 0:
        return []
    out = []
    for sgn in (-1.0, 1.0):
        t = (-b + sgn * math.sqrt(disc)) / (2 * a)
        if t_lo - 1e-12 <= t <= t_hi:
            out.append(anchor + t * direction)
    return out


def _seg_distance(anchor, direction, t_lo, t_hi, w):
    d2 = (direction * direction.conjugate()).real
    if d2 == 0:
        return abs(w - anchor)
    t = ((w - anchor) * direction.conjugate()).real / d2
    t = min(max(t, t_lo), t_hi if math.isfinite(t_hi) else t)
    t = max(t, t_lo)
    return abs(w - (anchor + t * direction))


def _line_cross(anchor, direction, t_lo, t_hi, w, ray_dir):
    """0/1: does the ray w + s*ray_dir (s>0) cross this piece?"""
    # solve w + s*ray_dir = anchor + t*direction
    det = (ray_dir.real * -direction.imag) - (ray_dir.imag * -direction.real)
    if abs(det) < 1e-300:
        return 0
    rx = anchor.real - w.real
    ry = anchor.imag - w.imag
    s = (rx * -direction.imag + direction.real * ry) / det
    t = (ray_dir.real * ry - ray_dir.imag * rx) / det
    hi_ok = t <= t_hi if math.isfinite(t_hi) else True
    return 1 if (s > 1e-12 and t_lo - 1e-12 <= t and hi_ok) else 0


# ---------------------------------------------------------------------------
# domains

@dataclass
class PlanarDomain:
    """Boundary chain plus optional exact membership fast path.

    Membership answers are deterministic for points farther than eps from
    the chain; the band in between reports "boundary-band".
    """

    pieces: list = field(default_factory=list)
    inside_fn: Callable[[complex], bool] | None = None
    translation_invariant: bool = False
    eps: float = 1e-9
    label: str = "domain"

    def boundary_distance(self, w: complex) -> float:
        if not self.pieces:
            return math.inf
        return min(p.distance(w) for p in self.pieces)

    def is_inside(self, w: complex) -> bool:
        if self.inside_fn is not None:
            return bool(self.inside_fn(w))
        d = cmath.exp(0.5531j)   # generic direction; avoids piece alignment
        return sum(p.crossings(w, d) for p in self.pieces) % 2 == 1

    def membership(self, w: complex) -> str:
        if self.boundary_distance(w) < self.eps:
            return "boundary-band"
        return "inside" if self.is_inside(w) else "outside"


def membership(dom: PlanarDomain, w: complex) -> str:
    return dom.membership(complex(w))


def polygon_domain(vertices: Sequence[complex], eps: float = 1e-9) -> PlanarDomain:
    vs = [complex(v) for v in vertices]
    if len(vs) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    pieces = [Segment(a, b) for a, b in zip(vs, vs[1:] + vs[:1])]
    if any(p.a == p.b for p in pieces):
        raise ValueError("degenerate polygon edge")
    return PlanarDomain(pieces, eps=eps, label="polygon")


def slit_plane(tip: complex = 0j, direction: complex = -1.0 + 0j,
               eps: float = 1e-9) -> PlanarDomain:
    """Plane minus the ray {tip + t*direction : t >= 0}."""
    direction = direction / abs(direction)
    slit = Ray(complex(tip), direction)

    def inside(w: complex) -> bool:
        return slit.distance(w) > 0.0

    return PlanarDomain([slit], inside_fn=inside, eps=eps, label="slit-plane")


def sector_domain(vertex: complex = 0j, bisector: complex = 1.0 + 0j,
                  opening: float = math.pi / 2, eps: float = 1e-12) -> PlanarDomain:
    if not 0.0 < opening < TWO_PI:
        raise ValueError("opening must lie in (0, 2 pi)")
    bisector = bisector / abs(bisector)
    half = opening / 2.0
    e_plus = Ray(complex(vertex), bisector * cmath.exp(1j * half))
    e_minus = Ray(complex(vertex), bisector * cmath.exp(-1j * half))

    def inside(w: complex) -> bool:
        if w == vertex:
            return False
        return abs(cmath.phase((w - vertex) / bisector)) < half

    return PlanarDomain([e_plus, e_minus], inside_fn=inside, eps=eps, label="sector")


def strip_domain(half_height: float = 0.5, defect: Callable[[float], float] | None = None,
                 u_window: tuple[float, float] = (0.0, 64.0),
                 eps: float = 1e-12) -> PlanarDomain:
    """Horizontal strip {|Im| < half_height - defect(Re)} (defect >= 0, non-increasing)."""
    d = defect or (lambda u: 0.0)

    def inside(w: complex) -> bool:
        return abs(w.imag) < half_height - d(w.real)

    top = Parametric(lambda u: complex(u, half_height - d(u)), *u_window, samples=1024)
    bottom = Parametric(lambda u: complex(u, -(half_height - d(u))), *u_window, samples=1024)
    return PlanarDomain([top, bottom], inside_fn=inside, eps=eps,
                        translation_invariant=defect is None, label="strip")


def comb_domain(deltas: Sequence[float], eps: float = 1e-9) -> PlanarDomain:
    """Strip {|Im| < 1} minus the teeth {|Im w| = delta_n, Re w <= -2n}, n >= 1."""
    ds = [float(x) for x in deltas]
    if any(not 0.0 < x < 1.0 for x in ds):
        raise ValueError("tooth heights must lie in (0, 1)")
    pieces = [Ray(complex(0.0, s), 1.0 + 0j) for s in (1.0, -1.0)]   # strip edges (Re >= 0 halves)
    pieces += [Ray(complex(0.0, s) - 64.0, 1.0 + 0j) for s in (1.0, -1.0)]
    teeth = []
    for n, dn in enumerate(ds, start=1):
        for s in (1.0, -1.0):
            teeth.append(Ray(complex(-2.0 * n, s * dn), -1.0 + 0j))
    pieces += teeth

    def inside(w: complex) -> bool:
        if abs(w.imag) >= 1.0:
            return False
        for n, dn in enumerate(ds, start=1):
            if w.real <= -2.0 * n and abs(abs(w.imag) - dn) == 0.0:
                return False
        return True

    dom = PlanarDomain(pieces, inside_fn=inside, eps=eps, label="comb")
    dom.deltas = ds
    return dom


def strip_image_of_sector(opening: float, vertex: complex = 0j,
                          bisector: complex = 1.0 + 0j, c0: float = 0.0) -> PlanarDomain:
    """Image of a sector under the log map that straightens it to a strip.

    Exactly the domain probed by the subdivision criterion when the
    Koenigs image is a sector; its cross-sections are the strip's once Re
    is large enough.
    """
    sec = sector_domain(vertex, bisector, opening)
    c = opening

    def inside(z: complex) -> bool:
        w = vertex + cmath.exp(c * (1j * c0 - z)) * bisector
        return sec.is_inside(w)

    return PlanarDomain([], inside_fn=inside, eps=1e-12, label="sector-strip-image")


def load_domain(source) -> PlanarDomain:
    """Domain from a JSON file path, JSON text, or dict."""
    import json
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        data = json.loads(text) if text.lstrip().startswith("{") else json.load(open(text))
    kind = data.get("kind")
    p = data.get("params", {})
    if kind == "slit-plane":
        tip = complex(*p.get("tip", [0.0, 0.0]))
        direction = complex(*p.get("direction", [-1.0, 0.0]))
        return slit_plane(tip, direction)
    if kind == "sector":
        return sector_domain(complex(*p.get("vertex", [0.0, 0.0])),
                             complex(*p.get("bisector", [1.0, 0.0])),
                             float(p.get("opening", math.pi / 2)))
    if kind == "strip":
        return strip_domain(float(p.get("half_height", 0.5)))
    if kind == "comb":
        return comb_domain(p.get("deltas", [0.5, 0.25, 0.125]))
    if kind == "polygon":
        return polygon_domain([complex(*v) for v in p["vertices"]])
    raise ValueError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# Dini-smooth corners

@dataclass
class CornerReport:
    vertex: complex
    opening: float | None
    dini: str                    # "dini" | "not-dini" | "not-a-corner" | "inconclusive"
    proxy_terms: np.ndarray
    branch_args: tuple[np.ndarray, np.ndarray] | None
    rhos: np.ndarray


def dini_corner(dom: PlanarDomain, w0: complex, rho0: float = 0.25,
                n_shells: int = 22) -> CornerReport:
    """Corner test at a boundary point via dyadic circle intersections.

    Each circle |w - w0| = rho0 2^-j must meet the chain exactly twice;
    the two intersection arguments are tracked by continuity.  The corner
    opening is the interior angle between the deepest arguments, and the
    Dini proxy sums the tail oscillation of each argument per dyadic
    shell (a discretization of the modulus-of-continuity integral).
    """
    w0 = complex(w0)
    rhos = rho0 * 2.0 ** -np.arange(n_shells, dtype=float)
    args_a: list[float] = []
    args_b: list[float] = []
    for rho in rhos:
        hits = []
        for piece in dom.pieces:
            hits.extend(piece.circle_hits(w0, rho))
        # dedupe near-coincident hits (piece junctions)
        merged: list[complex] = []
        for h in hits:
            if all(abs(h - m) > 1e-9 * rho for m in merged):
                merged.append(h)
        if len(merged) != 2:
            return CornerReport(w0, None, "not-a-corner", np.array([]), None, rhos)
        a1, a2 = (cmath.phase(h - w0) for h in merged)
        if not args_a:
            args_a.append(a1)
            args_b.append(a2)
        else:
            # continuity: match to the previous shell, allowing 2 pi wraps
            c1 = a1 + TWO_PI * round((args_a[-1] - a1) / TWO_PI)
            c2 = a2 + TWO_PI * round((args_a[-1] - a2) / TWO_PI)
            if abs(c1 - args_a[-1]) <= abs(c2 - args_a[-1]):
                args_a.append(c1)
                args_b.append(a2 + TWO_PI * round((args_b[-1] - a2) / TWO_PI))
            else:
                args_a.append(c2)
                args_b.append(a1 + TWO_PI * round((args_b[-1] - a1) / TWO_PI))
    arr_a = np.asarray(args_a)
    arr_b = np.asarray(args_b)

    # interior opening: the side of the bisector that lies inside the domain
    raw = abs(arr_a[-1] - arr_b[-1]) % TWO_PI
    mid = 0.5 * (arr_a[-1] + arr_b[-1])
    probe = w0 + rhos[-1] * cmath.exp(1j * mid)
    opening = raw if dom.is_inside(probe) else TWO_PI - raw
    # tail oscillation per shell and side (modulus of continuity at scale 2^-j)
    osc_a = np.array([np.ptp(arr_a[j:]) for j in range(len(arr_a))])
    osc_b = np.array([np.ptp(arr_b[j:]) for j in range(len(arr_b))])
    terms = (osc_a + osc_b) * math.log(2.0)
    verdict, _exp = sum_verdict(terms, config.TAIL_EXP_CONVERGES, config.TAIL_EXP_DIVERGES)
    dini = {"converges": "dini", "diverges": "not-dini"}.get(verdict, "inconclusive")
    return CornerReport(w0, float(opening), dini, terms, (arr_a, arr_b), rhos)


# ---------------------------------------------------------------------------
# locally dense boundary sets

def locally_dense(points: Sequence[complex], w0: complex,
                  tangent: complex = 1.0 + 0j) -> dict:
    """Square-summable log-ratio test for monotone approach on both curve sides.

    Sides are split by the sign of Re((w - w0)/tangent); each side needs
    distances spanning at least six decades.  Including every available
    point minimizes the squared-log sum, so the monotone subsequence is
    just the sorted, deduplicated distance list.
    """
    w0 = complex(w0)
    tangent = tangent / abs(tangent)
    sides: dict[str, list[float]] = {"plus": [], "minus": []}
    for w in points:
        rel = (complex(w) - w0) / tangent
        d = abs(rel)
        if d == 0:
            continue
        sides["plus" if rel.real >= 0 else "minus"].append(d)
    out = {"verdict": "locally-dense", "sides": {}}
    for name, ds in sides.items():
        if not ds:
            out["sides"][name] = {"verdict": "empty"}
            out["verdict"] = "fails"
            continue
        arr = np.unique(np.asarray(ds, dtype=float))[::-1]
        span = arr[0] / arr[-1]
        if span < 1e6:
            out["sides"][name] = {"verdict": "span-too-small", "span": span}
            out["verdict"] = "fails"
            continue
        ratios_sq = np.log(arr[:-1] / arr[1:]) ** 2
        verdict, tail = sum_verdict(ratios_sq, config.TAIL_EXP_CONVERGES,
                                    config.TAIL_EXP_DIVERGES)
        out["sides"][name] = {
            "verdict": verdict,
            "partial_sum": float(ratios_sq.sum()),
            "tail_exponent": tail,
        }
        if verdict != "converges":
            out["verdict"] = "fails" if verdict == "diverges" else "inconclusive"
    return out


# ---------------------------------------------------------------------------
# cone containment

def sector_test(dom: PlanarDomain, w0: complex, nu: complex, theta: float, rho: float,
                n_radial: int = 24, n_mc: int = 256,
                seed: int = config.GEOMETRY_SEED) -> dict:
    """Is the open cone {w0 + nu t e^{i a}: |a| < theta/2, 0 < t < rho} inside?

    Deterministic near-edge rays catch thin violations; seeded rejection
    samples cover the bulk.  Returns a dict with "contained" and a witness
    point on failure.
    """
    if not 0.0 < theta < TWO_PI:
        raise ValueError("theta must lie in (0, 2 pi)")
    w0 = complex(w0)
    nu = complex(nu) / abs(complex(nu))
    radii = rho * np.geomspace(1e-6, 1.0 - 1e-9, n_radial)
    angles = np.array([-0.499999, -0.25, 0.0, 0.25, 0.499999]) * theta
    rng = np.random.default_rng(seed)
    mc = np.column_stack([
        rho * np.sqrt(rng.uniform(1e-12, 1.0, n_mc)),
        theta * (rng.uniform(0.0, 1.0, n_mc) - 0.5) * 0.999999,
    ])
    pts = [w0 + nu * r * cmath.exp(1j * a) for r in radii for a in angles]
    pts += [w0 + nu * r * cmath.exp(1j * a) for r, a in mc]
    for w in pts:
        if dom.membership(w) != "inside":
            return {"contained": False, "witness": w}
    return {"contained": True, "witness": None}


# ---------------------------------------------------------------------------
# per-annulus complement openings

@dataclass
class BertilssonReport:
    gamma: float
    alphas: np.ndarray
    partial_sums: np.ndarray
    tail_exponent: float
    verdict: str                 # converges | diverges | inconclusive

    def to_json_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "alphas": [float(a) for a in self.alphas],
            "partial_sums": [float(s) for s in self.partial_sums],
            "tail_exponent": self.tail_exponent,
            "verdict": self.verdict,
        }


def bertilsson_alphas(dom: PlanarDomain, w0: complex, gamma: float = 2.0,
                      k_max: int = 24, seed: int = config.GEOMETRY_SEED) -> BertilssonReport:
    """Opening of the smallest vertex angle containing the complement, per annulus.

    Complement samples combine exact boundary-chain points inside the
    annulus gamma^-(k+1) <= |w - w0| <= gamma^-k with seeded rejection
    samples of the annulus; the opening is 2 pi minus the largest angular
    gap.  Summability of the openings is the regular-pole criterion for
    Koenigs images.
    """
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    w0 = complex(w0)
    rng = np.random.default_rng(seed)
    alphas = []
    for k in range(k_max):
        r_hi = gamma ** -float(k)
        r_lo = gamma ** -float(k + 1)
        angles = []
        for piece in dom.pieces:
            # walk the piece densely in the annulus radius range
            if isinstance(piece, Ray):
                ts = _ray_annulus_ts(piece, w0, r_lo, r_hi)
            elif isinstance(piece, Segment):
                ts = np.linspace(0.0, 1.0, 512)
                ts = [(piece.a + t * (piece.b - piece.a)) for t in ts]
                ts = [w for w in ts if r_lo <= abs(w - w0) <= r_hi]
            else:
                ts = [w for w in piece.points() if r_lo <= abs(w - w0) <= r_hi]
            for w in ts:
                angles.append(canonical_angle(cmath.phase(w - w0)))
        # rejection samples of the annulus interior
        u = rng.uniform(r_lo * r_lo, r_hi * r_hi, config.BERTILSSON_SAMPLES)
        a = rng.uniform(0.0, TWO_PI, config.BERTILSSON_SAMPLES)
        ws = w0 + np.sqrt(u) * np.exp(1j * a)
        for w in ws:
            if not dom.is_inside(complex(w)):
                angles.append(canonical_angle(cmath.phase(complex(w) - w0)))
        if not angles:
            alphas.append(0.0)
            continue
        arr = np.sort(np.asarray(angles))
        gaps = np.diff(np.concatenate([arr, [arr[0] + TWO_PI]]))
        alphas.append(float(TWO_PI - np.max(gaps)) if len(arr) > 1 else 0.0)
    alphas = np.asarray(alphas)
    sums = np.cumsum(alphas)
    verdict, tail = sum_verdict(alphas, config.TAIL_EXP_CONVERGES, config.TAIL_EXP_DIVERGES)
    return BertilssonReport(gamma, alphas, sums, tail, verdict)


def _ray_annulus_ts(ray: Ray, w0: complex, r_lo: float, r_hi: float, n: int = 256):
    # parameter window where the ray meets the annulus, sampled densely
    ts = []
    for rho in np.linspace(r_lo, r_hi, n):
        for w in ray.circle_hits(w0, rho):
            ts.append(w)
    return ts


# ---------------------------------------------------------------------------
# strip subdivision criterion

@dataclass
class SubdivisionReport:
    u_values: np.ndarray
    deltas: np.ndarray
    theta_p: np.ndarray
    theta_pp: np.ndarray
    sums: dict
    verdict: str                  # "yes" | "fails-sufficient-condition" | "inconclusive"

    def to_json_dict(self) -> dict:
        return {
            "n_points": int(len(self.u_values)),
            "sum_delta_sq": float(np.sum(self.deltas ** 2)),
            "sum_theta_p_sq": float(np.sum(self.theta_p ** 2)),
            "sum_theta_pp_sq": float(np.sum(self.theta_pp ** 2)),
            "verdict": self.verdict,
        }


def _cross_section(dom: PlanarDomain, u: float, v_cap: float = 0.75) -> tuple[float, float]:
    """(v_lo, v_hi) of the cross-section component meeting the real axis."""
    if not dom.is_inside(complex(u, 0.0)):
        raise ValueError(f"cross-section at u={u} misses the real axis")

    def edge(sign: float) -> float:
        lo, hi = 0.0, v_cap
        if dom.is_inside(complex(u, sign * v_cap)):
            return sign * v_cap
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if dom.is_inside(complex(u, sign * mid)):
                lo = mid
            else:
                hi = mid
        return sign * 0.5 * (lo + hi)

    return edge(-1.0), edge(1.0)


def rw_subdivision(strip_dom: PlanarDomain, u_range: tuple[float, float] = (1.0, 60.0),
                   n_grid: int = 600, max_points: int = 3000) -> SubdivisionReport:
    """Square-summability test for the angular derivative of a strip-like domain.

    The defect omega(u) is the monotone envelope of the distance of the
    cross-section ends from +-1/2; subdivision points solve
    u_n - u_{n-1} = omega(u_n) (bisection per step).  The verdict demands
    square-summable gaps and edge defects.

    Slowly-vanishing defects make the subdivision sequence advance by
    omega per step, so it is capped at max_points and judged by its tail
    behavior rather than by reaching the far end of the window.
    """
    u0, u_max = u_range
    grid = np.linspace(u0, u_max, n_grid)
    lows = np.empty(n_grid)
    highs = np.empty(n_grid)
    for i, u in enumerate(grid):
        lo, hi = _cross_section(strip_dom, float(u))
        lows[i], highs[i] = lo, hi
    if np.any(lows < -0.5 - 1e-9) or np.any(highs > 0.5 + 1e-9):
        raise ValueError("domain is not contained in the height-1 strip")
    defect = np.maximum(np.abs(lows + 0.5), np.abs(highs - 0.5))
    omega = np.maximum.accumulate(defect[::-1])[::-1]   # sup over u' >= u

    def omega_at(u: float) -> float:
        return float(np.interp(u, grid, omega))

    us = [u0]
    while us[-1] < u_max and len(us) < max_points:
        base = us[-1]
        w0 = omega_at(base)
        if w0 <= 1e-14:
            break   # exact strip from here on; all later defects vanish
        lo, hi = base, base + max(w0, 1e-12) + 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if mid - base < omega_at(mid):
                lo = mid
            else:
                hi = mid
        nxt = 0.5 * (lo + hi)
        if nxt >= u_max or nxt - base < 1e-12:
            break
        us.append(nxt)
    us = np.asarray(us)
    if len(us) < 2:
        sums = {"delta_sq": 0.0, "theta_p_sq": 0.0, "theta_pp_sq": 0.0}
        return SubdivisionReport(us, np.array([]), np.array([]), np.array([]),
                                 sums, "yes")
    deltas = np.diff(us)
    theta_p = np.empty(len(us) - 1)
    theta_pp = np.empty(len(us) - 1)
    for i in range(len(us) - 1):
        sel = (grid >= us[i]) & (grid <= us[i + 1])
        if not np.any(sel):
            sel = np.array([np.argmin(np.abs(grid - us[i]))])
        theta_p[i] = 0.5 + np.max(lows[sel])
        theta_pp[i] = 0.5 - np.min(highs[sel])
    sums = {
        "delta_sq": float(np.sum(deltas ** 2)),
        "theta_p_sq": float(np.sum(theta_p ** 2)),
        "theta_pp_sq": float(np.sum(theta_pp ** 2)),
    }
    verdicts = [sum_verdict(seq ** 2, config.TAIL_EXP_CONVERGES, config.TAIL_EXP_DIVERGES)[0]
                for seq in (deltas, theta_p, theta_pp)]
    if all(v == "converges" for v in verdicts):
        verdict = "yes"
    elif any(v == "diverges" for v in verdicts):
        verdict = "fails-sufficient-condition"
    else:
        verdict = "inconclusive"
    return SubdivisionReport(us, deltas, theta_p, theta_pp, sums, verdict)


# ---------------------------------------------------------------------------
# vertex-straightening log map

class BranchCutHit(ValueError):
    pass


def strip_transform(w: complex, w0: complex, alpha: float, c0: float = 0.0,
                    cut_angle: float = math.pi) -> complex:
    """i c0 - log(w - w0)/((1-alpha) pi), branch continuous off the cut ray.

    Straightens a vertex sector of opening (1-alpha) pi at w0 into a
    horizontal strip of height 1.
    """
    w = complex(w)
    if w == w0:
        raise ZeroDivisionError("strip transform undefined at the vertex")
    zeta = w - complex(w0)
    a = cmath.phase(zeta)
    # representative argument in (cut_angle - 2 pi, cut_angle)
    while a >= cut_angle:
        a -= TWO_PI
    while a < cut_angle - TWO_PI:
        a += TWO_PI
    if abs(a - cut_angle) < 1e-15 or abs(a - (cut_angle - TWO_PI)) < 1e-15:
        raise BranchCutHit(f"{w} lies on the declared cut")
    log_z = complex(math.log(abs(zeta)), a)
    return 1j * c0 - log_z / ((1.0 - alpha) * math.pi)
