"""Hardness and approximation ratio curves over the cardinality q.

For a cut constraint the relaxation/rounding analysis yields, per
cardinality q in (0,1) and negative correlation rho, the ratio

    beta_cut(q, rho) = (1 - G(q) - G(1-q)) / (2 (q - q^2) (1 - rho))
    beta_vc(q, rho)  = (1 - G(1-q)) / (q (1 + (1-q)(1-rho)))

where G(z) = gamma_rho(rho, z, z).  The curves of interest take the
infimum over rho in kappa(q), the feasible interval of correlations of
two q-biased bits.  At the extremal rho = -q/(1-q) both denominators
collapse to 2q, which yields the closed approximation-ratio forms

    alpha_cut(q)  = (2q - 2 G(q)) / (2q)
    alpha_2sat(q) = (1 - G(1-q)) / (2q)        (rho = -q/(1-q))

so alpha_cut(q) == beta_cut(q, -q/(1-q)) and alpha_2sat(q) ==
beta_vc(q, -q/(1-q)) hold as identities; tests pin them to 1e-10.

`full_conf_alpha_cut` solves the underlying three-variable problem: the
minimum over all configurations (mu1, mu2, rho) satisfying the four
triangle inequalities of the per-constraint cut rounding ratio.  The
diagonal restriction mu1 = mu2 = mu, rho = -1 + 2|mu| reproduces
alpha_cut under q = (1 - mu)/2.

Flattening (`hardness_curve(..., flatten=True)`) applies the padding
arguments that transfer hardness across cardinalities:
  * vc: hardness at q transfers to every q' <= q (isolated vertices),
    so the curve is replaced by its running minimum from the right.
  * cut: the same transfer is only valid within each half [0, 1/2] and
    [1/2, 1] (toward 1/2 from either side).
  * 2sat: negating variables maps cardinality q to 1-q, so the
    flattened vc curve is symmetrized by min(curve(q), curve(1-q));
    dummy variables additionally make the problem at any q at least as
    hard as unconstrained Max-2-Sat, clamping the center bump at
    UNCONSTRAINED_2SAT_LEVEL.
All flattening operates on the evaluated grid; callers who want the
clipping to "see" a minimum must include it in the grid range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import DomainError
from .gaussian import gamma_rho, gamma_rho_vec

# Approximation/hardness level of unconstrained Max-2-Sat (the
# Lewin-Livnat-Zwick ratio, ~0.9401, with a matching conditional lower
# bound).  Used only as the dummy-variable flattening floor for the
# 2sat hardness curve; it is external input, not derivable from the
# bivariate-normal machinery in this package.
UNCONSTRAINED_2SAT_LEVEL = 0.9401

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

Problem = Literal["cut", "vc", "2sat"]


@dataclass(frozen=True)
class RhoInterval:
    """Feasible correlation interval [lo, 0) (open at lo iff q = 1/2)."""

    lo: float
    lo_closed: bool
    hi_open: float = 0.0

    def contains(self, rho: float, tol: float = 1e-12) -> bool:
        if rho >= self.hi_open:
            return False
        if self.lo_closed:
            return rho >= self.lo - tol
        return rho > self.lo

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        return f"{left}{self.lo:.12g}, {self.hi_open:g})"


def _check_q(q: float, name: str = "q") -> None:
    if not (isinstance(q, (int, float)) and math.isfinite(q) and 0.0 < q < 1.0):
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {q!r}")


def kappa(q: float) -> RhoInterval:
    """Feasible negative correlations of two q-biased bits."""
    _check_q(q)
    if q == 0.5:
        return RhoInterval(lo=-1.0, lo_closed=False)
    if q < 0.5:
        return RhoInterval(lo=-q / (1.0 - q), lo_closed=True)
    return RhoInterval(lo=-(1.0 - q) / q, lo_closed=True)


def _check_rho_in_kappa(q: float, rho: float) -> None:
    iv = kappa(q)
    if not iv.contains(rho):
        raise DomainError(f"rho={rho!r} outside kappa({q}) = {iv}")


def beta_cut(q: float, rho: float) -> float:
    """Cut hardness ratio at cardinality q and correlation rho."""
    _check_q(q)
    _check_rho_in_kappa(q, rho)
    g = gamma_rho(rho, q, q) + gamma_rho(rho, 1.0 - q, 1.0 - q)
    return (1.0 - g) / (2.0 * (q - q * q) * (1.0 - rho))


def beta_vc(q: float, rho: float) -> float:
    """Coverage hardness ratio at cardinality q and correlation rho."""
    _check_q(q)
    _check_rho_in_kappa(q, rho)
    return (1.0 - gamma_rho(rho, 1.0 - q, 1.0 - q)) / (q * (1.0 + (1.0 - q) * (1.0 - rho)))


def _beta_cut_vec(q: float, rhos: np.ndarray) -> np.ndarray:
    g = gamma_rho_vec(rhos, q, q) + gamma_rho_vec(rhos, 1.0 - q, 1.0 - q)
    return (1.0 - g) / (2.0 * (q - q * q) * (1.0 - rhos))


def _beta_vc_vec(q: float, rhos: np.ndarray) -> np.ndarray:
    return (1.0 - gamma_rho_vec(rhos, 1.0 - q, 1.0 - q)) / (q * (1.0 + (1.0 - q) * (1.0 - rhos)))


def minimize_over_rho(
    f: Callable[[float], float],
    q: float,
    tol: float = 1e-8,
    *,
    scan_points: int = 512,
    f_vec: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[float, float]:
    """Minimize a curve function over rho in kappa(q).

    Dense scan (512 points) followed by golden-section refinement of the
    best bracket; hedges against non-unimodality.  The open right
    endpoint rho -> 0- has the analytic limit value 1 and is never a
    minimizer; the left endpoint is evaluated exactly when closed.
    Returns (rho_star, value).
    """
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    iv = kappa(q)
    span = iv.hi_open - iv.lo
    start = iv.lo if iv.lo_closed else iv.lo + span / scan_points
    grid = np.linspace(start, -1e-9, scan_points)
    vals = f_vec(grid) if f_vec is not None else np.array([f(float(r)) for r in grid])
    i = int(np.argmin(vals))

    a = float(grid[max(0, i - 1)])
    b = float(grid[min(scan_points - 1, i + 1)])
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    m = 0.5 * (a + b)
    candidates = [(f(m), m), (float(vals[i]), float(grid[i]))]
    if iv.lo_closed:
        candidates.append((f(iv.lo), iv.lo))
    value, rho_star = min(candidates, key=lambda t: t[0])
    return rho_star, value


def _hardness_point(problem: Problem, q: float) -> tuple[float, float]:
    """(rho_star, value) of the pointwise infimum for one q."""
    if problem == "cut":
        return minimize_over_rho(lambda r: beta_cut(q, r), q,
                                 f_vec=lambda rs: _beta_cut_vec(q, rs))
    return minimize_over_rho(lambda r: beta_vc(q, r), q,
                             f_vec=lambda rs: _beta_vc_vec(q, rs))


def extremal_rho(q: float) -> float:
    """Left endpoint of kappa(q); equals -q/(1-q) for q <= 1/2."""
    _check_q(q)
    return -min(q, 1.0 - q) / (1.0 - min(q, 1.0 - q))


def alpha_cut(q: float) -> float:
    """Cut approximation ratio at cardinality q (symmetric in q, 1-q)."""
    _check_q(q)
    qq = min(q, 1.0 - q)
    rb = -qq / (1.0 - qq)
    return (2.0 * qq - 2.0 * gamma_rho(rb, qq, qq)) / (2.0 * qq)


def alpha_2sat(q: float) -> float:
    """2sat/coverage approximation ratio at cardinality q."""
    _check_q(q)
    qq = min(q, 1.0 - q)
    rb = -qq / (1.0 - qq)
    return (1.0 - gamma_rho(rb, 1.0 - qq, 1.0 - qq)) / (2.0 * qq)


@dataclass(frozen=True)
class Configuration:
    """Per-constraint data (mu1, mu2, rho) inside the triangle polytope."""

    mu1: float
    mu2: float
    rho: float

    def __post_init__(self):
        for name, v in (("mu1", self.mu1), ("mu2", self.mu2), ("rho", self.rho)):
            if not (math.isfinite(v) and -1.0 <= v <= 1.0):
                raise DomainError(f"Configuration.{name} must be in [-1, 1], got {v!r}")
        if triangle_violation(self.mu1, self.mu2, self.rho) > 1e-9:
            raise DomainError(
                f"({self.mu1}, {self.mu2}, {self.rho}) violates the triangle inequalities "
                f"by {triangle_violation(self.mu1, self.mu2, self.rho):.3g}")


def triangle_violation(mu1: float, mu2: float, rho: float) -> float:
    """Largest deficit below -1 among the four triangle forms (0 if none)."""
    worst = min(
        mu1 + mu2 + rho,
        mu1 - mu2 - rho,
        -mu1 + mu2 - rho,
        -mu1 - mu2 + rho,
    )
    return max(0.0, -1.0 - worst)


def rho_bar(mu1: float, mu2: float, rho: float) -> float:
    """Residual correlation of the centered, normalized vector pair."""
    d2 = (1.0 - mu1 * mu1) * (1.0 - mu2 * mu2)
    if d2 <= 0.0:
        raise DomainError("rho_bar undefined at |mu| = 1")
    return float(np.clip((rho - mu1 * mu2) / math.sqrt(d2), -1.0, 1.0))


def _conf_ratio_cut(mu1, mu2, rho):
    """(2 - 4 G((1-mu1)/2, (1-mu2)/2) - mu1 - mu2) / (1 - rho), arrays ok."""
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    rho = np.asarray(rho, dtype=float)
    d2 = (1.0 - mu1 * mu1) * (1.0 - mu2 * mu2)
    safe = d2 > 1e-24
    # at |mu_i| = 1 the marginal level (1 -+ mu_i)/2 hits 0 or 1 and the
    # orthant probability short-circuits, so the rb placeholder is inert
    rb = np.where(safe, np.clip((rho - mu1 * mu2) / np.sqrt(np.where(safe, d2, 1.0)), -1, 1), 0.0)
    g = gamma_rho_vec(rb, (1.0 - mu1) / 2.0, (1.0 - mu2) / 2.0)
    num = 2.0 - 4.0 * g - mu1 - mu2
    den = 1.0 - rho
    return np.where(den < 1e-12, 1.0, num / np.where(den < 1e-12, 1.0, den))


@dataclass(frozen=True)
class FullConfResult:
    configuration: Configuration
    value: float
    near_optima: tuple[tuple[Configuration, float], ...]


def _rho_range(mu1: float, mu2: float) -> tuple[float, float]:
    return -1.0 + abs(mu1 + mu2), 1.0 - abs(mu1 - mu2)


def full_conf_alpha_cut(grid_density: int = 40, refine_tol: float = 1e-9) -> FullConfResult:
    """Global minimum of the cut rounding ratio over the full polytope.

    Multi-start grid scan plus coordinate descent (golden section along
    each coordinate's feasible segment).  Returns the best configuration
    and all distinct local minima found within 1e-4 of it.
    """
    if grid_density < 20:
        raise DomainError(f"grid_density must be >= 20, got {grid_density}")

    mus = np.linspace(-0.98, 0.98, grid_density)
    m1g, m2g = np.meshgrid(mus, mus, indexing="ij")
    lo = -1.0 + np.abs(m1g + m2g)
    hi = 1.0 - np.abs(m1g - m2g)
    ts = np.linspace(0.0, 1.0, grid_density)
    M1 = np.repeat(m1g[..., None], grid_density, axis=-1)
    M2 = np.repeat(m2g[..., None], grid_density, axis=-1)
    R = lo[..., None] + (hi - lo)[..., None] * ts
    vals = _conf_ratio_cut(M1.ravel(), M2.ravel(), R.ravel())

    order = np.argsort(vals)
    starts: list[tuple[float, float, float]] = []
    flat1, flat2, flatr = M1.ravel(), M2.ravel(), R.ravel()
    for idx in order:
        cand = (float(flat1[idx]), float(flat2[idx]), float(flatr[idx]))
        if all(max(abs(cand[0] - s[0]), abs(cand[1] - s[1]), abs(cand[2] - s[2])) > 0.15
               for s in starts):
            starts.append(cand)
        if len(starts) >= 16:
            break

    def scalar(m1: float, m2: float, r: float) -> float:
        return float(_conf_ratio_cut(m1, m2, r))

    def golden_1d(fn: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
        if b - a < 1e-14:
            m = 0.5 * (a + b)
            return m, fn(m)
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = fn(c), fn(d)
        while b - a > 1e-9:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = fn(c)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = fn(d)
        m = 0.5 * (a + b)
        return m, fn(m)

    minima: list[tuple[float, float, float, float]] = []

    # The rho-boundary diagonal (mu, mu, -1 + 2|mu|) is where the global
    # minimum empirically sits; refine along it directly so the
    # coordinate descent result is corroborated by a 1-D line search.
    for sign in (1.0, -1.0):
        mu_d, val_d = golden_1d(lambda t: scalar(sign * t, sign * t, -1.0 + 2.0 * t), 1e-6, 0.999)
        minima.append((val_d, sign * mu_d, sign * mu_d, -1.0 + 2.0 * mu_d))

    for m1, m2, r in starts:
        val = scalar(m1, m2, r)
        for _ in range(200):
            prev = val
            # mu1 given (mu2, rho): feasible [-1 + |mu2 + rho|, 1 - |mu2 - rho|]
            a1 = max(-0.999999, -1.0 + abs(m2 + r))
            b1 = min(0.999999, 1.0 - abs(m2 - r))
            if b1 > a1:
                m1, _ = golden_1d(lambda t: scalar(t, m2, r), a1, b1)
            a2 = max(-0.999999, -1.0 + abs(m1 + r))
            b2 = min(0.999999, 1.0 - abs(m1 - r))
            if b2 > a2:
                m2, _ = golden_1d(lambda t: scalar(m1, t, r), a2, b2)
            ar, br = _rho_range(m1, m2)
            r, val = golden_1d(lambda t: scalar(m1, m2, t), ar, br)
            # the polytope boundary in rho is often the minimizer; keep it reachable
            for edge in (ar, br):
                ev = scalar(m1, m2, edge)
                if ev < val:
                    r, val = edge, ev
            if prev - val < refine_tol:
                break
        minima.append((val, m1, m2, r))

    # the ratio is invariant under (mu1, mu2) -> (-mu1, -mu2); report the
    # nonnegative-sum representative of each minimum
    minima = [(v, m1, m2, r) if m1 + m2 >= 0 else (v, -m1, -m2, r)
              for v, m1, m2, r in minima]
    minima.sort()
    best_val = minima[0][0]
    distinct: list[tuple[float, float, float, float]] = []
    for rec in minima:
        if all(max(abs(rec[1] - d[1]), abs(rec[2] - d[2]), abs(rec[3] - d[3])) > 1e-3
               for d in distinct):
            distinct.append(rec)
    near = tuple(
        (Configuration(m1, m2, np.clip(r, *_rho_range(m1, m2))), v)
        for v, m1, m2, r in distinct
        if v <= best_val + 1e-4
    )
    v0, m1, m2, r0 = minima[0]
    cfg = Configuration(m1, m2, float(np.clip(r0, *_rho_range(m1, m2))))
    return FullConfResult(configuration=cfg, value=v0, near_optima=near)


@dataclass(frozen=True)
class CurvePoint:
    q: float
    ratio: float
    rho_star: float | None
    flattened: bool


def _validate_grid(q_grid: Sequence[float]) -> list[float]:
    qs = [float(q) for q in q_grid]
    if not qs:
        raise DomainError("q_grid must be nonempty")
    for q in qs:
        _check_q(q)
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise DomainError("q_grid must be strictly increasing")
    return qs


def hardness_curve(problem: Problem, q_grid: Sequence[float], flatten: bool = False) -> list[CurvePoint]:
    """Hardness ratio curve, optionally flattened by the padding rules."""
    if problem not in ("cut", "vc", "2sat"):
        raise DomainError(f"unknown problem {problem!r}")
    qs = _validate_grid(q_grid)

    if problem == "2sat":
        return _curve_2sat(qs, flatten)

    raw = [_hardness_point(problem, q) for q in qs]
    if not flatten:
        return [CurvePoint(q, v, r, False) for q, (r, v) in zip(qs, raw)]

    vals = np.array([v for _, v in raw])
    if problem == "vc":
        flat = np.minimum.accumulate(vals[::-1])[::-1]
    else:
        flat = vals.copy()
        left = [i for i, q in enumerate(qs) if q <= 0.5]
        right = [i for i, q in enumerate(qs) if q >= 0.5]
        if left:
            seg = vals[left]
            flat[left] = np.minimum.accumulate(seg[::-1])[::-1]
        if right:
            flat[right] = np.minimum.accumulate(vals[right])
    out = []
    for i, (q, (r, v)) in enumerate(zip(qs, raw)):
        clipped = flat[i] < v - 1e-15
        out.append(CurvePoint(q, float(flat[i]), None if clipped else r, clipped))
    return out


def _curve_2sat(qs: list[float], flatten: bool) -> list[CurvePoint]:
    raw = [_hardness_point("vc", q) for q in qs]
    if not flatten:
        return [CurvePoint(q, v, r, False) for q, (r, v) in zip(qs, raw)]

    # Evaluate the vc curve on the grid joined with its mirror image so
    # min(curve(q), curve(1-q)) uses consistently computed values.
    combined: list[float] = []
    pos: dict[float, int] = {}
    mirror_of: list[float] = []
    for q in qs:
        m = 1.0 - q
        for cand in (q, m):
            match = next((c for c in combined if abs(c - cand) <= 1e-12), None)
            if match is None:
                pos[cand] = len(combined)
                combined.append(cand)
            else:
                pos[cand] = pos[match]
        mirror_of.append(m)
    order = np.argsort(combined)
    sorted_q = [combined[i] for i in order]
    sorted_vals = np.array([_hardness_point("vc", q)[1] for q in sorted_q])
    vcflat_sorted = np.minimum.accumulate(sorted_vals[::-1])[::-1]
    vcflat = np.empty(len(combined))
    vcflat[order] = vcflat_sorted

    out = []
    for q, m, (r, v) in zip(qs, mirror_of, raw):
        s = min(vcflat[pos[q]], vcflat[pos[m]])
        clamped = min(s, UNCONSTRAINED_2SAT_LEVEL)
        clipped = clamped < v - 1e-15
        out.append(CurvePoint(q, float(clamped), None if clipped else r, clipped))
    return out


def approx_curve(problem: Problem, q_grid: Sequence[float], flatten: bool = False) -> list[CurvePoint]:
    """Approximation ratio curve (alpha_cut for cut, alpha_2sat otherwise).

    With flatten=True, emits the constant guarantee min over the grid
    (padding transfers the worst case everywhere), mirroring how the
    algorithm-side lines are usually drawn.
    """
    if problem not in ("cut", "vc", "2sat"):
        raise DomainError(f"unknown problem {problem!r}")
    qs = _validate_grid(q_grid)
    fn = alpha_cut if problem == "cut" else alpha_2sat
    vals = [fn(q) for q in qs]
    rbs = [extremal_rho(q) for q in qs]
    if not flatten:
        return [CurvePoint(q, v, rb, False) for q, v, rb in zip(qs, vals, rbs)]
    floor = min(vals)
    return [
        CurvePoint(q, floor, rb if v == floor else None, v != floor)
        for q, v, rb in zip(qs, vals, rbs)
    ]


def find_local_min_q(
    curve_value: Callable[[float], float], q_lo: float, q_hi: float, tol: float = 1e-6
) -> tuple[float, float]:
    """Golden-section argmin of a curve over a q bracket (assumes unimodal there)."""
    a, b = q_lo, q_hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = curve_value(c), curve_value(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = curve_value(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = curve_value(d)
    m = 0.5 * (a + b)
    return m, curve_value(m)


def hardness_value(problem: Problem, q: float) -> float:
    """Pointwise hardness infimum at one q (no flattening)."""
    if problem == "2sat":
        problem = "vc"
    return _hardness_point(problem, q)[1]
