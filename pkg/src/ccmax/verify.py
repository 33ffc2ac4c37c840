"""Machine-checkable invariant suites behind the `verify` subcommand.

Each suite returns rows (name, measured, bound, ok) where `measured`
must stay at or below `bound`.  Statistical rows use fixed seeds and
4-sigma bands so a correct build passes deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import curves, gadget, rounding
from .gaussian import gamma_rho, std_normal_cdf, std_normal_inv, std_normal_pdf


@dataclass(frozen=True)
class CheckRow:
    suite: str
    name: str
    measured: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound


def suite_gamma(seed: int = 0) -> list[CheckRow]:
    rows = []
    xs = np.arange(0.05, 0.9501, 0.05)
    rhos = np.arange(-0.95, 0.9501, 0.1)

    worst = 0.0
    for rho in rhos:
        for x in xs:
            for y in xs:
                a = gamma_rho(float(rho), float(x), float(y))
                b = gamma_rho(float(rho), float(1 - x), float(1 - y)) - 1 + x + y
                worst = max(worst, abs(a - b))
    rows.append(CheckRow("gamma", "reflection_identity_grid", worst, 1e-9))

    worst = 0.0
    for x in xs[::3]:
        for y in xs[::3]:
            worst = max(worst, abs(gamma_rho(0.0, float(x), float(y)) - x * y))
            worst = max(worst, abs(gamma_rho(1.0, float(x), float(y)) - min(x, y)))
            worst = max(worst, abs(gamma_rho(-1.0, float(x), float(y)) - max(0.0, x + y - 1)))
    rows.append(CheckRow("gamma", "closed_forms_at_unit_rho", worst, 1e-12))

    rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
    worst_lo = 0.0
    worst_sym = 0.0
    for _ in range(500):
        rho = float(rng.uniform(-1, 1))
        x = float(rng.uniform(0, 1))
        y = float(rng.uniform(0, 1))
        v = gamma_rho(rho, x, y)
        worst_lo = max(worst_lo, max(0.0, x + y - 1) - v, v - min(x, y))
        worst_sym = max(worst_sym, abs(v - gamma_rho(rho, y, x)))
    rows.append(CheckRow("gamma", "frechet_bounds_random", worst_lo, 0.0))
    rows.append(CheckRow("gamma", "argument_symmetry_random", worst_sym, 0.0))

    worst = 0.0
    grid = np.linspace(-0.99, 0.99, 67)
    for x, y in ((0.25, 0.7), (0.5, 0.5), (0.9, 0.15)):
        vals = [gamma_rho(float(r), x, y) for r in grid]
        worst = max(worst, max(a - b for a, b in zip(vals, vals[1:])))
    rows.append(CheckRow("gamma", "monotone_in_rho", worst, 1e-13))

    worst_x = 0.0
    worst_p = 0.0
    for x in np.linspace(-5.4, 5.4, 55):
        p = std_normal_cdf(float(x))
        worst_x = max(worst_x, abs(std_normal_inv(p) - x))
        worst_p = max(worst_p, abs(std_normal_cdf(std_normal_inv(p)) - p))
    rows.append(CheckRow("gamma", "quantile_round_trip_x", worst_x, 1e-9))
    rows.append(CheckRow("gamma", "quantile_round_trip_p", worst_p, 1e-10))
    rows.append(CheckRow(
        "gamma", "pdf_at_zero",
        abs(std_normal_pdf(0.0) - 1.0 / math.sqrt(2 * math.pi)), 1e-15))
    return rows


def suite_curves(seed: int = 0) -> list[CheckRow]:
    rows = []
    qs = np.linspace(0.02, 0.48, 200)
    worst_cut = max(abs(curves.alpha_cut(float(q)) - curves.beta_cut(float(q), -q / (1 - q)))
                    for q in qs)
    worst_2sat = max(abs(curves.alpha_2sat(float(q)) - curves.beta_vc(float(q), -q / (1 - q)))
                     for q in qs)
    rows.append(CheckRow("curves", "matching_identity_cut", worst_cut, 1e-10))
    rows.append(CheckRow("curves", "matching_identity_2sat", worst_2sat, 1e-10))

    sample = [0.3, 0.4, 0.45]
    worst = 0.0
    for q in sample:
        a = curves.hardness_value("cut", q)
        b = curves.hardness_value("cut", 1.0 - q)
        worst = max(worst, abs(a - b))
    rows.append(CheckRow("curves", "cut_curve_symmetry", worst, 1e-9))

    grid = list(np.linspace(0.3, 0.7, 21))
    raw = curves.hardness_curve("vc", grid, flatten=False)
    flat = curves.hardness_curve("vc", grid, flatten=True)
    dom = max(f.ratio - r.ratio for r, f in zip(raw, flat))
    mono = max(a.ratio - b.ratio for a, b in zip(flat, flat[1:]))
    rng_ok = max(max(0.0 - p.ratio, p.ratio - 1.0) for p in raw + flat)
    rows.append(CheckRow("curves", "flattened_dominates", dom, 1e-12))
    rows.append(CheckRow("curves", "flattened_vc_monotone", mono, 1e-12))
    rows.append(CheckRow("curves", "ratios_inside_unit_interval", rng_ok, 0.0))

    qm, vm = curves.find_local_min_q(curves.alpha_cut, 0.3, 0.45, tol=1e-7)
    rows.append(CheckRow("curves", "alpha_cut_min_value", abs(vm - 0.858), 1e-3))
    rows.append(CheckRow("curves", "alpha_cut_argmin", abs(qm - 0.365), 3e-3))
    qm2, vm2 = curves.find_local_min_q(curves.alpha_2sat, 0.3, 0.45, tol=1e-7)
    rows.append(CheckRow("curves", "alpha_2sat_min_value", abs(vm2 - 0.929), 1e-3))
    rows.append(CheckRow("curves", "alpha_2sat_argmin", abs(qm2 - 0.365), 3e-3))
    return rows


def suite_graph_invariants(seed: int = 0) -> list[CheckRow]:
    rows = []
    params = [(0.365, -0.365 / 0.635), (0.5, -0.5)]
    shapes = [(3, 3, 3, 2), (4, 2, 4, 2), (2, 4, 3, 2)]
    worst_wv = worst_we = worst_half = worst_eq1 = 0.0
    worst_ws = worst_cut = 0.0
    rng = np.random.Generator(np.random.Philox(key=[seed, 7]))
    for si, (U, V, L, D) in enumerate(shapes):
        ug, hidden = gadget.random_ug(U, V, L, D, seed=seed + si)
        for q, rho in params:
            g = gadget.build_gadget(ug, q, rho)
            worst_wv = max(worst_wv, abs(g.total_vertex_weight() - 1.0))
            worst_we = max(worst_we, abs(g.total_edge_weight() - 1.0))
            worst_half = max(worst_half, float(np.max(np.abs(
                g.vertex_weights - g.incident_weights() / 2.0))))
            for _ in range(100):
                mask = rng.random(g.n_vertices) < rng.uniform(0.2, 0.8)
                lhs = g.coverage_weight(mask)
                rhs = g.subset_weight(mask) + 0.5 * g.cut_weight(mask)
                worst_eq1 = max(worst_eq1, abs(lhs - rhs))
            _, w_s, cut = gadget.completeness_set(ug, hidden, g, q, rho)
            t = (q - q * q) * (1 - rho)
            worst_ws = max(worst_ws, abs(w_s - q))
            worst_cut = max(worst_cut, abs(cut - 2 * t))
    rows.append(CheckRow("graph-invariants", "total_vertex_weight", worst_wv, 1e-12))
    rows.append(CheckRow("graph-invariants", "total_edge_weight", worst_we, 1e-12))
    rows.append(CheckRow("graph-invariants", "half_incidence", worst_half, 1e-12))
    rows.append(CheckRow("graph-invariants", "subset_weight_identity", worst_eq1, 1e-12))
    rows.append(CheckRow("graph-invariants", "completeness_set_weight", worst_ws, 1e-12))
    rows.append(CheckRow("graph-invariants", "completeness_cut_weight", worst_cut, 1e-12))
    return rows


def suite_rounding_stats(seed: int = 0, samples: int = 100_000) -> list[CheckRow]:
    rows = []
    rng = np.random.Generator(np.random.Philox(key=[seed, 3]))
    configs = []
    while len(configs) < 6:
        m1, m2 = rng.uniform(-0.9, 0.9, 2)
        lo = -1 + abs(m1 + m2)
        hi = 1 - abs(m1 - m2)
        if hi <= lo:
            continue
        configs.append((float(m1), float(m2), float(rng.uniform(lo, hi))))

    worst_mu_z = 0.0
    worst_pair_z = 0.0
    for i, (m1, m2, rho) in enumerate(configs):
        s1, s2, s12 = rounding.simulate_pair_products(m1, m2, rho, samples, seed=seed + i)
        for mu, emp in ((m1, s1), (m2, s2)):
            se = math.sqrt((1 - mu * mu) / samples) + 1e-12
            worst_mu_z = max(worst_mu_z, abs(emp - mu) / se)
        e = rounding.expected_pair_product(m1, m2, rho)
        se = math.sqrt(max(1e-12, 1 - e * e) / samples)
        worst_pair_z = max(worst_pair_z, abs(s12 - e) / se)
    rows.append(CheckRow("rounding-stats", "marginal_mean_zscore", worst_mu_z, 4.0))
    rows.append(CheckRow("rounding-stats", "pair_product_zscore", worst_pair_z, 4.0))

    _, alpha = curves.find_local_min_q(curves.alpha_cut, 0.3, 0.45, tol=1e-8)
    worst_ratio_gap = 0.0
    for m1, m2, rho in configs:
        if rho >= 1 - 1e-9:
            continue
        ratio = (1 - rounding.expected_pair_product(m1, m2, rho)) / (1 - rho)
        worst_ratio_gap = max(worst_ratio_gap, alpha - 1e-6 - ratio)
    rows.append(CheckRow("rounding-stats", "per_constraint_ratio_floor", worst_ratio_gap, 0.0))
    return rows


SUITES: dict[str, Callable[[int], list[CheckRow]]] = {
    "gamma": suite_gamma,
    "curves": suite_curves,
    "graph-invariants": suite_graph_invariants,
    "rounding-stats": suite_rounding_stats,
}


def run_suite(name: str, seed: int = 0) -> list[CheckRow]:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed)
