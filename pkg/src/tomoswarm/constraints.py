"""Constraint violations and penalty fitness.

Every constraint is reported as a hinge violation (zero when satisfied,
positive magnitude otherwise) so optimizers can rank infeasible
candidates. The reduced problem scores a formation with the closed-form
minimum-power allocation (g11, g12); the joint problem scores explicit
per-slot powers against the original offloading constraints (g8-g10).
A feasible candidate always beats an infeasible one when fitness is
formed with psl_max at least the population's worst sidelobe level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (Formation, MissionTimeline, gs_distance, look_angle,
                       pairwise_baselines, slant_range, swath_width)
from .link_budget import (RATE_GUARD, PowerAllocation, comm_throughput,
                          radar_alpha)
from .psf import TomoMetrics
from .scenario import ScenarioConfig

REDUCED_UNITS = {
    "g1": "psf linear",
    "g2": "m",
    "g4": "rad",
    "g5": "m",
    "g6": "m",
    "g7": "snr linear",
    "g11": "W",
    "g12": "J",
}

JOINT_UNITS = {
    "g1": "psf linear",
    "g2": "m",
    "g4": "rad",
    "g5": "m",
    "g6": "m",
    "g7": "snr linear",
    "g8": "W",
    "g9": "bit/s",
    "g10": "J",
}


@dataclass(frozen=True)
class ConstraintReport:
    g: dict
    feasible: bool
    units: dict


def total_violation(report: ConstraintReport) -> float:
    return float(sum(report.g.values()))


def fitness(report: ConstraintReport, candidate_psl: float, psl_max: float) -> float:
    """Sidelobe level if feasible, else psl_max plus the total violation.

    psl_max is the worst sidelobe level across the current population, so
    every infeasible candidate ranks behind every feasible one.
    """
    if report.feasible:
        return float(candidate_psl)
    return float(psl_max) + total_violation(report)


def _hinge(x):
    return np.maximum(x, 0.0)


def _resolved_or_edge(value, found, h_max):
    # No null pair inside the window reads as resolution at the window edge.
    return value if found else h_max


def resolution_cell_area(metrics: TomoMetrics, cfg: ScenarioConfig) -> float:
    """Cell area from measured resolutions, falling back to the required
    maxima for any axis without a null pair."""
    dn_max, dr_max = cfg.max_resolutions
    return ((metrics.delta_n if metrics.found_n else dn_max)
            * (metrics.delta_r if metrics.found_r else dr_max))


def _geometry_terms(formation: Formation, metrics: TomoMetrics,
                    cfg: ScenarioConfig) -> dict:
    g = {}
    g["g1"] = float(max(0.0, (1.0 - cfg.epsilon) - metrics.mainlobe_peak))
    dn_max, dr_max = cfg.max_resolutions
    dn = _resolved_or_edge(metrics.delta_n, metrics.found_n, cfg.h_max)
    g2 = max(0.0, dn - dn_max)
    if cfg.numerics.enforce_slant_resolution:
        dr = _resolved_or_edge(metrics.delta_r, metrics.found_r, cfg.h_max)
        g2 += max(0.0, dr - dr_max)
    g["g2"] = float(g2)
    theta = look_angle(formation.positions, cfg.target_x)
    th_min, th_max = cfg.look_angle_bounds
    g["g4"] = float(_hinge(th_min - theta).sum() + _hinge(theta - th_max).sum())
    g["g5"] = float(_hinge(cfg.min_separation - pairwise_baselines(formation)).sum())
    g["g6"] = float(_hinge(cfg.min_swath - swath_width(formation.positions, cfg)).sum())
    alpha = radar_alpha(cfg, resolution_cell_area(metrics, cfg))
    rho = slant_range(formation.positions, cfg.target_x)
    snr = alpha / (rho[:, None] ** 2 * rho[None, :] ** 2)
    il = np.tril_indices(formation.num_uavs)
    g["g7"] = float(_hinge(cfg.radar.snr_min - snr[il]).sum())
    return g


def evaluate_constraints(formation: Formation, metrics: TomoMetrics,
                         allocation: PowerAllocation,
                         cfg: ScenarioConfig) -> ConstraintReport:
    """Reduced-problem report: geometry terms plus the power cap (g11) and
    energy budget (g12) of the minimum-power allocation."""
    g = _geometry_terms(formation, metrics, cfg)
    g["g11"] = float(allocation.c11_violation)
    if cfg.comm.g12_per_slot:
        cap = cfg.comm.max_energy / cfg.slot_duration
        g["g12"] = float(np.maximum(allocation.eta - cap, 0.0).sum())
        units = dict(REDUCED_UNITS, g12="W")
    else:
        g["g12"] = float(np.maximum(allocation.energy - cfg.comm.max_energy, 0.0).sum())
        units = REDUCED_UNITS
    feasible = all(v == 0.0 for v in g.values())
    return ConstraintReport(g=g, feasible=feasible, units=units)


def evaluate_joint_constraints(formation: Formation, metrics: TomoMetrics,
                               powers: np.ndarray, timeline: MissionTimeline,
                               cfg: ScenarioConfig) -> ConstraintReport:
    """Joint-problem report: geometry terms plus explicit power bounds (g8),
    rate floor (g9), and energy budget (g10)."""
    g = _geometry_terms(formation, metrics, cfg)
    powers = np.asarray(powers, dtype=float)
    p_max = cfg.comm.max_power
    g["g8"] = float(_hinge(powers - p_max).sum() + _hinge(-powers).sum())
    d = gs_distance(formation.positions, timeline.y, cfg.gs_position)
    bw = np.asarray(cfg.comm.bandwidth)[:, None]
    beta = np.asarray(cfg.comm.beta)[:, None]
    rates = comm_throughput(powers, beta, d, bw)
    floor = cfg.comm.rate_min * (1.0 - RATE_GUARD)
    g["g9"] = float(_hinge(floor - rates).sum())
    energy = timeline.slot_duration * powers.sum(axis=1)
    g["g10"] = float(_hinge(energy - cfg.comm.max_energy).sum())
    feasible = all(v == 0.0 for v in g.values())
    return ConstraintReport(g=g, feasible=feasible, units=JOINT_UNITS)


def write_constraints_csv(report: ConstraintReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("constraint,violation,units\n")
        for name in sorted(report.g, key=lambda s: (len(s), s)):
            fh.write(f"{name},{report.g[name]:.12e},{report.units[name]}\n")
