"""Radar SNR model and data-offloading link budget.

Radar: the pairwise SNR of the echo transmitted by platform i and
received by platform j is alpha / (rho_i^2 rho_j^2), where alpha bundles
every range-independent factor of the bistatic radar equation.

Offloading: each platform sends its slot data to the ground station over
its own FDMA channel; Shannon throughput B log2(1 + P beta / d^2). The
minimum power meeting the rate floor is closed form, which reduces the
joint formation-and-power problem to formation only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Formation, MissionTimeline, gs_distance, slant_range
from .scenario import ScenarioConfig

BOLTZMANN = 1.380649e-23

# Relative slack when checking rates against the floor: the closed-form
# minimum power reproduces the floor only to round-off.
RATE_GUARD = 1e-9


@dataclass(frozen=True)
class RadarSnrTable:
    """Pairwise linear SNR, shape (I, I); entry (i, j) is tx i, rx j."""
    values: np.ndarray
    alpha: float


@dataclass(frozen=True)
class PowerAllocation:
    """Per-slot transmit powers (I, K) and per-platform energies (I,).

    feasible reports the power cap and energy budget checks only; rate
    feasibility is built into the closed form.
    """
    eta: np.ndarray
    energy: np.ndarray
    feasible: bool
    c11_violation: float
    c12_violation: float


def radar_alpha(cfg: ScenarioConfig, a_res: float) -> float:
    """Range-independent SNR factor for a resolution cell of area a_res."""
    r = cfg.radar
    num = r.sigma0 * a_res * r.transmit_power * r.gain_tx * r.gain_rx * r.wavelength ** 2
    den = ((4.0 * math.pi) ** 3 * BOLTZMANN * r.system_temperature
           * r.noise_bandwidth * r.noise_figure * r.loss)
    return num / den


def radar_snr_pair(alpha: float, rho_i: float, rho_j: float) -> float:
    return alpha / (rho_i ** 2 * rho_j ** 2)


def radar_snr_table(formation: Formation, cfg: ScenarioConfig,
                    a_res: float) -> RadarSnrTable:
    alpha = radar_alpha(cfg, a_res)
    rho = slant_range(formation.positions, cfg.target_x)
    values = alpha / (rho[:, None] ** 2 * rho[None, :] ** 2)
    return RadarSnrTable(values=values, alpha=alpha)


def comm_throughput(power, beta, distance, bandwidth):
    """Shannon rate(s) in bit/s; arguments broadcast elementwise.

    log1p keeps the rate accurate when P beta / d^2 is tiny.
    """
    power = np.asarray(power, dtype=float)
    d2 = np.asarray(distance, dtype=float) ** 2
    return bandwidth * np.log1p(power * beta / d2) / math.log(2.0)


def min_offload_power(distance, beta, bandwidth, rate_min):
    """Smallest power whose throughput reaches rate_min at this distance."""
    d2 = np.asarray(distance, dtype=float) ** 2
    return d2 / beta * np.expm1(np.asarray(rate_min, dtype=float)
                                / bandwidth * math.log(2.0))


def allocate_min_power(formation: Formation, timeline: MissionTimeline,
                       cfg: ScenarioConfig) -> PowerAllocation:
    """Closed-form minimum-power allocation meeting the rate floor everywhere.

    eta[i, k] depends only on the slot-k distance to the ground station;
    it may exceed the power cap or the energy budget, which the violation
    fields report.
    """
    d = gs_distance(formation.positions, timeline.y, cfg.gs_position)
    bw = np.asarray(cfg.comm.bandwidth)[:, None]
    beta = np.asarray(cfg.comm.beta)[:, None]
    eta = min_offload_power(d, beta, bw, cfg.comm.rate_min)
    energy = timeline.slot_duration * eta.sum(axis=1)
    p_max = cfg.comm.max_power
    e_max = cfg.comm.max_energy
    c11 = float(np.maximum(eta - p_max, 0.0).sum())
    c12 = float(np.maximum(energy - e_max, 0.0).sum())
    feasible = bool(np.all(eta <= p_max) and np.all(energy <= e_max))
    return PowerAllocation(eta=eta, energy=energy, feasible=feasible,
                           c11_violation=c11, c12_violation=c12)


def comm_constraints_hold(powers, formation: Formation, timeline: MissionTimeline,
                          cfg: ScenarioConfig) -> bool:
    """Direct check of the original offloading constraints for given powers:
    power within [0, max_power], rate floor met in every slot (with the
    round-off guard), and per-platform energy within budget.
    """
    powers = np.asarray(powers, dtype=float)
    d = gs_distance(formation.positions, timeline.y, cfg.gs_position)
    bw = np.asarray(cfg.comm.bandwidth)[:, None]
    beta = np.asarray(cfg.comm.beta)[:, None]
    rates = comm_throughput(powers, beta, d, bw)
    energy = timeline.slot_duration * powers.sum(axis=1)
    ok_power = bool(np.all(powers >= 0.0) and np.all(powers <= cfg.comm.max_power))
    ok_rate = bool(np.all(rates >= cfg.comm.rate_min * (1.0 - RATE_GUARD)))
    ok_energy = bool(np.all(energy <= cfg.comm.max_energy))
    return ok_power and ok_rate and ok_energy


def write_power_csv(eta, path) -> None:
    eta = np.asarray(eta, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("uav,slot,eta_watts\n")
        for i in range(eta.shape[0]):
            for k in range(eta.shape[1]):
                fh.write(f"{i},{k},{eta[i, k]:.12e}\n")


def write_snr_csv(table: RadarSnrTable, path) -> None:
    """Write the constrained pair set (i >= j) with dB values."""
    v = table.values
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("tx,rx,snr_db\n")
        for i in range(v.shape[0]):
            for j in range(i + 1):
                fh.write(f"{i},{j},{10.0 * math.log10(v[i, j]):.4f}\n")
