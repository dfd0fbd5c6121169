"""Radar SNR factor and offloading link budget."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tomoswarm import (
    Formation,
    MissionTimeline,
    allocate_min_power,
    comm_constraints_hold,
    comm_throughput,
    default_reference_config,
    min_offload_power,
    radar_alpha,
    radar_snr_pair,
    radar_snr_table,
)
from tomoswarm.link_budget import BOLTZMANN, write_power_csv, write_snr_csv


def test_boltzmann_is_si_exact():
    assert BOLTZMANN == 1.380649e-23


def test_radar_alpha_reference_value():
    # reference parameter set, 0.2 m^2 cell: alpha = 6.96e4
    cfg = default_reference_config()
    alpha = radar_alpha(cfg, 0.2)
    assert alpha == pytest.approx(6.96e4, rel=1e-3)
    assert alpha == pytest.approx(69582.23, rel=1e-6)


def test_radar_snr_pair_reference_value():
    # both platforms at rho = 28.2843: alpha / rho^4 = 0.109
    cfg = default_reference_config()
    alpha = radar_alpha(cfg, 0.2)
    rho = math.sqrt(800.0)
    snr = radar_snr_pair(alpha, rho, rho)
    assert snr == pytest.approx(alpha / 800.0 ** 2, rel=1e-12)
    assert snr == pytest.approx(0.109, abs=5e-4)
    assert 10.0 * math.log10(snr) == pytest.approx(-9.6, abs=0.05)


def test_radar_alpha_scales_linearly_with_cell_area():
    cfg = default_reference_config()
    assert radar_alpha(cfg, 0.4) == pytest.approx(2.0 * radar_alpha(cfg, 0.2))


def test_radar_snr_table_matches_pairs():
    cfg = default_reference_config()
    f = Formation(np.array([[0.0, 20.0], [5.0, 30.0], [-10.0, 40.0]]))
    table = radar_snr_table(f, cfg, 0.2)
    assert table.values.shape == (3, 3)
    rho = np.hypot(f.x - cfg.target_x, f.z)
    for i in range(3):
        for j in range(3):
            assert table.values[i, j] == pytest.approx(
                radar_snr_pair(table.alpha, rho[i], rho[j]), rel=1e-12)
    # symmetric in (i, j) because only ranges enter
    assert np.allclose(table.values, table.values.T)


def test_comm_throughput_reference_value():
    # 1 GHz channel, beta 100, d = 100 m, P = 3 W: 1e9 * log2(1.03)
    rate = comm_throughput(3.0, 100.0, 100.0, 1e9)
    assert float(rate) == pytest.approx(1e9 * math.log2(1.03), rel=1e-12)
    assert float(rate) == pytest.approx(4.265e7, rel=1e-3)


def test_min_offload_power_reference_value():
    # d = 100 m, R_min = 6 Mb/s on 1 GHz: 0.41675 W
    eta = min_offload_power(100.0, 100.0, 1e9, 6e6)
    assert float(eta) == pytest.approx(0.41675432, rel=1e-6)


@settings(max_examples=200)
@given(
    st.floats(min_value=10.0, max_value=2000.0),
    st.floats(min_value=1.0, max_value=1e4),
    st.floats(min_value=1e6, max_value=1e10),
    st.floats(min_value=1e3, max_value=5e7),
)
def test_min_power_is_exact_inverse(d, beta, bandwidth, rate_min):
    eta = float(min_offload_power(d, beta, bandwidth, rate_min))
    back = float(comm_throughput(eta, beta, d, bandwidth))
    assert back == pytest.approx(rate_min, rel=1e-9)


@settings(max_examples=100)
@given(
    st.floats(min_value=10.0, max_value=2000.0),
    st.floats(min_value=1.0, max_value=1e4),
    st.floats(min_value=1e6, max_value=1e10),
    st.floats(min_value=1e3, max_value=5e7),
    st.floats(min_value=1e-6, max_value=0.5),
)
def test_min_power_is_minimal(d, beta, bandwidth, rate_min, shave):
    # any strictly smaller power misses the rate floor
    eta = float(min_offload_power(d, beta, bandwidth, rate_min))
    less = eta * (1.0 - shave)
    assert float(comm_throughput(less, beta, d, bandwidth)) < rate_min


def test_throughput_monotone_in_power_and_distance():
    r1 = float(comm_throughput(1.0, 100.0, 300.0, 1e9))
    r2 = float(comm_throughput(2.0, 100.0, 300.0, 1e9))
    r3 = float(comm_throughput(1.0, 100.0, 600.0, 1e9))
    assert r2 > r1 > r3
    assert float(comm_throughput(0.0, 100.0, 300.0, 1e9)) == 0.0


def _small_cfg_formation():
    cfg = default_reference_config()
    f = Formation(np.array([
        [-35.0, 56.0], [-25.0, 51.0], [-35.2, 48.8],
        [-40.0, 59.5], [-48.7, 74.6], [-49.4, 64.2],
    ]))
    return cfg, f


def test_allocate_min_power_shapes_and_rates():
    cfg, f = _small_cfg_formation()
    tl = MissionTimeline.from_config(cfg)
    alloc = allocate_min_power(f, tl, cfg)
    assert alloc.eta.shape == (6, 200)
    assert alloc.energy.shape == (6,)
    assert np.all(alloc.eta > 0)
    assert alloc.energy == pytest.approx(alloc.eta.sum(axis=1) * cfg.slot_duration)
    # every slot rate equals the floor by construction
    from tomoswarm import gs_distance
    d = gs_distance(f.positions, tl.y, cfg.gs_position)
    rates = comm_throughput(alloc.eta, np.asarray(cfg.comm.beta)[:, None], d,
                            np.asarray(cfg.comm.bandwidth)[:, None])
    assert np.max(np.abs(rates / cfg.comm.rate_min - 1.0)) < 1e-9


def test_allocation_feasibility_matches_direct_check():
    cfg, f = _small_cfg_formation()
    tl = MissionTimeline.from_config(cfg)
    alloc = allocate_min_power(f, tl, cfg)
    assert alloc.feasible == comm_constraints_hold(alloc.eta, f, tl, cfg)
    assert alloc.feasible
    assert alloc.c11_violation == 0.0 and alloc.c12_violation == 0.0


def test_allocation_violations_raise_with_rate_floor():
    # tighter rate floor inflates the energy; violation fields must agree
    import dataclasses
    cfg, f = _small_cfg_formation()
    cfg = dataclasses.replace(
        cfg, comm=dataclasses.replace(cfg.comm, rate_min=4e7, max_energy=570.0))
    tl = MissionTimeline.from_config(cfg)
    alloc = allocate_min_power(f, tl, cfg)
    assert not alloc.feasible
    assert alloc.c12_violation > 0.0
    assert alloc.c12_violation == pytest.approx(
        float(np.maximum(alloc.energy - 570.0, 0.0).sum()), rel=1e-12)
    assert not comm_constraints_hold(alloc.eta, f, tl, cfg)


def test_direct_check_rejects_out_of_range_powers():
    cfg, f = _small_cfg_formation()
    tl = MissionTimeline.from_config(cfg)
    alloc = allocate_min_power(f, tl, cfg)
    bad = alloc.eta.copy()
    bad[0, 0] = -1e-9
    assert not comm_constraints_hold(bad, f, tl, cfg)
    bad = alloc.eta.copy()
    bad[0, 0] = cfg.comm.max_power * 1.001
    assert not comm_constraints_hold(bad, f, tl, cfg)
    # shaving one slot below the floor flips the verdict
    bad = alloc.eta.copy()
    bad[2, 7] *= 0.99
    assert not comm_constraints_hold(bad, f, tl, cfg)


def test_write_power_csv(tmp_path):
    eta = np.array([[1.0, 2.0], [3.0, 4.0]])
    path = tmp_path / "power.csv"
    write_power_csv(eta, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "uav,slot,eta_watts"
    assert len(lines) == 5
    assert lines[1].startswith("0,0,1.0")
    assert lines[4].startswith("1,1,4.0")


def test_write_snr_csv_lower_triangle_only(tmp_path):
    cfg = default_reference_config()
    f = Formation(np.array([[0.0, 20.0], [5.0, 30.0], [-10.0, 40.0]]))
    table = radar_snr_table(f, cfg, 0.2)
    path = tmp_path / "snr.csv"
    write_snr_csv(table, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "tx,rx,snr_db"
    pairs = [tuple(map(int, ln.split(",")[:2])) for ln in lines[1:]]
    assert pairs == [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]
    snr00 = float(lines[1].split(",")[2])
    assert snr00 == pytest.approx(10.0 * math.log10(table.values[0, 0]), abs=1e-4)
