"""PSF sampling, null finding, sidelobe levels.

The reference implementation here is the bistatic double sum over all
transmit/receive pairs, evaluated with complex exponentials and explicit
loops. The package computes the same quantity as a squared single sum;
the two routes must agree pointwise.
"""
import cmath
import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tomoswarm import (
    Formation,
    GridTooCoarseError,
    InvalidMainlobeError,
    LocalAxes,
    Numerics,
    PsfCurve,
    default_grid_step,
    default_reference_config,
    estimate_resolution,
    evaluate_psf,
    peak_sidelobe_level,
    slant_range,
    to_db,
    tomo_metrics,
)
from tomoswarm.psf import axis_points, write_psf_csv

# formation measured feasible for the reference scenario; handy fixed input
FEASIBLE_POSITIONS = np.array([
    [-35.30, 56.46],
    [-24.69, 51.03],
    [-35.20, 48.75],
    [-40.19, 59.56],
    [-48.71, 74.57],
    [-49.41, 64.21],
])


def mimo_double_sum(formation, cfg, px, pz):
    """All (tx, rx) pair phasors, summed explicitly; |.| / I^2."""
    pos = formation.positions
    lam = cfg.radar.wavelength
    n = pos.shape[0]
    if cfg.numerics.phase_compensation:
        rho = [math.hypot(pos[i, 0] - cfg.target_x, pos[i, 1]) for i in range(n)]
    else:
        rho = [0.0] * n
    out = np.empty(len(px))
    for k in range(len(px)):
        phi = [
            math.hypot(pos[i, 0] - px[k], pos[i, 1] - pz[k]) - rho[i]
            for i in range(n)
        ]
        acc = 0j
        for i in range(n):
            for l in range(n):
                acc += cmath.exp(2j * math.pi * (phi[i] + phi[l]) / lam)
        out[k] = abs(acc) / (n * n)
    return out


def random_formation(rng, cfg, n=6):
    z_min, z_max = cfg.altitude_bounds
    th_min, th_max = cfg.look_angle_bounds
    x_lo = cfg.target_x - z_max * math.tan(th_max)
    x_hi = cfg.target_x - z_min * math.tan(th_min)
    x = rng.uniform(x_lo, x_hi, n)
    z = rng.uniform(z_min, z_max, n)
    return Formation(np.column_stack([x, z]))


def test_single_sum_matches_double_sum_oracle():
    cfg = default_reference_config()
    rng = np.random.default_rng(7)
    for _ in range(5):
        f = random_formation(rng, cfg)
        curve = evaluate_psf(f, cfg, "elevation", window=2.0, step=0.015)
        axes = LocalAxes.for_formation(f, cfg.target_x)
        px, pz = axis_points(curve.grid, axes, "elevation")
        oracle = mimo_double_sum(f, cfg, px, pz)
        assert np.max(np.abs(curve.values - oracle)) < 1e-12


def test_double_sum_oracle_raw_mode():
    cfg = default_reference_config()
    cfg_raw = type(cfg)(**{**cfg.__dict__, "numerics": Numerics(phase_compensation=False)})
    rng = np.random.default_rng(11)
    f = random_formation(rng, cfg_raw)
    curve = evaluate_psf(f, cfg_raw, "elevation", window=2.0, step=0.015)
    axes = LocalAxes.for_formation(f, cfg_raw.target_x)
    px, pz = axis_points(curve.grid, axes, "elevation")
    oracle = mimo_double_sum(f, cfg_raw, px, pz)
    assert np.max(np.abs(curve.values - oracle)) < 1e-12


def test_two_platform_raw_psf_is_cosine_squared():
    # |e^{j a} + e^{j b}|^2 / 4 = cos^2(pi (r1 - r2) / lambda)
    cfg = default_reference_config()
    cfg_raw = type(cfg)(**{**cfg.__dict__, "numerics": Numerics(phase_compensation=False)})
    f = Formation(np.array([[0.0, 20.0], [4.0, 23.0]]))
    curve = evaluate_psf(f, cfg_raw, "elevation", step=0.01)
    axes = LocalAxes.for_formation(f, cfg_raw.target_x)
    px, pz = axis_points(curve.grid, axes, "elevation")
    lam = cfg_raw.radar.wavelength
    r1 = np.hypot(f.positions[0, 0] - px, f.positions[0, 1] - pz)
    r2 = np.hypot(f.positions[1, 0] - px, f.positions[1, 1] - pz)
    law = np.cos(math.pi * (r1 - r2) / lam) ** 2
    assert np.max(np.abs(curve.values - law)) < 1e-12


def test_compensated_center_is_exactly_one():
    cfg = default_reference_config()
    f = Formation(FEASIBLE_POSITIONS)
    curve = evaluate_psf(f, cfg)
    assert curve.values[curve.half_count] == 1.0
    assert curve.grid[curve.half_count] == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_psf_normalized_to_unit_interval(seed):
    cfg = default_reference_config()
    rng = np.random.default_rng(seed)
    f = random_formation(rng, cfg, n=int(rng.integers(2, 7)))
    curve = evaluate_psf(f, cfg, step=0.015, window=2.0)
    assert np.all(curve.values >= 0.0)
    assert np.all(curve.values <= 1.0 + 1e-12)


def test_iso_range_pair_matches_analytic_resolution():
    # second platform placed on the iso-range circle of the first, offset
    # b along the elevation axis: first null at lambda * rho / (2 b)
    cfg = default_reference_config()
    lam = cfg.radar.wavelength
    p1 = np.array([0.0, 20.0])
    rho1 = float(slant_range(p1, cfg.target_x))
    target = np.array([cfg.target_x, 0.0])
    u = (p1 - target) / rho1
    axes = LocalAxes.for_formation(Formation(np.array([p1, p1 + [1, 1]])), cfg.target_x)
    n_hat = axes.elevation_unit
    for b in (5.0, 10.0, 20.0):
        q2 = target + math.sqrt(rho1 ** 2 - b ** 2) * u + b * n_hat
        f = Formation(np.array([p1, q2]))
        curve = evaluate_psf(f, cfg)
        res = estimate_resolution(curve, cfg.numerics.null_threshold)
        theory = lam * rho1 / (2.0 * b)
        assert res.found
        assert res.delta == pytest.approx(theory, rel=0.02)
        # nulls sit symmetrically around the peak
        assert res.null_positive == pytest.approx(-res.null_negative, rel=0.05)


def test_resolution_not_found_for_tiny_baseline():
    # b = 0.3 m puts the first null at ~5.7 m, outside the 5 m window
    cfg = default_reference_config()
    p1 = np.array([0.0, 20.0])
    f = Formation(np.array([p1, p1 + 0.3 * np.array([math.cos(math.pi / 4),
                                                     math.sin(math.pi / 4)])]))
    curve = evaluate_psf(f, cfg)
    res = estimate_resolution(curve, cfg.numerics.null_threshold)
    assert not res.found
    assert res.delta is None
    assert res.null_negative is None and res.null_positive is None


def test_null_scan_synthetic_exact_zeros():
    v = np.array([1.0, 0.5, 0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0])
    curve = PsfCurve(axis="elevation", step=1.0, half_count=4, values=v,
                     wavelength=0.12, phase_compensation=True)
    res = estimate_resolution(curve, 1e-3)
    assert res.found
    assert res.null_negative == pytest.approx(-2.0)
    assert res.null_positive == pytest.approx(2.0)
    assert res.delta == pytest.approx(2.0)


def test_null_scan_requires_both_sides():
    # null only on the positive side
    v = np.array([0.8, 0.5, 0.2, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0])
    curve = PsfCurve(axis="elevation", step=1.0, half_count=4, values=v,
                     wavelength=0.12, phase_compensation=True)
    res = estimate_resolution(curve, 1e-3)
    assert not res.found and res.delta is None


def test_peak_sidelobe_level_synthetic():
    v = np.array([0.3, 0.1, 0.0, 0.5, 1.0, 0.5, 0.0, 0.2, 0.4])
    curve = PsfCurve(axis="elevation", step=0.5, half_count=4, values=v,
                     wavelength=0.12, phase_compensation=True)
    # mainlobe [-1, 1] closed: only |s| > 1 counts
    assert peak_sidelobe_level(curve, 1.0) == pytest.approx(0.4)
    # zero width: everything but the center sample
    assert peak_sidelobe_level(curve, 0.0) == pytest.approx(0.5)


def test_peak_sidelobe_level_errors():
    v = np.linspace(1.0, 0.0, 9)
    curve = PsfCurve(axis="elevation", step=0.5, half_count=4, values=v,
                     wavelength=0.12, phase_compensation=True)
    with pytest.raises(InvalidMainlobeError):
        peak_sidelobe_level(curve, 4 * 0.5)
    with pytest.raises(InvalidMainlobeError):
        peak_sidelobe_level(curve, -0.1)


def test_grid_construction():
    cfg = default_reference_config()
    f = Formation(FEASIBLE_POSITIONS)
    curve = evaluate_psf(f, cfg, window=3.0, step=0.007)
    assert curve.values.size == 2 * curve.half_count + 1
    assert curve.extent == pytest.approx(3.0)
    assert curve.step <= 0.007 + 1e-15
    g = curve.grid
    assert g[0] == pytest.approx(-3.0) and g[-1] == pytest.approx(3.0)
    assert g[curve.half_count] == 0.0


def test_grid_step_from_config():
    cfg = default_reference_config()
    cfg = type(cfg)(**{**cfg.__dict__, "numerics": Numerics(psf_grid_step=0.01)})
    f = Formation(FEASIBLE_POSITIONS)
    curve = evaluate_psf(f, cfg)
    assert curve.step == pytest.approx(cfg.h_max / math.ceil(cfg.h_max / 0.01))


def test_grid_too_coarse():
    cfg = default_reference_config()
    f = Formation(FEASIBLE_POSITIONS)
    with pytest.raises(GridTooCoarseError):
        evaluate_psf(f, cfg, step=0.02)   # wavelength/8 = 0.015
    cfg_bad = type(cfg)(**{**cfg.__dict__, "numerics": Numerics(psf_grid_step=0.02)})
    with pytest.raises(GridTooCoarseError):
        evaluate_psf(f, cfg_bad)


def test_default_grid_step_rule():
    cfg = default_reference_config()
    lam = cfg.radar.wavelength
    # widely spread formation: baseline term wins
    f = Formation(FEASIBLE_POSITIONS)
    from tomoswarm import pairwise_baselines
    b_max = float(pairwise_baselines(f).max())
    rho1 = float(slant_range(f.positions[0], cfg.target_x))
    assert default_grid_step(f, cfg) == pytest.approx(
        min(lam / 8.0, lam * rho1 / (16.0 * b_max)))
    # nearly coincident platforms: capped at lambda/8
    g = Formation(np.array([[0.0, 20.0], [0.0, 20.0 + 1e-13]]))
    assert default_grid_step(g, cfg) == pytest.approx(lam / 8.0)


def test_axis_points_slant_and_invalid():
    f = Formation(np.array([[0.0, 20.0], [3.0, 25.0]]))
    axes = LocalAxes.for_formation(f, 20.0)
    grid = np.array([-1.0, 0.0, 2.0])
    px, pz = axis_points(grid, axes, "slant")
    assert px[1] == pytest.approx(20.0) and pz[1] == pytest.approx(0.0)
    # slant axis points below ground
    assert pz[2] < 0
    with pytest.raises(ValueError, match="axis"):
        axis_points(grid, axes, "range")


def test_to_db_conventions():
    assert to_db(0.1) == pytest.approx(-20.0)
    assert to_db(0.1, "power") == pytest.approx(-10.0)
    assert np.isfinite(to_db(0.0))


def test_tomo_metrics_consistency():
    cfg = default_reference_config()
    f = Formation(FEASIBLE_POSITIONS)
    m = tomo_metrics(f, cfg)
    assert m.found_n
    assert 0.0 < m.delta_n < 1.0
    assert m.mainlobe_peak == 1.0
    assert m.psl_db == pytest.approx(20.0 * math.log10(m.psl_linear))
    curve = evaluate_psf(f, cfg)
    assert m.psl_linear == pytest.approx(
        peak_sidelobe_level(curve, m.delta_n), rel=1e-12)


def test_psl_grid_refinement_stable():
    cfg = default_reference_config()
    f = Formation(FEASIBLE_POSITIONS)
    m = tomo_metrics(f, cfg)
    fine = type(cfg)(**{**cfg.__dict__, "numerics": Numerics(
        psf_grid_step=default_grid_step(f, cfg) / 2.0)})
    m2 = tomo_metrics(f, fine)
    assert abs(m.psl_db - m2.psl_db) < 0.1


def test_write_psf_csv(tmp_path):
    cfg = default_reference_config()
    f = Formation(FEASIBLE_POSITIONS)
    curve = evaluate_psf(f, cfg, window=1.0)
    path = tmp_path / "psf.csv"
    write_psf_csv(curve, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["s_meters", "psf_linear", "psf_db"]
    assert len(rows) == curve.values.size + 1
    center = rows[1 + curve.half_count]
    assert float(center[0]) == 0.0
    assert float(center[1]) == pytest.approx(1.0, abs=1e-12)
    assert float(center[2]) == pytest.approx(0.0, abs=1e-4)
