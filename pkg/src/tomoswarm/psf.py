"""Tomographic point spread function and resolution metrics.

The PSF along a scene axis is the normalized squared magnitude of the
coherent sum of per-platform phasors,

    psf(s) = |sum_i exp(j * 2*pi * phi_i(s) / lambda)|^2 / I^2,

with phi_i the range from platform i to the axis point, optionally
referenced to that platform's own target range (phase compensation, the
default; the mainlobe peak is then exactly 1). Resolution is measured as
the half distance between the first nulls either side of the origin,
located by parabolic interpolation through sample triples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Formation, LocalAxes, pairwise_baselines, slant_range
from .scenario import ScenarioConfig


class GridTooCoarseError(ValueError):
    """Requested sample step is too coarse for the wavelength."""


class InvalidMainlobeError(ValueError):
    """Mainlobe half width covers the whole evaluation window."""


@dataclass(frozen=True)
class PsfCurve:
    """Sampled PSF on a symmetric grid with an exact center sample.

    Grid points are (k - half_count) * step for k in range(2*half_count+1),
    so index half_count is exactly s = 0.
    """
    axis: str
    step: float
    half_count: int
    values: np.ndarray
    wavelength: float
    phase_compensation: bool

    @property
    def grid(self) -> np.ndarray:
        return (np.arange(self.values.size) - self.half_count) * self.step

    @property
    def extent(self) -> float:
        return self.half_count * self.step


@dataclass(frozen=True)
class Resolution:
    """First-null pair around the origin. found=False means no such pair."""
    found: bool
    delta: float | None
    null_negative: float | None
    null_positive: float | None


@dataclass(frozen=True)
class TomoMetrics:
    delta_n: float | None
    delta_r: float | None
    found_n: bool
    found_r: bool
    psl_linear: float
    psl_db: float
    mainlobe_peak: float


def to_db(x, reference: str = "amplitude"):
    """dB of a linear PSF quantity; 20*log10 by default (PSF is a magnitude)."""
    factor = 20.0 if reference == "amplitude" else 10.0
    return factor * np.log10(np.maximum(x, 1e-300))


def default_grid_step(formation: Formation, cfg: ScenarioConfig) -> float:
    """Per-formation step: >= 8 samples from peak to the first possible null."""
    lam = cfg.radar.wavelength
    b_max = float(pairwise_baselines(formation).max())
    if b_max < 1e-12:
        return lam / 8.0
    rho1 = float(slant_range(formation.positions[0], cfg.target_x))
    return min(lam / 8.0, lam * rho1 / (16.0 * b_max))


def _phasor_psf(px, pz, positions, rho_ref, wavelength):
    """Normalized squared phasor sum over platforms at points (px, pz)."""
    dx = positions[:, 0, None] - px[None, :]
    dz = positions[:, 1, None] - pz[None, :]
    rng = np.sqrt(dx * dx + dz * dz)
    if rho_ref is not None:
        rng -= rho_ref[:, None]
    ph = (2.0 * math.pi / wavelength) * rng
    c = np.cos(ph).sum(axis=0)
    s = np.sin(ph).sum(axis=0)
    n = positions.shape[0]
    return (c * c + s * s) / (n * n)


def axis_points(grid, axes: LocalAxes, axis: str):
    """Scene coordinates of grid samples along the chosen local axis."""
    if axis == "elevation":
        ux, uz = math.cos(axes.theta1), math.sin(axes.theta1)
    elif axis == "slant":
        ux, uz = math.sin(axes.theta1), -math.cos(axes.theta1)
    else:
        raise ValueError(f"axis: expected 'elevation' or 'slant', got {axis!r}")
    return axes.target_x + grid * ux, grid * uz


def evaluate_psf(formation: Formation, cfg: ScenarioConfig, axis: str = "elevation",
                 window: float | None = None, step: float | None = None,
                 axes: LocalAxes | None = None) -> PsfCurve:
    """Sample the PSF on [-window, window] along the given local axis.

    window defaults to cfg.h_max. step defaults to the automatic
    per-formation step; an explicit step (argument or config) coarser than
    wavelength/8 raises GridTooCoarseError. The returned grid has
    2*ceil(window/step)+1 samples with the center exactly at 0.
    """
    if axes is None:
        axes = LocalAxes.for_formation(formation, cfg.target_x)
    if window is None:
        window = cfg.h_max
    lam = cfg.radar.wavelength
    if step is None:
        step = cfg.numerics.psf_grid_step
    if step is not None:
        if step > lam / 8.0 + 1e-15:
            raise GridTooCoarseError(
                f"grid step {step} exceeds wavelength/8 = {lam / 8.0}")
    else:
        step = default_grid_step(formation, cfg)
    half = math.ceil(window / step - 1e-9)
    step_eff = window / half
    grid = (np.arange(2 * half + 1) - half) * step_eff
    px, pz = axis_points(grid, axes, axis)
    rho_ref = None
    if cfg.numerics.phase_compensation:
        rho_ref = slant_range(formation.positions, cfg.target_x)
    values = _phasor_psf(px, pz, formation.positions, rho_ref, lam)
    return PsfCurve(axis=axis, step=step_eff, half_count=half, values=values,
                    wavelength=lam, phase_compensation=cfg.numerics.phase_compensation)


def _null_scan(values, half_count, step, threshold):
    """Locate first sub-threshold local minima either side of the center.

    Returns (found, delta, loc_neg, loc_pos); parabolic vertex through each
    minimum and its neighbors refines both the location and the depth.
    """
    v = values
    if v.size < 3:
        return False, None, None, None
    left, mid, right = v[:-2], v[1:-1], v[2:]
    is_min = (mid <= left) & (mid <= right)
    den = left - 2.0 * mid + right
    diff = left - right
    safe = np.where(den > 0.0, den, 1.0)
    off = np.where(den > 0.0, np.clip(0.5 * diff / safe, -1.0, 1.0), 0.0)
    vmin = np.where(den > 0.0, mid - 0.25 * diff * off, mid)
    idx = np.nonzero(is_min & (vmin < threshold))[0] + 1
    pos = idx[idx > half_count]
    neg = idx[idx < half_count]
    if pos.size == 0 or neg.size == 0:
        return False, None, None, None
    jp, jn = int(pos[0]), int(neg[-1])
    loc_pos = (jp - half_count + off[jp - 1]) * step
    loc_neg = (jn - half_count + off[jn - 1]) * step
    return True, 0.5 * (loc_pos - loc_neg), loc_neg, loc_pos


def estimate_resolution(curve: PsfCurve, null_threshold: float = 1e-3) -> Resolution:
    """Half distance between the first nulls either side of the origin.

    A null is a local minimum whose interpolated depth falls below
    null_threshold. Missing nulls on either side give found=False with
    delta None; callers must treat that as a value, not an error.
    """
    found, delta, loc_neg, loc_pos = _null_scan(
        curve.values, curve.half_count, curve.step, null_threshold)
    return Resolution(found=found, delta=delta, null_negative=loc_neg,
                      null_positive=loc_pos)


def peak_sidelobe_level(curve: PsfCurve, delta: float) -> float:
    """Largest PSF value outside the closed mainlobe interval [-delta, delta].

    delta may be 0, which excludes only the center sample (used when no
    null pair exists). delta at or beyond the window edge leaves no
    sidelobe region and raises InvalidMainlobeError.
    """
    if delta < 0:
        raise InvalidMainlobeError("mainlobe half width must be nonnegative")
    if delta >= curve.extent:
        raise InvalidMainlobeError(
            f"mainlobe half width {delta} covers the whole window {curve.extent}")
    mask = np.abs(curve.grid) > delta
    return float(curve.values[mask].max())


def tomo_metrics(formation: Formation, cfg: ScenarioConfig,
                 axes: LocalAxes | None = None) -> TomoMetrics:
    """Resolutions and peak sidelobe level on [-h_max, h_max] for both axes."""
    if axes is None:
        axes = LocalAxes.for_formation(formation, cfg.target_x)
    curve_n = evaluate_psf(formation, cfg, "elevation", axes=axes)
    curve_r = evaluate_psf(formation, cfg, "slant", axes=axes)
    thr = cfg.numerics.null_threshold
    res_n = estimate_resolution(curve_n, thr)
    res_r = estimate_resolution(curve_r, thr)
    if res_n.found and res_n.delta < curve_n.extent:
        psl = peak_sidelobe_level(curve_n, res_n.delta)
    else:
        psl = peak_sidelobe_level(curve_n, 0.0)
    return TomoMetrics(
        delta_n=res_n.delta,
        delta_r=res_r.delta,
        found_n=res_n.found,
        found_r=res_r.found,
        psl_linear=psl,
        psl_db=float(to_db(psl, cfg.numerics.db_reference)),
        mainlobe_peak=float(curve_n.values[curve_n.half_count]),
    )


def write_psf_csv(curve: PsfCurve, path, db_reference: str = "amplitude") -> None:
    grid = curve.grid
    db = to_db(curve.values, db_reference)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("s_meters,psf_linear,psf_db\n")
        for s, lin, d in zip(grid, curve.values, db):
            fh.write(f"{s:.6f},{lin:.12e},{d:.4f}\n")
