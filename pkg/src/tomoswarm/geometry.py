"""Imaging geometry: platform positions, local axes, ranges, baselines.

The scene lives in the x-z plane (x ground range, z altitude); the target
sits on the ground at (target_x, 0). The along-track coordinate y only
enters through the ground-station link. The local tomographic frame is
anchored to the first platform: theta1 is its look angle, the slant axis
points from the target away from the platform, and the elevation axis n
is perpendicular to it in the plane.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig


class DegenerateGeometryError(ValueError):
    """Geometry too degenerate to evaluate (e.g. horizontal look direction)."""


@dataclass(frozen=True)
class Formation:
    """Immutable set of platform positions, shape (I, 2) columns (x, z)."""
    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions: expected shape (I, 2)")
        if pos.shape[0] < 2:
            raise ValueError("positions: need at least 2 platforms")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions: must be finite")
        if np.any(pos[:, 1] <= 0):
            raise ValueError("positions: altitudes must be positive")
        pos = pos.copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def num_uavs(self) -> int:
        return self.positions.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.positions[:, 0]

    @property
    def z(self) -> np.ndarray:
        return self.positions[:, 1]


@dataclass(frozen=True)
class LocalAxes:
    """Tomographic frame anchored at the target, oriented by theta1."""
    theta1: float
    target_x: float

    @classmethod
    def for_formation(cls, formation: Formation, target_x: float) -> "LocalAxes":
        x1, z1 = formation.positions[0]
        return cls(theta1=float(np.arctan2(target_x - x1, z1)), target_x=target_x)

    @property
    def elevation_unit(self) -> np.ndarray:
        # Perpendicular to the line of sight, within the x-z plane.
        return np.array([np.cos(self.theta1), np.sin(self.theta1)])

    @property
    def slant_unit(self) -> np.ndarray:
        # Away from the platforms, into the ground.
        return np.array([np.sin(self.theta1), -np.cos(self.theta1)])


@dataclass(frozen=True)
class MissionTimeline:
    """Along-track sampling of the mission: one y position per slot."""
    y: np.ndarray
    slot_duration: float
    speed: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        y = y.copy()
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "MissionTimeline":
        y = cfg.swarm_speed * cfg.slot_duration * np.arange(cfg.num_slots)
        return cls(y=y, slot_duration=cfg.slot_duration, speed=cfg.swarm_speed)

    @property
    def num_slots(self) -> int:
        return self.y.shape[0]


def slant_range(position, target_x: float):
    """Distance from position(s) (..., 2) to the target (target_x, 0)."""
    pos = np.asarray(position, dtype=float)
    dx = pos[..., 0] - target_x
    return np.sqrt(dx * dx + pos[..., 1] ** 2)


def look_angle(position, target_x: float):
    """Off-nadir angle of the target seen from position(s), radians."""
    pos = np.asarray(position, dtype=float)
    return np.arctan2(target_x - pos[..., 0], pos[..., 1])


def swath_width(position, cfg: ScenarioConfig):
    """Ground footprint extent: beamwidth * slant range / cos(look angle)."""
    theta = look_angle(position, cfg.target_x)
    cos_t = np.cos(theta)
    if np.any(cos_t <= 1e-9):
        raise DegenerateGeometryError(
            "swath width undefined: look direction is horizontal")
    return cfg.radar.beamwidth_3db * slant_range(position, cfg.target_x) / cos_t


def baseline(p_i, p_j) -> float:
    """Euclidean separation between two platforms."""
    d = np.asarray(p_i, dtype=float) - np.asarray(p_j, dtype=float)
    return float(np.hypot(d[0], d[1]))


def pairwise_baselines(formation: Formation) -> np.ndarray:
    """Condensed upper-triangle distances, pairs (i, j) with i < j."""
    pos = formation.positions
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    iu = np.triu_indices(formation.num_uavs, k=1)
    return dist[iu]


def range_to_elevation_point(position, n, axes: LocalAxes):
    """Range from position(s) to the point at coordinate n on the elevation axis.

    position: (..., 2); n: scalar or (M,). Result broadcasts to (..., M).
    """
    pos = np.asarray(position, dtype=float)
    n = np.asarray(n, dtype=float)
    ex, ez = np.cos(axes.theta1), np.sin(axes.theta1)
    px = axes.target_x + n * ex
    pz = n * ez
    dx = pos[..., 0, None] - px if n.ndim else pos[..., 0] - px
    dz = pos[..., 1, None] - pz if n.ndim else pos[..., 1] - pz
    return np.sqrt(dx * dx + dz * dz)


def range_to_slant_point(position, r, axes: LocalAxes):
    """Range from position(s) to the point at coordinate r on the slant axis."""
    pos = np.asarray(position, dtype=float)
    r = np.asarray(r, dtype=float)
    sx, sz = np.sin(axes.theta1), -np.cos(axes.theta1)
    px = axes.target_x + r * sx
    pz = r * sz
    dx = pos[..., 0, None] - px if r.ndim else pos[..., 0] - px
    dz = pos[..., 1, None] - pz if r.ndim else pos[..., 1] - pz
    return np.sqrt(dx * dx + dz * dz)


def gs_distance(position, y, gs_position):
    """3D distance from a platform at (x, z) with along-track y to the station.

    y may be an array of slot positions; broadcasts like the range helpers.
    """
    pos = np.asarray(position, dtype=float)
    y = np.asarray(y, dtype=float)
    gx, gy, gz = gs_position
    dx = pos[..., 0] - gx
    dz = pos[..., 1] - gz
    if y.ndim:
        dx = dx[..., None]
        dz = dz[..., None]
    dy = y - gy
    return np.sqrt(dx * dx + dy * dy + dz * dz)
