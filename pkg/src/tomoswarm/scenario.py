"""Scenario parameter set: units, validation, defaults, and config file I/O.

All quantities are stored in SI linear units (watts, meters, radians,
dimensionless ratios). dB-valued inputs are converted once, at the file
boundary. Configs are immutable after construction and safe to share.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


class ConfigError(ValueError):
    """Raised when a scenario file fails to parse or violates an invariant."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


SNR_CONVENTIONS = ("dbm_absolute", "db_ratio")
DB_REFERENCES = ("amplitude", "power")


@dataclass(frozen=True)
class RadarParams:
    """Radar link quantities, all linear.

    sigma0: backscatter coefficient; transmit_power in W; gains linear;
    loss and noise_figure linear ratios; beamwidth_3db in radians;
    snr_min is the linear SNR threshold (see snr_min_convention).
    """
    sigma0: float
    transmit_power: float
    gain_tx: float
    gain_rx: float
    wavelength: float
    loss: float
    system_temperature: float
    noise_figure: float
    noise_bandwidth: float
    beamwidth_3db: float
    snr_min: float
    snr_min_convention: str = "dbm_absolute"


@dataclass(frozen=True)
class CommParams:
    """Offloading link quantities. bandwidth/beta are per-UAV tuples."""
    max_power: float
    max_energy: float
    bandwidth: tuple
    beta: tuple
    rate_min: float
    # Penalize energy per slot instead of per UAV total (legacy form).
    g12_per_slot: bool = False


@dataclass(frozen=True)
class Numerics:
    """Evaluation knobs.

    psf_grid_step: None selects the automatic per-formation step.
    db_reference: "amplitude" reports dB as 20log10 of the PSF value
    (the PSF is a magnitude), "power" as 10log10.
    phase_compensation: evaluate the PSF with phases referenced to each
    platform's own target range (mainlobe peak exactly 1). Raw absolute
    phases are kept as an option for analysis.
    enforce_slant_resolution: include the slant-range resolution clause in
    the resolution constraint. Off by default: inside the allowed
    look-angle wedge the slant PSF cannot null before ~3 m, so the clause
    rejects every otherwise-feasible formation.
    """
    psf_grid_step: float | None = None
    null_threshold: float = 1e-3
    db_reference: str = "amplitude"
    phase_compensation: bool = True
    enforce_slant_resolution: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    num_uavs: int
    num_slots: int
    slot_duration: float
    swarm_speed: float
    target_x: float
    gs_position: tuple
    altitude_bounds: tuple
    look_angle_bounds: tuple   # radians
    min_separation: float
    min_swath: float
    h_max: float
    epsilon: float
    max_resolutions: tuple     # (delta_n_max, delta_r_max) meters
    radar: RadarParams
    comm: CommParams
    numerics: Numerics = field(default_factory=Numerics)

    def __post_init__(self):
        validate_config(self)


def validate_config(cfg: ScenarioConfig) -> None:
    """Check every invariant; error messages name the violated field."""
    if cfg.num_uavs < 2:
        raise ConfigError("num_uavs: need at least 2 platforms")
    if cfg.num_slots < 1:
        raise ConfigError("num_slots: need at least 1 slot")
    if cfg.slot_duration <= 0:
        raise ConfigError("slot_duration: must be positive")
    if len(cfg.gs_position) != 3:
        raise ConfigError("gs_position: expected 3 coordinates")
    z_min, z_max = cfg.altitude_bounds
    if not z_min <= z_max:
        raise ConfigError("altitude_bounds: z_min must not exceed z_max")
    if z_min <= 0:
        raise ConfigError("altitude_bounds: z_min must be positive")
    th_min, th_max = cfg.look_angle_bounds
    if not th_min <= th_max:
        raise ConfigError("look_angle_bounds: theta_min must not exceed theta_max")
    if not 0.0 <= cfg.epsilon <= 0.05:
        raise ConfigError("epsilon range: epsilon must lie in [0, 0.05]")
    if cfg.min_separation < 0:
        raise ConfigError("min_separation: must be nonnegative")
    if cfg.h_max <= 0:
        raise ConfigError("h_max: must be positive")
    dn_max, dr_max = cfg.max_resolutions
    if dn_max <= 0 or dr_max <= 0:
        raise ConfigError("max_resolutions: must be positive")
    r = cfg.radar
    for name in ("sigma0", "transmit_power", "gain_tx", "gain_rx",
                 "wavelength", "loss", "system_temperature", "noise_figure",
                 "noise_bandwidth", "beamwidth_3db", "snr_min"):
        if getattr(r, name) <= 0:
            raise ConfigError(f"radar.{name}: must be positive")
    if r.snr_min_convention not in SNR_CONVENTIONS:
        raise ConfigError("radar.snr_min_convention: unknown convention")
    c = cfg.comm
    if c.max_power <= 0:
        raise ConfigError("comm.max_power: must be positive")
    if c.max_energy <= 0:
        raise ConfigError("comm.max_energy: must be positive")
    if len(c.bandwidth) != cfg.num_uavs or len(c.beta) != cfg.num_uavs:
        raise ConfigError("comm.bandwidth/beta: need one value per platform")
    if any(b <= 0 for b in c.bandwidth) or any(b <= 0 for b in c.beta):
        raise ConfigError("comm.bandwidth/beta: must be positive")
    if c.rate_min < 0:
        raise ConfigError("comm.rate_min: must be nonnegative")
    n = cfg.numerics
    if n.psf_grid_step is not None and n.psf_grid_step <= 0:
        raise ConfigError("numerics.psf_grid_step: must be positive or auto")
    if n.null_threshold <= 0:
        raise ConfigError("numerics.null_threshold: must be positive")
    if n.db_reference not in DB_REFERENCES:
        raise ConfigError("numerics.db_reference: unknown convention")


def default_reference_config() -> ScenarioConfig:
    """Reference 6-UAV scenario used throughout the experiments."""
    return ScenarioConfig(
        num_uavs=6,
        num_slots=200,
        slot_duration=1.0,
        swarm_speed=4.3,
        target_x=20.0,
        gs_position=(-85.0, 400.0, 25.0),
        altitude_bounds=(1.0, 100.0),
        look_angle_bounds=(math.radians(37.24), math.radians(48.7)),
        min_separation=2.0,
        min_swath=55.0,
        h_max=5.0,
        epsilon=0.05,
        max_resolutions=(1.0, 0.2),
        radar=RadarParams(
            sigma0=db_to_linear(-10.0),
            transmit_power=db_to_linear(10.0),
            gain_tx=db_to_linear(5.0),
            gain_rx=db_to_linear(5.0),
            wavelength=0.12,
            loss=db_to_linear(6.0),
            system_temperature=400.0,
            noise_figure=db_to_linear(5.0),
            noise_bandwidth=3e9,
            beamwidth_3db=math.radians(40.0),
            snr_min=1e-4,   # -10 dBm read literally; see snr_min_convention
            snr_min_convention="dbm_absolute",
        ),
        comm=CommParams(
            max_power=db_to_linear(10.0),
            max_energy=570.0,
            bandwidth=(1e9,) * 6,
            beta=(db_to_linear(20.0),) * 6,
            rate_min=6e6,
        ),
        numerics=Numerics(),
    )


# ---------------------------------------------------------------------------
# File format: flat "key = value" lines, '#' comments, dotted key groups.
# dB-valued keys carry a _db/_dbw/_dbi/_dbm suffix; angles are degrees in
# files and radians in memory.

_SCALAR_KEYS = {
    "num_uavs": int,
    "num_slots": int,
    "slot_duration": float,
    "swarm_speed": float,
    "target_x": float,
    "min_separation": float,
    "min_swath": float,
    "h_max": float,
    "epsilon": float,
}


def _parse_bool(text, key):
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _parse_floats(text, key, count=None):
    try:
        vals = tuple(float(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    if count is not None and len(vals) != count:
        raise ConfigError(f"{key}: expected {count} comma-separated values")
    return vals


def _broadcast(vals, n):
    return vals * n if len(vals) == 1 else vals


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario file. See save_config for the schema."""
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            raw[key.strip()] = value.strip()

    def take(key, default=None):
        if key in raw:
            return raw.pop(key)
        if default is not None:
            return default
        raise ConfigError(f"{key}: missing required key")

    kw = {}
    for key, cast in _SCALAR_KEYS.items():
        text = take(key)
        try:
            kw[key] = cast(text)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    kw["gs_position"] = _parse_floats(take("gs_position"), "gs_position", 3)
    kw["altitude_bounds"] = _parse_floats(take("altitude_bounds"), "altitude_bounds", 2)
    ang = _parse_floats(take("look_angle_bounds_deg"), "look_angle_bounds_deg", 2)
    kw["look_angle_bounds"] = (math.radians(ang[0]), math.radians(ang[1]))
    kw["max_resolutions"] = _parse_floats(take("max_resolutions"), "max_resolutions", 2)

    snr_convention = take("radar.snr_min_convention", "dbm_absolute")
    snr_dbm = float(take("radar.snr_min_dbm"))
    if snr_convention == "dbm_absolute":
        snr_min = db_to_linear(snr_dbm - 30.0)   # dBm re 1 W
    elif snr_convention == "db_ratio":
        snr_min = db_to_linear(snr_dbm)
    else:
        raise ConfigError("radar.snr_min_convention: unknown convention")
    kw["radar"] = RadarParams(
        sigma0=db_to_linear(float(take("radar.sigma0_db"))),
        transmit_power=db_to_linear(float(take("radar.transmit_power_dbw"))),
        gain_tx=db_to_linear(float(take("radar.gain_tx_dbi"))),
        gain_rx=db_to_linear(float(take("radar.gain_rx_dbi"))),
        wavelength=float(take("radar.wavelength")),
        loss=db_to_linear(float(take("radar.loss_db"))),
        system_temperature=float(take("radar.system_temperature")),
        noise_figure=db_to_linear(float(take("radar.noise_figure_db"))),
        noise_bandwidth=float(take("radar.noise_bandwidth")),
        beamwidth_3db=math.radians(float(take("radar.beamwidth_3db_deg"))),
        snr_min=snr_min,
        snr_min_convention=snr_convention,
    )

    n_uav = kw["num_uavs"]
    kw["comm"] = CommParams(
        max_power=db_to_linear(float(take("comm.max_power_dbw"))),
        max_energy=float(take("comm.max_energy")),
        bandwidth=_broadcast(_parse_floats(take("comm.bandwidth"), "comm.bandwidth"), n_uav),
        beta=_broadcast(tuple(db_to_linear(v) for v in
                              _parse_floats(take("comm.beta_db"), "comm.beta_db")), n_uav),
        rate_min=float(take("comm.rate_min")),
        g12_per_slot=_parse_bool(take("comm.g12_per_slot", "false"), "comm.g12_per_slot"),
    )

    step_text = take("numerics.psf_grid_step", "auto")
    kw["numerics"] = Numerics(
        psf_grid_step=None if step_text == "auto" else float(step_text),
        null_threshold=float(take("numerics.null_threshold", "1e-3")),
        db_reference=take("numerics.db_reference", "amplitude"),
        phase_compensation=_parse_bool(take("numerics.phase_compensation", "true"),
                                       "numerics.phase_compensation"),
        enforce_slant_resolution=_parse_bool(
            take("numerics.enforce_slant_resolution", "false"),
            "numerics.enforce_slant_resolution"),
    )

    if raw:
        raise ConfigError(f"unknown keys: {', '.join(sorted(raw))}")
    return ScenarioConfig(**kw)


def save_config(cfg: ScenarioConfig, path) -> None:
    """Write cfg in the load_config schema (round-trips field-wise)."""
    r, c, n = cfg.radar, cfg.comm, cfg.numerics
    if r.snr_min_convention == "dbm_absolute":
        snr_dbm = linear_to_db(r.snr_min) + 30.0
    else:
        snr_dbm = linear_to_db(r.snr_min)
    lines = [
        f"num_uavs = {cfg.num_uavs}",
        f"num_slots = {cfg.num_slots}",
        f"slot_duration = {cfg.slot_duration!r}",
        f"swarm_speed = {cfg.swarm_speed!r}",
        f"target_x = {cfg.target_x!r}",
        "gs_position = " + ", ".join(repr(v) for v in cfg.gs_position),
        "altitude_bounds = " + ", ".join(repr(v) for v in cfg.altitude_bounds),
        "look_angle_bounds_deg = " + ", ".join(
            repr(math.degrees(v)) for v in cfg.look_angle_bounds),
        f"min_separation = {cfg.min_separation!r}",
        f"min_swath = {cfg.min_swath!r}",
        f"h_max = {cfg.h_max!r}",
        f"epsilon = {cfg.epsilon!r}",
        "max_resolutions = " + ", ".join(repr(v) for v in cfg.max_resolutions),
        f"radar.sigma0_db = {linear_to_db(r.sigma0)!r}",
        f"radar.transmit_power_dbw = {linear_to_db(r.transmit_power)!r}",
        f"radar.gain_tx_dbi = {linear_to_db(r.gain_tx)!r}",
        f"radar.gain_rx_dbi = {linear_to_db(r.gain_rx)!r}",
        f"radar.wavelength = {r.wavelength!r}",
        f"radar.loss_db = {linear_to_db(r.loss)!r}",
        f"radar.system_temperature = {r.system_temperature!r}",
        f"radar.noise_figure_db = {linear_to_db(r.noise_figure)!r}",
        f"radar.noise_bandwidth = {r.noise_bandwidth!r}",
        f"radar.beamwidth_3db_deg = {math.degrees(r.beamwidth_3db)!r}",
        f"radar.snr_min_dbm = {snr_dbm!r}",
        f"radar.snr_min_convention = {r.snr_min_convention}",
        f"comm.max_power_dbw = {linear_to_db(c.max_power)!r}",
        f"comm.max_energy = {c.max_energy!r}",
        "comm.bandwidth = " + ", ".join(repr(v) for v in c.bandwidth),
        "comm.beta_db = " + ", ".join(repr(linear_to_db(v)) for v in c.beta),
        f"comm.rate_min = {c.rate_min!r}",
        f"comm.g12_per_slot = {'true' if c.g12_per_slot else 'false'}",
        "numerics.psf_grid_step = " + (
            "auto" if n.psf_grid_step is None else repr(n.psf_grid_step)),
        f"numerics.null_threshold = {n.null_threshold!r}",
        f"numerics.db_reference = {n.db_reference}",
        f"numerics.phase_compensation = {'true' if n.phase_compensation else 'false'}",
        "numerics.enforce_slant_resolution = "
        + ("true" if n.enforce_slant_resolution else "false"),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def with_h_max(cfg: ScenarioConfig, h_max: float) -> ScenarioConfig:
    return replace(cfg, h_max=h_max)


def with_rate_min(cfg: ScenarioConfig, rate_min: float) -> ScenarioConfig:
    return replace(cfg, comm=replace(cfg.comm, rate_min=rate_min))
