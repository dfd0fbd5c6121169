"""Swarm formation and offload-power design for tomographic imaging.

Minimizes the peak sidelobe level of the elevation point spread function
of a cooperating radar swarm, subject to imaging, geometry, radar SNR,
and data-offloading constraints. The transmit powers admit a closed-form
minimum, so the search runs over platform positions only; conventional
joint particle swarm, a real-coded GA, and a staged-penalty GA are
included as benchmarks, plus a uniform linear reference array.
"""

from .constraints import (ConstraintReport, evaluate_constraints,
                          evaluate_joint_constraints, fitness,
                          resolution_cell_area, total_violation)
from .geometry import (DegenerateGeometryError, Formation, LocalAxes,
                       MissionTimeline, baseline, gs_distance, look_angle,
                       pairwise_baselines, range_to_elevation_point,
                       range_to_slant_point, slant_range, swath_width)
from .link_budget import (BOLTZMANN, PowerAllocation, RadarSnrTable,
                          allocate_min_power, comm_constraints_hold,
                          comm_throughput, min_offload_power, radar_alpha,
                          radar_snr_pair, radar_snr_table)
from .optimizers import (ALGORITHMS, CandidateEval, HistoryRow,
                         InfeasiblePlacementError, OptimizationResult,
                         OptimizerBudget, default_budget, evaluate_candidate,
                         evaluate_joint_candidate, formation_bounds,
                         inertia_weight, override_budget,
                         penalty_objective,
                         pso_position_update, pso_velocity_update,
                         reflect_point, reflect_walls, run_algorithm, run_cga,
                         run_conventional_pso, run_genocop2, run_proposed,
                         ula_formation)
from .psf import (GridTooCoarseError, InvalidMainlobeError, PsfCurve,
                  Resolution, TomoMetrics, default_grid_step,
                  estimate_resolution, evaluate_psf, peak_sidelobe_level,
                  to_db, tomo_metrics)
from .scenario import (CommParams, ConfigError, Numerics, RadarParams,
                       ScenarioConfig, db_to_linear, default_reference_config,
                       linear_to_db, load_config, save_config, with_h_max,
                       with_rate_min)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BOLTZMANN", "CandidateEval", "CommParams", "ConfigError",
    "ConstraintReport", "DegenerateGeometryError", "Formation",
    "GridTooCoarseError", "HistoryRow", "InfeasiblePlacementError",
    "InvalidMainlobeError", "LocalAxes", "MissionTimeline", "Numerics",
    "OptimizationResult", "OptimizerBudget", "PowerAllocation", "PsfCurve",
    "RadarParams", "RadarSnrTable", "Resolution", "ScenarioConfig",
    "TomoMetrics", "allocate_min_power", "baseline", "comm_constraints_hold",
    "comm_throughput", "db_to_linear", "default_budget", "default_grid_step",
    "default_reference_config", "estimate_resolution", "evaluate_candidate",
    "evaluate_constraints", "evaluate_joint_candidate",
    "evaluate_joint_constraints", "evaluate_psf", "fitness",
    "formation_bounds", "gs_distance", "inertia_weight", "linear_to_db",
    "load_config", "look_angle", "min_offload_power", "override_budget",
    "pairwise_baselines",
    "peak_sidelobe_level", "penalty_objective", "pso_position_update",
    "pso_velocity_update",
    "radar_alpha", "radar_snr_pair", "radar_snr_table",
    "range_to_elevation_point", "range_to_slant_point", "reflect_point",
    "reflect_walls", "resolution_cell_area", "run_algorithm", "run_cga",
    "run_conventional_pso", "run_genocop2", "run_proposed", "save_config",
    "slant_range", "swath_width", "to_db", "tomo_metrics", "total_violation",
    "ula_formation", "with_h_max", "with_rate_min",
]
