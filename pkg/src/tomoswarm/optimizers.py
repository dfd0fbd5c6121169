"""Formation optimizers and benchmark metaheuristics.

The reduced problem searches platform positions only (2I dimensions);
each candidate is scored with the closed-form minimum-power allocation.
The joint problem additionally carries one transmit power per platform
and slot ((2+K)I dimensions). Candidates are ranked lexicographically:
feasible before infeasible, then sidelobe level among feasible and total
violation among infeasible. With psl_max at least the population's worst
sidelobe level this ordering matches the penalty fitness.

All algorithms draw from numpy's default_rng seeded once, with a fixed
draw order per iteration, so a run is a pure function of (config, seed,
budget).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import (ConstraintReport, evaluate_constraints,
                          evaluate_joint_constraints)
from .geometry import Formation, MissionTimeline
from .link_budget import PowerAllocation, allocate_min_power
from .psf import tomo_metrics
from .scenario import ScenarioConfig


class InfeasiblePlacementError(ValueError):
    """Requested reference array does not fit inside the altitude band."""


@dataclass(frozen=True)
class OptimizerBudget:
    iterations: int
    population: int
    c1: float = 2.0
    c2: float = 2.5
    v_max: float = 1.0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations: need at least 1")
        if self.population < 2:
            raise ValueError("population: need at least 2")


def default_budget(algorithm: str) -> OptimizerBudget:
    if algorithm in ("proposed", "pso"):
        return OptimizerBudget(iterations=500, population=500)
    if algorithm == "cga":
        return OptimizerBudget(iterations=300, population=100, options={
            "blx_alpha": 0.3,
            "crossover_prob": 1.0,
            "mutation_rate": 0.1,
            "mutation_sigma_frac": 0.05,
            "truncation": 0.5,
        })
    if algorithm == "genocop2":
        return OptimizerBudget(iterations=100, population=100, options={
            "inner_generations": 300,
            "tau0": 1e5,
            "tau_decay": 0.9,
            "crossover_prob": 0.5,
            "uniform_rate": 0.2,
            "nonuniform_rate": 0.7,
            "boundary_rate": 0.7,
            "nonuniform_b": 5.0,
        })
    raise ValueError(f"algorithm: unknown name {algorithm!r}")


@dataclass(frozen=True)
class CandidateEval:
    """Scalar summaries of one candidate; full reports are rebuilt for the
    winner only."""
    psl_linear: float
    psl_db: float
    g: dict
    feasible: bool
    total_violation: float
    sq_violation: float
    delta_n: float | None
    delta_r: float | None
    found_n: bool
    found_r: bool
    mainlobe_peak: float

    @property
    def key(self):
        if self.feasible:
            return (0.0, self.psl_linear)
        return (1.0, self.total_violation)


@dataclass(frozen=True)
class HistoryRow:
    iteration: int
    best_fitness: float
    best_psl_db: float
    feasible_count: int


@dataclass(frozen=True)
class OptimizationResult:
    algorithm: str
    seed: int
    budget: OptimizerBudget
    best_position: np.ndarray
    best_formation: Formation
    allocation: PowerAllocation
    report: ConstraintReport
    best_psl_linear: float
    best_psl_db: float
    feasible: bool
    history: list
    wall_time: float


def formation_bounds(cfg: ScenarioConfig):
    """Box bounds for the interleaved (x1, z1, ..., xI, zI) vector.

    The x range is the widest one compatible with some in-wedge look
    angle at some allowed altitude; exact wedge membership stays with the
    look-angle constraint.
    """
    z_min, z_max = cfg.altitude_bounds
    th_min, th_max = cfg.look_angle_bounds
    x_lo = cfg.target_x - z_max * np.tan(th_max)
    x_hi = cfg.target_x - z_min * np.tan(th_min)
    lo = np.tile([x_lo, z_min], cfg.num_uavs)
    hi = np.tile([x_hi, z_max], cfg.num_uavs)
    return lo, hi


def reflect_walls(positions, velocities, lo, hi):
    """Mirror out-of-box coordinates at the wall and flip their velocity.

    Repeats while any coordinate is outside (a large step can bounce more
    than once); a final clip guards degenerate boxes.
    """
    p = np.array(positions, dtype=float)
    v = np.array(velocities, dtype=float)
    for _ in range(100):
        below = p < lo
        above = p > hi
        if not (below.any() or above.any()):
            break
        p = np.where(below, 2.0 * lo - p, p)
        v = np.where(below, -v, v)
        p = np.where(above, 2.0 * hi - p, p)
        v = np.where(above, -v, v)
    np.clip(p, lo, hi, out=p)
    return p, v


def reflect_point(positions, lo, hi):
    """Mirror out-of-box coordinates at the wall (no velocity)."""
    p = np.array(positions, dtype=float)
    for _ in range(100):
        below = p < lo
        above = p > hi
        if not (below.any() or above.any()):
            break
        p = np.where(below, 2.0 * lo - p, p)
        p = np.where(above, 2.0 * hi - p, p)
    np.clip(p, lo, hi, out=p)
    return p


def pso_velocity_update(v, p, pbest, gbest, w, c1, c2, r1, r2, v_max):
    nv = w * v + c1 * r1 * (pbest - p) + c2 * r2 * (gbest - p)
    return np.clip(nv, -v_max, v_max)


def pso_position_update(p, v):
    return p + v


def inertia_weight(t: int, total: int, w_start: float = 0.9,
                   w_end: float = 0.4) -> float:
    """Linear ramp over updates t = 1..total."""
    if total <= 1:
        return w_start
    return w_start + (w_end - w_start) * (t - 1) / (total - 1)


def evaluate_candidate(vec, cfg: ScenarioConfig,
                       timeline: MissionTimeline) -> CandidateEval:
    """Score a reduced-problem candidate (positions only)."""
    formation = Formation(np.asarray(vec, dtype=float).reshape(-1, 2))
    metrics = tomo_metrics(formation, cfg)
    allocation = allocate_min_power(formation, timeline, cfg)
    report = evaluate_constraints(formation, metrics, allocation, cfg)
    return _pack_eval(metrics, report)


def evaluate_joint_candidate(vec, cfg: ScenarioConfig,
                             timeline: MissionTimeline) -> CandidateEval:
    """Score a joint-problem candidate (positions then per-slot powers)."""
    vec = np.asarray(vec, dtype=float)
    n_pos = 2 * cfg.num_uavs
    formation = Formation(vec[:n_pos].reshape(-1, 2))
    powers = vec[n_pos:].reshape(cfg.num_uavs, cfg.num_slots)
    metrics = tomo_metrics(formation, cfg)
    report = evaluate_joint_constraints(formation, metrics, powers, timeline, cfg)
    return _pack_eval(metrics, report)


def _pack_eval(metrics, report) -> CandidateEval:
    g_values = np.fromiter(report.g.values(), dtype=float)
    return CandidateEval(
        psl_linear=metrics.psl_linear,
        psl_db=metrics.psl_db,
        g=report.g,
        feasible=report.feasible,
        total_violation=float(g_values.sum()),
        sq_violation=float((g_values ** 2).sum()),
        delta_n=metrics.delta_n,
        delta_r=metrics.delta_r,
        found_n=metrics.found_n,
        found_r=metrics.found_r,
        mainlobe_peak=metrics.mainlobe_peak,
    )


def _history_fitness(e: CandidateEval) -> float:
    # 1.0 bounds every sidelobe level of the compensated PSF, so this stays
    # monotone across the infeasible-to-feasible transition.
    return e.psl_linear if e.feasible else 1.0 + e.total_violation


def _keys(evals):
    k0 = np.fromiter((0.0 if e.feasible else 1.0 for e in evals), dtype=float,
                     count=len(evals))
    k1 = np.fromiter((e.psl_linear if e.feasible else e.total_violation
                      for e in evals), dtype=float, count=len(evals))
    return k0, k1


def _run_pso(eval_fn, lo, hi, budget: OptimizerBudget, seed: int):
    """Shared PSO core; returns (best_position, best_eval, history)."""
    rng = np.random.default_rng(seed)
    n, d = budget.population, lo.size
    pop = lo + (hi - lo) * rng.random((n, d))
    vel = rng.random((n, d)) * budget.v_max
    evals = [eval_fn(pop[i]) for i in range(n)]
    k0, k1 = _keys(evals)

    pbest = pop.copy()
    pk0, pk1 = k0.copy(), k1.copy()
    pbest_evals = list(evals)
    gi = int(np.lexsort((pk1, pk0))[0])
    gbest = pbest[gi].copy()
    gbest_eval = pbest_evals[gi]
    gkey = (pk0[gi], pk1[gi])

    history = [HistoryRow(1, _history_fitness(gbest_eval), gbest_eval.psl_db,
                          int((k0 == 0.0).sum()))]
    total_updates = budget.iterations - 1
    for m in range(2, budget.iterations + 1):
        w = inertia_weight(m - 1, total_updates)
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        vel = pso_velocity_update(vel, pop, pbest, gbest, w, budget.c1,
                                  budget.c2, r1, r2, budget.v_max)
        pop = pso_position_update(pop, vel)
        pop, vel = reflect_walls(pop, vel, lo, hi)
        evals = [eval_fn(pop[i]) for i in range(n)]
        k0, k1 = _keys(evals)
        improved = (k0 < pk0) | ((k0 == pk0) & (k1 < pk1))
        pbest[improved] = pop[improved]
        pk0[improved] = k0[improved]
        pk1[improved] = k1[improved]
        for i in np.nonzero(improved)[0]:
            pbest_evals[i] = evals[i]
        j = int(np.lexsort((pk1, pk0))[0])
        if (pk0[j], pk1[j]) < gkey:
            gbest = pbest[j].copy()
            gbest_eval = pbest_evals[j]
            gkey = (pk0[j], pk1[j])
        history.append(HistoryRow(m, _history_fitness(gbest_eval),
                                  gbest_eval.psl_db, int((k0 == 0.0).sum())))
    return gbest, gbest_eval, history


def _finalize_reduced(algorithm, cfg, timeline, seed, budget, best_pos,
                      best_eval, history, t0) -> OptimizationResult:
    formation = Formation(np.asarray(best_pos).reshape(-1, 2))
    metrics = tomo_metrics(formation, cfg)
    allocation = allocate_min_power(formation, timeline, cfg)
    report = evaluate_constraints(formation, metrics, allocation, cfg)
    if abs(metrics.psl_linear - best_eval.psl_linear) > 1e-12:
        raise RuntimeError("re-evaluation of the winner diverged")
    return OptimizationResult(
        algorithm=algorithm, seed=seed, budget=budget,
        best_position=np.array(best_pos, dtype=float),
        best_formation=formation, allocation=allocation, report=report,
        best_psl_linear=metrics.psl_linear, best_psl_db=metrics.psl_db,
        feasible=report.feasible, history=history,
        wall_time=time.perf_counter() - t0)


def run_proposed(cfg: ScenarioConfig, seed: int = 0,
                 budget: OptimizerBudget | None = None) -> OptimizationResult:
    """PSO on positions only, powers fixed to the closed-form minimum."""
    if budget is None:
        budget = default_budget("proposed")
    t0 = time.perf_counter()
    timeline = MissionTimeline.from_config(cfg)
    lo, hi = formation_bounds(cfg)
    best_pos, best_eval, history = _run_pso(
        lambda v: evaluate_candidate(v, cfg, timeline), lo, hi, budget, seed)
    return _finalize_reduced("proposed", cfg, timeline, seed, budget,
                             best_pos, best_eval, history, t0)


def run_conventional_pso(cfg: ScenarioConfig, seed: int = 0,
                         budget: OptimizerBudget | None = None) -> OptimizationResult:
    """PSO on the joint encoding: positions plus one power per slot."""
    if budget is None:
        budget = default_budget("pso")
    t0 = time.perf_counter()
    timeline = MissionTimeline.from_config(cfg)
    flo, fhi = formation_bounds(cfg)
    n_pow = cfg.num_uavs * cfg.num_slots
    lo = np.concatenate([flo, np.zeros(n_pow)])
    hi = np.concatenate([fhi, np.full(n_pow, cfg.comm.max_power)])
    best_pos, best_eval, history = _run_pso(
        lambda v: evaluate_joint_candidate(v, cfg, timeline), lo, hi, budget, seed)

    n_pos = 2 * cfg.num_uavs
    formation = Formation(best_pos[:n_pos].reshape(-1, 2))
    powers = best_pos[n_pos:].reshape(cfg.num_uavs, cfg.num_slots)
    metrics = tomo_metrics(formation, cfg)
    report = evaluate_joint_constraints(formation, metrics, powers, timeline, cfg)
    if abs(metrics.psl_linear - best_eval.psl_linear) > 1e-12:
        raise RuntimeError("re-evaluation of the winner diverged")
    energy = timeline.slot_duration * powers.sum(axis=1)
    allocation = PowerAllocation(
        eta=powers, energy=energy,
        feasible=bool(np.all(powers <= cfg.comm.max_power)
                      and np.all(powers >= 0.0)
                      and np.all(energy <= cfg.comm.max_energy)),
        c11_violation=report.g["g8"], c12_violation=report.g["g10"])
    return OptimizationResult(
        algorithm="pso", seed=seed, budget=budget,
        best_position=np.array(best_pos, dtype=float), best_formation=formation,
        allocation=allocation, report=report,
        best_psl_linear=metrics.psl_linear, best_psl_db=metrics.psl_db,
        feasible=report.feasible, history=history,
        wall_time=time.perf_counter() - t0)


def run_cga(cfg: ScenarioConfig, seed: int = 0,
            budget: OptimizerBudget | None = None) -> OptimizationResult:
    """Real-coded GA: truncation selection, blend crossover, Gaussian
    mutation, one elite copied unchanged."""
    if budget is None:
        budget = default_budget("cga")
    opts = dict(default_budget("cga").options)
    opts.update(budget.options)
    t0 = time.perf_counter()
    timeline = MissionTimeline.from_config(cfg)
    lo, hi = formation_bounds(cfg)
    rng = np.random.default_rng(seed)
    n, d = budget.population, lo.size
    alpha = opts["blx_alpha"]
    px = opts["crossover_prob"]
    m_rate = opts["mutation_rate"]
    sigma = opts["mutation_sigma_frac"] * (hi - lo)
    n_survive = max(2, int(round(opts["truncation"] * n)))

    pop = lo + (hi - lo) * rng.random((n, d))
    evals = [evaluate_candidate(pop[i], cfg, timeline) for i in range(n)]
    k0, k1 = _keys(evals)
    order = np.lexsort((k1, k0))
    bi = int(order[0])
    best_pos, best_eval = pop[bi].copy(), evals[bi]
    best_key = (k0[bi], k1[bi])
    history = [HistoryRow(1, _history_fitness(best_eval), best_eval.psl_db,
                          int((k0 == 0.0).sum()))]

    for gen in range(2, budget.iterations + 1):
        order = np.lexsort((k1, k0))
        survivors = pop[order[:n_survive]]
        elite = survivors[0].copy()
        idx = rng.integers(0, n_survive, size=(n - 1, 2))
        u = rng.random((n - 1, d))
        cross = rng.random(n - 1) < px
        pa, pb = survivors[idx[:, 0]], survivors[idx[:, 1]]
        g_lo = np.minimum(pa, pb)
        g_hi = np.maximum(pa, pb)
        span = g_hi - g_lo
        blended = g_lo - alpha * span + (1.0 + 2.0 * alpha) * span * u
        children = np.where(cross[:, None], blended, pa)
        mask = rng.random((n - 1, d)) < m_rate
        noise = rng.normal(0.0, 1.0, (n - 1, d)) * sigma
        children = reflect_point(children + mask * noise, lo, hi)
        pop = np.vstack([elite[None, :], children])
        evals = [evaluate_candidate(pop[i], cfg, timeline) for i in range(n)]
        k0, k1 = _keys(evals)
        j = int(np.lexsort((k1, k0))[0])
        if (k0[j], k1[j]) < best_key:
            best_pos, best_eval = pop[j].copy(), evals[j]
            best_key = (k0[j], k1[j])
        history.append(HistoryRow(gen, _history_fitness(best_eval),
                                  best_eval.psl_db, int((k0 == 0.0).sum())))
    return _finalize_reduced("cga", cfg, timeline, seed, budget, best_pos,
                             best_eval, history, t0)


def penalty_objective(psl_linear: float, sq_violation: float, tau: float) -> float:
    """Annealed objective psl + sum(g^2)/(2 tau): raw sidelobe level as
    tau grows, violation-dominated as tau approaches zero."""
    return psl_linear + sq_violation / (2.0 * tau)


def run_genocop2(cfg: ScenarioConfig, seed: int = 0,
                 budget: OptimizerBudget | None = None) -> OptimizationResult:
    """Staged penalty GA: minimize psl + sum(g^2)/(2 tau) with tau shrinking
    geometrically per outer stage; the population carries over between
    stages. budget.iterations counts outer stages."""
    if budget is None:
        budget = default_budget("genocop2")
    opts = dict(default_budget("genocop2").options)
    opts.update(budget.options)
    t0 = time.perf_counter()
    timeline = MissionTimeline.from_config(cfg)
    lo, hi = formation_bounds(cfg)
    rng = np.random.default_rng(seed)
    n, d = budget.population, lo.size
    inner = opts["inner_generations"]
    tau = opts["tau0"]
    decay = opts["tau_decay"]
    px = opts["crossover_prob"]
    b_exp = opts["nonuniform_b"]
    total_gens = budget.iterations * inner

    pop = lo + (hi - lo) * rng.random((n, d))
    evals = [evaluate_candidate(pop[i], cfg, timeline) for i in range(n)]
    k0, k1 = _keys(evals)
    j = int(np.lexsort((k1, k0))[0])
    best_pos, best_eval = pop[j].copy(), evals[j]
    best_key = (k0[j], k1[j])

    def phi_values():
        return np.fromiter(
            (penalty_objective(e.psl_linear, e.sq_violation, tau) for e in evals),
            dtype=float, count=n)

    phi = phi_values()
    ei = int(np.argmin(phi))
    history = [HistoryRow(1, float(phi[ei]), evals[ei].psl_db,
                          int((k0 == 0.0).sum()))]
    iteration = 1
    gen_count = 0
    for _stage in range(budget.iterations):
        stage_best = np.inf
        for _gen in range(inner):
            ei = int(np.argmin(phi))
            elite = pop[ei].copy()
            elite_eval = evals[ei]
            a_idx = rng.integers(0, n, size=n - 1)
            b_idx = rng.integers(0, n, size=n - 1)
            winners = np.where(phi[a_idx] <= phi[b_idx], a_idx, b_idx)
            children = pop[winners].copy()
            n_pairs = (n - 1) // 2
            coins = rng.random(n_pairs)
            weights = rng.random(n_pairs)
            for p_i in range(n_pairs):
                if coins[p_i] < px:
                    a = weights[p_i]
                    c0, c1_ = children[2 * p_i].copy(), children[2 * p_i + 1].copy()
                    children[2 * p_i] = a * c0 + (1.0 - a) * c1_
                    children[2 * p_i + 1] = (1.0 - a) * c0 + a * c1_
            prog = gen_count / total_gens
            shrink = (1.0 - prog) ** b_exp
            for c in range(n - 1):
                if rng.random() < opts["uniform_rate"]:
                    gidx = int(rng.integers(0, d))
                    children[c, gidx] = lo[gidx] + (hi[gidx] - lo[gidx]) * rng.random()
                if rng.random() < opts["boundary_rate"]:
                    gidx = int(rng.integers(0, d))
                    children[c, gidx] = lo[gidx] if rng.random() < 0.5 else hi[gidx]
                if rng.random() < opts["nonuniform_rate"]:
                    gidx = int(rng.integers(0, d))
                    y = children[c, gidx]
                    if rng.random() < 0.5:
                        delta = (hi[gidx] - y)
                    else:
                        delta = -(y - lo[gidx])
                    children[c, gidx] = y + delta * (1.0 - rng.random() ** shrink)
            children = reflect_point(children, lo, hi)
            pop = np.vstack([elite[None, :], children])
            evals = [elite_eval] + [evaluate_candidate(pop[i], cfg, timeline)
                                    for i in range(1, n)]
            k0, k1 = _keys(evals)
            j = int(np.lexsort((k1, k0))[0])
            if (k0[j], k1[j]) < best_key:
                best_pos, best_eval = pop[j].copy(), evals[j]
                best_key = (k0[j], k1[j])
            phi = phi_values()
            stage_best = min(stage_best, float(phi.min()))
            gen_count += 1
            iteration += 1
            history.append(HistoryRow(iteration, stage_best,
                                      evals[int(np.argmin(phi))].psl_db,
                                      int((k0 == 0.0).sum())))
        tau *= decay
        phi = phi_values()
    return _finalize_reduced("genocop2", cfg, timeline, seed, budget,
                             best_pos, best_eval, history, t0)


def ula_formation(cfg: ScenarioConfig, spacing: float,
                  orientation: str = "perpendicular") -> Formation:
    """Uniform linear reference array centered on the mid-wedge sightline.

    The default line runs perpendicular to the reference line of sight
    (the elevation direction, the classical tomographic aperture);
    along_los places platforms at equal slant-range steps on the sight
    line instead, and vertical stacks them above the point whose look
    angle is the wedge center. Neighbor distance is spacing for every
    orientation.
    """
    if spacing <= 0:
        raise ValueError("spacing: must be positive")
    th_min, th_max = cfg.look_angle_bounds
    z_min, z_max = cfg.altitude_bounds
    theta_c = 0.5 * (th_min + th_max)
    z_c = 0.5 * (z_min + z_max)
    rho_c = z_c / np.cos(theta_c)
    i_off = np.arange(cfg.num_uavs) - (cfg.num_uavs - 1) / 2.0
    if orientation == "along_los":
        rho = rho_c + i_off * spacing
        x = cfg.target_x - rho * np.sin(theta_c)
        z = rho * np.cos(theta_c)
    elif orientation == "perpendicular":
        cx = cfg.target_x - rho_c * np.sin(theta_c)
        cz = rho_c * np.cos(theta_c)
        x = cx + i_off * spacing * np.cos(theta_c)
        z = cz + i_off * spacing * np.sin(theta_c)
    elif orientation == "vertical":
        z0 = cfg.target_x / np.tan(theta_c)
        x = np.zeros(cfg.num_uavs)
        z = z0 + np.arange(cfg.num_uavs) * spacing
    else:
        raise ValueError(f"orientation: unknown value {orientation!r}")
    if z.min() < z_min - 1e-9 or z.max() > z_max + 1e-9:
        raise InfeasiblePlacementError(
            "reference array does not fit inside the altitude bounds")
    return Formation(np.column_stack([x, z]))


ALGORITHMS = {
    "proposed": run_proposed,
    "pso": run_conventional_pso,
    "cga": run_cga,
    "genocop2": run_genocop2,
}


def run_algorithm(name: str, cfg: ScenarioConfig, seed: int = 0,
                  budget: OptimizerBudget | None = None) -> OptimizationResult:
    if name not in ALGORITHMS:
        raise ValueError(f"algorithm: unknown name {name!r}")
    return ALGORITHMS[name](cfg, seed=seed, budget=budget)


def override_budget(budget: OptimizerBudget, iterations=None,
                    population=None) -> OptimizerBudget:
    if iterations is not None:
        budget = replace(budget, iterations=iterations)
    if population is not None:
        budget = replace(budget, population=population)
    return budget
