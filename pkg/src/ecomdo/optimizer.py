"""Constrained optimization driver with two-phase material penalization.

Phase 1 optimizes with linear material interpolation so the density variable
can travel across the catalogue; phase 2 restarts from that optimum with the
power-penalized interpolation, which traps the density at the nearest real
material, and the result is snapped onto the catalogue. SLSQP (scipy) is the
workhorse; design variables are scaled to the unit box and gradients come
from finite differences over the converged MDA.
"""

from __future__ import annotations

import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import design as dv
from .design import DesignVector
from .eco import CO2Breakdown, co2_total
from .energy import MassBreakdown, MdaState, ModelContext, run_mda
from .errors import AnalysisError, EcomdoError
from .geometry import PlanformSpec, build_wing, evaluate_bspline
from .materials import InterpolationMode, co2_per_kg
from .structures import (buckling_constraint, failure_constraint,
                         make_buckling_params)

log = logging.getLogger("ecomdo.optimizer")

#: scaled objective value assigned to designs whose analysis fails
_PENALTY_OBJECTIVE = 10.0
_PENALTY_CONSTRAINT = 10.0

#: objective normalization per mode (keeps SLSQP's ftol meaningful)
OBJECTIVE_SCALE = {"mass": 100.0, "co2": 5000.0}


@dataclass(frozen=True)
class OptimizerSettings:
    """SQP driver options; tol doubles as the feasibility threshold."""

    tol: float = 1e-3
    max_iter: int = 250
    gradient_mode: str = "fd_forward"    # "fd_forward" | "fd_central"
    penalization_p: float = 5.0
    snap_tol_kg_m3: float | None = None  # None: always snap to nearest material
    fixed_material_density: float | None = None
    penalize_phase1: bool = False        # trap each start in its material basin
    fd_rel_step_forward: float = 1e-7
    fd_rel_step_central: float = 1e-6

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.gradient_mode not in ("fd_forward", "fd_central"):
            raise ValueError(f"unknown gradient mode {self.gradient_mode!r}")


@dataclass(frozen=True)
class ConstraintSet:
    """Constraint values at one design; inequalities are feasible when < 0."""

    failure: np.ndarray                 # (n_elem,) spar von Mises margins
    buckling: np.ndarray                # (n_elem,) skin interaction margins
    skin_vs_wing_thickness: np.ndarray  # (4,) 2 t_skin / t_wing - 1 at CP stations
    power: float                        # P_needed / (A_PV S_wing) - 1
    lift_weight: float                  # (L - W) / W, equality

    def inequality_vector(self) -> np.ndarray:
        return np.concatenate([
            self.failure, self.buckling, self.skin_vs_wing_thickness,
            [self.power],
        ])

    @property
    def max_inequality(self) -> float:
        return float(np.max(self.inequality_vector()))

    @property
    def max_violation(self) -> float:
        return max(self.max_inequality, abs(self.lift_weight))

    def feasible(self, tol: float) -> bool:
        return self.max_inequality <= tol and abs(self.lift_weight) <= tol


@dataclass(frozen=True)
class Gradients:
    """Finite-difference sensitivities w.r.t. the 22-long design array."""

    objective: np.ndarray      # (n_x,)
    inequalities: np.ndarray   # (n_ineq, n_x)
    equality: np.ndarray       # (n_x,)


@dataclass(frozen=True)
class HistoryRecord:
    phase: int
    iteration: int
    objective: float
    max_violation: float
    density_spar: float
    density_skin: float


@dataclass
class RunResult:
    """Outcome of one two-phase optimization run."""

    design: DesignVector
    objective: float
    mode: str
    constraints: ConstraintSet
    mass_breakdown: MassBreakdown | None
    co2_breakdown: CO2Breakdown | None
    selected_spar: str
    selected_skin: str
    history: list[HistoryRecord]
    status: str                 # converged | max_iter | mda_failed | infeasible
    n_evaluations: int
    wall_time_s: float
    start: DesignVector

    @property
    def feasible(self) -> bool:
        return self.status in ("converged", "max_iter") and \
            self.constraints is not None


def thickness_constraints(design: DesignVector, ctx: ModelContext) -> np.ndarray:
    """Skin-fit margins 2 t_skin / t_wing - 1 at the spline control stations."""
    spec = PlanformSpec(span=design.span, root_chord=design.root_chord,
                        taper_ratio=design.taper, twist_cp=design.twist_cp,
                        tc_cp=design.tc_cp,
                        num_span_elements=ctx.num_span_elements)
    wing = build_wing(spec)
    stations = wing.cp_spline.greville
    t_skin = evaluate_bspline(wing.cp_spline, design.t_skin_cp)
    tc = evaluate_bspline(wing.cp_spline, design.tc_cp)
    chord = wing.chord_at(stations)
    t_wing = tc * chord
    return 2.0 * t_skin / t_wing - 1.0


def _objective_and_breakdowns(state: MdaState, ctx: ModelContext, mode: str):
    mass = state.mass_breakdown
    co2 = co2_total(
        m_spar=state.structure_gust.m_spar,
        m_skin=state.structure_gust.m_skin,
        spar_mat=state.layout.spar_material,
        skin_mat=state.layout.skin_material,
        p_needed=state.p_needed,
        t_night_h=ctx.energy.night_duration_h,
        cfg=ctx.eco,
    )
    objective = mass.total if mode == "mass" else co2.total
    return objective, mass, co2


def constraint_set(state: MdaState, design: DesignVector,
                   ctx: ModelContext) -> ConstraintSet:
    """All optimizer constraints evaluated on a converged MDA state."""
    struct = state.structure_gust
    params = make_buckling_params(state.wing, state.layout,
                                  k_c=ctx.structure.buckling_k_axial,
                                  k_s=ctx.structure.buckling_k_shear)
    buck_vals, buck_ks = buckling_constraint(struct, params, ctx.structure.ks_rho)
    fail_vals, fail_ks = failure_constraint(
        struct, state.layout.spar_material.failure_strength,
        ctx.structure.safety_factor, ctx.structure.ks_rho)
    struct.ks_failure = fail_ks
    struct.ks_buckling = buck_ks
    weight = state.weight_n
    return ConstraintSet(
        failure=fail_vals,
        buckling=buck_vals,
        skin_vs_wing_thickness=thickness_constraints(design, ctx),
        power=state.p_needed / (ctx.energy.pv_power_per_area_w_m2
                                * state.wing.s_wing) - 1.0,
        lift_weight=(state.lift_cruise - weight) / weight,
    )


@dataclass
class Evaluation:
    """One design evaluated: objective, constraints and (lazily) gradients."""

    objective: float
    constraints: ConstraintSet
    failed: bool
    state: MdaState | None
    mass_breakdown: MassBreakdown | None
    co2_breakdown: CO2Breakdown | None


def evaluate_design(design: DesignVector, mode: str, ctx: ModelContext,
                    warm_twist: np.ndarray | None = None) -> Evaluation:
    """Run the MDA and collect objective + constraints for one design.

    Analysis failures (diverging snowball, impossible sections, singular
    systems) return a heavily penalized pseudo-point so the SQP line search
    backs off instead of aborting; the geometric skin-fit constraints are
    still reported exactly in that case.
    """
    n = ctx.num_span_elements
    try:
        thickness = thickness_constraints(design, ctx)
    except (EcomdoError, ValueError):
        thickness = np.full(4, _PENALTY_CONSTRAINT)
    try:
        state = run_mda(design, ctx, warm_twist_deg=warm_twist)
        objective, mass, co2 = _objective_and_breakdowns(state, ctx, mode)
        constraints = constraint_set(state, design, ctx)
        return Evaluation(objective=objective, constraints=constraints,
                          failed=False, state=state, mass_breakdown=mass,
                          co2_breakdown=co2)
    except (EcomdoError, ValueError) as exc:
        log.debug("evaluation failed: %s", exc)
        constraints = ConstraintSet(
            failure=np.full(n, _PENALTY_CONSTRAINT),
            buckling=np.full(n, _PENALTY_CONSTRAINT),
            skin_vs_wing_thickness=thickness,
            power=_PENALTY_CONSTRAINT,
            lift_weight=_PENALTY_CONSTRAINT,
        )
        return Evaluation(objective=_PENALTY_OBJECTIVE * OBJECTIVE_SCALE[mode],
                          constraints=constraints, failed=True, state=None,
                          mass_breakdown=None, co2_breakdown=None)


def _fd_steps(x: np.ndarray, rel: float) -> np.ndarray:
    return rel * np.maximum(np.abs(x), dv.typical_scales())


def evaluate(design: DesignVector, mode: str, ctx: ModelContext,
             settings: OptimizerSettings = OptimizerSettings(),
             with_gradients: bool = True):
    """Objective, constraints and finite-difference gradients of one design.

    The production gradient mode is forward differencing with a warm-started
    MDA per perturbed component; "fd_central" doubles the cost for a
    second-order estimate. Steps that would leave the design bounds are
    flipped inward.
    """
    base = evaluate_design(design, mode, ctx)
    if not with_gradients:
        return base.objective, base.constraints, None

    x = design.to_array()
    lb, ub = dv.lower_bounds(), dv.upper_bounds()
    warm = base.state.twist_correction_deg if base.state is not None else None
    central = settings.gradient_mode == "fd_central"
    rel = (settings.fd_rel_step_central if central
           else settings.fd_rel_step_forward)
    steps = _fd_steps(x, rel)

    base_ineq = base.constraints.inequality_vector()
    n_x, n_g = x.size, base_ineq.size
    d_obj = np.zeros(n_x)
    d_ineq = np.zeros((n_g, n_x))
    d_eq = np.zeros(n_x)
    for i in range(n_x):
        h = steps[i]
        if x[i] + h > ub[i]:
            h = -h
        xp = x.copy()
        xp[i] += h
        ep = evaluate_design(DesignVector.from_array(xp), mode, ctx, warm)
        if central:
            xm = x.copy()
            xm[i] -= h
            em = evaluate_design(DesignVector.from_array(xm), mode, ctx, warm)
            denom = 2.0 * h
            d_obj[i] = (ep.objective - em.objective) / denom
            d_ineq[:, i] = (ep.constraints.inequality_vector()
                            - em.constraints.inequality_vector()) / denom
            d_eq[i] = (ep.constraints.lift_weight
                       - em.constraints.lift_weight) / denom
        else:
            d_obj[i] = (ep.objective - base.objective) / h
            d_ineq[:, i] = (ep.constraints.inequality_vector() - base_ineq) / h
            d_eq[i] = (ep.constraints.lift_weight
                       - base.constraints.lift_weight) / h
    return base.objective, base.constraints, Gradients(
        objective=d_obj, inequalities=d_ineq, equality=d_eq)


class _ScaledProblem:
    """Maps the free design components onto the unit box for SLSQP.

    Evaluations (and their finite-difference gradients) are memoized on the
    scaled coordinates because scipy queries objective and constraints
    separately at the same point.
    """

    def __init__(self, x0: np.ndarray, mode: str, ctx: ModelContext,
                 settings: OptimizerSettings):
        self.mode = mode
        self.ctx = ctx
        self.settings = settings
        self.obj_scale = OBJECTIVE_SCALE[mode]
        lb, ub = dv.lower_bounds(), dv.upper_bounds()
        # density components are confined to the catalogue hull so every
        # evaluated design has a defined material
        lb = lb.copy()
        ub = ub.copy()
        lb[dv.DENSITY] = np.maximum(lb[dv.DENSITY], ctx.catalogue.density_min)
        ub[dv.DENSITY] = np.minimum(ub[dv.DENSITY], ctx.catalogue.density_max)
        frozen = np.zeros(x0.size, dtype=bool)
        if settings.fixed_material_density is not None:
            rho = float(np.clip(settings.fixed_material_density,
                                lb[dv.DENSITY][0], ub[dv.DENSITY][0]))
            x0 = x0.copy()
            x0[dv.DENSITY] = rho
            frozen[dv.DENSITY] = True
        self.lb, self.ub = lb, ub
        self.frozen = frozen
        self.free = np.flatnonzero(~frozen)
        self.x_template = np.clip(x0, lb, ub)
        self.span_width = ub - lb
        self._values: dict[bytes, Evaluation] = {}
        self._grads: dict[bytes, Gradients] = {}
        self.n_evaluations = 0
        self.last_warm: np.ndarray | None = None

    def to_scaled(self, x_full: np.ndarray) -> np.ndarray:
        z = (np.clip(x_full, self.lb, self.ub) - self.lb) / self.span_width
        return z[self.free]

    def to_full(self, z: np.ndarray) -> np.ndarray:
        x = self.x_template.copy()
        x[self.free] = self.lb[self.free] + np.clip(z, 0.0, 1.0) \
            * self.span_width[self.free]
        return x

    def _eval(self, z: np.ndarray) -> Evaluation:
        key = np.asarray(z, dtype=float).tobytes()
        if key not in self._values:
            design = DesignVector.from_array(self.to_full(np.asarray(z)))
            ev = evaluate_design(design, self.mode, self.ctx, self.last_warm)
            if ev.state is not None:
                self.last_warm = ev.state.twist_correction_deg
            self._values[key] = ev
            self.n_evaluations += 1
        return self._values[key]

    def _grad(self, z: np.ndarray) -> Gradients:
        key = np.asarray(z, dtype=float).tobytes()
        if key not in self._grads:
            base = self._eval(z)
            x = self.to_full(np.asarray(z))
            warm = (base.state.twist_correction_deg
                    if base.state is not None else self.last_warm)
            central = self.settings.gradient_mode == "fd_central"
            rel = (self.settings.fd_rel_step_central if central
                   else self.settings.fd_rel_step_forward)
            steps = _fd_steps(x, rel)
            base_ineq = base.constraints.inequality_vector()
            d_obj = np.zeros(x.size)
            d_ineq = np.zeros((base_ineq.size, x.size))
            d_eq = np.zeros(x.size)
            for i in self.free:
                h = steps[i]
                if x[i] + h > self.ub[i]:
                    h = -h
                xp = x.copy()
                xp[i] += h
                ep = evaluate_design(DesignVector.from_array(xp), self.mode,
                                     self.ctx, warm)
                self.n_evaluations += 1
                if central:
                    xm = x.copy()
                    xm[i] -= h
                    em = evaluate_design(DesignVector.from_array(xm), self.mode,
                                         self.ctx, warm)
                    self.n_evaluations += 1
                    denom = 2.0 * h
                    d_obj[i] = (ep.objective - em.objective) / denom
                    d_ineq[:, i] = (ep.constraints.inequality_vector()
                                    - em.constraints.inequality_vector()) / denom
                    d_eq[i] = (ep.constraints.lift_weight
                               - em.constraints.lift_weight) / denom
                else:
                    d_obj[i] = (ep.objective - base.objective) / h
                    d_ineq[:, i] = (ep.constraints.inequality_vector()
                                    - base_ineq) / h
                    d_eq[i] = (ep.constraints.lift_weight
                               - base.constraints.lift_weight) / h
            self._grads[key] = Gradients(objective=d_obj, inequalities=d_ineq,
                                         equality=d_eq)
        return self._grads[key]

    # scipy-facing callables (scaled objective; >= 0 feasible inequalities)
    def objective(self, z):
        return self._eval(z).objective / self.obj_scale

    def objective_jac(self, z):
        g = self._grad(z).objective[self.free] * self.span_width[self.free]
        return g / self.obj_scale

    def ineq(self, z):
        return -self._eval(z).constraints.inequality_vector()

    def ineq_jac(self, z):
        return -self._grad(z).inequalities[:, self.free] \
            * self.span_width[self.free][None, :]

    def eq(self, z):
        return np.array([self._eval(z).constraints.lift_weight])

    def eq_jac(self, z):
        return (self._grad(z).equality[self.free]
                * self.span_width[self.free])[None, :]


def _run_slsqp(problem: _ScaledProblem, z0: np.ndarray, settings: OptimizerSettings,
               phase: int, history: list[HistoryRecord]):
    iteration = itertools.count(1)

    def callback(zk):
        ev = problem._eval(zk)
        x = problem.to_full(zk)
        history.append(HistoryRecord(
            phase=phase, iteration=next(iteration), objective=ev.objective,
            max_violation=ev.constraints.max_violation,
            density_spar=float(x[dv.DENSITY][0]),
            density_skin=float(x[dv.DENSITY][1]),
        ))

    res = minimize(
        problem.objective, z0, jac=problem.objective_jac, method="SLSQP",
        bounds=[(0.0, 1.0)] * z0.size,
        constraints=[
            {"type": "ineq", "fun": problem.ineq, "jac": problem.ineq_jac},
            {"type": "eq", "fun": problem.eq, "jac": problem.eq_jac},
        ],
        options={"maxiter": settings.max_iter, "ftol": settings.tol},
        callback=callback,
    )
    return res


def snap_densities(x: np.ndarray, ctx: ModelContext,
                   settings: OptimizerSettings) -> np.ndarray:
    """Snap both density components onto the nearest catalogue material."""
    x = x.copy()
    for k in range(2):
        rho = x[dv.DENSITY][k]
        nearest = ctx.catalogue.nearest(rho).density
        if settings.snap_tol_kg_m3 is None or \
                abs(nearest - rho) <= settings.snap_tol_kg_m3:
            x[dv.DENSITY.start + k] = nearest
    return x


def optimize(start: DesignVector, settings: OptimizerSettings, mode: str,
             ctx: ModelContext) -> RunResult:
    """Two-phase optimization from one start, returning the snapped optimum."""
    if mode not in OBJECTIVE_SCALE:
        raise ValueError(f"unknown objective mode {mode!r}")
    t0 = time.perf_counter()
    history: list[HistoryRecord] = []

    ctx_penal = ctx.with_interpolation(
        InterpolationMode.penalized(settings.penalization_p))
    ctx_phase1 = (ctx_penal if settings.penalize_phase1
                  else ctx.with_interpolation(InterpolationMode.linear()))

    problem1 = _ScaledProblem(start.to_array(), mode, ctx_phase1, settings)
    z0 = problem1.to_scaled(start.to_array())
    res1 = _run_slsqp(problem1, z0, settings, phase=1, history=history)
    x1 = problem1.to_full(res1.x)
    n_evals = problem1.n_evaluations

    problem2 = _ScaledProblem(x1, mode, ctx_penal, settings)
    res2 = _run_slsqp(problem2, problem2.to_scaled(x1), settings, phase=2,
                      history=history)
    x2 = problem2.to_full(res2.x)
    n_evals += problem2.n_evaluations

    x_final = snap_densities(x2, ctx, settings)
    design_final = DesignVector.from_array(x_final)
    final = evaluate_design(design_final, mode, ctx_penal)

    if final.failed:
        status = "mda_failed"
    elif not final.constraints.feasible(settings.tol):
        status = "infeasible"
    elif res2.status == 0:
        status = "converged"
    else:
        status = "max_iter" if res2.status == 9 else "infeasible"

    history.append(HistoryRecord(
        phase=2, iteration=len(history) + 1, objective=final.objective,
        max_violation=final.constraints.max_violation,
        density_spar=design_final.density_spar,
        density_skin=design_final.density_skin,
    ))
    spar_name = ctx.catalogue.nearest(design_final.density_spar).name
    skin_name = ctx.catalogue.nearest(design_final.density_skin).name
    return RunResult(
        design=design_final,
        objective=final.objective,
        mode=mode,
        constraints=final.constraints,
        mass_breakdown=final.mass_breakdown,
        co2_breakdown=final.co2_breakdown,
        selected_spar=spar_name,
        selected_skin=skin_name,
        history=history,
        status=status,
        n_evaluations=n_evals + 1,
        wall_time_s=time.perf_counter() - t0,
        start=start,
    )


@dataclass(frozen=True)
class MultiStartPlan:
    """Cartesian-product start values, one tuple of options per variable."""

    density: tuple            # of (spar, skin) pairs
    twist_cp: tuple           # of 4-vectors
    t_skin_cp: tuple
    t_spar_cp: tuple
    tc_cp: tuple
    span: tuple
    root_chord: tuple
    taper: tuple
    motor_location: tuple

    @property
    def size(self) -> int:
        n = 1
        for opts in (self.density, self.twist_cp, self.t_skin_cp,
                     self.t_spar_cp, self.tc_cp, self.span, self.root_chord,
                     self.taper, self.motor_location):
            n *= len(opts)
        return n

    def starts(self) -> list[DesignVector]:
        """Enumerate every combination in documented (row-major) order."""
        out = []
        for rho, tw, tsk, tsp, tc, sp, rc, ta, mo in itertools.product(
                self.density, self.twist_cp, self.t_skin_cp, self.t_spar_cp,
                self.tc_cp, self.span, self.root_chord, self.taper,
                self.motor_location):
            out.append(DesignVector(
                density=np.asarray(rho, dtype=float),
                twist_cp=np.asarray(tw, dtype=float),
                t_skin_cp=np.asarray(tsk, dtype=float),
                t_spar_cp=np.asarray(tsp, dtype=float),
                tc_cp=np.asarray(tc, dtype=float),
                span=float(sp), root_chord=float(rc), taper=float(ta),
                motor_location=float(mo),
            ))
        return out


def _regular(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n)


def default_multistart_plan() -> MultiStartPlan:
    """The 2*3*3*3*4 = 216-run default plan.

    Each variable's start values are regularly spaced between its lowest and
    highest start; vector variables scale a fixed spanwise pattern.
    """
    return MultiStartPlan(
        density=tuple((rho, rho) for rho in _regular(500.0, 600.0, 2)),
        twist_cp=(np.array([10.0, 15.0, 15.0, 15.0]),),
        t_skin_cp=tuple(s * np.array([0.5, 1.0, 1.5, 2.0])
                        for s in _regular(0.002, 0.004, 3)),
        t_spar_cp=tuple(s * np.array([1.0, 1.0, 1.0, 1.0])
                        for s in _regular(0.001, 0.003, 3)),
        tc_cp=tuple(s * np.array([0.75, 1.0, 1.0, 1.25])
                    for s in _regular(0.05, 0.17, 3)),
        span=tuple(_regular(25.0, 100.0, 4)),
        root_chord=(1.5,),
        taper=(0.3,),
        motor_location=(0.3,),
    )


@dataclass
class MultiStartResult:
    best: RunResult | None
    runs: list[RunResult]

    @property
    def best_feasible_trace(self) -> list[float]:
        """Best feasible objective after each completed run (inf until one)."""
        best = np.inf
        trace = []
        for r in self.runs:
            if r.feasible and r.objective < best:
                best = r.objective
            trace.append(best)
        return trace


def _optimize_worker(args):
    start, settings, mode, ctx = args
    return optimize(start, settings, mode, ctx)


def multi_start(plan: MultiStartPlan, settings: OptimizerSettings, mode: str,
                ctx: ModelContext, jobs: int = 1) -> MultiStartResult:
    """Run the full plan and keep the best feasible result.

    Runs are independent (each owns its MDA/FEM/VLM workspaces) and execute
    in separate processes when jobs > 1. Raises AnalysisError if every run
    failed outright.
    """
    starts = plan.starts()
    args = [(s, settings, mode, ctx) for s in starts]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_optimize_worker, args))
    else:
        runs = [_optimize_worker(a) for a in args]
    for i, run in enumerate(runs):
        log.info("start %03d/%d: status=%s objective=%.6g material=(%s, %s)",
                 i + 1, len(runs), run.status, run.objective,
                 run.selected_spar, run.selected_skin)
    feasible = [r for r in runs if r.feasible]
    if not runs:
        raise AnalysisError("empty multi-start plan")
    if not feasible:
        statuses = {r.status for r in runs}
        raise AnalysisError(f"all {len(runs)} runs failed: statuses {statuses}")
    best = min(feasible, key=lambda r: r.objective)
    return MultiStartResult(best=best, runs=runs)


@dataclass(frozen=True)
class SweepEntry:
    ratio: float
    selected_spar: str
    selected_skin: str
    objective: float
    status: str


def sweep_plan() -> MultiStartPlan:
    """Small two-start plan (one per density basin) used by the CO2-ratio sweep."""
    base = default_multistart_plan()
    return replace(
        base,
        t_skin_cp=(base.t_skin_cp[1],),
        t_spar_cp=(base.t_spar_cp[1],),
        tc_cp=(base.tc_cp[1],),
        span=(50.0,),
    )


def co2_ratio_sweep(ratios, settings: OptimizerSettings, ctx: ModelContext,
                    plan: MultiStartPlan | None = None, jobs: int = 1,
                    target: str = "material-3",
                    reference: str = "material-1") -> list[SweepEntry]:
    """Re-run the CO2 optimization with the target material's CO2 scaled.

    For each ratio the target's footprint is set to ratio times the
    reference material's, and the winning (snapped) material is recorded.
    """
    ref = next(r for r in ctx.catalogue.records if r.name == reference)
    # The flip question compares material basins, so the penalization is
    # active from the start: a linear first phase lets the SQP tunnel across
    # the piecewise-linear kinks and collapse every start into one basin.
    settings = replace(settings, penalize_phase1=True)
    entries = []
    for ratio in ratios:
        if not 0.0 < ratio <= 1.0:
            raise ValueError(f"ratio {ratio} outside (0, 1]")
        cat = ctx.catalogue.with_scaled_co2(target, ratio * co2_per_kg(ref))
        result = multi_start(plan or sweep_plan(), settings, "co2",
                             ctx.with_catalogue(cat), jobs=jobs)
        best = result.best
        entries.append(SweepEntry(
            ratio=float(ratio),
            selected_spar=best.selected_spar,
            selected_skin=best.selected_skin,
            objective=best.objective,
            status=best.status,
        ))
        log.info("ratio %.3f -> %s / %s (objective %.6g)", ratio,
                 best.selected_spar, best.selected_skin, best.objective)
    return entries


def flip_bracket(entries: list[SweepEntry], target: str = "material-3",
                 reference: str = "material-1"):
    """Ratio interval (lo, hi) across which the winner flips to the target.

    Entries are sorted by ratio; returns None when no flip is present.
    """
    ordered = sorted(entries, key=lambda e: e.ratio)
    wins = [e.selected_spar == target and e.selected_skin == target
            for e in ordered]
    for lo, hi, w_lo, w_hi in zip(ordered, ordered[1:], wins, wins[1:]):
        if w_lo and not w_hi:
            return lo.ratio, hi.ratio
    return None


def verify_gradients(design: DesignVector, mode: str, ctx: ModelContext,
                     settings: OptimizerSettings = OptimizerSettings()) -> dict:
    """Compare production gradients against central differences.

    Returns per-output relative errors measured in the infinity norm,
    normalized by the central-difference gradient magnitude.
    """
    _, _, grad_fwd = evaluate(design, mode, ctx, settings)
    central = replace(settings, gradient_mode="fd_central")
    _, _, grad_cen = evaluate(design, mode, ctx, central)

    def rel(a, b):
        scale = max(float(np.max(np.abs(b))), 1e-12)
        return float(np.max(np.abs(a - b))) / scale

    ineq_err = [rel(grad_fwd.inequalities[k], grad_cen.inequalities[k])
                for k in range(grad_fwd.inequalities.shape[0])]
    return {
        "objective": rel(grad_fwd.objective, grad_cen.objective),
        "inequalities": ineq_err,
        "equality": rel(grad_fwd.equality, grad_cen.equality),
        "max": max([rel(grad_fwd.objective, grad_cen.objective),
                    rel(grad_fwd.equality, grad_cen.equality)] + ineq_err),
    }
