"""Power balance, mass build-up and the coupled multidisciplinary analysis.

The drone must generate its own propulsive and payload power from wing-mounted
solar cells and store a night's worth in batteries. Power scales with weight,
and batteries/panels/motors sized for that power add weight back: the
"snowball" coupling. A Gauss-Seidel loop converges this fixed point together
with the aeroelastic twist feedback; the power/mass subsystem is linear in
total mass at frozen aerodynamics, so each sweep closes it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .aero import AeroOptions, AeroSolution, FlowConditions, panel_loads, solve_vlm
from .design import DesignVector
from .eco import EcoConfig
from .errors import AnalysisError, MdaDivergedError
from .geometry import PlanformSpec, WingModel, build_wing
from .materials import InterpolationMode, MaterialCatalogue, interpolated_material
from .structures import (GRAVITY, StructuralLayout, StructuralResult,
                         element_sections, solve_fem, structural_masses)


@dataclass(frozen=True)
class EnergyConfig:
    """Propulsion, storage and mass-model parameters."""

    propulsive_efficiency: float          # electrical -> thrust power
    payload_power_w: float                # payload + avionics draw, W
    battery_energy_density_kwh_kg: float  # kWh per kg of battery
    propulsion_mass_per_w: float          # kg per W of thrust power
    pv_areal_density_kg_m2: float         # kg per m^2 of solar cells
    mppt_mass_per_w: float                # kg per W routed through the MPPT
    fixed_mass_kg: float                  # payload + avionics mass
    pv_power_per_area_w_m2: float = 54.0  # mean harvested solar power density
    night_duration_h: float = 13.0        # battery-powered night time
    motor_count: int = 2
    extra_mass_factor: float = 0.10       # tail/boom/harness/landing-gear share

    def __post_init__(self):
        if not 0.0 < self.propulsive_efficiency <= 1.0:
            raise ValueError("propulsive efficiency must be in (0, 1]")
        for name in ("payload_power_w", "battery_energy_density_kwh_kg",
                     "pv_power_per_area_w_m2", "night_duration_h"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.battery_energy_density_kwh_kg <= 0:
            raise ValueError("battery energy density must be positive")
        if self.pv_power_per_area_w_m2 <= 0:
            raise ValueError("PV power density must be positive")
        if self.motor_count < 1:
            raise ValueError("need at least one motor")
        if not 0.0 <= self.extra_mass_factor <= 0.5:
            raise ValueError("extra_mass_factor must be in [0, 0.5]")


class PowerState(NamedTuple):
    p_needed: float  # W, electrical demand incl. payload
    p_prop: float    # W, thrust power


def power_needed(weight_n: float, speed: float, c_d: float, c_l: float,
                 cfg: EnergyConfig) -> PowerState:
    """Electrical power for level flight: W v Cd / (Cl eta) + payload draw."""
    if c_l <= 0.0:
        raise AnalysisError(f"cannot sustain lift-based equilibrium with C_L={c_l:.4g}")
    p_prop = weight_n * speed * c_d / c_l
    return PowerState(p_needed=p_prop / cfg.propulsive_efficiency + cfg.payload_power_w,
                      p_prop=p_prop)


def pv_surface_required(p_needed: float, a_pv: float) -> float:
    """Solar-cell area needed to harvest p_needed on the mean day."""
    if a_pv <= 0:
        raise ValueError("PV power density must be positive")
    return p_needed / a_pv


def battery_mass(p_needed: float, cfg: EnergyConfig) -> float:
    """Battery sized to carry p_needed through the night (Wh -> kWh -> kg)."""
    return p_needed * cfg.night_duration_h / (1000.0 * cfg.battery_energy_density_kwh_kg)


def propulsion_mass(p_prop: float, cfg: EnergyConfig) -> tuple[float, float]:
    """Total motor+propeller mass and the per-motor share."""
    m_prop = p_prop * cfg.propulsion_mass_per_w
    return m_prop, m_prop / cfg.motor_count


@dataclass(frozen=True)
class MassBreakdown:
    """Per-source masses in kg; total includes the extra-mass factor."""

    wing: float
    batteries: float
    solar_panels: float
    propulsion: float
    mppt: float
    fixed: float
    extra: float
    total: float

    @classmethod
    def build(cls, wing, batteries, solar_panels, propulsion, mppt, fixed,
              extra_mass_factor) -> "MassBreakdown":
        subtotal = wing + batteries + solar_panels + propulsion + mppt + fixed
        extra = subtotal * extra_mass_factor
        return cls(wing=wing, batteries=batteries, solar_panels=solar_panels,
                   propulsion=propulsion, mppt=mppt, fixed=fixed, extra=extra,
                   total=subtotal + extra)


@dataclass(frozen=True)
class FlightConditions:
    """Cruise state plus the sizing gust."""

    cruise_speed_m_s: float
    air_density_kg_m3: float
    dynamic_viscosity_pa_s: float
    gust_speed_m_s: float

    def __post_init__(self):
        if self.cruise_speed_m_s <= 0 or self.air_density_kg_m3 <= 0:
            raise ValueError("cruise speed and air density must be positive")
        if self.dynamic_viscosity_pa_s <= 0:
            raise ValueError("viscosity must be positive")
        if self.gust_speed_m_s < 0:
            raise ValueError("gust speed must be >= 0")

    @property
    def gust_alpha_deg(self) -> float:
        """Incidence increment of the shear gust wall."""
        return float(np.rad2deg(np.arctan2(self.gust_speed_m_s, self.cruise_speed_m_s)))

    @property
    def gust_total_speed(self) -> float:
        return float(np.hypot(self.cruise_speed_m_s, self.gust_speed_m_s))


@dataclass(frozen=True)
class StructureOptions:
    safety_factor: float = 1.5
    ks_rho: float = 50.0
    buckling_k_axial: float = 4.0
    buckling_k_shear: float | None = None  # default: 5.34 + 4 (b/a)^2


@dataclass(frozen=True)
class MdaOptions:
    tolerance: float = 1e-11
    max_iterations: int = 200
    max_twist_correction_deg: float = 30.0


@dataclass(frozen=True)
class ModelContext:
    """Everything needed to evaluate one design: catalogue, physics, settings."""

    catalogue: MaterialCatalogue
    interpolation: InterpolationMode
    flight: FlightConditions
    energy: EnergyConfig
    eco: EcoConfig
    aero: AeroOptions = AeroOptions()
    structure: StructureOptions = StructureOptions()
    mda: MdaOptions = MdaOptions()
    num_span_elements: int = 7

    def with_interpolation(self, mode: InterpolationMode) -> "ModelContext":
        return replace(self, interpolation=mode)

    def with_catalogue(self, cat: MaterialCatalogue) -> "ModelContext":
        return replace(self, catalogue=cat)


@dataclass
class MdaState:
    """Converged coupled state of one design point."""

    wing: WingModel
    layout: StructuralLayout
    mass_breakdown: MassBreakdown
    p_needed: float
    p_prop: float
    pv_area: float
    aero_cruise: AeroSolution
    aero_gust: AeroSolution
    structure_gust: StructuralResult
    twist_correction_deg: np.ndarray
    residuals: list[float] = field(default_factory=list)
    iterations: int = 0

    @property
    def weight_n(self) -> float:
        return self.mass_breakdown.total * GRAVITY

    @property
    def lift_cruise(self) -> float:
        return self.aero_cruise.lift


def _build_geometry(design: DesignVector, ctx: ModelContext) -> WingModel:
    spec = PlanformSpec(
        span=design.span,
        root_chord=design.root_chord,
        taper_ratio=design.taper,
        twist_cp=design.twist_cp,
        tc_cp=design.tc_cp,
        num_span_elements=ctx.num_span_elements,
    )
    return build_wing(spec)


def _build_layout(design: DesignVector, ctx: ModelContext) -> StructuralLayout:
    spar_mat = interpolated_material(ctx.catalogue, ctx.interpolation, design.density_spar)
    skin_mat = interpolated_material(ctx.catalogue, ctx.interpolation, design.density_skin)
    return StructuralLayout(
        t_skin_cp=design.t_skin_cp,
        t_spar_cp=design.t_spar_cp,
        skin_material=skin_mat,
        spar_material=spar_mat,
    )


def _close_mass_balance(m_wing: float, c_l: float, c_d: float,
                        flight: FlightConditions, cfg: EnergyConfig) -> float:
    """Exact total mass of the linear power/mass subsystem at frozen aero.

    Battery, PV, MPPT and propulsion masses are all linear in total mass
    through the power demand, so the fixed point M = A M + B is solved
    directly. A >= 1 means the snowball diverges for this design.
    """
    if c_l <= 0.0:
        raise AnalysisError(f"cannot sustain lift-based equilibrium with C_L={c_l:.4g}")
    v = flight.cruise_speed_m_s
    power_per_kg = GRAVITY * v * c_d / (c_l * cfg.propulsive_efficiency)
    thrust_power_per_kg = GRAVITY * v * c_d / c_l
    mass_per_w = (cfg.night_duration_h / (1000.0 * cfg.battery_energy_density_kwh_kg)
                  + cfg.pv_areal_density_kg_m2 / cfg.pv_power_per_area_w_m2
                  + cfg.mppt_mass_per_w)
    growth = (1.0 + cfg.extra_mass_factor) * (
        mass_per_w * power_per_kg + cfg.propulsion_mass_per_w * thrust_power_per_kg)
    base = (1.0 + cfg.extra_mass_factor) * (
        m_wing + cfg.fixed_mass_kg + mass_per_w * cfg.payload_power_w)
    if growth >= 1.0:
        raise MdaDivergedError(
            f"mass snowball diverges: per-kg mass growth {growth:.3f} >= 1", [])
    total = base / (1.0 - growth)
    if total <= 0.0:
        raise AnalysisError(f"mass closure produced non-positive total {total:.4g} kg")
    return total


def _mass_breakdown(total: float, m_wing: float, c_l: float, c_d: float,
                    flight: FlightConditions, cfg: EnergyConfig):
    power = power_needed(total * GRAVITY, flight.cruise_speed_m_s, c_d, c_l, cfg)
    m_bat = battery_mass(power.p_needed, cfg)
    pv_area = pv_surface_required(power.p_needed, cfg.pv_power_per_area_w_m2)
    m_pv = pv_area * cfg.pv_areal_density_kg_m2
    m_prop, _ = propulsion_mass(power.p_prop, cfg)
    m_mppt = power.p_needed * cfg.mppt_mass_per_w
    breakdown = MassBreakdown.build(
        wing=m_wing, batteries=m_bat, solar_panels=m_pv, propulsion=m_prop,
        mppt=m_mppt, fixed=cfg.fixed_mass_kg,
        extra_mass_factor=cfg.extra_mass_factor)
    return breakdown, power, pv_area


def _distributed_relief(wing: WingModel, layout: StructuralLayout,
                        breakdown: MassBreakdown) -> np.ndarray:
    """Per-element relief masses on the semi-span: structure + battery + PV.

    Batteries and solar panels are spread along the span in proportion to
    the local planform area, as the cells (and the cell-borne storage) are.
    """
    area_share = wing.elem_area / np.sum(wing.elem_area)
    distributed = 0.5 * (breakdown.batteries + breakdown.solar_panels) * area_share
    sections = element_sections(wing, layout)
    elem_struct = np.array([
        (sec.area_skin * layout.skin_material.density
         + sec.area_spar * layout.spar_material.density) * l
        for sec, l in zip(sections, wing.elem_length)
    ])
    return distributed + elem_struct


def run_mda(design: DesignVector, ctx: ModelContext,
            warm_twist_deg: np.ndarray | None = None) -> MdaState:
    """Converge the coupled weight/power/aerostructure state for one design.

    Gauss-Seidel sweeps: cruise aerodynamics at the current elastic twist,
    exact closure of the (linear) mass/power balance, then a structural
    solve at cruise loads to update the twist. The gust design point is
    evaluated once on the converged state, feeding the structural margins.
    """
    wing = _build_geometry(design, ctx)
    layout = _build_layout(design, ctx)
    _, _, m_wing = structural_masses(wing, layout)

    n = wing.num_elements
    twist_corr = (np.zeros(n) if warm_twist_deg is None
                  else np.asarray(warm_twist_deg, dtype=float).copy())
    flight = ctx.flight
    flow_cruise = FlowConditions(
        speed=flight.cruise_speed_m_s,
        air_density=flight.air_density_kg_m3,
        dynamic_viscosity=flight.dynamic_viscosity_pa_s,
        reference_area=wing.s_wing,
    )

    residuals: list[float] = []
    total_prev = None
    motor_y = design.motor_location * wing.semi_span
    converged = False
    aero_cruise = None
    breakdown = None
    for iteration in range(1, ctx.mda.max_iterations + 1):
        wing_eff = wing.with_twist_correction(twist_corr)
        aero_cruise = solve_vlm(wing_eff, flow_cruise, ctx.aero)
        total = _close_mass_balance(m_wing, aero_cruise.cl, aero_cruise.cd,
                                    flight, ctx.energy)
        breakdown, power, pv_area = _mass_breakdown(
            total, m_wing, aero_cruise.cl, aero_cruise.cd, flight, ctx.energy)

        loads = panel_loads(aero_cruise, wing_eff)
        relief = _distributed_relief(wing, layout, breakdown)
        struct_cruise = solve_fem(
            wing_eff, layout, loads,
            point_masses=[(motor_y, breakdown.propulsion / 2.0)],
            distributed_masses=relief,
        )
        twist_new = struct_cruise.twist_rotation_deg
        if np.max(np.abs(twist_new)) > ctx.mda.max_twist_correction_deg:
            raise MdaDivergedError(
                "aeroelastic twist correction exceeded "
                f"{ctx.mda.max_twist_correction_deg} deg", residuals)

        mass_res = (abs(total - total_prev) / total if total_prev is not None
                    else np.inf)
        twist_res = float(np.max(np.abs(twist_new - twist_corr)))
        residual = max(mass_res, twist_res)
        residuals.append(residual)
        twist_corr = twist_new
        total_prev = total
        if residual < ctx.mda.tolerance:
            converged = True
            break

    if not converged:
        raise MdaDivergedError(
            f"MDA did not converge in {ctx.mda.max_iterations} iterations "
            f"(last residual {residuals[-1]:.3e})", residuals)

    # gust design point on the converged state: higher incidence and speed,
    # one-way (loads do not feed back into the mass balance)
    wing_eff = wing.with_twist_correction(twist_corr)
    wing_gust = wing_eff.with_twist_offset(flight.gust_alpha_deg)
    flow_gust = FlowConditions(
        speed=flight.gust_total_speed,
        air_density=flight.air_density_kg_m3,
        dynamic_viscosity=flight.dynamic_viscosity_pa_s,
        reference_area=wing.s_wing,
    )
    aero_gust = solve_vlm(wing_gust, flow_gust, ctx.aero)
    loads_gust = panel_loads(aero_gust, wing_gust)
    relief = _distributed_relief(wing, layout, breakdown)
    structure_gust = solve_fem(
        wing_gust, layout, loads_gust,
        point_masses=[(motor_y, breakdown.propulsion / 2.0)],
        distributed_masses=relief,
    )

    power = power_needed(breakdown.total * GRAVITY, flight.cruise_speed_m_s,
                         aero_cruise.cd, aero_cruise.cl, ctx.energy)
    return MdaState(
        wing=wing,
        layout=layout,
        mass_breakdown=breakdown,
        p_needed=power.p_needed,
        p_prop=power.p_prop,
        pv_area=pv_surface_required(power.p_needed, ctx.energy.pv_power_per_area_w_m2),
        aero_cruise=aero_cruise,
        aero_gust=aero_gust,
        structure_gust=structure_gust,
        twist_correction_deg=twist_corr,
        residuals=residuals,
        iterations=len(residuals),
    )
