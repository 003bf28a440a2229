"""Wingbox beam finite elements, stresses and aggregated design constraints.

The semi-span is a root-clamped cantilever of 6-DOF space-beam elements whose
cross-sections are the hollow-rectangle wingboxes. Skins and spars may be
different materials; bending/axial/torsion stiffnesses are modulus-weighted
wall by wall. Stress recovery feeds a von Mises failure margin on the spars
and a combined compression/shear buckling margin on the top skin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AnalysisError
from .geometry import WingModel, WingboxSection, evaluate_bspline, wingbox_section
from .materials import InterpolatedMaterial

GRAVITY = 9.80665  # m/s^2


@dataclass(frozen=True)
class StructuralLayout:
    """Wall-thickness control points plus the two wall materials."""

    t_skin_cp: np.ndarray
    t_spar_cp: np.ndarray
    skin_material: InterpolatedMaterial
    spar_material: InterpolatedMaterial

    def __post_init__(self):
        object.__setattr__(self, "t_skin_cp", np.asarray(self.t_skin_cp, dtype=float))
        object.__setattr__(self, "t_spar_cp", np.asarray(self.t_spar_cp, dtype=float))


@dataclass(frozen=True)
class BucklingParams:
    """Flat-plate buckling inputs for one top-skin panel."""

    k_c: float     # axial-compression buckling coefficient
    k_s: float     # shear buckling coefficient
    b: float       # panel width (spar spacing), m
    d_flex: float  # plate flexural stiffness E t^3 / 12(1-nu^2), N m

    def __post_init__(self):
        if min(self.k_c, self.k_s, self.b, self.d_flex) <= 0:
            raise ValueError("buckling parameters must be positive")


@dataclass
class StructuralResult:
    """Displacements, element stresses and structural masses."""

    displacements: np.ndarray       # (n_nodes, 6) [ux,uy,uz,rx,ry,rz] global
    sigma_vm_spar: np.ndarray       # (n,) Pa, worst spar-wall von Mises
    sigma_skin_axial: np.ndarray    # (n,) Pa, top-skin compression (+ = compressive)
    tau_skin: np.ndarray            # (n,) Pa, torsion shear in top skin
    shear_force: np.ndarray         # (n,) N, vertical shear at inboard end
    torque: np.ndarray              # (n,) N m
    moment_flap: np.ndarray         # (n,) N m
    t_skin_elem: np.ndarray
    t_spar_elem: np.ndarray
    m_spar: float
    m_skin: float
    wing_mass: float
    ks_failure: float | None = None
    ks_buckling: float | None = None

    @property
    def twist_rotation_deg(self) -> np.ndarray:
        """Elastic twist at element midpoints (mean of end-node span rotations)."""
        ry = self.displacements[:, 4]
        return np.rad2deg(0.5 * (ry[:-1] + ry[1:]))


def ks_aggregate(g: Sequence[float] | np.ndarray, rho_ks: float) -> float:
    """Kreisselmeier-Steinhauser smooth maximum, a conservative bound on max(g)."""
    g = np.asarray(g, dtype=float)
    if g.size == 0:
        raise ValueError("cannot aggregate an empty constraint vector")
    m = float(np.max(g))
    return m + float(np.log(np.sum(np.exp(rho_ks * (g - m))))) / rho_ks


def layout_thicknesses(wing: WingModel, layout: StructuralLayout):
    """Wall thicknesses at element midpoints from the spline control points."""
    t_skin = evaluate_bspline(wing.elem_spline, layout.t_skin_cp)
    t_spar = evaluate_bspline(wing.elem_spline, layout.t_spar_cp)
    return t_skin, t_spar


def element_sections(wing: WingModel, layout: StructuralLayout) -> list[WingboxSection]:
    t_skin, t_spar = layout_thicknesses(wing, layout)
    return [
        wingbox_section(wing.elem_chord[e], wing.elem_tc[e], t_skin[e], t_spar[e])
        for e in range(wing.num_elements)
    ]


def structural_masses(wing: WingModel, layout: StructuralLayout,
                      sections: list[WingboxSection] | None = None):
    """Spar, skin and total wing mass for the full (mirrored) wing."""
    if sections is None:
        sections = element_sections(wing, layout)
    lengths = wing.elem_length
    m_skin = 2.0 * layout.skin_material.density * float(
        sum(sec.area_skin * l for sec, l in zip(sections, lengths)))
    m_spar = 2.0 * layout.spar_material.density * float(
        sum(sec.area_spar * l for sec, l in zip(sections, lengths)))
    return m_spar, m_skin, m_spar + m_skin


def _beam_stiffness_local(ea, ei_y, ei_z, gj, length):
    """Standard 12x12 space-beam stiffness, local x along the element axis."""
    l = length
    k = np.zeros((12, 12))
    a = ea / l
    t = gj / l
    az, bz = 12 * ei_z / l ** 3, 6 * ei_z / l ** 2
    cz, dz = 4 * ei_z / l, 2 * ei_z / l
    ay, by = 12 * ei_y / l ** 3, 6 * ei_y / l ** 2
    cy, dy = 4 * ei_y / l, 2 * ei_y / l

    k[0, 0] = k[6, 6] = a
    k[0, 6] = k[6, 0] = -a
    k[3, 3] = k[9, 9] = t
    k[3, 9] = k[9, 3] = -t
    # bending in the local x-y plane (displacement y, rotation z)
    for (i, j), val in {
        (1, 1): az, (1, 5): bz, (1, 7): -az, (1, 11): bz,
        (5, 5): cz, (5, 7): -bz, (5, 11): dz,
        (7, 7): az, (7, 11): -bz,
        (11, 11): cz,
    }.items():
        k[i, j] = val
        k[j, i] = val
    # bending in the local x-z plane (displacement z, rotation y)
    for (i, j), val in {
        (2, 2): ay, (2, 4): -by, (2, 8): -ay, (2, 10): -by,
        (4, 4): cy, (4, 8): by, (4, 10): dy,
        (8, 8): ay, (8, 10): by,
        (10, 10): cy,
    }.items():
        k[i, j] = val
        k[j, i] = val
    return k


# Local frame: x along the span (global y), y up (global z), z downstream
# (global x). Rows of _LAMBDA are the local axes in global coordinates.
_LAMBDA = np.array([
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0],
])
_T12 = np.kron(np.eye(4), _LAMBDA)


def _element_stiffness(sec: WingboxSection, skin: InterpolatedMaterial,
                       spar: InterpolatedMaterial, length: float):
    """Global-frame stiffness and the local matrix used for force recovery."""
    e_sk, e_sp = skin.youngs_modulus, spar.youngs_modulus
    g_sk, g_sp = skin.shear_modulus, spar.shear_modulus
    ea = e_sk * sec.area_skin + e_sp * sec.area_spar
    ei_flap = e_sk * sec.i_flap_skin + e_sp * sec.i_flap_spar
    ei_lag = e_sk * sec.i_lag_skin + e_sp * sec.i_lag_spar
    gj = 4.0 * sec.enclosed_area ** 2 / (
        sec.skin_midline / (g_sk * sec.t_skin) + sec.spar_midline / (g_sp * sec.t_spar)
    )
    # local y = vertical -> flapwise bending uses the local-z second moment
    k_local = _beam_stiffness_local(ea, ei_y=ei_lag, ei_z=ei_flap, gj=gj, length=length)
    k_global = _T12.T @ k_local @ _T12
    return k_global, k_local, ei_flap


def solve_fem(wing: WingModel, layout: StructuralLayout,
              nodal_loads: np.ndarray,
              point_masses: Sequence[tuple[float, float]] = (),
              distributed_masses: np.ndarray | None = None,
              gravity_load_factor: float = 1.0) -> StructuralResult:
    """Solve the clamped semi-span beam under aero loads and inertial relief.

    nodal_loads is (n_nodes, 6) in the global frame. distributed_masses (kg
    per element) and point_masses [(y, kg), ...] hang on the wing and pull
    down with gravity_load_factor * g, relieving the aerodynamic bending.
    """
    n = wing.num_elements
    n_nodes = n + 1
    sections = element_sections(wing, layout)
    t_skin, t_spar = layout_thicknesses(wing, layout)
    lengths = wing.elem_length

    ndof = 6 * n_nodes
    k_assembled = np.zeros((ndof, ndof))
    k_locals = []
    ei_flaps = []
    for e in range(n):
        kg, kl, ei = _element_stiffness(sections[e], layout.skin_material,
                                        layout.spar_material, lengths[e])
        k_locals.append(kl)
        ei_flaps.append(ei)
        sl = slice(6 * e, 6 * e + 12)
        k_assembled[sl, sl] += kg

    f = np.asarray(nodal_loads, dtype=float).reshape(ndof).copy()
    w_relief = gravity_load_factor * GRAVITY
    if distributed_masses is not None:
        dm = np.asarray(distributed_masses, dtype=float)
        if dm.shape != (n,):
            raise AnalysisError(f"distributed_masses must have shape ({n},)")
        for e in range(n):
            f[6 * e + 2] -= 0.5 * dm[e] * w_relief
            f[6 * (e + 1) + 2] -= 0.5 * dm[e] * w_relief
    for y_p, mass in point_masses:
        y_clamped = min(max(y_p, wing.node_y[0]), wing.node_y[-1])
        e = min(int(np.searchsorted(wing.node_y, y_clamped, side="right")) - 1, n - 1)
        s = (y_clamped - wing.node_y[e]) / lengths[e]
        f[6 * e + 2] -= (1.0 - s) * mass * w_relief
        f[6 * (e + 1) + 2] -= s * mass * w_relief

    # clamp the root node (symmetry plane)
    free = np.arange(6, ndof)
    try:
        u_free = np.linalg.solve(k_assembled[np.ix_(free, free)], f[free])
    except np.linalg.LinAlgError as exc:
        raise AnalysisError(f"singular stiffness matrix: {exc}") from exc
    if not np.all(np.isfinite(u_free)):
        raise AnalysisError("structural solution is not finite")
    u = np.zeros(ndof)
    u[free] = u_free

    sigma_vm = np.zeros(n)
    sigma_skin = np.zeros(n)
    tau_skin = np.zeros(n)
    shear = np.zeros(n)
    torque = np.zeros(n)
    m_flap = np.zeros(n)
    e_sk = layout.skin_material.youngs_modulus
    e_sp = layout.spar_material.youngs_modulus
    for e in range(n):
        u_elem = u[6 * e: 6 * e + 12]
        f_local = k_locals[e] @ (_T12 @ u_elem)
        # internal actions at the inboard end; signs give positive shear,
        # nose-up torque and sagging-up flap moment for an up-load cantilever
        v_e = -f_local[1]
        t_e = -f_local[3]
        m_e = -f_local[5]
        sec = sections[e]
        kappa = m_e / ei_flaps[e]
        sigma_skin[e] = e_sk * kappa * (sec.height - sec.t_skin) / 2.0
        tau_skin[e] = t_e / (2.0 * sec.enclosed_area * sec.t_skin)
        sigma_spar = e_sp * kappa * (sec.height / 2.0 - sec.t_skin)
        tau_spar = (v_e / (2.0 * sec.t_spar * sec.web_height)
                    + t_e / (2.0 * sec.enclosed_area * sec.t_spar))
        sigma_vm[e] = np.sqrt(sigma_spar ** 2 + 3.0 * tau_spar ** 2)
        shear[e], torque[e], m_flap[e] = v_e, t_e, m_e

    m_spar_total, m_skin_total, wing_mass = structural_masses(wing, layout, sections)
    return StructuralResult(
        displacements=u.reshape(n_nodes, 6),
        sigma_vm_spar=sigma_vm,
        sigma_skin_axial=sigma_skin,
        tau_skin=tau_skin,
        shear_force=shear,
        torque=torque,
        moment_flap=m_flap,
        t_skin_elem=t_skin,
        t_spar_elem=t_spar,
        m_spar=m_spar_total,
        m_skin=m_skin_total,
        wing_mass=wing_mass,
    )


def make_buckling_params(wing: WingModel, layout: StructuralLayout,
                         k_c: float = 4.0,
                         k_s: float | None = None) -> list[BucklingParams]:
    """Per-element plate-buckling parameters for the top skin.

    Defaults are closed-form simply-supported values: k_c = 4 for long plates
    in compression and k_s = 5.34 + 4 (b/a)^2 in shear, with a the element
    span length, standing in for the handbook charts.
    """
    t_skin, _ = layout_thicknesses(wing, layout)
    nu = layout.skin_material.poisson
    e_sk = layout.skin_material.youngs_modulus
    params = []
    for e in range(wing.num_elements):
        b = wing.elem_width[e]
        a = wing.elem_length[e]
        d_flex = e_sk * t_skin[e] ** 3 / (12.0 * (1.0 - nu ** 2))
        ks_val = k_s if k_s is not None else 5.34 + 4.0 * (b / a) ** 2
        params.append(BucklingParams(k_c=k_c, k_s=ks_val, b=b, d_flex=d_flex))
    return params


def buckling_constraint(result: StructuralResult, params: Sequence[BucklingParams],
                        rho_ks: float = 50.0):
    """Parabolic interaction margin R_s^2 + R_c - 1 per element, and its KS.

    Critical stresses follow the plate form sigma_c = k_c pi^2 D / (b^2 t);
    negative margins are feasible.
    """
    n = result.sigma_skin_axial.size
    if len(params) != n:
        raise AnalysisError("one BucklingParams entry per element required")
    values = np.zeros(n)
    for e, par in enumerate(params):
        t = result.t_skin_elem[e]
        sigma_c = par.k_c * np.pi ** 2 * par.d_flex / (par.b ** 2 * t)
        tau_c = par.k_s * np.pi ** 2 * par.d_flex / (par.b ** 2 * t)
        if sigma_c <= 0 or tau_c <= 0:
            raise AnalysisError("non-positive critical buckling stress")
        r_c = result.sigma_skin_axial[e] / sigma_c
        r_s = result.tau_skin[e] / tau_c
        values[e] = r_s ** 2 + r_c - 1.0
    return values, ks_aggregate(values, rho_ks)


def failure_constraint(result: StructuralResult, sigma_f: float,
                       safety_factor: float = 1.5, rho_ks: float = 50.0):
    """Von Mises failure margin sigma_vm / (sigma_f / SF) - 1 per element, and KS."""
    allowable = sigma_f / safety_factor
    values = result.sigma_vm_spar / allowable - 1.0
    return values, ks_aggregate(values, rho_ks)
