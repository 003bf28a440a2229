"""Vortex-lattice aerodynamics on the shared wing mesh.

One horseshoe vortex per spanwise panel: the bound segment lies on the
quarter-chord line, the trailing legs run downstream to infinity, and flow
tangency is enforced at the three-quarter-chord control points. Panel forces
come from the Kutta-Joukowski product with the locally induced velocity, so
induced drag is captured in the near field. A flat-plate turbulent friction
estimate and a constant profile-drag offset complete the drag build-up.

Axes: x downstream (freestream), y starboard along the span, z up. Local
incidence (twist + angle of attack) tilts the panel normals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError
from .geometry import WingModel

_FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class FlowConditions:
    """Freestream state; reference area normalizes the force coefficients."""

    speed: float               # m/s
    air_density: float         # kg/m^3
    dynamic_viscosity: float   # Pa s
    reference_area: float      # m^2

    def __post_init__(self):
        if self.speed <= 0 or self.air_density <= 0:
            raise ValueError("speed and air density must be positive")
        if self.dynamic_viscosity <= 0 or self.reference_area <= 0:
            raise ValueError("viscosity and reference area must be positive")

    @property
    def dynamic_pressure(self) -> float:
        return 0.5 * self.air_density * self.speed ** 2

    def reynolds(self, chord: float) -> float:
        return self.air_density * self.speed * chord / self.dynamic_viscosity


@dataclass(frozen=True)
class AeroOptions:
    """Drag build-up knobs beyond the inviscid lattice solution."""

    cd0: float = 0.008                 # profile-drag offset (airfoil drag bucket)
    friction_form_factor: float = 1.1
    include_friction: bool = True


@dataclass(frozen=True)
class AeroSolution:
    """Converged lattice state plus force summary (full span, left to right)."""

    circulation: np.ndarray    # (2n,) m^2/s
    panel_forces: np.ndarray   # (2n, 3) N
    panel_y: np.ndarray        # (2n,) panel midpoints, m
    n_semi: int                # panels per half wing; right half is [n_semi:]
    cl: float
    cd: float                  # induced + friction + profile offset
    cdi: float
    cdf: float
    cd0: float
    lift: float                # N
    drag: float                # N
    dynamic_pressure: float
    s_ref: float
    reynolds_root: float
    reynolds_mean: float


def _segment_velocity(points: np.ndarray, a: np.ndarray, b: np.ndarray,
                      cutoff: float) -> np.ndarray:
    """Unit-circulation velocity of finite vortex segments a->b at points.

    points (M,3), a/b (N,3) -> (M,N,3). Points on a segment's axis get zero.
    """
    r1 = points[:, None, :] - a[None, :, :]
    r2 = points[:, None, :] - b[None, :, :]
    r0 = (b - a)[None, :, :]
    cr = np.cross(r1, r2)
    cr2 = np.einsum("mnk,mnk->mn", cr, cr)
    n1 = np.linalg.norm(r1, axis=2)
    n2 = np.linalg.norm(r2, axis=2)
    num = (np.einsum("mnk,mnk->mn", r0, r1) / np.where(n1 > 0, n1, 1.0)
           - np.einsum("mnk,mnk->mn", r0, r2) / np.where(n2 > 0, n2, 1.0))
    denom = np.where(cr2 > cutoff, cr2, np.inf)
    return cr * (num / (_FOUR_PI * denom))[:, :, None]


def _semi_infinite_velocity(points: np.ndarray, start: np.ndarray,
                            direction: np.ndarray, cutoff: float) -> np.ndarray:
    """Unit-circulation velocity of semi-infinite vortices from start along direction."""
    d = points[:, None, :] - start[None, :, :]
    w = np.cross(direction[None, None, :], d)
    w2 = np.einsum("mnk,mnk->mn", w, w)
    nd = np.linalg.norm(d, axis=2)
    fac = 1.0 + np.einsum("k,mnk->mn", direction, d) / np.where(nd > 0, nd, 1.0)
    denom = np.where(w2 > cutoff, w2, np.inf)
    return w * (fac / (_FOUR_PI * denom))[:, :, None]


def _horseshoe_velocity(points: np.ndarray, a: np.ndarray, b: np.ndarray,
                        cutoff: float) -> np.ndarray:
    """(M,N,3) induced velocity per unit circulation of full horseshoes."""
    xhat = np.array([1.0, 0.0, 0.0])
    v = _segment_velocity(points, a, b, cutoff)
    v += _semi_infinite_velocity(points, b, xhat, cutoff)
    v -= _semi_infinite_velocity(points, a, xhat, cutoff)
    return v


def _full_span_lattice(wing: WingModel):
    """Mirror the semi-span mesh into a full-span lattice, left tip first."""
    node_y = np.concatenate([-wing.node_y[::-1], wing.node_y[1:]])
    node_chord = np.concatenate([wing.node_chord[::-1], wing.node_chord[1:]])
    elem_chord = np.concatenate([wing.elem_chord[::-1], wing.elem_chord])
    twist = np.concatenate([wing.elem_twist_deg[::-1], wing.elem_twist_deg])
    return node_y, node_chord, elem_chord, twist


def solve_vlm(wing: WingModel, flow: FlowConditions,
              opts: AeroOptions = AeroOptions()) -> AeroSolution:
    """Solve the lattice for the mirrored full span."""
    node_y, node_chord, elem_chord, twist_deg = _full_span_lattice(wing)
    n_panels = elem_chord.size
    span = wing.spec.span
    cutoff = (1e-9 * max(span, 1.0)) ** 2

    # Bound vortex endpoints on the quarter-chord line (x = 0), left to right.
    a = np.column_stack([np.zeros(n_panels), node_y[:-1], np.zeros(n_panels)])
    b = np.column_stack([np.zeros(n_panels), node_y[1:], np.zeros(n_panels)])
    mid = 0.5 * (a + b)
    panel_y = mid[:, 1]
    width = np.diff(node_y)

    # Control points at the local three-quarter-chord.
    cp = mid.copy()
    cp[:, 0] = 0.5 * elem_chord

    alpha = np.deg2rad(twist_deg)
    normals = np.column_stack([np.sin(alpha), np.zeros(n_panels), np.cos(alpha)])

    v_inf = np.array([flow.speed, 0.0, 0.0])
    vel_cp = _horseshoe_velocity(cp, a, b, cutoff)
    aic = np.einsum("mnk,mk->mn", vel_cp, normals)
    rhs = -normals @ v_inf
    try:
        gamma = np.linalg.solve(aic, rhs)
    except np.linalg.LinAlgError as exc:
        raise AnalysisError(f"singular influence matrix: {exc}") from exc
    if not np.all(np.isfinite(gamma)):
        raise AnalysisError("vortex-lattice solution is not finite")

    # Kutta-Joukowski force with the velocity induced at the bound midpoints.
    vel_mid = _horseshoe_velocity(mid, a, b, cutoff)
    v_local = v_inf[None, :] + np.einsum("mnk,n->mk", vel_mid, gamma)
    seg = b - a
    forces = flow.air_density * gamma[:, None] * np.cross(v_local, seg)

    q = flow.dynamic_pressure
    s_ref = flow.reference_area
    lift = float(forces[:, 2].sum())
    drag_induced = float(forces[:, 0].sum())
    cl = lift / (q * s_ref)
    cdi = drag_induced / (q * s_ref)

    if opts.include_friction:
        re_panel = flow.reynolds(elem_chord)
        cf = 0.074 / re_panel ** 0.2
        # wetted area ~ both sides of each strip, with a simple form factor
        drag_friction = float(q * opts.friction_form_factor
                              * np.sum(cf * 2.0 * elem_chord * width))
    else:
        drag_friction = 0.0
    cdf = drag_friction / (q * s_ref)

    cd = cdi + cdf + opts.cd0
    return AeroSolution(
        circulation=gamma,
        panel_forces=forces,
        panel_y=panel_y,
        n_semi=wing.num_elements,
        cl=cl,
        cd=cd,
        cdi=cdi,
        cdf=cdf,
        cd0=opts.cd0,
        lift=lift,
        drag=cd * q * s_ref,
        dynamic_pressure=q,
        s_ref=s_ref,
        reynolds_root=flow.reynolds(wing.spec.root_chord),
        reynolds_mean=flow.reynolds(float(np.mean(wing.elem_chord))),
    )


def panel_loads(sol: AeroSolution, wing: WingModel, load_factor: float = 1.0) -> np.ndarray:
    """Transfer right-half panel forces to beam nodal loads.

    Returns (n_nodes, 6) loads [Fx, Fy, Fz, Mx, My, Mz]. Each panel force is
    split evenly between its two edge nodes, which conserves both the total
    force and the root bending moment exactly. Lift acting on the
    quarter-chord line, ahead of the mid-chord elastic axis, adds a nose-up
    torque about the span axis.
    """
    n = wing.num_elements
    if sol.n_semi != n:
        raise AnalysisError(
            f"aero solution has {sol.n_semi} semi-span panels, wing has {n}")
    right = sol.panel_forces[sol.n_semi:, :] * load_factor
    arm = wing.elastic_axis_offset  # quarter-chord line sits 0.25c ahead of the box
    torque = right[:, 2] * arm
    loads = np.zeros((n + 1, 6))
    for k in range(n):
        loads[k, 0:3] += 0.5 * right[k]
        loads[k + 1, 0:3] += 0.5 * right[k]
        loads[k, 4] += 0.5 * torque[k]
        loads[k + 1, 4] += 0.5 * torque[k]
    return loads
