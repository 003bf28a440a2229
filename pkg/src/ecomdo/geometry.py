"""Planform parameterization and the shared aero/structural wing mesh.

Spanwise distributions (twist, thickness-to-chord, wall thicknesses) are
B-splines with four control points evaluated on the semi-span. The wing mesh
carries one station per structural beam element; the vortex-lattice panels
use the same stations so loads map one-to-one onto the beam.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import BSpline

from .errors import SectionGeometryError


@dataclass(frozen=True)
class BSplineMap:
    """Fixed-basis linear map from control points to station values."""

    stations: np.ndarray      # evaluation abscissae on [0, 1], ascending
    degree: int
    basis: np.ndarray         # (n_stations, n_cp)
    greville: np.ndarray      # control-point abscissae (knot averages)

    def __call__(self, cps) -> np.ndarray:
        return evaluate_bspline(self, cps)


def make_bspline_map(stations, n_cp: int = 4, degree: int = 3) -> BSplineMap:
    """Build the basis matrix for a clamped B-spline on [0, 1].

    The knot vector is open-uniform, so endpoint control points are
    interpolated exactly and the basis forms a partition of unity
    (constants reproduce exactly).
    """
    stations = np.asarray(stations, dtype=float)
    if stations.ndim != 1 or np.any(np.diff(stations) < 0):
        raise ValueError("stations must be a 1-D ascending array")
    if np.any(stations < 0) or np.any(stations > 1):
        raise ValueError("stations must lie in [0, 1]")
    if n_cp < degree + 1:
        raise ValueError(f"{n_cp} control points cannot support degree {degree}")
    n_internal = n_cp - degree - 1
    internal = np.linspace(0.0, 1.0, n_internal + 2)[1:-1]
    knots = np.concatenate([np.zeros(degree + 1), internal, np.ones(degree + 1)])
    basis = np.empty((stations.size, n_cp))
    for j in range(n_cp):
        coeff = np.zeros(n_cp)
        coeff[j] = 1.0
        basis[:, j] = BSpline(knots, coeff, degree, extrapolate=False)(stations)
    # BSpline returns nan exactly at the right end of the support; clamp it.
    at_end = stations == 1.0
    if np.any(at_end):
        basis[at_end, :] = 0.0
        basis[at_end, -1] = 1.0
    greville = np.array([knots[j + 1: j + degree + 1].mean() for j in range(n_cp)])
    return BSplineMap(stations=stations, degree=degree, basis=basis, greville=greville)


def evaluate_bspline(bmap: BSplineMap, cps) -> np.ndarray:
    """Station values basis @ cps; raises on a wrong control-point count."""
    cps = np.asarray(cps, dtype=float)
    if cps.shape != (bmap.basis.shape[1],):
        raise ValueError(
            f"expected {bmap.basis.shape[1]} control points, got shape {cps.shape}"
        )
    return bmap.basis @ cps


@dataclass(frozen=True)
class PlanformSpec:
    """Wing planform design parameters (semi-span is meshed, root mirrored)."""

    span: float                 # full span, m
    root_chord: float           # m
    taper_ratio: float          # tip chord / root chord, (0, 1]
    twist_cp: np.ndarray        # 4 control points, deg (geometric twist + AoA)
    tc_cp: np.ndarray           # 4 control points, thickness-to-chord
    num_span_elements: int = 7

    def __post_init__(self):
        if self.span <= 0 or self.root_chord <= 0:
            raise ValueError("span and root chord must be positive")
        if not 0.0 < self.taper_ratio <= 1.0:
            raise ValueError("taper ratio must be in (0, 1]")
        object.__setattr__(self, "twist_cp", np.asarray(self.twist_cp, dtype=float))
        object.__setattr__(self, "tc_cp", np.asarray(self.tc_cp, dtype=float))
        if not np.all(np.isfinite(self.twist_cp)):
            raise ValueError("twist control points must be finite")
        if self.num_span_elements < 1:
            raise ValueError("need at least one span element")


@dataclass(frozen=True)
class WingModel:
    """Shared aero/structural mesh of the semi-span (mirrored in analysis)."""

    spec: PlanformSpec
    node_y: np.ndarray          # (n+1,) spanwise node positions, m
    node_chord: np.ndarray      # (n+1,)
    elem_y: np.ndarray          # (n,) element/panel midpoints, m
    elem_chord: np.ndarray      # (n,) m
    elem_twist_deg: np.ndarray  # (n,) geometric twist + AoA, deg
    elem_tc: np.ndarray         # (n,)
    s_wing: float               # full-wing planform area, m^2
    aspect_ratio: float
    elem_spline: BSplineMap     # control points -> element midpoint values
    cp_spline: BSplineMap       # control points -> Greville-station values

    @property
    def num_elements(self) -> int:
        return self.elem_y.size

    @property
    def semi_span(self) -> float:
        return self.spec.span / 2.0

    @property
    def elem_width(self) -> np.ndarray:
        """Wingbox width per element: spar spacing fixed to half the chord."""
        return self.elem_chord / 2.0

    @property
    def elem_wing_thickness(self) -> np.ndarray:
        return self.elem_tc * self.elem_chord

    @property
    def elem_length(self) -> np.ndarray:
        return np.diff(self.node_y)

    @property
    def elem_area(self) -> np.ndarray:
        """Planform area per semi-span element (trapezoid strips)."""
        return self.elem_chord * np.diff(self.node_y)

    @property
    def quarter_chord_nodes(self) -> np.ndarray:
        """(n+1, 3) node coordinates on the straight quarter-chord line."""
        pts = np.zeros((self.node_y.size, 3))
        pts[:, 1] = self.node_y
        return pts

    @property
    def elastic_axis_offset(self) -> np.ndarray:
        """Chordwise arm from the quarter-chord line to the mid-chord box axis."""
        return 0.25 * self.elem_chord

    def chord_at(self, s) -> np.ndarray:
        """Chord at semi-span fraction(s) s in [0, 1]."""
        s = np.asarray(s, dtype=float)
        return self.spec.root_chord * (1.0 - (1.0 - self.spec.taper_ratio) * s)

    def with_twist_offset(self, delta_deg: float) -> "WingModel":
        """Uniform incidence increment (gust design point)."""
        return replace(self, elem_twist_deg=self.elem_twist_deg + delta_deg)

    def with_twist_correction(self, delta_deg: np.ndarray) -> "WingModel":
        """Per-element twist correction (aeroelastic feedback)."""
        return replace(self, elem_twist_deg=self.elem_twist_deg + np.asarray(delta_deg))


def build_wing(spec: PlanformSpec) -> WingModel:
    """Mesh the semi-span with uniform-width elements and linear taper."""
    n = spec.num_span_elements
    semi = spec.span / 2.0
    node_s = np.linspace(0.0, 1.0, n + 1)
    elem_s = 0.5 * (node_s[:-1] + node_s[1:])
    node_y = node_s * semi
    taper = spec.taper_ratio
    node_chord = spec.root_chord * (1.0 - (1.0 - taper) * node_s)
    elem_chord = spec.root_chord * (1.0 - (1.0 - taper) * elem_s)

    elem_spline = make_bspline_map(elem_s, n_cp=spec.twist_cp.size, degree=3)
    cp_spline = make_bspline_map(elem_spline.greville, n_cp=spec.twist_cp.size, degree=3)
    twist = evaluate_bspline(elem_spline, spec.twist_cp)
    tc = evaluate_bspline(elem_spline, spec.tc_cp)

    s_wing = 2.0 * float(np.sum(elem_chord * np.diff(node_y)))
    return WingModel(
        spec=spec,
        node_y=node_y,
        node_chord=node_chord,
        elem_y=elem_s * semi,
        elem_chord=elem_chord,
        elem_twist_deg=twist,
        elem_tc=tc,
        s_wing=s_wing,
        aspect_ratio=spec.span ** 2 / s_wing,
        elem_spline=elem_spline,
        cp_spline=cp_spline,
    )


@dataclass(frozen=True)
class WingboxSection:
    """Hollow-rectangle wingbox cross-section split by wall group.

    Skins are the full-width top/bottom plates; the two spar webs fill the
    height between them. Per-wall areas and second moments let the beam
    model weight each wall by its own material stiffness.
    """

    width: float            # outer box width b = chord/2, m
    height: float           # outer box height = wing thickness, m
    t_skin: float
    t_spar: float
    area_skin: float
    area_spar: float
    i_flap_skin: float      # about the chordwise axis (vertical bending)
    i_flap_spar: float
    i_lag_skin: float       # about the vertical axis (in-plane bending)
    i_lag_spar: float
    enclosed_area: float    # mid-line cell area for Bredt torsion
    skin_midline: float     # mid-line length running through the skins
    spar_midline: float

    @property
    def area(self) -> float:
        return self.area_skin + self.area_spar

    @property
    def i_flap(self) -> float:
        return self.i_flap_skin + self.i_flap_spar

    @property
    def i_lag(self) -> float:
        return self.i_lag_skin + self.i_lag_spar

    @property
    def torsion_constant(self) -> float:
        """Single-material Bredt constant 4 A^2 / integral(ds/t)."""
        return 4.0 * self.enclosed_area ** 2 / (
            self.skin_midline / self.t_skin + self.spar_midline / self.t_spar
        )

    @property
    def web_height(self) -> float:
        return self.height - 2.0 * self.t_skin


def wingbox_section(chord: float, tc: float, t_skin: float, t_spar: float) -> WingboxSection:
    """Section properties of the hollow-rectangle wingbox.

    Raises SectionGeometryError when the walls overlap: the two skins must
    fit inside the wing thickness and the two spars inside the box width.
    """
    b = chord / 2.0
    h = tc * chord
    skin_margin = h - 2.0 * t_skin
    spar_margin = b - 2.0 * t_spar
    if skin_margin <= 0.0:
        raise SectionGeometryError(
            f"skins overlap: 2*t_skin={2 * t_skin:.5g} m >= wing thickness {h:.5g} m",
            margin=skin_margin,
        )
    if spar_margin <= 0.0:
        raise SectionGeometryError(
            f"spars overlap: 2*t_spar={2 * t_spar:.5g} m >= box width {b:.5g} m",
            margin=spar_margin,
        )
    if t_skin <= 0.0 or t_spar <= 0.0:
        raise SectionGeometryError("wall thicknesses must be positive",
                                   margin=min(t_skin, t_spar))
    hw = h - 2.0 * t_skin
    z_skin = (h - t_skin) / 2.0
    x_spar = (b - t_spar) / 2.0
    return WingboxSection(
        width=b,
        height=h,
        t_skin=t_skin,
        t_spar=t_spar,
        area_skin=2.0 * b * t_skin,
        area_spar=2.0 * t_spar * hw,
        i_flap_skin=2.0 * (b * t_skin ** 3 / 12.0 + b * t_skin * z_skin ** 2),
        i_flap_spar=2.0 * (t_spar * hw ** 3 / 12.0),
        i_lag_skin=2.0 * (t_skin * b ** 3 / 12.0),
        i_lag_spar=2.0 * (hw * t_spar ** 3 / 12.0 + hw * t_spar * x_spar ** 2),
        enclosed_area=(b - t_spar) * (h - t_skin),
        skin_midline=2.0 * (b - t_spar),
        spar_midline=2.0 * (h - t_skin),
    )
