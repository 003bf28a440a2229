"""The optimization design vector and its canonical bounds.

Layout (22 components): spar density, skin density, 4 twist control points,
4 skin-thickness control points, 4 spar-thickness control points, 4
thickness-to-chord control points, span, root chord, taper ratio and the
motor spanwise location as a fraction of the semi-span.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_CP = 4
SIZE = 2 + 4 * N_CP + 4

#: slices into the flat design array
DENSITY = slice(0, 2)
TWIST = slice(2, 6)
T_SKIN = slice(6, 10)
T_SPAR = slice(10, 14)
TC = slice(14, 18)
SPAN = 18
ROOT_CHORD = 19
TAPER = 20
MOTOR = 21

#: canonical design-space bounds
BOUNDS = {
    "density": (400.0, 8000.0),       # kg/m^3
    "twist_cp": (-15.0, 15.0),        # deg
    "t_skin_cp": (0.001, 0.1),        # m
    "t_spar_cp": (0.001, 0.1),        # m
    "tc_cp": (0.01, 0.4),
    "span": (1.0, 1000.0),            # m
    "root_chord": (1.4, 500.0),       # m
    "taper": (0.3, 0.99),
    "motor_location": (0.0, 1.0),
}

#: per-component magnitudes used to size finite-difference steps
TYPICAL = {
    "density": 1000.0, "twist_cp": 5.0, "t_skin_cp": 0.005,
    "t_spar_cp": 0.005, "tc_cp": 0.1, "span": 30.0, "root_chord": 1.0,
    "taper": 0.3, "motor_location": 0.3,
}


def _per_component(table: dict, pick) -> np.ndarray:
    out = np.empty(SIZE)
    out[DENSITY] = pick(table["density"])
    out[TWIST] = pick(table["twist_cp"])
    out[T_SKIN] = pick(table["t_skin_cp"])
    out[T_SPAR] = pick(table["t_spar_cp"])
    out[TC] = pick(table["tc_cp"])
    out[SPAN] = pick(table["span"])
    out[ROOT_CHORD] = pick(table["root_chord"])
    out[TAPER] = pick(table["taper"])
    out[MOTOR] = pick(table["motor_location"])
    return out


def lower_bounds() -> np.ndarray:
    return _per_component(BOUNDS, lambda lohi: lohi[0])


def upper_bounds() -> np.ndarray:
    return _per_component(BOUNDS, lambda lohi: lohi[1])


def typical_scales() -> np.ndarray:
    return _per_component(TYPICAL, lambda v: v)


COMPONENT_NAMES = (
    ["density_spar", "density_skin"]
    + [f"twist_cp{i}" for i in range(N_CP)]
    + [f"t_skin_cp{i}" for i in range(N_CP)]
    + [f"t_spar_cp{i}" for i in range(N_CP)]
    + [f"tc_cp{i}" for i in range(N_CP)]
    + ["span", "root_chord", "taper", "motor_location"]
)


@dataclass(frozen=True)
class DesignVector:
    """One point in the design space; density order is (spar, skin)."""

    density: np.ndarray       # (2,) spar, skin
    twist_cp: np.ndarray      # (4,) deg
    t_skin_cp: np.ndarray     # (4,) m
    t_spar_cp: np.ndarray     # (4,) m
    tc_cp: np.ndarray         # (4,)
    span: float
    root_chord: float
    taper: float
    motor_location: float

    def __post_init__(self):
        for name in ("density", "twist_cp", "t_skin_cp", "t_spar_cp", "tc_cp"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.density.shape != (2,):
            raise ValueError("density must hold exactly (spar, skin)")
        for name in ("twist_cp", "t_skin_cp", "t_spar_cp", "tc_cp"):
            if getattr(self, name).shape != (N_CP,):
                raise ValueError(f"{name} must have {N_CP} control points")

    @property
    def density_spar(self) -> float:
        return float(self.density[0])

    @property
    def density_skin(self) -> float:
        return float(self.density[1])

    def to_array(self) -> np.ndarray:
        x = np.empty(SIZE)
        x[DENSITY] = self.density
        x[TWIST] = self.twist_cp
        x[T_SKIN] = self.t_skin_cp
        x[T_SPAR] = self.t_spar_cp
        x[TC] = self.tc_cp
        x[SPAN] = self.span
        x[ROOT_CHORD] = self.root_chord
        x[TAPER] = self.taper
        x[MOTOR] = self.motor_location
        return x

    @classmethod
    def from_array(cls, x) -> "DesignVector":
        x = np.asarray(x, dtype=float)
        if x.shape != (SIZE,):
            raise ValueError(f"design array must have shape ({SIZE},)")
        return cls(
            density=x[DENSITY].copy(),
            twist_cp=x[TWIST].copy(),
            t_skin_cp=x[T_SKIN].copy(),
            t_spar_cp=x[T_SPAR].copy(),
            tc_cp=x[TC].copy(),
            span=float(x[SPAN]),
            root_chord=float(x[ROOT_CHORD]),
            taper=float(x[TAPER]),
            motor_location=float(x[MOTOR]),
        )

    def within_bounds(self, atol: float = 1e-9) -> bool:
        x = self.to_array()
        return bool(np.all(x >= lower_bounds() - atol)
                    and np.all(x <= upper_bounds() + atol))

    def replace_densities(self, spar: float, skin: float) -> "DesignVector":
        x = self.to_array()
        x[DENSITY] = (spar, skin)
        return DesignVector.from_array(x)
