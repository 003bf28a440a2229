"""Material catalogue, penalized density interpolation and eco indices.

The structural material is selected through a continuous density variable.
Between two catalogue entries every property is interpolated either linearly
or with a power-law ("penalized") curve that makes off-catalogue densities
unattractive, so a gradient optimizer settles on a real material.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import CatalogueRangeError

HIGHER_IS_BETTER = "higher_is_better"
LOWER_IS_BETTER = "lower_is_better"

#: property selector -> (record attribute, direction)
PROPERTIES = {
    "E": ("youngs_modulus", HIGHER_IS_BETTER),
    "G": ("shear_modulus", HIGHER_IS_BETTER),
    "sigma_f": ("failure_strength", HIGHER_IS_BETTER),
    "co2": (None, LOWER_IS_BETTER),  # blended CO2 per kg, see co2_per_kg()
}


@dataclass(frozen=True)
class MaterialRecord:
    """One real material: mechanical properties plus CO2 footprint data.

    Units are SI throughout (Pa, kg/m^3); CO2 figures are kgCO2 per kg of
    material, split into primary production and recycling routes blended by
    the recycled fraction of current supply.
    """

    name: str
    density: float                # kg/m^3
    co2_primary: float            # kgCO2/kg
    co2_recycled: float           # kgCO2/kg
    recycled_fraction: float      # [0, 1]
    youngs_modulus: float         # Pa
    shear_modulus: float          # Pa
    failure_strength: float       # Pa

    def __post_init__(self):
        if self.density <= 0:
            raise ValueError(f"{self.name}: density must be positive")
        for field in ("youngs_modulus", "shear_modulus", "failure_strength"):
            if getattr(self, field) <= 0:
                raise ValueError(f"{self.name}: {field} must be positive")
        if self.co2_primary < 0 or self.co2_recycled < 0:
            raise ValueError(f"{self.name}: CO2 footprints must be >= 0")
        if not 0.0 <= self.recycled_fraction <= 1.0:
            raise ValueError(f"{self.name}: recycled_fraction outside [0, 1]")

    @property
    def poisson(self) -> float:
        """Isotropic Poisson ratio derived from E and G, clamped to [0, 0.5]."""
        return float(np.clip(self.youngs_modulus / (2.0 * self.shear_modulus) - 1.0, 0.0, 0.5))


def co2_per_kg(rec: MaterialRecord) -> float:
    """Blended CO2 footprint: eta_r * CO2_recycled + (1 - eta_r) * CO2_primary."""
    eta = rec.recycled_fraction
    return eta * rec.co2_recycled + (1.0 - eta) * rec.co2_primary


def ashby_indices(rec: MaterialRecord) -> tuple[float, float]:
    """Eco material indices for a compression-loaded plate.

    Returns (buckling_index, strength_index):
      buckling_index = E^(1/3) / rho / CO2_kg   (buckling-critical sizing)
      strength_index = sigma_f / rho / CO2_kg   (strength-critical sizing)
    Higher is better for both.
    """
    co2 = co2_per_kg(rec)
    buckling = rec.youngs_modulus ** (1.0 / 3.0) / rec.density / co2
    strength = rec.failure_strength / rec.density / co2
    return buckling, strength


@dataclass(frozen=True)
class MaterialCatalogue:
    """Ordered list of real materials, strictly ascending in density."""

    records: tuple[MaterialRecord, ...]

    def __post_init__(self):
        if len(self.records) < 2:
            raise ValueError("catalogue needs at least 2 materials")
        rho = [r.density for r in self.records]
        if any(b <= a for a, b in zip(rho, rho[1:])):
            raise ValueError("catalogue densities must be strictly increasing")

    @property
    def densities(self) -> np.ndarray:
        return np.array([r.density for r in self.records])

    @property
    def density_min(self) -> float:
        return self.records[0].density

    @property
    def density_max(self) -> float:
        return self.records[-1].density

    def property_values(self, prop: str) -> np.ndarray:
        attr, _ = PROPERTIES[prop]
        if attr is None:
            return np.array([co2_per_kg(r) for r in self.records])
        return np.array([getattr(r, attr) for r in self.records])

    def nearest(self, rho: float) -> MaterialRecord:
        """Catalogue record with density closest to rho."""
        idx = int(np.argmin(np.abs(self.densities - rho)))
        return self.records[idx]

    def bracket(self, rho: float) -> int:
        """Index i such that densities[i] <= rho <= densities[i+1].

        A query exactly at an interior catalogue density belongs to the
        right-hand bracket (the last record belongs to the left one).
        """
        rho_arr = self.densities
        if rho < rho_arr[0] or rho > rho_arr[-1]:
            raise CatalogueRangeError(
                f"density {rho:.6g} kg/m^3 outside catalogue range "
                f"[{rho_arr[0]:.6g}, {rho_arr[-1]:.6g}]"
            )
        i = int(np.searchsorted(rho_arr, rho, side="right")) - 1
        return min(i, len(rho_arr) - 2)

    def with_scaled_co2(self, name: str, co2_value: float) -> "MaterialCatalogue":
        """Copy of the catalogue with one material's primary CO2 replaced."""
        if not any(r.name == name for r in self.records):
            raise KeyError(f"no material named {name!r} in catalogue")
        recs = tuple(
            replace(r, co2_primary=co2_value) if r.name == name else r
            for r in self.records
        )
        return MaterialCatalogue(recs)


@dataclass(frozen=True)
class InterpolationMode:
    """Linear or power-penalized interpolation between catalogue entries."""

    kind: str           # "linear" | "penalized"
    p: float = 5.0      # penalization exponent, >= 1

    def __post_init__(self):
        if self.kind not in ("linear", "penalized"):
            raise ValueError(f"unknown interpolation kind {self.kind!r}")
        if self.kind == "penalized" and self.p < 1.0:
            raise ValueError("penalization exponent must be >= 1")

    @classmethod
    def linear(cls) -> "InterpolationMode":
        return cls("linear")

    @classmethod
    def penalized(cls, p: float = 5.0) -> "InterpolationMode":
        return cls("penalized", p)


@dataclass(frozen=True)
class InterpolatedMaterial:
    """Material properties evaluated at a (possibly off-catalogue) density."""

    density: float
    youngs_modulus: float
    shear_modulus: float
    failure_strength: float
    co2_per_kg: float

    @property
    def poisson(self) -> float:
        return float(np.clip(self.youngs_modulus / (2.0 * self.shear_modulus) - 1.0, 0.0, 0.5))


def _bracket_coeffs(cat: MaterialCatalogue, mode: InterpolationMode, rho: float,
                    prop: str, direction: str):
    """Resolve the bracket and whether penalization applies there.

    Penalization is applied only where the property improves with increasing
    density (for its direction); where a lower density already gives a better
    value the straight line is kept. The same power form handles both
    directions: for a lower-is-better property it bows the curve upward
    (worse), mirroring the higher-is-better rule.
    """
    i = cat.bracket(rho)
    rho_lo, rho_hi = cat.records[i].density, cat.records[i + 1].density
    vals = cat.property_values(prop)
    p_lo, p_hi = float(vals[i]), float(vals[i + 1])
    if mode.kind == "penalized":
        improves = p_hi > p_lo if direction == HIGHER_IS_BETTER else p_hi < p_lo
        if improves:
            return rho_lo, rho_hi, p_lo, p_hi, mode.p
    return rho_lo, rho_hi, p_lo, p_hi, 1.0


def interpolate(cat: MaterialCatalogue, mode: InterpolationMode, rho: float,
                prop: str, direction: str | None = None) -> float:
    """Interpolated property value at density rho.

    prop is one of "E", "G", "sigma_f", "co2"; direction defaults per
    property (CO2 is lower-is-better, the rest higher-is-better).
    """
    if direction is None:
        direction = PROPERTIES[prop][1]
    rho_lo, rho_hi, p_lo, p_hi, power = _bracket_coeffs(cat, mode, rho, prop, direction)
    a = (p_hi - p_lo) / (rho_hi ** power - rho_lo ** power)
    b = p_lo - a * rho_lo ** power
    return a * rho ** power + b


def material_gradient(cat: MaterialCatalogue, mode: InterpolationMode, rho: float,
                      prop: str, direction: str | None = None) -> float:
    """Analytic d(property)/d(density) of the interpolant at rho.

    At a density exactly on a catalogue entry the right-hand bracket's
    derivative is returned (left-hand for the last entry).
    """
    if direction is None:
        direction = PROPERTIES[prop][1]
    rho_lo, rho_hi, p_lo, p_hi, power = _bracket_coeffs(cat, mode, rho, prop, direction)
    a = (p_hi - p_lo) / (rho_hi ** power - rho_lo ** power)
    return a * power * rho ** (power - 1.0)


def interpolated_material(cat: MaterialCatalogue, mode: InterpolationMode,
                          rho: float) -> InterpolatedMaterial:
    """All four properties interpolated at one density."""
    return InterpolatedMaterial(
        density=rho,
        youngs_modulus=interpolate(cat, mode, rho, "E"),
        shear_modulus=interpolate(cat, mode, rho, "G"),
        failure_strength=interpolate(cat, mode, rho, "sigma_f"),
        co2_per_kg=interpolate(cat, mode, rho, "co2"),
    )


# Default catalogue. Materials 1-3 are homogenized CFRP-skinned sandwich
# panels (PS foam, balsa and cork cores). The CO2 column is treated as the
# already-blended footprint: recycled fraction 0, recycling route set equal
# to the primary route.
def _rec(name, rho, co2, e, g, sf):
    return MaterialRecord(
        name=name, density=rho, co2_primary=co2, co2_recycled=co2,
        recycled_fraction=0.0, youngs_modulus=e, shear_modulus=g,
        failure_strength=sf,
    )


DEFAULT_RECORDS = (
    _rec("material-1", 504.5, 44.9, 42.5e9, 16.3e9, 587e6),
    _rec("material-2", 529.0, 42.8, 42.5e9, 16.3e9, 237e6),
    _rec("material-3", 560.5, 40.3, 42.5e9, 16.3e9, 587e6),
    _rec("cfrp", 1565.0, 48.1, 54.9e9, 21.0e9, 670e6),
    _rec("gfrp", 1860.0, 6.18, 21.4e9, 8.14e9, 255e6),
    _rec("aluminum", 2800.0, 8.66, 72.5e9, 27.0e9, 445e6),
    _rec("steel", 7750.0, 3.28, 200.0e9, 78.5e9, 562e6),
)


def default_catalogue() -> MaterialCatalogue:
    return MaterialCatalogue(DEFAULT_RECORDS)


CSV_HEADER = [
    "name", "density", "co2_primary", "co2_recycled", "recycled_fraction",
    "youngs_modulus", "shear_modulus", "failure_strength",
]


def load_catalogue(path: str | Path) -> MaterialCatalogue:
    """Read a catalogue from comma-separated text with the canonical header."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(CSV_HEADER)}, "
                f"got {','.join(reader.fieldnames or [])}"
            )
        records = []
        for row in reader:
            records.append(MaterialRecord(
                name=row["name"],
                density=float(row["density"]),
                co2_primary=float(row["co2_primary"]),
                co2_recycled=float(row["co2_recycled"]),
                recycled_fraction=float(row["recycled_fraction"]),
                youngs_modulus=float(row["youngs_modulus"]),
                shear_modulus=float(row["shear_modulus"]),
                failure_strength=float(row["failure_strength"]),
            ))
    records.sort(key=lambda r: r.density)
    return MaterialCatalogue(tuple(records))


def save_catalogue(cat: MaterialCatalogue, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in cat.records:
            writer.writerow([
                r.name, r.density, r.co2_primary, r.co2_recycled,
                r.recycled_fraction, r.youngs_modulus, r.shear_modulus,
                r.failure_strength,
            ])
