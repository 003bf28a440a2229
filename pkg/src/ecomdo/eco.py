"""Lifecycle CO2 accounting: structure, solar panels and batteries.

The drone burns no fuel, so the footprint is dominated by what it is built
from: structural material per kilogram, photovoltaic cells per watt of
required power, and batteries per watt-hour of overnight storage. Material
processing is excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

from .materials import InterpolatedMaterial


@dataclass(frozen=True)
class EcoConfig:
    co2_per_w: float    # kgCO2 per W of PV capacity
    co2_per_wh: float   # kgCO2 per Wh of battery capacity

    def __post_init__(self):
        if self.co2_per_w < 0 or self.co2_per_wh < 0:
            raise ValueError("CO2 factors must be >= 0")


@dataclass(frozen=True)
class CO2Breakdown:
    structure: float
    pv: float
    battery: float

    @property
    def total(self) -> float:
        return self.structure + self.pv + self.battery


def co2_structure(m_spar: float, m_skin: float,
                  spar_mat: InterpolatedMaterial,
                  skin_mat: InterpolatedMaterial) -> float:
    """Structure footprint: each wall mass times its material's blended CO2."""
    return m_spar * spar_mat.co2_per_kg + m_skin * skin_mat.co2_per_kg


def co2_pv(p_needed: float, cfg: EcoConfig) -> float:
    return p_needed * cfg.co2_per_w


def co2_battery(p_needed: float, t_night_h: float, cfg: EcoConfig) -> float:
    """Battery footprint scales with capacity: power times night duration (Wh)."""
    return p_needed * t_night_h * cfg.co2_per_wh


def co2_total(m_spar: float, m_skin: float,
              spar_mat: InterpolatedMaterial, skin_mat: InterpolatedMaterial,
              p_needed: float, t_night_h: float, cfg: EcoConfig) -> CO2Breakdown:
    """Assemble the three-term lifecycle breakdown (the CO2-mode objective)."""
    return CO2Breakdown(
        structure=co2_structure(m_spar, m_skin, spar_mat, skin_mat),
        pv=co2_pv(p_needed, cfg),
        battery=co2_battery(p_needed, t_night_h, cfg),
    )
