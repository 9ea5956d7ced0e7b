"""Hazard category constants shared across the package.

The tuple order is also the deterministic tie-break order used by routing,
budget apportionment, and report rendering.
"""

from __future__ import annotations

HAZARD_CATEGORIES: tuple[str, ...] = (
    "Wildfire",
    "Storm",
    "Landslide",
    "Hurricane",
    "Flood",
    "Earthquake",
    "Tsunami",
)

HAZARD_ORDER: dict[str, int] = {name: i for i, name in enumerate(HAZARD_CATEGORIES)}


def validate_hazard(name: str) -> str:
    """Return `name` if it is a known hazard category, else raise ValueError."""
    if name not in HAZARD_ORDER:
        raise ValueError(f"unknown hazard category: {name!r}")
    return name
