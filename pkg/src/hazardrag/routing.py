"""Hazard routing: probability distributions, thresholding, budget quotas."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .hazards import HAZARD_CATEGORIES

DEFAULT_TAU = 0.2
DEFAULT_COARSE_BUDGET = 50

_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class RoutingDistribution:
    """Probability over the seven hazard categories, summing to 1."""

    probs: dict

    def __post_init__(self):
        keys = set(self.probs)
        if keys != set(HAZARD_CATEGORIES):
            raise ValueError(f"distribution must cover exactly the hazard categories, got {sorted(keys)}")
        for hazard, p in self.probs.items():
            if not isinstance(p, (int, float)) or not math.isfinite(p) or not 0.0 <= p <= 1.0:
                raise ValueError(f"probability for {hazard} out of range: {p!r}")
        total = sum(self.probs.values())
        if abs(total - 1.0) > _SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}, expected 1")

    @classmethod
    def uniform(cls) -> "RoutingDistribution":
        return cls({h: 1.0 / len(HAZARD_CATEGORIES) for h in HAZARD_CATEGORIES})

    @classmethod
    def concentrated(cls, hazard: str) -> "RoutingDistribution":
        return cls({h: 1.0 if h == hazard else 0.0 for h in HAZARD_CATEGORIES})

    def to_dict(self) -> dict:
        return {h: float(self.probs[h]) for h in HAZARD_CATEGORIES}


@dataclass(frozen=True)
class ActiveSet:
    """Hazards meeting the routing threshold, in canonical category order."""

    hazards: tuple[str, ...]
    threshold: float


@dataclass(frozen=True)
class BudgetAllocation:
    """Integer per-hazard retrieval quotas summing exactly to the budget."""

    quotas: dict
    total: int


def active_set(dist: RoutingDistribution, tau: float = DEFAULT_TAU) -> ActiveSet:
    """Hazards with probability >= tau; falls back to the argmax hazard.

    If no hazard reaches the threshold, the single most probable hazard is
    activated instead (ties broken by canonical category order), so the
    result is never empty.
    """
    hazards = tuple(h for h in HAZARD_CATEGORIES if dist.probs[h] >= tau)
    if not hazards:
        # max() keeps the first maximal element, i.e. earliest category wins ties
        hazards = (max(HAZARD_CATEGORIES, key=lambda h: dist.probs[h]),)
    return ActiveSet(hazards=hazards, threshold=tau)


def allocate_budget(
    dist: RoutingDistribution,
    active: ActiveSet,
    total: int = DEFAULT_COARSE_BUDGET,
) -> BudgetAllocation:
    """Split `total` across active hazards proportionally to probability.

    Fractional shares are rounded by largest-remainder apportionment: floor
    everything, then hand the remaining units to the largest fractional
    parts (ties by category order). Quotas always sum to `total` and each
    stays within 1 of its exact share.
    """
    if not active.hazards:
        raise ValueError("active set must be non-empty")
    if total < 0:
        raise ValueError("budget must be non-negative")
    denom = sum(dist.probs[h] for h in active.hazards)
    if denom <= 0.0:
        raise ValueError("active hazards carry zero total probability")
    shares = {h: dist.probs[h] / denom * total for h in active.hazards}
    quotas = {h: math.floor(shares[h]) for h in active.hazards}
    remaining = total - sum(quotas.values())
    by_fraction = sorted(
        active.hazards,
        key=lambda h: (-(shares[h] - quotas[h]), HAZARD_CATEGORIES.index(h)),
    )
    for h in by_fraction[:remaining]:
        quotas[h] += 1
    return BudgetAllocation(quotas=quotas, total=total)
