"""Threshold filtering and largest-remainder budget apportionment."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hazardrag.hazards import HAZARD_CATEGORIES
from hazardrag.routing import (
    ActiveSet,
    RoutingDistribution,
    active_set,
    allocate_budget,
)

# The worked routing example: Hurricane and Flood clear the 0.2 threshold.
EXAMPLE_PROBS = {
    "Wildfire": 0.01,
    "Storm": 0.10,
    "Landslide": 0.05,
    "Hurricane": 0.61,
    "Flood": 0.21,
    "Earthquake": 0.01,
    "Tsunami": 0.01,
}


def dist(probs: dict) -> RoutingDistribution:
    return RoutingDistribution(dict(probs))


def distributions(draw):
    weights = draw(
        st.lists(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
            min_size=7,
            max_size=7,
        )
    )
    total = sum(weights)
    if total == 0:
        weights = [1.0] * 7
        total = 7.0
    return dist({h: w / total for h, w in zip(HAZARD_CATEGORIES, weights)})


random_distributions = st.builds(lambda d: d, st.composite(distributions)())


# ---------------------------------------------------------------------------
# RoutingDistribution validation
# ---------------------------------------------------------------------------


def test_distribution_requires_all_seven_keys():
    with pytest.raises(ValueError):
        RoutingDistribution({"Flood": 1.0})
    with pytest.raises(ValueError):
        RoutingDistribution({**EXAMPLE_PROBS, "Volcano": 0.0})


def test_distribution_requires_unit_sum():
    bad = dict(EXAMPLE_PROBS)
    bad["Flood"] = 0.5
    with pytest.raises(ValueError, match="sum"):
        RoutingDistribution(bad)


def test_uniform_and_concentrated_helpers():
    assert sum(RoutingDistribution.uniform().probs.values()) == pytest.approx(1.0)
    conc = RoutingDistribution.concentrated("Tsunami")
    assert conc.probs["Tsunami"] == 1.0


# ---------------------------------------------------------------------------
# active_set
# ---------------------------------------------------------------------------


def test_worked_example_active_set():
    active = active_set(dist(EXAMPLE_PROBS), tau=0.2)
    assert active.hazards == ("Hurricane", "Flood")


def test_uniform_distribution_falls_back_to_first_category():
    active = active_set(RoutingDistribution.uniform(), tau=0.2)
    assert active.hazards == ("Wildfire",)


def test_concentrated_distribution():
    active = active_set(RoutingDistribution.concentrated("Earthquake"), tau=0.2)
    assert active.hazards == ("Earthquake",)


def test_active_set_never_empty():
    probs = {h: 0.0 for h in HAZARD_CATEGORIES}
    probs["Landslide"] = 1.0
    active = active_set(dist(probs), tau=2.0)  # nothing reaches the threshold
    assert active.hazards == ("Landslide",)


@settings(max_examples=80, deadline=None)
@given(d=random_distributions, tau_low=st.floats(0.0, 1.0), tau_high=st.floats(0.0, 1.0))
def test_raising_tau_never_enlarges_active_set(d, tau_low, tau_high):
    lo, hi = sorted((tau_low, tau_high))
    assert set(active_set(d, hi).hazards) <= set(active_set(d, lo).hazards)


# ---------------------------------------------------------------------------
# allocate_budget
# ---------------------------------------------------------------------------


def test_worked_example_quotas():
    # shares: 0.61/0.82*50 = 37.195..., 0.21/0.82*50 = 12.804...
    # floors 37/12, one unit left, Flood has the larger fractional part.
    d = dist(EXAMPLE_PROBS)
    active = active_set(d, tau=0.2)
    budget = allocate_budget(d, active, 50)
    assert budget.quotas == {"Hurricane": 37, "Flood": 13}
    assert budget.total == 50


def test_single_active_hazard_gets_everything():
    d = RoutingDistribution.concentrated("Flood")
    budget = allocate_budget(d, active_set(d), 50)
    assert budget.quotas == {"Flood": 50}


def test_equal_probabilities_tie_by_category_order():
    probs = {h: 0.0 for h in HAZARD_CATEGORIES}
    probs["Storm"] = 0.5
    probs["Flood"] = 0.5
    d = dist(probs)
    budget = allocate_budget(d, active_set(d, 0.2), 51)
    # both shares are 25.5; the leftover unit goes to the earlier category
    assert budget.quotas == {"Storm": 26, "Flood": 25}


def test_zero_budget_is_valid():
    d = dist(EXAMPLE_PROBS)
    budget = allocate_budget(d, active_set(d), 0)
    assert budget.quotas == {"Hurricane": 0, "Flood": 0}


def test_budget_requires_active_hazards():
    with pytest.raises(ValueError):
        allocate_budget(dist(EXAMPLE_PROBS), ActiveSet(hazards=(), threshold=0.2), 50)


@settings(max_examples=150, deadline=None)
@given(d=random_distributions, total=st.sampled_from([1, 7, 50, 101]))
def test_apportionment_conserves_and_bounds_error(d, total):
    active = active_set(d, tau=0.2)
    budget = allocate_budget(d, active, total)
    assert sum(budget.quotas.values()) == total
    assert set(budget.quotas) == set(active.hazards)
    denom = sum(d.probs[h] for h in active.hazards)
    for hazard, quota in budget.quotas.items():
        exact = d.probs[hazard] / denom * total
        assert abs(quota - exact) < 1.0
        assert quota >= 0
        assert math.isfinite(exact)
