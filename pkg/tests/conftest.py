from __future__ import annotations

import pytest

from cohpow import cohesive, harness, orders, power
from cohpow.cohesive import Horizon


@pytest.fixture(scope="session")
def approx():
    return harness.maximal(2000)


@pytest.fixture(scope="session")
def horizon():
    return Horizon()


@pytest.fixture(scope="session")
def view(approx, horizon):
    return cohesive.settled_view(approx, horizon)


@pytest.fixture(scope="session")
def toy_ctx(view, horizon):
    return power.make_context(orders.thm4_order(orders.ToyInjection()), view, horizon)


@pytest.fixture(scope="session")
def nat_ctx(view, horizon):
    return power.make_context(orders.std_nat(), view, horizon)
