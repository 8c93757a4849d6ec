"""Shared fixtures: the bundled grid scenario and its global system."""

import pytest

from secureplan import abstraction
from secureplan.scenario import bundled_scenario_path, load_scenario


@pytest.fixture(scope="session")
def example1():
    return load_scenario(bundled_scenario_path("example1"))


@pytest.fixture(scope="session")
def grid_partition(example1):
    return example1.partition


@pytest.fixture(scope="session")
def grid_gwts(example1):
    wts = [abstraction.build_wts(example1.partition, ag)
           for ag in example1.agents]
    return abstraction.product_gwts(wts)
