import os

import pytest

from vremarket import (MarketConfig, TruncatedNormalModel, UniformModel,
                       build_empirical_model, load_records)

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")
SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")


@pytest.fixture(scope="session")
def base_config():
    """Demand 2 MWh, cap 1 k$/MWh, penalty 1.5 k$/MWh."""
    return MarketConfig(demand=2.0, price_cap=1.0, penalty=1.5)


@pytest.fixture(scope="session")
def tn_model():
    """Truncated normal, mean 1.5 MWh, std 1, support [0, 3]."""
    return TruncatedNormalModel(1.5, 1.0, hi=3.0)


@pytest.fixture(scope="session")
def symmetric_duopoly(tn_model):
    return [tn_model, TruncatedNormalModel(1.5, 1.0, hi=3.0)]


@pytest.fixture(scope="session")
def uniform_model():
    return UniformModel(hi=2.0)


@pytest.fixture(scope="session")
def solar_records():
    return load_records(os.path.join(DATA_DIR, "sample_solar.csv"))


@pytest.fixture(scope="session")
def solar_model(solar_records):
    return build_empirical_model(solar_records, month=7, hour=16)
