import os

import numpy as np
import pytest

from starfan.core.fan import kite_fan, type_b_fan
from starfan.core.loss import data_matrix
from starfan.data import samples
from starfan.infra.config import reset_settings

os.environ.setdefault("STARFAN_THREADS", "2")


@pytest.fixture
def env(monkeypatch):
    """monkeypatch for STARFAN_* variables; cached settings are dropped on both sides."""
    reset_settings()
    yield monkeypatch
    monkeypatch.undo()
    reset_settings()


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240607))


@pytest.fixture(scope="session")
def line_fan():
    return samples.line_fan()


@pytest.fixture(scope="session")
def kite2():
    return kite_fan(2)


@pytest.fixture(scope="session")
def typeb2():
    return type_b_fan(2)


@pytest.fixture(scope="session")
def line_listed():
    return samples.line_dataset("listed")


@pytest.fixture(scope="session")
def line_complemented():
    return samples.line_dataset("complemented")


@pytest.fixture(scope="session")
def line_matrix(line_fan, line_listed):
    return data_matrix(line_fan, line_listed)


@pytest.fixture(scope="session")
def diagonal():
    return samples.diagonal_dataset()
