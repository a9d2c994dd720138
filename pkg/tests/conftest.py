from pathlib import Path

import numpy as np
import pytest

from modules.quanton_state import PureState, QuantonState, StateManager

JSONS = Path(__file__).resolve().parent.parent / 'jsons'


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv('DUALITY_LAB_THREADS', '1')


@pytest.fixture
def jsons_dir():
    return JSONS


@pytest.fixture
def state_manager():
    return StateManager()


@pytest.fixture
def equal_pure2(state_manager):
    return state_manager.from_pure(PureState.equal_superposition(2))


@pytest.fixture
def biased_pure(state_manager):
    return state_manager.from_pure(PureState([np.sqrt(0.9), np.sqrt(0.1)]))


@pytest.fixture
def diag_532():
    return QuantonState(np.diag([0.5, 0.3, 0.2]))
