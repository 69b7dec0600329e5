import numpy as np
import pytest

from graspdec.config import default_config
from graspdec.pipeline import prepare_paradigm
from graspdec.synth import SynthConfig, generate_session


@pytest.fixture(scope="session")
def small_session():
    """8 ME trials/class at 20 dB; shared across tests that just need data."""
    cfg = SynthConfig(trials_per_class=8, mi_trials_per_class=2, snr_db=20.0, seed=42)
    eeg, emg, events, truth = generate_session(cfg)
    return cfg, eeg, emg, events, truth


@pytest.fixture(scope="session")
def me_data(small_session):
    _, eeg, emg, events, _ = small_session
    return prepare_paradigm(eeg, emg, events, default_config(), "ME")


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
