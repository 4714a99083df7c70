import numpy as np
import pytest

from conceptorclf.classifier import TrainingConfig, train
from conceptorclf.synthetic import ClassSpec, SynthSpec, synth_generate


def random_psd(rng, n, rank=None):
    A = rng.standard_normal((n, rank or n))
    return A @ A.T / (rank or n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def two_class_spec():
    # period 8 vs period 4 frames at 1 Hz sampling
    return SynthSpec(
        [
            ClassSpec("A", 20, frequencies=(1 / 8,), amplitudes=(1.0,), noise=0.05),
            ClassSpec("B", 20, frequencies=(1 / 4,), amplitudes=(1.0,), noise=0.05),
        ],
        n_channels=3,
        length_range=(40, 80),
        frame_rate=1.0,
    )


@pytest.fixture(scope="session")
def two_class_data(two_class_spec):
    return synth_generate(two_class_spec, seed=11)


@pytest.fixture(scope="session")
def small_config():
    return TrainingConfig(n_neurons=50, seed=5, washout=5)


@pytest.fixture(scope="session")
def small_model(two_class_data, small_config):
    return train(two_class_data, small_config)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
