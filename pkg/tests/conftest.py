import numpy as np
import pytest

from relay_beamform.scenario import ChannelSet, ScenarioConfig


def db(x):
    return 10.0 ** (x / 10.0)


def hand_config(**kw):
    """Single relay, single pair, unit channels and powers."""
    base = dict(R=1, M=1, N=1, P_p=1.0, P_s=1.0, sigma_n2=1.0, I_p=2.0, P_t=3.0)
    base.update(kw)
    return ScenarioConfig(**base)


def ones_channels(R=1, M=1, N=1):
    return ChannelSet(H=np.ones((R, M)), g=np.ones(R), Hhat=np.ones((N, R)), ghat=np.ones(R))


def random_weights(rng, R, scale=1.0):
    return scale * (rng.standard_normal(R) + 1j * rng.standard_normal(R))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def report(criterion, passed, detail=""):
    """Record one acceptance line; printed again in the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
