import numpy as np
import pytest

from causalwmmse.netgen import NetworkInstance

ACCEPTANCE_RESULTS = []


def make_net(gain, n_known, noise=1.0, max_power=1.0, weights=1.0):
    gain = np.asarray(gain, dtype=float)
    n = gain.shape[0]
    return NetworkInstance(
        gain=gain,
        known_links=np.arange(n_known),
        latent_links=np.arange(n_known, n),
        noise_power=np.broadcast_to(np.asarray(noise, dtype=float), (n,)).copy(),
        max_power=np.broadcast_to(np.asarray(max_power, dtype=float), (n_known,)).copy(),
        weights=np.broadcast_to(np.asarray(weights, dtype=float), (n_known,)).copy(),
    )


def random_net(rng, n_known, n_latent=0, *, cross=0.3, noise=0.1, max_power=1.0, weights=None):
    """Unit-scale interference channel with strong direct links."""
    n = n_known + n_latent
    gain = cross * rng.random((n, n))
    gain[np.arange(n), np.arange(n)] = 1.0 + rng.random(n)
    if weights is None:
        weights = 0.5 + rng.random(n_known)
    return make_net(gain, n_known, noise=noise, max_power=max_power, weights=weights)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"criterion {cid}: {'PASS' if ok else 'FAIL'}  {detail}")
