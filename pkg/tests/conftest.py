import time
from dataclasses import dataclass

import numpy as np
import pytest

from bosonet import Network, NetworkSpec, OscillatorSpec, Reservoir, WhiteNoise, normalize_superposition
from bosonet.dynamics import evolve_coherent
from bosonet.oracle import integrate
from bosonet.topology import CouplingSpec

ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(results, key=lambda k: int(k.split("-")[1])):
        ok, detail = results[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record_acceptance(request):
    """record(key, ok, detail): store a pass/fail line for the summary, then assert."""
    results = request.config.stash[ACCEPTANCE]

    def record(key, ok, detail):
        ok = bool(ok)
        prior = results.get(key)
        if prior is not None:
            ok = ok and prior[0]
            detail = f"{prior[1]}; {detail}"
        results[key] = (ok, detail)
        print(f"{key} {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"{key}: {detail}"

    return record


def two_cavity_spec(omega=(1.0, 1.0), lam=0.1, gammas=(0.05, 0.02)):
    """N=2 network, one white-noise reservoir per oscillator."""
    models = {f"r{i + 1}": WhiteNoise(g) for i, g in enumerate(gammas)}
    oscillators = tuple(OscillatorSpec(i + 1, w, Reservoir("distinct", f"r{i + 1}")) for i, w in enumerate(omega))
    return NetworkSpec(oscillators, (CouplingSpec(1, 2, lam),), "distinct", models)


@dataclass
class SharedRun:
    net: Network
    state: object
    cutoff: int
    times: np.ndarray
    grid: np.ndarray
    run: object
    seconds: float


@pytest.fixture(scope="session")
def cat_oracle_run():
    """The two-cavity even-cat configuration integrated once by the brute-force oracle.

    Samples cover t = 1, 5, 20 and a 20-point entropy grid on [1, 20].
    """
    start = time.perf_counter()
    net = Network.from_spec(two_cavity_spec())
    state = normalize_superposition([1, 1], [[1, 0], [-1, 0]])
    cutoff = 25
    rho0 = evolve_coherent(state, net.propagator(0.0)).density_matrix(cutoff)
    times = np.array([1.0, 5.0, 20.0])
    grid = np.linspace(1.0, 20.0, 20)
    run = integrate(net.generator(cutoff), rho0, 20.0, dt=0.1, sample_times=np.union1d(times, grid))
    return SharedRun(net, state, cutoff, times, grid, run, time.perf_counter() - start)
