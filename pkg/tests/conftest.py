import numpy as np
import pytest

from movant.channel import channel_state
from movant.harness import default_scenario
from movant.positioning import optimize_positions
from movant.scenario import Deployment, Scenario, Topology, two_antenna_line_scenario


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so per-test timings measure compute."""
    scenario = two_antenna_line_scenario(4.0, 6.0)
    channel_state(scenario, scenario.initial_positions)
    optimize_positions(scenario, 0.5)


@pytest.fixture(scope="session")
def case_wide():
    """Two antennas on a line starting 2 wavelengths apart."""
    return two_antenna_line_scenario(4.0, 6.0)


@pytest.fixture(scope="session")
def case_narrow():
    """Two antennas on a line starting 0.5 wavelengths apart."""
    return two_antenna_line_scenario(5.0, 5.5)


@pytest.fixture(scope="session")
def default_2d():
    return default_scenario()


def random_instance(rng, n_max=6, k_max=4, cond_cap=1e4, trace_cap=50.0, region=8.0):
    """Well-conditioned random scenario with order-one fading.

    The condition and trace caps keep the finite-difference oracle's
    round-off noise (about 1e-10 times the objective) below the comparison
    tolerances; the analytic gradients themselves have no such limit.
    """
    while True:
        n = int(rng.integers(1, n_max + 1))
        k = int(rng.integers(1, min(n, k_max) + 1))
        scenario = Scenario(
            num_antennas=n,
            num_users=k,
            elevation_angles=rng.uniform(-np.pi / 2, np.pi / 2, k),
            azimuth_angles=rng.uniform(-np.pi / 2, np.pi / 2, k),
            fading_coeffs=rng.uniform(0.5, 2.0, k),
            noise_power=float(rng.uniform(0.5, 2.0)),
            total_power=float(rng.uniform(0.5, 4.0)),
            interval=5.0,
            region_side=region,
            min_spacing=0.0,
            max_speed=1.0,
            initial_positions=Deployment(rng.uniform(0.0, region, (n, 2))),
            topology=Topology.SQUARE_2D,
        )
        H = np.exp(
            -1j
            * scenario.wavenumber
            * (scenario.initial_positions.coords @ scenario.direction_vectors().T)
        ) * scenario.amplitudes()[None, :]
        gram = H.conj().T @ H
        eigvals = np.linalg.eigvalsh(gram)
        if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > cond_cap:
            continue
        if (1.0 / eigvals).sum() > trace_cap:
            continue
        return scenario
